"""Orbits of f, exceptional-set probing, and orbit-vs-radius-map verification."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import NeedsTower, PoleHit, PrecisionExhausted, StarValueRequired
from .field import (
    ExactElement,
    Radius,
    TruncatedElement,
    _rational_sqrt,
    norm,
)
from .radius import (
    C1RadiusModel,
    LimitVerdict,
    NoFixRadiusMap,
    PiecewiseSpec,
    Regime,
    VerdictKind,
    classify_limit,
    predict_c1,
    predict_nofix,
    step,
)
from .rational_map import (
    CaseTag,
    MapParams,
    classify_case,
    eval_f,
    fixed_points,
    star_value,
    two_cycle,
)
from .sampling import point_on_sphere

DEFAULT_CEILING_BITS = 1 << 20
AUTO_PRECISION = 160
DEFAULT_STOP = (Fraction(-60), Fraction(60))


@dataclass(frozen=True)
class Event:
    kind: str
    step: int
    anchor: Optional[str] = None
    radii: tuple = ()
    period: Optional[int] = None

    def to_json(self):
        out = {"event": self.kind, "step": self.step}
        if self.anchor is not None:
            out["anchor"] = self.anchor
        if self.radii:
            out["radii"] = [[r.to_json() for r in rs] for rs in self.radii]
        if self.period is not None:
            out["period"] = self.period
        return out


@dataclass
class Trajectory:
    params: MapParams
    points: list
    anchors: dict
    radius_logs: dict
    events: list = field(default_factory=list)
    backend: str = "exact"

    def event(self, kind: str) -> Optional[Event]:
        return next((e for e in self.events if e.kind == kind), None)

    @property
    def steps(self) -> int:
        return len(self.points) - 1

    def records(self):
        """One JSON-ready record per orbit point."""
        flags = {}
        for e in self.events:
            flags.setdefault(e.step, []).append(e.kind)
        for k, x in enumerate(self.points):
            yield {
                "n": k,
                "point": str(x) if isinstance(x, ExactElement) else repr(x),
                "radius_exp": {name: log[k].to_json() for name, log in self.radius_logs.items()
                               if k < len(log)},
                "events": flags.get(k, []),
            }


def anchors_for(params: MapParams) -> dict:
    """Fixed points or cycle points the radius logs are measured against."""
    case = classify_case(params)
    try:
        if case is CaseTag.UNIQUE_FIXED:
            return {"x0": fixed_points(params)[0].point}
        if case is CaseTag.TWO_FIXED:
            return {f"x{i + 1}": fp.point for i, fp in enumerate(fixed_points(params))}
        if case is CaseTag.NO_FIXED:
            tc = two_cycle(params)
            return {"t1": tc.t1, "t2": tc.t2}
    except NeedsTower:
        pass
    return {}


def _distance(x, anchor, p):
    if isinstance(x, TruncatedElement):
        return (x - anchor).norm()
    return norm(x - anchor, p)


def _truncated_targets(traj, p, precision):
    targets = {}
    for k, v in traj.anchors.items():
        try:
            targets[k] = TruncatedElement.from_exact(v, p, precision + 64)
        except NeedsTower:
            traj.radius_logs.pop(k, None)
    return targets


def iterate(params: MapParams, x0, n: int, backend: str = "exact", precision: int = 40,
            ceiling_bits: int = DEFAULT_CEILING_BITS, stop_exp=None,
            detect_cycles: bool = True) -> Trajectory:
    """x_0, f(x_0), ..., up to n steps.

    Backends: "exact", "trunc" (``precision`` p-adic digits, tracked) and
    "auto", which runs exactly until a coordinate outgrows ``ceiling_bits``
    and then continues truncated at AUTO_PRECISION digits.  Truncated radii
    are still certified: an undecidable comparison raises instead of guessing.

    Stops early on a pole, an exact landing on an anchor, exhausted precision,
    the bit-size ceiling (exact backend), or when ``stop_exp = (lo, hi)`` is
    given and a radius exponent crosses it.
    """
    if backend not in ("exact", "trunc", "auto"):
        raise ValueError(f"unknown backend {backend!r}")
    p = params.p
    x = ExactElement._coerce(x0)
    anchors = anchors_for(params)
    traj = Trajectory(params, [], anchors, {k: [] for k in anchors}, backend=backend)
    if backend == "trunc":
        targets = _truncated_targets(traj, p, precision)
        if x == params.pole:
            traj.points.append(x)
            traj.events.append(Event("PoleHit", 0))
            return traj
        x = TruncatedElement.from_exact(x, p, precision)
    else:
        targets = anchors
    for k in range(n + 1):
        try:
            dists = {name: _distance(x, t, p) for name, t in targets.items()}
        except PrecisionExhausted:
            traj.events.append(Event("PrecisionExhausted", k))
            break
        except NeedsTower:
            dists = {}
        traj.points.append(x)
        for name, r in dists.items():
            traj.radius_logs[name].append(r)
        hit = next((nm for nm, r in dists.items() if r.is_zero), None)
        if hit is not None:
            traj.events.append(Event("ConvergedTo", k, anchor=hit))
            break
        if stop_exp is not None and dists:
            lo, hi = stop_exp
            nearest = min(dists, key=lambda nm: dists[nm])
            if dists[nearest].exp <= lo:
                traj.events.append(Event("ConvergedTo", k, anchor=nearest))
                break
            if all(r.exp >= hi for r in dists.values()):
                traj.events.append(Event("Escaped", k))
                break
        if k == n:
            break
        if isinstance(x, ExactElement) and x.bit_size() > ceiling_bits:
            if backend != "auto":
                traj.events.append(Event("SizeCeiling", k))
                break
            try:
                x = TruncatedElement.from_exact(x, p, AUTO_PRECISION)
            except NeedsTower:
                traj.events.append(Event("SizeCeiling", k))
                break
            targets = _truncated_targets(traj, p, AUTO_PRECISION)
            traj.events.append(Event("SwitchedToTruncated", k))
        try:
            x = eval_f(params, x)
        except PoleHit:
            traj.events.append(Event("PoleHit", k))
            break
        except PrecisionExhausted:
            traj.events.append(Event("PrecisionExhausted", k + 1))
            break
        if isinstance(x, TruncatedElement) and x.is_tracked_zero:
            traj.events.append(Event("PrecisionExhausted", k + 1))
            break
    if detect_cycles:
        cyc = _sphere_cycle(traj)
        if cyc is not None:
            traj.events.append(cyc)
    return traj


def _sphere_cycle(traj: Trajectory) -> Optional[Event]:
    """Smallest period >= 2 that the radius logs repeat with over their last 3 periods."""
    names = sorted(traj.radius_logs)
    if not names:
        return None
    rows = list(zip(*(traj.radius_logs[nm] for nm in names)))
    L = len(rows)
    if L >= 2 and all(r == rows[-1] for r in rows[-3:]):
        return None
    for k in range(2, L // 3 + 1):
        tail = rows[L - 3 * k:]
        if all(tail[i] == tail[i + k] for i in range(2 * k)):
            radii = tuple(tuple(col) for col in zip(*rows[L - k:]))
            return Event("SphereCycleDetected", L - 1, radii=radii, period=k)
    return None


# --------------------------------------------------------------------------
# exceptional points


def sqrt_in_field(z: ExactElement, D) -> Optional[ExactElement]:
    """A square root of z inside Q(sqrt D) (D = 0 for Q), or None."""
    if not z:
        return ExactElement(0)
    if z.is_rational:
        r = _rational_sqrt(z.a)
        if r is not None:
            return ExactElement(r)
        if D:
            v = _rational_sqrt(z.a / D)
            if v is not None:
                return ExactElement(0, v, D)
        return None
    if D and z.D != D:
        try:
            z = z._rehome(D)
        except NeedsTower:
            return None
    s = _rational_sqrt(z.norm_form())
    if s is None:
        return None
    for sgn in (1, -1):
        u = _rational_sqrt((z.a + sgn * s) / 2)
        if u:
            return ExactElement(u, z.b / (2 * u), z.D)
    return None


def preimages_in_field(params: MapParams, z, D=0):
    """All y in Q(sqrt D) with f(y) = z."""
    a, b, c, d = params.a, params.b, params.c, params.d
    z = ExactElement._coerce(z)
    lin = a - c * z
    disc = lin * lin - 4 * (b - d * z)
    root = sqrt_in_field(disc, D)
    if root is None:
        return []
    ys = {(-lin + root) / 2, (-lin - root) / 2}
    return sorted(ys, key=str)


@dataclass(frozen=True)
class ExceptionalVerdict:
    in_set: bool
    depth: int
    step: Optional[int] = None
    target: Optional[str] = None

    def to_json(self):
        if self.in_set:
            return {"verdict": "InSet", "step": self.step, "target": self.target}
        return {"verdict": "NotWithinDepth", "depth": self.depth}


def exceptional_targets(params: MapParams) -> dict:
    """The pole, plus its two preimages -a +- sqrt(-b) when f has no fixed point."""
    out = {"pole": params.pole}
    if classify_case(params) is CaseTag.NO_FIXED:
        root = ExactElement.sqrt(-params.b)
        out["pole_preimage+"] = -params.a + root
        out["pole_preimage-"] = -params.a - root
    return out


def _field_of(*xs):
    """Common radicand of the inputs (0 for Q); NeedsTower if they disagree."""
    D = 0
    for x in xs:
        if not x.is_rational:
            if D and x.D != D:
                x._rehome(D)
            D = D or x.D
    return D


def exceptional_probe(params: MapParams, x, depth: int, node_cap: int = 100_000) -> ExceptionalVerdict:
    """Does the forward orbit of x hit an exceptional target within ``depth`` steps?

    Forward iteration is hopeless beyond ~20 steps (heights double), so the
    search runs backwards: every orbit point lies in the field of x, hence x
    hits the pole after n steps iff x is among the in-field n-fold preimages
    of the pole.  Those form a small tree that is enumerated level by level.
    """
    x = ExactElement._coerce(x)
    D = _field_of(x, params.a, params.b, params.c, params.d)
    level = {params.pole: 0}
    frontier = [params.pole]
    for n in range(1, depth + 2):
        if x in level or not frontier:
            break
        nxt = []
        for z in frontier:
            for y in preimages_in_field(params, z, D):
                if y not in level:
                    level[y] = n
                    nxt.append(y)
        if len(level) > node_cap:
            raise RuntimeError("in-field preimage tree exceeded its node cap")
        frontier = nxt
    if x not in level:
        return ExceptionalVerdict(False, depth)
    n = level[x]
    targets = exceptional_targets(params)
    if n >= 1 and len(targets) > 1:
        y = replay(params, x, n - 1)
        name = "pole_preimage+" if y == targets["pole_preimage+"] else "pole_preimage-"
        return ExceptionalVerdict(True, depth, n - 1, name)
    if n > depth:
        return ExceptionalVerdict(False, depth)
    return ExceptionalVerdict(True, depth, n, "pole")


def replay(params: MapParams, x, k: int) -> ExactElement:
    x = ExactElement._coerce(x)
    for _ in range(k):
        x = eval_f(params, x)
    return x


def certificate_replays(params: MapParams, x, verdict: ExceptionalVerdict) -> bool:
    if not verdict.in_set:
        return True
    return replay(params, x, verdict.step) == exceptional_targets(params)[verdict.target]


def forward_probe(params: MapParams, x, depth: int, ceiling_bits: int = DEFAULT_CEILING_BITS):
    """Direct forward scan; None when the size ceiling stops it before ``depth``."""
    targets = exceptional_targets(params)
    x = ExactElement._coerce(x)
    for n in range(depth + 1):
        for name, t in targets.items():
            if x == t:
                return ExceptionalVerdict(True, depth, n, name)
        if n == depth:
            break
        if x.bit_size() > ceiling_bits:
            return None
        x = eval_f(params, x)
    return ExceptionalVerdict(False, depth)


# --------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class StepCheck:
    n: int
    anchor: str
    observed: Radius
    lo: Radius
    hi: Optional[Radius]
    match: bool

    def to_json(self):
        pred = {"exp": self.lo.to_json()} if self.lo == self.hi else \
            {"interval": [self.lo.to_json(), self.hi.to_json() if self.hi else "inf"]}
        return {"n": self.n, "anchor": self.anchor, "observed": self.observed.to_json(),
                "predicted": pred, "match": self.match}


@dataclass
class VerificationReport:
    params: MapParams
    x0: ExactElement
    case: CaseTag
    model: str
    checks: list
    verdicts: dict
    claim: dict
    events: list
    notes: list
    steps_run: int

    @property
    def first_divergence(self) -> Optional[StepCheck]:
        return next((c for c in self.checks if not c.match), None)

    @property
    def passed(self) -> bool:
        return self.first_divergence is None and self.claim.get("holds") is not False

    def to_json(self):
        fd = self.first_divergence
        return {
            "params": self.params.as_dict(),
            "x0": str(self.x0),
            "case": self.case.value,
            "model": self.model,
            "steps_run": self.steps_run,
            "passed": self.passed,
            "first_divergence": fd.to_json() if fd else None,
            "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
            "claim": self.claim,
            "events": [e.to_json() for e in self.events],
            "notes": self.notes,
            "checks": [c.to_json() for c in self.checks],
        }


def _corrupt(r: Radius) -> Radius:
    return Radius.of(r.exp + 1) if r.finite else Radius.of(0)


def _chain(checks, name, log, points, predict_one, corrupt_step):
    """Predict log[k] from the previous prediction; resync to the observation after a miss.

    Returns False if a breakpoint value could not be resolved at the
    available precision (the remaining steps are then left unchecked).
    """
    pred = log[0]
    for k in range(1, len(log)):
        try:
            nxt = predict_one(pred, points[k - 1], k)
        except PrecisionExhausted:
            return False
        if corrupt_step == k:
            nxt = _corrupt(nxt)
        ok = nxt == log[k]
        checks.append(StepCheck(k, name, log[k], nxt, nxt, ok))
        pred = nxt if ok else log[k]
    return True


def _check_schedule(schedule, observed):
    """True iff every scheduled entry admits the matching observed radius."""
    return all(e.admits(r) for e, r in zip(schedule, observed))


def _verdict_holds(verdict: LimitVerdict, log, traj: Trajectory):
    kind = verdict.kind
    if kind is VerdictKind.FIXED:
        return all(r == verdict.value for r in log)
    if kind is VerdictKind.CONVERGES_TO and verdict.value.is_zero:
        if traj.event("ConvergedTo"):
            return True
        tail = log[-3:]
        return None if all(x > y for x, y in zip(tail, tail[1:])) else False
    if kind is VerdictKind.CONVERGES_TO:
        return log[-1] == verdict.value if len(log) > (verdict.transient or 0) else None
    if kind is VerdictKind.DIVERGES:
        return True if traj.event("Escaped") else None
    if kind is VerdictKind.ENTERS_CYCLE:
        ev = traj.event("SphereCycleDetected")
        return None if ev is None else ev.period == verdict.k
    return None


def verify(params: MapParams, x0, n: int, stop_exp=DEFAULT_STOP, backend: str = "auto",
           ceiling_bits: int = 1 << 16, corrupt_step: Optional[int] = None) -> VerificationReport:
    """Iterate x0 and check every step against the radius model for its case.

    Breakpoint values are resolved from the actual orbit point by the
    one-step distance formula, which shares no code path with evaluating f.
    ``corrupt_step`` perturbs one prediction (negative control).
    """
    x0 = ExactElement._coerce(x0)
    case = classify_case(params)
    traj = iterate(params, x0, n, backend=backend, ceiling_bits=ceiling_bits, stop_exp=stop_exp)
    checks, verdicts, notes = [], {}, []
    claim = {"name": "none", "holds": None}
    p = params.p
    if traj.event("PoleHit"):
        notes.append("orbit reached the pole; report truncated there")

    if case is CaseTag.IDENTITY:
        model = "identity"
        claim = {"name": "every point fixed", "holds": all(x == x0 for x in traj.points)}

    elif case is CaseTag.UNIQUE_FIXED:
        fp = fixed_points(params)[0]
        xf = fp.point
        cm = C1RadiusModel.from_multiplier(fp.multiplier_norm, fp.delta)
        model = f"c=1 {cm.regime.value}: delta={fp.delta}, q={fp.multiplier_norm}"
        log = traj.radius_logs["x0"]

        def one(r, point, k):
            prov = lambda which, rr: star_value(params, xf, point, rr)  # noqa: E731
            return step(cm.spec(prov), r)

        if not _chain(checks, "x0", log, traj.points, one, corrupt_step):
            notes.append("breakpoint value undecidable at tracked precision; later steps unchecked")
        pred = predict_c1(cm, log[0])
        verdicts["x0"] = pred.verdict
        sched_ok = _check_schedule(pred.schedule, log[1:])
        holds = _verdict_holds(pred.verdict, log, traj)
        claim = {"name": pred.verdict.case, "schedule_ok": sched_ok,
                 "holds": False if not sched_ok else holds}
        if cm.regime is Regime.ATTRACTING and log[0] == fp.delta:
            claim["branch"] = "stays on S_delta" if all(r == fp.delta for r in log) else "leaves S_delta"
        if cm.regime is Regime.REPELLING:
            notes.append("exceptional set taken as the pole preimages of this map")
        if pred.verdict.kind is VerdictKind.SPHERE_SET and len(log) > len(pred.schedule):
            claim["observed_nu"] = log[len(pred.schedule)].to_json()

    elif case is CaseTag.TWO_FIXED:
        fps = fixed_points(params)
        model = "two fixed points"
        claims = []
        for i, fp in enumerate(fps, 1):
            name = f"x{i}"
            if name not in traj.radius_logs:
                continue
            log = traj.radius_logs[name]
            xi = fp.point

            def one(r, point, k, xi=xi, fp=fp):
                prov = lambda which, rr: star_value(params, xi, point, rr)  # noqa: E731
                return step(PiecewiseSpec.for_anchor(fp.alpha_i, fp.beta_i, params.c_norm, prov), r)

            if not _chain(checks, name, log, traj.points, one, corrupt_step):
                notes.append(f"{name}: breakpoint value undecidable at tracked precision")
            spec = PiecewiseSpec.for_anchor(fp.alpha_i, fp.beta_i, params.c_norm)
            bps = set(spec.breakpoints)
            if any(r in bps for r in log):
                claims.append(None)
                notes.append(f"{name}: orbit visits a breakpoint sphere; behaviour resolved per step")
                continue
            try:
                v = classify_limit(spec, log[0])
            except StarValueRequired:
                claims.append(None)
                continue
            verdicts[name] = v
            claims.append(_verdict_holds(v, log, traj))
        holds = False if False in claims else (True if True in claims else None)
        claim = {"name": "radius-map limit", "holds": holds}

    else:
        tc = two_cycle(params)
        model = f"2-cycle: h={tc.h}"
        l1, l2 = traj.radius_logs["t1"], traj.radius_logs["t2"]
        start = "t2" if l2[0] < l1[0] else "t1"
        other = {"t1": "t2", "t2": "t1"}
        names = [start if k % 2 == 0 else other[start] for k in range(len(l1))]
        log = [traj.radius_logs[nm][k] for k, nm in enumerate(names)]
        anchors = {"t1": tc.t1, "t2": tc.t2}

        def one(r, point, k):
            t = anchors[names[k - 1]]
            s = t + params.a
            y = point - t

            def prov(which, rr):
                return rr * norm(y + 3 * s, p) / norm(y + s, p)

            return NoFixRadiusMap(tc.h, p, prov).step(r)

        pred_log = []
        if not _chain(pred_log, "current", log, traj.points, one, corrupt_step):
            notes.append("breakpoint value undecidable at tracked precision")
        checks.extend(StepCheck(c.n, names[c.n], c.observed, c.lo, c.hi, c.match) for c in pred_log)
        pred = predict_nofix(tc.h, p, log[0], start_anchor=start)
        verdicts["cycle"] = pred.verdict
        sched_ok = _check_schedule(pred.schedule, log[1:])
        holds = _verdict_holds(pred.verdict, log, traj)
        claim = {"name": pred.verdict.case, "schedule_ok": sched_ok,
                 "holds": False if not sched_ok else holds, "anchor_start": start}
        if pred.verdict.kind is VerdictKind.SPHERE_SET and len(log) > 1:
            claim["observed_nu"] = max(log[1:]).to_json()

    return VerificationReport(params, x0, case, model, checks, verdicts, claim,
                              traj.events, notes, traj.steps)


# --------------------------------------------------------------------------
# basin probing


@dataclass(frozen=True)
class SphereSummary:
    exp: Fraction
    samples: int
    excluded: int
    converged: int
    invariance_violations: int
    branches: tuple = ()

    def to_json(self):
        out = {"radius_exp": str(self.exp), "samples": self.samples, "excluded": self.excluded,
               "converged": self.converged, "invariance_violations": self.invariance_violations}
        if self.branches:
            out["branches"] = list(self.branches)
        return out


def basin_probe(params: MapParams, radii, samples: int, n: int, threshold=-20,
                seed: int = 0, depth: int = 50):
    """Sample points on spheres about an attracting fixed point and summarise their fate."""
    if classify_case(params) is not CaseTag.UNIQUE_FIXED:
        raise ValueError("basin_probe needs c = 1 with a unique fixed point")
    fp = fixed_points(params)[0]
    if not fp.multiplier_norm < Radius.of(0):
        raise ValueError("basin_probe needs an attracting fixed point")
    rng = random.Random(seed)
    delta = fp.delta
    out = []
    for e in radii:
        e = Fraction(e)
        r = Radius.of(e)
        excluded = conv = viol = 0
        branches = []
        for _ in range(samples):
            x = point_on_sphere(fp.point, e, params.p, rng)
            if exceptional_probe(params, x, depth).in_set:
                excluded += 1
                continue
            traj = iterate(params, x, n, backend="auto", ceiling_bits=1 << 12,
                           stop_exp=(Fraction(threshold), Fraction(10**6)))
            log = traj.radius_logs["x0"]
            if traj.event("ConvergedTo"):
                conv += 1
            # a run cut short cannot certify invariance
            if r > delta and (traj.steps < n or any(s != r for s in log)):
                viol += 1
            if r == delta:
                branches.append(1 if all(s == delta for s in log) else 2)
        out.append(SphereSummary(e, samples, excluded, conv, viol, tuple(branches)))
    return out
