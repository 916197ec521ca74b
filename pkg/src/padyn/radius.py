"""Real dynamics of orbit radii.

Each p-adic orbit step moves the distance to an anchor point by a piecewise
rule of the current distance alone, except on one or two breakpoint spheres
where the new distance depends on the point itself.  Radii are handled as
exact exponents of p, so every comparison here is exact.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .errors import SpecConstraintError, StarValueRequired
from .field import INF, ONE, ZERO, Radius


class Kind(str, enum.Enum):
    PHI_LT = "PhiLT"  # alpha < beta
    PHI_GT = "PhiGT"  # beta < alpha
    PSI_EQ = "PsiEQ"  # alpha == beta


StarProvider = Callable[[str, Radius], Radius]


@dataclass(frozen=True)
class PiecewiseSpec:
    """One radius map.

    ``lower_star``/``upper_star`` are the raw breakpoint values (before the
    1/|c| factor): alpha*/beta* for PhiLT, beta'/alpha' for PhiGT and
    alpha-hat (stored as ``lower_star``) for PsiEQ.  ``provider`` is asked
    for a breakpoint value only when the corresponding field is None.
    """

    kind: Kind
    alpha: Radius
    beta: Radius
    c_norm: Radius = ONE
    lower_star: Optional[Radius] = None
    upper_star: Optional[Radius] = None
    provider: Optional[StarProvider] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        a, b = self.alpha, self.beta
        if a.is_inf or b.is_inf or not self.c_norm.finite:
            raise SpecConstraintError("alpha, beta, |c| must be finite (|c| nonzero)")
        if self.kind is Kind.PHI_LT and not a < b:
            raise SpecConstraintError("PhiLT needs alpha < beta")
        if self.kind is Kind.PHI_GT and not b < a:
            raise SpecConstraintError("PhiGT needs beta < alpha")
        if self.kind is Kind.PSI_EQ and a != b:
            raise SpecConstraintError("PsiEQ needs alpha == beta")
        lo, hi = self.lower_star, self.upper_star
        if self.kind is Kind.PHI_LT:
            if lo is not None and not a.is_zero and lo > a * a / b:
                raise SpecConstraintError("alpha* must be <= alpha^2/beta")
            if hi is not None and hi < b:
                raise SpecConstraintError("beta* must be >= beta")
        elif self.kind is Kind.PHI_GT:
            if hi is not None and hi > a:
                raise SpecConstraintError("alpha' must be <= alpha")
            if lo is not None and not b.is_zero and lo < a:
                raise SpecConstraintError("beta' must be >= alpha")

    # convenience constructors with the usual names
    @classmethod
    def phi_lt(cls, alpha, beta, c_norm=ONE, alpha_star=None, beta_star=None, provider=None):
        return cls(Kind.PHI_LT, alpha, beta, c_norm, alpha_star, beta_star, provider)

    @classmethod
    def phi_gt(cls, alpha, beta, c_norm=ONE, alpha_prime=None, beta_prime=None, provider=None):
        return cls(Kind.PHI_GT, alpha, beta, c_norm, beta_prime, alpha_prime, provider)

    @classmethod
    def psi_eq(cls, alpha, c_norm=ONE, alpha_hat=None, provider=None):
        return cls(Kind.PSI_EQ, alpha, alpha, c_norm, alpha_hat, None, provider)

    @classmethod
    def for_anchor(cls, alpha: Radius, beta: Radius, c_norm: Radius, provider=None):
        """Family selected by the ordering of alpha and beta."""
        if alpha < beta:
            return cls(Kind.PHI_LT, alpha, beta, c_norm, provider=provider)
        if beta < alpha:
            return cls(Kind.PHI_GT, alpha, beta, c_norm, provider=provider)
        return cls(Kind.PSI_EQ, alpha, beta, c_norm, provider=provider)

    @property
    def breakpoints(self):
        """(lower, upper) breakpoint radii; PsiEQ has a single one."""
        if self.kind is Kind.PHI_LT:
            return self.alpha, self.beta
        if self.kind is Kind.PHI_GT:
            return self.beta, self.alpha
        return self.alpha, self.alpha

    def star(self, which: str, r: Radius) -> Radius:
        val = self.lower_star if which == "lower" else self.upper_star
        if val is None and self.provider is not None:
            val = self.provider(which, r)
        if val is None:
            raise StarValueRequired(f"{self.kind.value}: value at the {which} breakpoint r = {r}")
        return val

    def star_bounds(self, which: str):
        """Admissible raw interval for a breakpoint value (None = unbounded)."""
        a, b = self.alpha, self.beta
        if self.kind is Kind.PHI_LT:
            return (ZERO, a * a / b) if which == "lower" else (b, None)
        if self.kind is Kind.PHI_GT:
            return (a, None) if which == "lower" else (ZERO, a)
        return (ZERO, None)

    @property
    def has_fixed_stars(self) -> bool:
        if self.kind is Kind.PSI_EQ:
            return self.lower_star is not None or self.alpha.is_zero
        need_lo = not self.breakpoints[0].is_zero
        return (self.lower_star is not None or not need_lo) and self.upper_star is not None

    def with_stars(self, lower=None, upper=None) -> "PiecewiseSpec":
        return PiecewiseSpec(self.kind, self.alpha, self.beta, self.c_norm,
                             lower if lower is not None else self.lower_star,
                             upper if upper is not None else self.upper_star, self.provider)

    def to_json(self):
        def star(v):
            return "deferred" if v is None else v.to_json()

        return {
            "kind": self.kind.value,
            "alpha": self.alpha.to_json(),
            "beta": self.beta.to_json(),
            "c": self.c_norm.to_json(),
            "lower_star": star(self.lower_star),
            "upper_star": star(self.upper_star),
        }

    @classmethod
    def from_json(cls, obj) -> "PiecewiseSpec":
        def star(v):
            return None if v == "deferred" else Radius.from_json(v)

        return cls(Kind(obj["kind"]), Radius.from_json(obj["alpha"]), Radius.from_json(obj["beta"]),
                   Radius.from_json(obj["c"]), star(obj["lower_star"]), star(obj["upper_star"]))


def step(spec: PiecewiseSpec, r: Radius) -> Radius:
    if r.is_zero or r.is_inf:
        return r
    k = spec.c_norm.inverse()
    a, b = spec.alpha, spec.beta
    if spec.kind is Kind.PSI_EQ:
        return spec.star("lower", r) * k if r == a else r * k
    lo, hi = spec.breakpoints
    if r < lo:
        return a / b * r * k
    if r == lo:
        return spec.star("lower", r) * k
    if r < hi:
        return (r * r / b if spec.kind is Kind.PHI_LT else a) * k
    if r == hi:
        return spec.star("upper", r) * k
    return r * k


def step_bounds(spec: PiecewiseSpec, r: Radius):
    """(lo, hi) enclosing step(r) without consulting any breakpoint value."""
    bps = spec.breakpoints
    if not r.is_zero and r in bps:
        which = "lower" if r == bps[0] else "upper"
        lo, hi = spec.star_bounds(which)
        k = spec.c_norm.inverse()
        return lo * k, (hi * k if hi is not None else None)
    v = step(spec, r)
    return v, v


# --------------------------------------------------------------------------
# limit classification


class VerdictKind(str, enum.Enum):
    CONVERGES_TO = "ConvergesTo"
    FIXED = "Fixed"
    ENTERS_CYCLE = "EntersCycle"
    DIVERGES = "DivergesToInfinity"
    SPHERE_SET = "LandsInSphereSet"
    NO_CYCLE = "NoCycleWithinBound"


@dataclass(frozen=True)
class LimitVerdict:
    kind: VerdictKind
    value: Optional[Radius] = None
    cycle: tuple = ()
    case: str = ""
    description: str = ""
    transient: Optional[int] = None

    @property
    def k(self) -> int:
        return len(self.cycle)

    def same_outcome(self, other: "LimitVerdict") -> bool:
        if self.kind is not other.kind:
            return False
        if self.kind is VerdictKind.ENTERS_CYCLE:
            return _canonical_cycle(self.cycle) == _canonical_cycle(other.cycle)
        return self.value == other.value

    def to_json(self):
        out = {"verdict": self.kind.value}
        if self.value is not None:
            out["value"] = self.value.to_json()
        if self.cycle:
            out["cycle"] = [r.to_json() for r in self.cycle]
            out["k"] = self.k
        if self.case:
            out["case"] = self.case
        if self.description:
            out["description"] = self.description
        if self.transient is not None:
            out["transient"] = self.transient
        return out


def _canonical_cycle(cycle):
    cyc = list(cycle)
    i = cyc.index(min(cyc))
    return tuple(cyc[i:] + cyc[:i])


def _ceil_div(num: Fraction, den: Fraction) -> int:
    return math.ceil(num / den)


def case_label(spec: PiecewiseSpec, r: Optional[Radius] = None) -> str:
    """Label of the piecewise regime that governs ``spec``."""
    c = spec.c_norm
    a, b = spec.alpha, spec.beta
    lo, hi = spec.lower_star, spec.upper_star
    if spec.kind is Kind.PHI_LT:
        if c == ONE:
            return "lt:c=1"
        if c > ONE:
            return "lt:c>1,upper*=c*beta" if hi == c * b else "lt:c>1"
        cb = c * b
        if a < cb:
            return "lt:c<1,alpha<c*beta"
        if a == cb:
            return "lt:c<1,alpha=c*beta,lower*=c*alpha" if lo == c * a else "lt:c<1,alpha=c*beta"
        if lo is None:
            return "lt:c<1,alpha>c*beta"
        if lo == c * a:
            return "lt:c<1,alpha>c*beta,lower*=c*alpha"
        return "lt:c<1,alpha>c*beta,lower*>c*alpha" if lo > c * a else "lt:c<1,alpha>c*beta,lower*<c*alpha"
    if spec.kind is Kind.PHI_GT:
        if c == ONE:
            return "gt:c=1,upper*=alpha" if hi == a else "gt:c=1"
        if c < ONE:
            return "gt:c<1,upper*=c*alpha" if hi == c * a else "gt:c<1"
        cb = c * b
        if a > cb:
            return "gt:c>1,alpha>c*beta"
        if a < cb:
            return "gt:c>1,alpha<c*beta,lower*=c*beta" if lo == cb else "gt:c>1,alpha<c*beta"
        return "gt:c>1,alpha=c*beta"
    if c == ONE:
        return "eq:c=1"
    return "eq:c>1" if c > ONE else "eq:c<1"


def _region_jump(spec: PiecewiseSpec, r: Radius):
    """Accelerate through an unbounded slope-one region.

    Returns ("limit", verdict_kind, value) when the orbit never leaves,
    ("jump", radius, n_steps) when it leaves after n_steps, or None when
    ``r`` is not in such a region.
    """
    a, b = spec.alpha, spec.beta
    cexp = spec.c_norm.exp
    lo, hi = spec.breakpoints
    e = r.exp
    if spec.kind is Kind.PSI_EQ and a.is_zero:
        if cexp == 0:
            return ("limit", VerdictKind.FIXED, r)
        return ("limit", VerdictKind.CONVERGES_TO if cexp > 0 else VerdictKind.DIVERGES,
                ZERO if cexp > 0 else INF)
    if r > hi:
        # e -> e - cexp
        if cexp == 0:
            return ("limit", VerdictKind.FIXED, r)
        if cexp < 0:
            return ("limit", VerdictKind.DIVERGES, INF)
        n = _ceil_div(e - hi.exp, cexp)
        return ("jump", Radius.of(e - n * cexp), n)
    if r < lo:
        shift = -cexp if spec.kind is Kind.PSI_EQ else a.exp - b.exp - cexp
        if shift == 0:
            return ("limit", VerdictKind.FIXED, r)
        if shift < 0:
            return ("limit", VerdictKind.CONVERGES_TO, ZERO)
        n = _ceil_div(lo.exp - e, shift)
        return ("jump", Radius.of(e + n * shift), n)
    if spec.kind is Kind.PHI_LT and lo < r < hi:
        fixed = b.exp + cexp
        if e == fixed:
            return ("limit", VerdictKind.FIXED, r)
        if e < fixed and lo.is_zero:
            return ("limit", VerdictKind.CONVERGES_TO, ZERO)
    return None


def classify_limit(spec: PiecewiseSpec, r: Radius, max_iter: int = 100_000) -> LimitVerdict:
    """Exact long-run behaviour of the radius orbit from ``r``.

    Off the breakpoints each map is continuous and nondecreasing in r, so
    between breakpoint visits an orbit is monotone; slope-one regions are
    crossed in a single jump, which makes the search finite.
    """
    label = case_label(spec, r)
    if r.is_zero:
        return LimitVerdict(VerdictKind.FIXED, ZERO, case=label, transient=0)
    if r.is_inf:
        return LimitVerdict(VerdictKind.DIVERGES, INF, case=label, transient=0)
    seen = {r: 0}
    states = [(r, 0)]
    cur, n = r, 0
    for _ in range(max_iter):
        jump = _region_jump(spec, cur)
        if jump is not None and jump[0] == "limit":
            _, vk, val = jump
            if vk is VerdictKind.FIXED:
                vk = VerdictKind.FIXED if cur == r else VerdictKind.CONVERGES_TO
                val = cur
            return LimitVerdict(vk, val, case=label, transient=n)
        if jump is not None:
            cur, n = jump[1], n + jump[2]
        else:
            cur, n = step(spec, cur), n + 1
        if cur.is_zero:
            return LimitVerdict(VerdictKind.CONVERGES_TO, ZERO, case=label, transient=n)
        if cur in seen:
            n0 = seen[cur]
            period = n - n0
            if period == 1:
                kind = VerdictKind.FIXED if n0 == 0 else VerdictKind.CONVERGES_TO
                return LimitVerdict(kind, cur, case=label, transient=n0)
            cyc = [cur]
            for _ in range(period - 1):
                cyc.append(step(spec, cyc[-1]))
            return LimitVerdict(VerdictKind.ENTERS_CYCLE, None, tuple(cyc), case=label, transient=n0)
        seen[cur] = n
        states.append((cur, n))
    raise RuntimeError("radius orbit did not settle; spec is outside the supported families")


def brute_force_limit(spec: PiecewiseSpec, r: Radius, steps: int = 200, margin: int = 20) -> LimitVerdict:
    """Plain iteration of ``step``; the independent check on classify_limit.

    Zero and infinity are decided once the exponent has moved at least
    ``margin`` past every breakpoint and the start, still moving outward.
    """
    finite = [x.exp for x in (spec.alpha, spec.beta, r) if x.finite]
    floor, ceiling = min(finite) - margin, max(finite) + margin
    orbit = [r]
    seen = {r: 0}
    for n in range(1, steps + 1):
        nxt = step(spec, orbit[-1])
        if nxt.is_zero:
            return LimitVerdict(VerdictKind.CONVERGES_TO, ZERO)
        if nxt in seen:
            n0 = seen[nxt]
            period = n - n0
            if period == 1:
                kind = VerdictKind.FIXED if n0 == 0 else VerdictKind.CONVERGES_TO
                return LimitVerdict(kind, nxt)
            return LimitVerdict(VerdictKind.ENTERS_CYCLE, None, tuple(orbit[n0:]))
        if nxt.exp < floor and nxt < orbit[-1]:
            return LimitVerdict(VerdictKind.CONVERGES_TO, ZERO)
        if nxt.exp > ceiling and nxt > orbit[-1]:
            return LimitVerdict(VerdictKind.DIVERGES, INF)
        seen[nxt] = n
        orbit.append(nxt)
    return LimitVerdict(VerdictKind.NO_CYCLE, orbit[-1], description="undecided within bound")


def find_cycle(spec: PiecewiseSpec, start: Radius, max_steps: int = 1000) -> LimitVerdict:
    """First exact repeat of the plain radius orbit (no acceleration)."""
    orbit = [start]
    seen = {start: 0}
    for n in range(1, max_steps + 1):
        nxt = step(spec, orbit[-1])
        if nxt in seen:
            n0 = seen[nxt]
            if n - n0 == 1:
                kind = VerdictKind.FIXED if n0 == 0 else VerdictKind.CONVERGES_TO
                return LimitVerdict(kind, nxt, transient=n0)
            return LimitVerdict(VerdictKind.ENTERS_CYCLE, None, tuple(orbit[n0:]), transient=n0)
        seen[nxt] = n
        orbit.append(nxt)
    return LimitVerdict(VerdictKind.NO_CYCLE, orbit[-1], description=f"no repeat within {max_steps} steps")


# --------------------------------------------------------------------------
# fixed point sets


@dataclass(frozen=True)
class Interval:
    lo: Radius
    hi: Radius  # INF for unbounded

    def contains(self, r: Radius) -> bool:
        return self.lo < r < self.hi

    def samples(self):
        lo = self.lo.exp if self.lo.finite else (self.hi.exp - 5 if self.hi.finite else Fraction(-5))
        hi = self.hi.exp if self.hi.finite else lo + 5
        if not self.lo.finite:
            lo = hi - 5
        span = hi - lo
        return [Radius.of(lo + span * Fraction(k, 4)) for k in (1, 2, 3)]

    def to_json(self):
        return {"open_interval": [self.lo.to_json(), self.hi.to_json()]}


@dataclass(frozen=True)
class FixedSet:
    points: tuple
    intervals: tuple
    case: str

    def contains(self, r: Radius) -> bool:
        return r in self.points or any(iv.contains(r) for iv in self.intervals)

    def members(self):
        out = list(self.points)
        for iv in self.intervals:
            out.extend(iv.samples())
        return out

    def to_json(self):
        return {"points": [r.to_json() for r in self.points],
                "intervals": [iv.to_json() for iv in self.intervals], "case": self.case}


def fixed_point_set(spec: PiecewiseSpec) -> FixedSet:
    """Solve step(r) = r piece by piece; every member is re-checked with ``step``."""
    if not spec.has_fixed_stars:
        raise StarValueRequired("fixed_point_set needs fixed breakpoint values")
    c = spec.c_norm
    a, b = spec.alpha, spec.beta
    pts, ivs = [ZERO], []
    if spec.kind is Kind.PSI_EQ:
        label = "eq:fixed"
        if c == ONE:
            if a.is_zero:
                ivs.append(Interval(ZERO, INF))
            else:
                ivs += [Interval(ZERO, a), Interval(a, INF)]
        if not a.is_zero and spec.lower_star == c * a:
            pts.append(a)
    else:
        label = "lt:fixed" if spec.kind is Kind.PHI_LT else "gt:fixed"
        lo, hi = spec.breakpoints
        if not lo.is_zero and a == c * b:
            ivs.append(Interval(ZERO, lo))
        if not lo.is_zero and spec.lower_star == c * lo:
            pts.append(lo)
        if spec.kind is Kind.PHI_LT and c < ONE and a < c * b:
            pts.append(c * b)
        if spec.kind is Kind.PHI_GT and c > ONE and a > c * b:
            pts.append(a / c)
        if spec.upper_star == c * hi:
            pts.append(hi)
        if c == ONE:
            ivs.append(Interval(hi, INF))
    fs = FixedSet(tuple(sorted(set(pts))), tuple(ivs), label)
    for r in fs.members():
        assert step(spec, r) == r, f"{r} listed as fixed but maps to {step(spec, r)}"
    return fs


# --------------------------------------------------------------------------
# c = 1 unique fixed point


class Regime(str, enum.Enum):
    ATTRACTING = "Attracting"
    INDIFFERENT = "Indifferent"
    REPELLING = "Repelling"


@dataclass(frozen=True)
class C1RadiusModel:
    regime: Regime
    delta: Radius
    q: Radius

    def __post_init__(self):
        want = {Regime.ATTRACTING: self.q < ONE, Regime.INDIFFERENT: self.q == ONE,
                Regime.REPELLING: self.q > ONE}[self.regime]
        if not want:
            raise SpecConstraintError(f"multiplier norm {self.q} does not match {self.regime.value}")

    @classmethod
    def from_multiplier(cls, q: Radius, delta: Radius) -> "C1RadiusModel":
        regime = Regime.ATTRACTING if q < ONE else Regime.INDIFFERENT if q == ONE else Regime.REPELLING
        return cls(regime, delta, q)

    def spec(self, provider=None) -> PiecewiseSpec:
        """The same dynamics as a two-breakpoint map: alpha = q*delta, beta = delta, |c| = 1."""
        return PiecewiseSpec.for_anchor(self.q * self.delta, self.delta, ONE, provider)


@dataclass(frozen=True)
class ScheduleEntry:
    """Predicted radius after a step: exact (lo == hi) or an admissible interval."""

    lo: Radius
    hi: Optional[Radius]
    anchor: str = "x0"

    @property
    def exact(self) -> bool:
        return self.hi is not None and self.lo == self.hi

    def admits(self, r: Radius) -> bool:
        return self.lo <= r and (self.hi is None or r <= self.hi)

    def to_json(self):
        if self.exact:
            return {"exp": self.lo.to_json(), "anchor": self.anchor}
        return {"interval": [self.lo.to_json(), self.hi.to_json() if self.hi else "inf"],
                "anchor": self.anchor}


@dataclass(frozen=True)
class Prediction:
    verdict: LimitVerdict
    schedule: tuple


def _run_schedule(stepper, bounds, r, steps, anchors=("x0",)):
    sched, cur = [], r
    for n in range(steps):
        anchor = anchors[(n + 1) % len(anchors)]
        try:
            cur = stepper(cur)
        except StarValueRequired:
            lo, hi = bounds(cur)
            sched.append(ScheduleEntry(lo, hi, anchor))
            break
        sched.append(ScheduleEntry(cur, cur, anchor))
    return tuple(sched)


def repeller_schedule(delta: Radius, q: Radius, mu: Radius):
    """The staircase for a start inside the ball of radius delta around a repeller.

    Climb by the factor q while below delta; if the climb lands exactly on
    delta the next radius is at least delta*q, otherwise the first radius
    above delta is followed by delta*q and then by some radius <= delta*q.
    """
    out, r = [], mu
    while r < delta:
        r = r * q
        out.append(ScheduleEntry(r, r))
    if r == delta:
        out.append(ScheduleEntry(delta * q, None))
    else:
        out.append(ScheduleEntry(delta * q, delta * q))
        out.append(ScheduleEntry(ZERO, delta * q))
    return tuple(out)


def predict_c1(model: C1RadiusModel, r: Radius, star_provider: Optional[StarProvider] = None,
               steps: int = 20) -> Prediction:
    d, q = model.delta, model.q
    spec = model.spec(star_provider)
    if model.regime is Regime.ATTRACTING:
        if r < d:
            verdict = LimitVerdict(VerdictKind.CONVERGES_TO, ZERO, case="attracting:inside-delta")
        elif r > d:
            verdict = LimitVerdict(VerdictKind.FIXED, r, case="attracting:outside-delta")
        else:
            verdict = LimitVerdict(VerdictKind.SPHERE_SET, None, case="attracting:on-delta",
                                   description="stays on S_delta or settles on some S_mu, mu > delta")
    elif model.regime is Regime.INDIFFERENT:
        if r != d:
            verdict = LimitVerdict(VerdictKind.FIXED, r, case="indifferent:off-delta")
        else:
            verdict = LimitVerdict(VerdictKind.SPHERE_SET, None, case="indifferent:on-delta",
                                   description="orbit-dependent on S_delta")
    else:
        if r > d * q:
            verdict = LimitVerdict(VerdictKind.FIXED, r, case="repelling:outside-delta*q")
        else:
            case = "repelling:on-delta*q" if r == d * q else "repelling:between-delta-and-delta*q" if r > d else \
                "repelling:inside-delta,misses-delta" if not _hits(r, q, d) else "repelling:inside-delta,hits-delta"
            verdict = LimitVerdict(VerdictKind.SPHERE_SET, None, case=case,
                                   description="reaches the sphere of radius delta*q; returns are orbit-dependent")
    if model.regime is Regime.REPELLING and r < d and star_provider is None:
        sched = repeller_schedule(d, q, r)
    else:
        sched = _run_schedule(lambda x: step(spec, x), lambda x: step_bounds(spec, x), r, steps)
    return Prediction(verdict, sched)


def _hits(mu: Radius, q: Radius, delta: Radius) -> bool:
    """True iff mu * q**m == delta for some m >= 1."""
    gap = delta.exp - mu.exp
    return gap > 0 and (gap / q.exp).denominator == 1


# --------------------------------------------------------------------------
# no fixed point: the 2-cycle radius map


@dataclass(frozen=True)
class NoFixRadiusMap:
    """Distance to the current cycle point, one f-step at a time (anchor alternates)."""

    h: Radius
    p: int
    provider: Optional[StarProvider] = field(default=None, compare=False)

    def _third(self):
        return Radius.of(-1)  # |3|_3

    def step(self, r: Radius) -> Radius:
        h = self.h
        if r.is_zero or r.is_inf:
            return r
        if r == h or (self.p == 3 and r == h * self._third()):
            if self.provider is None:
                raise StarValueRequired(f"orbit-dependent radius at r = {r}")
            return self.provider("h" if r == h else "h/3", r)
        if self.p != 3 or r > h:
            return r
        if r > h * self._third():
            return r * r / h
        return r * self._third()

    def bounds(self, r: Radius):
        h = self.h
        if r == h:
            return (h, None) if self.p == 3 else (ZERO, None)
        if self.p == 3 and r == h * self._third():
            return ZERO, r * self._third()
        v = self.step(r)
        return v, v


def predict_nofix(h: Radius, p: int, r: Radius, star_provider: Optional[StarProvider] = None,
                  steps: int = 20, start_anchor: str = "t1") -> Prediction:
    m = NoFixRadiusMap(h, p, star_provider)
    anchors = ("t1", "t2") if start_anchor == "t1" else ("t2", "t1")
    if p != 3:
        if r != h:
            verdict = LimitVerdict(VerdictKind.FIXED, r, case="two-cycle:off-h")
        else:
            verdict = LimitVerdict(VerdictKind.SPHERE_SET, None, case="two-cycle:on-h",
                                   description="orbit-dependent radius on S_h")
    elif r < h:
        verdict = LimitVerdict(VerdictKind.CONVERGES_TO, ZERO, case="two-cycle-p3:inside-h")
    elif r > h:
        verdict = LimitVerdict(VerdictKind.FIXED, r, case="two-cycle-p3:outside-h")
    else:
        verdict = LimitVerdict(VerdictKind.SPHERE_SET, None, case="two-cycle-p3:on-h",
                               description="settles on some S_nu with nu >= h, anchors alternating")
    return Prediction(verdict, _run_schedule(m.step, m.bounds, r, steps, anchors))
