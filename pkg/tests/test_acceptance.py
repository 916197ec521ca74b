"""Acceptance criteria, one test per criterion.

Each test appends a "criterion N: PASS|FAIL ..." line that the terminal
summary prints.  Criteria 5 and 7 are marked strict xfail: they are run
exactly as stated, fail on the stated example, and would turn the suite red
if they ever started passing.
"""
import random
import time
from fractions import Fraction

import pytest
import sympy

from padyn.errors import InvalidParams, NeedsTower, PrecisionExhausted
from padyn.field import ONE, ExactElement, Radius, TruncatedElement, norm, valuation
from padyn.orbit import basin_probe, iterate, verify
from padyn.radius import (
    C1RadiusModel,
    VerdictKind,
    brute_force_limit,
    classify_limit,
    fixed_point_set,
    case_label,
    predict_c1,
    step,
)
from padyn.rational_map import (
    MapParams,
    derivative,
    eval_f,
    fixed_points,
    taylor_defect_constant,
    two_cycle,
)
from padyn.sampling import CASE_LABELS, point_on_sphere, probe_radii, spec_corpus

from conftest import ACCEPTANCE_LINES

R = Radius.of
BUDGET = 10.0  # seconds per criterion


def mk(p, a, b, c, d):
    return MapParams(p, *(ExactElement(v) for v in (a, b, c, d)))


def record(n, ok, detail, t0):
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < BUDGET
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail} [{elapsed:.2f}s]")
    return ok


def rand_rational(rng, p, spread=6):
    n = rng.randint(1, 10**6) * rng.choice([-1, 1])
    m = rng.randint(1, 10**6)
    return Fraction(n, m) * Fraction(p) ** rng.randint(-spread, spread)


# --------------------------------------------------------------------------

def test_criterion_1_ultrametric():
    t0 = time.perf_counter()
    rng = random.Random(1)
    failures, equality_case, pairs = 0, 0, 0
    for p in (2, 3, 5, 7):
        for i in range(10_000):
            x = rand_rational(rng, p)
            # every third pair shares a norm, so the equal-norm case sees real cancellation
            unit = p * rng.randint(1, 50) + rng.randint(1, p - 1)
            y = rand_rational(rng, p) if i % 3 else x * unit
            if i % 7 == 0:
                x = Fraction(0)
            X, Y = ExactElement(x), ExactElement(y)
            nx, ny, ns = norm(X, p), norm(Y, p), norm(X + Y, p)
            pairs += 1
            ok = (nx.is_zero == (x == 0)) and norm(X * Y, p) == nx * ny and ns <= max(nx, ny)
            if nx != ny:
                equality_case += 1
                ok = ok and ns == max(nx, ny)
            else:
                ok = ok and ns <= nx
            failures += not ok
    ok = record(1, failures == 0 and equality_case >= 1000,
                f"{pairs} pairs, {failures} failures, equality case checked {equality_case} times", t0)
    assert ok


def test_criterion_2_cycle_multiplier():
    t0 = time.perf_counter()
    rng = random.Random(2)
    bad, n = 0, 0
    for p in (3, 5, 7, 13):
        for _ in range(30):
            a = Fraction(rng.randint(-50, 50), rng.randint(1, 20))
            b = Fraction(rng.choice([-1, 1]) * rng.randint(1, 50), rng.randint(1, 20))
            params = mk(p, a, b, 1, a)
            tc = two_cycle(params)
            g = derivative(params, tc.t1) * derivative(params, tc.t2)
            want = R(-2) if p == 3 else ONE
            bad += g != ExactElement(9) or tc.g_multiplier_norm != want
            n += 1
    ok = record(2, bad == 0, f"{n} (p, a, b) triples, {bad} failures", t0)
    assert ok


def test_criterion_3_sphere_swap():
    t0 = time.perf_counter()
    params = mk(5, 0, -2, 1, 0)
    tc = two_cycle(params)
    rng = random.Random(3)
    violations, runs = 0, 0
    for e in (-3, -2, -1, 1, 2, 3):
        for _ in range(5):
            x = point_on_sphere(tc.t1, Fraction(e), 5, rng)
            traj = iterate(params, x, 20, backend="auto", ceiling_bits=1 << 12)
            runs += 1
            if traj.steps < 20:
                violations += 1
                continue
            for k in range(21):
                near = "t1" if k % 2 == 0 else "t2"
                violations += traj.radius_logs[near][k] != R(e)
    ok = record(3, violations == 0, f"{runs} orbits x 20 steps, {violations} violations", t0)
    assert ok


def test_criterion_4_p3_cycle_attraction():
    t0 = time.perf_counter()
    params = mk(3, 0, -2, 1, 0)
    tc = two_cycle(params)
    rng = random.Random(4)
    misses, runs = 0, 0
    for e in (-1, -2, -3):
        for _ in range(7):
            x = point_on_sphere(tc.t1, Fraction(e), 3, rng)
            traj = iterate(params, x, 40, backend="auto", ceiling_bits=1 << 12)
            runs += 1
            even = [traj.radius_logs["t1"][k].exp for k in range(0, len(traj.points), 2)]
            odd = [traj.radius_logs["t2"][k].exp for k in range(1, len(traj.points), 2)]
            misses += not (min(even) <= -20 and min(odd) <= -20)
    ok = record(4, misses == 0, f"{runs} orbits, {misses} did not reach exponent -20 on both subsequences", t0)
    assert ok


def _staircase_starts(rng, params, fp, count):
    out = []
    while len(out) < count:
        e = Fraction(rng.randint(-8, -2))
        out.append((e, point_on_sphere(fp.point, e, params.p, rng)))
    return out


def _staircase_matches(params, fp, x, e):
    model = C1RadiusModel.from_multiplier(fp.multiplier_norm, fp.delta)
    pred = predict_c1(model, R(e))
    traj = iterate(params, x, len(pred.schedule) + 2, backend="auto", ceiling_bits=1 << 12)
    log = traj.radius_logs["x0"]
    if len(log) < len(pred.schedule) + 1:
        return False
    return all(entry.admits(r) for entry, r in zip(pred.schedule, log[1:]))


def test_criterion_5_seeded_starts():
    params = mk(3, 0, 2, 1, 1)
    (fp,) = fixed_points(params)
    rng = random.Random(5)
    starts = _staircase_starts(rng, params, fp, 50)
    assert all(_staircase_matches(params, fp, x, e) for e, x in starts)


@pytest.mark.xfail(strict=True, reason="f^2(11) = 571/60 lies at distance 3 from the fixed point 2, not 1")
def test_criterion_5_repeller_staircase():
    t0 = time.perf_counter()
    params = mk(3, 0, 2, 1, 1)
    (fp,) = fixed_points(params)
    traj = iterate(params, ExactElement(11), 2)
    observed = [int(r.exp) for r in traj.radius_logs["x0"]]
    part1 = observed == [-2, -1, 0]
    rng = random.Random(5)
    starts = _staircase_starts(rng, params, fp, 50)
    matched = sum(_staircase_matches(params, fp, x, e) for e, x in starts)
    ok = record(5, part1 and matched == 50,
                f"x0=11 exponents {observed} vs stated [-2, -1, 0]; "
                f"seeded starts matching the inside-delta repeller claims: {matched}/50", t0)
    assert ok


def test_criterion_6_attractor_basin():
    t0 = time.perf_counter()
    params = mk(3, 1, 1, 1, 0)
    inner = basin_probe(params, [-1, -2, -3, -4, -5], 11, 25, threshold=-20, seed=6)
    outer = basin_probe(params, [1, 2], 10, 20, seed=6)
    sampled = sum(s.samples - s.excluded for s in inner)
    converged = sum(s.converged for s in inner)
    violations = sum(s.invariance_violations for s in outer)
    ok = record(6, sampled >= 50 and converged == sampled and violations == 0,
                f"{converged}/{sampled} inner points converged; "
                f"{violations} invariance violations on r in {{3, 9}}", t0)
    assert ok


@pytest.mark.xfail(strict=True, reason="the sphere of radius delta holds the pole and is not invariant")
def test_criterion_7_siegel_invariance():
    t0 = time.perf_counter()
    params = mk(5, 0, 2, 1, 1)
    (fp,) = fixed_points(params)
    assert fp.delta == ONE
    rng = random.Random(7)
    per_radius = {}
    for e in (-3, -1, 0, 1, 3):
        bad = 0
        for _ in range(5):
            x = point_on_sphere(fp.point, Fraction(e), 5, rng)
            traj = iterate(params, x, 30, backend="auto", ceiling_bits=1 << 12)
            log = traj.radius_logs["x0"]
            bad += traj.steps < 30 or any(r != R(e) for r in log)
        per_radius[e] = bad
    total = sum(per_radius.values())
    ok = record(7, total == 0, f"violations per radius exponent {per_radius}", t0)
    assert ok


def _two_fixed_params(rng):
    while True:
        p = rng.choice([3, 5, 7])
        x1, x2 = (Fraction(rng.randint(-30, 30), rng.randint(1, 9)) for _ in range(2))
        c = Fraction(rng.choice([-1, 1]) * rng.randint(1, 30), rng.randint(1, 9))
        d = Fraction(rng.randint(-30, 30), rng.randint(1, 9))
        if x1 == x2 or c == 1:
            continue
        a, b = d - (1 - c) * (x1 + x2), (1 - c) * x1 * x2
        try:
            return mk(p, a, b, c, d)
        except InvalidParams:
            continue


def test_criterion_8_radius_map_equivalence():
    t0 = time.perf_counter()
    rng = random.Random(8)
    cases = [(mk(3, 0, 0, 2, 1), ExactElement(9))]
    while len(cases) < 25:
        params = _two_fixed_params(rng)
        x0 = ExactElement(Fraction(rng.randint(-200, 200), rng.randint(1, 30)))
        if x0 != params.pole:
            cases.append((params, x0))
    mismatches, checked, unchecked = 0, 0, 0
    for params, x0 in cases:
        try:
            rep = verify(params, x0, 30)
        except NeedsTower:
            unchecked += 1
            continue
        mismatches += sum(not c.match for c in rep.checks)
        checked += len(rep.checks)
        unchecked += any("undecidable" in n for n in rep.notes)
    ok = record(8, mismatches == 0 and unchecked == 0 and checked > 0,
                f"{len(cases)} parameter sets, {checked} step checks, {mismatches} mismatches, "
                f"{unchecked} runs with unchecked steps", t0)
    assert ok


def test_criterion_9_radius_limits():
    t0 = time.perf_counter()
    rng = random.Random(9)
    specs = spec_corpus(520, seed=9)
    labels = {case_label(s) for s in specs}
    disagree = undecided = not_fixed = open_cycles = 0
    for spec in specs:
        for r in probe_radii(spec, rng):
            want = brute_force_limit(spec, r, steps=200)
            got = classify_limit(spec, r)
            undecided += want.kind is VerdictKind.NO_CYCLE
            disagree += not got.same_outcome(want)
            if got.kind is VerdictKind.ENTERS_CYCLE:
                x = got.cycle[0]
                for _ in range(got.k):
                    x = step(spec, x)
                open_cycles += x != got.cycle[0]
        fs = fixed_point_set(spec)
        not_fixed += sum(step(spec, m) != m for m in fs.members())
    ok = record(9, labels == set(CASE_LABELS) and not (disagree or undecided or not_fixed or open_cycles),
                f"{len(specs)} specs over {len(labels)} case labels; {disagree} disagreements, "
                f"{undecided} undecided, {not_fixed} non-fixed members, {open_cycles} open cycles", t0)
    assert ok


def test_criterion_10_backend_coherence():
    t0 = time.perf_counter()
    rng = random.Random(10)
    maps = [(3, 0, 2, 1, 1), (3, 1, 1, 1, 0), (3, 0, 0, 2, 1), (5, 0, -2, 1, 0), (5, 0, 2, 1, 1),
            (7, 1, 3, 2, 5), (3, 0, -2, 1, 0), (5, 2, 1, 3, 4)]
    compared = wrong = exhausted = 0
    for N in (40, 3):
        for args in maps:
            params = mk(*args)
            for _ in range(10 if N == 40 else 4):
                x0 = ExactElement(Fraction(rng.randint(-99, 99), rng.randint(1, 20)))
                if x0 == params.pole:
                    continue
                ex = iterate(params, x0, 12, detect_cycles=False)
                tr = iterate(params, x0, 12, backend="trunc", precision=N, detect_cycles=False)
                exhausted += tr.event("PrecisionExhausted") is not None
                for k, y in enumerate(tr.points[1:], 1):
                    if k >= len(ex.points):
                        break
                    compared += 1
                    wrong += not y.agrees_with(ex.points[k])
                for name, log in tr.radius_logs.items():
                    wrong += log != ex.radius_logs[name][:len(log)]
    ok = record(10, compared >= 1000 and wrong == 0,
                f"{compared} truncated steps compared, {wrong} disagreements, "
                f"PrecisionExhausted fired in {exhausted} runs", t0)
    assert ok


def test_criterion_11_derivatives():
    t0 = time.perf_counter()
    rng = random.Random(11)
    defect_cases = defect_bad = 0
    while defect_cases < 120:
        p = rng.choice([2, 3, 5, 7])
        a, b, d = (Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(3))
        c = Fraction(rng.choice([-1, 1]) * rng.randint(1, 20), rng.randint(1, 9))
        try:
            params = mk(p, a, b, c, d)
        except InvalidParams:
            continue
        x = ExactElement(Fraction(rng.randint(-50, 50), rng.randint(1, 12)))
        w = x + params.d / params.c
        h = ExactElement(Fraction(p) ** rng.randint(1, 6) * rng.randint(1, 40))
        if w == 0 or not norm(h, p) < norm(w, p) or params.is_identity:
            continue
        defect = eval_f(params, x + h) - eval_f(params, x) - derivative(params, x) * h
        bound = 2 * valuation(h, p) - taylor_defect_constant(params, x)
        defect_cases += 1
        defect_bad += not valuation(defect, p) >= bound
    X = sympy.Symbol("x")
    sym_cases = sym_bad = 0
    while sym_cases < 40:
        a, b, c, d = (sympy.Rational(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(4))
        if c == 0 or d**2 - a * c * d + b * c**2 == 0:
            continue
        params = mk(3, *(Fraction(int(v.p), int(v.q)) for v in (a, b, c, d)))
        x0 = sympy.Rational(rng.randint(-30, 30), rng.randint(1, 7))
        if c * x0 + d == 0:
            continue
        for n in (2, 3):
            want = sympy.diff((X**2 + a * X + b) / (c * X + d), X, n).subs(X, x0)
            got = derivative(params, ExactElement(Fraction(int(x0.p), int(x0.q))), n).to_fraction()
            sym_bad += Fraction(int(want.p), int(want.q)) != got
            sym_cases += 1
    ok = record(11, defect_bad == 0 and sym_bad == 0,
                f"Taylor defect {defect_cases} cases / {defect_bad} failures; "
                f"symbolic n=2,3 {sym_cases} cases / {sym_bad} failures", t0)
    assert ok


def test_truncated_refuses_rather_than_guessing():
    # supporting check for criterion 10: equal to 3 digits, different at 4
    t = TruncatedElement.from_rational(1, 5, 3)
    u = TruncatedElement.from_rational(1 + 5**3, 5, 3)
    with pytest.raises(PrecisionExhausted):
        _ = t == u
