"""Seeded generators: radius-map specs by case label, and points on p-adic spheres."""
from __future__ import annotations

import random
from fractions import Fraction

from .field import ZERO, ExactElement, Radius, norm
from .radius import PiecewiseSpec

CASE_LABELS = (
    "lt:c=1", "lt:c>1", "lt:c>1,upper*=c*beta",
    "lt:c<1,alpha<c*beta", "lt:c<1,alpha=c*beta,lower*=c*alpha", "lt:c<1,alpha=c*beta", "lt:c<1,alpha>c*beta,lower*=c*alpha", "lt:c<1,alpha>c*beta,lower*>c*alpha", "lt:c<1,alpha>c*beta,lower*<c*alpha",
    "gt:c=1,upper*=alpha", "gt:c=1", "gt:c<1,upper*=c*alpha", "gt:c<1",
    "gt:c>1,alpha>c*beta", "gt:c>1,alpha<c*beta,lower*=c*beta", "gt:c>1,alpha<c*beta", "gt:c>1,alpha=c*beta",
    "eq:c=1", "eq:c>1", "eq:c<1",
)


def _exp(rng: random.Random, lo=-4, hi=4, halves=True) -> Fraction:
    if halves and rng.random() < 0.25:
        return Fraction(rng.randint(2 * lo, 2 * hi), 2)
    return Fraction(rng.randint(lo, hi))


def _above(rng, e, avoid=None):
    """A radius exponent >= e, optionally different from ``avoid``."""
    while True:
        x = e + rng.choice([0, 0, 1, 2, Fraction(1, 2), 3])
        if x != avoid:
            return x


def _below(rng, e, avoid=None, allow_zero=True):
    """A radius <= p**e (possibly ZERO), different from p**avoid."""
    while True:
        if allow_zero and rng.random() < 0.1:
            return ZERO
        x = e - rng.choice([0, 0, 1, 2, Fraction(1, 2), 3])
        if x != avoid:
            return Radius.of(x)


def spec_for_case(label: str, rng: random.Random) -> PiecewiseSpec:
    """A random spec whose parameters fall in the named case."""
    R = Radius.of
    fam, item = label.split(":")
    if fam == "eq":
        c = {"c=1": 0, "c>1": rng.randint(1, 3), "c<1": -rng.randint(1, 3)}[item]
        a = _exp(rng)
        star = R(_above(rng, a + c - 2)) if rng.random() < 0.3 else R(a + c + rng.choice([-2, -1, 1, 2]))
        if rng.random() < 0.2:
            star = R(a + c)
        return PiecewiseSpec.psi_eq(R(a), R(c), star)
    if fam == "lt":
        b = _exp(rng)
        if item == "c=1":
            c = 0
        elif item.startswith("c>1"):
            c = rng.choice([1, 2, Fraction(1, 2)])
        else:
            c = -rng.choice([1, 2, Fraction(1, 2)])
        if item == "c<1,alpha<c*beta":
            a = b + c - rng.choice([1, 2, Fraction(1, 2)])
        elif item in ("c<1,alpha=c*beta,lower*=c*alpha", "c<1,alpha=c*beta"):
            a = b + c
        elif item in ("c<1,alpha>c*beta,lower*=c*alpha", "c<1,alpha>c*beta,lower*>c*alpha", "c<1,alpha>c*beta,lower*<c*alpha"):
            a = b + c + rng.choice([1, 2, Fraction(1, 2), 3])
            if a >= b:
                a = b - Fraction(1, 2)
                c = a - b - rng.choice([1, 2])
        else:
            a = b - rng.choice([1, 2, 3, Fraction(1, 2)])
        cap = 2 * a - b
        if item == "c<1,alpha=c*beta,lower*=c*alpha" or item == "c<1,alpha>c*beta,lower*=c*alpha":
            astar = R(a + c)
        elif item == "c<1,alpha=c*beta":
            astar = _below(rng, cap, avoid=a + c)
        elif item == "c<1,alpha>c*beta,lower*>c*alpha":
            lo = a + c
            astar = R(lo + (cap - lo) * Fraction(rng.randint(1, 2), 2))
        elif item == "c<1,alpha>c*beta,lower*<c*alpha":
            astar = _below(rng, a + c - Fraction(rng.randint(1, 2), 2))
        else:
            astar = _below(rng, cap)
        bstar = R(b + c) if item == "c>1,upper*=c*beta" else R(_above(rng, b, avoid=b + c if item == "c>1" else None))
        return PiecewiseSpec.phi_lt(R(a), R(b), R(c), astar, bstar)
    # gt
    b = _exp(rng)
    if item.startswith("c=1"):
        c = 0
    elif item.startswith("c<1"):
        c = -rng.choice([1, 2, Fraction(1, 2)])
    else:
        c = rng.choice([1, 2, Fraction(1, 2)])
    if item == "c>1,alpha>c*beta":
        a = b + c + rng.choice([1, 2, Fraction(1, 2)])
    elif item in ("c>1,alpha<c*beta,lower*=c*beta", "c>1,alpha<c*beta"):
        a = b + c - rng.choice([Fraction(1, 2), 1])
        if a <= b:
            c, a = c + 1, b + c
    elif item == "c>1,alpha=c*beta":
        a = b + c
    else:
        a = b + rng.choice([1, 2, 3, Fraction(1, 2)])
    if item == "c=1,upper*=alpha":
        aprime = R(a)
    elif item == "c<1,upper*=c*alpha":
        aprime = R(a + c)
    elif item in ("c=1", "c<1"):
        aprime = _below(rng, a, avoid=a + c)
    else:
        aprime = _below(rng, a)
    bprime = R(b + c) if item == "c>1,alpha<c*beta,lower*=c*beta" else R(_above(rng, a, avoid=b + c if item == "c>1,alpha<c*beta" else None))
    return PiecewiseSpec.phi_gt(R(a), R(b), R(c), aprime, bprime)


def spec_corpus(n: int, seed: int = 0):
    """``n`` specs cycling through every case label, reproducible from ``seed``."""
    rng = random.Random(seed)
    return [spec_for_case(CASE_LABELS[i % len(CASE_LABELS)], rng) for i in range(n)]


def probe_radii(spec: PiecewiseSpec, rng: random.Random, extra: int = 4):
    """Breakpoints, the images around them, and a few random radii."""
    out = {bp for bp in spec.breakpoints if not bp.is_zero}
    centre = spec.alpha.exp if not spec.alpha.is_zero else spec.beta.exp
    for _ in range(extra):
        out.add(Radius.of(centre + Fraction(rng.randint(-16, 16), 2)))
    for fp in (spec.c_norm * spec.beta, spec.alpha / spec.c_norm):
        if fp.finite:
            out.add(fp)
    return sorted(out)


# --------------------------------------------------------------------------
# sphere sampling


def unit(rng: random.Random, p: int, width: int = 3) -> int:
    """A random integer coprime to p of at most ``width`` p-adic digits."""
    while True:
        u = rng.randrange(1, p ** width)
        if u % p:
            return u


def point_on_sphere(anchor: ExactElement, exp: Fraction, p: int, rng: random.Random) -> ExactElement:
    """anchor + u * p**(-exp) with a random unit u, so |x - anchor| = p**exp.

    Half-integer exponents need a uniformizer of norm p**(-1/2); that exists
    only when the anchor lives in a field ramified at p, whose radicand is
    then reused.
    """
    exp = Fraction(exp)
    if exp.denominator == 1:
        offset = ExactElement(Fraction(unit(rng, p)) * Fraction(p) ** int(-exp))
    else:
        root = _ramified_root(anchor, p)
        k = exp + Fraction(1, 2)
        offset = root * ExactElement(Fraction(unit(rng, p)) * Fraction(p) ** int(-k))
    x = anchor + offset
    assert norm(x - anchor, p) == Radius.of(exp), "sampled point misses its sphere"
    return x


def _ramified_root(anchor: ExactElement, p: int) -> ExactElement:
    D = anchor.D
    if D and norm(ExactElement(0, 1, D), p).exp.denominator == 2:
        return ExactElement(0, 1, D)
    if D == 0:
        # any radicand with odd valuation works: sqrt(p)
        return ExactElement(0, 1, p)
    raise ValueError(f"no element of norm p^(1/2) in Q(sqrt({D})) at p = {p}")


def points_on_sphere(anchor, exp, p, k, rng):
    return [point_on_sphere(anchor, exp, p, rng) for _ in range(k)]

