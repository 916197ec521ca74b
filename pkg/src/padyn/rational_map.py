"""The (2,1)-rational map f(x) = (x^2 + a x + b) / (c x + d) over Q_p.

Everything here is exact: points live in Q or in one quadratic field
Q(sqrt D) chosen when a fixed point or 2-cycle needs a square root.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Optional

from .errors import InvalidParams, PoleHit
from .field import (
    ONE,
    ExactElement,
    Radius,
    check_prime,
    norm,
    parse_element,
    sqrt_class,
    valuation,
)


class CaseTag(str, enum.Enum):
    UNIQUE_FIXED = "UniqueFixed"
    NO_FIXED = "NoFixed"
    IDENTITY = "Identity"
    TWO_FIXED = "TwoFixed"


class LocalType(str, enum.Enum):
    ATTRACTING = "Attracting"
    INDIFFERENT = "Indifferent"
    REPELLING = "Repelling"


def local_type(multiplier_norm: Radius) -> LocalType:
    if multiplier_norm < ONE:
        return LocalType.ATTRACTING
    if multiplier_norm == ONE:
        return LocalType.INDIFFERENT
    return LocalType.REPELLING


@dataclass(frozen=True)
class MapParams:
    p: int
    a: ExactElement
    b: ExactElement
    c: ExactElement
    d: ExactElement

    def __post_init__(self):
        object.__setattr__(self, "p", check_prime(self.p))
        for name in "abcd":
            object.__setattr__(self, name, ExactElement._coerce(getattr(self, name)))
        if self.c == 0:
            raise InvalidParams("c must be nonzero")
        if self.resultant == 0 and not self.is_identity:
            raise InvalidParams("d^2 - acd + bc^2 must be nonzero")

    @property
    def is_identity(self) -> bool:
        """c = 1, a = d, b = 0: f(x) = x(x + a)/(x + a), taken as the identity everywhere."""
        return self.c == 1 and self.a == self.d and self.b == 0

    @classmethod
    def parse(cls, p, a, b, c, d) -> "MapParams":
        conv = lambda s: parse_element(s) if isinstance(s, str) else s  # noqa: E731
        return cls(int(p), conv(a), conv(b), conv(c), conv(d))

    @property
    def resultant(self) -> ExactElement:
        """d^2 - acd + bc^2; vanishes exactly when numerator and denominator share a root."""
        a, b, c, d = self.a, self.b, self.c, self.d
        return d * d - a * c * d + b * c * c

    @property
    def pole(self) -> ExactElement:
        return -self.d / self.c

    @property
    def c_norm(self) -> Radius:
        return norm(self.c, self.p)

    def as_dict(self):
        return {"p": self.p, **{k: str(getattr(self, k)) for k in "abcd"}}


def classify_case(params: MapParams) -> CaseTag:
    if params.c != 1:
        return CaseTag.TWO_FIXED
    if params.a != params.d:
        return CaseTag.UNIQUE_FIXED
    return CaseTag.NO_FIXED if params.b != 0 else CaseTag.IDENTITY


def eval_f(params: MapParams, x):
    """f(x); raises PoleHit at x = -d/c.  Works on exact and truncated values."""
    if params.is_identity:
        return x
    if isinstance(x, ExactElement) or not hasattr(x, "prec"):
        x = ExactElement._coerce(x)
        den = params.c * x + params.d
        if den == 0:
            raise PoleHit(params.pole)
        return (x * x + params.a * x + params.b) / den
    return _eval_truncated(params, x)


def _eval_truncated(params, x):
    from .field import TruncatedElement

    N = x.prec + 64
    a, b, c, d = (TruncatedElement.from_exact(v, params.p, N) for v in
                  (params.a, params.b, params.c, params.d))
    return (x * x + a * x + b) / (c * x + d)


def derivative(params: MapParams, x, n: int = 1) -> ExactElement:
    """n-th derivative from the partial-fraction form of f."""
    if n < 1:
        raise ValueError("derivative order must be >= 1")
    x = ExactElement._coerce(x)
    c = params.c
    w = x + params.d / c
    if w == 0:
        raise PoleHit(params.pole)
    R = params.resultant
    if n == 1:
        return (c * c - R / (w * w)) / (c**3)
    sign = -1 if n % 2 else 1
    return sign * factorial(n) * R / (c**3 * w ** (n + 1))


# --------------------------------------------------------------------------
# fixed points and the 2-cycle


@dataclass
class FixedPointInfo:
    point: ExactElement
    multiplier: ExactElement
    multiplier_norm: Radius
    local_type: LocalType
    delta: Optional[Radius] = None
    alpha_i: Optional[Radius] = None
    beta_i: Optional[Radius] = None
    double_root: bool = False

    def to_json(self):
        out = {
            "point": str(self.point),
            "multiplier": str(self.multiplier),
            "multiplier_norm": self.multiplier_norm.to_json(),
            "local_type": self.local_type.value,
        }
        for k in ("delta", "alpha_i", "beta_i"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v.to_json()
        if self.double_root:
            out["double_root"] = True
        return out


@dataclass
class TwoCycleInfo:
    t1: ExactElement
    t2: ExactElement
    h: Radius
    g_multiplier: ExactElement
    g_multiplier_norm: Radius

    def to_json(self):
        return {
            "t1": str(self.t1),
            "t2": str(self.t2),
            "h": self.h.to_json(),
            "g_multiplier": str(self.g_multiplier),
            "g_multiplier_norm": self.g_multiplier_norm.to_json(),
        }


class IdentityMap:
    """Sentinel returned by fixed_points for f(x) = x: every point is fixed."""

    def __repr__(self):
        return "IdentityMap"


IDENTITY = IdentityMap()


def _sqrt_exact(s, p: int) -> ExactElement:
    """sqrt(s) as an exact element; re-homes into Q(sqrt s) when s is not a rational square."""
    s = ExactElement._coerce(s)
    return ExactElement(0, 1, s.a) if s.is_rational else _raise_tower(s)


def _raise_tower(s):
    from .errors import NeedsTower

    raise NeedsTower(f"square root of {s} would need a degree-4 extension")


def alpha_at(params: MapParams, x) -> ExactElement:
    c, d, a, b = params.c, params.d, params.a, params.b
    return (c * x * x + 2 * d * x + a * d - b * c) / (c * x + d)


def beta_at(params: MapParams, x) -> ExactElement:
    return (params.c * x + params.d) / params.c


def fixed_points(params: MapParams):
    case = classify_case(params)
    p = params.p
    if case is CaseTag.IDENTITY:
        return IDENTITY
    if case is CaseTag.NO_FIXED:
        return []
    if case is CaseTag.UNIQUE_FIXED:
        a, b, d = params.a, params.b, params.d
        x0 = b / (d - a)
        lam = (a * d + b - a * a) / (d * d - a * d + b)
        lam_chain = derivative(params, x0, 1)
        assert lam == lam_chain, "multiplier formulas disagree"
        assert eval_f(params, x0) == x0
        mn = norm(lam, p)
        return [FixedPointInfo(x0, lam, mn, local_type(mn), delta=norm(x0 + d, p))]

    a, b, c, d = params.a, params.b, params.c, params.d
    disc = (a - d) ** 2 + 4 * (c - 1) * b
    root = _sqrt_exact(disc, p)
    roots = [(a - d + root) / (2 * (c - 1)), (a - d - root) / (2 * (c - 1))]
    double = disc == 0
    if double:
        roots = roots[:1]
    out = []
    for xi in roots:
        assert eval_f(params, xi) == xi
        lam = derivative(params, xi, 1)
        al = alpha_at(params, xi)
        assert al == (2 - c) * xi + a
        mn = norm(lam, p)
        out.append(FixedPointInfo(xi, lam, mn, local_type(mn),
                                  alpha_i=norm(al, p), beta_i=norm(beta_at(params, xi), p),
                                  double_root=double))
    return out


def two_cycle(params: MapParams) -> TwoCycleInfo:
    if classify_case(params) is not CaseTag.NO_FIXED:
        raise ValueError("two_cycle needs c = 1, a = d, b != 0")
    p, a, b = params.p, params.a, params.b
    s = _sqrt_exact(-b / 2, p)
    t1, t2 = -a + s, -a - s
    assert eval_f(params, t1) == t2 and eval_f(params, t2) == t1
    g = derivative(params, t1) * derivative(params, t2)
    return TwoCycleInfo(t1, t2, norm(s, p), g, norm(g, p))


def radicand_class(params: MapParams):
    """sqrt_class of the radicand the fixed-point/cycle solver needs, or None."""
    case = classify_case(params)
    a, b, c, d = params.a, params.b, params.c, params.d
    if case is CaseTag.TWO_FIXED:
        s = (a - d) ** 2 + 4 * (c - 1) * b
    elif case is CaseTag.NO_FIXED:
        s = -b / 2
    else:
        return None
    if not s.is_rational:
        return None
    return sqrt_class(s.a, params.p, 20)


# --------------------------------------------------------------------------
# two-fixed-point local geometry


@dataclass(frozen=True)
class LocalGeometry:
    alpha_i: Radius
    beta_i: Radius
    alpha_star: Optional[Radius]
    beta_star: Optional[Radius]


def star_value(params: MapParams, xi, x, base: Radius) -> Radius:
    """base * |alpha(x_i) + x - x_i| / |beta(x_i) + x - x_i|."""
    p = params.p
    y = x - xi
    den = beta_at(params, xi) + y
    if den == 0:
        raise PoleHit(params.pole)
    return base * norm(alpha_at(params, xi) + y, p) / norm(den, p)


def distance_identity(params: MapParams, xi, x):
    """Both sides of |f(x) - x_i| = |x - x_i|/|c| * |alpha(x_i) + x - x_i| / |beta(x_i) + x - x_i|."""
    p = params.p
    y = x - xi
    lhs = norm(eval_f(params, x) - xi, p)
    rhs = norm(y, p) / params.c_norm * norm(alpha_at(params, xi) + y, p) \
        / norm(beta_at(params, xi) + y, p)
    return lhs, rhs


def local_geometry(params: MapParams, i: int, x=None, require_star: bool = False) -> LocalGeometry:
    """Constants alpha_i, beta_i and, when x lies on the matching sphere, the star radii.

    With ``require_star`` an x on neither breakpoint sphere is an error;
    otherwise the star fields are simply left empty.
    """
    if classify_case(params) is not CaseTag.TWO_FIXED:
        raise ValueError("local geometry is defined for c != 1 only")
    fps = fixed_points(params)
    fp = fps[min(i, len(fps)) - 1]
    p = params.p
    A, B = fp.alpha_i, fp.beta_i
    a_star = b_star = None
    if x is not None:
        x = ExactElement._coerce(x)
        if x == params.pole:
            raise PoleHit(params.pole)
        r = norm(x - fp.point, p)
        if require_star and r != A and r != B:
            raise ValueError(f"|x - x_{i}| = {r} is neither alpha_i = {A} nor beta_i = {B}")
        if r == A:
            a_star = star_value(params, fp.point, x, A)
        if r == B:
            b_star = star_value(params, fp.point, x, B)
        lhs, rhs = distance_identity(params, fp.point, x)
        assert lhs == rhs
    return LocalGeometry(A, B, a_star, b_star)


# --------------------------------------------------------------------------
# radii from the analytic fixed-point criteria


@dataclass(frozen=True)
class SeriesRadii:
    """Open bounds: every r strictly below the radius satisfies the criterion."""

    q_radius: Optional[Radius]
    s_radius: Optional[Radius]
    pole_distance: Radius
    tail_scale: Radius


def series_radii(params: MapParams, fp: FixedPointInfo) -> SeriesRadii:
    """Closed forms for the attracting (q < 1) and indifferent (s < |f'|) series conditions.

    The Taylor coefficients for n >= 2 are R / (c^3 w^(n+1)) up to sign with
    w = x0 + d/c, so |coef_n| r^(n-1) = K (r/|w|)^(n-1) with K = |R/(c^3 w^2)|.
    The supremum over n is finite only for r <= |w| and is then attained at n = 2.
    """
    p = params.p
    w = fp.point + params.d / params.c
    W = norm(w, p)
    K = norm(params.resultant / (params.c**3 * w * w), p)
    lam = fp.multiplier_norm
    q_radius = s_radius = None
    if lam < ONE:
        q_radius = min(W, W / K)
    elif lam == ONE:
        s_radius = min(W, W * lam / K)
    return SeriesRadii(q_radius, s_radius, W, K)


def series_term_norm(params: MapParams, x0, n: int, r: Radius) -> Radius:
    """|f^(n)(x0)/n!| * r^(n-1), by direct evaluation of the n-th derivative."""
    coef = derivative(params, x0, n) / factorial(n)
    return norm(coef, params.p) * (r ** (n - 1) if n > 1 else ONE)


def taylor_defect_constant(params: MapParams, x) -> Fraction:
    """K with v(f(x+h) - f(x) - f'(x) h) = 2 v(h) - K whenever |h| < |x + d/c|."""
    p = params.p
    w = x + params.d / params.c
    return 3 * valuation(params.c, p) + 3 * valuation(w, p) - valuation(params.resultant, p)
