"""Exact and truncated p-adic arithmetic over Q and quadratic fields Q(sqrt D).

Exact values are ``a + b*sqrt(D)`` with gmpy2 rationals.  The p-adic
absolute value of an element is the unique extension of |.|_p: through the
norm form when ``sqrt(D)`` is not in Q_p, and through a fixed embedding
(canonical Hensel branch of ``sqrt(D)``) when it is.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering, wraps
from typing import Union

import gmpy2
from gmpy2 import mpq, mpz

from .errors import NeedsTower, PrecisionExhausted

Rational = Union[int, Fraction, "mpq"]

_SMALL_PRIMES = [q for q in range(2, 200) if all(q % k for k in range(2, int(q**0.5) + 1))]


def check_prime(p: int) -> int:
    p = int(p)
    if p < 2 or not gmpy2.is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    return p


def as_mpq(x) -> mpq:
    if isinstance(x, ExactElement):
        if x.b != 0:
            raise TypeError(f"{x} is not rational")
        return x.a
    if isinstance(x, str):
        return parse_rational(x)
    return mpq(x)


def vp_int(n, p: int) -> int:
    """Valuation of a nonzero integer."""
    return int(gmpy2.remove(mpz(n), p)[1])


def vp_rational(x, p: int):
    """v_p of a rational; ``math.inf`` for zero."""
    x = mpq(x)
    if x == 0:
        return math.inf
    return vp_int(x.numerator, p) - vp_int(x.denominator, p)


# --------------------------------------------------------------------------
# Radius


@total_ordering
@dataclass(frozen=True)
class Radius:
    """A value p**exp in {0} u p^Q u {inf}; ``kind`` is -1 (zero), 0 or 1 (inf)."""

    exp: Fraction = Fraction(0)
    kind: int = 0

    @classmethod
    def of(cls, exp) -> "Radius":
        return cls(Fraction(exp), 0)

    def _key(self):
        return (self.kind, self.exp if self.kind == 0 else Fraction(0))

    def __lt__(self, other):
        if not isinstance(other, Radius):
            return NotImplemented
        return self._key() < other._key()

    @property
    def is_zero(self) -> bool:
        return self.kind < 0

    @property
    def is_inf(self) -> bool:
        return self.kind > 0

    @property
    def finite(self) -> bool:
        return self.kind == 0

    def __mul__(self, other: "Radius") -> "Radius":
        if not isinstance(other, Radius):
            return NotImplemented
        if {self.kind, other.kind} == {-1, 1}:
            raise ArithmeticError("0 * inf is undefined")
        if self.kind or other.kind:
            return ZERO if -1 in (self.kind, other.kind) else INF
        return Radius(self.exp + other.exp, 0)

    def inverse(self) -> "Radius":
        if self.kind:
            return INF if self.kind < 0 else ZERO
        return Radius(-self.exp, 0)

    def __truediv__(self, other: "Radius") -> "Radius":
        return self * other.inverse()

    def __pow__(self, k: int) -> "Radius":
        if self.kind:
            if k == 0:
                raise ArithmeticError("0**0 / inf**0 on radii")
            return self if k > 0 else self.inverse()
        return Radius(self.exp * k, 0)

    def value(self, p: int):
        """Numeric value p**exp: exact Fraction for integer exponents, else float."""
        if self.kind < 0:
            return Fraction(0)
        if self.kind > 0:
            return math.inf
        if self.exp.denominator == 1:
            return Fraction(p) ** int(self.exp)
        return float(p) ** float(self.exp)

    def to_json(self):
        if self.kind < 0:
            return "zero"
        if self.kind > 0:
            return "inf"
        return {"exp": str(self.exp)}

    @classmethod
    def from_json(cls, obj) -> "Radius":
        if obj == "zero":
            return ZERO
        if obj == "inf":
            return INF
        return cls.of(Fraction(obj["exp"]))

    def __repr__(self):
        if self.kind < 0:
            return "Radius(0)"
        if self.kind > 0:
            return "Radius(inf)"
        return f"Radius(p^{self.exp})"


ZERO = Radius(Fraction(0), -1)
INF = Radius(Fraction(0), 1)
ONE = Radius(Fraction(0), 0)


# --------------------------------------------------------------------------
# modular square roots


def _tonelli(n: int, p: int) -> int:
    n %= p
    if n == 0:
        return 0
    if p == 2:
        return n
    if pow(n, (p - 1) // 2, p) != 1:
        raise ValueError(f"{n} is not a square mod {p}")
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    if s == 1:
        return pow(n, (p + 1) // 4, p)
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


_root_cache: dict = {}


def unit_sqrt(u: int, p: int, prec: int) -> int:
    """Canonical square root of the p-adic unit ``u`` modulo p**prec.

    The branch is the one congruent to the smaller residue mod p (odd p) or
    to 1 mod 4 (p = 2), so repeated calls at different precisions agree.
    """
    hit = _root_cache.get((int(u), p))
    if hit is not None and hit[0] >= prec:
        return hit[1] % p**prec
    mod = p**prec
    if p == 2:
        if u % 8 != 1:
            raise ValueError("2-adic unit is a square only when = 1 mod 8")
        x = 1
        for k in range(3, prec + 1):
            if (x * x - u) % (1 << (k + 1)):
                x += 1 << (k - 1)
        root = x % mod
    else:
        r0 = _tonelli(u, p)
        r = min(r0, p - r0)
        k = 1
        while k < prec:
            k = min(2 * k, prec)
            pk = p**k
            r = (r - (r * r - u) * pow(2 * r, -1, pk)) % pk
        root = r % mod
    _root_cache[(int(u), p)] = (prec, root)
    return root


@dataclass(frozen=True)
class SquareInBase:
    """s = (p**gamma * root)**2 modulo p**(2*gamma + N); root is a unit residue."""

    gamma: int
    root: int
    N: int
    p: int

    def approx(self) -> Fraction:
        return Fraction(self.p) ** self.gamma * self.root


@dataclass(frozen=True)
class NeedsExtension:
    D: Fraction


def _is_square_unit(u: int, p: int) -> bool:
    if p == 2:
        return u % 8 == 1
    return pow(u % p, (p - 1) // 2, p) == 1


def sqrt_class(s, p: int, N: int):
    """Decide whether ``s`` is a square in Q_p; lift the root to N digits if so."""
    s = as_mpq(s)
    if s == 0:
        return SquareInBase(0, 0, N, p)
    v = vp_rational(s, p)
    if v % 2:
        return NeedsExtension(Fraction(int(s.numerator), int(s.denominator)))
    unit = s / mpq(p) ** v
    mod = p ** max(N + 3, 3)
    u = int(unit.numerator) * pow(int(unit.denominator), -1, mod) % mod
    if not _is_square_unit(u, p):
        return NeedsExtension(Fraction(int(s.numerator), int(s.denominator)))
    return SquareInBase(v // 2, unit_sqrt(u, p, N), N, p)


# --------------------------------------------------------------------------
# exact quadratic elements


def _rational_sqrt(x: mpq):
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    if gmpy2.is_square(n) and gmpy2.is_square(d):
        return mpq(gmpy2.isqrt(n), gmpy2.isqrt(d))
    return None


@lru_cache(maxsize=256)
def _normalize_radicand(D: mpq):
    """Return (k, f) with sqrt(D) = f*sqrt(k), k an integer free of small square factors."""
    n = D.numerator * D.denominator
    f = mpq(1, D.denominator)
    for q in _SMALL_PRIMES:
        q2 = q * q
        if q2 > abs(n):
            break
        while n % q2 == 0:
            n //= q2
            f *= q
    return mpz(n), f


def _defer_truncated(op):
    """Let TruncatedElement's reflected operator handle mixed arithmetic."""

    @wraps(op)
    def wrapper(self, other):
        if isinstance(other, TruncatedElement):
            return NotImplemented
        return op(self, other)

    return wrapper


class ExactElement:
    """a + b*sqrt(D) with exact rationals; D = 0 marks a plain rational."""

    __slots__ = ("a", "b", "D")

    def __init__(self, a=0, b=0, D=0):
        a, b, D = as_mpq(a), as_mpq(b), as_mpq(D)
        if b != 0:
            if D == 0:
                b = mpq(0)
            else:
                k, f = _normalize_radicand(D)
                root = _rational_sqrt(mpq(k))
                if root is not None:
                    a, b, D = a + b * f * root, mpq(0), mpq(0)
                else:
                    b, D = b * f, mpq(k)
        if b == 0:
            D = mpq(0)
        self.a, self.b, self.D = a, b, D

    @classmethod
    def sqrt(cls, D) -> "ExactElement":
        return cls(0, 1, D)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def to_fraction(self) -> Fraction:
        if self.b:
            raise TypeError(f"{self} is not rational")
        return Fraction(int(self.a.numerator), int(self.a.denominator))

    def conj(self) -> "ExactElement":
        return ExactElement(self.a, -self.b, self.D)

    def norm_form(self) -> mpq:
        return self.a * self.a - self.D * self.b * self.b

    def bit_size(self) -> int:
        return max(
            int(gmpy2.bit_length(c.numerator)) + int(gmpy2.bit_length(c.denominator))
            for c in (self.a, self.b)
        )

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(x) -> "ExactElement":
        return x if isinstance(x, ExactElement) else ExactElement(x)

    def _rehome(self, D: mpq) -> "ExactElement":
        """Express self over sqrt(D); raise NeedsTower if the fields differ."""
        if self.b == 0 or self.D == D:
            return self
        root = _rational_sqrt(self.D * D)
        if root is None:
            raise NeedsTower(f"sqrt({self.D}) and sqrt({D}) generate different fields")
        # sqrt(D1) = sqrt(D1*D)/sqrt(D) = root*sqrt(D)/D
        return ExactElement(self.a, self.b * root / D, D)

    def _pair(self, other):
        other = self._coerce(other)
        if self.b == 0 or other.b == 0 or self.D == other.D:
            return self, other, self.D or other.D
        return self, other._rehome(self.D), self.D

    @_defer_truncated
    def __add__(self, other):
        x, y, D = self._pair(other)
        return ExactElement(x.a + y.a, x.b + y.b, D)

    __radd__ = __add__

    def __neg__(self):
        return ExactElement(-self.a, -self.b, self.D)

    @_defer_truncated
    def __sub__(self, other):
        x, y, D = self._pair(other)
        return ExactElement(x.a - y.a, x.b - y.b, D)

    @_defer_truncated
    def __rsub__(self, other):
        return self._coerce(other) - self

    @_defer_truncated
    def __mul__(self, other):
        x, y, D = self._pair(other)
        return ExactElement(x.a * y.a + D * x.b * y.b, x.a * y.b + x.b * y.a, D)

    __rmul__ = __mul__

    def inverse(self) -> "ExactElement":
        n = self.norm_form()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt D)")
        return ExactElement(self.a / n, -self.b / n, self.D)

    @_defer_truncated
    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    @_defer_truncated
    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        k = int(k)
        if k < 0:
            return self.inverse() ** (-k)
        out, base = ExactElement(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, (ExactElement, int, Fraction, type(mpq(0)))):
            return NotImplemented
        other = self._coerce(other)
        if self.b == 0 and other.b == 0:
            return self.a == other.a
        try:
            x, y, _ = self._pair(other)
        except NeedsTower:
            return False
        return x.a == y.a and x.b == y.b

    def __hash__(self):
        return hash((int(self.a.numerator), int(self.a.denominator),
                     int(self.b.numerator), int(self.b.denominator), int(self.D)))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        coef = abs(self.b)
        term = f"sqrt({self.D})" if coef == 1 else f"{coef}*sqrt({self.D})"
        if self.a == 0:
            return term if self.b > 0 else f"-{term}"
        return f"{self.a} {'+' if self.b > 0 else '-'} {term}"

    def __repr__(self):
        return f"ExactElement({self})"


E = ExactElement


# --------------------------------------------------------------------------
# valuations


def _split_data(D: mpz, p: int):
    """(j, u) with D = p**(2j) * u and u a square unit in Z_p, or None if sqrt(D) is not in Q_p."""
    v = vp_int(D, p)
    if v % 2:
        return None
    u = int(D // mpz(p) ** v)
    if not _is_square_unit(u % (8 if p == 2 else p), p):
        return None
    return v // 2, u


_split_cache: dict = {}


def _split(D: mpq, p: int):
    key = (int(D), p)
    if key not in _split_cache:
        _split_cache[key] = _split_data(mpz(D), p)
    return _split_cache[key]


def valuation(x, p: int):
    """Additive valuation; Fraction (half-integers in ramified fields), inf for 0."""
    x = ExactElement._coerce(x)
    if x.b == 0:
        v = vp_rational(x.a, p)
        return v if v == math.inf else Fraction(v)
    split = _split(x.D, p)
    if split is None:
        return Fraction(vp_rational(x.norm_form(), p), 2)
    j, u = split
    B = x.b * mpq(p) ** j
    den = gmpy2.lcm(x.a.denominator, B.denominator)
    A = x.a.numerator * (den // x.a.denominator)
    Bn = B.numerator * (den // B.denominator)
    n = vp_int(A * A - Bn * Bn * u, p)
    M = n + 3
    rho = unit_sqrt(u, p, M)
    w = (A + Bn * rho) % (mpz(p) ** M)
    assert w != 0
    return Fraction(vp_int(w, p) - vp_int(den, p))


def norm(x, p: int) -> Radius:
    if isinstance(x, TruncatedElement):
        return x.norm()
    v = valuation(x, p)
    if v == math.inf:
        return ZERO
    return Radius.of(-v)


def sqrt_embedding_residue(D, p: int, N: int):
    """Rational approximation of the embedded sqrt(D) modulo p**(j+N), or None if not in Q_p."""
    D = ExactElement(0, 1, D).D
    split = _split(D, p)
    if split is None:
        return None
    j, u = split
    return Fraction(p) ** j * unit_sqrt(u, p, N)


def digits(x, p: int, N: int):
    """Canonical expansion x = p**gamma * sum(d_j p**j), first N digits."""
    x = as_mpq(x)
    if x == 0:
        raise ValueError("no canonical expansion of 0")
    gamma = vp_rational(x, p)
    unit = x / mpq(p) ** gamma
    mod = p**N
    r = int(unit.numerator) * pow(int(unit.denominator), -1, mod) % mod
    out = []
    for _ in range(N):
        r, d = divmod(r, p)
        out.append(d)
    return gamma, out


# --------------------------------------------------------------------------
# truncated backend


class TruncatedElement:
    """p**v * unit + O(p**(v + prec)) with unit a p-adic unit modulo p**prec.

    ``unit == 0`` is the tracked-zero sentinel: the value is O(p**v) and
    nothing else is known about it.
    """

    __slots__ = ("p", "v", "unit", "prec")

    def __init__(self, p: int, v: int, unit: int, prec: int):
        self.p, self.v, self.unit, self.prec = p, int(v), int(unit), int(prec)

    @classmethod
    def zero(cls, p: int, absprec: int) -> "TruncatedElement":
        return cls(p, absprec, 0, 0)

    @classmethod
    def from_rational(cls, x, p: int, N: int) -> "TruncatedElement":
        x = as_mpq(x)
        if x == 0:
            return cls.zero(p, N)
        gamma, ds = digits(x, p, N)
        return cls(p, gamma, sum(d * p**j for j, d in enumerate(ds)), N)

    @classmethod
    def from_exact(cls, x, p: int, N: int) -> "TruncatedElement":
        x = ExactElement._coerce(x)
        if x.b == 0:
            return cls.from_rational(x.a, p, N)
        split = _split(x.D, p)
        if split is None:
            raise NeedsTower(f"sqrt({x.D}) is not in Q_{p}")
        j, u = split
        extra = abs(int(valuation(x, p))) + abs(vp_rational(x.b, p)) + abs(j) + 2
        root = unit_sqrt(u, p, N + 2 * extra)
        r = cls.from_rational(mpq(p) ** j * root, p, N + 2 * extra)
        return cls.from_rational(x.a, p, N + 2 * extra) + cls.from_rational(x.b, p, N + 2 * extra) * r

    @property
    def is_tracked_zero(self) -> bool:
        return self.unit == 0

    @property
    def absprec(self) -> int:
        return self.v + self.prec

    def _coerce(self, other) -> "TruncatedElement":
        if isinstance(other, TruncatedElement):
            return other
        # constants carry extra digits so they never limit the result
        extra = max(self.prec, 1) + 64
        if isinstance(other, ExactElement):
            return TruncatedElement.from_exact(other, self.p, extra)
        return TruncatedElement.from_rational(other, self.p, extra)

    def __add__(self, other):
        o = self._coerce(other)
        p = self.p
        ab = min(self.absprec, o.absprec)
        vmin = min(self.v, o.v)
        if ab <= vmin:
            return TruncatedElement.zero(p, ab)
        mod = p ** (ab - vmin)
        s = (self.unit * p ** (self.v - vmin) + o.unit * p ** (o.v - vmin)) % mod
        if s == 0:
            return TruncatedElement.zero(p, ab)
        k = vp_int(s, p)
        vs = vmin + k
        return TruncatedElement(p, vs, s // p**k, ab - vs)

    __radd__ = __add__

    def __neg__(self):
        if self.unit == 0:
            return self
        return TruncatedElement(self.p, self.v, (-self.unit) % self.p**self.prec, self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if self.unit == 0 or o.unit == 0:
            if self.unit == 0 and o.unit == 0:
                return TruncatedElement.zero(self.p, self.v + o.v)
            z, nz = (self, o) if self.unit == 0 else (o, self)
            return TruncatedElement.zero(self.p, z.v + nz.v)
        prec = min(self.prec, o.prec)
        return TruncatedElement(self.p, self.v + o.v, self.unit * o.unit % self.p**prec, prec)

    __rmul__ = __mul__

    def inverse(self):
        if self.unit == 0:
            raise PrecisionExhausted("inverting a value indistinguishable from 0")
        mod = self.p**self.prec
        return TruncatedElement(self.p, -self.v, pow(self.unit, -1, mod), self.prec)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def valuation(self) -> int:
        if self.unit == 0:
            raise PrecisionExhausted(f"valuation unknown beyond O(p^{self.v})")
        return self.v

    def norm(self) -> Radius:
        return Radius.of(-self.valuation())

    def __eq__(self, other):
        if not isinstance(other, (TruncatedElement, ExactElement, int, Fraction, type(mpq(0)))):
            return NotImplemented
        diff = self - other
        if diff.unit == 0:
            raise PrecisionExhausted("precision too low to decide equality")
        return False

    __hash__ = None

    def agrees_with(self, x) -> bool:
        """True iff the exact value ``x`` lies in this element's residue class."""
        x = ExactElement._coerce(x)
        if self.unit == 0:
            return x == 0 or valuation(x, self.p) >= self.v
        if x == 0:
            return False
        t = TruncatedElement.from_exact(x, self.p, self.prec + 2)
        return t.v == self.v and (t.unit - self.unit) % self.p**self.prec == 0

    def __repr__(self):
        if self.unit == 0:
            return f"O({self.p}^{self.v})"
        return f"{self.p}^{self.v}*({self.unit} + O({self.p}^{self.prec}))"


# --------------------------------------------------------------------------
# parsing

_RAT = r"[-+]?\d+(?:/\d+)?"
_RAT_RE = re.compile(rf"^\s*{_RAT}\s*$")


def parse_rational(s: str) -> mpq:
    if not _RAT_RE.match(s):
        raise ValueError(f"not a rational literal: {s!r}")
    num, _, den = s.strip().partition("/")
    if den and int(den) == 0:
        raise ValueError(f"zero denominator in {s!r}")
    return mpq(int(num), int(den or 1))


_TERM_RE = re.compile(
    rf"^(?P<coef>\d+(?:/\d+)?)?\s*\*?\s*sqrt\(\s*(?P<D>{_RAT})\s*\)$|^(?P<rat>\d+(?:/\d+)?)$"
)


def parse_element(s: str) -> ExactElement:
    """Parse ``n``, ``n/m`` or ``a + b*sqrt(D)`` style literals."""
    text = s.replace(" ", "")
    if not text:
        raise ValueError("empty element literal")
    terms, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start:
            terms.append(text[start:i])
            start = i
    terms.append(text[start:])
    out = ExactElement(0)
    for t in terms:
        sign = -1 if t.startswith("-") else 1
        body = t.lstrip("+-")
        m = _TERM_RE.match(body)
        if not m:
            raise ValueError(f"cannot parse term {t!r} in {s!r}")
        if m.group("rat"):
            out = out + sign * parse_rational(m.group("rat"))
        else:
            coef = parse_rational(m.group("coef")) if m.group("coef") else mpq(1)
            out = out + ExactElement(0, sign * coef, parse_rational(m.group("D")))
    return out
