import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from padyn.errors import PrecisionExhausted
from padyn.field import (
    INF,
    ONE,
    ZERO,
    ExactElement,
    NeedsExtension,
    Radius,
    SquareInBase,
    TruncatedElement,
    check_prime,
    digits,
    norm,
    parse_element,
    sqrt_class,
    valuation,
)

from oracles import canonical_root, vp

PRIMES = [2, 3, 5, 7]
rationals = st.fractions(max_denominator=10**6).filter(lambda q: abs(q.numerator) < 10**9)
nonzero = rationals.filter(bool)


# -- valuation / norm -------------------------------------------------------

@pytest.mark.parametrize("x,p,want", [(18, 3, 2), (Fraction(5, 3), 3, -1)])
def test_valuation_of_rationals(x, p, want):
    assert valuation(ExactElement(x), p) == want


def test_valuation_sqrt3_is_half():
    assert valuation(ExactElement.sqrt(3), 3) == Fraction(1, 2)


@pytest.mark.parametrize("x,p,want", [(0, 5, ZERO), (18, 3, Radius.of(-2)), (Fraction(2, 3), 3, Radius.of(1))])
def test_norm_examples(x, p, want):
    assert norm(ExactElement(x), p) == want


def test_valuation_of_zero_is_inf():
    assert valuation(ExactElement(0), 7) == math.inf


@given(nonzero, st.sampled_from(PRIMES))
def test_valuation_matches_division_oracle(x, p):
    assert valuation(ExactElement(x), p) == vp(x, p)


@given(rationals, nonzero, st.sampled_from([3, 5, 7]), st.sampled_from([2, 3, 5, 6, 7, 10, 11, 13, 14]))
def test_quadratic_valuation_oracle(a, b, p, D):
    x = ExactElement(a, b, D)
    assume(x.D == D)
    if D % p == 0 or pow(D, (p - 1) // 2, p) != 1:
        # sqrt(D) generates a ramified or inert extension: the norm form decides
        want = Fraction(vp(a * a - D * b * b, p), 2)
    else:
        k = 80
        den = math.lcm(a.denominator, b.denominator)
        A, B = a.numerator * (den // a.denominator), b.numerator * (den // b.denominator)
        w = (A + B * canonical_root(D, p, k)) % p**k
        want = vp(w, p) - vp(den, p)
    assert valuation(x, p) == want


@given(rationals, rationals, st.sampled_from(PRIMES))
def test_norm_is_multiplicative(x, y, p):
    X, Y = ExactElement(x), ExactElement(y)
    assert norm(X * Y, p) == norm(X, p) * norm(Y, p)


@given(rationals, rationals, rationals, rationals, st.sampled_from([3, 5, 7]))
def test_norm_multiplicative_in_extension(a1, b1, a2, b2, p):
    X, Y = ExactElement(a1, b1, 2), ExactElement(a2, b2, 2)
    assert norm(X * Y, p) == norm(X, p) * norm(Y, p)


@given(rationals, rationals, st.sampled_from(PRIMES))
def test_strong_triangle(x, y, p):
    X, Y = ExactElement(x), ExactElement(y)
    nx, ny = norm(X, p), norm(Y, p)
    s = norm(X + Y, p)
    assert s <= max(nx, ny)
    if nx != ny:
        assert s == max(nx, ny)


# -- radius -----------------------------------------------------------------

def test_radius_order_and_arithmetic():
    assert ZERO < Radius.of(-100) < ONE < Radius.of(Fraction(1, 2)) < INF
    assert Radius.of(2) * Radius.of(Fraction(-1, 2)) == Radius.of(Fraction(3, 2))
    assert Radius.of(3) / Radius.of(1) == Radius.of(2)
    assert Radius.of(1) ** 3 == Radius.of(3)
    assert ZERO * Radius.of(5) == ZERO


@given(st.fractions(max_denominator=4))
def test_radius_json_round_trip(e):
    for r in (Radius.of(e), ZERO, INF):
        assert Radius.from_json(r.to_json()) == r


# -- digits -----------------------------------------------------------------

@pytest.mark.parametrize("x,p,N,want", [
    (18, 3, 3, (2, [2, 0, 0])),
    (-1, 3, 4, (0, [2, 2, 2, 2])),
    (Fraction(1, 2), 3, 3, (0, [2, 1, 1])),
])
def test_digits_examples(x, p, N, want):
    assert digits(x, p, N) == want


def test_digits_of_zero_is_an_error():
    with pytest.raises(ValueError, match="no canonical expansion of 0"):
        digits(0, 3, 4)


@given(nonzero, st.sampled_from(PRIMES), st.integers(1, 12))
def test_digits_round_trip(x, p, N):
    gamma, ds = digits(x, p, N)
    assert ds[0] > 0 and all(0 <= d < p for d in ds)
    approx = Fraction(p) ** gamma * sum(d * p**j for j, d in enumerate(ds))
    diff = Fraction(x) - approx
    assert diff == 0 or vp(diff, p) >= gamma + N


# -- square roots -----------------------------------------------------------

def test_sqrt_class_examples():
    sq = sqrt_class(6, 5, 2)
    assert isinstance(sq, SquareInBase) and sq.root % 25 == 16
    assert isinstance(sqrt_class(2, 5, 5), NeedsExtension)
    assert isinstance(sqrt_class(3, 3, 5), NeedsExtension)


@given(nonzero, st.sampled_from(PRIMES), st.integers(3, 10))
def test_sqrt_class_soundness(s, p, N):
    cls = sqrt_class(s, p, N)
    if isinstance(cls, SquareInBase):
        diff = cls.approx() ** 2 - Fraction(s)
        assert diff == 0 or vp(diff, p) >= vp(s, p) + N
    else:
        # no square in Q_p: brute force over residues of t = p^k * u, with v(t^2) = v(s)
        v = vp(s, p)
        if v % 2:
            return
        u = Fraction(s) / Fraction(p) ** v
        target = u.numerator * pow(u.denominator, -1, p**3) % p**3
        assert all(t * t % p**3 != target for t in range(p**3) if t % p)


# -- exact arithmetic -------------------------------------------------------

def test_norm_form_product():
    assert ExactElement(1, 1, 2) * ExactElement(1, -1, 2) == ExactElement(-1)


def test_invert_three():
    inv = ExactElement(3).inverse()
    assert inv == ExactElement(Fraction(1, 3)) and valuation(inv, 3) == -1


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ExactElement(1, 1, 2) / ExactElement(0)


def test_square_radicand_folds_into_rational():
    assert ExactElement(1, 1, 4).is_rational and ExactElement(1, 1, 4) == ExactElement(3)
    assert ExactElement(0, 1, 8) == ExactElement(0, 2, 2)


@given(rationals, rationals)
def test_parse_round_trip(a, b):
    x = ExactElement(a, b, -3)
    assert parse_element(str(x)) == x


def test_check_prime():
    assert check_prime(7) == 7
    with pytest.raises(ValueError):
        check_prime(9)


# -- truncated backend ------------------------------------------------------

def test_truncated_cancellation_bookkeeping():
    t = TruncatedElement.from_rational(13, 3, 3) - TruncatedElement.from_rational(4, 3, 3)
    assert (t.v, t.unit, t.prec) == (2, 1, 1)


def test_truncated_refuses_undecidable_equality():
    t = TruncatedElement.from_rational(1, 5, 3)
    u = TruncatedElement.from_rational(1 + 5**4, 5, 3)
    with pytest.raises(PrecisionExhausted):
        t == u


@given(rationals, rationals, rationals, st.sampled_from([3, 5, 7]), st.integers(5, 30))
def test_backend_coherence(x, y, z, p, N):
    assume(y != 0)
    exact = (ExactElement(x) * ExactElement(x) + ExactElement(z)) / ExactElement(y) - ExactElement(z)
    T = [TruncatedElement.from_rational(v, p, N) for v in (x, y, z)]
    try:
        trunc = (T[0] * T[0] + T[2]) / T[1] - T[2]
    except PrecisionExhausted:
        return
    assert trunc.agrees_with(exact)


@given(st.integers(-10**6, 10**6), st.sampled_from([5, 7]))
def test_truncated_split_extension_agrees(n, p):
    x = ExactElement(n, 1, 11 if p == 5 else 2)
    t = TruncatedElement.from_exact(x, p, 20)
    assert t.agrees_with(x)
    assert t.norm() == norm(x, p)
