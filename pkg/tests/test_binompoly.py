import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dimpoly.binompoly import (DimensionError, InconsistentSamplesError, InsufficientSamplesError,
                               NotNumericalError, NumPoly, binom, interpolate)


def values(p, pts):
    return [p.evaluate(x) for x in pts]


# --- binom -----------------------------------------------------------------

@pytest.mark.parametrize("t,k,want", [(7, 2, 21), (5, 0, 1), (5, -2, 0), (-3, 2, 6), (2, 5, 0), (0, 0, 1)])
def test_binom(t, k, want):
    assert binom(t, k) == want


# --- arithmetic ------------------------------------------------------------

def test_add_constant():
    p = NumPoly(1, {(1,): 2, (0,): -1}) + NumPoly.constant(1, 1)
    assert p.coeffs == {(1,): 2}
    assert values(p, [(t,) for t in range(5)]) == [2 * t + 2 for t in range(5)]


def test_square_of_linear():
    x = NumPoly(1, {(1,): 1})
    sq = x * x
    assert sq.coeffs == {(2,): 2, (1,): -1}
    assert values(sq, [(t,) for t in range(4)]) == [(t + 1) ** 2 for t in range(4)]


def test_self_difference_is_empty():
    p = NumPoly(2, {(1, 1): 3, (0, 2): Fraction(1, 2)})
    assert (p - p).coeffs == {}
    assert (p - p).is_zero()


def test_mismatched_vars():
    with pytest.raises(DimensionError):
        NumPoly(1, {(1,): 1}) + NumPoly(2)
    with pytest.raises(DimensionError):
        NumPoly(1, {(1,): 1}) * NumPoly(2, {(0, 1): 1})


def test_zero_coefficients_dropped():
    assert NumPoly(2, {(1, 0): 0, (0, 0): 5}).coeffs == {(0, 0): 5}


# --- shift -----------------------------------------------------------------

def test_shift_linear():
    p = NumPoly.from_power_basis(1, {(1,): 2, (0,): 1})
    q = p.shift([-1])
    assert values(q, [(t,) for t in range(-3, 4)]) == [2 * t - 1 for t in range(-3, 4)]


def test_shift_pascal():
    # C(t+3,2) = C(t+2,2) + C(t+1,1) + 1
    q = NumPoly(1, {(2,): 1}).shift([1])
    assert q.coeffs == {(2,): 1, (1,): 1, (0,): 1}
    assert values(q, [(t,) for t in range(4)]) == [binom(t + 3, 2) for t in range(4)]


def test_shift_zero_identity():
    p = NumPoly(2, {(2, 1): 3, (0, 1): -2})
    assert p.shift([0, 0]) == p


# --- interpolation ----------------------------------------------------------

def test_interpolate_line():
    p = interpolate([((0,), 1), ((1,), 3), ((2,), 5)], [1])
    assert p.coeffs == {(1,): 2, (0,): -1}


def test_interpolate_square():
    p = interpolate([((t,), t * t) for t in range(5)], [2])
    assert [p.coeff((i,)) for i in (2, 1, 0)] == [2, -3, 1]


def test_interpolate_inconsistent_reports_sample():
    with pytest.raises(InconsistentSamplesError) as ei:
        interpolate([((0,), 0), ((1,), 1), ((2,), 0)], [1])
    assert ei.value.sample[0] == (2,)


def test_interpolate_underdetermined():
    with pytest.raises(InsufficientSamplesError):
        interpolate([((0,), 1)], [1])
    with pytest.raises(InsufficientSamplesError):
        # two points on a line do not fix a bivariate degree (1,1) polynomial
        interpolate([((0, 0), 1), ((1, 1), 2), ((2, 2), 3), ((3, 3), 4)], [1, 1])


def test_interpolate_two_variables_offset_grid():
    target = NumPoly.from_power_basis(2, {(2, 1): 3, (1, 0): -1, (0, 0): 7})
    pts = list(itertools.product(range(5, 8), range(-2, 0)))
    assert interpolate([(x, target.evaluate(x)) for x in pts], [2, 1]) == target


def test_numerical_flag():
    assert NumPoly(1, {(1,): 2}).is_numerical_form()
    with pytest.raises(NotNumericalError):
        NumPoly(1, {(1,): Fraction(1, 2)}).assert_numerical()


# --- serialisation ------------------------------------------------------------

def test_text_form():
    p = NumPoly(2, {(1, 0): 2, (0, 1): -1, (0, 0): 3})
    assert p.to_text() == "2*C(t1+1,1) - C(t2+1,1) + 3"
    assert NumPoly(1).to_text() == "0"


def test_json_round_trip():
    p = NumPoly(3, {(1, 0, 2): Fraction(-3, 4), (0, 0, 0): 9})
    s = p.to_json()
    assert NumPoly.from_json(s) == p
    assert s == p.to_json()
    assert '"coeff":"-3/4"' in s


def test_power_basis_round_trip():
    p = NumPoly(2, {(2, 1): 5, (1, 1): -2, (0, 0): 1})
    assert NumPoly.from_power_basis(2, p.to_power_basis()) == p


# --- properties ---------------------------------------------------------------

coeff = st.fractions(min_value=-20, max_value=20, max_denominator=6)


@st.composite
def numpolys(draw, q=2, d=2):
    idx = list(itertools.product(range(d + 1), repeat=q))
    chosen = draw(st.lists(st.sampled_from(idx), max_size=5, unique=True))
    return NumPoly(q, {i: draw(coeff) for i in chosen})


@given(numpolys())
def test_basis_round_trip(p):
    bounds = [2, 2]
    grid = list(itertools.product(range(-1, 3), range(3, 6)))
    assert interpolate([(x, p.evaluate(x)) for x in grid], bounds) == p


@given(numpolys(), st.lists(st.integers(-4, 4), min_size=2, max_size=2),
       st.lists(st.integers(-4, 4), min_size=2, max_size=2))
def test_shift_composition(p, d1, d2):
    assert p.shift(d1).shift(d2) == p.shift([a + b for a, b in zip(d1, d2)])


@given(numpolys(), numpolys(),
       st.lists(st.tuples(st.integers(-30, 30), st.integers(-30, 30)), min_size=200, max_size=200))
def test_evaluation_homomorphism(a, b, pts):
    ab = a * b
    apb = a + b
    for x in pts:
        assert ab.evaluate(x) == a.evaluate(x) * b.evaluate(x)
        assert apb.evaluate(x) == a.evaluate(x) + b.evaluate(x)


@given(numpolys(q=1, d=4), st.integers(-5, 5))
def test_shift_matches_evaluation(p, d):
    q = p.shift([d])
    for t in range(-6, 7):
        assert q.evaluate((t,)) == p.evaluate((t + d,))


@given(st.integers(0, 12), st.integers(-4, 6))
def test_integer_valued_basis(t, i):
    assert Fraction(binom(t + i, i)).denominator == 1
