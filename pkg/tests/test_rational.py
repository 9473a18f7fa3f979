from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from tcspectra.rational import (
    RationalFormatError,
    det,
    format_rat,
    interpolate_polynomial,
    nullspace,
    parse_rat,
    poly_eval,
    primitive_integer_vector,
    rank,
    solve,
)

fractions = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 10**6)


@given(fractions)
def test_format_parse_round_trip(q):
    text = format_rat(q)
    assert parse_rat(text) == q
    assert format_rat(parse_rat(text)) == text


@pytest.mark.parametrize("text", ["2/4", "1/0", "-0", "01", "3/1", "1/-2", "1.5", " 1", "+1", "", "1/"])
def test_parse_rejects_noncanonical(text):
    with pytest.raises(RationalFormatError):
        parse_rat(text)


def test_parse_rejects_non_strings():
    with pytest.raises(RationalFormatError):
        parse_rat(1)


small = st.integers(min_value=-6, max_value=6)
matrices = st.integers(min_value=1, max_value=4).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n))


@given(matrices)
def test_det_and_rank_match_sympy(rows):
    m = sympy.Matrix(rows)
    assert det([[Fraction(a) for a in r] for r in rows]) == Fraction(int(m.det()))
    assert rank(rows) == m.rank()


@given(matrices, st.lists(small, min_size=4, max_size=4))
def test_solve_satisfies_system(rows, rhs):
    n = len(rows)
    b = [Fraction(x) for x in rhs[:n]]
    x = solve(rows, b)
    if sympy.Matrix(rows).det() == 0:
        assert x is None
    else:
        assert [sum(Fraction(a) * xi for a, xi in zip(r, x)) for r in rows] == b


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=3))
def test_nullspace_vectors_are_annihilated(rows):
    basis = nullspace(rows, 3)
    assert len(basis) == 3 - rank(rows)
    for v in basis:
        assert all(sum(Fraction(a) * c for a, c in zip(r, v)) == 0 for r in rows)


def test_primitive_integer_vector():
    assert primitive_integer_vector([Fraction(2, 3), Fraction(-4, 3)]) == (1, -2)
    assert primitive_integer_vector([Fraction(0), Fraction(5, 7)]) == (0, 1)


@given(st.lists(fractions, min_size=1, max_size=5))
def test_interpolation_recovers_polynomial(coeffs):
    d = len(coeffs) - 1
    xs = [Fraction(j) for j in range(1, d + 3)]
    ys = [poly_eval(coeffs, x) for x in xs]
    fit, resid = interpolate_polynomial(xs, ys, d)
    assert resid == 0
    assert list(fit) == list(coeffs)


def test_interpolation_reports_residual_for_wrong_degree():
    xs = [Fraction(j) for j in range(1, 5)]
    ys = [x**3 for x in xs]
    _, resid = interpolate_polynomial(xs, ys, 2)
    assert resid != 0
