"""Exact rational helpers built on :class:`fractions.Fraction`.

Everything in the exact layer of the package is a ``Fraction``; this module
adds strict parsing/formatting and the small amount of exact linear algebra
(elimination, rank, nullspace, determinant) that vertex enumeration and
interpolation need.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

Rat = Fraction

_RAT_RE = re.compile(r"^(-?)(0|[1-9][0-9]*)(?:/([1-9][0-9]*))?$")


class RationalFormatError(ValueError):
    """Raised for malformed rational strings."""


def parse_rat(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` exactly.

    Non-reduced fractions (``"2/4"``), zero or negative denominators, signs on
    zero and leading zeros are rejected so that formatting round-trips
    byte-for-byte.
    """
    if not isinstance(text, str):
        raise RationalFormatError(f"expected a rational string, got {type(text).__name__}")
    m = _RAT_RE.match(text)
    if m is None:
        if re.match(r"^-?\d+/0+$", text):
            raise RationalFormatError(f"zero denominator in {text!r}")
        raise RationalFormatError(f"malformed rational {text!r}")
    sign, num, den = m.groups()
    p = int(num)
    q = int(den) if den is not None else 1
    if den is not None and q == 1:
        raise RationalFormatError(f"denominator 1 must be omitted in {text!r}")
    if math.gcd(p, q) != 1:
        raise RationalFormatError(f"rational {text!r} is not reduced")
    if sign and p == 0:
        raise RationalFormatError(f"negative zero in {text!r}")
    return Fraction(-p if sign else p, q)


def format_rat(q: Fraction | int) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def as_rat(x) -> Fraction:
    """Coerce ints, Fractions and rational strings; floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rat(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational")


def as_vector(xs: Iterable) -> tuple[Fraction, ...]:
    return tuple(as_rat(x) for x in xs)


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    m = 1
    for v in values:
        m = math.lcm(m, Fraction(v).denominator)
    return m


def dot(a: Sequence[Fraction], b: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _row_reduce(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the first ``ncols`` columns."""
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    _, piv = _row_reduce([list(map(Fraction, r)) for r in rows], len(rows[0]))
    return len(piv)


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> tuple[Fraction, ...] | None:
    """Solve a square system exactly; ``None`` when singular."""
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(bi)] for row, bi in zip(a, b)]
    red, piv = _row_reduce(aug, n)
    if len(piv) < n:
        return None
    return tuple(red[i][n] for i in range(n))


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[tuple[Fraction, ...]]:
    """Basis of ``{x : rows @ x = 0}``."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    red, piv = _row_reduce([list(map(Fraction, r)) for r in rows], ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(piv):
            v[p] = -red[i][f]
        basis.append(tuple(v))
    return basis


def det(a: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [list(map(Fraction, r)) for r in a]
    n = len(m)
    sign = 1
    out = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            sign = -sign
        out *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return sign * out


def primitive_integer_vector(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Smallest integer vector positively proportional to ``v``."""
    v = [Fraction(x) for x in v]
    if all(x == 0 for x in v):
        raise ValueError("zero vector has no primitive direction")
    scale = lcm_of_denominators(v)
    ints = [int(x * scale) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    return tuple(x // g for x in ints)


def interpolate_polynomial(xs: Sequence[Fraction], ys: Sequence[Fraction], degree: int) -> tuple[list[Fraction], Fraction]:
    """Fit ``sum c_i x^i`` (i <= degree) through the first ``degree+1`` samples.

    Returns the coefficients (constant term first) and the largest absolute
    residual on the remaining samples, which is zero exactly when every sample
    lies on the polynomial.
    """
    if len(xs) < degree + 1:
        raise ValueError("not enough samples for the requested degree")
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    a = [[x**i for i in range(degree + 1)] for x in xs[: degree + 1]]
    coeffs = solve(a, ys[: degree + 1])
    if coeffs is None:
        raise ArithmeticError("interpolation nodes must be distinct")
    resid = Fraction(0)
    for x, y in zip(xs[degree + 1 :], ys[degree + 1 :]):
        r = abs(poly_eval(coeffs, x) - y)
        resid = max(resid, r)
    return list(coeffs), resid


def poly_eval(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc
