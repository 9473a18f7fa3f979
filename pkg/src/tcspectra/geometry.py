"""Exact rational convex and lattice geometry.

Polytopes are given by halfspaces ``<normal, x> <= offset`` with rational data.
Vertices come from exhaustive n-subset intersection, volumes and integrals from
a recursive apex-cone triangulation, and Ehrhart data from exact interpolation
of lattice counts along multiples of the denominator period.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .rational import (
    as_rat,
    as_vector,
    det,
    dot,
    interpolate_polynomial,
    lcm_of_denominators,
    nullspace,
    primitive_integer_vector,
    rank,
    solve,
)

Vector = tuple[Fraction, ...]


class GeometryError(ValueError):
    """Invalid polytope data."""


class UnboundedError(GeometryError):
    """The halfspaces do not cut out a bounded region."""


class DegenerateRegionError(GeometryError):
    """The region is empty or has measure zero."""


@dataclass(frozen=True)
class Halfspace:
    normal: Vector
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", as_vector(self.normal))
        object.__setattr__(self, "offset", as_rat(self.offset))
        if all(a == 0 for a in self.normal):
            raise GeometryError("halfspace normal must be nonzero")

    def slack(self, x: Sequence[Fraction]) -> Fraction:
        return self.offset - dot(self.normal, x)

    def normalized(self) -> "Halfspace":
        """Rescale so the normal is a primitive integer vector."""
        prim = primitive_integer_vector(self.normal)
        i = next(j for j, a in enumerate(self.normal) if a != 0)
        scale = Fraction(prim[i]) / self.normal[i]
        return Halfspace(tuple(Fraction(p) for p in prim), self.offset * scale)


def _affine_rank(points: Sequence[Vector]) -> int:
    if len(points) <= 1:
        return 0
    p0 = points[0]
    return rank([[a - b for a, b in zip(p, p0)] for p in points[1:]])


def _enumerate_vertices(halfspaces: Sequence[Halfspace], n: int) -> list[Vector]:
    verts: set[Vector] = set()
    for combo in itertools.combinations(halfspaces, n):
        x = solve([h.normal for h in combo], [h.offset for h in combo])
        if x is None:
            continue
        if all(h.slack(x) >= 0 for h in halfspaces):
            verts.add(x)
    return sorted(verts)


def _vertices_or_none(halfspaces: Sequence[Halfspace], n: int) -> list[Vector] | None:
    """Vertices of a bounded full-dimensional region, ``None`` if empty or thin.

    Raises :class:`GeometryError` if the region is unbounded.
    """
    base = _enumerate_vertices(halfspaces, n)
    bound = 1 + max((abs(c) for v in base for c in v), default=Fraction(0))
    bound += max((abs(h.offset) for h in halfspaces), default=Fraction(0))
    box = []
    for i in range(n):
        e = tuple(Fraction(int(i == j)) for j in range(n))
        box.append(Halfspace(e, bound))
        box.append(Halfspace(tuple(-a for a in e), bound))
    boxed = _enumerate_vertices(list(halfspaces) + box, n)
    if not boxed:
        return None
    if any(abs(c) == bound for v in boxed for c in v):
        raise UnboundedError("halfspaces do not bound a polytope")
    if _affine_rank(boxed) < n:
        return None
    return boxed


class Polytope:
    """A bounded, full-dimensional rational polytope.

    Parameters
    ----------
    halfspaces : iterable of Halfspace or (normal, offset) pairs
        Inequalities ``<normal, x> <= offset``. Redundant and duplicate
        inequalities are dropped; the stored list is the facet description,
        each normal rescaled to a primitive integer vector.
    """

    def __init__(self, halfspaces: Iterable):
        hs = [h if isinstance(h, Halfspace) else Halfspace(*h) for h in halfspaces]
        if not hs:
            raise GeometryError("a polytope needs at least one halfspace")
        dims = {len(h.normal) for h in hs}
        if len(dims) != 1:
            raise GeometryError("halfspace normals have inconsistent lengths")
        n = dims.pop()
        verts = _vertices_or_none(hs, n)
        if verts is None:
            raise DegenerateRegionError("halfspaces define an empty or lower-dimensional region")
        facets: dict[Halfspace, frozenset[int]] = {}
        for h in hs:
            h = h.normalized()
            tight = frozenset(i for i, v in enumerate(verts) if h.slack(v) == 0)
            if len(tight) >= n and _affine_rank([verts[i] for i in tight]) == n - 1:
                facets.setdefault(h, tight)
        self.dim = n
        self.vertices: tuple[Vector, ...] = tuple(verts)
        self.halfspaces: tuple[Halfspace, ...] = tuple(sorted(facets, key=lambda h: (h.normal, h.offset)))
        self._facet_sets = tuple(facets[h] for h in self.halfspaces)
        self._face_cache: dict = {}

    # -- construction helpers ------------------------------------------------
    @classmethod
    def try_build(cls, halfspaces: Iterable) -> "Polytope | None":
        """Like the constructor but returns ``None`` for empty or thin regions."""
        try:
            return cls(halfspaces)
        except DegenerateRegionError:
            return None

    @classmethod
    def box(cls, lower: Sequence, upper: Sequence) -> "Polytope":
        lo, hi = as_vector(lower), as_vector(upper)
        n = len(lo)
        hs = []
        for i in range(n):
            e = tuple(Fraction(int(i == j)) for j in range(n))
            hs.append(Halfspace(e, hi[i]))
            hs.append(Halfspace(tuple(-a for a in e), -lo[i]))
        return cls(hs)

    @classmethod
    def interval(cls, a, b) -> "Polytope":
        return cls.box([a], [b])

    @classmethod
    def standard_simplex(cls, n: int, scale=1) -> "Polytope":
        scale = as_rat(scale)
        hs = [Halfspace(tuple(Fraction(-int(i == j)) for j in range(n)), 0) for i in range(n)]
        hs.append(Halfspace(tuple(Fraction(1) for _ in range(n)), scale))
        return cls(hs)

    @classmethod
    def from_vertices(cls, points: Iterable[Sequence]) -> "Polytope":
        """Convex hull of finitely many rational points (small inputs only)."""
        pts = sorted(set(as_vector(p) for p in points))
        if not pts:
            raise GeometryError("no points given")
        n = len(pts[0])
        if _affine_rank(pts) < n:
            raise GeometryError("points do not span a full-dimensional polytope")
        hs = set()
        for combo in itertools.combinations(pts, n):
            diffs = [[a - b for a, b in zip(p, combo[0])] for p in combo[1:]]
            ns = nullspace(diffs, n)
            if len(ns) != 1:
                continue
            normal = ns[0]
            off = dot(normal, combo[0])
            vals = [dot(normal, p) for p in pts]
            if all(v <= off for v in vals):
                hs.add(Halfspace(normal, off).normalized())
            elif all(v >= off for v in vals):
                hs.add(Halfspace(tuple(-a for a in normal), -off).normalized())
        return cls(sorted(hs, key=lambda h: (h.normal, h.offset)))

    # -- basic queries -------------------------------------------------------
    def __repr__(self) -> str:
        return f"Polytope(dim={self.dim}, vertices={len(self.vertices)}, facets={len(self.halfspaces)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Polytope) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def contains(self, x: Sequence) -> bool:
        x = as_vector(x)
        if len(x) != self.dim:
            raise GeometryError(f"point has dimension {len(x)}, polytope has {self.dim}")
        return all(h.slack(x) >= 0 for h in self.halfspaces)

    def intersect(self, extra: Iterable) -> "Polytope | None":
        extra = [h if isinstance(h, Halfspace) else Halfspace(*h) for h in extra]
        return Polytope.try_build(list(self.halfspaces) + extra)

    def translated(self, shift: Sequence) -> "Polytope":
        s = as_vector(shift)
        return Polytope([Halfspace(h.normal, h.offset + dot(h.normal, s)) for h in self.halfspaces])

    def scaled(self, r) -> "Polytope":
        r = as_rat(r)
        if r <= 0:
            raise GeometryError("scale factor must be positive")
        return Polytope([Halfspace(h.normal, h.offset * r) for h in self.halfspaces])

    @cached_property
    def period(self) -> int:
        """Least common multiple of the vertex denominators."""
        return lcm_of_denominators(c for v in self.vertices for c in v)

    def tight_facets(self, vertex_index: int) -> list[int]:
        return [j for j, s in enumerate(self._facet_sets) if vertex_index in s]

    # -- lattice points ------------------------------------------------------
    def _integer_system(self) -> tuple[np.ndarray, np.ndarray]:
        rows, rhs = [], []
        for h in self.halfspaces:
            m = lcm_of_denominators(list(h.normal) + [h.offset])
            rows.append([int(a * m) for a in h.normal])
            rhs.append(h.offset * m)
        return np.array(rows, dtype=object), rhs

    def lattice_points(self, k: int = 1) -> list[tuple[int, ...]]:
        """All ``u in Z^n`` with ``u in kP``, in lexicographic order."""
        return [tuple(int(c) for c in row) for row in self.lattice_point_array(k)]

    def lattice_point_array(self, k: int = 1) -> np.ndarray:
        """Lattice points of ``kP`` as an ``(N, n)`` int64 array, lexicographically sorted."""
        if int(k) != k or k < 1:
            raise ValueError("dilation factor must be a positive integer")
        k = int(k)
        lo = [math.floor(min(v[i] for v in self.vertices) * k) for i in range(self.dim)]
        hi = [math.ceil(max(v[i] for v in self.vertices) * k) for i in range(self.dim)]
        rows, rhs = self._integer_system()
        a = rows.astype(np.int64)
        # offsets scaled by k; floor is exact for integer left-hand sides
        b = np.array([math.floor(r * k) for r in rhs], dtype=np.int64)
        if max(abs(x) for x in lo + hi) * max(1, int(np.abs(a).max())) * self.dim > 2**60:
            raise OverflowError("dilation too large for int64 lattice enumeration")
        axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(lo, hi)]
        out = []
        # sweep the first axis so memory stays proportional to one slice
        rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, self.dim - 1) if self.dim > 1 else np.zeros((1, 0), dtype=np.int64)
        rest_val = rest @ a[:, 1:].T if self.dim > 1 else np.zeros((1, len(b)), dtype=np.int64)
        for x0 in axes[0]:
            ok = np.all(rest_val + x0 * a[:, 0] <= b, axis=1)
            if ok.any():
                sel = rest[ok]
                out.append(np.column_stack([np.full(len(sel), x0, dtype=np.int64), sel]))
        if not out:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.concatenate(out, axis=0)

    def count_lattice_points(self, k: int = 1) -> int:
        return int(len(self.lattice_point_array(k)))

    # -- faces and triangulation --------------------------------------------
    def _subfaces(self, face: frozenset[int], d: int) -> list[frozenset[int]]:
        key = ("sub", face)
        if key not in self._face_cache:
            subs = []
            for fs in self._facet_sets:
                s = face & fs
                if s == face or len(s) < d or s in subs:
                    continue
                if _affine_rank([self.vertices[i] for i in sorted(s)]) == d - 1:
                    subs.append(s)
            self._face_cache[key] = subs
        return self._face_cache[key]

    def _triangulate_face(self, face: frozenset[int], d: int, pick) -> list[tuple[int, ...]]:
        if d == 0:
            return [tuple(face)]
        apex = pick(face)
        out = []
        for sub in self._subfaces(face, d):
            if apex in sub:
                continue
            for simplex in self._triangulate_face(sub, d - 1, pick):
                out.append((apex,) + simplex)
        return out

    def triangulate(self, apex: str = "first") -> list[tuple[Vector, ...]]:
        """Simplices (as vertex tuples) coning recursively from a chosen vertex.

        ``apex="first"`` cones from the lexicographically smallest vertex of
        every face, ``"last"`` from the largest; the two give genuinely
        different triangulations of most polytopes.
        """
        pick = {"first": min, "last": max}[apex]
        idx = self._triangulate_face(frozenset(range(len(self.vertices))), self.dim, pick)
        return [tuple(self.vertices[i] for i in s) for s in idx]

    def volume(self, apex: str = "first") -> Fraction:
        return sum((simplex_volume(s) for s in self.triangulate(apex)), Fraction(0))

    def ehrhart_coefficients(self) -> "EhrhartData":
        return ehrhart_coefficients(self)


def simplex_volume(simplex: Sequence[Vector]) -> Fraction:
    v0 = simplex[0]
    n = len(v0)
    m = [[a - b for a, b in zip(v, v0)] for v in simplex[1:]]
    return abs(det(m)) / math.factorial(n)


def enumerate_lattice_points(polytope: Polytope, k: int) -> list[tuple[int, ...]]:
    return polytope.lattice_points(k)


def volume(polytope: Polytope) -> Fraction:
    return polytope.volume()


@dataclass(frozen=True)
class EhrhartData:
    """Constituent of the Ehrhart quasi-polynomial on ``k = 0 mod period``.

    ``count(k) = a0 k^n + a1 k^(n-1) + lower_order[0] k^(n-2) + ...``.
    """

    a0: Fraction
    a1: Fraction
    lower_order: tuple[Fraction, ...]
    period: int

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        """Highest degree first."""
        return (self.a0, self.a1) + self.lower_order

    def __call__(self, k: int) -> Fraction:
        acc = Fraction(0)
        for c in self.coefficients:
            acc = acc * k + c
        return acc


def ehrhart_coefficients(polytope: Polytope) -> EhrhartData:
    n = polytope.dim
    m = polytope.period
    ks = [m * j for j in range(1, n + 3)]
    counts = [polytope.count_lattice_points(k) for k in ks]
    coeffs, resid = interpolate_polynomial(ks, counts, n)
    if resid != 0:
        raise ArithmeticError(f"lattice counts are not polynomial on the period (residual {resid})")
    high_first = tuple(reversed(coeffs))
    a0 = high_first[0]
    if a0 != polytope.volume():
        raise ArithmeticError("leading Ehrhart coefficient disagrees with the volume")
    a1 = high_first[1] if n >= 1 else Fraction(0)
    return EhrhartData(a0, a1, tuple(high_first[2:]), m)


# ---------------------------------------------------------------------------
# piecewise-linear concave functions


@dataclass(frozen=True)
class Affine:
    gradient: Vector
    constant: Fraction

    def __post_init__(self):
        object.__setattr__(self, "gradient", as_vector(self.gradient))
        object.__setattr__(self, "constant", as_rat(self.constant))

    def __call__(self, x: Sequence) -> Fraction:
        return dot(self.gradient, x) + self.constant


@dataclass(frozen=True)
class PLConcave:
    """``g(x) = min_i <gradient_i, x> + constant_i``."""

    affines: tuple[Affine, ...]

    def __post_init__(self):
        affs = tuple(a if isinstance(a, Affine) else Affine(*a) for a in self.affines)
        if not affs:
            raise ValueError("a PL concave function needs at least one affine piece")
        if len({len(a.gradient) for a in affs}) != 1:
            raise ValueError("affine pieces have inconsistent dimensions")
        object.__setattr__(self, "affines", affs)

    @classmethod
    def constant(cls, value, dim: int) -> "PLConcave":
        return cls((Affine((0,) * dim, value),))

    @property
    def dim(self) -> int:
        return len(self.affines[0].gradient)

    def __call__(self, x: Sequence) -> Fraction:
        x = as_vector(x)
        return min(a(x) for a in self.affines)

    def evaluate_float(self, points: np.ndarray) -> np.ndarray:
        """Vectorised float evaluation at an ``(M, n)`` array of points."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        grads = np.array([[float(c) for c in a.gradient] for a in self.affines])
        consts = np.array([float(a.constant) for a in self.affines])
        return np.min(pts @ grads.T + consts, axis=1)

    def shifted(self, kappa) -> "PLConcave":
        kappa = as_rat(kappa)
        return PLConcave(tuple(Affine(a.gradient, a.constant + kappa) for a in self.affines))

    def transported(self, r, shift: Sequence) -> "PLConcave":
        """The function ``x -> r g((x - shift)/r)`` living on ``rP + shift``."""
        r = as_rat(r)
        s = as_vector(shift)
        return PLConcave(tuple(Affine(a.gradient, r * a.constant - dot(a.gradient, s)) for a in self.affines))

    def cell_regions(self, polytope: Polytope) -> list[tuple[int, Polytope]]:
        """Full-dimensional regions of ``polytope`` on which piece ``i`` is active."""
        out = []
        for i, ai in enumerate(self.affines):
            extra = []
            for j, aj in enumerate(self.affines):
                if i == j:
                    continue
                normal = tuple(x - y for x, y in zip(ai.gradient, aj.gradient))
                if all(c == 0 for c in normal):
                    if ai.constant > aj.constant or (ai.constant == aj.constant and j < i):
                        break
                    continue
                extra.append(Halfspace(normal, aj.constant - ai.constant))
            else:
                cell = polytope.intersect(extra)
                if cell is not None:
                    out.append((i, cell))
        return out

    def is_irredundant(self, polytope: Polytope) -> bool:
        return len(self.cell_regions(polytope)) == len(self.affines)

    def pruned(self, polytope: Polytope) -> "PLConcave":
        """Drop the pieces that are nowhere the strict minimum on ``polytope``."""
        keep = [self.affines[i] for i, _ in self.cell_regions(polytope)]
        return PLConcave(tuple(keep))

    def critical_values(self, polytope: Polytope) -> list[Fraction]:
        """Sorted values of ``g`` at the vertices of its cells of linearity."""
        vals = set()
        for i, cell in self.cell_regions(polytope):
            for v in cell.vertices:
                vals.add(self.affines[i](v))
        return sorted(vals)

    def range_on(self, polytope: Polytope) -> tuple[Fraction, Fraction]:
        cv = self.critical_values(polytope)
        return cv[0], cv[-1]


def superlevel_region(g: PLConcave, polytope: Polytope, lam) -> Polytope | None:
    """``{x in P : g(x) >= lam}``; ``None`` when empty or of measure zero.

    Because ``g`` is a minimum of affine functions the region is the
    intersection of ``P`` with one halfspace per piece.
    """
    lam = as_rat(lam)
    if g.dim != polytope.dim:
        raise GeometryError("function and polytope dimensions differ")
    extra = []
    for a in g.affines:
        if all(c == 0 for c in a.gradient):
            if a.constant < lam:
                return None
            continue
        extra.append(Halfspace(tuple(-c for c in a.gradient), a.constant - lam))
    if not extra:
        return polytope
    return polytope.intersect(extra)


@dataclass(frozen=True)
class CellDecomposition:
    """A triangulation of ``P`` on whose simplices ``g`` is affine."""

    cells: tuple[tuple[Vector, ...], ...]
    active: tuple[int, ...]

    def volume(self) -> Fraction:
        return sum((simplex_volume(c) for c in self.cells), Fraction(0))


def cell_decomposition(g: PLConcave, polytope: Polytope, split_at=None, apex: str = "first") -> CellDecomposition:
    """Triangulate the cells of linearity, optionally also cutting along ``{g = split_at}``."""
    cells, active = [], []
    for i, region in g.cell_regions(polytope):
        pieces = [region]
        if split_at is not None:
            a = g.affines[i]
            if any(c != 0 for c in a.gradient):
                t = as_rat(split_at) - a.constant
                lo = region.intersect([Halfspace(a.gradient, t)])
                hi = region.intersect([Halfspace(tuple(-c for c in a.gradient), -t)])
                pieces = [p for p in (lo, hi) if p is not None]
        for piece in pieces:
            for s in piece.triangulate(apex):
                cells.append(s)
                active.append(i)
    return CellDecomposition(tuple(cells), tuple(active))


def complete_homogeneous(values: Sequence[Fraction], p: int) -> Fraction:
    """``h_p(values)``: the sum of all degree-``p`` monomials in ``values``."""
    h = [Fraction(1)] + [Fraction(0)] * p
    for x in values:
        for q in range(1, p + 1):
            h[q] = h[q] + x * h[q - 1]
    return h[p]


def simplex_linear_power_integral(simplex: Sequence[Vector], values: Sequence[Fraction], p: int) -> Fraction:
    """Exact ``int_simplex l(x)^p dx`` for affine ``l`` with the given vertex values."""
    n = len(simplex[0])
    vol = simplex_volume(simplex)
    return vol * Fraction(math.factorial(p) * math.factorial(n), math.factorial(p + n)) * complete_homogeneous(values, p)


def integrate_pl_power(g: PLConcave, polytope: Polytope, p: int, shift=0, absolute: bool = False, apex: str = "first") -> Fraction:
    """Exact ``int_P (g(x) - shift)^p dx`` (or ``|g - shift|^p`` when ``absolute``)."""
    if int(p) != p or p < 0:
        raise ValueError("exponent must be a nonnegative integer")
    p = int(p)
    shift = as_rat(shift)
    decomp = cell_decomposition(g, polytope, split_at=shift if absolute else None, apex=apex)
    total = Fraction(0)
    for simplex, i in zip(decomp.cells, decomp.active):
        vals = [g.affines[i](v) - shift for v in simplex]
        if absolute:
            # the split guarantees a constant sign on every simplex
            sign = -1 if sum(vals) < 0 else 1
            vals = [sign * v for v in vals]
        total += simplex_linear_power_integral(simplex, vals, p)
    return total


def integrate_polynomial(polytope: Polytope, poly: dict[tuple[int, ...], Fraction], apex: str = "first") -> Fraction:
    """Exact integral of ``sum c_alpha x^alpha`` over the polytope.

    Uses the Dirichlet moment identity on each simplex: expanding a product of
    linear forms in barycentric coordinates, ``E[prod B_i^m_i] =
    n! prod m_i! / (n+p)!`` for the uniform law on the simplex.
    """
    n = polytope.dim
    total = Fraction(0)
    for simplex in polytope.triangulate(apex):
        vol = simplex_volume(simplex)
        for alpha, coef in poly.items():
            coef = as_rat(coef)
            if coef == 0:
                continue
            coords = [i for i, a in enumerate(alpha) for _ in range(a)]
            p = len(coords)
            acc = Fraction(0)
            for choice in itertools.product(range(n + 1), repeat=p):
                term = Fraction(1)
                for c, vi in zip(coords, choice):
                    term *= simplex[vi][c]
                if term == 0:
                    continue
                mult = 1
                for vi in set(choice):
                    mult *= math.factorial(choice.count(vi))
                acc += term * mult
            total += coef * vol * Fraction(math.factorial(n), math.factorial(n + p)) * acc
    return total
