"""Test configurations and the weight data they induce at each level ``k``.

Three models are supported:

* :class:`ToricConfig` -- a polytope with a concave PL function ``g``; the
  monomial ``u`` in ``kP`` has weight ``round(k g(u/k))``.
* :class:`NormalConeConfig` -- deformation to the normal cone of a torus-fixed
  point at a smooth corner of the polytope.
* :class:`FlagIdealConfig` -- a flag of monomial ideals ``J_0 <= ... <= J_{N-1}``
  on projective space, degenerated through ``J_0 + t J_1 + ... + (t^N)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .geometry import Affine, Halfspace, PLConcave, Polytope, _enumerate_vertices
from .rational import as_rat, as_vector, det, dot, lcm_of_denominators, nullspace, primitive_integer_vector, solve


class DivisibilityError(ValueError):
    """A level ``k`` that is not divisible enough for the configuration."""


class ConfigurationError(ValueError):
    """Inconsistent configuration data."""


# ---------------------------------------------------------------------------
# filtration tables


@dataclass(frozen=True)
class FiltrationTable:
    """Eigenspace dimensions ``dim V_lambda`` at level ``k``.

    ``entries`` is sorted by weight and only lists nonzero dimensions.
    """

    level: int
    entries: tuple[tuple[int, int], ...]

    @classmethod
    def from_weights(cls, level: int, weights: np.ndarray) -> "FiltrationTable":
        vals, counts = np.unique(np.asarray(weights, dtype=np.int64), return_counts=True)
        return cls(level, tuple((int(v), int(c)) for v, c in zip(vals, counts)))

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    def dim(self, lam: int) -> int:
        return self.as_dict().get(lam, 0)

    def counting(self, lam) -> int:
        """``f_k(lam)``: total dimension of the weights ``>= lam``."""
        return sum(d for w, d in self.entries if w >= lam)

    @property
    def total_dim(self) -> int:
        return sum(d for _, d in self.entries)

    @property
    def total_weight(self) -> int:
        return sum(w * d for w, d in self.entries)

    def weight_range(self) -> tuple[int, int]:
        return self.entries[0][0], self.entries[-1][0]


# ---------------------------------------------------------------------------
# configurations


class Configuration:
    """Shared interface: ``dim``, ``period``, ``polytope`` and ``dims_by_weight``."""

    kind: str = "abstract"

    @property
    def dim(self) -> int:
        return self.polytope.dim

    def check_level(self, k: int) -> int:
        if isinstance(k, bool) or int(k) != k or k < 1:
            raise ValueError(f"level must be a positive integer, got {k!r}")
        k = int(k)
        if k % self.divisibility != 0:
            raise DivisibilityError(f"level {k} is not a multiple of {self.divisibility}")
        return k

    @property
    def divisibility(self) -> int:
        """Levels must be multiples of this integer."""
        return 1

    def dims_by_weight(self, k: int) -> FiltrationTable:
        raise NotImplementedError

    def hilbert_dim(self, k: int) -> int:
        return self.dims_by_weight(k).total_dim

    def total_weight(self, k: int) -> int:
        return self.dims_by_weight(k).total_weight

    def as_toric(self) -> "ToricConfig":
        """The toric configuration with the same limit weight function."""
        raise NotImplementedError


class ToricConfig(Configuration):
    """Polytope ``P`` with a concave PL function ``g``.

    Parameters
    ----------
    polytope : Polytope
    g : PLConcave
        Must be irredundant on ``P`` (every affine piece is the minimum on a
        full-dimensional cell); use :meth:`PLConcave.pruned` to clean input.
    rounding : {"ceil", "floor"}
    """

    kind = "toric"

    def __init__(self, polytope: Polytope, g: PLConcave, rounding: str = "ceil"):
        if rounding not in ("ceil", "floor"):
            raise ConfigurationError(f"unknown rounding {rounding!r}")
        if g.dim != polytope.dim:
            raise ConfigurationError("g and the polytope have different dimensions")
        if not g.is_irredundant(polytope):
            raise ConfigurationError("g has affine pieces that are never active on the polytope")
        self.polytope = polytope
        self.g = g
        self.rounding = rounding

    def __repr__(self) -> str:
        return f"ToricConfig({self.polytope!r}, pieces={len(self.g.affines)}, rounding={self.rounding!r})"

    @cached_property
    def period(self) -> int:
        vals = [c for _, cell in self.g.cell_regions(self.polytope) for v in cell.vertices for c in v]
        vals += [c for a in self.g.affines for c in a.gradient] + [a.constant for a in self.g.affines]
        return lcm_of_denominators(vals)

    @cached_property
    def _integer_pieces(self) -> tuple[int, np.ndarray, np.ndarray]:
        den = lcm_of_denominators([c for a in self.g.affines for c in a.gradient] + [a.constant for a in self.g.affines])
        grads = np.array([[int(c * den) for c in a.gradient] for a in self.g.affines], dtype=np.int64)
        consts = np.array([int(a.constant * den) for a in self.g.affines], dtype=np.int64)
        return den, grads, consts

    def _round(self, scaled: np.ndarray, den: int) -> np.ndarray:
        if self.rounding == "ceil":
            return -((-scaled) // den)
        return scaled // den

    def weights_at(self, points: np.ndarray, k: int) -> np.ndarray:
        """Weights of an ``(M, n)`` array of lattice points of ``kP``."""
        den, grads, consts = self._integer_pieces
        scaled = np.min(points @ grads.T + k * consts, axis=1)
        return self._round(scaled, den)

    def weight(self, u: Sequence[int], k: int) -> int:
        k = self.check_level(k)
        x = tuple(Fraction(int(c), k) for c in u)
        if len(x) != self.dim or not self.polytope.contains(x):
            raise ConfigurationError(f"{tuple(u)} is not a lattice point of {k}P")
        val = k * self.g(x)
        return math.ceil(val) if self.rounding == "ceil" else math.floor(val)

    def dims_by_weight(self, k: int) -> FiltrationTable:
        k = self.check_level(k)
        pts = self.polytope.lattice_point_array(k)
        return FiltrationTable.from_weights(k, self.weights_at(pts, k))

    def lambda_bounds(self) -> tuple[Fraction, Fraction]:
        return self.g.range_on(self.polytope)

    def as_toric(self) -> "ToricConfig":
        return self

    def shifted(self, kappa) -> "ToricConfig":
        return ToricConfig(self.polytope, self.g.shifted(kappa), self.rounding)


def corner_edges(polytope: Polytope, vertex_index: int) -> list[tuple[tuple[int, ...], Fraction]]:
    """Primitive edge directions at a simple vertex with their lattice lengths."""
    v = polytope.vertices[vertex_index]
    n = polytope.dim
    facets = polytope.tight_facets(vertex_index)
    if len(facets) != n:
        raise ConfigurationError("vertex is not simple (needs exactly n tight facets)")
    out = []
    for drop in range(n):
        rows = [polytope.halfspaces[facets[j]].normal for j in range(n) if j != drop]
        ns = nullspace(rows, n) if rows else [tuple(Fraction(1) for _ in range(n))]
        if len(ns) != 1:
            raise ConfigurationError("degenerate corner")
        d = ns[0]
        if dot(polytope.halfspaces[facets[drop]].normal, d) > 0:
            d = tuple(-a for a in d)
        e = primitive_integer_vector(d)
        # farthest point along the edge
        t_max = min(
            h.slack(v) / dot(h.normal, e) for h in polytope.halfspaces if dot(h.normal, e) > 0
        )
        out.append((e, t_max))
    return out


def _corner_form(polytope: Polytope, vertex_index: int) -> tuple[np.ndarray, tuple[Fraction, ...]]:
    """Integer matrix ``M`` with ``ell_v(x) = sum(M (x - v))`` at a Delzant corner."""
    edges = corner_edges(polytope, vertex_index)
    e = [list(map(Fraction, d)) for d, _ in edges]
    if abs(det(e)) != 1:
        raise ConfigurationError("corner is not Delzant: edge directions are not a lattice basis")
    n = polytope.dim
    # row i of E^{-1} solves E^T r = e_i, and E^T has the edge vectors as rows
    inv_rows = [solve(e, [Fraction(int(i == j)) for j in range(n)]) for i in range(n)]
    m = np.array([[int(x) for x in row] for row in inv_rows], dtype=np.int64)
    return m, polytope.vertices[vertex_index]


def corner_distance(polytope: Polytope, vertex_index: int, x: Sequence) -> Fraction:
    """``ell_v(x)``: sum of the edge-basis coordinates of ``x - v``."""
    m, v = _corner_form(polytope, vertex_index)
    diff = [a - b for a, b in zip(as_vector(x), v)]
    return sum((dot([Fraction(int(c)) for c in row], diff) for row in m), Fraction(0))


def seshadri_fixed_point(polytope: Polytope, vertex_index: int) -> Fraction:
    """Seshadri constant of the torus-fixed point at a Delzant corner.

    The corner cut ``{ell_v >= c}`` keeps its combinatorics while ``c`` stays
    below ``ell_v`` at every other vertex; the minimum is attained on a
    neighbour, so this is the shortest lattice edge length at ``v``.
    """
    _corner_form(polytope, vertex_index)
    return min(corner_distance(polytope, vertex_index, w) for i, w in enumerate(polytope.vertices) if i != vertex_index)


class NormalConeConfig(Configuration):
    """Deformation to the normal cone of the fixed point at a smooth corner."""

    kind = "normal_cone"

    def __init__(self, polytope: Polytope, fixed_vertex: int, c):
        c = as_rat(c)
        if not 0 <= fixed_vertex < len(polytope.vertices):
            raise ConfigurationError(f"vertex index {fixed_vertex} out of range")
        if c <= 0:
            raise ConfigurationError("c must be positive")
        eps = seshadri_fixed_point(polytope, fixed_vertex)
        if c >= eps:
            raise ConfigurationError(f"c={c} must be below the Seshadri constant {eps}")
        if any(x.denominator != 1 for x in polytope.vertices[fixed_vertex]):
            raise ConfigurationError("the fixed corner must be a lattice point")
        self.polytope = polytope
        self.fixed_vertex = fixed_vertex
        self.c = c
        self._form, _ = _corner_form(polytope, fixed_vertex)

    def __repr__(self) -> str:
        return f"NormalConeConfig({self.polytope!r}, vertex={self.fixed_vertex}, c={self.c})"

    @property
    def divisibility(self) -> int:
        return self.c.denominator

    @cached_property
    def period(self) -> int:
        return math.lcm(self.c.denominator, self.polytope.period)

    def corner_values(self, k: int) -> np.ndarray:
        """``ell_v`` at every lattice point of ``kP`` (corner at ``k v``)."""
        pts = self.polytope.lattice_point_array(k)
        v = np.array([int(x) for x in self.polytope.vertices[self.fixed_vertex]], dtype=np.int64)
        return ((pts - k * v) @ self._form.T).sum(axis=1)

    def counting(self, lam: int, k: int) -> int:
        """``f_k(lam) = dim W``: sections of weight ``>= lam``."""
        k = self.check_level(k)
        ck = int(self.c * k)
        ell = self.corner_values(k)
        if lam <= -ck:
            return int(len(ell))
        if lam > 0:
            return 0
        return int(np.count_nonzero(ell >= lam + ck))

    def dims_by_weight(self, k: int) -> FiltrationTable:
        k = self.check_level(k)
        ck = int(self.c * k)
        ell = self.corner_values(k)
        f = {lam: int(np.count_nonzero(ell >= lam + ck)) for lam in range(-ck + 1, 1)}
        f[-ck] = int(len(ell))
        f[1] = 0
        entries = tuple((lam, f[lam] - f[lam + 1]) for lam in range(-ck, 1) if f[lam] - f[lam + 1] > 0)
        return FiltrationTable(k, entries)

    def weight(self, u: Sequence[int], k: int) -> int:
        k = self.check_level(k)
        x = tuple(Fraction(int(a), k) for a in u)
        if not self.polytope.contains(x):
            raise ConfigurationError(f"{tuple(u)} is not a lattice point of {k}P")
        return int(min(k * corner_distance(self.polytope, self.fixed_vertex, x) - self.c * k, 0))

    def lambda_bounds(self) -> tuple[Fraction, Fraction]:
        return -self.c, Fraction(0)

    def as_toric(self) -> ToricConfig:
        m, v = self._form, self.polytope.vertices[self.fixed_vertex]
        grad = tuple(Fraction(int(x)) for x in m.sum(axis=0))
        ell = Affine(grad, -dot(grad, v) - self.c)
        g = PLConcave((ell, Affine((0,) * self.dim, 0))).pruned(self.polytope)
        return ToricConfig(self.polytope, g)


# ---------------------------------------------------------------------------
# monomial ideals on projective space


def _chart(vec: Sequence[int], i: int) -> tuple[int, ...]:
    return tuple(int(a) for j, a in enumerate(vec) if j != i)


def _candidate_normals(points: Sequence[tuple[int, ...]], n: int) -> set[tuple[int, ...]]:
    """Nonnegative primitive normals containing every facet normal of ``conv + orthant``."""
    out = {tuple(int(i == j) for j in range(n)) for i in range(n)}
    for combo in itertools.combinations(sorted(set(points)), n):
        diffs = [[Fraction(a - b) for a, b in zip(p, combo[0])] for p in combo[1:]]
        ns = nullspace(diffs, n) if diffs else []
        if len(ns) != 1:
            continue
        nu = ns[0]
        if all(a <= 0 for a in nu):
            nu = tuple(-a for a in nu)
        if all(a >= 0 for a in nu):
            out.add(primitive_integer_vector(nu))
    return out


@dataclass(frozen=True)
class MonomialIdeal:
    """Monomial ideal sheaf on ``P^n`` given by homogeneous exponent vectors.

    Membership of a monomial in ``J^m`` is tested chart by chart against the
    Newton region ``m (conv(generators) + R_{>=0}^n)``; this agrees with true
    ideal membership when the powers are integrally closed, which
    :meth:`contains_bruteforce` checks directly.
    """

    generators: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        gens = tuple(sorted({tuple(int(a) for a in g) for g in self.generators}))
        if not gens:
            raise ConfigurationError("an ideal needs at least one generator")
        if len({len(g) for g in gens}) != 1 or any(a < 0 for g in gens for a in g):
            raise ConfigurationError("generators must be nonnegative vectors of equal length")
        object.__setattr__(self, "generators", gens)

    @property
    def nvars(self) -> int:
        return len(self.generators[0])

    def chart_generators(self, i: int) -> list[tuple[int, ...]]:
        return [_chart(g, i) for g in self.generators]

    def support(self, i: int, nu: Sequence[int]) -> int:
        """``min <nu, g>`` over chart-``i`` generators."""
        return min(sum(a * b for a, b in zip(nu, g)) for g in self.chart_generators(i))

    def normals(self, i: int) -> set[tuple[int, ...]]:
        return _candidate_normals(self.chart_generators(i), self.nvars - 1)

    def contains(self, monomial: Sequence[int], m: int = 1) -> bool:
        for i in range(self.nvars):
            a = _chart(monomial, i)
            for nu in self.normals(i):
                if sum(x * y for x, y in zip(nu, a)) < m * self.support(i, nu):
                    return False
        return True

    def contains_bruteforce(self, monomial: Sequence[int], m: int = 1) -> bool:
        """Membership in ``J^m`` by expanding products of ``m`` generators."""
        for i in range(self.nvars):
            a = _chart(monomial, i)
            gens = sorted(set(self.chart_generators(i)))
            found = False
            for combo in itertools.combinations_with_replacement(gens, m):
                s = [sum(col) for col in zip(*combo)] if combo else [0] * len(a)
                if all(x >= y for x, y in zip(a, s)):
                    found = True
                    break
            if not found:
                return False
        return True

    def chart_contains(self, other: "MonomialIdeal") -> bool:
        """``other <= self`` as ideal sheaves, by divisibility in every chart."""
        for i in range(self.nvars):
            mine = self.chart_generators(i)
            for g in other.chart_generators(i):
                if not any(all(x >= y for x, y in zip(g, h)) for h in mine):
                    return False
        return True


def homogeneous_monomials(nvars: int, degree: int) -> np.ndarray:
    """Exponent vectors of degree ``degree`` in ``nvars`` variables (lexicographic in the tail)."""
    if degree < 0:
        return np.zeros((0, nvars), dtype=np.int64)
    if nvars == 1 or degree == 0:
        return np.array([[degree] + [0] * (nvars - 1)], dtype=np.int64)
    tail = Polytope.standard_simplex(nvars - 1, degree).lattice_point_array(1)
    head = degree - tail.sum(axis=1, keepdims=True)
    return np.hstack([head, tail])


class FlagIdealConfig(Configuration):
    """Flag of monomial ideals ``J_0 <= J_1 <= ... <= J_{N-1}`` on ``(P^n, O(d))``.

    The level-``k`` sections are the degree-``dk`` monomials, identified with
    the lattice points of ``k d Delta_n`` by dropping the first exponent.
    """

    kind = "flag_ideal"

    def __init__(self, flag: Sequence, c, d: int):
        ideals = tuple(j if isinstance(j, MonomialIdeal) else MonomialIdeal(tuple(map(tuple, j))) for j in flag)
        if not ideals:
            raise ConfigurationError("the flag needs at least one ideal")
        nvars = {j.nvars for j in ideals}
        if len(nvars) != 1:
            raise ConfigurationError("ideals in the flag live on different projective spaces")
        self.n = nvars.pop() - 1
        if self.n not in (1, 2):
            raise ConfigurationError("flag configurations are implemented on P^1 and P^2 only")
        for lo, hi in zip(ideals, ideals[1:]):
            if not hi.chart_contains(lo):
                raise ConfigurationError("flag is not increasing: some J_i is not contained in J_{i+1}")
        self.c = as_rat(c)
        if self.c <= 0:
            raise ConfigurationError("c must be positive")
        if isinstance(d, bool) or int(d) != d or d < 1:
            raise ConfigurationError("degree d must be a positive integer")
        self.d = int(d)
        self.flag = ideals
        self.polytope = Polytope.standard_simplex(self.n, self.d)

    def __repr__(self) -> str:
        return f"FlagIdealConfig(N={self.N}, n={self.n}, c={self.c}, d={self.d})"

    @property
    def N(self) -> int:
        return len(self.flag)

    @property
    def divisibility(self) -> int:
        return self.c.denominator

    @cached_property
    def period(self) -> int:
        return self.c.denominator

    @cached_property
    def constraints(self) -> tuple[list[tuple[int, tuple[int, ...]]], np.ndarray]:
        """Chart constraints ``(chart, normal)`` and their supports ``h[j, r]``.

        Facet normals of a Minkowski sum of planar regions are among those of
        the summands, so one shared normal set per chart tests every product
        ``J_0^{i_0} ... J_{N-1}^{i_{N-1}}``.
        """
        rows, supports = [], []
        for i in range(self.n + 1):
            normals = set()
            for ideal in self.flag:
                normals |= ideal.normals(i)
            for nu in sorted(normals):
                h = [ideal.support(i, nu) for ideal in self.flag]
                if any(h):
                    rows.append((i, nu))
                    supports.append(h)
        return rows, np.array(supports, dtype=np.int64).T.reshape(self.N, len(rows))

    def _constraint_values(self, mono: np.ndarray) -> np.ndarray:
        rows, _ = self.constraints
        out = np.empty((len(mono), len(rows)), dtype=np.int64)
        for r, (i, nu) in enumerate(rows):
            chart = np.delete(mono, i, axis=1)
            out[:, r] = chart @ np.array(nu, dtype=np.int64)
        return out

    def monomials(self, k: int) -> np.ndarray:
        return homogeneous_monomials(self.n + 1, self.d * k)

    def member_of_product(self, mono: np.ndarray, exponents: Sequence[int]) -> np.ndarray:
        """Mask of monomials lying in ``J_0^{e_0} ... J_{N-1}^{e_{N-1}}``."""
        _, h = self.constraints
        vals = self._constraint_values(np.atleast_2d(mono))
        need = np.asarray(exponents, dtype=np.int64) @ h
        return np.all(vals >= need, axis=1)

    def weights_of(self, mono: np.ndarray, k: int) -> np.ndarray:
        """Weights of degree-``dk`` monomials.

        The weight is the largest ``sum_j (N-j) i_j - N ck`` over integer
        ``i`` with ``sum i_j <= ck`` and the monomial in ``prod J_j^{i_j}``.
        Prefixes ``i_0..i_{N-2}`` are enumerated; the last exponent is
        maximised in closed form.
        """
        k = self.check_level(k)
        ck = int(self.c * k)
        N = self.N
        _, h = self.constraints
        vals = self._constraint_values(np.atleast_2d(mono))
        best = np.full(len(vals), -N * ck, dtype=np.int64)
        last = h[N - 1]
        pos = last > 0
        for prefix in itertools.product(range(ck + 1), repeat=N - 1):
            used = sum(prefix)
            if used > ck:
                continue
            rest = vals - np.asarray(prefix, dtype=np.int64) @ h[: N - 1] if N > 1 else vals
            feasible = np.all(rest >= 0, axis=1)
            if not feasible.any():
                continue
            top = np.full(len(vals), ck - used, dtype=np.int64)
            if pos.any():
                top = np.minimum(top, np.min(rest[:, pos] // last[pos], axis=1))
            score = sum((N - j) * p for j, p in enumerate(prefix)) + top - N * ck
            best = np.where(feasible, np.maximum(best, score), best)
        return best

    def dims_by_weight(self, k: int) -> FiltrationTable:
        k = self.check_level(k)
        return FiltrationTable.from_weights(k, self.weights_of(self.monomials(k), k))

    def weight(self, monomial: Sequence[int], k: int) -> int:
        k = self.check_level(k)
        mono = np.asarray(monomial, dtype=np.int64).reshape(1, -1)
        if mono.shape[1] != self.n + 1 or mono.sum() != self.d * k or (mono < 0).any():
            raise ConfigurationError(f"{tuple(monomial)} is not a monomial of degree {self.d * k}")
        return int(self.weights_of(mono, k)[0])

    @cached_property
    def _limit(self) -> ToricConfig:
        # LP duality: the limit weight at x is max sum (N-j) y_j - Nc over
        # y >= 0, sum y <= c, x in sum y_j NP(J_j); the dual feasible set does
        # not depend on x, so the value is a minimum over its vertices.
        rows, h = self.constraints
        R, N = len(rows), self.N
        hs = []
        for r in range(R + 1):
            hs.append(Halfspace(tuple(Fraction(-int(q == r)) for q in range(R + 1)), 0))
        for j in range(N):
            hs.append(Halfspace(tuple(Fraction(-int(h[j, r])) for r in range(R)) + (Fraction(-1),), -(N - j)))
        verts = _enumerate_vertices(hs, R + 1)
        # homogeneous exponent of x as affine forms: (d - sum x, x_1, ..., x_n)
        coords = [((Fraction(-1),) * self.n, Fraction(self.d))]
        coords += [(tuple(Fraction(int(a == b)) for b in range(self.n)), Fraction(0)) for a in range(self.n)]
        forms = []
        for i, nu in rows:
            kept = [coords[j] for j in range(self.n + 1) if j != i]
            grad = tuple(sum((w * cg[0][q] for w, cg in zip(nu, kept)), Fraction(0)) for q in range(self.n))
            forms.append((grad, sum((w * cg[1] for w, cg in zip(nu, kept)), Fraction(0))))
        pieces = set()
        for y in verts:
            grad = tuple(sum((y[r] * forms[r][0][q] for r in range(R)), Fraction(0)) for q in range(self.n))
            const = sum((y[r] * forms[r][1] for r in range(R)), Fraction(0)) + self.c * y[R] - N * self.c
            pieces.add((grad, const))
        g = PLConcave(tuple(Affine(a, b) for a, b in sorted(pieces))).pruned(self.polytope)
        return ToricConfig(self.polytope, g)

    def as_toric(self) -> ToricConfig:
        return self._limit

    def lambda_bounds(self) -> tuple[Fraction, Fraction]:
        return self._limit.lambda_bounds()


# ---------------------------------------------------------------------------
# module-level operations


def weight(cfg: Configuration, u: Sequence[int], k: int) -> int:
    return cfg.weight(u, k)


def dims_by_weight(cfg: Configuration, k: int) -> FiltrationTable:
    return cfg.dims_by_weight(k)


def lambda_bounds(cfg: Configuration) -> tuple[Fraction, Fraction]:
    return cfg.lambda_bounds()


def flag_W_dim(cfg: FlagIdealConfig, lam, k: int, mode: str = "union") -> int:
    """Dimension of ``W_{lam,k}``, the sections of weight ``>= ceil(lam k)``.

    ``mode="union"`` counts monomials in some ``prod J_j^{i_j}`` with
    ``sum (N-j) i_j >= ceil(lam k) + N ck``. ``mode="literal"`` instead uses
    the single product ``J_{N-1}^{ck} ... J_{N-j+1}^{ck} J_{N-j}^{e}`` with
    ``e = (ceil(lam k) + (N - j(j-1)/2) ck)/j`` on the band
    ``-(N - j(j-1)/2)c < lam <= -(N - j(j+1)/2)c``; the two agree for
    ``N = 1``.
    """
    lam = as_rat(lam)
    k = cfg.check_level(k)
    ck = int(cfg.c * k)
    N = cfg.N
    target = math.ceil(lam * k)
    mono = cfg.monomials(k)
    if lam <= -N * cfg.c:
        return int(len(mono))
    if mode == "union":
        return int(np.count_nonzero(cfg.weights_of(mono, k) >= target))
    if mode != "literal":
        raise ValueError(f"unknown mode {mode!r}")
    if lam > Fraction(N * (N - 1), 2) * cfg.c:
        return 0
    for j in range(1, N + 1):
        lo = -(N - Fraction(j * (j - 1), 2)) * cfg.c
        hi = -(N - Fraction(j * (j + 1), 2)) * cfg.c
        if lo < lam <= hi:
            e = (target + (N - Fraction(j * (j - 1), 2)) * ck) / j
            if e.denominator != 1 or e < 0:
                raise DivisibilityError(f"exponent {e} is not a nonnegative integer at k={k}")
            exps = [0] * N
            for q in range(N - j + 1, N):
                exps[q] = ck
            exps[N - j] += int(e)
            return int(np.count_nonzero(cfg.member_of_product(mono, exps)))
    raise AssertionError("bands cover (-Nc, N(N-1)c/2]")


def check_multiplicativity(cfg: ToricConfig, k: int, k2: int, sample_count: int | None = None, seed: int = 0) -> bool:
    """Superadditivity of weights up to the rounding slack (1 for ceil, 0 for floor).

    Exhaustive when ``sample_count`` is ``None``; otherwise random pairs.
    """
    slack = 1 if cfg.rounding == "ceil" else 0
    a = cfg.polytope.lattice_point_array(k)
    b = cfg.polytope.lattice_point_array(k2)
    wa, wb = cfg.weights_at(a, k), cfg.weights_at(b, k2)
    if sample_count is None:
        ia, ib = np.meshgrid(np.arange(len(a)), np.arange(len(b)), indexing="ij")
        ia, ib = ia.ravel(), ib.ravel()
    else:
        rng = np.random.default_rng(seed)
        ia = rng.integers(len(a), size=sample_count)
        ib = rng.integers(len(b), size=sample_count)
    wsum = cfg.weights_at(a[ia] + b[ib], k + k2)
    return bool(np.all(wsum >= wa[ia] + wb[ib] - slack))


def ideal_power_mismatches(ideal: MonomialIdeal, m: int, monomials: np.ndarray) -> list[tuple[int, ...]]:
    """Monomials where Newton-region and generator-product membership in ``J^m`` differ."""
    bad = []
    for mono in monomials:
        mono = tuple(int(x) for x in mono)
        if ideal.contains(mono, m) != ideal.contains_bruteforce(mono, m):
            bad.append(mono)
    return bad
