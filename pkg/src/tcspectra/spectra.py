"""Spectral measures, their Duistermaat-Heckman limit and the derived invariants.

Level-``k`` data come from the weight histograms of a configuration. The
limit measure of a toric configuration is assembled exactly from volumes of
superlevel regions, and ``b0`` is cross-checked against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .configurations import Configuration, FiltrationTable, NormalConeConfig, ToricConfig, corner_distance
from .geometry import Halfspace, integrate_pl_power, superlevel_region
from .rational import as_rat, interpolate_polynomial, poly_eval

INF = math.inf


class QuasiPolynomialError(ArithmeticError):
    """Samples are not polynomial on the arithmetic progression tried."""

    def __init__(self, message: str, residual: Fraction):
        super().__init__(f"{message} (residual {residual})")
        self.residual = residual


# ---------------------------------------------------------------------------
# finite level


@dataclass(frozen=True)
class SpectralMeasure:
    """``(n!/k^n) sum_lambda dim V_lambda delta_{lambda/k}``."""

    level: int
    dim: int
    atoms: tuple[tuple[Fraction, Fraction], ...]

    @property
    def total_mass(self) -> Fraction:
        return sum((m for _, m in self.atoms), Fraction(0))

    def survival(self, x) -> Fraction:
        """Mass of ``[x, inf)``; left-continuous in ``x``."""
        x = as_rat(x) if not isinstance(x, Fraction) else x
        return sum((m for p, m in self.atoms if p >= x), Fraction(0))

    def moment(self, p: int, center=0, absolute: bool = False) -> Fraction:
        center = as_rat(center)
        if absolute:
            return sum((m * abs(pos - center) ** p for pos, m in self.atoms), Fraction(0))
        return sum((m * (pos - center) ** p for pos, m in self.atoms), Fraction(0))


def spectral_measure(cfg: Configuration, k: int) -> SpectralMeasure:
    table = cfg.dims_by_weight(k)
    n = cfg.dim
    scale = Fraction(math.factorial(n), table.level**n)
    atoms = tuple((Fraction(w, table.level), scale * d) for w, d in table.entries)
    return SpectralMeasure(table.level, n, atoms)


def total_weight(cfg: Configuration, k: int) -> int:
    return cfg.total_weight(k)


def hilbert_dim(cfg: Configuration, k: int) -> int:
    return cfg.hilbert_dim(k)


# ---------------------------------------------------------------------------
# invariants


@dataclass(frozen=True)
class InvariantSet:
    a0: Fraction
    a1: Fraction
    b0: Fraction
    b1: Fraction
    period: int

    @property
    def F0(self) -> Fraction:
        return self.b0 / self.a0

    @property
    def F1(self) -> Fraction:
        return (self.a0 * self.b1 - self.a1 * self.b0) / self.a0**2

    def as_dict(self) -> dict[str, Fraction]:
        return {"a0": self.a0, "a1": self.a1, "b0": self.b0, "b1": self.b1, "F0": self.F0, "F1": self.F1}


def _fit_on_progression(cfg: Configuration, m: int) -> InvariantSet:
    n = cfg.dim
    ks = [m * j for j in range(1, n + 4)]
    tables = [cfg.dims_by_weight(k) for k in ks]
    dims = [t.total_dim for t in tables]
    weights = [t.total_weight for t in tables]
    nc, rn = interpolate_polynomial(ks, dims, n)
    wc, rw = interpolate_polynomial(ks, weights, n + 1)
    if rn or rw:
        raise QuasiPolynomialError(f"level data not polynomial on multiples of {m}", max(rn, rw))
    return InvariantSet(nc[n], nc[n - 1], wc[n + 1], wc[n], m)


def fit_invariants(cfg: Configuration, period: int | None = None) -> InvariantSet:
    """``a0, a1, b0, b1`` from exact interpolation of ``N_k`` and ``w(k)``.

    Samples ``k = m, 2m, ..., (n+3)m`` and keeps one spare sample of each
    series as a consistency check. Without an explicit ``period`` the
    configuration's own period is tried first, then ``2m`` and ``m^2``;
    ceiling rounding with fractional slopes can need the longer progressions.
    """
    if period is not None:
        return _fit_on_progression(cfg, int(period))
    m = cfg.period
    last = None
    for cand in dict.fromkeys([m, 2 * m, m * m]):
        try:
            return _fit_on_progression(cfg, cand)
        except QuasiPolynomialError as exc:
            last = exc
    raise last


# ---------------------------------------------------------------------------
# limit measure


@dataclass(frozen=True)
class DHMeasure:
    """Limit measure ``-dV`` with ``V(lam) = n! vol{g >= lam}``.

    ``pieces[j]`` holds the coefficients (constant first) of ``V`` on
    ``(breakpoints[j], breakpoints[j+1]]``; ``V`` equals ``full_mass`` at and
    below the first breakpoint and vanishes after the last.
    """

    dim: int
    breakpoints: tuple[Fraction, ...]
    pieces: tuple[tuple[Fraction, ...], ...]
    full_mass: Fraction

    @property
    def support(self) -> tuple[Fraction, Fraction]:
        return self.breakpoints[0], self.breakpoints[-1]

    def survival(self, lam) -> Fraction:
        lam = as_rat(lam) if not isinstance(lam, Fraction) else lam
        bp = self.breakpoints
        if lam <= bp[0]:
            return self.full_mass
        if lam > bp[-1]:
            return Fraction(0)
        for j in range(len(self.pieces)):
            if bp[j] < lam <= bp[j + 1]:
                return poly_eval(self.pieces[j], lam)
        raise AssertionError("breakpoints cover the support")

    def right_limit(self, lam) -> Fraction:
        """``V(lam+)``."""
        lam = as_rat(lam) if not isinstance(lam, Fraction) else lam
        bp = self.breakpoints
        if lam < bp[0]:
            return self.full_mass
        if lam >= bp[-1]:
            return Fraction(0)
        for j in range(len(self.pieces)):
            if bp[j] <= lam < bp[j + 1]:
                return poly_eval(self.pieces[j], lam)
        raise AssertionError("breakpoints cover the support")

    def piece_after(self, lam: Fraction) -> tuple[Fraction, ...]:
        """Coefficients of ``V`` just to the right of ``lam``."""
        bp = self.breakpoints
        if lam < bp[0]:
            return (self.full_mass,)
        if lam >= bp[-1]:
            return (Fraction(0),)
        j = max(i for i in range(len(self.pieces)) if bp[i] <= lam)
        return self.pieces[j]

    @property
    def atoms(self) -> tuple[tuple[Fraction, Fraction], ...]:
        out = []
        for b in self.breakpoints:
            jump = self.survival(b) - self.right_limit(b)
            if jump:
                out.append((b, jump))
        return tuple(out)

    @property
    def total_mass(self) -> Fraction:
        return self.full_mass

    def moment(self, p: int) -> Fraction:
        """``-int lam^p dV``."""
        total = sum((b**p * m for b, m in self.atoms), Fraction(0))
        for j, coeffs in enumerate(self.pieces):
            a, b = self.breakpoints[j], self.breakpoints[j + 1]
            # -V' lam^p integrated term by term
            for i, c in enumerate(coeffs[1:], start=1):
                e = i - 1 + p + 1
                total -= i * c * (b**e - a**e) / e
        return total

    def density_pieces(self) -> list[tuple[Fraction, Fraction, tuple[Fraction, ...]]]:
        """``(a, b, coeffs of -V')`` for each absolutely continuous piece."""
        out = []
        for j, coeffs in enumerate(self.pieces):
            der = tuple(-i * c for i, c in enumerate(coeffs[1:], start=1)) or (Fraction(0),)
            out.append((self.breakpoints[j], self.breakpoints[j + 1], der))
        return out


def dh_measure(cfg: Configuration) -> DHMeasure:
    """Exact piecewise-polynomial survival function of the limit measure."""
    toric = cfg.as_toric()
    P, g = toric.polytope, toric.g
    n = P.dim
    nfact = math.factorial(n)

    def V(lam: Fraction) -> Fraction:
        region = superlevel_region(g, P, lam)
        return Fraction(0) if region is None else nfact * region.volume()

    bps = tuple(g.critical_values(P))
    pieces = []
    for a, b in zip(bps, bps[1:]):
        xs = [a + (b - a) * Fraction(i, n + 3) for i in range(1, n + 3)]
        coeffs, resid = interpolate_polynomial(xs, [V(x) for x in xs], n)
        if resid:
            raise QuasiPolynomialError("slice volume is not polynomial between critical values", resid)
        pieces.append(tuple(coeffs))
    return DHMeasure(n, bps, tuple(pieces), nfact * P.volume())


def b0_from_dh(dh: DHMeasure) -> Fraction:
    """``b0 = -(1/n!) int lam dV``."""
    return dh.moment(1) / math.factorial(dh.dim)


@dataclass(frozen=True)
class Distance:
    kolmogorov: Fraction
    l1: float


def _poly_abs_integral(coeffs: Sequence[Fraction], a: Fraction, b: Fraction) -> float:
    c = np.array([float(x) for x in coeffs])
    poly = np.polynomial.Polynomial(c)
    cuts = [float(a), float(b)]
    if len(c) > 1 and np.any(c[1:] != 0):
        for r in poly.roots():
            if abs(r.imag) < 1e-14 and float(a) < r.real < float(b):
                cuts.append(r.real)
    cuts.sort()
    anti = poly.integ()
    return float(sum(abs(anti(y) - anti(x)) for x, y in zip(cuts, cuts[1:])))


def cdf_distance(mu: SpectralMeasure, nu: DHMeasure) -> Distance:
    """Sup and L1 distances between the two survival functions.

    Both survival functions are left-continuous; on each gap between
    consecutive atoms or breakpoints the spectral side is constant and the
    limit side monotone, so the supremum is attained at an endpoint value or
    a right limit. The L1 distance is taken over the convex hull of both
    supports, since the total masses differ at finite level.
    """
    pts = sorted(set(p for p, _ in mu.atoms) | set(nu.breakpoints))
    sup = abs(mu.total_mass - nu.total_mass)
    l1 = 0.0
    for x in pts:
        sup = max(sup, abs(mu.survival(x) - nu.survival(x)))
    for a, b in zip(pts, pts[1:]):
        s = mu.survival(b)
        sup = max(sup, abs(s - nu.right_limit(a)))
        diff_coeffs = nu.piece_after(a)
        diff = list(diff_coeffs)
        diff[0] -= s
        l1 += _poly_abs_integral(diff, a, b)
    return Distance(sup, l1)


# ---------------------------------------------------------------------------
# p-norms


@dataclass(frozen=True)
class NormSet:
    p: float
    Qp: Fraction | None
    Np: Fraction | None
    norm_pow: Fraction
    """``||T||_p^p`` for finite ``p``; ``||T||_inf`` itself for ``p = inf``."""

    @property
    def norm(self) -> float:
        if self.p == INF:
            return float(self.norm_pow)
        return float(self.norm_pow) ** (1.0 / self.p)


def _check_p(p) -> float | int:
    if p == INF or p == "inf":
        return INF
    if isinstance(p, bool) or int(p) != p:
        raise ValueError(f"p must be a positive integer or infinity, got {p!r}")
    if p < 1:
        raise ValueError("p must be at least 1 (p = 0 is the Hilbert dimension)")
    return int(p)


def limit_F0(cfg: Configuration) -> Fraction:
    toric = cfg.as_toric()
    return integrate_pl_power(toric.g, toric.polytope, 1) / toric.polytope.volume()


def norms(cfg: Configuration, p) -> NormSet:
    """Exact ``Q_p``, ``N_p`` and ``||T||_p`` from integrals over the polytope."""
    p = _check_p(p)
    toric = cfg.as_toric()
    P, g = toric.polytope, toric.g
    F0 = limit_F0(cfg)
    if p == INF:
        worst = max(abs(v - F0) for v in g.critical_values(P))
        return NormSet(INF, None, None, worst)
    Q = integrate_pl_power(g, P, p)
    Np = integrate_pl_power(g, P, p, shift=F0)
    T = integrate_pl_power(g, P, p, shift=F0, absolute=True)
    return NormSet(p, Q, Np, T)


def finite_level_norms(cfg: Configuration, p, k: int, center=None, table: FiltrationTable | None = None) -> NormSet:
    """Level-``k`` sums ``(1/k^n) sum (lam/k - c)^p dim V_lam``.

    ``center`` defaults to the exact limit ``F0`` so the sums converge to
    the values returned by :func:`norms`. ``table`` reuses a weight table
    already computed at level ``k``.
    """
    p = _check_p(p)
    if table is None or table.level != k:
        table = cfg.dims_by_weight(k)
    k, n = table.level, cfg.dim
    F0 = limit_F0(cfg) if center is None else as_rat(center)
    scale = Fraction(1, k**n)
    if p == INF:
        return NormSet(INF, None, None, max(abs(Fraction(w, k) - F0) for w, _ in table.entries))
    Q = scale * sum((Fraction(w, k) ** p * d for w, d in table.entries), Fraction(0))
    Np = scale * sum(((Fraction(w, k) - F0) ** p * d for w, d in table.entries), Fraction(0))
    T = scale * sum((abs(Fraction(w, k) - F0) ** p * d for w, d in table.entries), Fraction(0))
    return NormSet(p, Q, Np, T)


def check_N2_identity(cfg: Configuration, b0=None) -> bool:
    """``N_2 == Q_2 - b0^2/a0`` exactly; ``b0`` defaults to the integral route."""
    toric = cfg.as_toric()
    a0 = toric.polytope.volume()
    if b0 is None:
        b0 = integrate_pl_power(toric.g, toric.polytope, 1)
    ns = norms(cfg, 2)
    return ns.Np == ns.Qp - as_rat(b0) ** 2 / a0


@dataclass(frozen=True)
class StabilityRatio:
    """``-F1 / ||T||_2``; ``ratio`` is ``None`` when the norm vanishes."""

    minus_F1: Fraction
    norm_sq: Fraction
    ratio: float | None
    diagnosis: str | None

    @property
    def ratio_squared(self) -> Fraction | None:
        if self.norm_sq == 0:
            return None
        return self.minus_F1**2 / self.norm_sq


def strong_stability_ratio(cfg: Configuration, invariants: InvariantSet | None = None) -> StabilityRatio:
    inv = invariants if invariants is not None else fit_invariants(cfg)
    nsq = norms(cfg, 2).norm_pow
    if nsq == 0:
        return StabilityRatio(-inv.F1, nsq, None, "norm vanishes: the geodesic ray is phi + F0 t")
    return StabilityRatio(-inv.F1, nsq, float(-inv.F1) / math.sqrt(nsq), None)


def shift_config(cfg: ToricConfig, kappa) -> ToricConfig:
    return cfg.shifted(kappa)


def normal_cone_b0_from_blowup(cfg: NormalConeConfig) -> Fraction:
    """``b0`` of a normal-cone configuration through blow-up volumes.

    ``n! b0 = -c L^n + int_{-c}^0 (mu*L - (lam + c) E)^n dlam`` with the
    intersection number read as ``n!`` times the volume of the corner-cut
    polytope ``{ell_v >= lam + c}``.
    """
    P, c = cfg.polytope, cfg.c
    n = P.dim
    nfact = math.factorial(n)
    v = cfg.fixed_vertex
    grad_rows = [corner_distance(P, v, tuple(Fraction(int(i == j)) for j in range(n)) ) - corner_distance(P, v, (Fraction(0),) * n) for i in range(n)]
    base = corner_distance(P, v, (Fraction(0),) * n)

    def cut_volume(s: Fraction) -> Fraction:
        cut = P.intersect([Halfspace(tuple(-a for a in grad_rows), base - s)])
        return Fraction(0) if cut is None else nfact * cut.volume()

    xs = [-c + c * Fraction(i, n + 3) for i in range(1, n + 3)]
    coeffs, resid = interpolate_polynomial(xs, [cut_volume(x + c) for x in xs], n)
    if resid:
        raise QuasiPolynomialError("corner-cut volume is not polynomial", resid)
    integral = sum((a * (Fraction(0) ** (i + 1) - (-c) ** (i + 1)) / (i + 1) for i, a in enumerate(coeffs)), Fraction(0))
    return (-c * nfact * P.volume() + integral) / nfact
