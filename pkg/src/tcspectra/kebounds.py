"""Lower bounds on the distance to Kahler-Einstein metrics on toric Fano models.

For a metric with symplectic potential ``u`` on a reflexive polytope ``P``
(interior lattice point at the origin), the ratio ``n! e^{-phi} / MA(phi)``
pulled back to ``P`` is ``c exp(u - <x, grad u>) det D^2 u``; ``c`` makes its
mean over ``P`` equal to one. The bound compares ``||ratio - 1||_q`` with
``F1 / ||T||_p`` for conjugate exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .configurations import Configuration, ToricConfig
from .geometry import Polytope
from .potentials import GuilleminPotential, Potential, perturbed_family
from .spectra import InvariantSet, fit_invariants, limit_F0, norms

INF = math.inf


# ---------------------------------------------------------------------------
# models


def is_reflexive(polytope: Polytope) -> bool:
    """Every facet at lattice distance one from the origin."""
    return all(h.offset == 1 for h in polytope.halfspaces)


@dataclass
class FanoModel:
    name: str
    polytope: Polytope
    metrics: list[Potential] = field(default_factory=list)

    def __post_init__(self):
        if not is_reflexive(self.polytope):
            raise ValueError(f"{self.name}: polytope is not reflexive")
        if not self.metrics:
            self.metrics = [GuilleminPotential(self.polytope)]

    def with_perturbations(self, count: int, scale: float = 0.1, seed: int = 0) -> "FanoModel":
        return FanoModel(self.name, self.polytope, [GuilleminPotential(self.polytope)] + perturbed_family(self.polytope, count, scale, seed))


def fano_model(name: str, perturbations: int = 0, seed: int = 0) -> FanoModel:
    """``"P1"``, ``"P2"`` or ``"blowup"`` (anticanonical one-point blow-up of the plane)."""
    if name == "P1":
        P = Polytope.interval(-1, 1)
    elif name == "P2":
        P = Polytope.from_vertices([(-1, -1), (2, -1), (-1, 2)])
    elif name == "blowup":
        P = Polytope.from_vertices([(-1, 0), (0, -1), (2, -1), (-1, 2)])
    else:
        raise ValueError(f"unknown model {name!r}")
    model = FanoModel(name, P)
    return model.with_perturbations(perturbations, seed=seed) if perturbations else model


def model_for_dimension(n: int) -> str:
    return {1: "P1", 2: "P2"}[n]


# ---------------------------------------------------------------------------
# quadrature


def quadrature(polytope: Polytope, order: int = 8, subdivisions: int = 16, breakpoints=()) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule on ``P``: points ``(M, n)`` and weights ``(M,)``.

    Intervals are split at ``breakpoints`` and then uniformly; triangles of
    the exact triangulation are split into ``subdivisions^2`` pieces, each
    integrated by the collapsed (Duffy) tensor Gauss rule.
    """
    gx, gw = np.polynomial.legendre.leggauss(order)
    gx = 0.5 * (gx + 1)
    gw = 0.5 * gw
    if polytope.dim == 1:
        a, b = float(polytope.vertices[0][0]), float(polytope.vertices[-1][0])
        cuts = sorted({a, b} | {float(c) for c in breakpoints if a < c < b})
        edges = np.concatenate([np.linspace(lo, hi, subdivisions + 1)[:-1] for lo, hi in zip(cuts, cuts[1:])] + [[b]])
        lo, hi = edges[:-1], edges[1:]
        pts = (lo[:, None] + (hi - lo)[:, None] * gx[None, :]).ravel()
        wts = ((hi - lo)[:, None] * gw[None, :]).ravel()
        return pts[:, None], wts
    if polytope.dim != 2:
        raise ValueError("quadrature is implemented for n <= 2")
    # reference rule on the unit triangle
    s, t = np.meshgrid(gx, gx, indexing="ij")
    ws, wt = np.meshgrid(gw, gw, indexing="ij")
    ref = np.stack([s.ravel(), (t * (1 - s)).ravel()], axis=1)
    refw = (ws * wt * (1 - s)).ravel()
    m = subdivisions
    # barycentric sub-triangles of a split of the unit triangle into m^2 pieces
    subs = []
    for i in range(m):
        for j in range(m - i):
            subs.append(((i, j), (i + 1, j), (i, j + 1)))
            if i + j < m - 1:
                subs.append(((i + 1, j), (i + 1, j + 1), (i, j + 1)))
    pts, wts = [], []
    for simplex in polytope.triangulate():
        v = np.array([[float(c) for c in p] for p in simplex])
        for tri in subs:
            corners = np.array([v[0] + (v[1] - v[0]) * a / m + (v[2] - v[0]) * b / m for a, b in tri])
            e1, e2 = corners[1] - corners[0], corners[2] - corners[0]
            jac = abs(e1[0] * e2[1] - e1[1] * e2[0])
            pts.append(corners[0] + ref[:, :1] * e1 + ref[:, 1:] * e2)
            wts.append(refw * jac)
    return np.concatenate(pts), np.concatenate(wts)


# ---------------------------------------------------------------------------
# density ratio


@dataclass(frozen=True)
class DensityRatio:
    points: np.ndarray
    weights: np.ndarray
    ratio: np.ndarray
    normalization: float

    def norm(self, q: float, values: np.ndarray | None = None) -> float:
        f = np.abs(self.ratio - 1) if values is None else np.abs(values)
        if q == INF:
            return float(f.max())
        return float(np.sum(self.weights * f**q) ** (1.0 / q))


def density_ratio(model: FanoModel, metric_index: int = 0, order: int = 8, subdivisions: int = 16) -> DensityRatio:
    """Normalised ``n! e^{-phi} / MA(phi)`` at the quadrature nodes of ``P``."""
    u = model.metrics[metric_index]
    pts, wts = quadrature(model.polytope, order, subdivisions)
    hess = u.hessian(pts)
    det = np.linalg.det(hess)
    if np.any(det <= 0):
        raise ValueError("metric is not strictly convex at some quadrature node")
    legendre_value = np.einsum("ma,ma->m", pts, u.gradient(pts)) - u.value(pts)
    raw = np.exp(-legendre_value) * det
    vol = float(model.polytope.volume())
    c = vol / float(np.sum(wts * raw))
    return DensityRatio(pts, wts, c * raw, c)


# ---------------------------------------------------------------------------
# transport of configurations onto a model polytope


def _similarity(src: Polytope, dst: Polytope) -> tuple[Fraction, tuple[Fraction, ...]] | None:
    """``(r, v)`` with ``dst = r src + v``, if such a positive rational ``r`` exists."""
    n = src.dim
    ratio = dst.volume() / src.volume()
    num = round(ratio.numerator ** (1 / n))
    den = round(ratio.denominator ** (1 / n))
    candidates = [Fraction(a, b) for a in range(max(num - 1, 1), num + 2) for b in range(max(den - 1, 1), den + 2)]
    for r in candidates:
        if r**n != ratio:
            continue
        for w in dst.vertices:
            v = tuple(a - r * b for a, b in zip(w, src.vertices[0]))
            image = sorted(tuple(r * a + s for a, s in zip(p, v)) for p in src.vertices)
            if image == list(dst.vertices):
                return r, v
    return None


def transport_config(cfg: Configuration, polytope: Polytope) -> tuple[ToricConfig, Fraction, tuple[Fraction, ...]]:
    """Move the limit function to ``polytope = r P + v`` via ``x -> r g((x - v)/r)``.

    ``F1`` is unchanged by this rescaling of the polarisation; ``F0`` scales by
    ``r`` and the norms pick up the Jacobian.
    """
    toric = cfg.as_toric()
    sim = _similarity(toric.polytope, polytope)
    if sim is None:
        raise ValueError("configuration polytope is not a rescaled copy of the model polytope")
    r, v = sim
    return ToricConfig(polytope, toric.g.transported(r, v)), r, v


def conjugate_exponent(p) -> float:
    if p == INF:
        return 1.0
    if p == 1:
        return INF
    return p / (p - 1)


@dataclass(frozen=True)
class BoundReport:
    model: str
    metric: int
    p: float
    lhs: float
    rhs: float
    F1: Fraction
    norm_T: float
    holds: bool
    pairing: float
    diagnosis: str | None = None

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def verify_fano_bound(model: FanoModel, cfg: Configuration, p, metric_index: int = 0, invariants: InvariantSet | None = None, tol: float = 1e-9, order: int = 8, subdivisions: int = 16, ratio: DensityRatio | None = None) -> BoundReport:
    """Check ``||ratio - 1||_q >= F1 / ||T||_p`` on one metric of ``model``.

    ``F1`` is taken from the configuration itself (it does not change when
    the polarisation is rescaled onto the model); ``||T||_p`` is the exact norm
    of the transported limit function. ``pairing`` is the Hölder integrand
    ``int (g - F0)(ratio - 1) dx`` for diagnostics. A precomputed ``ratio``
    for the same metric skips the quadrature.
    """
    p = INF if p in ("inf", INF) else int(p)
    inv = invariants if invariants is not None else fit_invariants(cfg)
    moved, _, _ = transport_config(cfg, model.polytope)
    ns = norms(moved, p)
    if ns.norm_pow == 0:
        return BoundReport(model.name, metric_index, p, 0.0, 0.0, inv.F1, 0.0, True, 0.0, "norm vanishes: the geodesic ray is phi + F0 t; bound skipped")
    dr = ratio if ratio is not None else density_ratio(model, metric_index, order, subdivisions)
    q = conjugate_exponent(p)
    lhs = dr.norm(q)
    rhs = float(inv.F1) / ns.norm
    centred = moved.g.evaluate_float(dr.points) - float(limit_F0(moved))
    pairing = float(np.sum(dr.weights * centred * (dr.ratio - 1)))
    return BoundReport(model.name, metric_index, p, lhs, rhs, inv.F1, ns.norm, lhs >= rhs - tol, pairing)


# ---------------------------------------------------------------------------
# scalar curvature on the line


def scalar_curvature_1d(u: Potential, x: np.ndarray) -> np.ndarray:
    """``S = -(1/u'')''``, written as ``(u'' u'''' - 2 u'''^2)/u''^3``."""
    u2, u3, u4 = u.derivatives_1d(np.asarray(x).reshape(-1, 1))
    if np.any(u2 <= 0):
        raise ValueError("degenerate metric: u'' vanishes")
    return (u2 * u4 - 2 * u3**2) / u2**3


@dataclass(frozen=True)
class CalabiReport:
    p: float
    lhs: float
    rhs: Fraction
    holds: bool
    holder_lhs: float
    holder_rhs: float
    holder_holds: bool
    convexity_margin: float


def calabi_bound_1d(u: Potential, cfg: Configuration, p, invariants: InvariantSet | None = None, tol: float = 1e-9, order: int = 10, subdivisions: int = 64) -> CalabiReport:
    """``||T||_p ||S - S_mean||_q >= F1`` on a one-dimensional model.

    ``u`` must live on the configuration's polytope. Also checks the Hölder
    step ``|int (g - F0)(S - S_mean)| <= ||g - F0||_p ||S - S_mean||_q`` and
    reports ``int (g - F0)(S - S_mean) - F1`` as an empirical margin.
    """
    toric = cfg.as_toric()
    P = toric.polytope
    if P.dim != 1:
        raise ValueError("the scalar-curvature bound is one-dimensional")
    if u.polytope != P:
        raise ValueError("potential and configuration live on different polytopes")
    p = INF if p in ("inf", INF) else int(p)
    inv = invariants if invariants is not None else fit_invariants(cfg)
    pts, wts = quadrature(P, order, subdivisions, breakpoints=[v[0] for _, c in toric.g.cell_regions(P) for v in c.vertices])
    S = scalar_curvature_1d(u, pts)
    vol = float(P.volume())
    S_mean = float(np.sum(wts * S)) / vol
    dev = S - S_mean
    q = conjugate_exponent(p)
    dev_q = float(np.max(np.abs(dev))) if q == INF else float(np.sum(wts * np.abs(dev) ** q) ** (1 / q))
    ns = norms(cfg, p)
    lhs = ns.norm * dev_q
    centred = toric.g.evaluate_float(pts) - float(limit_F0(cfg))
    gp = float(np.max(np.abs(centred))) if p == INF else float(np.sum(wts * np.abs(centred) ** p) ** (1 / p))
    pairing = float(np.sum(wts * centred * dev))
    return CalabiReport(p, lhs, inv.F1, lhs >= float(inv.F1) - tol, abs(pairing), gp * dev_q, abs(pairing) <= gp * dev_q + 1e-9, pairing - float(inv.F1))
