"""Weak geodesic rays in the toric reduction, on uniform grids.

On a toric manifold the reference metric is the Legendre dual of a symplectic
potential ``u0`` on the moment polytope. The ray is ``phi_t = (u0 - t g)^*``
and the equilibrium family is ``psi_lam = (u0 + indicator{g >= lam})^*``.
Everything here is float64 and tolerances scale with the grid spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .configurations import Configuration
from .geometry import Polytope, superlevel_region
from .potentials import Potential


class _MinusInfinity:
    """Marker for a potential that is identically ``-inf``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MINUS_INFINITY"

    def __bool__(self) -> bool:
        return False


MINUS_INFINITY = _MinusInfinity()


@dataclass(frozen=True)
class PotentialGrid:
    """Samples of a convex function on a uniform 1D or 2D grid.

    ``values`` may be ``+inf`` outside the effective domain (primal side).
    ``role`` is ``"symplectic"`` for functions on the polytope side and
    ``"kahler"`` for their duals.
    """

    axes: tuple[np.ndarray, ...]
    values: np.ndarray
    role: str = "kahler"

    def __post_init__(self):
        shape = tuple(len(a) for a in self.axes)
        if self.values.shape != shape:
            raise ValueError(f"values have shape {self.values.shape}, axes give {shape}")

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(float(a[1] - a[0]) for a in self.axes)

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def convexity_defect(self) -> float:
        """Most negative second difference (along each axis) over finite triples."""
        worst = 0.0
        for ax in range(self.dim):
            v = np.moveaxis(self.values, ax, 0)
            d2 = v[2:] - 2 * v[1:-1] + v[:-2]
            d2 = d2[np.isfinite(d2)]
            if d2.size:
                worst = min(worst, float(d2.min()))
        return -worst


# ---------------------------------------------------------------------------
# Legendre transforms


def _lower_hull(x: np.ndarray, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower convex hull of ``(x_i, f_i)`` for increasing ``x`` (monotone chain)."""
    hx, hf = [], []
    for xi, fi in zip(x.tolist(), f.tolist()):
        while len(hx) >= 2 and (hf[-1] - hf[-2]) * (xi - hx[-2]) >= (fi - hf[-2]) * (hx[-1] - hx[-2]):
            hx.pop()
            hf.pop()
        hx.append(xi)
        hf.append(fi)
    return np.array(hx), np.array(hf)


def legendre_1d(x: np.ndarray, f: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``f^*(y) = max_i x_i y - f_i`` and the maximising ``x``.

    Linear-time in the input after the hull: the conjugate slope at ``y`` is
    the hull vertex whose adjacent edge slopes bracket ``y``.
    """
    keep = np.isfinite(f)
    if not keep.any():
        raise ValueError("empty effective domain")
    hx, hf = _lower_hull(np.asarray(x, float)[keep], np.asarray(f, float)[keep])
    slopes = np.diff(hf) / np.diff(hx)
    idx = np.searchsorted(slopes, y, side="left")
    return hx[idx] * y - hf[idx], hx[idx]


def legendre(f: PotentialGrid, dual_axes: Sequence[np.ndarray] | None = None) -> PotentialGrid:
    """Discrete Legendre-Fenchel conjugate on ``dual_axes``.

    2D transforms are separable: conjugate each row in the second variable,
    then conjugate the negated result column-wise in the first.
    """
    if dual_axes is None:
        dual_axes = default_dual_axes(f)
    dual_axes = tuple(np.asarray(a, float) for a in dual_axes)
    role = "kahler" if f.role == "symplectic" else "symplectic"
    if f.dim == 1:
        vals, _ = legendre_1d(f.axes[0], f.values, dual_axes[0])
        return PotentialGrid(dual_axes, vals, role)
    if f.dim != 2:
        raise ValueError("only 1D and 2D grids are supported")
    x1, x2 = f.axes
    y1, y2 = dual_axes
    inner = np.full((len(x1), len(y2)), np.inf)
    for i in range(len(x1)):
        row = f.values[i]
        if np.isfinite(row).any():
            inner[i] = -legendre_1d(x2, row, y2)[0]
    out = np.empty((len(y1), len(y2)))
    for j in range(len(y2)):
        out[:, j] = legendre_1d(x1, inner[:, j], y1)[0]
    return PotentialGrid(dual_axes, out, role)


def default_dual_axes(f: PotentialGrid, nodes: int | None = None) -> tuple[np.ndarray, ...]:
    """Dual axes spanning the finite discrete slopes of ``f`` along each axis."""
    axes = []
    for ax in range(f.dim):
        v = np.moveaxis(f.values, ax, 0)
        with np.errstate(invalid="ignore"):
            d = np.diff(v, axis=0) / f.spacing[ax]
        d = d[np.isfinite(d)]
        m = nodes or len(f.axes[ax])
        axes.append(np.linspace(float(d.min()), float(d.max()), m))
    return tuple(axes)


# ---------------------------------------------------------------------------
# toric reduction


def primal_grid(potential: Potential, nodes: int | Sequence[int]) -> PotentialGrid:
    """Sample a symplectic potential on a uniform grid over the bounding box of ``P``.

    Nodes outside ``P`` get ``+inf``.
    """
    P = potential.polytope
    n = P.dim
    counts = [nodes] * n if np.isscalar(nodes) else list(nodes)
    lo = [float(min(v[i] for v in P.vertices)) for i in range(n)]
    hi = [float(max(v[i] for v in P.vertices)) for i in range(n)]
    axes = tuple(np.linspace(a, b, m) for a, b, m in zip(lo, hi, counts))
    grid = PotentialGrid(axes, np.zeros(tuple(counts)), "symplectic")
    pts = grid.points()
    normals = np.array([[float(a) for a in h.normal] for h in P.halfspaces])
    offsets = np.array([float(h.offset) for h in P.halfspaces])
    inside = np.all(pts @ normals.T <= offsets + 1e-12, axis=1)
    vals = np.full(len(pts), np.inf)
    # clip tiny negative distances from round-off onto the boundary
    vals[inside] = potential.value(np.clip(pts[inside], lo, hi))
    vals[inside & ~np.isfinite(vals)] = np.inf
    return PotentialGrid(axes, vals.reshape(tuple(counts)), "symplectic")


def _g_on_grid(cfg: Configuration, grid: PotentialGrid) -> np.ndarray:
    toric = cfg.as_toric()
    return toric.g.evaluate_float(grid.points()).reshape(grid.values.shape)


@dataclass(frozen=True)
class GeodesicRay:
    """The ray ``t -> (u0 - t g)^*`` on fixed dual axes."""

    u0: PotentialGrid
    g: np.ndarray
    dual_axes: tuple[np.ndarray, ...]

    def at(self, t: float) -> PotentialGrid:
        if t < 0:
            raise ValueError("the ray is defined for t >= 0")
        shifted = PotentialGrid(self.u0.axes, self.u0.values - t * self.g, "symplectic")
        return legendre(shifted, self.dual_axes)

    def tangent(self, t: float, dt: float) -> np.ndarray:
        """Forward difference ``(phi_{t+dt} - phi_t)/dt``."""
        return (self.at(t + dt).values - self.at(t).values) / dt


def build_ray(u0: PotentialGrid, cfg: Configuration, dual_axes: Sequence[np.ndarray] | None = None) -> GeodesicRay:
    if dual_axes is None:
        dual_axes = default_dual_axes(u0)
    return GeodesicRay(u0, _g_on_grid(cfg, u0), tuple(np.asarray(a, float) for a in dual_axes))


def ray_at(u0: PotentialGrid, cfg: Configuration, t: float, dual_axes=None) -> PotentialGrid:
    return build_ray(u0, cfg, dual_axes).at(t)


def equilibrium(u0: PotentialGrid, cfg: Configuration, lam, dual_axes=None):
    """``psi_lam = (u0 + indicator{g >= lam})^*`` or ``MINUS_INFINITY``.

    Returns the sentinel when ``lam`` exceeds the maximum of ``g``.
    """
    toric = cfg.as_toric()
    lam_f = float(lam)
    _, top = toric.lambda_bounds()
    exact = isinstance(lam, (int, Fraction))
    if (exact and Fraction(lam) > top) or (not exact and lam_f > float(top) + 1e-15):
        return MINUS_INFINITY
    if dual_axes is None:
        dual_axes = default_dual_axes(u0)
    g = _g_on_grid(cfg, u0)
    masked = np.where(g >= lam_f - 1e-12, u0.values, np.inf)
    if not np.isfinite(masked).any():
        return MINUS_INFINITY
    return legendre(PotentialGrid(u0.axes, masked, "symplectic"), dual_axes)


def ray_from_equilibria(u0: PotentialGrid, cfg: Configuration, t: float, lam_grid: Sequence[float], dual_axes=None) -> np.ndarray:
    """``max_lam psi_lam + t lam`` over a finite ``lam`` grid."""
    if dual_axes is None:
        dual_axes = default_dual_axes(u0)
    best = None
    for lam in lam_grid:
        psi = equilibrium(u0, cfg, lam, dual_axes)
        if psi is MINUS_INFINITY:
            continue
        cand = psi.values + t * float(lam)
        best = cand if best is None else np.maximum(best, cand)
    return best


def bergman_approx(potential: Potential, cfg: Configuration, lam, k: int, dual_axes: Sequence[np.ndarray]):
    """Envelope ``max_u <u/k, y> - u0(u/k)`` over the monomials in ``W_{lam,k}``.

    ``potential`` is evaluated exactly at the lattice points ``u/k`` (including
    boundary points, where the Guillemin potential stays finite).
    """
    toric = cfg.as_toric()
    k = toric.check_level(k)
    pts = toric.polytope.lattice_point_array(k)
    target = math.ceil(Fraction(lam) * k) if isinstance(lam, (int, Fraction)) else math.ceil(float(lam) * k - 1e-12)
    mask = toric.weights_at(pts, k) >= target
    if not mask.any():
        return MINUS_INFINITY
    x = pts[mask] / k
    ux = potential.value(x)
    axes = tuple(np.asarray(a, float) for a in dual_axes)
    mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    vals = np.full(len(mesh), -np.inf)
    for start in range(0, len(x), 2048):
        block = mesh @ x[start:start + 2048].T - ux[start:start + 2048]
        vals = np.maximum(vals, block.max(axis=1))
    return PotentialGrid(axes, vals.reshape(tuple(len(a) for a in axes)), "kahler")


# ---------------------------------------------------------------------------
# Monge-Ampere measures


def ma_node_measure(phi: PotentialGrid) -> np.ndarray:
    """Discrete Monge-Ampere measure per node, normalised to total ``n! |grad image|``.

    1D: jumps of the discrete derivative. 2D: each grid cell's image quad
    under the central-difference gradient, shoelace area times ``2!``, split
    equally among its four corners.
    """
    if phi is MINUS_INFINITY:
        return None
    v = phi.values
    if phi.dim == 1:
        s = np.diff(v) / phi.spacing[0]
        out = np.zeros_like(v)
        out[1:-1] = np.diff(s)
        return out
    g1, g2 = np.gradient(v, *phi.spacing, edge_order=2)
    a = (g1[:-1, :-1], g2[:-1, :-1])
    b = (g1[1:, :-1], g2[1:, :-1])
    c = (g1[1:, 1:], g2[1:, 1:])
    d = (g1[:-1, 1:], g2[:-1, 1:])
    area = 0.5 * ((a[0] * b[1] - b[0] * a[1]) + (b[0] * c[1] - c[0] * b[1]) + (c[0] * d[1] - d[0] * c[1]) + (d[0] * a[1] - a[0] * d[1]))
    cell = 2.0 * area
    out = np.zeros_like(v)
    for sl in ((slice(None, -1), slice(None, -1)), (slice(1, None), slice(None, -1)), (slice(1, None), slice(1, None)), (slice(None, -1), slice(1, None))):
        out[sl] += cell / 4
    return out


def ma_mass(phi) -> float:
    """Total discrete Monge-Ampere mass; zero for the ``-inf`` sentinel."""
    if phi is MINUS_INFINITY:
        return 0.0
    v = phi.values
    if phi.dim == 1:
        h = phi.spacing[0]
        return float((v[-1] - v[-2]) / h - (v[1] - v[0]) / h)
    return float(ma_node_measure(phi).sum())


@dataclass(frozen=True)
class MassIdentity:
    lhs: float
    rhs: Fraction

    @property
    def error(self) -> float:
        return abs(self.lhs - float(self.rhs))


def ma_mass_identity(u0: PotentialGrid, cfg: Configuration, lam, dual_axes=None) -> MassIdentity:
    """Discrete mass of ``psi_lam`` against ``n! vol{g >= lam}``."""
    toric = cfg.as_toric()
    psi = equilibrium(u0, cfg, lam, dual_axes)
    region = superlevel_region(toric.g, toric.polytope, Fraction(lam))
    rhs = Fraction(0) if region is None else math.factorial(toric.dim) * region.volume()
    return MassIdentity(ma_mass(psi), rhs)


def maximality_leakage(psi, phi: PotentialGrid, eps: float | None = None) -> float:
    """MA mass of ``psi`` on nodes where ``psi < phi - eps`` (default ``10 h``)."""
    if psi is MINUS_INFINITY:
        return 0.0
    if eps is None:
        eps = 10 * max(phi.spacing)
    mu = ma_node_measure(psi)
    return float(np.abs(mu[psi.values < phi.values - eps]).sum())


def comparison_monotonicity(phi, phi_prime, tol: float = 1e-3) -> tuple[bool, bool]:
    """``(conclusive, holds)`` for ``mass(phi') <= mass(phi) + tol``.

    The precondition ``phi' <= phi + C`` is checked as finiteness of
    ``phi' - phi`` on the grid; the sentinel is below everything.
    """
    if phi_prime is MINUS_INFINITY:
        return True, True
    if phi is MINUS_INFINITY:
        return False, False
    diff = phi_prime.values - phi.values
    if not np.all(np.isfinite(diff)):
        return False, False
    return True, ma_mass(phi_prime) <= ma_mass(phi) + tol


# ---------------------------------------------------------------------------
# gradient map and energy


@dataclass(frozen=True)
class Residual:
    value: float
    spacing: float
    t: float


def gradient_map_residual(u0: PotentialGrid, cfg: Configuration, t: float, dt: float | None = None, dual_axes=None, chunk: int = 512) -> Residual:
    """``max_y |-psi_{lam(y)}(y) + phi_t(y) - t lam(y)|`` with ``lam = `` forward difference of the ray.

    ``psi_{lam(y)}(y)`` is evaluated node by node as a masked maximum over the
    primal grid, so every node uses its own ``lam``.
    """
    if t <= 0:
        raise ValueError("the residual is defined for t > 0")
    ray = build_ray(u0, cfg, dual_axes)
    h = max(u0.spacing)
    dt = h if dt is None else dt
    phi_t = ray.at(t).values.ravel()
    lam = ((ray.at(t + dt).values.ravel()) - phi_t) / dt
    x = u0.points()
    fin = np.isfinite(u0.values.ravel())
    x, ux, gx = x[fin], u0.values.ravel()[fin], ray.g.ravel()[fin]
    ys = np.stack([m.ravel() for m in np.meshgrid(*ray.dual_axes, indexing="ij")], axis=1)
    psi = np.empty(len(ys))
    for s in range(0, len(ys), chunk):
        yb, lb = ys[s:s + chunk], lam[s:s + chunk]
        vals = yb @ x.T - ux
        vals = np.where(gx[None, :] >= lb[:, None] - 1e-12, vals, -np.inf)
        psi[s:s + chunk] = vals.max(axis=1)
    res = np.abs(-psi + phi_t - t * lam)
    return Residual(float(np.max(res[np.isfinite(res)])), h, t)


@dataclass(frozen=True)
class EnergySlope:
    slope: float
    intercept: float
    max_deviation: float
    times: np.ndarray
    energy: np.ndarray


def aubin_mabuchi_slope(u0: PotentialGrid, cfg: Configuration, tgrid: Sequence[float], dt: float | None = None, dual_axes=None) -> EnergySlope:
    """Least-squares slope of ``E(t) = int_0^t ds int phi_dot_s MA(phi_s)``."""
    tgrid = np.asarray(tgrid, float)
    if len(tgrid) < 3:
        raise ValueError("need at least three time samples")
    ray = build_ray(u0, cfg, dual_axes)
    dt = max(u0.spacing) if dt is None else dt
    e = []
    for s in tgrid:
        phi = ray.at(s)
        mu = ma_node_measure(phi)
        e.append(float(np.sum(ray.tangent(s, dt) * mu)))
    e = np.array(e)
    energy = np.concatenate([[0.0], np.cumsum(0.5 * (e[1:] + e[:-1]) * np.diff(tgrid))])
    slope, intercept = np.polyfit(tgrid, energy, 1)
    dev = float(np.max(np.abs(energy - (slope * tgrid + intercept))))
    return EnergySlope(float(slope), float(intercept), dev, tgrid, energy)


def tangent_pushforward(u0: PotentialGrid, cfg: Configuration, dt: float | None = None, dual_axes=None) -> tuple[np.ndarray, np.ndarray]:
    """Values of the discrete ``phi_dot_0`` with the MA weights of ``phi``."""
    ray = build_ray(u0, cfg, dual_axes)
    dt = max(u0.spacing) if dt is None else dt
    mu = ma_node_measure(ray.at(0.0))
    vals = ray.tangent(0.0, dt)
    keep = mu != 0
    return vals[keep].ravel(), mu[keep].ravel()


def ray_convexity_defect(ray: GeodesicRay, times: Sequence[float]) -> float:
    """Largest violation of convexity in ``t`` over consecutive triples of times."""
    times = sorted(times)
    vals = [ray.at(t).values for t in times]
    worst = 0.0
    for (t1, v1), (t2, v2), (t3, v3) in zip(zip(times, vals), zip(times[1:], vals[1:]), zip(times[2:], vals[2:])):
        w = (t3 - t2) / (t3 - t1)
        interp = w * v1 + (1 - w) * v3
        worst = max(worst, float(np.max(v2 - interp)))
    return worst
