"""Analytic symplectic potentials on rational polytopes.

A potential is a strictly convex function ``u`` on the interior of ``P`` with
the Guillemin boundary behaviour. Values, gradients and Hessians are
vectorised over ``(M, n)`` arrays of points; one-dimensional potentials also
provide derivatives up to fourth order for the scalar-curvature formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Polytope


def _xlogx(v: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(v > 0, v * np.log(np.where(v > 0, v, 1.0)), 0.0)
    return np.where(v < 0, np.nan, out)


class Potential:
    """Convex potential on a polytope; subclasses fill in the derivatives."""

    polytope: Polytope

    def value(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivatives_1d(self, x: np.ndarray) -> tuple[np.ndarray, ...]:
        """``(u'', u''', u'''')`` for one-dimensional potentials."""
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        return self.value(np.asarray(x, dtype=float).reshape(-1, self.polytope.dim))

    def plus(self, other: "Potential", weight: float = 1.0) -> "SumPotential":
        return SumPotential(self, other, float(weight))

    def min_hessian_eigenvalue(self, x: np.ndarray) -> float:
        h = self.hessian(x)
        return float(np.min(np.linalg.eigvalsh(h)))


class GuilleminPotential(Potential):
    """``u(x) = sum_i l_i(x) log l_i(x)`` with ``l_i`` the lattice distance to facet ``i``."""

    def __init__(self, polytope: Polytope):
        self.polytope = polytope
        self.normals = np.array([[float(a) for a in h.normal] for h in polytope.halfspaces])
        self.offsets = np.array([float(h.offset) for h in polytope.halfspaces])

    def distances(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, self.polytope.dim)
        return self.offsets - x @ self.normals.T

    def value(self, x):
        return _xlogx(self.distances(x)).sum(axis=1)

    def gradient(self, x):
        ell = self.distances(x)
        with np.errstate(divide="ignore"):
            return -(np.log(ell) + 1.0) @ self.normals

    def hessian(self, x):
        ell = self.distances(x)
        w = 1.0 / ell
        return np.einsum("mi,ia,ib->mab", w, self.normals, self.normals)

    def derivatives_1d(self, x):
        a = self.normals[:, 0]
        ell = self.distances(x)
        u2 = (a**2 / ell).sum(axis=1)
        u3 = (a**3 / ell**2).sum(axis=1)
        u4 = (2 * a**4 / ell**3).sum(axis=1)
        return u2, u3, u4


@dataclass
class PolynomialPerturbation(Potential):
    """``sum_alpha c_alpha x^alpha``; added to a potential with a small weight."""

    polytope: Polytope
    coeffs: dict = field(default_factory=dict)

    def _terms(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.polytope.dim)
        return x, [(np.asarray(a), float(c)) for a, c in self.coeffs.items()]

    @staticmethod
    def _mono(x, alpha):
        return np.prod(x ** alpha, axis=1)

    @staticmethod
    def _dmono(x, alpha, i):
        if alpha[i] == 0:
            return np.zeros(len(x))
        beta = alpha.copy()
        beta[i] -= 1
        return alpha[i] * np.prod(x ** beta, axis=1)

    def value(self, x):
        x, terms = self._terms(x)
        return sum((c * self._mono(x, a) for a, c in terms), np.zeros(len(x)))

    def gradient(self, x):
        x, terms = self._terms(x)
        n = x.shape[1]
        out = np.zeros((len(x), n))
        for a, c in terms:
            for i in range(n):
                out[:, i] += c * self._dmono(x, a, i)
        return out

    def hessian(self, x):
        x, terms = self._terms(x)
        n = x.shape[1]
        out = np.zeros((len(x), n, n))
        for a, c in terms:
            for i in range(n):
                if a[i] == 0:
                    continue
                b = a.copy()
                b[i] -= 1
                for j in range(n):
                    out[:, i, j] += c * a[i] * self._dmono(x, b, j)
        return out

    def derivatives_1d(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        poly = np.polynomial.Polynomial(self._dense_1d())
        return poly.deriv(2)(x), poly.deriv(3)(x), poly.deriv(4)(x)

    def _dense_1d(self):
        deg = max(int(a[0]) for a in self.coeffs) if self.coeffs else 0
        dense = np.zeros(deg + 1)
        for a, c in self.coeffs.items():
            dense[int(a[0])] += c
        return dense


@dataclass
class SumPotential(Potential):
    base: Potential
    extra: Potential
    weight: float

    @property
    def polytope(self) -> Polytope:
        return self.base.polytope

    def value(self, x):
        return self.base.value(x) + self.weight * self.extra.value(x)

    def gradient(self, x):
        return self.base.gradient(x) + self.weight * self.extra.gradient(x)

    def hessian(self, x):
        return self.base.hessian(x) + self.weight * self.extra.hessian(x)

    def derivatives_1d(self, x):
        b = self.base.derivatives_1d(x)
        e = self.extra.derivatives_1d(x)
        return tuple(p + self.weight * q for p, q in zip(b, e))


def perturbed_family(polytope: Polytope, count: int, scale: float = 0.1, seed: int = 0) -> list[Potential]:
    """Guillemin potential plus ``count`` random cubic perturbations.

    Each perturbation is rescaled until the Hessian stays positive definite on
    a sample of interior points, so every member is a strictly convex metric.
    """
    rng = np.random.default_rng(seed)
    base = GuilleminPotential(polytope)
    n = polytope.dim
    verts = np.array([[float(c) for c in v] for v in polytope.vertices])
    # interior sample: random convex combinations of vertices
    w = rng.dirichlet(np.ones(len(verts)), size=400)
    sample = w @ verts
    alphas = [a for a in np.ndindex(*(4,) * n) if 2 <= sum(a) <= 3]
    out = []
    for _ in range(count):
        coeffs = {tuple(int(v) for v in a): float(rng.normal()) for a in alphas}
        pert = PolynomialPerturbation(polytope, coeffs)
        eps = scale
        while base.plus(pert, eps).min_hessian_eigenvalue(sample) <= 0.05:
            eps /= 2
        out.append(base.plus(pert, eps))
    return out
