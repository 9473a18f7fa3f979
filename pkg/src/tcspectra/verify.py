"""Acceptance checks, one function per criterion.

Each check returns a :class:`CriterionResult`; ``tcspectra verify`` and the
acceptance tests both run these functions, so the two can never disagree.
Exact checks compare ``Fraction`` values with zero tolerance; numerical
checks state their tolerance in ``detail``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .configurations import Configuration, FlagIdealConfig, NormalConeConfig, ToricConfig, homogeneous_monomials, ideal_power_mismatches
from .documents import load_corpus
from .geodesic import (
    aubin_mabuchi_slope,
    build_ray,
    equilibrium,
    gradient_map_residual,
    legendre,
    ma_mass,
    ma_mass_identity,
    maximality_leakage,
    primal_grid,
)
from .geometry import PLConcave, Polytope
from .kebounds import _similarity, density_ratio, fano_model, verify_fano_bound
from .potentials import GuilleminPotential
from .rational import format_rat
from .spectra import (
    b0_from_dh,
    cdf_distance,
    check_N2_identity,
    dh_measure,
    finite_level_norms,
    fit_invariants,
    limit_F0,
    normal_cone_b0_from_blowup,
    norms,
    spectral_measure,
)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    time_limit: float | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        limit = f" / {self.time_limit:.0f}s" if self.time_limit else ""
        return f"criterion {self.number} [{status}] {self.title}: {self.detail} ({self.seconds:.2f}s{limit})"


def _timed(number: int, title: str, time_limit: float | None, body: Callable[[], tuple[bool, str]]) -> CriterionResult:
    start = time.perf_counter()
    ok, detail = body()
    elapsed = time.perf_counter() - start
    if time_limit is not None and elapsed > time_limit:
        ok = False
        detail += f"; runtime {elapsed:.1f}s exceeds {time_limit:.0f}s"
    return CriterionResult(number, title, ok, detail, elapsed, time_limit)


def _configs(corpus=None) -> dict[str, Configuration]:
    corpus = load_corpus() if corpus is None else corpus
    return {name: doc.config for name, doc in corpus.items()}


def _period(cfg: Configuration) -> int:
    return math.lcm(cfg.period, cfg.divisibility)


# ---------------------------------------------------------------------------
# exact suite


def criterion_1(corpus=None) -> CriterionResult:
    """``b0`` by interpolation equals ``-int lam dV`` from the DH survival function."""

    def body():
        failures = []
        for name, cfg in _configs(corpus).items():
            inv = fit_invariants(cfg)
            dh_b0 = b0_from_dh(dh_measure(cfg))
            if inv.b0 != dh_b0:
                failures.append(f"{name}: {format_rat(inv.b0)} != {format_rat(dh_b0)}")
        nc = NormalConeConfig(Polytope.interval(0, 1), 0, Fraction(1, 2))
        inv = fit_invariants(nc)
        w_oracle = all(nc.total_weight(k) == Fraction(-k * k, 8) - Fraction(k, 4) for k in range(2, 41, 2))
        blowup_b0 = normal_cone_b0_from_blowup(nc)
        if not (inv.b0 == blowup_b0 == Fraction(-1, 8) and inv.F1 == Fraction(-1, 8) and w_oracle):
            failures.append(f"normal cone: b0={inv.b0}, blow-up b0={blowup_b0}, F1={inv.F1}, w oracle {w_oracle}")
        n = len(_configs(corpus))
        return not failures, "; ".join(failures) or f"{n} configurations agree exactly; normal cone b0 = F1 = -1/8"

    return _timed(1, "b0 from interpolation equals the DH moment", None, body)


def kolmogorov_sweep(cfg: Configuration, kmax: int = 256) -> list[tuple[int, Fraction]]:
    """``(k, d_K(spectral_k, DH))`` for ``k = 8, 16, ...`` times the period, up to ``kmax``."""
    m = _period(cfg)
    dh = dh_measure(cfg)
    out = []
    k = 8
    while k <= kmax:
        level = k * m
        out.append((level, cdf_distance(spectral_measure(cfg, level), dh).kolmogorov))
        k *= 2
    return out


def criterion_2(corpus=None, kmax: int = 256) -> CriterionResult:
    """Kolmogorov distance non-increasing and below ``C/k`` with ``C`` from the first level."""

    def body():
        configs = _configs(corpus)
        parts, ok = [], True
        for name in ("product_p1", "normal_cone_p1"):
            sweep = kolmogorov_sweep(configs[name], kmax)
            k0, d0 = sweep[0]
            C = d0 * k0
            mono = all(b[1] <= a[1] for a, b in zip(sweep, sweep[1:]))
            bounded = all(d <= C / k for k, d in sweep)
            ok &= mono and bounded
            parts.append(f"{name}: C={format_rat(C)}, k*d={[format_rat(d * k) for k, d in sweep]}, monotone={mono}, bounded={bounded}")
        return ok, "; ".join(parts)

    return _timed(2, "spectral measures converge to DH at rate 1/k", 10.0, body)


def norm_sweep(cfg: Configuration, levels, ps=(1, 2, 3, 4)) -> dict[tuple[int, str], list[tuple[int, Fraction]]]:
    """Exact errors of the level sums against the limits, keyed by ``(p, quantity)``."""
    limits = {p: norms(cfg, p) for p in ps}
    out: dict[tuple[int, str], list[tuple[int, Fraction]]] = {}
    for k in levels:
        table = cfg.dims_by_weight(k)
        for p in ps:
            fin = finite_level_norms(cfg, p, k, table=table)
            for q in ("Qp", "Np", "norm_pow"):
                out.setdefault((p, q), []).append((k, abs(getattr(fin, q) - getattr(limits[p], q))))
    return out


def bounded_rate(errors: list[tuple[int, Fraction]]) -> bool:
    """``sup |err| k <= 2 max`` of ``|err| k`` over the first two levels."""
    scaled = [e * k for k, e in errors]
    return max(scaled) <= 2 * max(scaled[:2])


def criterion_3(corpus=None, kmax: int = 256) -> CriterionResult:
    """Exact ``N2 = Q2 - b0^2/a0`` and ``O(1/k)`` convergence of the level sums."""

    def body():
        configs = _configs(corpus)
        failures = []
        for name, cfg in configs.items():
            inv = fit_invariants(cfg)
            toric = cfg.as_toric()
            if not check_N2_identity(toric, inv.b0):
                failures.append(f"{name}: N2 identity")
            m = _period(cfg)
            steps = [s for s in (4, 8, 16, 32, 64) if s * m <= max(kmax, 8 * m)]
            sweep = norm_sweep(cfg, [s * m for s in steps])
            bad = [f"p={p} {q}" for (p, q), errs in sweep.items() if not bounded_rate(errs)]
            if bad:
                failures.append(f"{name}: unbounded |err|*k for {', '.join(bad)}")
        prod = configs["product_p1"]
        n2, ninf = norms(prod, 2), norms(prod, "inf")
        targets = n2.Qp == Fraction(1, 3) and n2.Np == n2.norm_pow == Fraction(1, 12) and ninf.norm_pow == Fraction(1, 2)
        if not targets:
            failures.append(f"product_p1 targets: Q2={n2.Qp}, N2={n2.Np}, |T|2^2={n2.norm_pow}, |T|inf={ninf.norm_pow}")
        return not failures, "; ".join(failures) or f"identity exact on {len(configs)} configurations; p=1..4 errors O(1/k); product Q2=1/3, N2=1/12, |T|inf=1/2"

    return _timed(3, "N2 identity and p-norm convergence", None, body)


def criterion_4(corpus=None, nodes: int = 2001) -> CriterionResult:
    """Trivial configuration: zero norm and a straight-line ray; nonconstant ``g``: positive norm."""

    def body():
        configs = _configs(corpus)
        trivial = configs["trivial"]
        zero = norms(trivial, 2).norm_pow == 0
        P = trivial.as_toric().polytope
        u0 = primal_grid(GuilleminPotential(P), nodes)
        worst = 0.0
        for cfg in (trivial, trivial.as_toric().shifted(Fraction(1, 3))):
            ray = build_ray(u0, cfg)
            phi0 = ray.at(0.0).values
            F0 = float(limit_F0(cfg))
            for t in (0.5, 1.0, 2.0):
                worst = max(worst, float(np.max(np.abs(ray.at(t).values - (phi0 + F0 * t)))))
        positive = {name: norms(cfg, 2).norm_pow > 0 for name, cfg in configs.items() if name != "trivial"}
        ok = zero and worst <= 1e-12 and all(positive.values())
        nonpos = [n for n, v in positive.items() if not v]
        return ok, f"|T|2 = 0: {zero}; max |phi_t - phi - F0 t| = {worst:.1e} (tol 1e-12); |T|2 > 0 on {len(positive) - len(nonpos)}/{len(positive)} others"

    return _timed(4, "trivial configuration and nonvanishing norms", None, body)


# ---------------------------------------------------------------------------
# geodesic suite


def criterion_5(nodes: int = 10_000) -> CriterionResult:
    """Gradient-map residual, MA mass identity, energy slope and maximality on product P^1."""

    def body():
        P = Polytope.interval(0, 1)
        cfg = ToricConfig(P, PLConcave((((1,), 0),)))
        pot = GuilleminPotential(P)
        fine = primal_grid(pot, nodes)
        coarse = primal_grid(pot, nodes // 2)
        r_fine = gradient_map_residual(fine, cfg, 1.0).value
        r_coarse = gradient_map_residual(coarse, cfg, 1.0).value
        halving = r_coarse / r_fine
        mass = ma_mass_identity(fine, cfg, Fraction(1, 2))
        slope = aubin_mabuchi_slope(fine, cfg, np.linspace(0.0, 1.0, 6)).slope
        phi = legendre(fine)
        psi = equilibrium(fine, cfg, Fraction(1, 2), phi.axes)
        leak = maximality_leakage(psi, phi)
        checks = {
            "residual": r_fine <= 1e-2,
            "halving": 1.5 <= halving <= 2.5,
            "mass": mass.error <= 1e-2 and mass.rhs == Fraction(1, 2),
            "slope": abs(slope - 0.5) <= 1e-3,
            "leakage": leak <= 1e-3,
        }
        detail = (
            f"residual {r_fine:.2e} (<=1e-2), coarse/fine {halving:.3f} (2 +- 25%), "
            f"mass {mass.lhs:.6f} vs 1/2 (err {mass.error:.1e}), slope {slope:.6f} (1/2 +- 1e-3), leakage {leak:.1e} (<=1e-3)"
        )
        failed = [k for k, v in checks.items() if not v]
        return not failed, detail + (f"; failed: {', '.join(failed)}" if failed else "")

    return _timed(5, "geodesic ray on product P^1", 60.0, body)


def lambda_grid(cfg: Configuration, count: int = 20) -> list[Fraction]:
    lo, hi = cfg.as_toric().lambda_bounds()
    return [lo + (hi - lo) * Fraction(i, count - 1) for i in range(count)]


def equilibrium_masses(cfg: Configuration, nodes_1d: int = 2000, nodes_2d: int = 120, count: int = 20) -> list[tuple[Fraction, float]]:
    toric = cfg.as_toric()
    nodes = nodes_1d if toric.dim == 1 else nodes_2d
    u0 = primal_grid(GuilleminPotential(toric.polytope), nodes)
    phi = legendre(u0)
    return [(lam, ma_mass(equilibrium(u0, toric, lam, phi.axes))) for lam in lambda_grid(toric, count)]


def criterion_6(corpus=None, nodes_1d: int = 2000, nodes_2d: int = 120) -> CriterionResult:
    """``mass(psi_l2) <= mass(psi_l1) + 1e-3`` for ``l1 < l2`` on a 20-point grid."""

    def body():
        failures, worst = [], -np.inf
        configs = _configs(corpus)
        for name, cfg in configs.items():
            masses = [m for _, m in equilibrium_masses(cfg, nodes_1d, nodes_2d)]
            # largest increase of a later mass over any earlier one
            running = np.minimum.accumulate(masses)
            excess = float(np.max(np.array(masses[1:]) - running[:-1]))
            worst = max(worst, excess)
            if excess > 1e-3:
                failures.append(f"{name}: increase {excess:.2e}")
        return not failures, "; ".join(failures) or f"{len(configs)} configurations; largest increase {worst:.2e} (tol 1e-3)"

    return _timed(6, "equilibrium masses decrease in lambda", None, body)


# ---------------------------------------------------------------------------
# KE suite


def _model_for(cfg: Configuration, models) -> object | None:
    P = cfg.as_toric().polytope
    for model in models:
        if model.polytope.dim == P.dim and _similarity(P, model.polytope) is not None:
            return model
    return None


def criterion_7(corpus=None, perturbations: int = 5, seed: int = 0) -> CriterionResult:
    """Fano bound for ``p in {1, 2, 4, inf}`` on every corpus configuration and metric."""

    def body():
        models = [fano_model(name, perturbations, seed) for name in ("P1", "P2", "blowup")]
        ratios = {(m.name, i): density_ratio(m, i) for m in models for i in range(len(m.metrics))}
        fs = ratios[("P1", 0)]
        fs_err = float(np.max(np.abs(fs.ratio - 1)))
        failures, checked, worst = [], 0, np.inf
        blowup_rhs = []
        for name, cfg in _configs(corpus).items():
            model = _model_for(cfg, models)
            if model is None:
                failures.append(f"{name}: no model polytope")
                continue
            inv = fit_invariants(cfg)
            for i in range(len(model.metrics)):
                for p in (1, 2, 4, "inf"):
                    rep = verify_fano_bound(model, cfg, p, i, invariants=inv, ratio=ratios[(model.name, i)])
                    checked += 1
                    if rep.diagnosis is None:
                        worst = min(worst, rep.margin)
                    if not rep.holds:
                        failures.append(f"{name} on {model.name} metric {i} p={p}: lhs {rep.lhs:.4g} < rhs {rep.rhs:.4g}")
                    if model.name == "blowup" and i > 0:
                        blowup_rhs.append(rep.rhs)
        nontrivial = bool(blowup_rhs) and min(blowup_rhs) > 0
        ok = fs_err <= 1e-3 and not failures and nontrivial
        detail = f"FS ratio on P1 within {fs_err:.1e} of 1 (tol 1e-3); {checked} bounds checked, smallest margin {worst:.3g}; blow-up rhs min {min(blowup_rhs, default=float('nan')):.4g} > 0: {nontrivial}"
        return ok, detail + ("; " + "; ".join(failures[:5]) if failures else "")

    return _timed(7, "Kahler-Einstein distance bound", 120.0, body)


# ---------------------------------------------------------------------------
# oracle equivalence


def criterion_8(corpus=None, max_power: int = 4) -> CriterionResult:
    """Newton-region membership equals brute-force products for ``J^m``, ``m <= 4``."""

    def body():
        failures, tested = [], 0
        for name, cfg in _configs(corpus).items():
            if not isinstance(cfg, FlagIdealConfig):
                continue
            for j, ideal in enumerate(cfg.flag):
                top = max(sum(g) for g in ideal.generators)
                for m in range(1, max_power + 1):
                    degrees = range(0, m * top + cfg.d + 1)
                    monos = np.concatenate([homogeneous_monomials(ideal.nvars, D) for D in degrees])
                    bad = ideal_power_mismatches(ideal, m, monos)
                    tested += len(monos)
                    if bad:
                        failures.append(f"{name} J{j}^{m}: {len(bad)} mismatches, e.g. {bad[0]}")
        return not failures, "; ".join(failures) or f"{tested} monomial tests, zero mismatches"

    return _timed(8, "Newton-region membership matches brute force", None, body)


SUITES = {
    "exact": (1, 2, 3, 4, 8),
    "geodesic": (5, 6),
    "ke": (7,),
}


def run_suite(suite: str = "all", kmax: int = 256, nodes: int = 10_000, corpus=None) -> list[CriterionResult]:
    """Run the criteria of ``suite`` (``exact``, ``geodesic``, ``ke`` or ``all``) in order."""
    if suite == "all":
        numbers = sorted(n for ns in SUITES.values() for n in ns)
    elif suite in SUITES:
        numbers = SUITES[suite]
    else:
        raise ValueError(f"unknown suite {suite!r}")
    corpus = load_corpus() if corpus is None else corpus
    runners = {
        1: lambda: criterion_1(corpus),
        2: lambda: criterion_2(corpus, kmax),
        3: lambda: criterion_3(corpus, kmax),
        4: lambda: criterion_4(corpus),
        5: lambda: criterion_5(nodes),
        6: lambda: criterion_6(corpus),
        7: lambda: criterion_7(corpus),
        8: lambda: criterion_8(corpus),
    }
    return [runners[n]() for n in numbers]
