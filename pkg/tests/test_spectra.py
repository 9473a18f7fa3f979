from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tcspectra.configurations import FlagIdealConfig, NormalConeConfig, ToricConfig
from tcspectra.geometry import PLConcave, Polytope, integrate_pl_power, superlevel_region
from tcspectra.spectra import (
    DHMeasure,
    QuasiPolynomialError,
    b0_from_dh,
    cdf_distance,
    check_N2_identity,
    dh_measure,
    finite_level_norms,
    fit_invariants,
    hilbert_dim,
    normal_cone_b0_from_blowup,
    norms,
    shift_config,
    spectral_measure,
    strong_stability_ratio,
    total_weight,
)
from tcspectra.verify import kolmogorov_sweep

F = Fraction
UNIT = Polytope.interval(0, 1)
PRODUCT = ToricConfig(UNIT, PLConcave((((1,), 0),)))
TRIVIAL = ToricConfig(UNIT, PLConcave((((0,), 0),)))
TENT = ToricConfig(UNIT, PLConcave((((1,), 0), ((-1,), 1))))
NORMAL_CONE = NormalConeConfig(UNIT, 0, F(1, 2))
FLAG_P2 = FlagIdealConfig([[(0, 3, 0), (0, 2, 1), (0, 1, 2), (0, 0, 3)], [(0, 1, 0), (0, 0, 1)]], F(1, 2), 2)


# -- finite level --------------------------------------------------------------


def test_product_spectral_measure():
    mu = spectral_measure(PRODUCT, 2)
    assert mu.atoms == ((0, F(1, 2)), (F(1, 2), F(1, 2)), (1, F(1, 2)))
    assert mu.total_mass == F(3, 2)


@pytest.mark.parametrize("k", [1, 3, 8])
def test_trivial_spectral_measure(k):
    mu = spectral_measure(TRIVIAL, k)
    assert mu.atoms == ((0, F(k + 1, k)),)


def test_normal_cone_spectral_measure():
    assert spectral_measure(NORMAL_CONE, 4).atoms == ((F(-1, 2), F(1, 4)), (F(-1, 4), F(1, 4)), (0, F(3, 4)))


def test_total_weights():
    assert total_weight(PRODUCT, 4) == 10
    assert all(total_weight(PRODUCT, k) == k * (k + 1) // 2 for k in range(1, 20))
    assert total_weight(TRIVIAL, 7) == 0
    assert total_weight(NORMAL_CONE, 4) == -3
    assert hilbert_dim(PRODUCT, 9) == 10


def test_normal_cone_weight_polynomial():
    # ord-j oracle: sum over j of min(j - k/2, 0)
    for k in range(2, 41, 2):
        oracle = sum(min(j - k // 2, 0) for j in range(k + 1))
        assert total_weight(NORMAL_CONE, k) == oracle == F(-k * k, 8) - F(k, 4)


# -- invariants ----------------------------------------------------------------


def test_product_invariants():
    inv = fit_invariants(PRODUCT)
    assert (inv.a0, inv.a1, inv.b0, inv.b1, inv.F0, inv.F1) == (1, 1, F(1, 2), F(1, 2), F(1, 2), 0)


def test_normal_cone_invariants():
    inv = fit_invariants(NORMAL_CONE)
    assert (inv.b0, inv.b1, inv.F1) == (F(-1, 8), F(-1, 4), F(-1, 8))
    assert normal_cone_b0_from_blowup(NORMAL_CONE) == F(-1, 8)


def test_trivial_invariants():
    inv = fit_invariants(TRIVIAL)
    assert (inv.b0, inv.b1, inv.F1) == (0, 0, 0)


def test_tent_invariants_need_period_two():
    inv = fit_invariants(TENT)
    assert inv.period == 2
    assert (inv.b0, inv.b1, inv.F1) == (F(1, 4), 0, F(-1, 4))


def test_flag_invariants():
    inv = fit_invariants(FLAG_P2)
    assert (inv.a0, inv.a1) == (2, 3)
    assert (inv.b0, inv.b1, inv.F0, inv.F1) == (F(-7, 24), F(-7, 8), F(-7, 48), F(-7, 32))


def test_blowup_product_invariant():
    P = Polytope.from_vertices([(-1, 0), (0, -1), (2, -1), (-1, 2)])
    inv = fit_invariants(ToricConfig(P, PLConcave((((1, 1), 0),))))
    assert inv.F1 == F(1, 12)
    assert fit_invariants(ToricConfig(P, PLConcave((((-1, -1), 0),)))).F1 == F(-1, 12)


def test_invariants_consistent_with_definitions():
    for cfg in (PRODUCT, NORMAL_CONE, TENT, FLAG_P2):
        inv = fit_invariants(cfg)
        assert inv.F0 == inv.b0 / inv.a0
        assert inv.F1 == (inv.a0 * inv.b1 - inv.a1 * inv.b0) / inv.a0**2


def test_inconsistent_period_reports_residual():
    with pytest.raises(QuasiPolynomialError) as err:
        fit_invariants(TENT, period=1)
    assert err.value.residual != 0


def test_b0_matches_integral_of_g(configs):
    for cfg in configs.values():
        toric = cfg.as_toric()
        assert fit_invariants(cfg).b0 == integrate_pl_power(toric.g, toric.polytope, 1)


# -- DH measure ----------------------------------------------------------------


def test_product_dh_is_lebesgue():
    dh = dh_measure(PRODUCT)
    assert dh.atoms == ()
    assert all(dh.survival(F(j, 7)) == 1 - F(j, 7) for j in range(8))


def test_normal_cone_dh():
    dh = dh_measure(NORMAL_CONE)
    assert dh.atoms == ((0, F(1, 2)),)
    assert dh.survival(F(-1, 4)) == F(3, 4)
    assert dh.support == (F(-1, 2), 0)


def test_trivial_dh_is_point_mass():
    dh = dh_measure(TRIVIAL)
    assert dh.atoms == ((0, 1),)


def test_flag_dh_atom():
    assert dh_measure(FLAG_P2).atoms == ((0, F(7, 4)),)


def test_dh_survival_matches_superlevel_volumes(configs):
    for cfg in configs.values():
        toric = cfg.as_toric()
        dh = dh_measure(cfg)
        lo, hi = dh.support
        nf = math.factorial(toric.dim)
        for j in range(1, 12):
            lam = lo + (hi - lo) * F(j, 12)
            region = superlevel_region(toric.g, toric.polytope, lam)
            assert dh.survival(lam) == (0 if region is None else nf * region.volume())
        assert dh.total_mass == nf * toric.polytope.volume()


def test_b0_from_dh_matches_interpolation(configs):
    for cfg in configs.values():
        assert b0_from_dh(dh_measure(cfg)) == fit_invariants(cfg).b0


# -- distances -----------------------------------------------------------------


def test_kolmogorov_product_k4():
    d = cdf_distance(spectral_measure(PRODUCT, 4), dh_measure(PRODUCT))
    assert d.kolmogorov == F(1, 4) <= F(1, 2)


def test_identical_measures_have_zero_distance():
    mu = spectral_measure(TRIVIAL, 4)
    same = DHMeasure(1, (F(0),), (), mu.total_mass)
    d = cdf_distance(mu, same)
    assert d.kolmogorov == 0 and d.l1 == 0


@pytest.mark.parametrize("name", ["product_p1", "normal_cone_p1", "two_piece_p1", "trivial", "flag_point_p1", "product_p2", "blowup_product", "flag_p2"])
def test_kolmogorov_rate(configs, name):
    cfg = configs[name]
    sweep = kolmogorov_sweep(cfg, 256 if cfg.dim == 1 else 32)
    C = max(d * k for k, d in sweep[:2])
    assert all(b[1] <= a[1] for a, b in zip(sweep, sweep[1:]))
    assert all(d <= C / k for k, d in sweep)


def test_product_l1_halves():
    dh = dh_measure(PRODUCT)
    for k in (8, 16, 32, 64):
        assert math.isclose(cdf_distance(spectral_measure(PRODUCT, k), dh).l1, 1 / (2 * k), rel_tol=1e-12)


# -- norms ---------------------------------------------------------------------


def test_product_norms():
    n2 = norms(PRODUCT, 2)
    assert (n2.Qp, n2.Np, n2.norm_pow) == (F(1, 3), F(1, 12), F(1, 12))
    assert norms(PRODUCT, "inf").norm_pow == F(1, 2)


def test_normal_cone_norms():
    assert norms(NORMAL_CONE, math.inf).norm_pow == F(3, 8)
    n2 = norms(NORMAL_CONE, 2)
    assert (n2.Qp, n2.Np) == (F(1, 24), F(5, 192))


def test_p_zero_is_rejected():
    with pytest.raises(ValueError):
        norms(PRODUCT, 0)


def test_N2_identity(configs):
    for cfg in configs.values():
        assert check_N2_identity(cfg)
        assert check_N2_identity(cfg, fit_invariants(cfg).b0)


def test_first_moments(configs):
    for cfg in configs.values():
        n1 = norms(cfg, 1)
        assert n1.Qp == fit_invariants(cfg).b0
        assert n1.Np == 0


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_finite_level_sums_converge(p):
    for cfg in (PRODUCT, NORMAL_CONE, TENT):
        limit = norms(cfg, p)
        errs = []
        for k in (16, 32, 64, 128):
            fin = finite_level_norms(cfg, p, k)
            errs.append((k, abs(fin.norm_pow - limit.norm_pow), abs(fin.Qp - limit.Qp)))
        C = max(max(e1, e2) * k for k, e1, e2 in errs[:2]) * 2
        assert all(max(e1, e2) * k <= C for k, e1, e2 in errs)


def test_finite_level_centre_is_configurable():
    fin = finite_level_norms(PRODUCT, 2, 4, center=0)
    assert fin.Np == fin.Qp


shifts = st.fractions(min_value=-3, max_value=3, max_denominator=6)


@given(shifts)
def test_shift_moves_F0_and_keeps_F1(kappa):
    for cfg in (PRODUCT, TENT):
        base = fit_invariants(cfg)
        moved = fit_invariants(shift_config(cfg, kappa))
        assert moved.F0 == base.F0 + kappa
        assert moved.F1 == base.F1
        assert norms(shift_config(cfg, kappa), 2).norm_pow == norms(cfg, 2).norm_pow


# -- stability ratio -----------------------------------------------------------


def test_stability_ratios():
    trivial = strong_stability_ratio(TRIVIAL)
    assert trivial.ratio is None and "phi + F0 t" in trivial.diagnosis
    assert strong_stability_ratio(PRODUCT).ratio == 0
    nc = strong_stability_ratio(NORMAL_CONE)
    assert nc.ratio > 0
    assert nc.ratio_squared == F(1, 64) / F(5, 192)
