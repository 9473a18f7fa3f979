from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tcspectra.configurations import NormalConeConfig, ToricConfig
from tcspectra.geometry import PLConcave, Polytope, integrate_polynomial
from tcspectra.kebounds import (
    INF,
    FanoModel,
    _similarity,
    calabi_bound_1d,
    conjugate_exponent,
    density_ratio,
    fano_model,
    is_reflexive,
    quadrature,
    scalar_curvature_1d,
    transport_config,
    verify_fano_bound,
)
from tcspectra.potentials import GuilleminPotential, perturbed_family
from tcspectra.spectra import fit_invariants, norms

F = Fraction
UNIT = Polytope.interval(0, 1)
PRODUCT = ToricConfig(UNIT, PLConcave((((1,), 0),)))
TRIVIAL = ToricConfig(UNIT, PLConcave((((0,), 0),)))
NORMAL_CONE = NormalConeConfig(UNIT, 0, F(1, 2))
SIMPLEX = Polytope.standard_simplex(2)
PRODUCT_P2 = ToricConfig(SIMPLEX, PLConcave((((1, 0), 0),)))


@pytest.fixture(scope="module")
def models():
    return {name: fano_model(name, perturbations=3) for name in ("P1", "P2", "blowup")}


def test_models_are_reflexive(models):
    for m in models.values():
        assert is_reflexive(m.polytope)
    assert not is_reflexive(UNIT)
    with pytest.raises(ValueError):
        FanoModel("unit", UNIT)
    with pytest.raises(ValueError):
        fano_model("P3")


def test_model_volumes():
    assert fano_model("P1").polytope.volume() == 2
    assert fano_model("P2").polytope.volume() == F(9, 2)
    assert fano_model("blowup").polytope.volume() == 4


@pytest.mark.parametrize("P", [UNIT, SIMPLEX, Polytope.from_vertices([(-1, 0), (0, -1), (2, -1), (-1, 2)])])
def test_quadrature_integrates_polynomials(P):
    pts, wts = quadrature(P, order=6, subdivisions=2)
    assert wts.sum() == pytest.approx(float(P.volume()), rel=1e-13)
    for alpha in [(1,), (3,)] if P.dim == 1 else [(1, 0), (2, 1), (0, 4)]:
        exact = float(integrate_polynomial(P, {alpha: F(1)}))
        approx = float(np.sum(wts * np.prod(pts**np.array(alpha), axis=1)))
        assert approx == pytest.approx(exact, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("name", ["P1", "P2", "blowup"])
def test_guillemin_metric_is_kahler_einstein_only_on_symmetric_models(name):
    dr = density_ratio(fano_model(name))
    assert np.sum(dr.weights * dr.ratio) == pytest.approx(float(fano_model(name).polytope.volume()), rel=1e-12)
    if name in ("P1", "P2"):
        assert dr.norm(INF) <= 1e-3
    else:
        assert dr.norm(INF) > 1e-2


@pytest.mark.parametrize("name", ["P1", "P2"])
def test_perturbed_metrics_are_not_einstein(models, name):
    for i in range(1, len(models[name].metrics)):
        assert density_ratio(models[name], i).norm(2) > 1e-3


def test_perturbed_family_is_convex():
    for u in perturbed_family(SIMPLEX, 3, seed=7):
        w = np.random.default_rng(1).dirichlet(np.ones(3), size=200)
        assert u.min_hessian_eigenvalue(w[:, :2]) > 0


def test_gradients_match_finite_differences():
    (u,) = perturbed_family(SIMPLEX, 1, seed=3)
    x = np.array([[0.2, 0.3], [0.5, 0.1], [0.1, 0.7]])
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (u.value(x + e) - u.value(x - e)) / (2 * h)
        assert np.allclose(fd, u.gradient(x)[:, i], atol=1e-6)
        fd2 = (u.gradient(x + e) - u.gradient(x - e)) / (2 * h)
        assert np.allclose(fd2, u.hessian(x)[:, :, i], atol=1e-5)


def test_conjugate_exponents():
    assert conjugate_exponent(1) == INF
    assert conjugate_exponent(INF) == 1
    assert conjugate_exponent(2) == 2
    assert conjugate_exponent(4) == pytest.approx(4 / 3)


def test_similarity():
    P1 = fano_model("P1").polytope
    assert _similarity(UNIT, P1) == (2, (F(-1),))
    P2 = fano_model("P2").polytope
    assert _similarity(SIMPLEX, P2) == (3, (F(-1), F(-1)))
    assert _similarity(SIMPLEX, fano_model("blowup").polytope) is None


@pytest.mark.parametrize("cfg,name", [(PRODUCT, "P1"), (NORMAL_CONE, "P1"), (PRODUCT_P2, "P2")])
def test_transport_scales_F0_and_keeps_F1(cfg, name):
    moved, r, _ = transport_config(cfg, fano_model(name).polytope)
    a, b = fit_invariants(cfg), fit_invariants(moved)
    assert b.F0 == r * a.F0
    assert b.F1 == a.F1


def test_transport_needs_a_similar_polytope():
    with pytest.raises(ValueError):
        transport_config(PRODUCT_P2, fano_model("blowup").polytope)


@pytest.mark.parametrize("p", [1, 2, 4, INF])
@pytest.mark.parametrize("cfg,name", [(PRODUCT, "P1"), (NORMAL_CONE, "P1"), (PRODUCT_P2, "P2")])
def test_bound_holds_on_every_metric(models, cfg, name, p):
    model = models[name]
    for i in range(len(model.metrics)):
        rep = verify_fano_bound(model, cfg, p, i)
        assert rep.holds, rep
        assert rep.diagnosis is None


def test_bound_is_nontrivial_on_the_blowup(models, corpus):
    cfg = corpus["blowup_product"].config
    model = models["blowup"]
    for i in range(len(model.metrics)):
        rep = verify_fano_bound(model, cfg, 2, i)
        assert rep.F1 == F(1, 12)
        assert rep.rhs > 0 and rep.holds


def test_trivial_norm_is_diagnosed():
    rep = verify_fano_bound(fano_model("P1"), TRIVIAL, 2)
    assert rep.holds and rep.norm_T == 0
    assert "norm vanishes" in rep.diagnosis


def test_precomputed_ratio_is_reused():
    model = fano_model("P1", perturbations=1)
    dr = density_ratio(model, 1)
    assert verify_fano_bound(model, PRODUCT, 2, 1, ratio=dr) == verify_fano_bound(model, PRODUCT, 2, 1)


# -- scalar curvature on the line ---------------------------------------------------


def test_fubini_study_scalar_curvature_is_constant():
    x = np.linspace(0.01, 0.99, 50)
    assert np.allclose(scalar_curvature_1d(GuilleminPotential(UNIT), x), 2.0, atol=1e-9)


@given(st.floats(0.05, 0.95))
def test_scalar_curvature_formula_against_finite_differences(x0):
    (u,) = perturbed_family(UNIT, 1, seed=11)
    h = 1e-3
    xs = x0 + h * np.arange(-2, 3)

    def inv_u2(x):
        return 1.0 / u.derivatives_1d(np.asarray(x).reshape(-1, 1))[0]

    fd = -(inv_u2(xs[3]) - 2 * inv_u2(xs[2]) + inv_u2(xs[1])) / h**2
    assert scalar_curvature_1d(u, np.array([x0]))[0] == pytest.approx(fd[0], rel=1e-4, abs=1e-4)


@pytest.mark.parametrize("p", [1, 2, 4, INF])
def test_calabi_bound(p):
    for u in [GuilleminPotential(UNIT)] + perturbed_family(UNIT, 3, seed=2):
        for cfg in (PRODUCT, NORMAL_CONE):
            rep = calabi_bound_1d(u, cfg, p)
            assert rep.holds and rep.holder_holds


def test_calabi_bound_is_tight_at_constant_curvature():
    rep = calabi_bound_1d(GuilleminPotential(UNIT), PRODUCT, 2)
    assert rep.lhs <= 1e-9 and rep.rhs == 0


def test_calabi_needs_matching_polytope():
    with pytest.raises(ValueError):
        calabi_bound_1d(GuilleminPotential(Polytope.interval(0, 2)), PRODUCT, 2)
    with pytest.raises(ValueError):
        calabi_bound_1d(GuilleminPotential(SIMPLEX), PRODUCT_P2, 2)


def test_norms_used_by_the_bound():
    moved, _, _ = transport_config(PRODUCT, fano_model("P1").polytope)
    # g(x) = 2 (x+1)/2 on [-1, 1]: centred at 1, L2 norm^2 = int x^2 = 2/3
    assert norms(moved, 2).norm_pow == F(2, 3)


@pytest.mark.parametrize("p", [1, 2, 4, INF])
def test_holder_step_never_reverses(models, p):
    # |int (g - F0)(ratio - 1)| <= ||g - F0||_p ||ratio - 1||_q on every sampled pair
    for cfg, name in [(PRODUCT, "P1"), (NORMAL_CONE, "P1"), (PRODUCT_P2, "P2")]:
        for i in range(len(models[name].metrics)):
            rep = verify_fano_bound(models[name], cfg, p, i)
            assert abs(rep.pairing) <= rep.norm_T * rep.lhs * (1 + 1e-9) + 1e-12
