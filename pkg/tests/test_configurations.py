from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tcspectra.configurations import (
    ConfigurationError,
    DivisibilityError,
    FlagIdealConfig,
    MonomialIdeal,
    NormalConeConfig,
    ToricConfig,
    check_multiplicativity,
    dims_by_weight,
    flag_W_dim,
    homogeneous_monomials,
    ideal_power_mismatches,
    lambda_bounds,
    seshadri_fixed_point,
    weight,
)
from tcspectra.geometry import PLConcave, Polytope

F = Fraction
UNIT = Polytope.interval(0, 1)


def toric(P, *affines, rounding="ceil"):
    return ToricConfig(P, PLConcave(tuple(affines)), rounding)


PRODUCT = toric(UNIT, ((1,), 0))
HALF = toric(UNIT, ((F(1, 2),), 0))
TENT = toric(UNIT, ((1,), 0), ((-1,), 1))
NORMAL_CONE = NormalConeConfig(UNIT, 0, F(1, 2))
POINT_FLAG = FlagIdealConfig([[(0, 1)]], F(1, 2), 1)


# -- weights -----------------------------------------------------------------


def test_weight_examples():
    assert weight(PRODUCT, (3,), 4) == 3
    assert weight(HALF, (3,), 4) == 2
    assert weight(TENT, (1,), 3) == 1


def test_weight_outside_polytope_is_rejected():
    with pytest.raises(ConfigurationError):
        weight(PRODUCT, (5,), 4)


def test_floor_rounding():
    assert weight(toric(UNIT, ((F(1, 2),), 0), rounding="floor"), (3,), 4) == 1


def test_product_weights_are_monomial_degrees():
    assert dims_by_weight(PRODUCT, 3).as_dict() == {0: 1, 1: 1, 2: 1, 3: 1}


@pytest.mark.parametrize("k", [1, 2, 5])
def test_trivial_configuration_has_one_weight(k):
    cfg = toric(Polytope.standard_simplex(2), ((0, 0), 0))
    assert dims_by_weight(cfg, k).as_dict() == {0: (k + 1) * (k + 2) // 2}


def test_normal_cone_weights_match_order_of_vanishing():
    # the section x^j y^(k-j) vanishes to order j at the point; its weight is min(j - ck, 0)
    k = 4
    oracle = {}
    for j in range(k + 1):
        w = min(j - k // 2, 0)
        oracle[w] = oracle.get(w, 0) + 1
    assert oracle == {-2: 1, -1: 1, 0: 3}
    assert dims_by_weight(NORMAL_CONE, k).as_dict() == oracle
    assert dims_by_weight(NORMAL_CONE.as_toric(), k).as_dict() == oracle


def test_normal_cone_requires_even_levels():
    with pytest.raises(DivisibilityError):
        dims_by_weight(NORMAL_CONE, 3)


# -- bounds and Seshadri constants ---------------------------------------------


def test_lambda_bounds():
    assert lambda_bounds(PRODUCT) == (0, 1)
    assert lambda_bounds(NORMAL_CONE) == (F(-1, 2), 0)
    assert lambda_bounds(toric(UNIT, ((0,), F(2, 3)))) == (F(2, 3), F(2, 3))


def test_seshadri_constants():
    assert seshadri_fixed_point(UNIT, 0) == 1
    simplex = Polytope.standard_simplex(2)
    assert all(seshadri_fixed_point(simplex, i) == 1 for i in range(3))
    assert seshadri_fixed_point(Polytope.interval(0, 2), 0) == 2


def test_normal_cone_c_is_validated():
    with pytest.raises(ConfigurationError, match="c must be positive"):
        NormalConeConfig(UNIT, 0, 0)
    with pytest.raises(ConfigurationError, match="Seshadri constant 1"):
        NormalConeConfig(UNIT, 0, 1)


def test_redundant_piece_is_rejected():
    with pytest.raises(ConfigurationError):
        toric(UNIT, ((1,), 0), ((1,), 5))


# -- filtration properties -------------------------------------------------------


configs = st.sampled_from(
    [
        PRODUCT,
        HALF,
        TENT,
        toric(Polytope.standard_simplex(2), ((1, 0), 0), ((0, -1), F(1, 2))),
        toric(Polytope.box([0, 0], [2, 1]), ((F(1, 3), 1), F(-1, 2))),
        toric(UNIT, ((F(2, 3),), 0), ((F(-1, 2),), F(1, 2)), rounding="floor"),
    ]
)


@given(configs, st.integers(1, 12))
def test_weights_are_linearly_bounded(cfg, k):
    lo, hi = cfg.lambda_bounds()
    w_lo, w_hi = dims_by_weight(cfg, k).weight_range()
    assert lo * k - 1 <= w_lo and w_hi <= hi * k + 1


@given(configs, st.integers(1, 10))
def test_counting_function_matches_direct_count(cfg, k):
    table = dims_by_weight(cfg, k)
    pts = cfg.polytope.lattice_points(k)
    direct = [cfg.weight(u, k) for u in pts]
    assert table.total_dim == len(pts)
    lo, hi = table.weight_range()
    for lam in range(lo - 1, hi + 2):
        assert table.counting(lam) == sum(w >= lam for w in direct)
    f = [table.counting(lam) for lam in range(lo - 1, hi + 2)]
    assert all(b <= a for a, b in zip(f, f[1:]))


@given(configs, st.integers(1, 5), st.integers(1, 5))
def test_multiplicativity(cfg, k, k2):
    assert check_multiplicativity(cfg, k, k2)


def test_tent_multiplicativity_exhaustive():
    assert check_multiplicativity(TENT, 3, 3)


def test_linear_weights_are_additive():
    pts = UNIT.lattice_points(5)
    assert all(PRODUCT.weight((a[0] + b[0],), 10) == PRODUCT.weight(a, 5) + PRODUCT.weight(b, 5) for a in pts for b in pts)


def test_sampled_multiplicativity_on_a_square():
    cfg = toric(Polytope.box([0, 0], [1, 1]), ((1, 0), 0), ((0, 1), 0), ((-1, -1), F(3, 2)))
    assert check_multiplicativity(cfg, 7, 9, sample_count=2000, seed=3)


# -- flag ideals -----------------------------------------------------------------


def _product_members(ideals, exps):
    """All exponent vectors of generator products of ``prod J_j^{e_j}``."""
    sums = {(0,) * len(ideals[0].generators[0])}
    for ideal, e in zip(ideals, exps):
        for _ in range(e):
            sums = {tuple(a + b for a, b in zip(s, g)) for s in sums for g in ideal.generators}
    return sums


def brute_flag_weight(cfg: FlagIdealConfig, mono, k):
    ck = int(cfg.c * k)
    N = cfg.N
    best = -N * ck
    for exps in itertools.product(range(ck + 1), repeat=N):
        if sum(exps) > ck:
            continue
        score = sum((N - j) * e for j, e in enumerate(exps)) - N * ck
        if score <= best:
            continue
        members = _product_members(cfg.flag, exps)
        # chart-wise membership: for each chart some product element divides
        ok = all(any(all(m >= g for j, (m, g) in enumerate(zip(mono, member)) if j != i) for member in members) for i in range(len(mono)))
        if ok:
            best = score
    return best


FLAG_P2 = FlagIdealConfig([[(0, 3, 0), (0, 2, 1), (0, 1, 2), (0, 0, 3)], [(0, 1, 0), (0, 0, 1)]], F(1, 2), 2)


@pytest.mark.parametrize("cfg, k", [(POINT_FLAG, 2), (POINT_FLAG, 6), (FLAG_P2, 2), (FLAG_P2, 4)])
def test_flag_weights_match_generator_products(cfg, k):
    mono = cfg.monomials(k)
    fast = cfg.weights_of(mono, k)
    slow = [brute_flag_weight(cfg, tuple(int(a) for a in m), k) for m in mono]
    assert list(fast) == slow


def test_point_flag_dimension_matches_monomial_scan():
    # sections of O(4) vanishing to order >= ceil(-1/4 * 4) + 2 = 1 at the point: x1^b x0^(4-b), b >= 1
    scan = sum(1 for b in range(5) if b >= 1)
    assert scan == 4
    assert flag_W_dim(POINT_FLAG, F(-1, 4), 4) == scan
    assert flag_W_dim(POINT_FLAG, F(-1, 4), 4, mode="literal") == scan


@pytest.mark.parametrize("k", [2, 4, 6, 8])
def test_point_flag_agrees_with_normal_cone(k):
    for j in range(-k, k + 1):
        lam = F(j, k)
        assert flag_W_dim(POINT_FLAG, lam, k) == NORMAL_CONE.counting(math.ceil(lam * k), k)
        assert flag_W_dim(POINT_FLAG, lam, k, mode="literal") == NORMAL_CONE.counting(math.ceil(lam * k), k)
    assert dims_by_weight(POINT_FLAG, k) == dims_by_weight(NORMAL_CONE, k)


@pytest.mark.parametrize("mode", ["union", "literal"])
def test_flag_outer_cases(mode):
    cfg, k = FLAG_P2, 4
    full = len(cfg.monomials(k))
    assert flag_W_dim(cfg, -2 * cfg.c, k, mode) == full
    assert flag_W_dim(cfg, -3 * cfg.c, k, mode) == full
    assert flag_W_dim(cfg, cfg.c + F(1, 4), k, mode) == 0


def test_flag_limit_function():
    g = FLAG_P2.as_toric().g
    assert FLAG_P2.lambda_bounds() == (-1, 0)
    x = (F(1, 3), F(1, 4))
    assert g(x) == min(F(0), (x[0] + x[1]) / 2 - F(3, 4), x[0] + x[1] - 1)
    # level weights approach k g(u/k)
    k = 16
    for m in FLAG_P2.monomials(k)[::7]:
        u = tuple(F(int(a), k) for a in m[1:])
        assert abs(FLAG_P2.weight(m, k) - k * g(u)) <= 2


def test_flag_divisibility():
    with pytest.raises(DivisibilityError):
        dims_by_weight(FLAG_P2, 3)


def test_flag_must_increase():
    with pytest.raises(ConfigurationError):
        FlagIdealConfig([[(0, 1, 0), (0, 0, 1)], [(0, 2, 0), (0, 0, 2)]], F(1, 2), 1)


@pytest.mark.parametrize("ideal", [MonomialIdeal(((0, 1),)), MonomialIdeal(((0, 3, 0), (0, 2, 1), (0, 1, 2), (0, 0, 3))), MonomialIdeal(((0, 1, 0), (0, 0, 1)))])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_newton_region_matches_generator_products(ideal, m):
    top = max(sum(g) for g in ideal.generators)
    monos = np.concatenate([homogeneous_monomials(ideal.nvars, D) for D in range(m * top + 3)])
    assert ideal_power_mismatches(ideal, m, monos) == []


def test_oracle_detects_non_integrally_closed_ideal():
    # (x1^2, x2^2) misses x1 x2, which lies in its Newton region
    ideal = MonomialIdeal(((0, 2, 0), (0, 0, 2)))
    assert (0, 1, 1) in ideal_power_mismatches(ideal, 1, homogeneous_monomials(3, 2))


def test_homogeneous_monomials():
    assert homogeneous_monomials(3, 0).tolist() == [[0, 0, 0]]
    assert len(homogeneous_monomials(3, 4)) == 15
    assert homogeneous_monomials(1, 3).tolist() == [[3]]
