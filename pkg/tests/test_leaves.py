import numpy as np
import pytest

from dbc import leaves as lv
from dbc.factorize import CellPoint, sample_double_cell
from dbc.groupoid import act_left, act_right, gpd_maps, gpd_mul, twist
from dbc.rootdata import TorusElement, WeylElement, all_weyl, random_torus

PAIRS3 = [(u, v) for u in all_weyl(3) for v in all_weyl(3)]


@pytest.mark.parametrize("u,v", PAIRS3, ids=lambda w: str(w))
def test_leaf_invariants(u, v, rng):
    p = sample_double_cell(u, v, rng)
    assert lv.leaf_rank(p) == lv.expected_leaf_rank(u, v)
    assert lv.casimir_minor_defect(p) < 1e-8 and lv.casimir_chi_defect(p) < 1e-8
    assert lv.square_identity_defect(p) < 1e-8
    assert lv.leaf_tangency_defect(p) < 1e-9
    assert np.allclose(lv.chi_rep(p).array(), lv.chi_from_factors(p).array())
    c = lv.leaf_census(u, v)
    assert c.quotient_order() == 2 ** len(lv.I_uv(u, v)) == c.count_per_level


def test_chi_equivariance(rng):
    u = v = WeylElement.longest(3)
    p = sample_double_cell(u, v, rng)
    a = random_torus(3, rng)
    q = CellPoint.make(p.g @ a.matrix(), u, v)
    assert np.allclose(lv.chi_rep(q).array(), ((a ** 2) * lv.chi_rep(p)).array())


def test_torus_subgroup_membership(rng):
    for u in all_weyl(3):
        for v in all_weyl(3):
            t = random_torus(3, rng)
            assert lv.Tuv_member(lv.Tuv_element(t, u, v), u, v)
    u = WeylElement.identity(3)
    assert lv.Tuv_member(TorusElement.identity(3), u, u)
    assert not lv.Tuv_member(random_torus(3, rng), u, u)


def test_same_leaf_distinguishes_leaves(rng):
    u = v = WeylElement.longest(2)
    p, q = sample_double_cell(u, v, rng), sample_double_cell(u, v, rng)
    assert lv.same_leaf(p, p)
    assert not lv.same_leaf(p, q)
    with pytest.raises(ValueError):
        lv.same_leaf(p, sample_double_cell(u, v, 3, rep_seeds=(1, 1)))


@pytest.mark.parametrize("v", all_weyl(3), ids=str)
def test_sigma_leaf_groupoid(v, rng):
    e = lv.sample_sigma(v, rng)
    assert lv.in_sigma(e, 1e-8)
    assert lv.leaf_rank(e.point) == 2 * v.length
    h = lv.sample_sigma_theta_fiber(e.tau(), rng)
    assert lv.in_sigma(gpd_mul(e, h), 1e-8) and lv.in_sigma(gpd_maps(e)[2], 1e-8)


@pytest.mark.parametrize("u,v", PAIRS3[::5], ids=lambda w: str(w))
def test_actions_preserve_leaves(u, v, rng):
    x = sample_double_cell(u, v, rng)
    g = lv.sample_sigma_tau_fiber(x.flag(), rng)
    h = lv.sample_sigma_theta_fiber(x.coflag(), rng)
    assert lv.same_leaf(x, act_left(g, x), 1e-8)
    assert lv.same_leaf(x, act_right(x, h), 1e-8)
    y = act_left(g, x)
    assert lv.same_leaf(twist(x), twist(y), 1e-8)


def test_dressing_flow_stays_on_leaf(rng):
    u, v = WeylElement((2, 3, 1)), WeylElement((3, 1, 2))
    p = sample_double_cell(u, v, rng)
    xi = lv.random_dual_element(3, rng, 0.05)
    q = CellPoint.make(lv.dressing_flow(p.g, xi), u, v)
    assert not np.allclose(p.g, q.g)
    assert lv.same_leaf(p, q, 1e-5)
    assert lv.leaf_rank(p) == lv.leaf_rank(q)
    assert lv.dressing_span_rank(p.g) == lv.leaf_rank(p)


def test_leaf_reports():
    w0 = WeylElement.longest(3)
    assert lv.leaf_groupoid_check(w0, 1, samples=2)["pass"]
    rep = lv.leaf_report(WeylElement((2, 1, 3)), w0, 1, samples=2)
    assert rep["pass"]
