import numpy as np
import pytest

from dbc import groupoid as gp
from dbc.factorize import flag_canonical, random_lower, sample_double_cell, sample_flag
from dbc.numkernel import ComposabilityError, MomentMatchError
from dbc.rootdata import WeylElement, all_weyl, weyl_representative


def element(v, rng, seed=0):
    rep = weyl_representative(v, seed)
    p = sample_double_cell(v, v, rng, rep_seeds=(seed, seed))
    return gp.GroupoidElement.of(p.g, v, rep)


@pytest.mark.parametrize("v", all_weyl(3), ids=str)
def test_groupoid_axioms(v, rng):
    e = element(v, rng)
    a, b, c = gp.composable_chain(e, 3, rng)
    assert np.allclose(gp.gpd_mul(gp.gpd_mul(a, b), c).g, gp.gpd_mul(a, gp.gpd_mul(b, c)).g)
    th, ta, inv, ident = gp.gpd_maps(a)
    assert np.allclose(gp.gpd_mul(ident, a).g, a.g)
    assert np.allclose(gp.gpd_mul(a, gp.identity_at(ta)).g, a.g)
    assert np.allclose(gp.gpd_mul(a, inv).g, ident.g)
    assert gp.gpd_inverse_residual(a) < 1e-10
    m = gp.gpd_mul(a, b)
    assert m.theta().same_as(a.theta(), 1e-9) and m.tau().same_as(b.tau(), 1e-9)
    assert gp.gpd_mul_residual(a, b) < 1e-10


def test_non_composable_pair_raises(rng):
    w0 = WeylElement.longest(3)
    a, b = element(w0, rng), element(w0, rng)
    with pytest.raises(ComposabilityError):
        gp.gpd_mul(a, b)


def test_theta_fiber_sampler(rng):
    w0 = WeylElement.longest(3)
    y = sample_flag(w0, rng)
    h = gp.sample_theta_fiber(y, rng)
    assert h.theta().same_as(y, 1e-9)
    g = gp.sample_tau_fiber(y, rng)
    assert g.tau().same_as(y, 1e-9)


@pytest.mark.parametrize("n", [2, 3])
def test_twist(n, rng):
    for u in all_weyl(n):
        for v in all_weyl(n):
            p = sample_double_cell(u, v, rng)
            t = gp.twist(p)
            assert (t.u, t.v) == (v, u)
            assert gp.cell_of(t.g) == (v, u)
            assert gp.twist_residual(p) < 1e-10
            assert np.allclose(gp.twist(t).g, p.g)


@pytest.mark.parametrize("n", [2, 3])
def test_actions_commute(n, rng):
    for u in all_weyl(n):
        for v in all_weyl(n):
            x = sample_double_cell(u, v, rng)
            g = gp.sample_tau_fiber(x.flag(), rng)
            h = gp.sample_theta_fiber(x.coflag(), rng)
            gx, xh = gp.act_left(g, x), gp.act_right(x, h)
            assert gp.cell_of(gx.g) == (u, v) and gp.cell_of(xh.g) == (u, v)
            assert np.allclose(gp.act_right(gx, h).g, gp.act_left(g, xh).g)
            assert gp.act_left_residual(g, x) < 1e-9 and gp.act_right_residual(x, h) < 1e-9


def test_moment_mismatch_raises(rng):
    w0 = WeylElement.longest(2)
    x = sample_double_cell(w0, w0, rng)
    with pytest.raises(MomentMatchError):
        gp.act_left(element(w0, rng), x)


def test_action_groupoid_and_embeddings(rng):
    u, v = WeylElement((3, 1, 2)), WeylElement((2, 3, 1))
    p = sample_double_cell(u, v, rng)
    I, J = gp.embed_Iv(p), gp.embed_Jv(p)
    assert gp.in_F(I, u, v) and gp.in_F(J, v, u)
    th, ta, inv = gp.action_gpd(I)
    assert ta.same_as(p.coflag(), 1e-9)
    prod = gp.action_gpd_mul(I, inv)
    assert np.allclose(prod.b_minus, np.eye(3))


def test_embedding_intertwines_multiplication(rng):
    v = WeylElement.longest(3)
    e = element(v, rng)
    h = gp.sample_theta_fiber(e.tau(), rng)
    lhs = gp.embed_Iv(gp.gpd_mul(e, h).point)
    rhs = gp.action_gpd_mul(gp.embed_Iv(e.point), gp.embed_Iv(h.point))
    assert lhs.flag.same_as(rhs.flag, 1e-9) and np.allclose(lhs.b_minus, rhs.b_minus)


def test_representative_independence(rng):
    v = WeylElement((2, 3, 1))
    rep0, rep1 = weyl_representative(v), weyl_representative(v, 4)
    t = rep1.matrix @ np.linalg.inv(rep0.matrix)
    assert np.allclose(t, np.diag(np.diag(t)))
    e = element(v, rng)
    h = gp.sample_theta_fiber(e.tau(), rng)
    et, ht = gp.GroupoidElement.of(t @ e.g, v, rep1), gp.GroupoidElement.of(t @ h.g, v, rep1)
    assert np.allclose(gp.gpd_mul(et, ht).g, t @ gp.gpd_mul(e, h).g)


@pytest.mark.parametrize("v", [WeylElement.longest(2), WeylElement((2, 3, 1)), WeylElement.longest(3)], ids=str)
def test_graph_coisotropy(v, rng):
    e = element(v, rng)
    defect, rank, expected = gp.mul_graph_defect(e, rng)
    assert defect < 1e-8 and rank == expected
    x = sample_double_cell(v, v, rng)
    for side in ("left", "right"):
        defect, rank, expected = gp.action_graph_defect(x, side, rng)
        assert defect < 1e-8 and rank == expected


def test_x_alpha_left_invariance(rng):
    u, v = WeylElement.longest(3), WeylElement((2, 1, 3))
    p = sample_double_cell(u, v, rng)
    a = gp.embed_Iv(p)
    b = gp.ActionGroupoidElement(gp.action_tau(a), random_lower(3, rng))
    assert gp.x_alpha_defect(a, b) < 1e-8
