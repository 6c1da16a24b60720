import numpy as np
import pytest
import sympy as sp

from dbc import poisson as po
from dbc.factorize import FlagPoint, flag_coords, right_factor, sample_double_cell, sample_flag
from dbc.rootdata import WeylElement, all_weyl, weyl_representative


def random_sl(n, rng):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return g / np.linalg.det(g) ** (1 / n)


# quadratic bracket on SL(2) entries (a b; c d)
A, B, C, D = sp.symbols("a b c d")
TABLE = {(A, B): A * B, (A, C): A * C, (B, D): B * D, (C, D): C * D, (A, D): 2 * B * C, (B, C): 0}


def sym_bracket(f, g):
    gens = [A, B, C, D]
    out = 0
    for x in gens:
        for y in gens:
            if (x, y) in TABLE:
                pxy = TABLE[(x, y)]
            elif (y, x) in TABLE:
                pxy = -TABLE[(y, x)]
            else:
                continue
            out += sp.diff(f, x) * sp.diff(g, y) * pxy
    return sp.expand(out)


def test_sl2_table_is_poisson_symbolically():
    gens = [A, B, C, D]
    for x in gens:
        for y in gens:
            for z in gens:
                jac = (sym_bracket(x, sym_bracket(y, z)) + sym_bracket(y, sym_bracket(z, x))
                       + sym_bracket(z, sym_bracket(x, y)))
                assert sp.simplify(jac) == 0
    det = A * D - B * C
    assert all(sym_bracket(det, x) == 0 for x in gens)


def test_sl2_numeric_brackets_match_table(rng):
    for _ in range(5):
        g = random_sl(2, rng)
        subs = dict(zip([A, B, C, D], g.ravel()))
        for (x, y), val in TABLE.items():
            i, j = divmod([A, B, C, D].index(x), 2)
            k, l = divmod([A, B, C, D].index(y), 2)
            got = po.bracket_eval(lambda m: m[i, j], lambda m: m[k, l], g)
            want = complex(sp.sympify(val).subs(subs))
            assert abs(got - want) <= 1e-9 * max(1, abs(want))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_structural_identities(n, rng):
    for _ in range(3):
        g, h = random_sl(n, rng), random_sl(n, rng)
        assert po.pist_eval(g).antisymmetry_defect() < 1e-12
        assert po.multiplicativity_defect(g, h) < 1e-9
        assert po.ad_invariance_defect(g) < 1e-10
    assert po.pist_eval(np.eye(n)).rank() == 0


def test_r_matrix_symmetric_part_is_casimir_element():
    r = po.r_st(3)
    S = r.symmetric_part()
    assert np.allclose(S, S.T)


@pytest.mark.parametrize("n", [2, 3])
def test_jacobi(n, rng):
    assert po.coordinate_jacobiator(random_sl(n, rng)) < 1e-7
    f1 = lambda g: g[0, 0] * g[1, 1]
    f2 = lambda g: g[0, 1] ** 2
    f3 = lambda g: g[1, 0] * g[0, 0] + g[1, 1]
    assert abs(po.jacobiator(f1, f2, f3, random_sl(n, rng))) < 1e-7


def test_bracket_routes_agree(rng):
    g = random_sl(3, rng)
    for (i, j, k, l) in [(0, 0, 0, 1), (1, 2, 2, 0), (2, 2, 0, 0)]:
        f1, f2 = (lambda m: m[i, j]), (lambda m: m[k, l])
        assert abs(po.bracket_eval(f1, f2, g) - po.bracket_tensor_direct(f1, f2, g)) < 1e-9


@pytest.mark.parametrize("n", [2, 3])
def test_pi1_routes_and_coisotropy(n, rng):
    for w in all_weyl(n):
        fp = sample_flag(w, rng)
        for side in ("left", "right"):
            a, b = po.pi1_routes(fp, side)
            assert np.allclose(a, b, atol=1e-9)
        assert po.coisotropy_defect(fp) < 1e-9
        assert po.pi1_eval(fp).antisymmetry_defect() < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_dressing_fields(n, rng):
    g = random_sl(n, rng)
    assert po.dressing_consistency_defect(g) < 1e-9
    assert max(po.dressing_membership_defect(g).values()) < 1e-9


@pytest.mark.parametrize("n", [2, 3])
def test_weak_pair_and_submersions(n, rng):
    for u in all_weyl(n):
        for v in all_weyl(n):
            p = sample_double_cell(u, v, rng)
            assert po.weak_pair_defect(p) < 1e-8
            assert po.leaf_submersion_ranks(p) == (u.length, v.length)


def test_embedding_I_v_is_poisson(rng):
    u, v = WeylElement((2, 3, 1)), WeylElement((3, 1, 2))
    p = sample_double_cell(u, v, rng)

    def fn(x):
        bm, _ = right_factor(x, p.vrep)
        return np.concatenate([flag_coords(x, p.urep), po.bminus_coords(bm)])

    def phi(x):
        out, size = po.linearize(fn, [(x, po.rt_seeds(x))])
        return po.coords_jacobian(out, size)

    def dst(y):
        return po.mixed_pi_eval(FlagPoint(u, np.asarray(y[:u.length]), p.urep),
                                po.bminus_from_coords(y[u.length:], 3))

    res = po.poisson_map_check(po.ChartMap("G", "flag x B_-", phi), po.pist_eval, dst, [p.g])
    assert res.passed, res.max_dev


def test_bminus_coordinates_round_trip(rng):
    from dbc.factorize import random_lower
    b = random_lower(3, rng)
    assert np.allclose(po.bminus_from_coords(po.bminus_coords(b), 3), b)


def test_check_result_json():
    r = po.CheckResult("x/y", "anchor", 2, [1, 2], None, 3, 1.23456789e-12, 1e-9, True)
    d = r.to_json()
    assert d["max_dev"] == 1.234568e-12 and d["pass"] is True and "note" not in d
