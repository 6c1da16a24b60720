import numpy as np
import pytest

from dbc.factorize import (CellPoint, bruhat_cell_of, cflag_coords, flag_canonical, flag_coords,
                           flag_matrix, left_factor, random_lower, right_factor,
                           sample_double_cell, sample_flag)
from dbc.numkernel import BigCellError, FactorizationError
from dbc.rootdata import WeylElement, all_weyl, weyl_representative


@pytest.mark.parametrize("n", [2, 3])
def test_sampled_points_lie_in_their_cells(n, rng):
    for u in all_weyl(n):
        for v in all_weyl(n):
            p = sample_double_cell(u, v, rng)
            assert bruhat_cell_of(p.g) == (u, v)
            assert np.isclose(np.linalg.det(p.g), 1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_both_factorizations(n, rng):
    pairs = [(u, v) for u in all_weyl(n) for v in all_weyl(n)]
    for k in rng.choice(len(pairs), size=min(len(pairs), 12), replace=False):
        u, v = pairs[k]
        p = sample_double_cell(u, v, rng)
        c, b = p.left()
        bm, cp = p.right()
        assert np.allclose(c @ b, p.g) and np.allclose(bm @ cp, p.g)
        assert np.allclose(np.tril(b, -1), 0) and np.allclose(np.triu(bm, 1), 0)
        # c lies in the unipotent chart of the cell times the representative
        assert np.allclose(flag_matrix(flag_coords(p.g, p.urep), p.urep), c)
        assert np.allclose(flag_matrix(cflag_coords(p.g, p.vrep), p.vrep), cp)


def test_identity_factors_trivially():
    e = WeylElement.identity(3)
    c, b = left_factor(np.eye(3), weyl_representative(e))
    assert np.allclose(c, np.eye(3)) and np.allclose(b, np.eye(3))


def test_wrong_cell_raises():
    s = weyl_representative(WeylElement.longest(2)).matrix
    with pytest.raises(FactorizationError):
        left_factor(s, weyl_representative(WeylElement.identity(2)))
    with pytest.raises(FactorizationError):
        right_factor(np.eye(2), weyl_representative(WeylElement.longest(2)))


@pytest.mark.parametrize("n", [2, 3])
def test_flag_charts_are_right_B_invariant(n, rng):
    for w in all_weyl(n):
        fp = sample_flag(w, rng)
        b = np.triu(random_lower(n, rng).T)
        m = fp.matrix() @ b
        assert np.allclose(flag_coords(m, fp.rep), fp.coords)
        again = flag_canonical(m)
        assert again.cell == w and again.same_as(fp, 1e-9)


def test_representative_change_moves_chart(rng):
    w = WeylElement.longest(3)
    p0 = sample_double_cell(w, w, 1, rep_seeds=(0, 0))
    p1 = sample_double_cell(w, w, 1, rep_seeds=(5, 5))
    assert np.allclose(p0.g, p1.g)
    assert np.allclose(p0.left()[0] @ p0.left()[1], p1.left()[0] @ p1.left()[1])


def test_detect_and_json():
    p = sample_double_cell(WeylElement((2, 1, 3)), WeylElement((1, 3, 2)), 3)
    q = CellPoint.detect(p.g)
    assert (q.u, q.v) == (p.u, p.v)
    d = q.to_json()
    assert d["u"] == [2, 1, 3] and d["v"] == [1, 3, 2]
