import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbc.rootdata import (TorusElement, WeylElement, all_weyl, bruhat_leq, bruhat_leq_subword,
                          enumerate_order2, fixed_simples, fundamental_weight, kernel_characters,
                          lattice_kernel, parse_weyl, random_torus, smith_normal_form,
                          torus_conjugate, torus_subgroup_dim, weyl_representative)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_weyl_group_laws(n):
    W = all_weyl(n)
    e = WeylElement.identity(n)
    assert len(W) == len(set(W)) == np.prod(range(1, n + 1))
    for a in W:
        assert a * a.inverse() == e
        assert a.length == len(a.inversions)
        assert WeylElement.from_word(n, a.reduced_word) == a
        assert len(a.reduced_word) == a.length
    assert WeylElement.longest(n).length == n * (n - 1) // 2


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bruhat_order_two_routes(n):
    W = all_weyl(n)
    for a, b in itertools.product(W, W):
        assert bruhat_leq(a, b) == bruhat_leq_subword(a, b)
    w0 = WeylElement.longest(n)
    assert all(bruhat_leq(a, w0) for a in W)


def test_fixed_simples():
    assert fixed_simples(WeylElement.identity(3)) == frozenset({1, 2})
    assert fixed_simples(WeylElement.longest(3)) == frozenset()
    assert fixed_simples(WeylElement((2, 1, 3))) == frozenset({2})


@pytest.mark.parametrize("n", [2, 3, 4])
def test_representatives(n):
    for w in all_weyl(n):
        for seed in (0, 3):
            rep = weyl_representative(w, seed)
            m = rep.matrix
            assert np.isclose(np.linalg.det(m), 1)
            support = (np.abs(m) > 1e-12).astype(int)
            assert np.array_equal(support, w.matrix().astype(int))
            assert np.allclose(rep.inverse_matrix @ m, np.eye(n))


def test_canonical_simple_representative():
    rep = weyl_representative(WeylElement.simple(3, 1))
    assert np.allclose(rep.matrix, [[0, -1, 0], [1, 0, 0], [0, 0, 1]])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.integers(-6, 6), min_size=4, max_size=4), min_size=1, max_size=4))
def test_smith_normal_form(rows):
    m = np.array(rows, dtype=object)
    U, D, V = smith_normal_form(m)
    assert (U.dot(m).dot(V) == D).all()
    assert abs(round(np.linalg.det(U.astype(float)))) == 1
    assert abs(round(np.linalg.det(V.astype(float)))) == 1
    diag = [D[i, i] for i in range(min(D.shape))]
    off = D.copy()
    for i in range(min(D.shape)):
        off[i, i] = 0
    assert not off.any()
    nz = [d for d in diag if d != 0]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    for k in lattice_kernel(np.array(rows, dtype=int)):
        assert not np.any(np.array(rows, dtype=int) @ k)


def test_torus_subgroup_dims():
    n = 3
    for u in all_weyl(n):
        assert torus_subgroup_dim(u, u) == 0
        assert kernel_characters(u, u) == [] or all(not c.is_trivial() for c in kernel_characters(u, u))
    assert torus_subgroup_dim(WeylElement.identity(2), WeylElement.longest(2)) == 1


def test_torus_helpers(rng):
    t = random_torus(3, rng)
    assert np.isclose(np.prod(t.array()), 1)
    assert (t * t.inverse()).close_to(TorusElement.identity(3), 1e-12)
    w = WeylElement((2, 3, 1))
    c = torus_conjugate(t, w)
    assert np.allclose(c.array(), [t.array()[w(i + 1) - 1] for i in range(3)])
    assert np.isclose(fundamental_weight(3, 2)(t), t.array()[0] * t.array()[1])
    assert len(enumerate_order2(3)) == 4


def test_parse_weyl():
    assert parse_weyl(3, "e") == WeylElement.identity(3)
    assert parse_weyl(3, "w0") == WeylElement.longest(3)
    assert parse_weyl(3, {"word": [1, 2]}) == WeylElement.from_word(3, [1, 2])
    assert parse_weyl(3, "[2,3,1]") == WeylElement((2, 3, 1))
    with pytest.raises(ValueError):
        parse_weyl(3, [1, 2])
