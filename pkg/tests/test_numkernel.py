import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbc.numkernel import (BigCellError, Jet, Tolerance, det, first_of, gaussian_decompose,
                           inv_lower, inv_upper, jet_eval, leading_minor, matrix_from_json,
                           matrix_to_json, second_of, seeded_matrix, solve_and_invert, value_of)


def cmat(seed, n):
    r = np.random.default_rng(seed)
    return r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6))
def test_gaussian_decompose_reconstructs(seed, n):
    g = cmat(seed, n)
    lo, d, up = gaussian_decompose(g)
    assert np.allclose(lo @ d @ up, g, atol=1e-9 * np.abs(g).max() * n)
    assert np.allclose(np.triu(lo, 1), 0) and np.allclose(np.diag(lo), 1)
    assert np.allclose(np.tril(up, -1), 0) and np.allclose(np.diag(up), 1)
    assert np.allclose(d, np.diag(np.diag(d)))


def test_gaussian_decompose_outside_big_cell():
    s = np.array([[0, -1], [1, 0]], dtype=complex)
    with pytest.raises(BigCellError):
        gaussian_decompose(s)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6))
def test_det_and_minors_match_numpy(seed, n):
    g = cmat(seed, n)
    assert np.isclose(det(g), np.linalg.det(g), rtol=1e-10)
    for k in range(1, n + 1):
        assert np.isclose(leading_minor(g, k), np.linalg.det(g[:k, :k]), rtol=1e-9)


def test_triangular_inverses(rng):
    lo = np.tril(rng.normal(size=(4, 4))) + 3 * np.eye(4)
    up = lo.T.copy()
    assert np.allclose(inv_lower(lo) @ lo, np.eye(4))
    assert np.allclose(inv_upper(up) @ up, np.eye(4))
    g = lo @ up
    assert np.allclose(solve_and_invert(g) @ g, np.eye(4))


def test_jet_first_and_second_derivatives():
    x = Jet.seed(2.0, 0, 2, order=2)
    y = Jet.seed(3.0, 1, 2, order=2)
    f = x * x * y + 1 / y
    assert np.isclose(f.value, 12 + 1 / 3)
    assert np.allclose(f.first, [12, 4 - 1 / 9])
    assert np.allclose(f.second, [[6, 4], [4, 2 / 27]])


def test_jet_matrix_derivative_matches_finite_difference(rng):
    g = cmat(5, 3)
    dirs = [cmat(6, 3), cmat(7, 3)]
    f = lambda m: det(m @ m)
    j = jet_eval(f, g, dirs)
    h = 1e-6
    for k, d in enumerate(dirs):
        fd = (f(g + h * d) - f(g - h * d)) / (2 * h)
        assert np.isclose(j.first[k], fd, rtol=1e-6)


def test_seeded_matrix_values():
    g = cmat(1, 2)
    m = seeded_matrix(g, [np.eye(2)], order=2)
    assert np.allclose(np.asarray(value_of(m), dtype=complex), g)
    assert np.allclose(first_of(m[0, 0], 1), [1.0])
    assert np.allclose(second_of(m[0, 0], 1), [[0.0]])


def test_matrix_json_round_trip():
    g = cmat(3, 3)
    assert np.allclose(matrix_from_json(matrix_to_json(g)), g)
    with pytest.raises(ValueError):
        matrix_from_json({"n": 2, "re": [[1, 2]]})
    with pytest.raises(ValueError):
        matrix_from_json({"re": [[1]]})


def test_tolerance_validation():
    with pytest.raises(ValueError):
        Tolerance(tol_eq=0)
