"""The standard r-matrix, the bivectors built from it, and Poisson-map verifiers.

Conventions
-----------
* Tangent vectors at ``g`` are written ``x g`` with ``x`` in ``sl(n)`` (the
  right-trivialized frame).  Coefficients refer to :func:`sl_basis`.
* ``Bivector.mat`` always holds brackets of chart coordinates,
  ``mat[i, j] = {x_i, x_j}``.  With ``pi = r^L - r^R`` read as a tensor, the
  bracket pairs it against ``df1 ^ df2 = df1 (x) df2 - df2 (x) df1``, so
  ``mat = 2 * (tensor coefficients)``.  This is the normalization under which
  ``{g11, g12} = g11 g12`` on SL(2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .factorize import (FlagPoint, cflag_coords, flag_coords, flag_matrix)
from .numkernel import (DEFAULT_TOL, Jet, Tolerance, first_of, jet_eval,
                        second_of, seeded_matrix, solve_and_invert, value_of)

BRACKET_FACTOR = 2.0


# ---------------------------------------------------------------------------
# sl(n) basis and the r-matrix


@dataclass(frozen=True)
class SlBasis:
    n: int
    mats: np.ndarray          # (d, n, n)
    duals: np.ndarray         # (d, n, n), tr(mats[a] @ duals[b]) = delta_ab
    extract: np.ndarray       # (d, n*n), coef(x) = extract @ x.ravel()
    labels: tuple[str, ...]
    n_cartan: int
    upper: tuple[int, ...]    # indices of e_ij, i < j
    lower: tuple[int, ...]    # indices of e_ji, i < j (same order as ``upper``)

    @property
    def dim(self) -> int:
        return self.mats.shape[0]

    def coef(self, x) -> np.ndarray:
        x = np.asarray(x)
        return self.extract @ x.reshape(-1)

    def matrix(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=complex), self.mats, axes=1)


def cartan_basis(n: int) -> list[np.ndarray]:
    """Trace-orthonormal basis of traceless diagonal matrices."""
    out = []
    for k in range(1, n):
        d = np.zeros(n)
        d[:k] = 1.0
        d[k] = -k
        out.append(np.diag(d / np.sqrt(k * (k + 1))))
    return out


def unit(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


@lru_cache(maxsize=None)
def sl_basis(n: int) -> SlBasis:
    mats, duals, labels = [], [], []
    for k, h in enumerate(cartan_basis(n), start=1):
        mats.append(h.astype(complex))
        duals.append(h.astype(complex))
        labels.append(f"h{k}")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    upper, lower = [], []
    for i, j in pairs:
        upper.append(len(mats))
        mats.append(unit(n, i, j))
        duals.append(unit(n, j, i))
        labels.append(f"e{i + 1}{j + 1}")
    for i, j in pairs:
        lower.append(len(mats))
        mats.append(unit(n, j, i))
        duals.append(unit(n, i, j))
        labels.append(f"e{j + 1}{i + 1}")
    mats = np.array(mats)
    duals = np.array(duals)
    # tr(x D) = sum_ij x_ij D_ji
    extract = np.array([d.T.reshape(-1) for d in duals])
    for arr in (mats, duals, extract):
        arr.setflags(write=False)
    return SlBasis(n, mats, duals, extract, tuple(labels), n - 1, tuple(upper), tuple(lower))


@dataclass(frozen=True)
class RMatrix:
    n: int
    terms: tuple[tuple[np.ndarray, np.ndarray], ...] = field(repr=False)

    @property
    def coef_matrix(self) -> np.ndarray:
        return _r_coef(self.n)

    def symmetric_part(self) -> np.ndarray:
        R = self.coef_matrix
        return 0.5 * (R + R.T)


@lru_cache(maxsize=None)
def r_st(n: int) -> RMatrix:
    """``r_st = 1/2 sum h_i (x) h_i + sum_{i<j} e_ji (x) e_ij``."""
    terms = [(0.5 * h, h) for h in cartan_basis(n)]
    terms += [(unit(n, j, i), unit(n, i, j)) for i in range(n) for j in range(i + 1, n)]
    return RMatrix(n, tuple(terms))


@lru_cache(maxsize=None)
def _r_coef(n: int) -> np.ndarray:
    bas = sl_basis(n)
    R = np.zeros((bas.dim, bas.dim), dtype=complex)
    for a, b in r_st(n).terms:
        R += np.outer(bas.coef(a), bas.coef(b))
    R.setflags(write=False)
    return R


def dual_bases(n: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Basis ``x_i`` of ``b_-`` and the dual basis ``xi_i`` of ``b``.

    The pairing is ``<x_- + x_0, y_+ + y_0> = tr(x_- y_+) + 2 tr(x_0 y_0)``.
    """
    hs = cartan_basis(n)
    xs = [h / np.sqrt(2) for h in hs]
    xis = [h / np.sqrt(2) for h in hs]
    for i in range(n):
        for j in range(i + 1, n):
            xs.append(unit(n, j, i))
            xis.append(unit(n, i, j))
    return xs, xis


def ad_matrix(g) -> np.ndarray:
    """Matrix of ``Ad_g`` on ``sl(n)`` in the basis coefficients."""
    g = np.asarray(g, dtype=complex)
    bas = sl_basis(g.shape[0])
    gi = np.linalg.inv(g)
    conj = np.einsum("ij,ajk,kl->ail", g, bas.mats, gi)
    return bas.extract @ conj.reshape(bas.dim, -1).T


# ---------------------------------------------------------------------------
# bivectors


@dataclass(frozen=True)
class Bivector:
    chart_id: str
    mat: np.ndarray

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def antisymmetry_defect(self) -> float:
        nrm = np.linalg.norm(self.mat)
        return float(np.linalg.norm(self.mat + self.mat.T) / max(nrm, 1.0))

    def rank(self, tol: Tolerance = DEFAULT_TOL) -> int:
        if self.mat.size == 0:
            return 0
        s = np.linalg.svd(self.mat, compute_uv=False)
        return int(np.sum(s > tol.tol_rank * max(s[0], 1.0) * 10))


def pist_tensor(g) -> np.ndarray:
    """Tensor coefficients of ``(Ad_g (x) Ad_g) r_st - r_st``."""
    n = np.asarray(g).shape[0]
    A = ad_matrix(g)
    R = _r_coef(n)
    return A @ R @ A.T - R


def pist_eval(g) -> Bivector:
    return Bivector("right-trivialized-G", BRACKET_FACTOR * pist_tensor(g))


def rt_seeds(g) -> list[np.ndarray]:
    g = np.asarray(g, dtype=complex)
    return [x @ g for x in sl_basis(g.shape[0]).mats]


def rt_gradient(f: Callable, g, order: int = 1) -> np.ndarray:
    """Differential of an observable in the right-trivialized frame."""
    return jet_eval(f, g, rt_seeds(g), order=order).first


def bracket_eval(f1: Callable, f2: Callable, g) -> complex:
    P = pist_eval(g).mat
    return complex(rt_gradient(f1, g) @ P @ rt_gradient(f2, g))


def bracket_tensor_direct(f1: Callable, f2: Callable, g) -> complex:
    """Independent route: sum over r-matrix terms of left/right derivatives.

    ``{f1, f2} = 2 sum_k (L_{a_k} f1)(L_{b_k} f2) - (R_{a_k} f1)(R_{b_k} f2)``
    with ``L_x f = d/dt f(g exp(tx))`` and ``R_x f = d/dt f(exp(tx) g)``.
    """
    g = np.asarray(g, dtype=complex)
    terms = r_st(g.shape[0]).terms
    left = [g @ a for a, _ in terms] + [g @ b for _, b in terms]
    right = [a @ g for a, _ in terms] + [b @ g for _, b in terms]
    k = len(terms)
    d1l, d2l = jet_eval(f1, g, left).first, jet_eval(f2, g, left).first
    d1r, d2r = jet_eval(f1, g, right).first, jet_eval(f2, g, right).first
    out = np.sum(d1l[:k] * d2l[k:]) - np.sum(d1r[:k] * d2r[k:])
    return complex(BRACKET_FACTOR * out)


# ---------------------------------------------------------------------------
# linearization helpers


def linearize(func: Callable, inputs: Sequence[tuple[np.ndarray, Sequence[np.ndarray]]]):
    """Evaluate ``func`` on jets seeded along the given directions of each input.

    Returns the raw (jet-valued) outputs and the total seed count.
    """
    size = sum(len(d) for _, d in inputs)
    jets, off = [], 0
    for base, dirs in inputs:
        jets.append(seeded_matrix(base, dirs, offset=off, size=size))
        off += len(dirs)
    return func(*jets), size


def coords_jacobian(out, size: int) -> tuple[np.ndarray, np.ndarray]:
    out = np.asarray(out, dtype=object).reshape(-1)
    vals = np.array([value_of(x) for x in out], dtype=complex)
    J = np.array([first_of(x, size) for x in out], dtype=complex).reshape(len(out), size)
    return vals, J


def group_jacobian(out, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Value of a matrix-valued output and its differential in right-trivialized coefficients."""
    out = np.asarray(out, dtype=object)
    n = out.shape[0]
    M = np.asarray(value_of(out), dtype=complex)
    D = np.zeros((size, n, n), dtype=complex)
    for idx in np.ndindex(out.shape):
        D[(slice(None),) + idx] = first_of(out[idx], size)
    Mi = np.linalg.inv(M)
    bas = sl_basis(n)
    J = np.array([bas.coef(D[k] @ Mi) for k in range(size)]).T
    return M, J


def flag_jacobian(fp: FlagPoint, at=None) -> np.ndarray:
    """Jacobian of ``g -> chart coords of gB`` in the right-trivialized frame."""
    g = fp.matrix() if at is None else at
    out, size = linearize(lambda x: flag_coords(x, fp.rep), [(g, rt_seeds(g))])
    return coords_jacobian(out, size)[1]


def cflag_jacobian(fp: FlagPoint, at=None) -> np.ndarray:
    """Jacobian of ``g -> chart coords of B_- g`` (cell of ``fp.cell``)."""
    g = fp.matrix() if at is None else at
    out, size = linearize(lambda x: cflag_coords(x, fp.rep), [(g, rt_seeds(g))])
    return coords_jacobian(out, size)[1]


# ---------------------------------------------------------------------------
# dressing fields


def triangular_parts(x):
    x = np.asarray(x)
    return np.tril(x, -1), np.diag(np.diag(x)), np.triu(x, 1)


def dual_projection(X, Y) -> np.ndarray:
    """Component in ``g_diag`` of ``(X, Y)`` along ``g*_st``."""
    lo, d, up = triangular_parts(np.asarray(X) - np.asarray(Y))
    return np.asarray(X) - up - 0.5 * d


def dressing_eval(xi: tuple[np.ndarray, np.ndarray], g) -> np.ndarray:
    """Dressing vector at ``g`` as an ambient matrix: ``-g p(g^-1 X g, g^-1 Y g)``."""
    g = np.asarray(g, dtype=complex)
    gi = np.linalg.inv(g)
    X, Y = xi
    return -g @ dual_projection(gi @ X @ g, gi @ Y @ g)


def dual_generators(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Spanning set of ``g*_st``: ``(eta, 0)``, ``(0, eta')``, ``(h, -h)``."""
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            out.append((unit(n, i, j), np.zeros((n, n), dtype=complex)))
    for i in range(n):
        for j in range(i + 1, n):
            out.append((np.zeros((n, n), dtype=complex), unit(n, j, i)))
    for h in cartan_basis(n):
        out.append((h.astype(complex), -h.astype(complex)))
    return out


# ---------------------------------------------------------------------------
# pi_1, pi_-1 and the mixed bivector


def sigma_eval(x, fp: FlagPoint, J: np.ndarray | None = None) -> np.ndarray:
    """``sigma(x)(gB) = d/dt exp(-tx) g B`` in the chart of ``fp``."""
    J = flag_jacobian(fp) if J is None else J
    return -J @ sl_basis(fp.cell.n).coef(x)


def pi1_routes(fp: FlagPoint, side: str = "left") -> tuple[np.ndarray, np.ndarray]:
    """Both evaluations of ``pi_1`` (left quotient) or ``pi_-1`` (right quotient).

    left:  pushforward of ``pi_st`` at ``c``, and ``-sigma(r_st)``;
    right: pushforward of ``pi_st`` at ``c``, and pushforward of ``r^L`` alone.
    """
    c = fp.matrix()
    n = c.shape[0]
    R = _r_coef(n)
    if side == "left":
        J = flag_jacobian(fp, c)
        push = J @ (BRACKET_FACTOR * pist_tensor(c)) @ J.T
        alt = -BRACKET_FACTOR * J @ R @ J.T
    elif side == "right":
        J = cflag_jacobian(fp, c)
        A = ad_matrix(c)
        push = J @ (BRACKET_FACTOR * pist_tensor(c)) @ J.T
        alt = BRACKET_FACTOR * J @ A @ R @ A.T @ J.T
    else:
        raise ValueError("side must be 'left' or 'right'")
    return push, alt


def pi1_eval(fp: FlagPoint, side: str = "left") -> Bivector:
    push, _ = pi1_routes(fp, side)
    tag = "flag-cell" if side == "left" else "coflag-cell"
    return Bivector(f"{tag}({fp.cell})", push)


def bminus_positions(n: int) -> list[tuple[int, int]]:
    """Entries used as coordinates on ``B_-``: strictly lower, then ``n-1`` diagonal."""
    return [(i, j) for i in range(n) for j in range(i)] + [(i, i) for i in range(n - 1)]


def bminus_coords(b) -> np.ndarray:
    b = np.asarray(b)
    return np.array([b[p] for p in bminus_positions(b.shape[0])], dtype=b.dtype)


def bminus_from_coords(x, n: int) -> np.ndarray:
    x = list(x)
    obj = any(isinstance(e, Jet) for e in x)
    b = np.zeros((n, n), dtype=object if obj else complex)
    if obj:
        b[...] = 0.0
    for p, e in zip(bminus_positions(n), x):
        b[p] = e
    last = 1.0
    for i in range(n - 1):
        last = last * b[i, i]
    b[n - 1, n - 1] = 1.0 / last
    return b


def bminus_jacobian(b) -> np.ndarray:
    out, size = linearize(bminus_coords, [(b, rt_seeds(b))])
    return coords_jacobian(out, size)[1]


def bminus_pi(b) -> Bivector:
    """``pi_st`` restricted to ``B_-`` in entry coordinates."""
    J = bminus_jacobian(b)
    return Bivector("B_--entries", J @ pist_eval(b).mat @ J.T)


@lru_cache(maxsize=None)
def _mixed_coupling(n: int) -> np.ndarray:
    """Coefficients of ``sum_i xi_i (x) x_i`` over the dual bases."""
    bas = sl_basis(n)
    xs, xis = dual_bases(n)
    S = sum(np.outer(bas.coef(xi), bas.coef(x)) for x, xi in zip(xs, xis))
    S.setflags(write=False)
    return S


def mixed_pi_eval(fp: FlagPoint, b_minus) -> Bivector:
    """Mixed bivector on ``(G/B) x B_-`` in the chart (flag coords, B_- coords).

    ``(pi_1, 0) + (0, pi_st) - sum_i (sigma(xi_i), 0) ^ (0, x_i^R)``.
    """
    n = fp.cell.n
    Jf = flag_jacobian(fp)
    Jb = bminus_jacobian(b_minus)
    p1 = pi1_eval(fp).mat
    pb = Jb @ pist_eval(b_minus).mat @ Jb.T
    # sigma(xi) = -Jf coef(xi), x^R = Jb coef(x): the tensor term is
    # -sum sigma_i (x) x_i + x_i (x) sigma_i = Jf S Jb^T - (Jf S Jb^T)^T
    cross = BRACKET_FACTOR * Jf @ _mixed_coupling(n) @ Jb.T
    lf, lb = p1.shape[0], pb.shape[0]
    M = np.zeros((lf + lb, lf + lb), dtype=complex)
    M[:lf, :lf] = p1
    M[lf:, lf:] = pb
    M[:lf, lf:] = cross
    M[lf:, :lf] = -cross.T
    return Bivector(f"flag-cell({fp.cell})+B_--entries", M)


# ---------------------------------------------------------------------------
# generic checks


@dataclass
class CheckResult:
    check: str
    anchor: str
    n: int
    u: list | None
    v: list | None
    samples: int
    max_dev: float
    tol: float
    passed: bool
    note: str = ""

    def to_json(self) -> dict:
        d = {"check": self.check, "anchor": self.anchor, "n": self.n, "u": self.u,
             "v": self.v, "samples": self.samples, "max_dev": float(f"{self.max_dev:.6e}"),
             "tol": self.tol, "pass": bool(self.passed)}
        if self.note:
            d["note"] = self.note
        return d


@dataclass(frozen=True)
class ChartMap:
    """A map between charts; ``fn(x)`` returns the image and the Jacobian."""

    source: str
    target: str
    fn: Callable

    def __call__(self, x):
        return self.fn(x)


def relative_deviation(push: np.ndarray, expected: np.ndarray, scale: float) -> float:
    num = float(np.max(np.abs(push - expected))) if push.size else 0.0
    if num == 0.0:
        return 0.0
    return num / max(scale, 1e-300)


def poisson_map_check(phi: ChartMap, pi_src: Callable, pi_dst: Callable, pts: Sequence,
                      sign: int = 1, tol: float = 1e-8, check: str = "poisson-map",
                      anchor: str = "", n: int = 0, u=None, v=None) -> CheckResult:
    """Compare ``J pi_src J^T`` with ``sign * pi_dst`` at each sample point."""
    worst = 0.0
    for x in pts:
        y, J = phi(x)
        S = pi_src(x).mat
        D = pi_dst(y).mat
        push = J @ S @ J.T
        scale = max(np.linalg.norm(J) ** 2 * np.linalg.norm(S), np.linalg.norm(D), 1.0)
        worst = max(worst, relative_deviation(push, sign * D, scale))
    return CheckResult(check, anchor, n, u, v, len(pts), worst, tol, worst <= tol)


def multiplicativity_defect(g, h) -> float:
    """``pi(gh) = l_g pi(h) + r_h pi(g)`` in the right-trivialized frame."""
    A = ad_matrix(g)
    lhs = pist_tensor(np.asarray(g) @ np.asarray(h))
    rhs = A @ pist_tensor(h) @ A.T + pist_tensor(g)
    scale = max(np.linalg.norm(A) ** 2 * np.linalg.norm(pist_tensor(h)), 1.0)
    return float(np.max(np.abs(lhs - rhs)) / scale)


def ad_invariance_defect(g) -> float:
    A = ad_matrix(g)
    S = r_st(np.asarray(g).shape[0]).symmetric_part()
    return float(np.max(np.abs(A @ S @ A.T - S)))


def ambient_pi(x) -> np.ndarray:
    """Bracket matrix of the entry functions at an invertible ``x`` (jet-safe).

    ``{x_p, x_q} = 2 sum_k (x a_k)_p (x b_k)_q - (a_k x)_p (b_k x)_q``.
    """
    x = np.asarray(x)
    n = x.shape[0]
    N = n * n
    out = None
    for a, b in r_st(n).terms:
        xa, xb = (x @ a).reshape(N), (x @ b).reshape(N)
        ax, bx = (a @ x).reshape(N), (b @ x).reshape(N)
        term = np.outer(xa, xb) - np.outer(ax, bx)
        out = term if out is None else out + term
    return BRACKET_FACTOR * out


def _entry_dirs(n: int) -> list[np.ndarray]:
    dirs = []
    for i in range(n):
        for j in range(n):
            dirs.append(unit(n, i, j))
    return dirs


def coordinate_jacobiator(g) -> float:
    """Largest cyclic sum ``{x_i,{x_j,x_k}} + cyc`` over all entry triples."""
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    N = n * n
    Pj = ambient_pi(seeded_matrix(g, _entry_dirs(n)))
    P = np.asarray(value_of(Pj), dtype=complex)
    dP = np.array([[first_of(Pj[p, q], N) for q in range(N)] for p in range(N)])
    T = np.einsum("iq,jkq->ijk", P, dP)
    jac = T + T.transpose(1, 2, 0) + T.transpose(2, 0, 1)
    return float(np.max(np.abs(jac)))


def jacobiator(f1: Callable, f2: Callable, f3: Callable, g) -> complex:
    """Cyclic sum of iterated brackets of three observables (second-order jets)."""
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    N = n * n
    dirs = _entry_dirs(n)
    Pj = ambient_pi(seeded_matrix(g, dirs))
    P = np.asarray(value_of(Pj), dtype=complex)
    dP = np.array([[first_of(Pj[p, q], N) for q in range(N)] for p in range(N)])
    grads, hess = [], []
    for f in (f1, f2, f3):
        j = jet_eval(f, g, dirs, order=2)
        grads.append(first_of(j, N))
        hess.append(second_of(j, N))

    def grad_bracket(a, b):
        return (hess[a] @ P @ grads[b] + np.einsum("m,mpq,p->q", grads[a], dP, grads[b])
                + grads[a] @ P @ hess[b])

    total = 0j
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        total += grads[a] @ P @ grad_bracket(b, c)
    return complex(total)


def null_space(M: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of ``M``."""
    if M.shape[0] == 0:
        return np.eye(M.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    r = int(np.sum(s > rtol * max(smax, 1e-300)))
    return vh[r:].conj().T


def span_basis(M: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of the column span of ``M``."""
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > rtol * max(s[0], 1e-300)))
    return u[:, :r]


def flag_tangent_rt(fp: FlagPoint) -> np.ndarray:
    """Tangent vectors of ``C_v`` at ``c`` (one per chart coordinate), right-trivialized."""
    n = fp.cell.n
    l = fp.cell.length
    c = fp.matrix()
    ci = np.linalg.inv(c)
    bas = sl_basis(n)
    jets = [Jet.seed(z, k, l) for k, z in enumerate(fp.coords)]
    cm = flag_matrix(jets, fp.rep)
    D = np.array([[first_of(e, l) for e in row] for row in cm])      # (n, n, l)
    cols = [bas.coef(D[:, :, k] @ ci) for k in range(l)]
    return np.array(cols, dtype=complex).T.reshape(bas.dim, l)


def coisotropy_defect(fp: FlagPoint) -> float:
    """``pi_st(alpha, beta)`` over conormal covectors of ``C_v`` at ``c``."""
    T = flag_tangent_rt(fp)
    N = null_space(T.T)
    P = pist_eval(fp.matrix()).mat
    if N.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(N.T @ P @ N)) / max(np.linalg.norm(P), 1.0))


def cell_tangent_rt(g, u, v, tol: float = 1e-9) -> tuple[np.ndarray, int]:
    """Orthonormal basis of ``T_g G^{u,v}`` (right-trivialized) and its dimension.

    Uses ``T_g(BgB) = b + Ad_g b`` and ``T_g(B_- g B_-) = b_- + Ad_g b_-``.
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    bas = sl_basis(n)
    A = ad_matrix(g)
    cart = list(range(bas.n_cartan))
    b_idx = cart + list(bas.upper)
    bm_idx = cart + list(bas.lower)
    E = np.eye(bas.dim)
    V1 = span_basis(np.hstack([E[:, b_idx], A[:, b_idx]]), tol)
    V2 = span_basis(np.hstack([E[:, bm_idx], A[:, bm_idx]]), tol)
    # intersection via the kernel of [V1, -V2]
    K = null_space(np.hstack([V1, -V2]), tol)
    inter = span_basis(V1 @ K[:V1.shape[1]], tol) if K.size else np.zeros((bas.dim, 0))
    return inter, inter.shape[1]


def projection_residual(vectors: np.ndarray, basis: np.ndarray) -> float:
    """Relative size of the part of ``vectors`` outside ``span(basis)``."""
    if vectors.size == 0:
        return 0.0
    nrm = np.linalg.norm(vectors)
    if nrm == 0:
        return 0.0
    res = vectors - basis @ (basis.conj().T @ vectors)
    return float(np.linalg.norm(res) / nrm)


def in_span_residual(vec: np.ndarray, gens: np.ndarray) -> float:
    """Least-squares residual of ``vec`` against the column span of ``gens``."""
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        return 0.0
    sol, *_ = np.linalg.lstsq(gens, vec, rcond=None)
    return float(np.linalg.norm(gens @ sol - vec) / nrm)


def inverse(g) -> np.ndarray:
    return solve_and_invert(g)


# ---------------------------------------------------------------------------
# dressing checks, weak pair, submersions


def _rt_coef_of(vec, g) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    return sl_basis(g.shape[0]).coef(np.asarray(vec) @ np.linalg.inv(g))


def dressing_consistency_defect(g) -> float:
    """``d(xi)(g)`` against ``pi^#(xi^R)`` for every dual generator.

    ``xi = (X, Y)`` pairs with ``x`` through ``tr((X - Y) x)``; ``pi^#`` contracts
    the first slot of the tensor, which is ``mat^T / BRACKET_FACTOR``.
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    bas = sl_basis(n)
    P = pist_eval(g).mat
    worst = 0.0
    for X, Y in dual_generators(n):
        D = _rt_coef_of(dressing_eval((X, Y), g), g)
        c = np.array([np.trace((X - Y) @ m) for m in bas.mats])
        E = P.T @ c / BRACKET_FACTOR
        worst = max(worst, float(np.max(np.abs(D - E)) / max(1.0, np.linalg.norm(E))))
    return worst


def _subspace(n: int, idx: Sequence[int], A: np.ndarray | None = None) -> np.ndarray:
    E = np.eye(sl_basis(n).dim)[:, list(idx)]
    return E if A is None else A @ E


def dressing_membership_defect(g) -> dict[str, float]:
    """Residuals of the three tangent-space memberships of dressing vectors.

    ``(eta, 0)``, eta upper:  in ``T(g B_-)`` and ``T(B g B)``;
    ``(0, eta)``, eta lower:  in ``T(g B)`` and ``T(B_- g B_-)``;
    ``(x, -x)``, x diagonal:  in ``T(T g B_-)`` and ``T(T g B)``.
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    bas = sl_basis(n)
    A = ad_matrix(g)
    cart = list(range(bas.n_cartan))
    b, bm = cart + list(bas.upper), cart + list(bas.lower)
    # right-trivialized tangent spaces
    T_gBm = _subspace(n, bm, A)
    T_gB = _subspace(n, b, A)
    T_BgB = np.hstack([_subspace(n, b), _subspace(n, b, A)])
    T_BmgBm = np.hstack([_subspace(n, bm), _subspace(n, bm, A)])
    T_TgBm = np.hstack([_subspace(n, cart), _subspace(n, bm, A)])
    T_TgB = np.hstack([_subspace(n, cart), _subspace(n, b, A)])
    gens = dual_generators(n)
    m = len(bas.upper)
    groups = {"upper": (gens[:m], (T_gBm, T_BgB)),
              "lower": (gens[m:2 * m], (T_gB, T_BmgBm)),
              "cartan": (gens[2 * m:], (T_TgBm, T_TgB))}
    out = {}
    for name, (xis, spaces) in groups.items():
        worst = 0.0
        for xi in xis:
            d = _rt_coef_of(dressing_eval(xi, g), g)
            for S in spaces:
                # dressing vectors can vanish identically (e.g. lower ones on B_-)
                sol, *_ = np.linalg.lstsq(S, d, rcond=None)
                res = np.linalg.norm(S @ sol - d) / max(1.0, np.linalg.norm(d))
                worst = max(worst, float(res))
        out[name] = worst
    return out


def weak_pair_defect(p) -> float:
    """``(varpi, varpi_-)`` pushes ``pi_st`` to ``pi_1 x pi_-1`` at a cell point."""
    g = p.g
    fl, cf = p.flag(), p.coflag()
    Jl = flag_jacobian(fl, g)
    Jr = cflag_jacobian(cf, g)
    J = np.vstack([Jl, Jr])
    P = pist_eval(g).mat
    push = J @ P @ J.T
    a, b = Jl.shape[0], Jr.shape[0]
    E = np.zeros((a + b, a + b), dtype=complex)
    E[:a, :a] = pi1_eval(fl, "left").mat
    E[a:, a:] = pi1_eval(cf, "right").mat
    scale = max(np.linalg.norm(J) ** 2 * np.linalg.norm(P), np.linalg.norm(E), 1.0)
    return relative_deviation(push, E, scale)


def leaf_submersion_ranks(p, rtol: float = 1e-9) -> tuple[int, int]:
    """Ranks of ``d varpi`` and ``d varpi_-`` restricted to the leaf through ``p``."""
    g = p.g
    P = pist_eval(g).mat
    leaf = span_basis(P, rtol)
    Jl = flag_jacobian(p.flag(), g) @ leaf
    Jr = cflag_jacobian(p.coflag(), g) @ leaf

    def rank(M):
        if M.size == 0:
            return 0
        s = np.linalg.svd(M, compute_uv=False)
        return int(np.sum(s > rtol * max(s[0], 1e-300)))
    return rank(Jl), rank(Jr)
