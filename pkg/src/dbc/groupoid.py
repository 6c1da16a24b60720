"""Groupoid structure on G^{vbar,vbar}, the action groupoid (G/B) x B_-, twists and actions.

Matrix-level helpers (``*_matrix``) are jet-safe and feed the Jacobian checks;
the element-level API works on cached factorizations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .factorize import (COND_CAP, COND_LIMIT, CellPoint, FlagPoint, bruhat_cell_of, flag_canonical, flag_coords,
                        flag_from_c, flag_matrix, left_cell_of, left_factor,
                        right_factor, sample_flag)
from .numkernel import (DEFAULT_TOL, BigCellError, ComposabilityError, MomentMatchError,
                        RankAmbiguityError, SamplingExhaustedError, Tolerance, cond,
                        gaussian_decompose, inv_lower, inv_upper, solve_and_invert)
from .poisson import (bminus_coords, bminus_from_coords, coords_jacobian, group_jacobian,
                      linearize, mixed_pi_eval, null_space, pist_eval, cell_tangent_rt)
from .rootdata import (WeylElement, WeylRep, random_torus, weyl_representative)

MAX_TRIES = 20


# ---------------------------------------------------------------------------
# jet-safe structure maps


def inverse_matrix(g, rep: WeylRep):
    """``iota(g) = c' b^-1`` for ``g = c b = b_- c'`` (both factorizations over ``rep``)."""
    _, b = left_factor(g, rep)
    _, cp = right_factor(g, rep)
    return cp @ inv_upper(b)


def twist_matrix(g, urep: WeylRep, vrep: WeylRep):
    """``iota^{u,v}(g) = b_-^-1 c`` with ``g = c b`` (over ``urep``) and ``g = b_- c'`` (over ``vrep``)."""
    c, _ = left_factor(g, urep)
    bm, _ = right_factor(g, vrep)
    return inv_lower(bm) @ c


def twist_matrix_alt(g, urep: WeylRep, vrep: WeylRep):
    """``c' b^-1``: the second description of the twist."""
    _, b = left_factor(g, urep)
    _, cp = right_factor(g, vrep)
    return cp @ inv_upper(b)


def twist_closed_form(g, urep: WeylRep, vrep: WeylRep):
    """``([u^-1 g]_-^-1 u^-1 g v^-1 [g v^-1]_+^-1)^-1``."""
    ug = urep.inverse_matrix @ g
    gv = g @ vrep.inverse_matrix
    lo, _, _ = gaussian_decompose(ug)
    _, _, up = gaussian_decompose(gv)
    inner = inv_lower(lo) @ ug @ vrep.inverse_matrix @ inv_upper(up)
    return solve_and_invert(inner)


def product_matrix(g, h, rep: WeylRep):
    """``mu(g, h) = c b b'`` where ``h = c' b'`` (so ``mu = g c'^-1 h``)."""
    _, cp = right_factor(g, rep)
    return g @ solve_and_invert(cp) @ h


# ---------------------------------------------------------------------------
# G^{vbar, vbar}


@dataclass
class GroupoidElement:
    point: CellPoint

    @classmethod
    def of(cls, g, v: WeylElement, rep: WeylRep | None = None) -> "GroupoidElement":
        rep = rep or weyl_representative(v)
        return cls(CellPoint.make(g, v, v, rep, rep))

    @property
    def g(self) -> np.ndarray:
        return self.point.g

    @property
    def v(self) -> WeylElement:
        return self.point.v

    @property
    def rep(self) -> WeylRep:
        return self.point.vrep

    def theta(self) -> FlagPoint:
        return self.point.flag()

    def tau(self) -> FlagPoint:
        return self.point.coflag()


def gpd_maps(e: GroupoidElement):
    """``(theta, tau, inverse, identity at theta)``."""
    c, b = e.point.left()
    bm, cp = e.point.right()
    inv = GroupoidElement.of(cp @ np.linalg.inv(b), e.v, e.rep)
    ident = GroupoidElement.of(c, e.v, e.rep)
    return e.theta(), e.tau(), inv, ident


def gpd_inverse_residual(e: GroupoidElement) -> float:
    """Disagreement between ``c' b^-1`` and ``b_-^-1 c``."""
    c, b = e.point.left()
    bm, cp = e.point.right()
    a = cp @ np.linalg.inv(b)
    z = np.linalg.inv(bm) @ c
    return float(np.max(np.abs(a - z)) / max(1.0, np.max(np.abs(a))))


def identity_at(y: FlagPoint) -> GroupoidElement:
    """``epsilon(cB) = c``."""
    return GroupoidElement.of(y.matrix(), y.cell, y.rep)


def check_composable(y1: FlagPoint, y2: FlagPoint, tol: float, exc=ComposabilityError):
    if y1.rep.seed != y2.rep.seed:
        raise exc("flags are expressed over different representatives")
    if not y1.same_as(y2, tol):
        raise exc(f"flags do not match (distance {y1.distance(y2):.3e})")


def gpd_mul(e1: GroupoidElement, e2: GroupoidElement,
            tol: Tolerance = DEFAULT_TOL) -> GroupoidElement:
    """``mu(g, h) = c b b' = b_- b_-' c''``."""
    check_composable(e1.tau(), e2.theta(), tol.tol_eq)
    c, b = e1.point.left()
    _, b2 = e2.point.left()
    return GroupoidElement.of(c @ b @ b2, e1.v, e1.rep)


def gpd_mul_residual(e1: GroupoidElement, e2: GroupoidElement) -> float:
    """Disagreement between the forms c b b2 and b_- b_-2 c3 of the product."""
    c, b = e1.point.left()
    bm, _ = e1.point.right()
    _, b2 = e2.point.left()
    bm2, c3 = e2.point.right()
    a = c @ b @ b2
    z = bm @ bm2 @ c3
    return float(np.max(np.abs(a - z)) / max(1.0, np.max(np.abs(a))))


def sample_theta_fiber(y: FlagPoint, rng: np.random.Generator, tol: Tolerance = DEFAULT_TOL,
                       tries: int = MAX_TRIES) -> GroupoidElement:
    """Random element ``h`` of ``G^{v,v}`` with ``theta(h) = y``.

    With ``c_y = n_-' t' n'`` and a random ``c'' = n_-'' t'' n''`` in ``C_v``,
    ``h = n_-' t0 n_-''^-1 c''`` lies in ``B_- C_v`` and satisfies ``hB = n_-' B = c_y B``.
    """
    v, rep = y.cell, y.rep
    cy = y.matrix()
    best, best_cond = None, COND_CAP
    for _ in range(tries):
        try:
            n1, _, _ = gaussian_decompose(cy, tol)
            c2 = sample_flag(v, rng, rep).matrix()
            n2, _, _ = gaussian_decompose(c2, tol)
        except BigCellError:
            continue
        h = n1 @ random_torus(v.n, rng).matrix() @ inv_lower(n2) @ c2
        k = cond(h)
        if k > best_cond:
            continue
        e = GroupoidElement.of(h, v, rep)
        try:
            e.point.left(tol)
            e.point.right(tol)
        except BigCellError:
            continue
        if k <= COND_LIMIT:
            return e
        best, best_cond = e, k
    if best is not None:
        return best
    raise SamplingExhaustedError("could not sample the source fiber")


def sample_tau_fiber(y: FlagPoint, rng: np.random.Generator, tol: Tolerance = DEFAULT_TOL) -> GroupoidElement:
    """Random ``g`` with ``tau(g) = y`` (the inverse of a theta-fiber sample)."""
    return gpd_maps(sample_theta_fiber(y, rng, tol))[2]


def composable_chain(e: GroupoidElement, k: int, rng: np.random.Generator,
                     tol: Tolerance = DEFAULT_TOL) -> list[GroupoidElement]:
    """``[e, e2, ..., ek]`` with each consecutive pair composable."""
    out = [e]
    while len(out) < k:
        out.append(sample_theta_fiber(out[-1].tau(), rng, tol))
    return out


def reexpress(y: FlagPoint, rep: WeylRep) -> FlagPoint:
    """The same flag in the chart of another representative of its cell."""
    return FlagPoint(y.cell, np.asarray(flag_coords(y.matrix(), rep), dtype=complex), rep)


# ---------------------------------------------------------------------------
# action groupoid (G/B) x B_-


@dataclass
class ActionGroupoidElement:
    flag: FlagPoint
    b_minus: np.ndarray


def action_tau(e: ActionGroupoidElement, tol: Tolerance = DEFAULT_TOL) -> FlagPoint:
    """``b_-^-1 g B``; the cell is recomputed from ranks."""
    m = np.linalg.inv(e.b_minus) @ e.flag.matrix()
    return flag_canonical(m, 0, tol)


def action_gpd(e: ActionGroupoidElement, tol: Tolerance = DEFAULT_TOL):
    """``(theta, tau, inverse)``."""
    tau = action_tau(e, tol)
    return e.flag, tau, ActionGroupoidElement(tau, np.linalg.inv(e.b_minus))


def action_identity(y: FlagPoint) -> ActionGroupoidElement:
    return ActionGroupoidElement(y, np.eye(y.cell.n, dtype=complex))


def action_gpd_mul(e1: ActionGroupoidElement, e2: ActionGroupoidElement,
                   tol: Tolerance = DEFAULT_TOL) -> ActionGroupoidElement:
    check_composable(action_tau(e1, tol), e2.flag, tol.tol_eq)
    return ActionGroupoidElement(e1.flag, e1.b_minus @ e2.b_minus)


def embed_Iv(p: CellPoint) -> ActionGroupoidElement:
    """``I_v(b_- c) = (b_- c B, b_-)``."""
    bm, _ = p.right()
    return ActionGroupoidElement(p.flag(), bm)


def embed_Jv(p: CellPoint) -> ActionGroupoidElement:
    """``J_v(b_- c) = (c B, b_-^-1)``."""
    bm, _ = p.right()
    return ActionGroupoidElement(p.coflag(), np.linalg.inv(bm))


def in_F(e: ActionGroupoidElement, u: WeylElement, v: WeylElement,
         tol: Tolerance = DEFAULT_TOL) -> bool:
    """Membership in ``F^{u,v}``: theta in the cell of ``u``, tau in the cell of ``v``."""
    return e.flag.cell == u and action_tau(e, tol).cell == v


# ---------------------------------------------------------------------------
# twist and actions


def twist(p: CellPoint, tol: Tolerance = DEFAULT_TOL) -> CellPoint:
    """``G^{u,v} -> G^{v,u}``, ``g = c b = b_- c'  ->  b_-^-1 c = c' b^-1``."""
    c, b = p.left(tol)
    bm, cp = p.right(tol)
    out = CellPoint.make(np.linalg.inv(bm) @ c, p.v, p.u, p.vrep, p.urep)
    # factorizations of the twist are read off directly
    out._left = (cp, np.linalg.inv(b))
    out._right = (np.linalg.inv(bm), c)
    return out


def twist_residual(p: CellPoint) -> float:
    a = twist_matrix(p.g, p.urep, p.vrep)
    z = twist_matrix_alt(p.g, p.urep, p.vrep)
    w = twist_closed_form(p.g, p.urep, p.vrep)
    s = max(1.0, float(np.max(np.abs(a))))
    return float(max(np.max(np.abs(a - z)), np.max(np.abs(a - w))) / s)


def act_left(g: GroupoidElement, x: CellPoint, tol: Tolerance = DEFAULT_TOL) -> CellPoint:
    """``g |> x = c b b' = b_- b_-' c''`` (requires ``tau(g) = varpi(x)``)."""
    if g.v != x.u:
        raise MomentMatchError("groupoid element lives over a different cell")
    check_composable(g.tau(), x.flag(), tol.tol_eq, MomentMatchError)
    c, b = g.point.left(tol)
    _, bx = x.left(tol)
    return CellPoint.make(c @ b @ bx, x.u, x.v, x.urep, x.vrep)


def act_left_residual(g: GroupoidElement, x: CellPoint) -> float:
    c, b = g.point.left()
    bm, _ = g.point.right()
    _, bx = x.left()
    bmx, cx = x.right()
    a, z = c @ b @ bx, bm @ bmx @ cx
    return float(np.max(np.abs(a - z)) / max(1.0, np.max(np.abs(a))))


def act_right(x: CellPoint, h: GroupoidElement, tol: Tolerance = DEFAULT_TOL) -> CellPoint:
    """``x <| h = c' b' b'' = b_-' b_-'' c'''`` (requires ``varpi_v(x) = theta(h)``)."""
    if h.v != x.v:
        raise MomentMatchError("groupoid element lives over a different cell")
    check_composable(x.coflag(), h.theta(), tol.tol_eq, MomentMatchError)
    cx, bx = x.left(tol)
    _, bh = h.point.left(tol)
    return CellPoint.make(cx @ bx @ bh, x.u, x.v, x.urep, x.vrep)


def act_right_residual(x: CellPoint, h: GroupoidElement) -> float:
    cx, bx = x.left()
    bmx, _ = x.right()
    _, bh = h.point.left()
    bmh, ch = h.point.right()
    a, z = cx @ bx @ bh, bmx @ bmh @ ch
    return float(np.max(np.abs(a - z)) / max(1.0, np.max(np.abs(a))))


# ---------------------------------------------------------------------------
# chart-level maps of the action groupoid (for multiplicativity spot checks)


def action_chart_point(e: ActionGroupoidElement) -> np.ndarray:
    return np.concatenate([e.flag.coords, bminus_coords(e.b_minus)])


def action_tau_chart(x, y: FlagPoint, target: FlagPoint):
    """Chart map ``(flag coords, B_- coords) -> coords of tau`` (jet-safe)."""
    n = y.cell.n
    lf = y.cell.length
    c = flag_matrix(list(x[:lf]), y.rep)
    b = bminus_from_coords(list(x[lf:]), n)
    return flag_coords(inv_lower(b) @ c, target.rep)


def x_alpha_defect(a: ActionGroupoidElement, b: ActionGroupoidElement,
                   tol: Tolerance = DEFAULT_TOL) -> float:
    """Left invariance of ``X_alpha = pi^#(tau^* alpha)`` along composable ``(a, b)``.

    Compares ``X_alpha(ab)`` with the left translate of ``X_alpha(b)`` for every
    coordinate one-form ``alpha`` on the target cell, and checks that both are
    vertical for ``theta``.
    """
    ab = action_gpd_mul(a, b, tol)
    ytau = action_tau(b, tol)
    n = a.flag.cell.n

    def X(e: ActionGroupoidElement):
        pt = action_chart_point(e)
        dirs = [np.eye(len(pt), dtype=complex)[k] for k in range(len(pt))]
        out, size = linearize(lambda z: action_tau_chart(z, e.flag, ytau), [(pt, dirs)])
        _, Jt = coords_jacobian(out, size)
        M = mixed_pi_eval(e.flag, e.b_minus).mat
        return M @ Jt.T

    Xb, Xab = X(b), X(ab)
    lf_b, lf_ab = b.flag.cell.length, ab.flag.cell.length
    # B_- part transported by beta -> b_a beta
    pt = bminus_coords(b.b_minus)
    dirs = [np.eye(len(pt), dtype=complex)[k] for k in range(len(pt))]
    out, size = linearize(lambda z: bminus_coords(a.b_minus @ bminus_from_coords(list(z), n)),
                          [(pt, dirs)])
    _, Jl = coords_jacobian(out, size)
    moved = Jl @ Xb[lf_b:]
    scale = max(1.0, float(np.max(np.abs(Xab))) if Xab.size else 1.0,
                float(np.max(np.abs(moved))) if moved.size else 1.0)
    devs = [np.max(np.abs(Xab[lf_ab:] - moved)) if moved.size else 0.0]
    if lf_b:
        devs.append(np.max(np.abs(Xb[:lf_b])))
    if lf_ab:
        devs.append(np.max(np.abs(Xab[:lf_ab])))
    return float(max(devs) / scale)


# ---------------------------------------------------------------------------
# graph coisotropy


def _torus_from(s):
    s = list(s)
    n = len(s) + 1
    last = 1.0
    for x in s:
        last = last * x
    d = s + [1.0 / last]
    out = np.zeros((n, n), dtype=object)
    out[...] = 0.0
    for i in range(n):
        out[i, i] = d[i]
    return out


def _fiber_point(cy, t0, coords, rep: WeylRep):
    """``n_-(c_y) t0 n_-(c'')^-1 c''`` (jet-safe)."""
    n1, _, _ = gaussian_decompose(cy)
    c2 = flag_matrix(list(coords), rep)
    n2, _, _ = gaussian_decompose(c2)
    return n1 @ _torus_from(t0) @ inv_lower(n2) @ c2


def _conormal_defect(tangent: np.ndarray, blocks: list[np.ndarray], signs: list[int]) -> tuple[float, int]:
    d = blocks[0].shape[0]
    Pi = np.zeros((d * len(blocks),) * 2, dtype=complex)
    for k, (B, s) in enumerate(zip(blocks, signs)):
        Pi[k * d:(k + 1) * d, k * d:(k + 1) * d] = s * B
    N = null_space(tangent.T)
    rank = tangent.shape[0] - N.shape[1]
    if N.shape[1] == 0:
        return 0.0, rank
    return float(np.max(np.abs(N.T @ Pi @ N)) / max(1.0, np.linalg.norm(Pi))), rank


def _fiber_seed(rng: np.random.Generator, v: WeylElement, rep: WeylRep, cy):
    """Base parameters ``(t0, c'' coords)`` giving a well-conditioned fiber point."""
    best, best_cond = None, 1e6
    for _ in range(MAX_TRIES):
        t0 = random_torus(v.n, rng).array()[:-1]
        coords = sample_flag(v, rng, rep).coords
        try:
            h = _fiber_point(cy, t0, coords, rep)
        except BigCellError:
            continue
        k = cond(h)
        if k < 1e3:
            return t0, coords
        if k < best_cond:
            best, best_cond = (t0, coords), k
    if best is None:
        raise SamplingExhaustedError("no usable fiber parameters")
    return best


def _param_dirs(k: int) -> list[np.ndarray]:
    return [np.eye(k, dtype=complex)[i] for i in range(k)]


def mul_graph_defect(e: GroupoidElement, rng: np.random.Generator) -> tuple[float, int, int]:
    """Coisotropy of the graph of ``mu`` in ``G^3`` with ``pi x pi x (-pi)``.

    Composable pairs are parametrized by ``g`` (tangent directions of the cell)
    and the fiber parameters of ``h``.  Returns ``(defect, tangent rank, expected rank)``.
    """
    v, rep = e.v, e.rep
    g0 = e.g
    cy = e.tau().matrix()
    t0, coords = _fiber_seed(rng, v, rep, cy)
    basis, _ = cell_tangent_rt(g0, v, v)
    from .poisson import sl_basis
    bas = sl_basis(v.n)
    gdirs = [bas.matrix(basis[:, k]) @ g0 for k in range(basis.shape[1])]

    def F(g, t, z):
        _, cp = right_factor(g, rep)
        n1, _, _ = gaussian_decompose(cp)
        c2 = flag_matrix(list(z), rep)
        n2, _, _ = gaussian_decompose(c2)
        h = n1 @ _torus_from(list(t)) @ inv_lower(n2) @ c2
        return g, h, g @ solve_and_invert(cp) @ h

    (g, h, gh), size = linearize(F, [(g0, gdirs), (t0, _param_dirs(len(t0))),
                                     (coords, _param_dirs(len(coords)))])
    mats, jacs = zip(*(group_jacobian(m, size) for m in (g, h, gh)))
    T = np.vstack(jacs)
    l, r = v.length, v.n - 1
    defect, rank = _conormal_defect(T, [pist_eval(m).mat for m in mats], [1, 1, -1])
    return defect, rank, 3 * l + 2 * r


def action_graph_defect(x: CellPoint, side: str, rng: np.random.Generator) -> tuple[float, int, int]:
    """Coisotropy of the graph of the left (``side='left'``) or right action."""
    u, v = x.u, x.v
    x0 = x.g
    basis, dim = cell_tangent_rt(x0, u, v)
    from .poisson import sl_basis
    bas = sl_basis(u.n)
    xdirs = [bas.matrix(basis[:, k]) @ x0 for k in range(dim)]
    r = u.n - 1
    if side == "left":
        w, rep = u, x.urep
        cy = x.flag().matrix()
    else:
        w, rep = v, x.vrep
        cy = x.coflag().matrix()
    t0, coords = _fiber_seed(rng, w, rep, cy)

    def F(xx, t, z):
        if side == "left":
            cx, _ = left_factor(xx, rep)
            h = _fiber_point(cx, list(t), list(z), rep)
            g = inverse_matrix(h, rep)           # tau(g) = theta(h) = varpi(x)
            return g, xx, g @ solve_and_invert(cx) @ xx
        _, cpx = right_factor(xx, rep)
        h = _fiber_point(cpx, list(t), list(z), rep)
        return xx, h, xx @ solve_and_invert(cpx) @ h

    outs, size = linearize(F, [(x0, xdirs), (t0, _param_dirs(len(t0))),
                               (coords, _param_dirs(len(coords)))])
    mats, jacs = zip(*(group_jacobian(m, size) for m in outs))
    T = np.vstack(jacs)
    defect, rank = _conormal_defect(T, [pist_eval(m).mat for m in mats], [1, 1, -1])
    return defect, rank, dim + w.length + r


def cell_of(g, tol: Tolerance = DEFAULT_TOL):
    try:
        return bruhat_cell_of(g, tol)
    except RankAmbiguityError:
        return None


__all__ = [name for name in dir() if not name.startswith("_")]
