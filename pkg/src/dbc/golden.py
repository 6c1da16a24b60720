"""Closed-form SL(2) and SL(3) examples used as golden checks.

These run at n = 2 and n = 3 regardless of the configured rank.
"""
from __future__ import annotations

import numpy as np

from . import groupoid as gp
from . import leaves as lv
from . import poisson as po
from .factorize import (FlagPoint, cflag_coords, flag_canonical, flag_coords, left_factor,
                        right_factor, sample_double_cell)
from .numkernel import csqrt, leading_minor
from .rootdata import (TorusElement, WeylElement, all_weyl, fixed_simples, random_torus,
                       weyl_representative)
from .verify import check, coords_map, random_sl, rel, unit_dirs

W0 = WeylElement.longest(2)
V3 = WeylElement.from_word(3, [1, 2])


def _k(ctx) -> int:
    return 20


def _z(rng) -> complex:
    r = rng.uniform(0.4, 1.6)
    return complex(r * np.exp(1j * rng.uniform(0, 2 * np.pi)))


# ---------------------------------------------------------------------------
# SL(2)


@check("golden", "sl2-entry-brackets", "SL(2): brackets of matrix entries", 1.0)
def _sl2_entries(ctx):
    worst = 0.0
    for _ in range(_k(ctx)):
        a, b, c = _z(ctx.rng), _z(ctx.rng), _z(ctx.rng)
        g = np.array([[a, b], [c, (1 + b * c) / a]])
        e = lambda i, j: (lambda x: x[i, j])
        want = {((0, 0), (0, 1)): g[0, 0] * g[0, 1], ((0, 0), (1, 0)): g[0, 0] * g[1, 0],
                ((0, 1), (1, 1)): g[0, 1] * g[1, 1], ((1, 0), (1, 1)): g[1, 0] * g[1, 1],
                ((0, 0), (1, 1)): 2 * g[0, 1] * g[1, 0], ((0, 1), (1, 0)): 0.0}
        for (i, j), w in want.items():
            got = po.bracket_eval(e(*i), e(*j), g)
            worst = max(worst, abs(got - w) / max(1.0, abs(w)))
    return [(None, None, _k(ctx), worst)]


def _zab_matrix(z, a, b) -> np.ndarray:
    return np.array([[a * z, (a * b * z - 1) / a], [a, b]])


def _zab(g):
    return np.array([g[0, 0] / g[1, 0], g[1, 0], g[1, 1]], dtype=object)


def _zab_sample(rng):
    while True:
        z, a, b = _z(rng), _z(rng), _z(rng)
        if abs(a * b * z - 1) > 0.2:
            return z, a, b


@check("golden", "sl2-zab-brackets", "SL(2) chart (z, a, b): {z,a}, {z,b}, {a,b}", 1.0)
def _sl2_zab(ctx):
    worst = 0.0
    phi = coords_map(_zab, po.rt_seeds)
    for _ in range(_k(ctx)):
        z, a, b = _zab_sample(ctx.rng)
        g = _zab_matrix(z, a, b)
        _, J = phi(g)
        M = J @ po.pist_eval(g).mat @ J.T
        want = np.array([[0, z * a, (a * b * z - 2) / a],
                         [-z * a, 0, a * b],
                         [-(a * b * z - 2) / a, -a * b, 0]])
        worst = max(worst, rel(M, want))
    return [(None, None, _k(ctx), worst)]


@check("golden", "sl2-groupoid-table", "SL(2) groupoid: theta, tau, chi, inverse, identity, product", 1.0)
def _sl2_table(ctx):
    rep = weyl_representative(W0)
    worst = 0.0
    for _ in range(_k(ctx)):
        z, a, b = _zab_sample(ctx.rng)
        e = gp.GroupoidElement.of(_zab_matrix(z, a, b), W0, rep)
        chi = a * a / (1 - a * b * z)
        th, ta, inv, ident = gp.gpd_maps(e)
        worst = max(worst, rel(lv.chi_rep(e.point).array()[0], chi))
        worst = max(worst, rel(th.coords, [z]), rel(ta.coords, [chi * z]))
        worst = max(worst, rel(list(_zab(inv.g)), [chi * z, 1 / a, -b]))
        worst = max(worst, rel(list(_zab(ident.g)), [z, 1, 0]))
        # a composable partner: z2 = tau(z, a, b)
        _, a2, b2 = _zab_sample(ctx.rng)
        h = gp.GroupoidElement.of(_zab_matrix(chi * z, a2, b2), W0, rep)
        m = gp.gpd_mul(e, h, ctx.tol)
        worst = max(worst, rel(list(_zab(m.g)), [z, a * a2, a * b2 + b / a2]))
    return [(None, [2, 1], _k(ctx), worst)]


def _pqt_matrix(p, q, t) -> np.ndarray:
    return np.array([[p * t, -t], [t, -q * t]])


def _pqt(g):
    return np.array([g[0, 0] / g[1, 0], -g[1, 1] / g[1, 0], g[1, 0]], dtype=object)


def _pqt_sample(rng, p=None):
    while True:
        p0 = _z(rng) if p is None else p
        q = _z(rng)
        if abs(1 - p0 * q) > 0.2:
            t = csqrt(1 / (1 - p0 * q)) * (1 if rng.random() < 0.5 else -1)
            return p0, q, t


@check("golden", "sl2-leaf", "SL(2) leaf through s: brackets and groupoid maps in (p, q, t)", 1.0)
def _sl2_leaf(ctx):
    rep = weyl_representative(W0)
    phi = coords_map(_pqt, po.rt_seeds)
    worst = 0.0
    for _ in range(_k(ctx)):
        p, q, t = _pqt_sample(ctx.rng)
        g = _pqt_matrix(p, q, t)
        _, J = phi(g)
        M = J @ po.pist_eval(g).mat @ J.T
        want = np.array([[0, 2 * (1 - p * q), p * t], [-2 * (1 - p * q), 0, -q * t],
                         [-p * t, q * t, 0]])
        worst = max(worst, rel(M, want))
        e = gp.GroupoidElement.of(g, W0, rep)
        worst = max(worst, float(not lv.in_sigma(e)))
        th, ta, inv, ident = gp.gpd_maps(e)
        worst = max(worst, rel(th.coords, [p]), rel(ta.coords, [p]))
        worst = max(worst, rel(list(_pqt(inv.g)), [p, -q * t * t, 1 / t]))
        worst = max(worst, rel(list(_pqt(ident.g)), [p, 0, 1]))
        _, q2, t2 = _pqt_sample(ctx.rng, p)
        m = gp.gpd_mul(e, gp.GroupoidElement.of(_pqt_matrix(p, q2, t2), W0, rep), ctx.tol)
        worst = max(worst, rel(list(_pqt(m.g)), [p, q2 + q / (t2 * t2), t * t2]))
    return [(None, [2, 1], _k(ctx), worst)]


@check("golden", "sl2-J-map", "SL(2): J_s on G^{s,s} in coordinates", 1.0)
def _sl2_J(ctx):
    worst = 0.0
    for _ in range(_k(ctx)):
        p = sample_double_cell(W0, W0, ctx.rng, tol=ctx.tol)
        (a, b), (_, d) = p.g
        e = gp.embed_Jv(p)
        worst = max(worst, rel(e.flag.coords, [-a / b]),
                    rel(e.b_minus, np.array([[-1 / b, 0], [d, -b]])))
    return [([2, 1], [2, 1], _k(ctx), worst)]


@check("golden", "sl2-pist-at-s", "SL(2): pi_st at the representative of s", 1.0)
def _sl2_pist_s(ctx):
    basis = po.sl_basis(2)
    s = weyl_representative(W0).matrix
    em, ep = basis.coef(po.unit(2, 1, 0)), basis.coef(po.unit(2, 0, 1))
    want = -(np.outer(em, ep) - np.outer(ep, em))
    return [(None, [2, 1], 1, rel(po.pist_tensor(s), want))]


# ---------------------------------------------------------------------------
# SL(3), v = s1 s2


def _c_AB(z1, z2) -> np.ndarray:
    A = np.array([[z1, -1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex)
    B = np.array([[1, 0, 0], [0, z2, -1], [0, 1, 0]], dtype=complex)
    return A @ B


def _zz(c):
    return np.array([c[0, 0], -c[0, 1]], dtype=object)


@check("golden", "sl3-flag-bracket", "SL(3), v = s1 s2: {z1, z2} = -z1 z2 on BvB/B", 1.0)
def _sl3_flag(ctx):
    rep = weyl_representative(V3)
    to_zz = lambda x: _zz(left_factor(x, rep)[0])
    phi = coords_map(to_zz, po.rt_seeds)
    worst = 0.0
    for _ in range(_k(ctx)):
        z1, z2 = _z(ctx.rng), _z(ctx.rng)
        c = _c_AB(z1, z2)
        vals, J = phi(c)
        M = J @ po.pist_eval(c).mat @ J.T
        worst = max(worst, rel(vals, [z1, z2]), rel(M[0, 1], -z1 * z2))
        # the same bracket through the intrinsic chart on the flag variety
        fp = flag_canonical(c, 0, ctx.tol)
        chart = coords_map(lambda y: _zz(FlagPoint(V3, y, rep).matrix()), unit_dirs)
        _, Jc = chart(fp.coords)
        N = Jc @ po.pi1_eval(fp).mat @ Jc.T
        worst = max(worst, rel(N[0, 1], -z1 * z2))
    return [(None, list(V3.perm), _k(ctx), worst)]


def _leaf3_matrix(x) -> np.ndarray:
    p1, q1, t1, p2, q2, t2 = x
    A = np.array([[p1 * t1, -t1, 0], [t1, -q1 * t1, 0], [0, 0, 1]], dtype=complex)
    B = np.array([[1, 0, 0], [0, p2 * t2, -t2], [0, t2, -q2 * t2]], dtype=complex)
    return A @ B


def _leaf3(g) -> np.ndarray:
    t1, t2 = g[1, 0], g[2, 1]
    return np.array([g[0, 0] / t1, g[1, 2] / (t1 * t2), t1,
                     -g[0, 1] / (t1 * t2), -g[2, 2] / t2, t2], dtype=complex)


def _leaf3_sample(rng, p1=None, p2_of=None):
    p1, q1, t1 = _pqt_sample(rng, p1)
    p2 = p2_of(t1) if p2_of else None
    p2, q2, t2 = _pqt_sample(rng, p2)
    return [p1, q1, t1, p2, q2, t2]


def _zz_flag(y: FlagPoint) -> np.ndarray:
    return np.asarray(_zz(y.matrix()), dtype=complex)


@check("golden", "sl3-leaf-groupoid", "SL(3), v = s1 s2: leaf groupoid maps in (p, q, t) coordinates", 1.0)
def _sl3_leaf(ctx):
    rep = weyl_representative(V3)
    worst = 0.0
    for _ in range(_k(ctx)):
        x = _leaf3_sample(ctx.rng)
        p1, q1, t1, p2, q2, t2 = x
        g = _leaf3_matrix(x)
        worst = max(worst, rel(g[0, 2], t1 * t2), rel(_leaf3(g), x))
        e = gp.GroupoidElement.of(g, V3, rep)
        worst = max(worst, float(not lv.in_sigma(e)))
        th, ta, inv, _ = gp.gpd_maps(e)
        worst = max(worst, rel(_zz_flag(th), [p1, p2 / t1]), rel(_zz_flag(ta), [p1 / t2, p2]))
        worst = max(worst, rel(_leaf3(inv.g), [p1 / t2, -q1 * t1 * t1 * t2, 1 / t1,
                                               p2 / t1, -q2 * t1 * t2 * t2, 1 / t2]))
        z1, z2 = _z(ctx.rng), _z(ctx.rng)
        ident = gp.identity_at(flag_canonical(_c_AB(z1, z2), 0, ctx.tol))
        worst = max(worst, rel(_leaf3(ident.g), [z1, 0, 1, z2, 0, 1]))
        y = _leaf3_sample(ctx.rng, p1 / t2, lambda t1b: p2 * t1b)
        a1, b1, s1, a2, b2, s2 = y
        m = gp.gpd_mul(e, gp.GroupoidElement.of(_leaf3_matrix(y), V3, rep), ctx.tol)
        want = [p1, b1 / t2 + q1 / (s1 * s1), t1 * s1, a2, b2 + q2 / (s1 * s2 * s2), t2 * s2]
        worst = max(worst, rel(_leaf3(m.g), want))
    return [(None, list(V3.perm), _k(ctx), worst)]


@check("golden", "sl3-entry-bracket", "SL(3): {g11, g12} = g11 g12 by both contractions", 1.0)
def _sl3_entries(ctx):
    worst = 0.0
    f1, f2 = (lambda x: x[0, 0]), (lambda x: x[0, 1])
    for _ in range(_k(ctx)):
        g = random_sl(3, ctx.rng)
        want = g[0, 0] * g[0, 1]
        a, b = po.bracket_eval(f1, f2, g), po.bracket_tensor_direct(f1, f2, g)
        worst = max(worst, abs(a - want) / max(1.0, abs(want)), abs(b - want) / max(1.0, abs(want)))
    return [(None, None, _k(ctx), worst)]


# ---------------------------------------------------------------------------
# root data examples


@check("golden", "minors-of-representatives", "Delta_k(vbar) = 1 for k in I(v)", None)
def _minors(ctx):
    rows = []
    for n in (2, 3):
        for v in all_weyl(n):
            rep = weyl_representative(v)
            bad = sum(abs(leading_minor(rep.matrix, k) - 1) > 1e-12 for k in fixed_simples(v))
            rows.append((None, v, 1, float(bad)))
    return rows


@check("golden", "torus-subgroup-examples", "T^{u,u} is trivial; T^{e,w0} is all of T for SL(2)", None)
def _tuv_examples(ctx):
    bad = 0
    for n in (2, 3):
        for u in all_weyl(n):
            test = lv.TorusSubgroupTest.of(u, u)
            bad += not test(TorusElement.identity(n))
            bad += sum(test(random_torus(n, ctx.rng)) for _ in range(_k(ctx)))
    test = lv.TorusSubgroupTest.of(WeylElement.identity(2), W0)
    bad += sum(not test(random_torus(2, ctx.rng)) for _ in range(_k(ctx)))
    return [(None, None, _k(ctx), float(bad))]
