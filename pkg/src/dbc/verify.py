"""Verification engine: registered numerical checks grouped into suites.

Each check gets its own generator seeded from ``(seed, crc32(check name))``,
so a report depends only on ``(n, seed, samples, tol)`` and not on which
suites run alongside it.
"""
from __future__ import annotations

import datetime as _dt
import zlib
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import groupoid as gp
from . import leaves as lv
from . import poisson as po
from .factorize import (CellPoint, FlagPoint, bruhat_cell_of, cflag_coords, flag_coords,
                        flag_matrix, left_factor, random_lower, right_factor,
                        sample_double_cell, sample_flag)
from .numkernel import DEFAULT_TOL, DBCError, Tolerance
from .rootdata import (WeylElement, all_weyl, bruhat_leq, bruhat_leq_subword,
                       fixed_simples, random_torus, random_weyl, weyl_representative)

SCHEMA = "dbc-report/1"
SUITES = ("factorize", "poisson", "groupoid", "leaves", "golden")


@dataclass
class RunConfig:
    n: int = 3
    seed: int = 0
    samples: int = 25
    tol: Tolerance = DEFAULT_TOL
    suites: tuple[str, ...] = SUITES

    def __post_init__(self):
        if not 2 <= self.n <= 6:
            raise ValueError("n must lie in 2..6")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ValueError(f"unknown suite(s): {', '.join(bad)}")

    def to_json(self) -> dict:
        return {"n": self.n, "seed": self.seed, "samples": self.samples,
                "tol": {"tol_eq": self.tol.tol_eq, "tol_rank": self.tol.tol_rank,
                        "tol_det": self.tol.tol_det},
                "suites": list(self.suites)}


@dataclass
class Ctx:
    cfg: RunConfig
    rng: np.random.Generator

    @property
    def n(self) -> int:
        return self.cfg.n

    @property
    def samples(self) -> int:
        return self.cfg.samples

    @property
    def tol(self) -> Tolerance:
        return self.cfg.tol

    def weyls(self, n: int | None = None) -> list[WeylElement]:
        n = n or self.n
        if n <= 3:
            return all_weyl(n)
        pick = np.random.default_rng([self.cfg.seed, n, 1])
        out = [WeylElement.identity(n), WeylElement.longest(n)]
        while len(out) < 8:
            w = random_weyl(n, pick)
            if w not in out:
                out.append(w)
        return out

    def pairs(self, n: int | None = None) -> list[tuple[WeylElement, WeylElement]]:
        n = n or self.n
        if n <= 3:
            W = all_weyl(n)
            return [(u, v) for u in W for v in W]
        pick = np.random.default_rng([self.cfg.seed, n, 2])
        out = [(WeylElement.longest(n), WeylElement.longest(n))]
        while len(out) < 10:
            p = (random_weyl(n, pick), random_weyl(n, pick))
            if p not in out:
                out.append(p)
        return out


Row = tuple  # (u, v, samples, max_dev)


@dataclass
class Check:
    suite: str
    name: str
    anchor: str
    tol_factor: float | None      # None: exact check, tolerance 0
    fn: Callable[[Ctx], Iterable[Row]]

    @property
    def id(self) -> str:
        return f"{self.suite}/{self.name}"


REGISTRY: list[Check] = []


def check(suite: str, name: str, anchor: str, tol_factor: float | None = 1.0):
    def deco(fn):
        REGISTRY.append(Check(suite, name, anchor, tol_factor, fn))
        return fn
    return deco


def check_seed(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode())])


# ---------------------------------------------------------------------------
# small helpers


def random_sl(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        d = np.linalg.det(g)
        if abs(d) > 0.1 and np.linalg.cond(g) < 1e3:
            return g / d ** (1.0 / n)


def rel(a, b) -> float:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def _w(w: WeylElement | None):
    if w is None or isinstance(w, list):
        return w
    return list(w.perm)


def _entry(i: int, j: int) -> Callable:
    return lambda g: g[i, j]


def coords_map(fn: Callable, dirs_of: Callable) -> Callable:
    """Wrap ``fn`` into ``x -> (fn(x), Jacobian along dirs_of(x))``."""
    def phi(x):
        out, size = po.linearize(fn, [(x, dirs_of(x))])
        return po.coords_jacobian(out, size)
    return phi


def group_map(fn: Callable) -> Callable:
    """Group-valued ``fn`` as a chart map in right-trivialized frames."""
    def phi(x):
        out, size = po.linearize(fn, [(x, po.rt_seeds(x))])
        return po.group_jacobian(out, size)
    return phi


def unit_dirs(x) -> list[np.ndarray]:
    k = len(x)
    return [np.eye(k, dtype=complex)[i] for i in range(k)]


def cell_samples(ctx: Ctx, u, v, k: int | None = None, seeds=(0, 0)) -> list[CellPoint]:
    return [sample_double_cell(u, v, ctx.rng, rep_seeds=seeds, tol=ctx.tol)
            for _ in range(k or ctx.samples)]


def gpd_samples(ctx: Ctx, v, k: int | None = None, seed: int = 0) -> list[gp.GroupoidElement]:
    rep = weyl_representative(v, seed)
    return [gp.GroupoidElement.of(p.g, v, rep)
            for p in cell_samples(ctx, v, v, k, (seed, seed))]


def map_rows(ctx: Ctx, items, fn) -> list[Row]:
    """Apply ``fn(ctx, *item) -> (samples, dev)`` and tag rows with the cells."""
    rows = []
    for item in items:
        s, d = fn(ctx, *item)
        u, v = (item[0], item[1]) if len(item) > 1 else (None, item[0])
        rows.append((u, v, s, d))
    return rows


# ---------------------------------------------------------------------------
# factorize suite


@check("factorize", "reconstruction", "both factorizations of a double Bruhat cell", 1.0)
def _factor_reconstruction(ctx):
    def one(ctx, u, v):
        worst = 0.0
        for p in cell_samples(ctx, u, v):
            c, b = p.left()
            bm, cp = p.right()
            worst = max(worst, rel(c @ b, p.g), rel(bm @ cp, p.g))
            worst = max(worst, rel(flag_matrix(flag_coords(p.g, p.urep), p.urep), c))
            worst = max(worst, float(np.max(np.abs(np.tril(b, -1)))), float(np.max(np.abs(np.triu(bm, 1)))))
        return ctx.samples, worst
    return map_rows(ctx, ctx.pairs(), one)


@check("factorize", "cell-detection", "double Bruhat cell membership from rank patterns", None)
def _cell_detection(ctx):
    def one(ctx, u, v):
        bad = sum(bruhat_cell_of(p.g, ctx.tol) != (u, v) for p in cell_samples(ctx, u, v))
        return ctx.samples, float(bad)
    return map_rows(ctx, ctx.pairs(), one)


@check("factorize", "bruhat-order", "Bruhat order: rank matrices versus subwords", None)
def _bruhat_order(ctx):
    n = min(ctx.n, 4)
    W = all_weyl(n)
    bad = sum(bruhat_leq(a, b) != bruhat_leq_subword(a, b) for a in W for b in W)
    return [(None, None, len(W) ** 2, float(bad))]


@check("factorize", "chart-roundtrip", "Schubert cell charts on G/B", 1.0)
def _chart_roundtrip(ctx):
    def one(ctx, w):
        worst = 0.0
        rep = weyl_representative(w)
        for _ in range(ctx.samples):
            fp = sample_flag(w, ctx.rng, rep)
            b = np.triu(random_lower(ctx.n, ctx.rng).T)
            m = fp.matrix() @ b
            worst = max(worst, rel(flag_coords(m, rep), fp.coords))
        return ctx.samples, worst
    return map_rows(ctx, [(w,) for w in ctx.weyls()], one)


# ---------------------------------------------------------------------------
# poisson suite: structural


@check("poisson", "antisymmetry", "pi_st is a bivector", 1.0)
def _antisym(ctx):
    worst = 0.0
    for _ in range(ctx.samples):
        P = po.pist_eval(random_sl(ctx.n, ctx.rng))
        worst = max(worst, P.antisymmetry_defect())
    return [(None, None, ctx.samples, worst)]


@check("poisson", "multiplicativity", "pi_st is multiplicative", 1.0)
def _multiplicativity(ctx):
    k = 4 * ctx.samples
    worst = max(po.multiplicativity_defect(random_sl(ctx.n, ctx.rng), random_sl(ctx.n, ctx.rng))
                for _ in range(k))
    return [(None, None, k, worst)]


@check("poisson", "ad-invariance", "symmetric part of r_st is Ad-invariant", 0.1)
def _ad_inv(ctx):
    worst = max(po.ad_invariance_defect(random_sl(ctx.n, ctx.rng)) for _ in range(ctx.samples))
    return [(None, None, ctx.samples, worst)]


@check("poisson", "jacobi-coordinates", "Jacobi identity for pi_st on entry functions", 100.0)
def _jacobi_coords(ctx):
    k = min(ctx.samples, 5)
    worst = max(po.coordinate_jacobiator(random_sl(ctx.n, ctx.rng)) for _ in range(k))
    return [(None, None, k, worst)]


@check("poisson", "jacobi-observables", "Jacobi identity for pi_st, second-order jets", 100.0)
def _jacobi_obs(ctx):
    n = ctx.n
    f1 = lambda g: g[0, 0] * g[n - 1, n - 1]
    f2 = lambda g: g[0, 1] + g[1, 0] * g[1, 0]
    f3 = lambda g: g[0, 0] * g[0, 1] * g[1, 0] + g[n - 1, 0]
    k = min(ctx.samples, 3)
    worst = max(abs(po.jacobiator(f1, f2, f3, random_sl(n, ctx.rng))) for _ in range(k))
    return [(None, None, k, worst)]


@check("poisson", "bracket-two-routes", "bracket from the r-matrix, two contractions", 1.0)
def _bracket_routes(ctx):
    n = ctx.n
    worst = 0.0
    for _ in range(ctx.samples):
        g = random_sl(n, ctx.rng)
        i, j, k, l = ctx.rng.integers(0, n, size=4)
        a = po.bracket_eval(_entry(i, j), _entry(k, l), g)
        b = po.bracket_tensor_direct(_entry(i, j), _entry(k, l), g)
        worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    return [(None, None, ctx.samples, worst)]


@check("poisson", "pi1-two-routes", "pi_1 equals -sigma(r_st); pi_-1 from r^L", 1.0)
def _pi1_routes(ctx):
    def one(ctx, w):
        worst = 0.0
        rep = weyl_representative(w)
        for _ in range(ctx.samples):
            fp = sample_flag(w, ctx.rng, rep)
            for side in ("left", "right"):
                a, b = po.pi1_routes(fp, side)
                worst = max(worst, rel(a, b))
        return ctx.samples, worst
    return map_rows(ctx, [(w,) for w in ctx.weyls()], one)


@check("poisson", "coisotropy-C_v", "C_v is coisotropic in (G, pi_st)", 1.0)
def _coiso(ctx):
    def one(ctx, w):
        rep = weyl_representative(w)
        return ctx.samples, max(po.coisotropy_defect(sample_flag(w, ctx.rng, rep))
                                for _ in range(ctx.samples))
    return map_rows(ctx, [(w,) for w in ctx.weyls()], one)


@check("poisson", "weak-pair", "(varpi, varpi_-) is a weak Poisson pair", 10.0)
def _weak_pair(ctx):
    def one(ctx, u, v):
        return ctx.samples, max(po.weak_pair_defect(p) for p in cell_samples(ctx, u, v))
    return map_rows(ctx, ctx.pairs(), one)


@check("poisson", "dressing-membership", "dressing vectors of b, b_- and h lie in their expected subspaces", 1.0)
def _dressing_member(ctx):
    worst = 0.0
    for _ in range(ctx.samples):
        worst = max(worst, *po.dressing_membership_defect(random_sl(ctx.n, ctx.rng)).values())
    return [(None, None, ctx.samples, worst)]


@check("poisson", "dressing-hamiltonian", "dressing field of xi is pi^#(xi^R)", 1.0)
def _dressing_ham(ctx):
    worst = max(po.dressing_consistency_defect(random_sl(ctx.n, ctx.rng)) for _ in range(ctx.samples))
    return [(None, None, ctx.samples, worst)]


@check("poisson", "dressing-span", "dressing vectors span the leaf tangent", None)
def _dressing_span(ctx):
    def one(ctx, u, v):
        bad = sum(lv.dressing_span_rank(p.g) != lv.leaf_rank(p) for p in cell_samples(ctx, u, v))
        return ctx.samples, float(bad)
    return map_rows(ctx, ctx.pairs(), one)


@check("poisson", "cell-tangency", "double Bruhat cells are Poisson submanifolds", 1.0)
def _tangency(ctx):
    def one(ctx, u, v):
        return ctx.samples, max(lv.leaf_tangency_defect(p) for p in cell_samples(ctx, u, v))
    return map_rows(ctx, ctx.pairs(), one)


@check("poisson", "leaf-submersions", "varpi and varpi_- are submersions on leaves", None)
def _submersions(ctx):
    def one(ctx, u, v):
        bad = sum(po.leaf_submersion_ranks(p) != (u.length, v.length) for p in cell_samples(ctx, u, v))
        return ctx.samples, float(bad)
    return map_rows(ctx, ctx.pairs(), one)


# ---------------------------------------------------------------------------
# poisson suite: Poisson maps


def _pm(ctx, phi, src, dst, pts, sign=1) -> float:
    return po.poisson_map_check(po.ChartMap("src", "dst", phi), src, dst, pts, sign,
                                tol=10 * ctx.tol.tol_eq).max_dev


@check("poisson", "map-I_v", "embedding I_v into (G/B) x B_- is Poisson", 10.0)
def _pm_I(ctx):
    def one(ctx, u, v):
        pts = cell_samples(ctx, u, v)
        urep, vrep = pts[0].urep, pts[0].vrep

        def fn(x):
            bm, _ = right_factor(x, vrep)
            return np.concatenate([flag_coords(x, urep), po.bminus_coords(bm)])

        def dst(y):
            lf = u.length
            return po.mixed_pi_eval(FlagPoint(u, np.asarray(y[:lf]), urep),
                                    po.bminus_from_coords(y[lf:], u.n))
        return len(pts), _pm(ctx, coords_map(fn, po.rt_seeds), po.pist_eval, dst,
                             [p.g for p in pts])
    return map_rows(ctx, ctx.pairs(), one)


@check("poisson", "map-q_v", "projection b_- c -> b_- is Poisson", 10.0)
def _pm_q(ctx):
    def one(ctx, u, v):
        pts = cell_samples(ctx, u, v)
        vrep = pts[0].vrep
        fn = lambda x: po.bminus_coords(right_factor(x, vrep)[0])
        dst = lambda y: po.bminus_pi(po.bminus_from_coords(y, v.n))
        return len(pts), _pm(ctx, coords_map(fn, po.rt_seeds), po.pist_eval, dst, [p.g for p in pts])
    return map_rows(ctx, ctx.pairs(), one)


@check("poisson", "map-Phi_v", "B_- c -> c B is anti-Poisson", 10.0)
def _pm_phi(ctx):
    def one(ctx, v):
        rep = weyl_representative(v)
        pts = [sample_flag(v, ctx.rng, rep).coords for _ in range(ctx.samples)]
        fn = lambda x: flag_coords(flag_matrix(list(x), rep), rep)
        src = lambda x: po.pi1_eval(FlagPoint(v, np.asarray(x), rep), "right")
        dst = lambda y: po.pi1_eval(FlagPoint(v, np.asarray(y), rep), "left")
        return len(pts), _pm(ctx, coords_map(fn, unit_dirs), src, dst, pts, -1)
    return map_rows(ctx, [(w,) for w in ctx.weyls()], one)


@check("poisson", "map-theta", "theta pushes pi_st to pi_1", 10.0)
def _pm_theta(ctx):
    def one(ctx, v):
        es = gpd_samples(ctx, v)
        rep = es[0].rep
        fn = lambda x: flag_coords(x, rep)
        dst = lambda y: po.pi1_eval(FlagPoint(v, np.asarray(y), rep))
        return len(es), _pm(ctx, coords_map(fn, po.rt_seeds), po.pist_eval, dst, [e.g for e in es])
    return map_rows(ctx, [(w,) for w in ctx.weyls()], one)


@check("poisson", "map-tau", "tau pushes pi_st to -pi_1", 10.0)
def _pm_tau(ctx):
    def one(ctx, v):
        es = gpd_samples(ctx, v)
        rep = es[0].rep
        fn = lambda x: cflag_coords(x, rep)
        dst = lambda y: po.pi1_eval(FlagPoint(v, np.asarray(y), rep))
        return len(es), _pm(ctx, coords_map(fn, po.rt_seeds), po.pist_eval, dst,
                            [e.g for e in es], -1)
    return map_rows(ctx, [(w,) for w in ctx.weyls()], one)


@check("poisson", "map-varpi-uv", "varpi^{u,v}_v is anti-Poisson onto (BvB/B, pi_1)", 10.0)
def _pm_varpi_uv(ctx):
    def one(ctx, u, v):
        pts = cell_samples(ctx, u, v)
        vrep = pts[0].vrep
        fn = lambda x: cflag_coords(x, vrep)
        dst = lambda y: po.pi1_eval(FlagPoint(v, np.asarray(y), vrep))
        return len(pts), _pm(ctx, coords_map(fn, po.rt_seeds), po.pist_eval, dst,
                             [p.g for p in pts], -1)
    return map_rows(ctx, ctx.pairs(), one)


@check("poisson", "map-inverse", "groupoid inverse of G^{v,v} is anti-Poisson", 10.0)
def _pm_inv(ctx):
    def one(ctx, v):
        es = gpd_samples(ctx, v)
        rep = es[0].rep
        return len(es), _pm(ctx, group_map(lambda x: gp.inverse_matrix(x, rep)), po.pist_eval,
                            po.pist_eval, [e.g for e in es], -1)
    return map_rows(ctx, [(w,) for w in ctx.weyls()], one)


@check("poisson", "map-twist", "twist G^{u,v} -> G^{v,u} is anti-Poisson", 10.0)
def _pm_twist(ctx):
    def one(ctx, u, v):
        pts = cell_samples(ctx, u, v)
        urep, vrep = pts[0].urep, pts[0].vrep
        return len(pts), _pm(ctx, group_map(lambda x: gp.twist_matrix(x, urep, vrep)),
                             po.pist_eval, po.pist_eval, [p.g for p in pts], -1)
    return map_rows(ctx, ctx.pairs(), one)


# ---------------------------------------------------------------------------
# groupoid suite


def _gpd_rows(ctx, fn):
    return map_rows(ctx, [(w,) for w in ctx.weyls()], fn)


@check("groupoid", "associativity", "G^{v,v} groupoid: associativity", 1.0)
def _assoc(ctx):
    def one(ctx, v):
        worst = 0.0
        for e in gpd_samples(ctx, v):
            a, b, c = gp.composable_chain(e, 3, ctx.rng, ctx.tol)
            lhs = gp.gpd_mul(gp.gpd_mul(a, b, ctx.tol), c, ctx.tol)
            rhs = gp.gpd_mul(a, gp.gpd_mul(b, c, ctx.tol), ctx.tol)
            worst = max(worst, rel(lhs.g, rhs.g))
        return ctx.samples, worst
    return _gpd_rows(ctx, one)


@check("groupoid", "identities", "G^{v,v} groupoid: identity bisection", 1.0)
def _ident(ctx):
    def one(ctx, v):
        worst = 0.0
        for e in gpd_samples(ctx, v):
            r = gp.gpd_mul(e, gp.identity_at(e.tau()), ctx.tol)
            l = gp.gpd_mul(gp.identity_at(e.theta()), e, ctx.tol)
            worst = max(worst, rel(r.g, e.g), rel(l.g, e.g))
        return ctx.samples, worst
    return _gpd_rows(ctx, one)


@check("groupoid", "inverses", "G^{v,v} groupoid: inverse laws, c' b^-1 = b_-^-1 c", 1.0)
def _inverses(ctx):
    def one(ctx, v):
        worst = 0.0
        for e in gpd_samples(ctx, v):
            th, ta, inv, ident = gp.gpd_maps(e)
            worst = max(worst, gp.gpd_inverse_residual(e))
            worst = max(worst, rel(gp.gpd_mul(e, inv, ctx.tol).g, ident.g))
            worst = max(worst, rel(gp.gpd_mul(inv, e, ctx.tol).g, gp.identity_at(ta).g))
            worst = max(worst, rel(gp.gpd_maps(inv)[2].g, e.g))
        return ctx.samples, worst
    return _gpd_rows(ctx, one)


@check("groupoid", "source-target", "theta(gh) = theta(g), tau(gh) = tau(h), product forms agree", 1.0)
def _st(ctx):
    def one(ctx, v):
        worst = 0.0
        for e in gpd_samples(ctx, v):
            h = gp.sample_theta_fiber(e.tau(), ctx.rng, ctx.tol)
            m = gp.gpd_mul(e, h, ctx.tol)
            worst = max(worst, m.theta().distance(e.theta()), m.tau().distance(h.tau()),
                        gp.gpd_mul_residual(e, h))
            worst = max(worst, float(bruhat_cell_of(m.g, ctx.tol) != (v, v)))
        return ctx.samples, worst
    return _gpd_rows(ctx, one)


@check("groupoid", "representative-independence", "torus translation intertwines G^{v,v} and G^{tv,tv}", 1.0)
def _rep_indep(ctx):
    def one(ctx, v):
        worst = 0.0
        rep0 = weyl_representative(v)
        rep1 = weyl_representative(v, 7)
        t = rep1.matrix @ np.linalg.inv(rep0.matrix)
        worst = max(worst, float(np.max(np.abs(t - np.diag(np.diag(t))))))
        for e in gpd_samples(ctx, v):
            h = gp.sample_theta_fiber(e.tau(), ctx.rng, ctx.tol)
            m = gp.gpd_mul(e, h, ctx.tol)
            et = gp.GroupoidElement.of(t @ e.g, v, rep1)
            ht = gp.GroupoidElement.of(t @ h.g, v, rep1)
            mt = gp.gpd_mul(et, ht, ctx.tol)
            worst = max(worst, rel(mt.g, t @ m.g))
            worst = max(worst, rel(gp.gpd_maps(et)[2].g, t @ gp.gpd_maps(e)[2].g))
        return ctx.samples, worst
    return _gpd_rows(ctx, one)


def _action_sample(ctx, w: WeylElement) -> gp.ActionGroupoidElement:
    rep = weyl_representative(w)
    for _ in range(20):
        a = gp.ActionGroupoidElement(sample_flag(w, ctx.rng, rep), random_lower(w.n, ctx.rng))
        try:
            gp.action_tau(a, ctx.tol)
        except DBCError:
            continue
        return a
    raise DBCError("no usable action groupoid sample")


def _action_next(ctx, a: gp.ActionGroupoidElement) -> gp.ActionGroupoidElement:
    y = gp.action_tau(a, ctx.tol)
    for _ in range(20):
        b = gp.ActionGroupoidElement(y, random_lower(y.cell.n, ctx.rng))
        try:
            gp.action_tau(b, ctx.tol)
        except DBCError:
            continue
        return b
    raise DBCError("no composable action groupoid sample")


def _agpd_same(a: gp.ActionGroupoidElement, b: gp.ActionGroupoidElement) -> float:
    if a.flag.cell != b.flag.cell:
        return 1.0
    return max(a.flag.distance(b.flag), rel(a.b_minus, b.b_minus))


@check("groupoid", "action-groupoid-axioms", "(G/B) x B_- groupoid axioms", 1.0)
def _agpd_axioms(ctx):
    def one(ctx, w):
        worst = 0.0
        for _ in range(ctx.samples):
            a = _action_sample(ctx, w)
            b = _action_next(ctx, a)
            c = _action_next(ctx, b)
            mul = lambda x, y: gp.action_gpd_mul(x, y, ctx.tol)
            worst = max(worst, _agpd_same(mul(mul(a, b), c), mul(a, mul(b, c))))
            worst = max(worst, _agpd_same(mul(gp.action_identity(a.flag), a), a))
            worst = max(worst, _agpd_same(mul(a, gp.action_identity(gp.action_tau(a))), a))
            th, ta, inv = gp.action_gpd(a, ctx.tol)
            worst = max(worst, _agpd_same(mul(a, inv), gp.action_identity(th)))
            worst = max(worst, _agpd_same(mul(inv, a), gp.action_identity(ta)))
        return ctx.samples, worst
    return _gpd_rows(ctx, one)


@check("groupoid", "embedding-intertwines", "I_v intertwines the structure maps on F^{v,v}", 1.0)
def _embed_intertwine(ctx):
    def one(ctx, v):
        worst = 0.0
        for e in gpd_samples(ctx, v):
            h = gp.sample_theta_fiber(e.tau(), ctx.rng, ctx.tol)
            Ie, Ih = gp.embed_Iv(e.point), gp.embed_Iv(h.point)
            worst = max(worst, _agpd_same(gp.embed_Iv(gp.gpd_mul(e, h, ctx.tol).point),
                                          gp.action_gpd_mul(Ie, Ih, ctx.tol)))
            worst = max(worst, _agpd_same(gp.embed_Iv(gp.gpd_maps(e)[2].point),
                                          gp.action_gpd(Ie, ctx.tol)[2]))
            worst = max(worst, Ie.flag.distance(e.theta()),
                        gp.action_tau(Ie, ctx.tol).distance(e.tau()))
        return ctx.samples, worst
    return _gpd_rows(ctx, one)


@check("groupoid", "embedding-image", "I_v(G^{u,v}) lies in F^{u,v}, J_v(G^{u,v}) in F^{v,u}", None)
def _embed_image(ctx):
    def one(ctx, u, v):
        bad = 0
        for p in cell_samples(ctx, u, v):
            bad += not gp.in_F(gp.embed_Iv(p), u, v, ctx.tol)
            bad += not gp.in_F(gp.embed_Jv(p), v, u, ctx.tol)
        return ctx.samples, float(bad)
    return map_rows(ctx, ctx.pairs(), one)


@check("groupoid", "twist", "twist: three descriptions agree, involutive, lands in G^{v,u}", 1.0)
def _twist(ctx):
    def one(ctx, u, v):
        worst = 0.0
        for p in cell_samples(ctx, u, v):
            t = gp.twist(p, ctx.tol)
            worst = max(worst, gp.twist_residual(p), rel(gp.twist(t, ctx.tol).g, p.g))
            worst = max(worst, float(bruhat_cell_of(t.g, ctx.tol) != (v, u)))
        return ctx.samples, worst
    return map_rows(ctx, ctx.pairs(), one)


def _actors(ctx, p: CellPoint):
    g = gp.sample_tau_fiber(p.flag(), ctx.rng, ctx.tol)
    h = gp.sample_theta_fiber(p.coflag(), ctx.rng, ctx.tol)
    return g, h


@check("groupoid", "actions", "left and right actions: identities, two forms, commutation, associativity", 1.0)
def _actions(ctx):
    def one(ctx, u, v):
        worst = 0.0
        for p in cell_samples(ctx, u, v):
            g, h = _actors(ctx, p)
            gx, xh = gp.act_left(g, p, ctx.tol), gp.act_right(p, h, ctx.tol)
            worst = max(worst, gp.act_left_residual(g, p), gp.act_right_residual(p, h))
            worst = max(worst, rel(gp.act_right(gx, h, ctx.tol).g, gp.act_left(g, xh, ctx.tol).g))
            worst = max(worst, rel(gp.act_left(gp.identity_at(p.flag()), p, ctx.tol).g, p.g))
            worst = max(worst, rel(gp.act_right(p, gp.identity_at(p.coflag()), ctx.tol).g, p.g))
            g2 = gp.sample_tau_fiber(g.theta(), ctx.rng, ctx.tol)
            lhs = gp.act_left(gp.gpd_mul(g2, g, ctx.tol), p, ctx.tol)
            worst = max(worst, rel(lhs.g, gp.act_left(g2, gx, ctx.tol).g))
            worst = max(worst, float(bruhat_cell_of(gx.g, ctx.tol) != (u, v)),
                        float(bruhat_cell_of(xh.g, ctx.tol) != (u, v)))
        return ctx.samples, worst
    return map_rows(ctx, ctx.pairs(), one)


@check("groupoid", "x-alpha-invariance", "pi^#(tau^* alpha) is left invariant on (G/B) x B_-", 10.0)
def _x_alpha(ctx):
    def one(ctx, u, v):
        k = min(ctx.samples, 10)
        worst = 0.0
        for p in cell_samples(ctx, u, v, k):
            a = gp.embed_Iv(p)
            worst = max(worst, gp.x_alpha_defect(a, _action_next(ctx, a), ctx.tol))
        return k, worst
    return map_rows(ctx, ctx.pairs(), one)


def _graph_dev(res) -> float:
    defect, rank, expected = res
    return max(defect, float(rank != expected))


@check("groupoid", "graph-coisotropy-mul", "graph of the multiplication is coisotropic", 10.0)
def _graph_mul(ctx):
    def one(ctx, v):
        k = min(ctx.samples, 5)
        return k, max(_graph_dev(gp.mul_graph_defect(e, ctx.rng)) for e in gpd_samples(ctx, v, k))
    return _gpd_rows(ctx, one)


@check("groupoid", "graph-coisotropy-actions", "graphs of both actions are coisotropic", 10.0)
def _graph_act(ctx):
    def one(ctx, u, v):
        k = min(ctx.samples, 3)
        worst = 0.0
        for p in cell_samples(ctx, u, v, k):
            worst = max(worst, _graph_dev(gp.action_graph_defect(p, "left", ctx.rng)),
                        _graph_dev(gp.action_graph_defect(p, "right", ctx.rng)))
        return k, worst
    return map_rows(ctx, ctx.pairs(), one)


# ---------------------------------------------------------------------------
# leaves suite


def _leaf_pairs(ctx):
    return ctx.pairs()


@check("leaves", "Tuv-definitional", "elements (t^u)^-1 t^v pass the T^{u,v} test", None)
def _tuv(ctx):
    def one(ctx, u, v):
        test = lv.TorusSubgroupTest.of(u, v)
        bad = sum(not test(lv.Tuv_element(random_torus(u.n, ctx.rng), u, v))
                  for _ in range(ctx.samples))
        return ctx.samples, float(bad)
    return map_rows(ctx, _leaf_pairs(ctx), one)


@check("leaves", "chi", "chi from minors versus factors; chi(ga) = a^2 chi(g)", 1.0)
def _chi(ctx):
    def one(ctx, u, v):
        worst = 0.0
        for p in cell_samples(ctx, u, v):
            worst = max(worst, rel(lv.chi_rep(p).array(), lv.chi_from_factors(p).array()))
            a = random_torus(u.n, ctx.rng)
            pa = CellPoint.make(p.g @ a.matrix(), u, v, p.urep, p.vrep)
            worst = max(worst, rel(lv.chi_rep(pa).array(), ((a ** 2) * lv.chi_rep(p)).array()))
        return ctx.samples, worst
    return map_rows(ctx, _leaf_pairs(ctx), one)


@check("leaves", "casimirs", "Delta_alpha (alpha in I(u,v)) and characters of chi are Casimirs", 10.0)
def _casimirs(ctx):
    def one(ctx, u, v):
        worst = 0.0
        for p in cell_samples(ctx, u, v):
            worst = max(worst, lv.casimir_minor_defect(p), lv.casimir_chi_defect(p))
        return ctx.samples, worst
    return map_rows(ctx, _leaf_pairs(ctx), one)


@check("leaves", "square-identity", "Delta_alpha(g)^2 = Delta_alpha(u) Delta_alpha(v) t^omega_alpha", 10.0)
def _square(ctx):
    def one(ctx, u, v):
        return ctx.samples, max(lv.square_identity_defect(p) for p in cell_samples(ctx, u, v))
    return map_rows(ctx, _leaf_pairs(ctx), one)


@check("leaves", "leaf-rank", "leaf dimension l(u) + l(v) + dim T^{u,v}", None)
def _leaf_rank(ctx):
    def one(ctx, u, v):
        e = lv.expected_leaf_rank(u, v)
        return ctx.samples, float(sum(lv.leaf_rank(p) != e for p in cell_samples(ctx, u, v)))
    return map_rows(ctx, _leaf_pairs(ctx), one)


@check("leaves", "count-cross-check", "|T^(2) / (T^(2) cap T_stab)| = 2^|I(u,v)|", None)
def _count(ctx):
    def one(ctx, u, v):
        c = lv.leaf_census(u, v)
        return 1, float(abs(c.quotient_order() - c.count_per_level))
    return map_rows(ctx, _leaf_pairs(ctx), one)


@check("leaves", "sigma-groupoid", "leaf through v: closed under product and inverse, rank 2 l(v)", 10.0)
def _sigma(ctx):
    def one(ctx, v):
        worst = 0.0
        for _ in range(ctx.samples):
            e1 = lv.sample_sigma(v, ctx.rng)
            e2 = lv.sample_sigma_theta_fiber(e1.tau(), ctx.rng)
            m = gp.gpd_mul(e1, e2, ctx.tol)
            inv = gp.gpd_maps(e1)[2]
            worst = max(worst, *lv.sigma_condition(m.g, e1.rep), *lv.sigma_condition(inv.g, e1.rep))
            worst = max(worst, float(lv.leaf_rank(e1.point) != 2 * v.length))
        return ctx.samples, worst
    return _gpd_rows(ctx, one)


@check("leaves", "action-invariance", "actions of the leaf groupoids preserve leaves of G^{u,v}", None)
def _leaf_actions(ctx):
    def one(ctx, u, v):
        bad = 0
        for p in cell_samples(ctx, u, v):
            g = lv.sample_sigma_tau_fiber(p.flag(), ctx.rng)
            h = lv.sample_sigma_theta_fiber(p.coflag(), ctx.rng)
            bad += not lv.same_leaf(p, gp.act_left(g, p, ctx.tol), 10 * ctx.tol.tol_eq)
            bad += not lv.same_leaf(p, gp.act_right(p, h, ctx.tol), 10 * ctx.tol.tol_eq)
        return ctx.samples, float(bad)
    return map_rows(ctx, _leaf_pairs(ctx), one)


@check("leaves", "twist-leaves", "twist maps leaves to leaves", None)
def _twist_leaves(ctx):
    def one(ctx, u, v):
        bad = 0
        tol = 10 * ctx.tol.tol_eq
        for p in cell_samples(ctx, u, v):
            g = lv.sample_sigma_tau_fiber(p.flag(), ctx.rng)
            same = gp.act_left(g, p, ctx.tol)
            other = sample_double_cell(u, v, ctx.rng, tol=ctx.tol)
            for q in (same, other):
                bad += lv.same_leaf(p, q, tol) != lv.same_leaf(gp.twist(p), gp.twist(q), tol)
        return ctx.samples, float(bad)
    return map_rows(ctx, _leaf_pairs(ctx), one)


def _small_xi(ctx, g, speed: float = 0.1):
    """Random dual element whose dressing field at ``g`` has size ``speed * |g|``."""
    X, Y = lv.random_dual_element(g.shape[0], ctx.rng, 1.0)
    d = float(np.linalg.norm(po.dressing_eval((X, Y), g)))
    s = speed * float(np.linalg.norm(g)) / max(d, 1e-300)
    return s * X, s * Y


@check("leaves", "dressing-flow", "dressing flows stay on the leaf and keep its rank", None)
def _flow(ctx):
    def one(ctx, u, v):
        k = min(ctx.samples, 3)
        bad = 0
        for p in cell_samples(ctx, u, v, k):
            xi = _small_xi(ctx, p.g)
            g2 = lv.dressing_flow(p.g, xi)
            if not np.all(np.isfinite(g2)):
                bad += 1
                continue
            q = CellPoint.make(g2, u, v, p.urep, p.vrep)
            bad += not lv.same_leaf(p, q, 1e-5)
            bad += lv.leaf_rank(p) != lv.leaf_rank(q)
        return k, float(bad)
    return map_rows(ctx, _leaf_pairs(ctx), one)


# ---------------------------------------------------------------------------
# golden suite (fixed SL(2), SL(3) examples)

from . import golden as _golden  # noqa: E402  (registers the golden checks)


# ---------------------------------------------------------------------------
# runner


def select(suites: Iterable[str]) -> list[Check]:
    wanted = set(suites)
    return [c for c in REGISTRY if c.suite in wanted]


def run_check(c: Check, cfg: RunConfig) -> list[po.CheckResult]:
    ctx = Ctx(cfg, check_seed(cfg.seed, c.id))
    tol = 0.0 if c.tol_factor is None else float(f"{c.tol_factor * cfg.tol.tol_eq:.12g}")
    try:
        rows = list(c.fn(ctx))
    except (DBCError, np.linalg.LinAlgError, ValueError, ZeroDivisionError) as exc:
        return [po.CheckResult(c.id, c.anchor, cfg.n, None, None, 0, float("inf"), tol, False,
                               note=f"{type(exc).__name__}: {exc}")]
    out = []
    for u, v, s, dev in rows:
        dev = float(dev)
        ok = bool(np.isfinite(dev) and dev <= tol)
        out.append(po.CheckResult(c.id, c.anchor, cfg.n, _w(u), _w(v), int(s), dev, tol, ok))
    return out


def run(cfg: RunConfig, progress: Callable[[str], None] | None = None) -> dict:
    results = []
    for c in select(cfg.suites):
        if progress:
            progress(c.id)
        results.extend(run_check(c, cfg))
    entries = sorted((r.to_json() for r in results),
                     key=lambda d: (d["check"], d["u"] or [], d["v"] or []))
    failed = sum(not e["pass"] for e in entries)
    return {"schema": SCHEMA,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "config": cfg.to_json(),
            "summary": {"checks": len(entries), "passed": len(entries) - failed, "failed": failed},
            "pass": failed == 0,
            "checks": entries}
