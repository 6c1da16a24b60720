"""Symplectic leaves of pi_st inside double Bruhat cells.

A leaf of ``G^{u,v}`` is cut out by the torus invariant ``chi`` (modulo the
subtorus ``T^{u,v}``) together with the principal minors indexed by
``I(u,v)``.  Equality of ``chi`` classes is tested through the integer
characters that vanish on ``T^{u,v}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .factorize import CellPoint, FlagPoint, sample_double_cell
from .groupoid import (GroupoidElement, act_left, act_right, gpd_maps, gpd_mul,
                       sample_theta_fiber, twist)
from .numkernel import (DEFAULT_TOL, SamplingExhaustedError, Tolerance, csqrt,
                        gaussian_decompose, leading_minor)
from .poisson import (cell_tangent_rt, dressing_eval, dual_generators, pist_eval,
                      rt_gradient, sl_basis)
from .rootdata import (CharacterVector, TorusElement, WeylElement, WeylRep,
                       enumerate_order2, fixed_simples, fundamental_weight,
                       kernel_characters, torus_conjugate, torus_subgroup_dim,
                       weyl_representative)

MINOR_FLOOR = 1e-12


def delta_minor(g, k: int):
    """``Delta_{omega_k}``: the leading principal ``k x k`` minor (jet-safe)."""
    return leading_minor(g, k)


def I_uv(u: WeylElement, v: WeylElement) -> list[int]:
    return sorted(fixed_simples(u) & fixed_simples(v))


def chi_diag(g, urep: WeylRep, vrep: WeylRep) -> list:
    """Diagonal of ``[u^-1 g]_0 ([g v^-1]_0)^v`` (jet-safe)."""
    _, d1, _ = gaussian_decompose(urep.inverse_matrix @ g)
    _, d2, _ = gaussian_decompose(g @ vrep.inverse_matrix)
    v = vrep.weyl
    n = v.n
    return [d1[i, i] * d2[v(i + 1) - 1, v(i + 1) - 1] for i in range(n)]


def chi_rep(p: CellPoint) -> TorusElement:
    return TorusElement.from_array([complex(x) for x in chi_diag(p.g, p.urep, p.vrep)])


def chi_from_factors(p: CellPoint) -> TorusElement:
    """Same invariant read off ``g = c t n = n_- t_- c'``: ``t (t_-)^v``."""
    _, b = p.left()
    bm, _ = p.right()
    t = TorusElement.from_array(np.diag(b))
    tm = TorusElement.from_array(np.diag(bm))
    return t * torus_conjugate(tm, p.v)


@dataclass(frozen=True)
class TorusSubgroupTest:
    u: WeylElement
    v: WeylElement
    kernel_chars: tuple[CharacterVector, ...]
    dim: int

    @classmethod
    def of(cls, u: WeylElement, v: WeylElement) -> "TorusSubgroupTest":
        return cls(u, v, tuple(kernel_characters(u, v)), torus_subgroup_dim(u, v))

    def __call__(self, t: TorusElement, tol: float = DEFAULT_TOL.tol_eq) -> bool:
        return all(abs(lam(t) - 1) <= tol for lam in self.kernel_chars)


def Tuv_member(t: TorusElement, u: WeylElement, v: WeylElement,
               tol: float = DEFAULT_TOL.tol_eq) -> bool:
    return TorusSubgroupTest.of(u, v)(t, tol)


def Tuv_element(t: TorusElement, u: WeylElement, v: WeylElement) -> TorusElement:
    """``(t^u)^-1 t^v``."""
    return torus_conjugate(t, u).inverse() * torus_conjugate(t, v)


@dataclass
class LeafInvariant:
    chi: TorusElement
    minors: dict[int, complex] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"chi": [[z.real, z.imag] for z in self.chi.diag],
                "minors": {str(k): [m.real, m.imag] for k, m in self.minors.items()}}


def leaf_invariant(p: CellPoint) -> LeafInvariant:
    return LeafInvariant(chi_rep(p), {k: complex(delta_minor(p.g, k)) for k in I_uv(p.u, p.v)})


def _minors_equal(a: complex, b: complex, tol: float) -> bool:
    return abs(a - b) <= tol * max(abs(a), abs(b)) + MINOR_FLOOR


def same_leaf(p1: CellPoint, p2: CellPoint, tol: float = DEFAULT_TOL.tol_eq) -> bool:
    if (p1.u, p1.v) != (p2.u, p2.v):
        return False
    if p1.urep.seed != p2.urep.seed or p1.vrep.seed != p2.vrep.seed:
        raise ValueError("points use different representatives")
    test = TorusSubgroupTest.of(p1.u, p1.v)
    ratio = chi_rep(p1) * chi_rep(p2).inverse()
    if not test(ratio, tol):
        return False
    return all(_minors_equal(complex(delta_minor(p1.g, k)), complex(delta_minor(p2.g, k)), tol)
               for k in I_uv(p1.u, p1.v))


def leaf_rank(p: CellPoint, tol: Tolerance = DEFAULT_TOL) -> int:
    """Rank of ``pi_st`` at ``p``, i.e. the dimension of its leaf."""
    return pist_eval(p.g).rank(tol)


def expected_leaf_rank(u: WeylElement, v: WeylElement) -> int:
    return u.length + v.length + torus_subgroup_dim(u, v)


# ---------------------------------------------------------------------------
# census


@dataclass
class LeafCensus:
    u: WeylElement
    v: WeylElement
    fixed: list[int]
    count_per_level: int
    stab_test: Callable[[TorusElement], bool]
    square_identity_check: Callable[[CellPoint], float]

    def stab_order2(self) -> int:
        """``|T^(2) cap T_stab|``."""
        return sum(1 for t in enumerate_order2(self.u.n) if self.stab_test(t))

    def quotient_order(self) -> int:
        """``|T^(2) / (T^(2) cap T_stab)|``."""
        return (2 ** (self.u.n - 1)) // self.stab_order2()


def leaf_census(u: WeylElement, v: WeylElement) -> LeafCensus:
    fixed = I_uv(u, v)
    n = u.n
    weights = [fundamental_weight(n, k) for k in fixed]
    tuv = TorusSubgroupTest.of(u, v)

    def stab_test(t: TorusElement, tol: float = DEFAULT_TOL.tol_eq) -> bool:
        return all(abs(w(t) - 1) <= tol for w in weights) and tuv(t ** 2, tol)

    def square_identity(p: CellPoint) -> float:
        return square_identity_defect(p)

    return LeafCensus(u, v, fixed, 2 ** len(fixed), stab_test, square_identity)


def square_identity_defect(p: CellPoint) -> float:
    """``Delta_k(g)^2 = Delta_k(u) Delta_k(v) chi(g)^{omega_k}`` for ``k`` in ``I(u,v)``."""
    t = chi_rep(p)
    worst = 0.0
    for k in I_uv(p.u, p.v):
        lhs = complex(delta_minor(p.g, k)) ** 2
        rhs = (complex(delta_minor(p.urep.matrix, k)) * complex(delta_minor(p.vrep.matrix, k))
               * fundamental_weight(p.n, k)(t))
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return worst


# ---------------------------------------------------------------------------
# Casimirs and dressing


def _hamiltonian_defect(f: Callable, g) -> float:
    grad = rt_gradient(f, g)
    P = pist_eval(g).mat
    # pi_st vanishes on the torus, so the scale carries an absolute floor
    return float(np.linalg.norm(P @ grad) / max(1.0, np.linalg.norm(P) * np.linalg.norm(grad)))


def casimir_minor_defect(p: CellPoint) -> float:
    """``|pi^#(d Delta_k)|`` (normalized) for ``k`` in ``I(u,v)``."""
    out = 0.0
    for k in I_uv(p.u, p.v):
        out = max(out, _hamiltonian_defect(lambda x, k=k: delta_minor(x, k), p.g))
    return out


def casimir_chi_defect(p: CellPoint) -> float:
    """``|pi^#(d(lam o chi))|`` (normalized) for kernel characters ``lam`` of ``T^{u,v}``."""
    out = 0.0
    for lam in kernel_characters(p.u, p.v):
        def f(x, lam=lam):
            d = chi_diag(x, p.urep, p.vrep)
            val = 1.0
            for di, e in zip(d, lam.exps):
                if e:
                    val = val * di ** e
            return val
        out = max(out, _hamiltonian_defect(f, p.g))
    return out


def dressing_span_rank(g, tol: float = 1e-9) -> int:
    """Rank of the span of all dressing vectors at ``g`` (right-trivialized)."""
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    bas = sl_basis(n)
    gi = np.linalg.inv(g)
    cols = np.array([bas.coef(dressing_eval(xi, g) @ gi) for xi in dual_generators(n)]).T
    s = np.linalg.svd(cols, compute_uv=False)
    return int(np.sum(s > tol * max(s[0], 1e-300)))


def _rk4(g, f, steps: int, h: float) -> np.ndarray:
    for _ in range(steps):
        k1 = f(g)
        k2 = f(g + 0.5 * h * k1)
        k3 = f(g + 0.5 * h * k2)
        k4 = f(g + h * k3)
        g = g + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return g


def dressing_flow(g, xi, steps: int = 100, h: float = 1e-2, rtol: float = 1e-10,
                  max_steps: int = 25600) -> np.ndarray:
    """Fourth-order Runge-Kutta along the dressing field of ``xi`` up to time ``steps * h``.

    The step is halved until two successive resolutions agree to ``rtol``.
    """
    g = np.asarray(g, dtype=complex)
    f = lambda x: dressing_eval(xi, x)
    T = steps * h
    prev = _rk4(g, f, steps, h)
    while steps < max_steps:
        steps *= 2
        cur = _rk4(g, f, steps, T / steps)
        if np.max(np.abs(cur - prev)) <= rtol * max(1.0, float(np.max(np.abs(cur)))):
            return cur
        prev = cur
    return prev


def random_dual_element(n: int, rng: np.random.Generator, scale: float = 0.3):
    gens = dual_generators(n)
    coeffs = scale * (rng.normal(size=len(gens)) + 1j * rng.normal(size=len(gens)))
    X = sum(c * a for c, (a, _) in zip(coeffs, gens))
    Y = sum(c * b for c, (_, b) in zip(coeffs, gens))
    return X, Y


def leaf_tangency_defect(p: CellPoint) -> float:
    """Image of ``pi^#`` inside the tangent space of ``G^{u,v}``."""
    basis, _ = cell_tangent_rt(p.g, p.u, p.v)
    P = pist_eval(p.g).mat
    res = P - basis @ (basis.conj().T @ P)
    return float(np.linalg.norm(res) / max(1.0, np.linalg.norm(P)))


# ---------------------------------------------------------------------------
# the leaf through vbar


def sigma_condition(g, rep: WeylRep) -> tuple[float, float]:
    """Residuals of ``[v^-1 g]_0 ([g v^-1]_0)^v = e`` and ``Delta_k(g) = Delta_k(v)``."""
    d = np.array([complex(x) for x in chi_diag(g, rep, rep)])
    r1 = float(np.max(np.abs(d - 1)))
    r2 = 0.0
    for k in fixed_simples(rep.weyl):
        a, b = complex(delta_minor(g, k)), complex(delta_minor(rep.matrix, k))
        r2 = max(r2, abs(a - b) / max(1.0, abs(b)))
    return r1, r2


def in_sigma(e: GroupoidElement, tol: float = DEFAULT_TOL.tol_eq) -> bool:
    r1, r2 = sigma_condition(e.g, e.rep)
    return r1 <= tol and r2 <= tol


@dataclass
class LeafCorrection:
    torus: np.ndarray
    signs: np.ndarray


def project_to_sigma(e: GroupoidElement) -> tuple[GroupoidElement, LeafCorrection]:
    """Right torus translate of ``e`` lying on the leaf through ``vbar``.

    Solves ``a^2 = chi(g)^-1`` entrywise (principal square roots, with the last
    entry flipped if needed so that ``det a = 1``), then fixes the signs of the
    minors in ``I(v)`` with an element of order two.  Right translation by the
    torus keeps ``theta``.
    """
    rep = e.rep
    n = e.v.n
    chi = np.array([complex(x) for x in chi_diag(e.g, rep, rep)])
    a = np.array([csqrt(1.0 / c) for c in chi])
    if abs(np.prod(a) + 1) < abs(np.prod(a) - 1):
        a[-1] = -a[-1]
    g = e.g @ np.diag(a)
    target = {k: complex(delta_minor(rep.matrix, k)) for k in fixed_simples(e.v)}
    s = np.ones(n)
    for k in range(1, n):
        if k in target:
            cur = complex(delta_minor(g, k))
            s[k - 1] = 1.0 if abs(cur - target[k]) <= abs(cur + target[k]) else -1.0
    eps = np.ones(n)
    prev = 1.0
    for k in range(1, n):
        eps[k - 1] = s[k - 1] / prev
        prev = s[k - 1]
    eps[-1] = 1.0 / np.prod(eps[:-1])
    out = GroupoidElement.of(g @ np.diag(eps), e.v, rep)
    return out, LeafCorrection(a, eps)


def sample_sigma(v: WeylElement, rng: np.random.Generator, rep: WeylRep | None = None,
                 tol: Tolerance = DEFAULT_TOL, tries: int = 20) -> GroupoidElement:
    rep = rep or weyl_representative(v)
    for _ in range(tries):
        p = sample_double_cell(v, v, rng, rep_seeds=(rep.seed, rep.seed), tol=tol)
        e, _ = project_to_sigma(GroupoidElement.of(p.g, v, rep))
        if in_sigma(e, 1e-8):
            return e
    raise SamplingExhaustedError("could not land on the leaf through vbar")


def sample_sigma_theta_fiber(y: FlagPoint, rng: np.random.Generator,
                             tol: Tolerance = DEFAULT_TOL) -> GroupoidElement:
    """Point of the leaf through ``vbar`` with prescribed ``theta``."""
    e, _ = project_to_sigma(sample_theta_fiber(y, rng, tol))
    return e


def sample_sigma_tau_fiber(y: FlagPoint, rng: np.random.Generator,
                           tol: Tolerance = DEFAULT_TOL) -> GroupoidElement:
    """Point of the leaf through ``vbar`` with prescribed ``tau`` (inverse of a theta sample)."""
    return gpd_maps(sample_sigma_theta_fiber(y, rng, tol))[2]


# ---------------------------------------------------------------------------
# leaf groupoid report


def leaf_groupoid_check(v: WeylElement, seed: int, samples: int = 5,
                        u: WeylElement | None = None) -> dict:
    """Closure, nondegeneracy and action invariance for the leaf through ``vbar``."""
    rng = np.random.default_rng(seed)
    rep = weyl_representative(v)
    u = u if u is not None else v
    urep = weyl_representative(u)
    worst = {"mul_closure": 0.0, "inverse_closure": 0.0, "rank": 0, "left_action": 0,
             "right_action": 0, "sigma_membership": 0.0}
    ok = True
    for _ in range(samples):
        e1 = sample_sigma(v, rng, rep)
        e2 = sample_sigma_theta_fiber(e1.tau(), rng)
        m = gpd_mul(e1, e2)
        inv = gpd_maps(e1)[2]
        r_mem = max(sigma_condition(e1.g, rep) + sigma_condition(e2.g, rep))
        r_mul = max(sigma_condition(m.g, rep))
        r_inv = max(sigma_condition(inv.g, rep))
        worst["sigma_membership"] = max(worst["sigma_membership"], r_mem)
        worst["mul_closure"] = max(worst["mul_closure"], r_mul)
        worst["inverse_closure"] = max(worst["inverse_closure"], r_inv)
        rk = leaf_rank(e1.point)
        if rk != 2 * v.length:
            worst["rank"] += 1
        # actions of the leaf groupoids over u and v on G^{u,v}
        x = sample_double_cell(u, v, rng, rep_seeds=(urep.seed, rep.seed))
        g = sample_sigma_tau_fiber(x.flag(), rng)
        h = sample_sigma_theta_fiber(x.coflag(), rng)
        if not same_leaf(x, act_left(g, x), 1e-8):
            worst["left_action"] += 1
        if not same_leaf(x, act_right(x, h), 1e-8):
            worst["right_action"] += 1
    ok = (max(worst["sigma_membership"], worst["mul_closure"], worst["inverse_closure"]) <= 1e-8
          and worst["rank"] == 0 and worst["left_action"] == 0 and worst["right_action"] == 0)
    return {"v": list(v.perm), "u": list(u.perm), "seed": seed, "samples": samples,
            "checks": worst, "pass": bool(ok)}


def leaf_report(u: WeylElement, v: WeylElement, seed: int, samples: int = 5) -> dict:
    """JSON report for the leaves of ``G^{u,v}``."""
    rng = np.random.default_rng(seed)
    census = leaf_census(u, v)
    checks = []
    sq = cm = cc = 0.0
    rank_ok = True
    for _ in range(samples):
        p = sample_double_cell(u, v, rng)
        sq = max(sq, square_identity_defect(p))
        cm = max(cm, casimir_minor_defect(p))
        cc = max(cc, casimir_chi_defect(p))
        rank_ok &= leaf_rank(p) == expected_leaf_rank(u, v)
    checks.append({"check": "square-identity", "max_dev": sq, "pass": bool(sq <= 1e-8)})
    checks.append({"check": "casimir-minors", "max_dev": cm, "pass": bool(cm <= 1e-8)})
    checks.append({"check": "casimir-chi", "max_dev": cc, "pass": bool(cc <= 1e-8)})
    checks.append({"check": "leaf-rank", "expected": expected_leaf_rank(u, v), "pass": bool(rank_ok)})
    q = census.quotient_order()
    checks.append({"check": "count-cross-check", "quotient_order": q,
                   "pass": q == census.count_per_level})
    return {"u": list(u.perm), "v": list(v.perm), "I_uv": census.fixed,
            "count_per_level": census.count_per_level, "stab_order": census.stab_order2(),
            "samples": samples, "checks": checks,
            "pass": all(bool(c["pass"]) for c in checks)}


__all__ = [name for name in dir() if not name.startswith("_")]
