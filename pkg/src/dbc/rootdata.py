"""Type A root data: permutations as Weyl group elements, torus characters, lattices.

Permutations are stored 1-based in one-line notation, ``perm[i-1] = w(i)``.  The
matrix of ``w`` sends ``e_j`` to ``+-e_{w(j)}``, so composition of permutations
matches matrix multiplication.

>>> w = WeylElement.from_word(3, [1, 2])
>>> w.perm, w.length
((2, 3, 1), 2)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations, product
from typing import Iterable, Sequence

import numpy as np

from .numkernel import DEFAULT_TOL, Tolerance


@dataclass(frozen=True)
class WeylElement:
    perm: tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(x) for x in self.perm)
        if sorted(p) != list(range(1, len(p) + 1)):
            raise ValueError(f"not a permutation of 1..n: {self.perm}")
        object.__setattr__(self, "perm", p)

    # -- constructors
    @classmethod
    def identity(cls, n: int) -> "WeylElement":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def simple(cls, n: int, k: int) -> "WeylElement":
        p = list(range(1, n + 1))
        p[k - 1], p[k] = p[k], p[k - 1]
        return cls(tuple(p))

    @classmethod
    def longest(cls, n: int) -> "WeylElement":
        return cls(tuple(range(n, 0, -1)))

    @classmethod
    def from_word(cls, n: int, word: Iterable[int]) -> "WeylElement":
        w = cls.identity(n)
        for k in word:
            w = w * cls.simple(n, k)
        return w

    # -- structure
    @property
    def n(self) -> int:
        return len(self.perm)

    def __call__(self, i: int) -> int:
        return self.perm[i - 1]

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        return WeylElement(tuple(self.perm[j - 1] for j in other.perm))

    def inverse(self) -> "WeylElement":
        inv = [0] * self.n
        for i, wi in enumerate(self.perm, start=1):
            inv[wi - 1] = i
        return WeylElement(tuple(inv))

    @property
    def inversions(self) -> list[tuple[int, int]]:
        """Pairs ``(i, j)`` with ``i < j`` and ``w(i) > w(j)``."""
        p = self.perm
        return [(i + 1, j + 1) for i in range(self.n) for j in range(i + 1, self.n)
                if p[i] > p[j]]

    @property
    def length(self) -> int:
        return len(self.inversions)

    @property
    def reduced_word(self) -> tuple[int, ...]:
        # peel right descents: w = w' s_k with l(w') = l(w) - 1
        word: list[int] = []
        p = list(self.perm)
        while True:
            for k in range(1, self.n):
                if p[k - 1] > p[k]:
                    p[k - 1], p[k] = p[k], p[k - 1]
                    word.append(k)
                    break
            else:
                break
        return tuple(reversed(word))

    def is_identity(self) -> bool:
        return self.perm == tuple(range(1, self.n + 1))

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        for j, wj in enumerate(self.perm):
            m[wj - 1, j] = 1.0
        return m

    def rank_matrix(self) -> np.ndarray:
        """``r[i-1, j-1] = #{k <= j : w(k) >= i}``."""
        n = self.n
        r = np.zeros((n, n), dtype=int)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                r[i - 1, j - 1] = sum(1 for k in range(1, j + 1) if self(k) >= i)
        return r

    def to_json(self) -> list[int]:
        return list(self.perm)

    def __str__(self):
        return "[" + ",".join(map(str, self.perm)) + "]"


def all_weyl(n: int) -> list[WeylElement]:
    return [WeylElement(p) for p in permutations(range(1, n + 1))]


def bruhat_leq(w1: WeylElement, w2: WeylElement) -> bool:
    """Bruhat order through entrywise comparison of rank matrices."""
    if w1.n != w2.n:
        raise ValueError("Weyl elements of different rank")
    return bool(np.all(w1.rank_matrix() <= w2.rank_matrix()))


def bruhat_leq_subword(w1: WeylElement, w2: WeylElement) -> bool:
    """Brute force: ``w1`` is a subword product of a reduced word of ``w2``."""
    word = w2.reduced_word
    n = w1.n
    for mask in product((0, 1), repeat=len(word)):
        if WeylElement.from_word(n, [k for k, m in zip(word, mask) if m]) == w1:
            return True
    return False


def fixed_simples(u: WeylElement) -> frozenset[int]:
    """Simple indices ``k`` with ``u({1..k}) = {1..k}``."""
    return frozenset(k for k in range(1, u.n)
                     if set(u.perm[:k]) == set(range(1, k + 1)))


# ---------------------------------------------------------------------------
# torus


@dataclass(frozen=True)
class TorusElement:
    diag: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "diag", tuple(complex(x) for x in self.diag))

    @classmethod
    def from_array(cls, d) -> "TorusElement":
        return cls(tuple(np.asarray(d, dtype=complex).ravel()))

    @classmethod
    def identity(cls, n: int) -> "TorusElement":
        return cls((1.0,) * n)

    @property
    def n(self) -> int:
        return len(self.diag)

    def array(self) -> np.ndarray:
        return np.array(self.diag, dtype=complex)

    def matrix(self) -> np.ndarray:
        return np.diag(self.array())

    def __mul__(self, other: "TorusElement") -> "TorusElement":
        return TorusElement.from_array(self.array() * other.array())

    def inverse(self) -> "TorusElement":
        return TorusElement.from_array(1.0 / self.array())

    def __pow__(self, k: int) -> "TorusElement":
        return TorusElement.from_array(self.array() ** k)

    def is_valid(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return abs(np.prod(self.array()) - 1) <= tol.tol_eq

    def close_to(self, other: "TorusElement", tol: float) -> bool:
        a, b = self.array(), other.array()
        return bool(np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.abs(b))))


def random_torus(n: int, rng: np.random.Generator, lo: float = 0.5, hi: float = 2.0) -> TorusElement:
    mod = rng.uniform(lo, hi, size=n)
    phase = rng.uniform(0, 2 * np.pi, size=n)
    d = mod * np.exp(1j * phase)
    d[-1] = 1.0 / np.prod(d[:-1])
    return TorusElement.from_array(d)


@dataclass(frozen=True)
class CharacterVector:
    exps: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "exps", tuple(int(x) for x in self.exps))

    def __call__(self, t: TorusElement):
        a = t.array()
        out = 1.0 + 0j
        for ti, e in zip(a, self.exps):
            out *= ti ** e
        return out

    def is_trivial(self) -> bool:
        return len(set(self.exps)) <= 1


def fundamental_weight(n: int, k: int) -> CharacterVector:
    """``omega_k(t) = t_1 ... t_k``."""
    return CharacterVector(tuple(1 if i < k else 0 for i in range(n)))


def torus_conjugate(t: TorusElement, w: WeylElement) -> TorusElement:
    """``t^w = wbar^{-1} t wbar``; entry ``i`` is ``t_{w(i)}``."""
    a = t.array()
    return TorusElement.from_array([a[w(i) - 1] for i in range(1, w.n + 1)])


def enumerate_order2(n: int) -> list[TorusElement]:
    if n > 8:
        raise ValueError("enumerate_order2 is limited to n <= 8")
    out = []
    for signs in product((1, -1), repeat=n - 1):
        last = int(np.prod(signs)) if signs else 1
        out.append(TorusElement(tuple(float(s) for s in signs) + (float(last),)))
    return out


# ---------------------------------------------------------------------------
# representatives


@dataclass(frozen=True)
class WeylRep:
    weyl: WeylElement
    matrix: np.ndarray = field(compare=False)
    torus_twist: TorusElement
    seed: int = 0

    @property
    def inverse_matrix(self) -> np.ndarray:
        # signed permutation times torus: inverse is cheap and exact
        return np.linalg.inv(self.matrix)


def simple_rep(n: int, k: int) -> np.ndarray:
    """``phi_k`` applied to ``[[0, -1], [1, 0]]``."""
    m = np.eye(n, dtype=complex)
    m[k - 1, k - 1] = m[k, k] = 0.0
    m[k - 1, k] = -1.0
    m[k, k - 1] = 1.0
    return m


@lru_cache(maxsize=None)
def _canonical_matrix(perm: tuple[int, ...]) -> np.ndarray:
    w = WeylElement(perm)
    m = np.eye(w.n, dtype=complex)
    for k in w.reduced_word:
        m = m @ simple_rep(w.n, k)
    m.setflags(write=False)
    return m


def weyl_representative(w: WeylElement, choice_seed: int = 0) -> WeylRep:
    """Representative of ``w`` in the normalizer of the torus.

    Seed 0 gives the product of the ``phi_k([[0,-1],[1,0]])`` along the
    reduced word; other seeds multiply it on the left by a random torus element.
    """
    base = _canonical_matrix(w.perm)
    if choice_seed == 0:
        return WeylRep(w, base, TorusElement.identity(w.n), 0)
    t = random_torus(w.n, np.random.default_rng(choice_seed))
    m = t.matrix() @ base
    m.setflags(write=False)
    return WeylRep(w, m, t, choice_seed)


# ---------------------------------------------------------------------------
# integer lattices


def smith_normal_form(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(U, D, V)`` with ``U @ m @ V = D`` diagonal, ``U, V`` unimodular."""
    a = np.array([[int(x) for x in row] for row in np.atleast_2d(m)], dtype=object)
    rows, cols = a.shape
    U = np.array([[int(i == j) for j in range(rows)] for i in range(rows)], dtype=object)
    V = np.array([[int(i == j) for j in range(cols)] for i in range(cols)], dtype=object)
    t = 0
    while t < min(rows, cols):
        nz = [(abs(a[i, j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i, j] != 0]
        if not nz:
            break
        _, pi, pj = min(nz)
        a[[t, pi]] = a[[pi, t]]
        U[[t, pi]] = U[[pi, t]]
        a[:, [t, pj]] = a[:, [pj, t]]
        V[:, [t, pj]] = V[:, [pj, t]]
        done = False
        while not done:
            done = True
            for i in range(t + 1, rows):
                q = a[i, t] // a[t, t]
                if q:
                    a[i] -= q * a[t]
                    U[i] -= q * U[t]
                if a[i, t] != 0:
                    a[[t, i]] = a[[i, t]]
                    U[[t, i]] = U[[i, t]]
                    done = False
            for j in range(t + 1, cols):
                q = a[t, j] // a[t, t]
                if q:
                    a[:, j] -= q * a[:, t]
                    V[:, j] -= q * V[:, t]
                if a[t, j] != 0:
                    a[:, [t, j]] = a[:, [j, t]]
                    V[:, [t, j]] = V[:, [j, t]]
                    done = False
            if done:
                # divisibility of the remaining block
                for i in range(t + 1, rows):
                    for j in range(t + 1, cols):
                        if a[i, j] % a[t, t]:
                            a[t] += a[i]
                            U[t] += U[i]
                            done = False
                            break
                    if not done:
                        break
        if a[t, t] < 0:
            a[t] = -a[t]
            U[t] = -U[t]
        t += 1
    return U, a, V


def lattice_kernel(m) -> list[np.ndarray]:
    """Z-basis of ``{x in Z^k : m x = 0}``."""
    m = np.atleast_2d(np.array(m, dtype=int))
    _, D, V = smith_normal_form(m)
    r = sum(1 for i in range(min(D.shape)) if D[i, i] != 0)
    return [np.array(V[:, j], dtype=int) for j in range(r, m.shape[1])]


def weyl_action_matrix(w: WeylElement) -> np.ndarray:
    """Integer matrix ``P`` with ``(P lam)_{w(i)} = lam_i`` on exponent vectors."""
    return w.matrix().astype(int)


def kernel_characters(u: WeylElement, v: WeylElement) -> list[CharacterVector]:
    """Characters vanishing on ``T^{u,v} = {(t^u)^{-1} t^v}``.

    Pulling ``lam`` back along ``t -> (t^u)^{-1} t^v`` gives ``(P_v - P_u) lam``,
    which must be a multiple of the all-ones vector to be trivial on ``T``.
    """
    # permutations preserve coordinate sums, so a multiple of the all-ones
    # vector in the image is necessarily zero
    basis = lattice_kernel(weyl_action_matrix(v) - weyl_action_matrix(u))
    chars = [CharacterVector(tuple(b)) for b in basis]
    return [c for c in chars if not c.is_trivial()]


def torus_subgroup_dim(u: WeylElement, v: WeylElement) -> int:
    """Dimension of ``T^{u,v}``."""
    d = weyl_action_matrix(v) - weyl_action_matrix(u)
    return int(np.linalg.matrix_rank(d.astype(float)))


def parse_weyl(n: int, spec) -> WeylElement:
    """Accept a one-line list, a word dict ``{"word": [...]}`` or ``"e"``/``"w0"``."""
    if isinstance(spec, WeylElement):
        return spec
    if isinstance(spec, str):
        if spec == "e":
            return WeylElement.identity(n)
        if spec == "w0":
            return WeylElement.longest(n)
        spec = [int(x) for x in spec.replace("[", "").replace("]", "").split(",") if x.strip()]
    if isinstance(spec, dict):
        return WeylElement.from_word(n, spec["word"])
    w = WeylElement(tuple(spec))
    if w.n != n:
        raise ValueError(f"permutation {spec} is not in S_{n}")
    return w


def random_weyl(n: int, rng: np.random.Generator) -> WeylElement:
    return WeylElement(tuple(int(x) + 1 for x in rng.permutation(n)))


def words_product(ws: Sequence[WeylElement]) -> WeylElement:
    out = WeylElement.identity(ws[0].n)
    for w in ws:
        out = out * w
    return out
