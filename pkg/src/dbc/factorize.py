"""Bruhat cell detection, the factorizations g = c b and g = b_- c', and samplers.

The factorization helpers are written against plain array arithmetic so they
also run on object arrays of jets (used for Jacobians of structure maps).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .numkernel import (DEFAULT_TOL, BigCellError, RankAmbiguityError,
                        SamplingExhaustedError, Tolerance, cond, gaussian_decompose,
                        value_of)
from .rootdata import (WeylElement, WeylRep, random_torus,
                       weyl_representative)

COND_LIMIT = 1e4
COND_CAP = 1e7
ANNULUS = (0.3, 3.0)
NARROW_ANNULUS = (0.5, 1.5)     # long words: keeps the product well conditioned
MAX_RETRIES = 20


# ---------------------------------------------------------------------------
# cell detection


def _block_ranks(g: np.ndarray, tol: Tolerance, lower_left: bool) -> np.ndarray:
    """Ranks of all south-west (or north-east) corner blocks of ``g``.

    Ranks are decided against the 2-norm of the whole matrix; a singular value
    landing in the gray zone between ``tol_rank`` and ``sqrt(tol_rank)`` of that
    scale is reported as ambiguous.
    """
    n = g.shape[0]
    scale = np.linalg.norm(g, 2)
    lo, hi = tol.tol_rank * scale, np.sqrt(tol.tol_rank) * scale
    r = np.zeros((n + 2, n + 2), dtype=int)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            blk = g[i - 1:, :j] if lower_left else g[:i, j - 1:]
            s = np.linalg.svd(blk, compute_uv=False)
            if np.any((s > lo) & (s <= hi)):
                raise RankAmbiguityError(f"rank of block ({i},{j}) is ambiguous")
            r[i, j] = int(np.sum(s > lo))
    return r


def _perm_from_density(d: np.ndarray) -> WeylElement:
    n = d.shape[0]
    if not (np.all((d == 0) | (d == 1)) and np.all(d.sum(axis=0) == 1)
            and np.all(d.sum(axis=1) == 1)):
        raise RankAmbiguityError("rank pattern is not the pattern of a permutation")
    return WeylElement(tuple(int(np.argmax(d[:, j])) + 1 for j in range(n)))


def left_cell_of(g, tol: Tolerance = DEFAULT_TOL) -> WeylElement:
    """``u`` with ``g`` in ``B u B``."""
    g = np.asarray(value_of(g), dtype=complex)
    n = g.shape[0]
    r = _block_ranks(g, tol, lower_left=True)
    d = np.zeros((n, n), dtype=int)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            d[i - 1, j - 1] = r[i, j] - r[i + 1, j] - r[i, j - 1] + r[i + 1, j - 1]
    return _perm_from_density(d)


def right_cell_of(g, tol: Tolerance = DEFAULT_TOL) -> WeylElement:
    """``v`` with ``g`` in ``B_- v B_-``."""
    g = np.asarray(value_of(g), dtype=complex)
    n = g.shape[0]
    r = _block_ranks(g, tol, lower_left=False)
    d = np.zeros((n, n), dtype=int)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            d[i - 1, j - 1] = r[i, j] - r[i - 1, j] - r[i, j + 1] + r[i - 1, j + 1]
    return _perm_from_density(d)


def bruhat_cell_of(g, tol: Tolerance = DEFAULT_TOL) -> tuple[WeylElement, WeylElement]:
    return left_cell_of(g, tol), right_cell_of(g, tol)


# ---------------------------------------------------------------------------
# factorizations (jet-safe)


def left_factor(g, rep: WeylRep, tol: Tolerance = DEFAULT_TOL):
    """``g = c b`` with ``c = ubar [ubar^-1 g]_-`` and ``b = [ubar^-1 g]_0 [ubar^-1 g]_+``."""
    lo, d, up = gaussian_decompose(rep.inverse_matrix @ g, tol)
    return rep.matrix @ lo, d @ up


def right_factor(g, rep: WeylRep, tol: Tolerance = DEFAULT_TOL):
    """``g = b_- c'`` with ``b_- = [g vbar^-1]_- [g vbar^-1]_0`` and ``c' = [g vbar^-1]_+ vbar``."""
    lo, d, up = gaussian_decompose(g @ rep.inverse_matrix, tol)
    return lo @ d, up @ rep.matrix


@lru_cache(maxsize=None)
def flag_positions(u: WeylElement) -> tuple[tuple[int, int], ...]:
    """0-based entries of ``c`` carrying the chart coordinates of the cell of ``u``.

    The inversion ``i < j, u(i) > u(j)`` frees ``m[j, i]`` in ``m = ubar^-1 c``,
    which sits at row ``u(j)``, column ``i`` of ``c``.
    """
    return tuple((u(j) - 1, i - 1) for i, j in u.inversions)


def flag_coords(g, rep: WeylRep, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    c, _ = left_factor(g, rep, tol)
    return np.array([c[p] for p in flag_positions(rep.weyl)], dtype=c.dtype)


def cflag_coords(g, rep: WeylRep, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Chart coordinates of ``B_- g`` in ``B_-\\B_- v B_-`` (entries of ``c'``)."""
    _, c = right_factor(g, rep, tol)
    return np.array([c[p] for p in flag_positions(rep.weyl)], dtype=c.dtype)


def flag_matrix(coords, rep: WeylRep) -> np.ndarray:
    """Canonical representative ``c = ubar m`` with the given chart coordinates."""
    u = rep.weyl
    n = u.n
    coords = list(coords)
    obj = any(not isinstance(x, (complex, float, int, np.number)) for x in coords)
    m = np.eye(n, dtype=object if obj else complex)
    for (row, col), x, (_, j) in zip(flag_positions(u), coords, u.inversions):
        m[j - 1, col] = x / rep.matrix[row, j - 1]
    return rep.matrix @ m


@dataclass(frozen=True)
class FlagPoint:
    """A point ``c B`` of the Schubert cell ``B u B / B`` in its C-chart."""

    cell: WeylElement
    coords: np.ndarray = field(compare=False)
    rep: WeylRep = field(compare=False)

    def matrix(self) -> np.ndarray:
        return flag_matrix(self.coords, self.rep)

    def same_as(self, other: "FlagPoint", tol: float) -> bool:
        if self.cell != other.cell:
            return False
        if self.coords.size == 0:
            return True
        scale = max(1.0, float(np.max(np.abs(other.coords))))
        return bool(np.max(np.abs(self.coords - other.coords)) <= tol * scale)

    def distance(self, other: "FlagPoint") -> float:
        if self.cell != other.cell:
            return float("inf")
        if self.coords.size == 0:
            return 0.0
        scale = max(1.0, float(np.max(np.abs(other.coords))))
        return float(np.max(np.abs(self.coords - other.coords)) / scale)

    def to_json(self) -> dict:
        return {"cell": self.cell.to_json(),
                "coords": {"re": self.coords.real.tolist(), "im": self.coords.imag.tolist()},
                "rep_seed": self.rep.seed}


def flag_canonical(g, rep_seed: int = 0, tol: Tolerance = DEFAULT_TOL) -> FlagPoint:
    """FlagPoint of ``g B``."""
    g = np.asarray(value_of(g), dtype=complex)
    u = left_cell_of(g, tol)
    rep = weyl_representative(u, rep_seed)
    return FlagPoint(u, np.asarray(flag_coords(g, rep, tol), dtype=complex), rep)


def flag_from_c(c, u: WeylElement, rep: WeylRep | None = None) -> FlagPoint:
    rep = rep or weyl_representative(u)
    c = np.asarray(c, dtype=complex)
    return FlagPoint(u, np.array([c[p] for p in flag_positions(u)], dtype=complex), rep)


# ---------------------------------------------------------------------------
# cell points


@dataclass
class CellPoint:
    g: np.ndarray
    u: WeylElement
    v: WeylElement
    urep: WeylRep
    vrep: WeylRep
    _left: tuple | None = field(default=None, repr=False, compare=False)
    _right: tuple | None = field(default=None, repr=False, compare=False)

    @classmethod
    def make(cls, g, u: WeylElement, v: WeylElement, urep: WeylRep | None = None,
             vrep: WeylRep | None = None) -> "CellPoint":
        return cls(np.asarray(g, dtype=complex), u, v,
                   urep or weyl_representative(u), vrep or weyl_representative(v))

    @classmethod
    def detect(cls, g, tol: Tolerance = DEFAULT_TOL, seeds=(0, 0)) -> "CellPoint":
        u, v = bruhat_cell_of(g, tol)
        return cls.make(g, u, v, weyl_representative(u, seeds[0]),
                        weyl_representative(v, seeds[1]))

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def left(self, tol: Tolerance = DEFAULT_TOL):
        if self._left is None:
            self._left = left_factor(self.g, self.urep, tol)
        return self._left

    def right(self, tol: Tolerance = DEFAULT_TOL):
        if self._right is None:
            self._right = right_factor(self.g, self.vrep, tol)
        return self._right

    def flag(self) -> FlagPoint:
        """``varpi(g) = g B`` in the chart of the cell of ``u``."""
        c, _ = self.left()
        return flag_from_c(c, self.u, self.urep)

    def coflag(self) -> FlagPoint:
        """``c' B`` where ``g = b_- c'``: a point of ``B v B / B``."""
        _, c = self.right()
        return flag_from_c(c, self.v, self.vrep)

    def to_json(self) -> dict:
        from .numkernel import matrix_to_json
        return {"g": matrix_to_json(self.g), "u": self.u.to_json(), "v": self.v.to_json(),
                "rep_seeds": [self.urep.seed, self.vrep.seed]}


def left_C_factor(p: CellPoint, tol: Tolerance = DEFAULT_TOL):
    return p.left(tol)


def right_C_factor(p: CellPoint, tol: Tolerance = DEFAULT_TOL):
    return p.right(tol)


# ---------------------------------------------------------------------------
# samplers


def annulus(rng: np.random.Generator, lo: float = ANNULUS[0], hi: float = ANNULUS[1]) -> complex:
    return rng.uniform(lo, hi) * np.exp(1j * rng.uniform(0, 2 * np.pi))


def elementary(n: int, i: int, j: int, t) -> np.ndarray:
    """``I + t e_{ij}`` with 1-based indices."""
    m = np.eye(n, dtype=complex)
    m[i - 1, j - 1] = t
    return m


def random_lower(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random element of ``B_-`` with determinant one."""
    t = random_torus(n, rng)
    m = np.tril(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)), -1) * 0.7
    return (np.eye(n) + m) @ t.matrix()


def random_upper(n: int, rng: np.random.Generator) -> np.ndarray:
    return random_lower(n, rng).T


def sample_double_cell(u: WeylElement, v: WeylElement, rng_seed,
                       rep_seeds: tuple[int, int] = (0, 0),
                       tol: Tolerance = DEFAULT_TOL) -> CellPoint:
    """Random interior point of ``G^{u,v}``.

    Torus factor, then ``I + t e_{k+1,k}`` along a reduced word of ``u`` (these
    lie in ``B_-`` and in ``B s_k B``), then ``I + t e_{k,k+1}`` along a reduced
    word of ``v`` (in ``B`` and in ``B_- s_k B_-``).
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    n = u.n
    urep = weyl_representative(u, rep_seeds[0])
    vrep = weyl_representative(v, rep_seeds[1])
    lo, hi = ANNULUS if u.length + v.length <= 6 else NARROW_ANNULUS
    best, best_cond = None, COND_CAP
    for _ in range(MAX_RETRIES):
        g = random_torus(n, rng).matrix()
        for k in u.reduced_word:
            g = g @ elementary(n, k + 1, k, annulus(rng, lo, hi))
        for k in v.reduced_word:
            g = g @ elementary(n, k, k + 1, annulus(rng, lo, hi))
        k = cond(g)
        if k > best_cond:
            continue
        try:
            if bruhat_cell_of(g, tol) != (u, v):
                continue
            p = CellPoint.make(g, u, v, urep, vrep)
            p.left(tol)
            p.right(tol)
        except (RankAmbiguityError, BigCellError):
            continue
        if k <= COND_LIMIT:
            return p
        # long words multiply many factors; keep the best-conditioned candidate
        best, best_cond = p, k
    if best is not None:
        return best
    raise SamplingExhaustedError(f"no interior sample of G^{{{u},{v}}} after {MAX_RETRIES} tries")


def sample_flag(u: WeylElement, rng: np.random.Generator, rep: WeylRep | None = None) -> FlagPoint:
    rep = rep or weyl_representative(u)
    lo, hi = ANNULUS if u.length <= 3 else NARROW_ANNULUS
    coords = np.array([annulus(rng, lo, hi) for _ in range(u.length)], dtype=complex)
    return FlagPoint(u, coords, rep)
