"""Dense complex linear algebra with tolerance-aware decisions and forward-mode AD.

Every routine here accepts either a ``complex128`` array or an ``object``
array whose entries are :class:`Jet` instances.  The same code path therefore
produces values and derivatives, which is what the bivector machinery relies on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class DBCError(Exception):
    """Base class for domain errors (CLI exit code 3)."""


class FactorizationError(DBCError):
    pass


class BigCellError(FactorizationError):
    """A leading principal minor vanished: the matrix is not in N_- T N."""


class SingularError(DBCError):
    pass


class RankAmbiguityError(DBCError):
    pass


class SamplingExhaustedError(DBCError):
    pass


class ComposabilityError(DBCError):
    pass


class MomentMatchError(DBCError):
    pass


@dataclass(frozen=True)
class Tolerance:
    tol_eq: float = 1e-9
    tol_rank: float = 1e-10
    tol_det: float = 1e-10

    def __post_init__(self):
        if min(self.tol_eq, self.tol_rank, self.tol_det) <= 0:
            raise ValueError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()


# ---------------------------------------------------------------------------
# forward-mode jets


class Jet:
    """Truncated Taylor jet over C in a fixed number of seed directions.

    ``first`` holds the partials, ``second`` (optional) the symmetric matrix of
    second partials.  Jets live inside ``object`` arrays; operations with an
    ndarray operand are handed back to numpy for broadcasting.
    """

    __slots__ = ("value", "first", "second")

    def __init__(self, value, first, second=None):
        self.value = complex(value)
        self.first = first
        self.second = second

    @classmethod
    def seed(cls, value, k: int, size: int, order: int = 1) -> "Jet":
        first = np.zeros(size, dtype=complex)
        first[k] = 1.0
        second = np.zeros((size, size), dtype=complex) if order > 1 else None
        return cls(value, first, second)

    @property
    def order(self) -> int:
        return 1 if self.second is None else 2

    def __repr__(self):
        return f"Jet({self.value!r}, first={self.first!r})"

    # -- helpers
    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        z = np.zeros_like(self.first)
        return Jet(other, z, None if self.second is None else np.zeros_like(self.second))

    @staticmethod
    def _sec_add(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return a + b

    # -- arithmetic
    def __neg__(self):
        return Jet(-self.value, -self.first, None if self.second is None else -self.second)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if not isinstance(other, Jet):
            return Jet(self.value + other, self.first, self.second)
        return Jet(self.value + other.value, self.first + other.first,
                   self._sec_add(self.second, other.second))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if not isinstance(other, Jet):
            return Jet(self.value * other, self.first * other,
                       None if self.second is None else self.second * other)
        a, b = self, other
        first = a.first * b.value + b.first * a.value
        if a.second is None and b.second is None:
            return Jet(a.value * b.value, first)
        a, b = a._promote(), b._promote()
        outer = np.outer(a.first, b.first)
        second = a.second * b.value + b.second * a.value + outer + outer.T
        return Jet(a.value * b.value, first, second)

    __rmul__ = __mul__

    def _promote(self) -> "Jet":
        if self.second is not None:
            return self
        k = self.first.shape[0]
        return Jet(self.value, self.first, np.zeros((k, k), dtype=complex))

    def reciprocal(self) -> "Jet":
        v = self.value
        if v == 0:
            raise ZeroDivisionError("jet reciprocal at zero")
        inv = 1.0 / v
        first = -self.first * inv * inv
        if self.second is None:
            return Jet(inv, first)
        second = -self.second * inv * inv + 2.0 * inv ** 3 * np.outer(self.first, self.first)
        return Jet(inv, first, second)

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if not isinstance(other, Jet):
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)):
            raise TypeError("jets support integer powers only")
        if k < 0:
            return self.reciprocal() ** (-k)
        out = self._lift(1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sqrt(self) -> "Jet":
        r = np.sqrt(self.value)
        d1 = 0.5 / r
        first = self.first * d1
        if self.second is None:
            return Jet(r, first)
        d2 = -0.25 / (r * self.value)
        return Jet(r, first, self.second * d1 + d2 * np.outer(self.first, self.first))

    def __abs__(self):
        return abs(self.value)


def value_of(x):
    """Strip derivative data from a scalar or an array of jets."""
    if isinstance(x, Jet):
        return x.value
    if isinstance(x, np.ndarray) and x.dtype == object:
        return np.vectorize(lambda e: e.value if isinstance(e, Jet) else complex(e),
                            otypes=[complex])(x)
    return x


def first_of(x, size: int) -> np.ndarray:
    """First partials of a scalar (zero if constant)."""
    if isinstance(x, Jet):
        return x.first
    return np.zeros(size, dtype=complex)


def second_of(x, size: int) -> np.ndarray:
    if isinstance(x, Jet) and x.second is not None:
        return x.second
    return np.zeros((size, size), dtype=complex)


def csqrt(x):
    return x.sqrt() if isinstance(x, Jet) else np.sqrt(complex(x))


def seeded_matrix(base: np.ndarray, directions: Sequence[np.ndarray], order: int = 1,
                  offset: int = 0, size: int | None = None) -> np.ndarray:
    """Object array ``base + sum_k eps_k directions[k]`` with jet seeds.

    ``offset``/``size`` place the seeds inside a larger seed space so several
    inputs can share one jet dimension.
    """
    base = np.asarray(base, dtype=complex)
    k = len(directions)
    size = k if size is None else size
    dirs = np.zeros((size,) + base.shape, dtype=complex)
    for i, d in enumerate(directions):
        dirs[offset + i] = d
    out = np.empty(base.shape, dtype=object)
    sec = (lambda: np.zeros((size, size), dtype=complex)) if order > 1 else (lambda: None)
    for idx in np.ndindex(base.shape):
        out[idx] = Jet(base[idx], dirs[(slice(None),) + idx].copy(), sec())
    return out


def jet_eval(f: Callable, g: np.ndarray, seeds: Sequence[np.ndarray], order: int = 1) -> Jet:
    """Evaluate the observable ``f`` at ``g`` with derivatives along ``seeds``."""
    out = f(seeded_matrix(g, seeds, order=order))
    if not isinstance(out, Jet):
        size = len(seeds)
        out = Jet(out, np.zeros(size, dtype=complex),
                  np.zeros((size, size), dtype=complex) if order > 1 else None)
    return out


# ---------------------------------------------------------------------------
# generic dense routines


def _work_copy(g) -> np.ndarray:
    g = np.asarray(g)
    if g.dtype == object:
        return g.copy()
    return np.array(g, dtype=complex)


def _eye_like(g: np.ndarray) -> np.ndarray:
    n = g.shape[0]
    if g.dtype == object:
        out = np.zeros((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = 1.0 if i == j else 0.0
        return out
    return np.eye(n, dtype=complex)


def _scale(g: np.ndarray) -> float:
    vals = np.abs(value_of(g))
    return float(vals.max()) if vals.size else 0.0


def gaussian_decompose(g, tol: Tolerance = DEFAULT_TOL):
    """Return ``(lower, diag, upper)`` with ``g = lower @ diag @ upper``.

    ``lower`` is unit lower triangular, ``upper`` unit upper triangular and
    ``diag`` diagonal; raises :class:`BigCellError` outside ``N_- T N``.
    """
    a = _work_copy(g)
    n = a.shape[0]
    scale = max(_scale(a), 1e-300)
    lower = _eye_like(a)
    upper = _eye_like(a)
    diag = _eye_like(a)
    for k in range(n):
        piv = a[k, k]
        if abs(piv) <= tol.tol_rank * scale:
            raise BigCellError(f"leading principal minor {k + 1} vanishes")
        diag[k, k] = piv
        inv = 1.0 / piv
        for i in range(k + 1, n):
            lower[i, k] = a[i, k] * inv
        for j in range(k + 1, n):
            upper[k, j] = a[k, j] * inv
        for i in range(k + 1, n):
            lik = lower[i, k]
            for j in range(k + 1, n):
                a[i, j] = a[i, j] - lik * a[k, j]
    return lower, diag, upper


def _pivot_order(a: np.ndarray, col: int, start: int) -> int:
    mags = [abs(a[i, col]) for i in range(start, a.shape[0])]
    return start + int(np.argmax(mags))


def det(g) -> complex:
    """Determinant by partial-pivot elimination (jet-safe)."""
    a = _work_copy(g)
    n = a.shape[0]
    if n == 0:
        return 1.0
    out = 1.0
    for k in range(n):
        p = _pivot_order(a, k, k)
        if abs(a[p, k]) == 0:
            return 0.0 * a[p, k]
        if p != k:
            a[[k, p]] = a[[p, k]]
            out = -out
        piv = a[k, k]
        out = out * piv
        inv = 1.0 / piv
        for i in range(k + 1, n):
            f = a[i, k] * inv
            for j in range(k + 1, n):
                a[i, j] = a[i, j] - f * a[k, j]
    return out


def minor(g, rows: Sequence[int], cols: Sequence[int]):
    g = np.asarray(g)
    return det(g[np.ix_(list(rows), list(cols))])


def leading_minor(g, k: int):
    if k == 0:
        return 1.0
    g = np.asarray(g)
    return det(g[:k, :k])


def solve_and_invert(g, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Inverse by Gauss-Jordan elimination with partial pivoting."""
    a = _work_copy(g)
    n = a.shape[0]
    inv = _eye_like(a)
    scale = max(_scale(a), 1e-300)
    for k in range(n):
        p = _pivot_order(a, k, k)
        if abs(a[p, k]) <= tol.tol_rank * scale:
            raise SingularError("matrix is numerically singular")
        if p != k:
            a[[k, p]] = a[[p, k]]
            inv[[k, p]] = inv[[p, k]]
        r = 1.0 / a[k, k]
        a[k] = a[k] * r
        inv[k] = inv[k] * r
        for i in range(n):
            if i != k:
                f = a[i, k]
                a[i] = a[i] - f * a[k]
                inv[i] = inv[i] - f * inv[k]
    return inv


def inv_lower(m) -> np.ndarray:
    """Inverse of an invertible lower triangular matrix by forward substitution."""
    m = np.asarray(m)
    n = m.shape[0]
    out = np.zeros_like(_work_copy(m))
    if out.dtype == object:
        out[...] = 0.0
    for j in range(n):
        out[j, j] = 1.0 / m[j, j]
        for i in range(j + 1, n):
            acc = 0.0
            for k in range(j, i):
                acc = acc + m[i, k] * out[k, j]
            out[i, j] = -acc / m[i, i]
    return out


def inv_upper(m) -> np.ndarray:
    return inv_lower(np.asarray(m).T).T


def rank_tol(m, tol: Tolerance = DEFAULT_TOL, scale: float | None = None) -> int:
    """Numerical rank: singular values above ``tol_rank`` times the scale.

    The scale defaults to the largest singular value of ``m``; callers comparing
    sub-blocks of one matrix pass the norm of the whole matrix instead.
    """
    m = np.asarray(value_of(m), dtype=complex)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    ref = s[0] if scale is None else scale
    if ref == 0:
        return 0
    return int(np.sum(s > tol.tol_rank * ref))


def cond(m) -> float:
    return float(np.linalg.cond(np.asarray(value_of(m), dtype=complex)))


def is_finite(m) -> bool:
    return bool(np.all(np.isfinite(np.asarray(value_of(m), dtype=complex))))


# ---------------------------------------------------------------------------
# serialization


def matrix_to_json(m) -> dict:
    m = np.asarray(value_of(m), dtype=complex)
    return {"n": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(d: dict) -> np.ndarray:
    try:
        n = int(d["n"])
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from None
    if re.shape != (n, n) or im.shape != (n, n):
        raise ValueError("matrix JSON shape does not match n")
    m = re + 1j * im
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix JSON has non-finite entries")
    return m
