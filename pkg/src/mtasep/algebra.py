"""Dense matrices over two scalar fields, Kronecker products and site embeddings.

Exact matrices are numpy object arrays holding :class:`fractions.Fraction`;
float matrices are ``complex128`` arrays.  Every function here is pure and
returns a fresh array.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

ZERO = Fraction(0)
ONE = Fraction(1)

DEFAULT_PIVOT_TOL = 1e-12


class SingularMatrix(ArithmeticError):
    """Raised when Gaussian elimination finds no usable pivot."""


class DimensionError(ValueError):
    pass


def is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    raise TypeError(f"cannot represent {x!r} exactly")


def exact(rows: Iterable[Iterable]) -> np.ndarray:
    """Build an exact matrix from nested rows of ints, strings or Fractions."""
    data = [[as_fraction(v) for v in row] for row in rows]
    if not data or len({len(r) for r in data}) != 1:
        raise DimensionError("rows must be non-empty and of equal length")
    out = np.empty((len(data), len(data[0])), dtype=object)
    for i, row in enumerate(data):
        for j, v in enumerate(row):
            out[i, j] = v
    return out


def to_complex(a: np.ndarray) -> np.ndarray:
    if is_exact(a):
        return np.array([[complex(v) for v in row] for row in a], dtype=complex)
    return np.asarray(a, dtype=complex)


def identity(n: int, exact_field: bool = True) -> np.ndarray:
    if not exact_field:
        return np.eye(n, dtype=complex)
    out = np.full((n, n), ZERO, dtype=object)
    for i in range(n):
        out[i, i] = ONE
    return out


def zeros(shape: tuple[int, int], exact_field: bool = True) -> np.ndarray:
    if exact_field:
        return np.full(shape, ZERO, dtype=object)
    return np.zeros(shape, dtype=complex)


def _require_square(a: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"square matrix required, got shape {a.shape}")
    return a.shape[0]


def _exact_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # zero-skipping row accumulation; scattering matrices are mostly zeros
    n, m = a.shape
    p = b.shape[1]
    brows = [[(j, v) for j, v in enumerate(b[k]) if v] for k in range(m)]
    out = np.full((n, p), ZERO, dtype=object)
    for i in range(n):
        acc: dict[int, Fraction] = {}
        for k in range(m):
            aik = a[i, k]
            if aik:
                for j, v in brows[k]:
                    acc[j] = acc.get(j, ZERO) + aik * v
        for j, v in acc.items():
            out[i, j] = v
    return out


def matmul(*mats: np.ndarray) -> np.ndarray:
    """Left-to-right product of one or more matrices of the same field."""
    if not mats:
        raise DimensionError("matmul needs at least one matrix")
    result = mats[0]
    for m in mats[1:]:
        if result.shape[1] != m.shape[0]:
            raise DimensionError(f"cannot multiply {result.shape} by {m.shape}")
        if is_exact(result) and is_exact(m):
            result = _exact_matmul(result, m)
        else:
            result = to_complex(result) @ to_complex(m)
    return result


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; row ``i1*rows(b)+i2`` pairs row i1 of a with row i2 of b."""
    if is_exact(a) and is_exact(b):
        ra, ca = a.shape
        rb, cb = b.shape
        out = np.full((ra * rb, ca * cb), ZERO, dtype=object)
        for i1, j1 in zip(*np.nonzero(a != ZERO)):
            x = a[i1, j1]
            for i2, j2 in zip(*np.nonzero(b != ZERO)):
                out[i1 * rb + i2, j1 * cb + j2] = x * b[i2, j2]
        return out
    return np.kron(to_complex(a), to_complex(b))


def kron_power(a: np.ndarray, k: int) -> np.ndarray:
    """k-fold Kronecker power; the 0-th power is the 1x1 identity."""
    _require_square(a)
    result = identity(1, is_exact(a))
    for _ in range(k):
        result = kron(result, a)
    return result


def embed_at_site(r: np.ndarray, i: int, n: int, N: int) -> np.ndarray:
    """Return ``I^(i-1) (x) r (x) I^(n-i-1)`` acting on particles i and i+1 (1-based)."""
    if r.shape != (N * N, N * N):
        raise DimensionError(f"two-particle matrix must be {N*N}x{N*N}, got {r.shape}")
    if not 1 <= i <= n - 1:
        raise IndexError(f"site index {i} outside 1..{n - 1}")
    ex = is_exact(r)
    left = identity(N ** (i - 1), ex)
    right = identity(N ** (n - i - 1), ex)
    return kron(kron(left, r), right)


def _exact_inverse(a: np.ndarray) -> np.ndarray:
    # Gauss-Jordan with full pivoting: pick the largest-magnitude remaining entry
    n = a.shape[0]
    m = [list(row) for row in a]
    inv = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    col_perm = list(range(n))
    for k in range(n):
        best = None
        for i in range(k, n):
            for j in range(k, n):
                v = m[i][j]
                if v and (best is None or abs(v) > abs(m[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            raise SingularMatrix(f"no nonzero pivot at elimination step {k}")
        pi, pj = best
        m[k], m[pi] = m[pi], m[k]
        inv[k], inv[pi] = inv[pi], inv[k]
        if pj != k:
            for row in m:
                row[k], row[pj] = row[pj], row[k]
            col_perm[k], col_perm[pj] = col_perm[pj], col_perm[k]
        piv = m[k][k]
        m[k] = [v / piv for v in m[k]]
        inv[k] = [v / piv for v in inv[k]]
        for i in range(n):
            f = m[i][k]
            if i != k and f:
                m[i] = [x - f * y for x, y in zip(m[i], m[k])]
                inv[i] = [x - f * y for x, y in zip(inv[i], inv[k])]
    # column swaps of a become row swaps of the inverse
    out = np.full((n, n), ZERO, dtype=object)
    for k in range(n):
        for j in range(n):
            out[col_perm[k], j] = inv[k][j]
    return out


def _float_inverse(a: np.ndarray, tol: float) -> np.ndarray:
    n = a.shape[0]
    m = np.array(a, dtype=complex)
    inv = np.eye(n, dtype=complex)
    for k in range(n):
        p = k + int(np.argmax(np.abs(m[k:, k])))
        if abs(m[p, k]) < tol:
            raise SingularMatrix(f"pivot magnitude {abs(m[p, k]):.3e} below {tol:g} at step {k}")
        if p != k:
            m[[k, p]] = m[[p, k]]
            inv[[k, p]] = inv[[p, k]]
        piv = m[k, k]
        m[k] /= piv
        inv[k] /= piv
        f = m[:, k].copy()
        f[k] = 0
        m -= np.outer(f, m[k])
        inv -= np.outer(f, inv[k])
    return inv


def inverse(a: np.ndarray, tol: float = DEFAULT_PIVOT_TOL) -> np.ndarray:
    """Two-sided inverse; exact for Fraction matrices, partial pivoting for floats."""
    _require_square(a)
    if is_exact(a):
        return _exact_inverse(a)
    return _float_inverse(a, tol)


def equal(a: np.ndarray, b: np.ndarray, tol: float | None = None) -> bool:
    """Exact equality for exact matrices; float comparison needs an explicit ``tol``."""
    if a.shape != b.shape:
        return False
    if is_exact(a) and is_exact(b):
        return bool(np.all(a == b))
    if tol is None:
        raise ValueError("float comparison requires an explicit tolerance")
    return bool(np.max(np.abs(to_complex(a) - to_complex(b)), initial=0.0) <= tol)


def max_abs_entry(a: np.ndarray) -> tuple[tuple[int, int], object]:
    """Position and value of the largest-magnitude entry (first one on ties)."""
    if is_exact(a):
        _, neg_k = max((abs(v), -k) for k, v in enumerate(a.flat))
        flat = -neg_k
    else:
        flat = int(np.argmax(np.abs(a)))
    idx = divmod(flat, a.shape[1])
    return idx, a[idx]


# --- species words ---------------------------------------------------------

def word_rank(word: Sequence[int], N: int) -> int:
    """Lexicographic rank of a species word over 1..N (``11..1`` has rank 0)."""
    r = 0
    for s in word:
        if not 1 <= s <= N:
            raise ValueError(f"species {s} outside 1..{N}")
        r = r * N + (s - 1)
    return r


def word_unrank(rank: int, length: int, N: int) -> tuple[int, ...]:
    if not 0 <= rank < N ** length:
        raise ValueError(f"rank {rank} outside 0..{N ** length - 1}")
    out = []
    for _ in range(length):
        rank, d = divmod(rank, N)
        out.append(d + 1)
    return tuple(reversed(out))


def all_words(length: int, N: int) -> list[tuple[int, ...]]:
    """All words in lexicographic order."""
    return list(product(range(1, N + 1), repeat=length))


def word_label(word: Sequence[int]) -> str:
    return "".join(str(s) for s in word)
