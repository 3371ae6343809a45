"""Dense complex linear algebra: permanents and matrix-equivalence predicates.

Everything here operates on plain ``numpy`` arrays of ``complex128``.  The
default absolute tolerance for all equivalence checks is ``DEFAULT_EPS``;
constructions elsewhere in the package are closed form, so a loose tolerance
would only hide bugs.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit as _njit
except ModuleNotFoundError:  # pragma: no cover - numba is a declared dependency
    _njit = None

__all__ = [
    "DEFAULT_EPS",
    "PERMANENT_MAX_DIM",
    "ShapeError",
    "MatrixSizeError",
    "is_unitary",
    "permanent",
    "submatrix_with_repetition",
    "equal_up_to_global_phase",
    "equal_up_to_diagonal_phases",
    "haar_unitary",
]

DEFAULT_EPS = 1e-9

# Ryser's formula costs O(2^n * n); past this the call is almost certainly a
# mistake, so fail loudly instead of hanging.
PERMANENT_MAX_DIM = 30


class ShapeError(ValueError):
    """Matrix arguments with incompatible or non-square shapes."""


class MatrixSizeError(ValueError):
    """Matrix exceeds a documented size cap."""


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"matrix must have at least one row and column, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _as_square(m) -> np.ndarray:
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got {a.shape}")
    return a


def is_unitary(m, eps: float = DEFAULT_EPS) -> bool:
    """True iff max-entry deviation of ``m† m`` from the identity is <= eps."""
    a = _as_square(m)
    gram = a.conj().T @ a
    return float(np.max(np.abs(gram - np.eye(a.shape[0])))) <= eps


def _permanent_gray(a: np.ndarray) -> complex:
    """Ryser's formula with Gray-code single-bit row-sum updates."""
    n = a.shape[0]
    row = np.zeros(n, dtype=np.complex128)
    gray = 0
    total = 0.0 + 0.0j
    for k in range(1, 1 << n):
        # lowest set bit of k is the column toggled between gray(k-1), gray(k)
        j = 0
        kk = k
        while kk & 1 == 0:
            kk >>= 1
            j += 1
        mask = 1 << j
        if gray & mask:
            for i in range(n):
                row[i] -= a[i, j]
            gray ^= mask
        else:
            for i in range(n):
                row[i] += a[i, j]
            gray ^= mask
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= row[i]
        if k & 1:
            total -= prod
        else:
            total += prod
    if n & 1:
        return -total
    return total


if _njit is not None:
    _permanent_gray = _njit(cache=True)(_permanent_gray)


def permanent(m) -> complex:
    """Permanent of a square complex matrix, perm(M) = sum_s prod_i M[i, s(i)].

    Uses Ryser's inclusion-exclusion formula with Gray-code subset iteration,
    O(2^n * n).  The 0x0 matrix has permanent 1 (empty product).  Dimensions
    above ``PERMANENT_MAX_DIM`` raise ``MatrixSizeError``.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"permanent requires a square matrix, got {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if n > PERMANENT_MAX_DIM:
        raise MatrixSizeError(
            f"permanent of a {n}x{n} matrix exceeds the n <= {PERMANENT_MAX_DIM} cap"
        )
    return complex(_permanent_gray(np.ascontiguousarray(a)))


def submatrix_with_repetition(m, row_multiplicities, col_multiplicities) -> np.ndarray:
    """Matrix with row i / column j repeated by the given multiplicities.

    Order preserving; total row multiplicity must equal total column
    multiplicity so the result is square (it feeds ``permanent``).
    """
    a = _as_matrix(m)
    rows = np.asarray(row_multiplicities, dtype=np.int64)
    cols = np.asarray(col_multiplicities, dtype=np.int64)
    if rows.shape != (a.shape[0],) or cols.shape != (a.shape[1],):
        raise ShapeError(
            f"multiplicity vectors {rows.shape}, {cols.shape} do not match matrix {a.shape}"
        )
    if np.any(rows < 0) or np.any(cols < 0):
        raise ValueError("multiplicities must be nonnegative")
    if rows.sum() != cols.sum():
        raise ShapeError(
            f"total row multiplicity {rows.sum()} != total column multiplicity {cols.sum()}"
        )
    row_idx = np.repeat(np.arange(a.shape[0]), rows)
    col_idx = np.repeat(np.arange(a.shape[1]), cols)
    return a[np.ix_(row_idx, col_idx)]


def _unimodular(z: complex) -> complex:
    mag = abs(z)
    if mag == 0.0:
        return 1.0 + 0.0j
    return z / mag


def equal_up_to_global_phase(a, b, eps: float = DEFAULT_EPS) -> bool:
    """True iff a == c*b entrywise within eps for some unimodular c.

    c is fixed by normalizing against the largest-magnitude entry of b,
    which is exact for exact inputs.
    """
    am = _as_matrix(a)
    bm = _as_matrix(b)
    if am.shape != bm.shape:
        raise ShapeError(f"shape mismatch {am.shape} vs {bm.shape}")
    flat = np.argmax(np.abs(bm))
    idx = np.unravel_index(flat, bm.shape)
    if abs(bm[idx]) == 0.0:
        return float(np.max(np.abs(am))) <= eps
    c = _unimodular(am[idx] / bm[idx])
    return float(np.max(np.abs(am - c * bm))) <= eps


def equal_up_to_diagonal_phases(a, b, eps: float = DEFAULT_EPS) -> bool:
    """True iff a == D1 @ b @ D2 within eps for unimodular diagonal D1, D2.

    Constructive check: D2 is fixed from first-row ratios, D1 from
    first-column ratios, then the factorization is verified globally.
    Matrices whose zero patterns differ can never be equivalent and return
    False.  Entries of b that vanish in the first row/column leave the
    corresponding phase undetermined; it is set to 1 and caught (if wrong)
    by the global verification.
    """
    am = _as_square(a)
    bm = _as_square(b)
    if am.shape != bm.shape:
        raise ShapeError(f"shape mismatch {am.shape} vs {bm.shape}")
    zero_a = np.abs(am) <= eps
    zero_b = np.abs(bm) <= eps
    if not np.array_equal(zero_a, zero_b):
        return False
    n = am.shape[0]
    d2 = np.ones(n, dtype=np.complex128)
    for k in range(n):
        if not zero_b[0, k]:
            d2[k] = _unimodular(am[0, k] / bm[0, k])
    d1 = np.ones(n, dtype=np.complex128)
    for j in range(n):
        if not zero_b[j, 0]:
            d1[j] = _unimodular(am[j, 0] / (bm[j, 0] * d2[0]))
    candidate = d1[:, None] * bm * d2[None, :]
    return float(np.max(np.abs(am - candidate))) <= eps


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed n x n unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]
