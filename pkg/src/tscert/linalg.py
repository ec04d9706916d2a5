"""Dense matrix primitives used by the rest of the package.

Everything is a plain float64 numpy array. The constructors validate at
the boundary (finite entries, consistent shapes, symmetry where claimed)
so that assembly bugs surface immediately instead of deep inside a solve.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import EigenConvergenceError, LinAlgError, NotSPDError

# Dense Kronecker products blow up fast; refuse anything whose result
# would not plausibly fit in memory.
_MAX_KRON_DIM = 2**20


def mat(entries, rows=None, cols=None) -> np.ndarray:
    """Build a validated float64 matrix from nested sequences or an array.

    Rejects non-finite entries and, when rows/cols are given, any shape
    mismatch.
    """
    try:
        a = np.array(entries, dtype=float)
    except (ValueError, TypeError) as exc:
        raise LinAlgError(f"entries do not form a numeric matrix: {exc}") from exc
    if a.ndim == 1:
        a = a.reshape(1, -1) if rows == 1 else a.reshape(-1, 1)
    if a.ndim != 2:
        raise LinAlgError(f"expected a 2-d array, got ndim={a.ndim}")
    if rows is not None and a.shape[0] != rows:
        raise LinAlgError(f"expected {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[1] != cols:
        raise LinAlgError(f"expected {cols} columns, got {a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise LinAlgError("matrix has non-finite entries")
    return a


def sym_mat(entries, rtol=1e-9) -> np.ndarray:
    """Build a validated symmetric matrix.

    Asymmetry up to rtol * max(1, |A|_max) is repaired by averaging with
    the transpose; anything larger is rejected as a construction bug.
    """
    a = mat(entries)
    if a.shape[0] != a.shape[1]:
        raise LinAlgError(f"symmetric matrix must be square, got {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > rtol * scale:
        raise LinAlgError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    return (a + a.T) / 2.0


def symmetric_part(a) -> np.ndarray:
    """(A + A^T) / 2."""
    a = mat(a)
    if a.shape[0] != a.shape[1]:
        raise LinAlgError("symmetric part requires a square matrix")
    return (a + a.T) / 2.0


def kron(a, b) -> np.ndarray:
    """Kronecker product with an explicit size guard."""
    a = mat(a)
    b = mat(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > _MAX_KRON_DIM or cols > _MAX_KRON_DIM:
        raise LinAlgError(f"kron result {rows}x{cols} exceeds the size guard")
    return np.kron(a, b)


def eig_sym(s) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, ascending.

    The input must pass the sym_mat symmetry check; the decomposition is
    done on the symmetrized copy so roundoff in the input cannot produce
    complex output.
    """
    s = sym_mat(s)
    try:
        w = np.linalg.eigvalsh(s)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    return w


def min_eig(s) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(eig_sym(s)[0])


def solve_spd(s, rhs) -> np.ndarray:
    """Solve S X = RHS for symmetric positive definite S via Cholesky.

    Raises NotSPDError when the factorization hits a non-positive pivot,
    which is the definitive test of definiteness here.
    """
    s = sym_mat(s)
    rhs = np.asarray(rhs, dtype=float)
    vector_rhs = rhs.ndim == 1
    if vector_rhs:
        rhs = rhs.reshape(-1, 1)
    if rhs.shape[0] != s.shape[0]:
        raise LinAlgError(
            f"rhs has {rhs.shape[0]} rows, matrix is {s.shape[0]}x{s.shape[1]}"
        )
    try:
        factor = scipy.linalg.cho_factor(s, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotSPDError(str(exc)) from exc
    x = scipy.linalg.cho_solve(factor, rhs)
    return x[:, 0] if vector_rhs else x


def is_spd(s, shift=0.0) -> bool:
    """True when S - shift*I is symmetric positive definite."""
    s = sym_mat(s)
    try:
        scipy.linalg.cho_factor(s - shift * np.eye(s.shape[0]), lower=True)
    except scipy.linalg.LinAlgError:
        return False
    return True
