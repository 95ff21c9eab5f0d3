"""Dense linear-algebra kernel shared by the model modules.

Matrices are plain float64 numpy arrays.  Two solvers are exposed: a
Cholesky path for explicitly regularized (hence positive-definite)
systems, and a QR least-squares path used for ordinary fits where
conditioning matters.
"""

from __future__ import annotations

import numpy as np

SYMMETRY_RTOL = 1e-10
RANK_RTOL = 1e-10


class NotPositiveDefiniteError(ValueError):
    def __init__(self, pivot_index: int):
        self.pivot_index = pivot_index
        super().__init__(f"matrix is not positive-definite (pivot {pivot_index} <= 0)")


class RankDeficiencyError(ValueError):
    pass


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("expected a 2-D array")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    return A


def cholesky_solve(A, b) -> np.ndarray:
    """Solve A x = b for symmetric positive-definite A.

    Raises NotPositiveDefiniteError (carrying the pivot index) when a
    non-positive pivot is hit during factorization.
    """
    A = _as_matrix(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if A.shape[1] != n or b.shape[0] != n:
        raise ValueError("dimension mismatch")
    scale = np.max(np.abs(A)) or 1.0
    if np.max(np.abs(A - A.T)) > SYMMETRY_RTOL * scale:
        raise ValueError("matrix is not symmetric within tolerance")

    L = np.zeros((n, n))
    for j in range(n):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= 0.0:
            raise NotPositiveDefiniteError(j)
        L[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]

    y = np.zeros(n)
    for i in range(n):
        y[i] = (b[i] - L[i, :i] @ y[:i]) / L[i, i]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x


def least_squares(X, y) -> np.ndarray:
    """Minimum-norm ||y - X b|| via QR; raises RankDeficiencyError when the
    smallest R diagonal falls below RANK_RTOL times the largest."""
    X = _as_matrix(X)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n < p:
        raise ValueError(f"need n >= p, got n={n}, p={p}")
    if y.shape[0] != n:
        raise ValueError("dimension mismatch")

    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    if diag.size and diag.min() < RANK_RTOL * diag.max():
        raise RankDeficiencyError(
            f"rank-deficient design: min |R_jj| = {diag.min():.3e}, max = {diag.max():.3e}"
        )
    beta = np.zeros(p)
    qty = Q.T @ y
    for i in range(p - 1, -1, -1):
        beta[i] = (qty[i] - R[i, i + 1:] @ beta[i + 1:]) / R[i, i]
    return beta
