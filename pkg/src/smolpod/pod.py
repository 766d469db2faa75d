"""POD basis machinery: snapshot SVD, basis merging, projection error.

A reduction basis is represented throughout as a plain (N, R) ndarray
with orthonormal columns; R = 0 (shape (N, 0)) is the legal empty
basis.  Truncation always uses an absolute singular-value threshold,
and each retained column is sign-fixed so its largest-magnitude entry
is positive, which makes every basis-producing operation deterministic.

``SnapshotPOD`` wraps the snapshot SVD as a scikit-learn transformer
(samples are rows, i.e. the transpose of the column-snapshot
convention used internally).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import ValidationError, check_matrix, check_vector


def empty_basis(N: int) -> np.ndarray:
    return np.zeros((N, 0))


def _fix_signs(V: np.ndarray) -> np.ndarray:
    for col in V.T:
        pivot = np.argmax(np.abs(col))
        if col[pivot] < 0:
            col *= -1.0
    return V


def truncated_basis(M: np.ndarray, sv_tol: float):
    """Left singular vectors of M with singular values >= sv_tol.

    Returns (V, kept_singular_values); V is empty when every singular
    value falls below the threshold.  Ties (sigma == sv_tol) are kept.
    """
    M = check_matrix(M, name="snapshot matrix")
    if sv_tol <= 0:
        raise ValidationError(f"singular-value threshold must be positive, got {sv_tol}")
    if M.shape[1] == 0:
        return empty_basis(M.shape[0]), np.zeros(0)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s >= sv_tol))
    return _fix_signs(U[:, :r].copy()), s[:r].copy()


def snapshot_basis(snapshots: np.ndarray, sv_tol: float) -> np.ndarray:
    """POD basis of an (N, m) snapshot matrix (columns are states)."""
    return truncated_basis(snapshots, sv_tol)[0]


def merge_bases(A: np.ndarray, B: np.ndarray, sv_tol: float) -> np.ndarray:
    """Combine two bases: senior left singular vectors of (A | B).

    Retains directions whose singular value is >= sv_tol; with
    orthonormal inputs the shared directions get sigma ~ sqrt(2) and
    survive, near-duplicates collapse.
    """
    A = check_matrix(A, name="basis A")
    B = check_matrix(B, rows=A.shape[0], name="basis B")
    return truncated_basis(np.hstack([A, B]), sv_tol)[0]


def projection_error(V: np.ndarray, W: np.ndarray) -> float:
    """Spectral norm of (I - V V^T) W, i.e. the worst direction of W
    not captured by span(V).  Empty V gives ||W||_2."""
    V = check_matrix(V, name="basis")
    W = check_matrix(W, rows=V.shape[0], name="candidate basis")
    if W.shape[1] == 0:
        return 0.0
    if V.shape[1] == 0:
        residual = W
    else:
        residual = W - V @ (V.T @ W)
    return float(np.linalg.svd(residual, compute_uv=False)[0])


def project(V: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Reduced coordinates x = V^T n."""
    V = check_matrix(V, name="basis")
    n = check_vector(n, V.shape[0], "state")
    return V.T @ n


def lift(V: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Full-space reconstruction n = V x."""
    V = check_matrix(V, name="basis")
    x = check_vector(x, V.shape[1], "reduced state")
    return V @ x


def orthonormality_defect(V: np.ndarray) -> float:
    """Frobenius norm of V^T V - I; zero for a perfectly orthonormal basis."""
    R = V.shape[1]
    if R == 0:
        return 0.0
    return float(np.linalg.norm(V.T @ V - np.eye(R)))


class SnapshotPOD(BaseEstimator, TransformerMixin):
    """Snapshot-POD transformer in scikit-learn clothing.

    Parameters
    ----------
    sv_tol : float
        Absolute singular-value truncation threshold.

    Attributes
    ----------
    components_ : ndarray of shape (R, N)
        Orthonormal POD modes (rows).
    singular_values_ : ndarray of shape (R,)
    """

    def __init__(self, sv_tol=1e-12):
        self.sv_tol = sv_tol

    def fit(self, X, y=None):
        X = check_matrix(X, name="X")
        V, s = truncated_basis(X.T, self.sv_tol)
        self.components_ = V.T
        self.singular_values_ = s
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = check_matrix(X, name="X")
        return X @ self.components_.T

    def inverse_transform(self, X_reduced):
        X_reduced = check_matrix(X_reduced, name="X_reduced")
        return X_reduced @ self.components_

    @property
    def basis_(self) -> np.ndarray:
        """Column-orthonormal (N, R) basis matrix."""
        return self.components_.T
