"""Small dense symmetric linear algebra: covariance, Jacobi eigen-decomposition,
Householder reflections.

Feature dimensions in this package are small (tens at most), so everything
here is plain dense numpy with a cyclic Jacobi solver instead of LAPACK.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DegenerateClass, DimensionMismatch, ZeroDenominator

JACOBI_MAX_SWEEPS = 100
JACOBI_REL_TOL = 1e-12
# eigenvalues at or below this fraction of max(lambda_max, 1) count as zero
ZERO_EIGEN_REL = 1e-9
_SIGN_EPS = 1e-12


@dataclass(frozen=True)
class CovarianceMatrix:
    S: np.ndarray
    mean: np.ndarray
    count: int
    degenerate: bool = False


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray


@dataclass(frozen=True)
class HouseholderMatrix:
    H: np.ndarray
    u: np.ndarray
    source: np.ndarray


def covariance(X) -> CovarianceMatrix:
    """Unbiased sample covariance (``1/(n-1)``) of the rows of ``X``.

    Raises DegenerateClass for fewer than two rows. Identical rows give a zero
    matrix with ``degenerate=True``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DegenerateClass("covariance needs at least two vectors")
    n = X.shape[0]
    mean = X.mean(axis=0)
    if np.all(X == X[0]):
        p = X.shape[1]
        return CovarianceMatrix(np.zeros((p, p)), mean, n, degenerate=True)
    C = X - mean
    S = (C.T @ C) / (n - 1)
    upper = np.triu(S)
    S = upper + np.triu(S, 1).T
    return CovarianceMatrix(S, mean, n)


def _fix_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > _SIGN_EPS)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _jacobi(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotations; returns (eigenvalues, eigenvector columns)."""
    A = np.array(A, dtype=np.float64)
    p = A.shape[0]
    V = np.eye(p)
    fro = math.sqrt(float(np.sum(A * A)))
    if fro == 0.0 or p == 1:
        return np.diag(A).copy(), V
    tol = JACOBI_REL_TOL * fro
    iu = np.triu_indices(p, 1)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(2.0 * float(np.sum(A[iu] ** 2)))
        if off <= tol:
            return np.diag(A).copy(), V
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = A[i, j]
                if aij == 0.0:
                    continue
                h = A[j, j] - A[i, i]
                if abs(h) + 100.0 * abs(aij) == abs(h):
                    t = aij / h
                else:
                    theta = 0.5 * h / aij
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ci, cj = A[:, i].copy(), A[:, j].copy()
                A[:, i] = c * ci - s * cj
                A[:, j] = s * ci + c * cj
                ri, rj = A[i, :].copy(), A[j, :].copy()
                A[i, :] = c * ri - s * rj
                A[j, :] = s * ri + c * rj
                A[i, j] = A[j, i] = 0.0
                vi, vj = V[:, i].copy(), V[:, j].copy()
                V[:, i] = c * vi - s * vj
                V[:, j] = s * vi + c * vj
    raise ConvergenceFailure(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def _as_matrix(S) -> np.ndarray:
    M = S.S if isinstance(S, CovarianceMatrix) else np.asarray(S, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    return M


def symmetric_eigen(S) -> list[EigenPair]:
    """Full spectrum of a symmetric matrix, sorted by eigenvalue descending.

    Exact eigenvalue ties go to the vector whose largest-magnitude component
    sits on the lower axis. Each vector has unit norm and its first nonzero
    component positive.
    """
    M = _as_matrix(S)
    vals, vecs = _jacobi(M)
    pairs = []
    for k in range(len(vals)):
        v = vecs[:, k]
        v = _fix_sign(v / np.linalg.norm(v))
        pairs.append(EigenPair(float(vals[k]), v))
    pairs.sort(key=lambda e: (-e.value, int(np.argmax(np.abs(e.vector)))))
    return pairs


def dominant_eigen(S) -> EigenPair:
    """Largest eigenpair; raises DegenerateClass for the zero matrix.

    Taken from the same decomposition as :func:`symmetric_eigen` so the
    dominant direction is bitwise identical to the first full-spectrum pair.
    """
    M = _as_matrix(S)
    if not np.any(M):
        raise DegenerateClass("zero covariance matrix has no dominant direction")
    return symmetric_eigen(M)[0]


def nonzero_eigen(pairs: list[EigenPair]) -> list[tuple[int, EigenPair]]:
    """(index, pair) for every eigenvalue that is numerically nonzero."""
    if not pairs:
        return []
    cutoff = ZERO_EIGEN_REL * max(pairs[0].value, 1.0)
    return [(j, e) for j, e in enumerate(pairs) if e.value > cutoff]


def householder(d) -> HouseholderMatrix:
    """Reflection ``H = I - 2uu^T`` with ``u = (e1 - d)/||e1 - d||``, so ``Hd = e1``."""
    d = np.asarray(d, dtype=np.float64)
    if abs(float(np.linalg.norm(d)) - 1.0) > 1e-8:
        raise ValueError("householder needs a unit vector")
    diff = -d
    diff[0] += 1.0
    nrm = float(np.linalg.norm(diff))
    if nrm == 0.0:
        raise ZeroDenominator("d equals e1; no reflection needed")
    u = diff / nrm
    H = np.eye(len(d)) - 2.0 * np.outer(u, u)
    return HouseholderMatrix(H, u, d)


def near_axis(d, tau: float) -> bool:
    """True when ``d`` lies within ``tau`` of some signed coordinate axis."""
    d = np.asarray(d, dtype=np.float64)
    base = float(np.sum(d * d))
    # ||e_k -+ d||^2 = 1 + ||d||^2 -+ 2 d_k
    dist2 = 1.0 + base - 2.0 * np.abs(d)
    return bool(np.sqrt(np.maximum(dist2.min(), 0.0)) <= tau)


def project(X, w) -> np.ndarray:
    """Row-wise ``X @ w`` with a fixed left-to-right accumulation.

    Used for every split evaluation and every routing decision so that the
    partition of a node is reproduced bit for bit at prediction time.
    """
    X = np.asarray(X, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(w):
        raise DimensionMismatch(f"cannot project shape {X.shape} onto {len(w)} weights")
    z = X[:, 0] * w[0]
    for j in range(1, len(w)):
        z = z + X[:, j] * w[j]
    return z


def reflect(D, H) -> np.ndarray:
    """Reflected data ``D @ H``, column by column via :func:`project`."""
    Hm = H.H if isinstance(H, HouseholderMatrix) else np.asarray(H, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[1] != Hm.shape[0]:
        raise DimensionMismatch(f"cannot reflect shape {D.shape} with a {Hm.shape} matrix")
    return np.column_stack([project(D, Hm[:, k]) for k in range(Hm.shape[1])])
