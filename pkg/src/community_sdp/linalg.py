"""Symmetric-matrix spectral kernel used by the solver and certificate checker.

All inputs are dense symmetric ndarrays. The dense eigensolver is LAPACK's
divide-and-conquer routine via numpy; a Lanczos path is used only for
spectral_norm above LANCZOS_THRESHOLD.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

LANCZOS_THRESHOLD = 2000

_SYM_TOL = 1e-12


@dataclass(frozen=True)
class EigDecomp:
    """Full spectral decomposition: values ascending, vectors orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray


def require_symmetric(M: np.ndarray, tol: float = _SYM_TOL) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 0.0)
    dev = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if dev > tol * scale:
        raise ContractError(f"matrix is not symmetric: max |M - M.T| = {dev:.3e}")
    return M


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # deterministic convention: first coordinate of non-negligible magnitude positive
    V = vectors
    n = V.shape[0]
    for j in range(V.shape[1]):
        col = V[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        k = idx[0] if idx.size else int(np.argmax(np.abs(col)))
        if col[k] < 0:
            V[:, j] = -col
    return V


def sym_eig(M: np.ndarray) -> EigDecomp:
    """Full eigendecomposition of a symmetric matrix, ascending eigenvalues."""
    M = require_symmetric(M)
    w, V = np.linalg.eigh(M)
    return EigDecomp(values=w, vectors=_fix_signs(V))


def spectral_norm(M: np.ndarray) -> float:
    """Largest absolute eigenvalue of a symmetric matrix."""
    M = require_symmetric(M)
    n = M.shape[0]
    if n == 0:
        return 0.0
    if n <= LANCZOS_THRESHOLD:
        w = np.linalg.eigvalsh(M)
        return float(max(abs(w[0]), abs(w[-1])))
    from scipy.sparse.linalg import eigsh

    hi = eigsh(M, k=1, which="LA", return_eigenvectors=False, tol=1e-10)[0]
    lo = eigsh(M, k=1, which="SA", return_eigenvectors=False, tol=1e-10)[0]
    return float(max(abs(hi), abs(lo)))


def psd_project(M: np.ndarray) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix: clip eigenvalues at zero."""
    M = require_symmetric(M)
    w, V = np.linalg.eigh(M)
    if w.size and w[0] >= 0:
        return M.copy()
    pos = w > 0
    if not np.any(pos):
        return np.zeros_like(M)
    Vp = V[:, pos]
    P = (Vp * w[pos]) @ Vp.T
    return (P + P.T) / 2.0


def lambda2_orth(S: np.ndarray, v: np.ndarray) -> float:
    """Minimum of x'Sx over unit vectors x orthogonal to v.

    Deflates the v direction by shifting it above the rest of the spectrum,
    then takes the smallest eigenvalue of the projected matrix.
    """
    S = require_symmetric(S)
    v = np.asarray(v, dtype=float).ravel()
    nv = float(np.linalg.norm(v))
    if nv == 0:
        raise ContractError("deflation vector must be nonzero")
    u = v / nv
    Su = S @ u
    # P S P with P = I - uu', plus a shift c*uu' pushing the u direction out of the way
    PSP = S - np.outer(u, Su) - np.outer(Su, u) + np.dot(u, Su) * np.outer(u, u)
    c = float(np.max(np.abs(S))) * S.shape[0] + 1.0
    PSP += c * np.outer(u, u)
    PSP = (PSP + PSP.T) / 2.0
    w = np.linalg.eigvalsh(PSP)
    return float(w[0])
