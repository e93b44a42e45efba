"""Dense linear-algebra primitives with pinned conventions.

Everything downstream assumes the conventions fixed here: thin factorizations,
singular values and eigenvalues sorted descending, and a deterministic sign for
singular vectors so repeated runs produce identical factors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, NumericalFailure

_RANK_TOL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array, rejecting anything else."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ContractViolation(f"{name} must be a nonempty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{name} contains NaN or Inf entries")
    return arr


@dataclass
class SvdResult:
    """Thin SVD factors: a = u @ diag(s) @ v.T with s sorted descending."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def svd(a) -> SvdResult:
    """Thin SVD with a deterministic sign convention.

    Each left singular vector is flipped, together with its right partner, so
    that its largest-magnitude entry is positive (first such entry on ties).
    """
    arr = as_matrix(a, "svd input")
    try:
        u, s, vt = np.linalg.svd(arr, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"svd did not converge: {exc}") from exc
    v = vt.T
    for k in range(s.shape[0]):
        pivot = int(np.argmax(np.abs(u[:, k])))
        if u[pivot, k] < 0:
            u[:, k] = -u[:, k]
            v[:, k] = -v[:, k]
    return SvdResult(u=u, s=s, v=v)


def singular_values(a) -> np.ndarray:
    """Singular values only, descending. Cheaper than svd() when factors are unused."""
    arr = as_matrix(a, "singular_values input")
    try:
        return np.linalg.svd(arr, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"svd did not converge: {exc}") from exc


def sym_eigvals(a) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, sorted descending."""
    arr = as_matrix(a, "sym_eigvals input")
    if arr.shape[0] != arr.shape[1]:
        raise ContractViolation(f"sym_eigvals needs a square matrix, got {arr.shape}")
    asym = np.linalg.norm(arr - arr.T)
    if asym > 1e-12 * (1.0 + np.linalg.norm(arr)):
        raise ContractViolation("sym_eigvals input is not symmetric")
    vals = np.linalg.eigvalsh((arr + arr.T) / 2.0)
    return vals[::-1]


def orthogonal_procrustes(a, b) -> tuple[np.ndarray, float]:
    """Best orthogonal alignment of b onto a.

    Returns (q, loss) with q minimizing ||a - b q||_F^2 over the full orthogonal
    group, reflections included, and loss the attained minimum.
    """
    am = as_matrix(a, "procrustes target")
    bm = as_matrix(b, "procrustes source")
    if am.shape != bm.shape:
        raise ContractViolation(f"procrustes shapes differ: {am.shape} vs {bm.shape}")
    f = svd(bm.T @ am)
    q = f.u @ f.v.T
    loss = float(np.linalg.norm(am - bm @ q) ** 2)
    return q, loss


def nuclear_norm(a) -> float:
    """Sum of singular values."""
    return float(svd(a).s.sum())


def frobenius_norm(a) -> float:
    """Square root of the sum of squared entries."""
    return float(np.linalg.norm(as_matrix(a, "frobenius_norm input")))


def condition_number(a) -> float:
    """Ratio of largest to smallest singular value, inf when rank deficient."""
    arr = as_matrix(a, "condition_number input")
    if arr.shape[0] < arr.shape[1]:
        raise ContractViolation("condition_number expects at least as many rows as columns")
    s = singular_values(arr)
    if s[0] <= 0.0 or s[-1] <= _RANK_TOL * s[0]:
        return float("inf")
    return float(s[0] / s[-1])
