"""Total-least-squares fit for a row-aligned observation pair.

Given y2 and an already-aligned y1p (both n x p), the fit finds the nearest
rank-p matrix to [y2 | y1p] in Frobenius norm. The residual, the sum of the
p smallest squared singular values of the stack, is the objective every
estimator in this package minimizes over row alignments.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DegenerateFit
from .linalg import as_matrix, singular_values, svd


def _aligned_pair(y2, y1p) -> tuple[np.ndarray, np.ndarray, int, int]:
    m2 = as_matrix(y2, "y2")
    m1 = as_matrix(y1p, "y1p")
    if m2.shape != m1.shape:
        raise ContractViolation(f"aligned pair shapes differ: {m2.shape} vs {m1.shape}")
    n, p = m2.shape
    if n < 2 * p:
        raise ContractViolation(f"need n >= 2p, got n={n}, p={p}")
    return m2, m1, n, p


def tls_objective(y2, y1p) -> float:
    """Sum of the p smallest squared singular values of [y2 | y1p]."""
    m2, m1, _, p = _aligned_pair(y2, y1p)
    s = singular_values(np.hstack((m2, m1)))
    return float(np.sum(s[p:] ** 2))


@dataclass
class TlsFit:
    """x_hat: denoised aligned design (n x p, in y2's row order);
    r_hat: fitted mixing matrix (p x p); objective: rank-p residual."""

    x_hat: np.ndarray
    r_hat: np.ndarray
    objective: float


def tls_fit(y2, y1p) -> TlsFit:
    """Rank-p fit of the stacked pair.

    The rank-p truncation of [y2 | y1p] splits by columns into a denoised y2
    block and a denoised y1p block (x_hat). r_hat solves the exactly
    consistent system x_hat @ r = denoised y2 by least squares; no inverse is
    formed. Raises DegenerateFit when x_hat is numerically rank deficient,
    which callers treat as a failed iterate.
    """
    m2, m1, _, p = _aligned_pair(y2, y1p)
    f = svd(np.hstack((m2, m1)))
    objective = float(np.sum(f.s[p:] ** 2))
    low_rank = (f.u[:, :p] * f.s[:p]) @ f.v[:, :p].T
    y2_hat = low_rank[:, :p]
    x_hat = low_rank[:, p:]
    sv = singular_values(x_hat)
    if sv[0] <= 0.0 or sv[-1] <= 1e-10 * sv[0]:
        raise DegenerateFit("denoised design is numerically rank deficient")
    r_hat, *_ = np.linalg.lstsq(x_hat, y2_hat, rcond=None)
    return TlsFit(x_hat=x_hat, r_hat=r_hat, objective=objective)
