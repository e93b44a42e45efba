"""Permutation estimators.

Three routes to a row alignment between y2 and y1:

* brute force over all n! permutations (small n only), exact argmin of the
  rank-p residual;
* an alternating scheme that interleaves the rank-p fit with a linear
  assignment over one of four cost matrices (c1..c4);
* a faster ordinary-least-squares alternation that ignores design noise.

Both iterative schemes keep every visited iterate and return the best one by
their selection metric, not the last, because the alternation may wander.

Cost-matrix orientation: after a fit at the current permutation, fitted row j
is aligned with y2 row j and was built from y1 row pi_cur[j]. Costs c1 and c3
compare y2 rows against fitted rows, so their assignment ``a`` is composed as
``pi_new[i] = pi_cur[a[i]]``. Costs c2 and c4 compare against raw y1 rows, so
their assignment is already the new permutation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ContractViolation, DegenerateFit, RankDeficient
from .lap import solve_lap
from .linalg import as_matrix, singular_values
from .model import as_permutation, identity_permutation
from .tls import TlsFit, tls_fit, tls_objective

COST_KINDS = ("c1", "c2", "c3", "c4")

BRUTE_FORCE_LIMIT = 9


@dataclass
class EstimateResult:
    """Outcome of one estimator run.

    perm is the best iterate found; objective_trace holds the rank-p residual
    of every evaluated iterate in visit order (a single entry for brute
    force). failure is None on clean runs, otherwise a short marker and the
    best iterate seen before the failure. ols_residual_trace is filled by the
    least-squares alternation, whose selection metric it is.
    """

    perm: np.ndarray
    iterations: int
    objective_trace: list[float]
    converged: bool
    failure: str | None = None
    ols_residual_trace: list[float] | None = field(default=None)

    @property
    def best_objective(self) -> float:
        return float(min(self.objective_trace))


def _observation_pair(y1, y2) -> tuple[np.ndarray, np.ndarray, int, int]:
    m1 = as_matrix(y1, "y1")
    m2 = as_matrix(y2, "y2")
    if m1.shape != m2.shape:
        raise ContractViolation(f"y1 and y2 shapes differ: {m1.shape} vs {m2.shape}")
    n, p = m1.shape
    if n < 2 * p:
        raise ContractViolation(f"need n >= 2p, got n={n}, p={p}")
    return m1, m2, n, p


def brute_force_tls(y1, y2, limit: int = BRUTE_FORCE_LIMIT) -> EstimateResult:
    """Exact argmin of the rank-p residual over all n! row alignments.

    Refuses n > limit. Ties break to the lexicographically first permutation.
    """
    m1, m2, n, _ = _observation_pair(y1, y2)
    if n > limit:
        raise ContractViolation(f"brute force refused for n={n} > limit={limit}")
    best_obj = np.inf
    best_perm = identity_permutation(n)
    count = 0
    for tup in itertools.permutations(range(n)):
        perm = np.array(tup, dtype=np.intp)
        obj = tls_objective(m2, m1[perm])
        count += 1
        if obj < best_obj:
            best_obj = obj
            best_perm = perm
    return EstimateResult(
        perm=best_perm,
        iterations=count,
        objective_trace=[best_obj],
        converged=True,
    )


def build_cost(kind: str, fit: TlsFit, y1, y2) -> np.ndarray:
    """Assemble one of the four assignment cost matrices.

    c1[i, j] = ||y2[i] - (x_hat @ r_hat)[j]||^2
    c2[i, j] = ||x_hat[i] - y1[j]||^2
    c3 = c1 + c2
    c4[i, j] = min over x of ||y2[i] - r_hat.T @ x||^2 + ||y1[j] - x||^2

    The c4 minimum has the closed form x = (r_hat r_hat.T + I)^{-1}
    (r_hat y2[i] + y1[j]); the p x p system is factored once and the value is
    expanded so the whole matrix fills in O(n^2 p).
    """
    if kind not in COST_KINDS:
        raise ContractViolation(f"unknown cost kind {kind!r}, expected one of {COST_KINDS}")
    m1, m2, _, p = _observation_pair(y1, y2)
    x_hat = as_matrix(fit.x_hat, "x_hat")
    r_hat = as_matrix(fit.r_hat, "r_hat")
    if x_hat.shape != m1.shape or r_hat.shape != (p, p):
        raise ContractViolation("fit shapes are inconsistent with the observations")
    if kind == "c1":
        return cdist(m2, x_hat @ r_hat, "sqeuclidean")
    if kind == "c2":
        return cdist(x_hat, m1, "sqeuclidean")
    if kind == "c3":
        return cdist(m2, x_hat @ r_hat, "sqeuclidean") + cdist(x_hat, m1, "sqeuclidean")
    # c4: with u_i = r_hat @ y2[i], v_j = y1[j], m = r_hat r_hat.T + I, the
    # minimum equals ||y2_i||^2 + ||y1_j||^2 - (u_i+v_j).T m^{-1} (u_i+v_j).
    m = r_hat @ r_hat.T + np.eye(p)
    u = m2 @ r_hat.T
    mu = np.linalg.solve(m, u.T).T
    mv = np.linalg.solve(m, m1.T).T
    quad_u = np.einsum("ij,ij->i", m2, m2) - np.einsum("ij,ij->i", u, mu)
    quad_v = np.einsum("ij,ij->i", m1, m1) - np.einsum("ij,ij->i", m1, mv)
    return quad_u[:, None] + quad_v[None, :] - 2.0 * (u @ mv.T)


def _validated_init(init, n: int) -> np.ndarray:
    if init is None:
        return identity_permutation(n)
    return as_permutation(init, n)


def alta(y1, y2, kind: str = "c3", init=None,
         max_iter: int = 50, tol: float = 1e-10) -> EstimateResult:
    """Alternate the rank-p fit with a linear assignment over cost `kind`.

    Stops on an exact revisit of an earlier permutation, on a consecutive
    improvement below tol (relative), or after max_iter fits. Returns the
    iterate with the smallest recorded objective. A degenerate fit ends the
    run with a failure marker instead of raising.
    """
    if kind not in COST_KINDS:
        raise ContractViolation(f"unknown cost kind {kind!r}, expected one of {COST_KINDS}")
    if max_iter < 1:
        raise ContractViolation("max_iter must be >= 1")
    m1, m2, n, _ = _observation_pair(y1, y2)
    pi = _validated_init(init, n)
    visited = {tuple(pi)}
    perms: list[np.ndarray] = []
    trace: list[float] = []
    converged = False
    failure = None
    for it in range(max_iter):
        perms.append(pi)
        try:
            fit = tls_fit(m2, m1[pi])
        except DegenerateFit:
            trace.append(tls_objective(m2, m1[pi]))
            failure = "degenerate_fit"
            break
        trace.append(fit.objective)
        if it > 0 and trace[-2] - trace[-1] < tol * (1.0 + abs(trace[-2])):
            converged = True
            break
        cost = build_cost(kind, fit, m1, m2)
        assignment, _ = solve_lap(cost)
        pi_next = pi[assignment] if kind in ("c1", "c3") else assignment
        if tuple(pi_next) in visited:
            converged = True
            break
        visited.add(tuple(pi_next))
        pi = pi_next
    best = int(np.argmin(trace))
    return EstimateResult(
        perm=perms[best],
        iterations=len(trace),
        objective_trace=trace,
        converged=converged,
        failure=failure,
    )


def aloa(y1, y2, init=None, max_iter: int = 50, tol: float = 1e-10) -> EstimateResult:
    """Alternate an ordinary-least-squares fit with a linear assignment.

    Treats y1 as a noise-free design: r solves min ||y1[pi] r - y2||_F and the
    assignment cost is ||y2[i] - (y1 r)[j]||^2. Selection and stopping use the
    least-squares residual; the rank-p objective is recorded alongside for
    comparison with the other estimators.
    """
    if max_iter < 1:
        raise ContractViolation("max_iter must be >= 1")
    m1, m2, n, _ = _observation_pair(y1, y2)
    sv = singular_values(m1)
    if sv[0] <= 0.0 or sv[-1] <= 1e-10 * sv[0]:
        raise RankDeficient("y1 must have full column rank for the least-squares route")
    pi = _validated_init(init, n)
    visited = {tuple(pi)}
    perms: list[np.ndarray] = []
    trace: list[float] = []
    residuals: list[float] = []
    converged = False
    for _it in range(max_iter):
        perms.append(pi)
        y1p = m1[pi]
        r_hat, *_ = np.linalg.lstsq(y1p, m2, rcond=None)
        residuals.append(float(np.linalg.norm(y1p @ r_hat - m2) ** 2))
        trace.append(tls_objective(m2, y1p))
        if _it > 0 and residuals[-2] - residuals[-1] < tol * (1.0 + abs(residuals[-2])):
            converged = True
            break
        cost = cdist(m2, m1 @ r_hat, "sqeuclidean")
        assignment, _ = solve_lap(cost)
        if tuple(assignment) in visited:
            converged = True
            break
        visited.add(tuple(assignment))
        pi = assignment
    best = int(np.argmin(residuals))
    return EstimateResult(
        perm=perms[best],
        iterations=len(residuals),
        objective_trace=trace,
        converged=converged,
        ols_residual_trace=residuals,
    )
