"""Exception types shared across the package.

Contract violations are caller bugs (bad shapes, non-finite entries, out-of-range
arguments). Numerical failures are data-dependent conditions detected at runtime;
callers inside the iterative estimators treat them as failed iterates rather than
hard crashes.
"""


class ContractViolation(ValueError):
    """An input broke a documented precondition."""


class NumericalFailure(RuntimeError):
    """A numerical routine could not produce a trustworthy result."""


class DegenerateFit(NumericalFailure):
    """Rank-p fit produced a denoised design too ill-conditioned to solve against."""


class RankDeficient(NumericalFailure):
    """A matrix required to have full column rank does not."""
