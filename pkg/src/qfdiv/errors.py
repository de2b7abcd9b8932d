"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input violates a documented precondition or invariant."""


class PreconditionError(DomainError):
    """A divergence function does not satisfy the hypotheses an operation needs."""


class ConvergenceError(RuntimeError):
    """Every optimizer start failed to converge; carries per-start diagnostics."""
