"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Model or operation parameters violate a precondition."""


class DegenerateLikelihoodError(ParameterError):
    """LLR transform requested for p=1 or q=0; use the adjacency score instead."""


class WellDefinednessError(ValueError):
    """A root equation has no solution in its stated interval."""


class RegimeError(ValueError):
    """Parameters fall outside the regime where a quantity is defined."""


class GuardExceededError(ValueError):
    """An enumeration guard (e.g. C(n,K) cap) was exceeded."""


class WitnessFailedError(RuntimeError):
    """A witness construction could not produce a feasible point."""


class ContractError(ValueError):
    """An input violates a structural contract (e.g. non-symmetric matrix)."""
