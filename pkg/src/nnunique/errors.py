"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument violates a documented precondition."""


class NumericalError(RuntimeError):
    """An iterative routine failed to converge.

    ``residual`` carries the last measured residual when one is available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class EnumerationTooLarge(ContractError):
    """Exhaustive enumeration would exceed the configured subset budget."""


class EmptyNullSpace(ContractError):
    """The matrix has a trivial null space, so no null vector can be drawn."""


class DegenerateGraph(ContractError):
    """A bipartite graph has a left node with no edges."""
