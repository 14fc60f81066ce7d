"""Exception hierarchy shared by all stabgraph modules."""


class StabgraphError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(StabgraphError, ValueError):
    """Operands live in different (or unsupported) dimensions."""


class NotNormalError(StabgraphError, ValueError):
    """A matrix expected to be normal (or unitary) is not."""


class NotCommutingError(StabgraphError, ValueError):
    """A family expected to commute pairwise does not."""

    def __init__(self, i, j, residual):
        super().__init__(f"inputs {i} and {j} do not commute (residual {residual:.3e})")
        self.pair = (i, j)
        self.residual = residual


class NotProjectorError(StabgraphError, ValueError):
    """Input is not an orthogonal projector within tolerance."""


class PauliParseError(StabgraphError, ValueError):
    """Malformed Pauli string text."""


class GroupError(StabgraphError, ValueError):
    """Invalid Pauli group input: closure too large, not a stabilizer group, dependent generators."""


class CoefficientError(StabgraphError, ValueError):
    """Malformed or invalid M0 coefficient data."""
