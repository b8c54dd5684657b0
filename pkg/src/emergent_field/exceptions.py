"""Exception types raised by the simulator."""


class InvalidParameterError(ValueError):
    """A parameter is outside the domain of the operation."""


class LatticeMismatchError(ValueError):
    """A mode state, grid or wavevector does not belong to the given lattice."""


class EmptyShellError(ValueError):
    """No lattice wavevector lies on the requested shell."""


class NodeError(ArithmeticError):
    """The wavefunctional vanishes, so its phase and guidance velocity are undefined.

    Attributes
    ----------
    t : float or None
        Time at which the node was met, when known.
    state : object or None
        Last good state before the node.
    """

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class DegenerateCurrentError(ArithmeticError):
    """The field carries no probability current at the requested event."""

    def __init__(self, message, last_position=None, t=None):
        super().__init__(message)
        self.last_position = last_position
        self.t = t


class StencilError(ValueError):
    """A finite-difference stencil overlaps a non-smooth part of the field."""
