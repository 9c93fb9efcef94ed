class SmotError(Exception):
    """Base class for all library errors."""


class OutOfRange(SmotError):
    pass


class MassMismatch(SmotError):
    pass


class NegativeMass(SmotError):
    pass


class ShadowInfeasible(SmotError):
    """Raised when ``k * delta_x`` is not dominated by ``nu`` in the pcd order.

    ``slack`` is ``bary(theta_0) - x``, the amount by which the leftmost
    admissible slice overshoots the source location.
    """

    def __init__(self, message: str, slack=None):
        super().__init__(message)
        self.slack = slack


class NotInConvexDecreasingOrder(SmotError):
    """``mu <=_cd nu`` fails; ``witness`` is ``(t, p_mu(t), p_nu(t))`` when a put point fails."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class DecompositionError(SmotError):
    pass


class SolverError(SmotError):
    pass


class ParseError(SmotError):
    pass
