"""Exception types shared across the solver."""


class CurveFlowError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateCurveError(CurveFlowError):
    """A curve (or jet) has a vanishing tangent where one is required."""


class NonConvergenceError(CurveFlowError):
    """The nonlinear solve did not reach the requested residual tolerance."""


class SingularJacobianError(CurveFlowError):
    """The linearized step system could not be solved."""


class FlowAbortedError(CurveFlowError):
    """A flow run stopped early; carries the frames accepted so far."""

    def __init__(self, message, frames=()):
        super().__init__(message)
        self.frames = list(frames)


class ConfigError(CurveFlowError):
    """A run configuration is malformed or violates an invariant."""
