"""Exception hierarchy shared by all modules."""


class RandCurvError(Exception):
    """Base class for every error raised by randcurv."""


class MalformedInput(RandCurvError, ValueError):
    """A polynomial file or parameter set violates its schema."""


class DegenerateLine(RandCurvError):
    """The restricted polynomial lost degree (curve passes through the line's point at infinity)."""


class ConvergenceFailure(RandCurvError):
    """Root polishing stalled before reaching the residual bound."""


class SingularPoint(RandCurvError):
    """The gradient of the defining function vanishes (to working precision) on the zero set."""


class BranchFailure(RandCurvError):
    """An implicit-function branch w(z) is vertical at a quadrature node."""


class NumericalAbort(RandCurvError):
    """A run-level numerical guard fired; the CLI maps these to exit code 3."""


class TooManyDiscards(NumericalAbort):
    """More than the allowed fraction of samples sat on near-singular points."""


class IllConditioned(NumericalAbort):
    """Root clustering prevents a reliable count at the requested tolerance."""
