"""Exception hierarchy shared across the lab."""


class BieberbachLabError(Exception):
    """Base class for all lab-specific failures."""


class DomainError(BieberbachLabError, ValueError):
    """Jet arithmetic was asked to leave its domain (division by zero, sqrt of a nonpositive value)."""


class DegenerateImmersion(BieberbachLabError):
    """The chart derivatives f_x, f_y are linearly dependent beyond tolerance."""


class NotConformal(BieberbachLabError):
    """A surface failed its conformality certificate where one was required."""


class OutsideTube(BieberbachLabError):
    """An ambient query point could not be resolved to (surface point, normal offset)."""


class FrameDiscontinuity(BieberbachLabError):
    """Pointwise normal frames flipped pivot inside an evaluation region."""


class LeftDomain(BieberbachLabError):
    """A flow trajectory left the domain of its vector field."""


class StepFailure(BieberbachLabError):
    """The adaptive step controller underflowed or exceeded its evaluation budget."""


class ZeroDerivative(BieberbachLabError):
    """A germ with vanishing first derivative was passed where univalence is required."""


class ConfigError(BieberbachLabError):
    """Malformed command-line or run configuration."""
