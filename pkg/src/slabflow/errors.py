"""Exception types raised by the solvers and spectral operators."""


class SlabflowError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(SlabflowError):
    """Sample array or field shape does not match the grid."""


class ParityMismatch(SlabflowError):
    """Field does not carry (or declare) the z-parity an operation requires."""


class NonzeroVerticalMean(SlabflowError):
    """Vertical antiderivative requested for a field whose pointwise
    vertical average does not vanish; the primitive would be nonperiodic."""


class NonzeroMeanRHS(SlabflowError):
    """Horizontal Poisson problem has no solution: right-hand side carries
    a nonzero mean (or the incompressibility constraint feeding it is broken)."""


class NonpositiveDensity(SlabflowError):
    """Density reached zero or below somewhere on the grid."""


class DensityOutOfBounds(SlabflowError):
    """Density left the admissible band (rho0/2, 2*rho0)."""


class CFLViolation(SlabflowError):
    """Requested time step exceeds the stability bound."""


class TimeGridMismatch(SlabflowError):
    """Paired states do not share a time instant or a grid."""


class ConfigError(SlabflowError):
    """Experiment configuration file is malformed."""
