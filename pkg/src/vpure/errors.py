"""Exception types shared across the toolkit."""


class VpureError(Exception):
    """Base class for all toolkit errors."""


class InvalidExtent(VpureError):
    """Lattice extent is zero, or a periodic chain of length 2 was requested."""


class DimensionLimit(VpureError):
    """A dense object would exceed the configured qubit limit."""


class DegenerateGroundState(VpureError):
    """Ground-state gap below tolerance; the projector is ill-defined."""


class EmptyKeepSet(VpureError):
    """partial_trace called with no sites to keep."""


class NegativeExponent(VpureError):
    """matrix_power called with t < 0."""


class DimensionMismatch(VpureError):
    """Operands act on different spaces."""


class InvalidRate(VpureError):
    """Noise rate outside [0, 1]."""


class VanishingDenominator(VpureError):
    """Tr[rho^n] fell below 1e-300; the ratio estimator is undefined."""


class NotPure(VpureError):
    """A pure-state-only operation received a mixed state."""


class RankDeficient(VpureError):
    """Eigenvalue flooring changed the trace too much; input is not full rank."""


class NumericalOverflow(VpureError):
    """An exponential left the double-precision range even after shifting."""


class QuadratureNotConverged(VpureError):
    """Doubling the node count still moves the result beyond tolerance."""


class NegativeDeterminant(VpureError):
    """A determinant that must be nonnegative came out below -1e-12."""


class NotAValidCorrelation(VpureError):
    """Correlation-matrix eigenvalues leave the physical interval."""


class DenominatorEstimateZero(VpureError):
    """Sampled denominator mean is <= 0; the shot-level ratio is unusable."""


class ConfigInvalid(VpureError):
    """Experiment configuration failed validation; message carries the field path."""


class BackendMismatch(VpureError):
    """Recipe needs quantities the selected backend cannot supply."""
