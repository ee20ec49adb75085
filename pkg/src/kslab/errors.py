"""Exception types shared across the package.

Validation failures (bad parameters, inconsistent configuration) raise
subclasses of :class:`ValidationError`; failures occurring while a
computation is underway raise subclasses of :class:`RuntimeFailure`.
The CLI maps the two groups to distinct exit codes.
"""


class KslabError(Exception):
    """Base class for all package errors."""


class ValidationError(KslabError):
    """Input rejected before any computation started."""


class RuntimeFailure(KslabError):
    """Computation started but could not be completed."""


class SymmetryViolation(RuntimeFailure):
    """Spectral data is not Hermitian-symmetric enough to be a real field."""


class ModelMismatch(ValidationError):
    """State does not carry the fields the chosen model needs."""


class GridMismatch(ValidationError):
    """Operands live on different grids."""


class DomainError(ValidationError):
    """Parameter outside the admissible region of an analytic formula."""


class BadExponent(ValidationError):
    """Norm exponent outside its admissible range."""


class QuadratureFailure(RuntimeFailure):
    """Adaptive quadrature could not meet its error target."""


class NonFinite(RuntimeFailure):
    """NaN or Inf appeared in a spectral coefficient."""


class ConfigError(ValidationError):
    """Inconsistent or unknown configuration entry."""


class BracketInvalid(RuntimeFailure):
    """Bisection endpoints do not bracket the sought transition."""


class WindowInvalid(ValidationError):
    """Requested time window violates its support criterion."""


class FamilyMismatch(ValidationError):
    """Initial-data family incompatible with the requested dimension."""


class Diverged(RuntimeFailure):
    """Fixed-point iteration left the basin it was started in."""


class MonotonicityBreak(RuntimeFailure):
    """Probe outcomes are not monotone in the swept parameter."""
