"""Exception types shared across the package.

``CertificateError`` subclasses mark failures of numerical certificates
(contraction, ellipticity, mass accounting, pole avoidance); the CLI maps
them to exit code 3.  ``ConfigError`` marks malformed experiment configs
(exit code 2).  Everything else is an ordinary bug / contract violation.
"""


class PadicError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PadicError):
    """Experiment config failed schema validation."""


class PrimeMismatch(PadicError):
    """Operands live over different primes."""


class DivisionByZero(PadicError, ZeroDivisionError):
    """Inverse of the zero element requested."""


class PrecisionExhausted(PadicError):
    """Cancellation left fewer than one significant digit at working precision."""


class RegionFinerThanResolution(PadicError):
    """Integration region is not a union of resolution cosets."""


class CertificateError(PadicError):
    """A numerical certificate required by an operation does not hold."""


class PoleError(CertificateError):
    """Gamma function evaluated at a pole (p^-u = 1)."""


class SizeOverflow(CertificateError):
    """Requested grid exceeds the configured entry cap."""


class NotElliptic(CertificateError):
    """Symbol failed the (strict) ellipticity certificate."""


class MassDeficit(CertificateError):
    """Realized measure loses more mass to truncation than tolerated."""


class DegenerateCorrelation(PadicError):
    """Correlation form is degenerate; the measure has an atomic projection
    and no density exists."""


class NoContraction(CertificateError):
    """Fixed-point contraction certificate cannot be established."""


class BudgetExceeded(CertificateError):
    """Iteration budget exhausted before the convergence target."""


class UnsampledDriver(PadicError):
    """Driving path is missing values at required partition representatives."""


class ChartEscape(CertificateError):
    """A simulated path left every chart of the atlas."""
