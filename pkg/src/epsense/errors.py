"""Exception hierarchy shared across the package."""


class EpsenseError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(EpsenseError, ValueError):
    pass


# numerics

class NearDefective(EpsenseError):
    """Eigenvector matrix too ill-conditioned for biorthogonal normalization."""

    def __init__(self, defectiveness, message=None):
        self.defectiveness = defectiveness
        super().__init__(message or f"eigenvector matrix near defective "
                                    f"(condition estimate {defectiveness:.3g})")


class NonConvergence(EpsenseError):
    pass


class Singular(EpsenseError, ZeroDivisionError):
    pass


class DepthExceeded(EpsenseError):
    """Adaptive quadrature hit its depth limit before meeting the tolerance."""

    def __init__(self, estimate, error_bound):
        self.estimate = estimate
        self.error_bound = error_bound
        super().__init__(f"max depth exceeded: estimate {estimate!r}, "
                         f"error bound {error_bound:.3g}")


# model / scattering

class DivergentAtEP(EpsenseError):
    pass


class NonPositiveFrequency(EpsenseError, ValueError):
    pass


class SingularAtFrequency(EpsenseError):
    pass


# gaussian

class NonPhysicalCovariance(EpsenseError, ValueError):
    pass


class PurityDerivativeSingularity(EpsenseError):
    pass


class StepTooLarge(EpsenseError):
    pass


class TruncationTooSmall(EpsenseError):
    pass


# sensing / active

class ZeroInformation(EpsenseError, ValueError):
    pass


class PoorFit(EpsenseError):
    def __init__(self, exponent, r_squared):
        self.exponent = exponent
        self.r_squared = r_squared
        super().__init__(f"log-log fit r^2={r_squared:.4f} below 0.99 "
                         f"(exponent {exponent:.4f})")


class AboveThreshold(EpsenseError):
    pass


# configuration / io

class IoError(EpsenseError, OSError):
    pass


class ConfigError(EpsenseError):
    """Invalid sweep configuration. ``violations`` lists (path, message) pairs."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [("", violations)]
        self.violations = list(violations)
        lines = [f"{path}: {msg}" if path else msg for path, msg in self.violations]
        super().__init__("; ".join(lines))
