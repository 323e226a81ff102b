"""Exception taxonomy for the birs package."""


class BirsError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(BirsError):
    """Array shapes are inconsistent with the model or each other."""


class SingularDesign(BirsError):
    """The (weighted) covariate Gram matrix is not invertible."""


class NoConvergence(BirsError):
    """Iterative null fit hit its iteration cap before converging."""


class SeparationDetected(BirsError):
    """Logistic fit drove more than 1% of fitted probabilities to 0/1."""


class DegenerateVariance(BirsError):
    """Null fit produced zero-variance weights; bootstrap factor undefined."""


class EmptyRegion(BirsError):
    """A region argument is empty or outside the score vector."""


class EmptyInput(BirsError):
    """An input vector that must be non-empty is empty."""


class InconsistentBlocks(BirsError):
    """Block results disagree on bootstrap count or seed."""


class WindowsDontFit(BirsError):
    """Requested causal windows cannot be placed disjointly."""


class NoTruth(BirsError):
    """A truth-dependent metric was requested with no true regions."""


class ParseError(BirsError):
    """A data file is malformed.  Carries the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class VersionMismatch(BirsError):
    """Serialized payload carries an unsupported version tag."""


class CorruptPayload(BirsError):
    """Serialized payload failed checksum or structural validation."""
