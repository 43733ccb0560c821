"""Exception types raised across the package."""

import numpy as np


class DimensionError(ValueError):
    """Array shapes are incompatible with the requested operation."""


class DomainError(ValueError):
    """A numeric argument lies outside the admissible domain."""


class ConfigurationError(ValueError):
    """A design or simulation configuration cannot be honoured."""


class FactorizationError(np.linalg.LinAlgError):
    """A factorization failed, e.g. a non positive-definite pivot."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class RankError(np.linalg.LinAlgError):
    """Input matrix is numerically rank deficient."""

    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank
