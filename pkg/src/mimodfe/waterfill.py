"""Inverse water-filling: least transmit power for a fixed mutual information."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError

__all__ = ['InverseWaterfillResult', 'inverse_waterfill', 'natural_rank']

# An eigenmode is admitted only if it clears the threshold by this margin.
STRICT_MARGIN = 1e-12


@dataclass(frozen=True)
class InverseWaterfillResult:
    """Loadings ``gamma`` (length ``cap``, zero beyond ``active_rank``)."""
    active_rank: int
    loadings: np.ndarray
    achieved_information: float
    water_level: float

    @property
    def active_loadings(self):
        return self.loadings[:self.active_rank]

    @property
    def power(self):
        return float(np.sum(self.loadings))


def _check_eigenvalues(eigenvalues):
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise DimensionError("eigenvalues must be a non-empty vector")
    if not np.all(lam > 0):
        raise DomainError("eigenvalues must be strictly positive")
    if np.any(np.diff(lam) > 0):
        raise DomainError("eigenvalues must be sorted non-increasing")
    return lam


def _log2_threshold(log2_lam, information, r):
    # log2 of (prod_{i<=r} lam_i / 2^I)^(1/r)
    return (np.sum(log2_lam[:r]) - information) / r


def natural_rank(eigenvalues, information):
    """Largest ``r`` with ``lam_r > (prod_{i<=r} lam_i / 2^I)^(1/r)``.

    Returns 0 when no eigenmode qualifies (cannot happen for ``I > 0``).
    """
    lam = _check_eigenvalues(eigenvalues)
    log2_lam = np.log2(lam)
    for r in range(lam.size, 0, -1):
        threshold = 2.0 ** _log2_threshold(log2_lam, information, r)
        if lam[r - 1] > threshold * (1.0 + STRICT_MARGIN):
            return r
    return 0


def inverse_waterfill(eigenvalues, information, max_streams=None):
    """
    Minimise ``sum(gamma)`` subject to ``sum(log2(1 + gamma*lam)) = I``.

    Parameters
    ----------
    eigenvalues : array_like
        Positive channel eigenvalues in non-increasing order.
    information : float
        Target mutual information in bits, strictly positive.
    max_streams : int, optional
        Number of streams ``N``; loadings are computed over
        ``min(N, natural rank)`` modes and zero-padded to length ``N``.
        Defaults to ``len(eigenvalues)``.

    Returns
    -------
    InverseWaterfillResult
    """
    lam = _check_eigenvalues(eigenvalues)
    if not information > 0:
        raise DomainError(f"information must be > 0 bits, got {information}")
    cap = lam.size if max_streams is None else int(max_streams)
    if not 1 <= cap <= lam.size:
        raise DimensionError(f"max_streams must lie in [1, {lam.size}], "
                             f"got {cap}")

    r = min(cap, natural_rank(lam, information))
    if r == 0:
        raise DomainError(f"information {information} too small to load any "
                          f"eigenmode")
    log2_lam = np.log2(lam)
    level = 2.0 ** (-_log2_threshold(log2_lam, information, r))
    loadings = np.zeros(cap)
    loadings[:r] = level - 1.0 / lam[:r]
    achieved = float(np.sum(np.log2(1.0 + loadings * lam[:cap])))
    return InverseWaterfillResult(active_rank=r, loadings=loadings,
                                  achieved_information=achieved,
                                  water_level=float(level))
