"""
Closed-form joint precoder design for the multiple-access ISI MIMO channel.

Users are designed in index order ``k = 1..K``. User ``k`` sees thermal
noise plus the signals of users ``1..k-1`` (those are detected after it),
so user ``K`` is detected first by the successive-cancellation receiver.
Each user receives the share ``N_k / N`` of the sum information and is
loaded by inverse water-filling on the whitened channel
``H_k^H Sigma_k^{-1} H_k``. A unitary rotation from the geometric mean
decomposition then equalizes the per-symbol information inside the block.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigurationError, DomainError, FactorizationError
from .matdecomp import cholesky_upper, hermitian_eig, qrs_equal_diagonal
from .waterfill import inverse_waterfill

__all__ = ['ChannelSet', 'UserDesign', 'DesignResult', 'DeadStreamWarning',
           'Residual', 'design_transceivers', 'verify_design',
           'information_matrices', 'log2det']


class DeadStreamWarning(UserWarning):
    """Some configured streams received zero inverse water-filling power."""

    def __init__(self, dead):
        self.dead = dict(dead)
        listing = ', '.join(f"user {k + 1}: modes {v}"
                            for k, v in self.dead.items())
        super().__init__(f"zero-power eigenmodes ({listing})")


def log2det(a):
    sign, logdet = np.linalg.slogdet(a)
    if np.real(sign) <= 0:
        raise FactorizationError("determinant is not positive")
    return logdet / np.log(2.0)


@dataclass
class ChannelSet:
    """Per-user channel matrices sharing a receive space; identity noise."""
    matrices: list

    def __post_init__(self):
        self.matrices = [np.atleast_2d(np.asarray(H, dtype=complex))
                         for H in self.matrices]
        if not self.matrices:
            raise ConfigurationError("at least one user is required")
        rows = {H.shape[0] for H in self.matrices}
        if len(rows) != 1:
            raise ConfigurationError(f"channel matrices must share the row "
                                     f"dimension, got {sorted(rows)}")

    @property
    def num_users(self):
        return len(self.matrices)

    @property
    def rx_dim(self):
        return self.matrices[0].shape[0]

    @property
    def ranks(self):
        return [int(np.linalg.matrix_rank(H)) for H in self.matrices]

    def permuted(self, order):
        return ChannelSet([self.matrices[i] for i in order])


@dataclass
class UserDesign:
    """Recursion artifacts of one user."""
    precoder: np.ndarray
    sigma: np.ndarray
    info_matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    loadings: np.ndarray
    rotation: np.ndarray
    active_rank: int
    information: float

    @property
    def streams(self):
        return self.precoder.shape[1]

    @property
    def power(self):
        return float(np.real(np.vdot(self.precoder, self.precoder)))

    @property
    def dead_streams(self):
        return self.streams - self.active_rank


@dataclass
class DesignResult:
    precoders: list
    sum_information: float
    users: list = field(default_factory=list)

    @property
    def stream_counts(self):
        return [T.shape[1] for T in self.precoders]

    @property
    def total_streams(self):
        return sum(self.stream_counts)

    @property
    def powers(self):
        return [float(np.real(np.vdot(T, T))) for T in self.precoders]

    @property
    def total_power(self):
        return sum(self.powers)

    @property
    def mse_bound(self):
        return 2.0 ** (-self.sum_information / self.total_streams)

    @property
    def has_dead_streams(self):
        return any(u.dead_streams > 0 for u in self.users)


def _whiten(sigma, H):
    """Return ``C^{-H} H`` where ``sigma = C^H C``."""
    C = cholesky_upper(sigma)
    return solve_triangular(C, H, trans='C', lower=False)


def design_transceivers(channels, stream_counts, sum_information,
                        warn_dead=True):
    """
    Design all precoders for a fixed sum mutual information.

    Parameters
    ----------
    channels : ChannelSet
    stream_counts : sequence of int
        Pre-assigned number of streams ``N_k`` per user, ``N_k <= rank(H_k)``.
    sum_information : float
        Sum mutual information in bits.
    warn_dead : bool
        Emit a ``DeadStreamWarning`` when some ``N_k`` exceeds the active
        rank of its inverse water-filling solution.

    Returns
    -------
    DesignResult
    """
    if not isinstance(channels, ChannelSet):
        channels = ChannelSet(channels)
    counts = [int(n) for n in stream_counts]
    if len(counts) != channels.num_users:
        raise ConfigurationError(f"{len(counts)} stream counts for "
                                 f"{channels.num_users} users")
    if not sum_information > 0:
        raise DomainError(f"sum information must be > 0, got "
                          f"{sum_information}")
    ranks = channels.ranks
    for k, (n, L) in enumerate(zip(counts, ranks)):
        if not 1 <= n <= L:
            raise ConfigurationError(f"user {k + 1}: N_k={n} must lie in "
                                     f"[1, rank(H_k)={L}]")

    N = sum(counts)
    P = channels.rx_dim
    sigma = np.eye(P, dtype=complex)
    users, dead = [], {}
    for k, (H, n, L) in enumerate(zip(channels.matrices, counts, ranks)):
        info_k = n / N * sum_information
        G = _whiten(sigma, H)
        eig = hermitian_eig(G.conj().T @ G)
        lam = eig.eigenvalues[:L]
        wf = inverse_waterfill(lam, info_k, max_streams=n)
        if wf.active_rank < n:
            dead[k] = list(range(wf.active_rank + 1, n + 1))

        # Information matrix before rotation is diagonal: I + Gamma Lambda.
        root = np.sqrt(1.0 + wf.loadings * lam[:n])
        S = qrs_equal_diagonal(np.diag(root)).s
        T = (eig.eigenvectors[:, :n] * np.sqrt(wf.loadings)) @ S

        HT = H @ T
        WT = G @ T
        J = np.eye(n) + WT.conj().T @ WT
        users.append(UserDesign(precoder=T, sigma=sigma, info_matrix=J,
                                eigenvalues=eig.eigenvalues,
                                eigenvectors=eig.eigenvectors[:, :n],
                                loadings=wf.loadings, rotation=S,
                                active_rank=wf.active_rank,
                                information=info_k))
        sigma = sigma + HT @ HT.conj().T

    if dead and warn_dead:
        warnings.warn(DeadStreamWarning(dead), stacklevel=2)
    return DesignResult(precoders=[u.precoder for u in users],
                        sum_information=float(sum_information), users=users)


def information_matrices(channels, precoders):
    """Interference covariances ``Sigma_1..Sigma_{K+1}`` and matrices ``J_k``."""
    if len(precoders) != channels.num_users:
        raise ConfigurationError(f"{len(precoders)} precoders for "
                                 f"{channels.num_users} users")
    sigma = np.eye(channels.rx_dim, dtype=complex)
    sigmas, Js = [sigma], []
    for H, T in zip(channels.matrices, precoders):
        if H.shape[1] != T.shape[0]:
            raise ConfigurationError(f"precoder with {T.shape[0]} rows does "
                                     f"not fit a channel with {H.shape[1]} "
                                     f"inputs")
        HT = H @ T
        G = _whiten(sigma, HT)
        Js.append(np.eye(T.shape[1]) + G.conj().T @ G)
        sigma = sigma + HT @ HT.conj().T
        sigmas.append(sigma)
    return sigmas, Js


@dataclass(frozen=True)
class Residual:
    name: str
    value: float
    tolerance: float

    @property
    def ok(self):
        return bool(abs(self.value) <= self.tolerance)


def verify_design(result, channels, tolerance=1e-7):
    """
    Recompute the optimality conditions of a design from its precoders.

    Returned residuals, each flagged against ``tolerance``:

    - ``sum_information``: ``log2 det(Sigma_{K+1}) - I`` in bits
    - ``info_user_k``: ``log2 det(J_k) - (N_k/N) I`` in bits
    - ``geometric_sequence``: relative spread of
      ``(det Sigma_k / det Sigma_{k+1})^{1/N_k}`` over users
    - ``equal_diagonal_user_k``: relative spread of the Cholesky diagonal
      of ``J_k``
    - ``mse_gap``: relative excess of the average MSE over
      ``2^{-I'/N}``, where ``I'`` is the information the precoders actually
      achieve; the gap is never negative and vanishes only at the optimum
    """
    if not isinstance(channels, ChannelSet):
        channels = ChannelSet(channels)
    sigmas, Js = information_matrices(channels, result.precoders)
    counts = result.stream_counts
    N = sum(counts)
    total = result.sum_information
    out = []

    logdets = [log2det(s) for s in sigmas]
    out.append(Residual('sum_information', logdets[-1] - total, tolerance))

    ratios = []
    mse = 0.0
    for k, (J, n) in enumerate(zip(Js, counts)):
        out.append(Residual(f'info_user_{k + 1}',
                            log2det(J) - n / N * total, tolerance))
        ratios.append((logdets[k] - logdets[k + 1]) / n)
        d = np.real(np.diag(cholesky_upper(J)))
        out.append(Residual(f'equal_diagonal_user_{k + 1}',
                            (d.max() - d.min()) / d.max(), tolerance))
        mse += np.sum(d ** -2.0)
    ratios = 2.0 ** np.asarray(ratios)
    out.append(Residual('geometric_sequence',
                        (ratios.max() - ratios.min()) / ratios.max(),
                        tolerance))
    bound = 2.0 ** (-logdets[-1] / N)
    out.append(Residual('mse_gap', (mse / N - bound) / bound, tolerance))
    return out
