"""
MMSE decision-feedback receiver with successive cancellation across users.

With ``J_k = C_k^H C_k`` (upper Cholesky) and ``D_k = diag(C_k)`` the
receiver of user ``k`` is

    W_k = D_k^{-1} C_k,   B_k = W_k - I,
    F_k = D_k^{-1} C_k^{-H} (H_k T_k)^H Sigma_k^{-1},

whose error ``W_k x_k - F_k y_k`` has covariance ``D_k^{-2}``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .designer import ChannelSet, information_matrices
from .errors import ConfigurationError, DimensionError
from .matdecomp import cholesky_upper

__all__ = ['DfeReceiver', 'DetectionResult', 'build_receiver', 'detect',
           'linear_mmse_detect', 'linear_mmse_error_variances']


@dataclass
class DfeReceiver:
    feedforward: list
    feedback: list
    diagonals: list
    effective_channels: list

    @property
    def error_variances(self):
        return [d ** -2.0 for d in self.diagonals]

    @property
    def predicted_mse(self):
        """Average per-symbol error power over all users."""
        ev = np.concatenate(self.error_variances)
        return float(np.mean(ev))


@dataclass
class DetectionResult:
    symbols: list
    labels: list
    soft: list

    def bits(self, constellation):
        return [constellation.label_bits(lab) for lab in self.labels]


def _channels(channels):
    return channels if isinstance(channels, ChannelSet) else ChannelSet(channels)


def build_receiver(design, channels, noise_variance=1.0):
    """
    Feedforward and feedback filters for every user of ``design``.

    ``noise_variance`` is the per-dimension noise power the filters assume.
    At 0 the zero-forcing limit is returned; it needs the stacked effective
    channel ``[H_1 T_1, ..., H_K T_K]`` to have full column rank.
    """
    channels = _channels(channels)
    if len(design.precoders) != channels.num_users:
        raise ConfigurationError(f"{len(design.precoders)} precoders for "
                                 f"{channels.num_users} users")
    if noise_variance < 0:
        raise ConfigurationError("noise_variance must be >= 0")
    if noise_variance == 0:
        return _zero_forcing_receiver(design, channels)
    if noise_variance == 1.0:
        _, Js = information_matrices(channels, design.precoders)
    else:
        Js = None
    ff, fb, diags, eff = [], [], [], []
    sigma = noise_variance * np.eye(channels.rx_dim, dtype=complex)
    for k, (H, T) in enumerate(zip(channels.matrices, design.precoders)):
        G = H @ T
        Cs = cholesky_upper(sigma)
        SiG = cho_solve((Cs, False), G)
        J = Js[k] if Js is not None else np.eye(T.shape[1]) + G.conj().T @ SiG
        C = cholesky_upper(J)
        d = np.real(np.diag(C))
        W = C / d[:, None]
        # C^{-H} G^H Sigma^{-1} without forming an inverse.
        F = solve_triangular(C, SiG.conj().T, trans='C', lower=False)
        ff.append(F / d[:, None])
        fb.append(np.triu(W, 1))
        diags.append(d)
        eff.append(G)
        sigma = sigma + G @ G.conj().T
    return DfeReceiver(feedforward=ff, feedback=fb, diagonals=diags,
                       effective_channels=eff)


def _zero_forcing_receiver(design, channels):
    eff = [H @ T for H, T in zip(channels.matrices, design.precoders)]
    G = np.hstack(eff)
    if G.shape[1] > G.shape[0] or np.linalg.matrix_rank(G) < G.shape[1]:
        raise ConfigurationError(
            f"zero-forcing needs a full column rank effective channel; "
            f"{G.shape[1]} streams over {G.shape[0]} receive dimensions")
    Q, R = np.linalg.qr(G)
    # Column j of Q is orthogonal to all earlier columns of G, so user k's
    # block nulls users 1..k-1 and leaves an upper-triangular user k term.
    ff, fb, diags = [], [], []
    start = 0
    for n in design.stream_counts:
        sl = slice(start, start + n)
        Rk = R[sl, sl]
        dk = np.diag(Rk)
        ff.append(Q[:, sl].conj().T / dk[:, None])
        fb.append(np.triu(Rk / dk[:, None], 1))
        diags.append(np.full(n, np.inf))
        start += n
    return DfeReceiver(feedforward=ff, feedback=fb, diagonals=diags,
                       effective_channels=eff)


def _as_columns(received, rows):
    y = np.asarray(received, dtype=complex)
    single = y.ndim == 1
    if single:
        y = y[:, None]
    if y.ndim != 2 or y.shape[0] != rows:
        raise DimensionError(f"received signal must have {rows} rows, got "
                             f"shape {np.shape(received)}")
    return y, single


def detect(receiver, design, channels, received, constellation,
           genie_symbols=None):
    """
    Successive-cancellation MMSE-DFE detection.

    Users are detected from ``K`` down to 1. Inside a user the symbols are
    decided from the last index to the first, each after subtracting the
    feedback of the symbols already decided.

    Parameters
    ----------
    received : array_like, shape (P,) or (P, B)
        One received block per column.
    genie_symbols : list of arrays, optional
        True transmitted symbols. When given they are fed back instead of
        the decisions, both inside a user and across users.

    Returns
    -------
    DetectionResult
        Lists are indexed by user; arrays have shape ``(N_k, B)`` (or
        ``(N_k,)`` for a single block).
    """
    channels = _channels(channels)
    K = channels.num_users
    if len(receiver.feedforward) != K or len(design.precoders) != K:
        raise ConfigurationError("receiver, design and channels disagree on "
                                 "the number of users")
    y, single = _as_columns(received, channels.rx_dim)
    if genie_symbols is not None:
        genie_symbols = [np.asarray(x).reshape(x.shape[0], -1)
                         for x in genie_symbols]

    resid = y.copy()
    symbols, labels, soft = [None] * K, [None] * K, [None] * K
    for k in range(K - 1, -1, -1):
        F, Bk = receiver.feedforward[k], receiver.feedback[k]
        n = F.shape[0]
        z = F @ resid
        xs = np.empty_like(z)
        lab = np.empty(z.shape, dtype=np.int64)
        est = np.empty_like(z)
        ref = xs if genie_symbols is None else genie_symbols[k]
        for j in range(n - 1, -1, -1):
            est[j] = z[j] - Bk[j, j + 1:] @ ref[j + 1:]
            lab[j] = constellation.slice(est[j])
            xs[j] = constellation.points[lab[j]]
        resid = resid - receiver.effective_channels[k] @ ref
        symbols[k], labels[k], soft[k] = xs, lab, est

    if single:
        symbols = [x[:, 0] for x in symbols]
        labels = [x[:, 0] for x in labels]
        soft = [x[:, 0] for x in soft]
    return DetectionResult(symbols=symbols, labels=labels, soft=soft)


def _stacked(design, channels):
    return np.hstack([H @ T for H, T in zip(channels.matrices,
                                             design.precoders)])


def linear_mmse_error_variances(design, channels):
    """Per-user diagonal of ``(I + G^H G)^{-1}`` for the stacked system."""
    channels = _channels(channels)
    G = _stacked(design, channels)
    E = np.linalg.inv(np.eye(G.shape[1]) + G.conj().T @ G)
    ev = np.real(np.diag(E))
    return np.split(ev, np.cumsum(design.stream_counts)[:-1])


def linear_mmse_detect(design, channels, received, constellation,
                       noise_variance=1.0):
    """
    Joint linear MMSE estimate of all users' symbols, then slicing.

    With ``noise_variance=0`` this is the least-squares (zero-forcing)
    estimate.
    """
    channels = _channels(channels)
    if len(design.precoders) != channels.num_users:
        raise ConfigurationError("design and channels disagree on the number "
                                 "of users")
    y, single = _as_columns(received, channels.rx_dim)
    G = _stacked(design, channels)
    C = cholesky_upper(noise_variance * np.eye(G.shape[1])
                       + G.conj().T @ G)
    xhat = cho_solve((C, False), G.conj().T @ y)
    parts = np.split(xhat, np.cumsum(design.stream_counts)[:-1], axis=0)
    labels = [constellation.slice(p) for p in parts]
    symbols = [constellation.points[lab] for lab in labels]
    if single:
        symbols = [x[:, 0] for x in symbols]
        labels = [x[:, 0] for x in labels]
        parts = [x[:, 0] for x in parts]
    return DetectionResult(symbols=symbols, labels=labels, soft=parts)
