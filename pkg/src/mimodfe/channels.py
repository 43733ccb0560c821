"""ISI channel matrices (zero-padded Toeplitz and DMT) and noise."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, DimensionError

__all__ = ['Modulation', 'IsiChannel', 'toeplitz_matrix', 'dmt_matrix',
           'sample_channel', 'complex_noise', 'read_taps_file',
           'write_taps_file']


class Modulation(str, Enum):
    DMT = 'dmt'
    ZERO_PADDED = 'zeropad'


def _taps(taps):
    taps = np.atleast_1d(np.asarray(taps, dtype=complex))
    if taps.ndim != 1 or taps.size == 0:
        raise DimensionError("taps must be a non-empty vector")
    return taps


def toeplitz_matrix(taps, M):
    """Tall (M+L) x M convolution matrix, column j = taps delayed by j."""
    taps = _taps(taps)
    if M < 1:
        raise DimensionError(f"block size must be >= 1, got {M}")
    L = taps.size - 1
    H = np.zeros((M + L, M), dtype=complex)
    for j in range(M):
        H[j:j + L + 1, j] = taps
    return H


def dmt_matrix(taps, M):
    """Diagonal M x M DFT-domain channel of a cyclic-prefixed block."""
    taps = _taps(taps)
    if M < 1:
        raise DimensionError(f"block size must be >= 1, got {M}")
    if taps.size > M:
        raise ConfigurationError(f"{taps.size} taps exceed the DMT block "
                                 f"size {M}; cyclic prefix assumption fails")
    return np.diag(np.fft.fft(taps, n=M))


@dataclass(frozen=True)
class IsiChannel:
    taps: np.ndarray
    modulation: Modulation
    block_size: int

    @property
    def memory(self):
        return self.taps.size - 1

    @property
    def shape(self):
        if self.modulation is Modulation.DMT:
            return (self.block_size, self.block_size)
        return (self.block_size + self.memory, self.block_size)

    def matrix(self):
        if self.modulation is Modulation.DMT:
            return dmt_matrix(self.taps, self.block_size)
        return toeplitz_matrix(self.taps, self.block_size)


def sample_channel(rng, L, M, modulation=Modulation.DMT):
    """
    Draw an ISI channel with ``L + 1`` i.i.d. CN(0, 1/(L+1)) taps.

    The expected total tap energy is one.
    """
    if L < 0 or M < 1:
        raise DimensionError(f"need L >= 0 and M >= 1, got L={L}, M={M}")
    modulation = Modulation(modulation)
    scale = np.sqrt(0.5 / (L + 1))
    taps = scale * (rng.standard_normal(L + 1)
                    + 1j * rng.standard_normal(L + 1))
    return IsiChannel(taps=taps, modulation=modulation, block_size=M)


def complex_noise(rng, shape, variance=1.0):
    """Circularly-symmetric complex Gaussian samples."""
    scale = np.sqrt(0.5 * variance)
    return scale * (rng.standard_normal(shape)
                    + 1j * rng.standard_normal(shape))


def read_taps_file(path):
    """Parse per-user taps: ``re im`` per line, users split by blank lines."""
    users, current = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split('#', 1)[0].split()
            if not fields:
                if line.strip() == '' and current:
                    users.append(np.array(current, dtype=complex))
                    current = []
                continue
            if len(fields) == 1:
                fields.append('0')
            if len(fields) != 2:
                raise ConfigurationError(f"{path}:{lineno}: expected 're im'")
            current.append(complex(float(fields[0]), float(fields[1])))
    if current:
        users.append(np.array(current, dtype=complex))
    if not users:
        raise ConfigurationError(f"{path}: no taps found")
    return users


def write_taps_file(path, users):
    with open(path, 'w') as fh:
        blocks = []
        for taps in users:
            blocks.append("\n".join(f"{t.real:.17g} {t.imag:.17g}"
                                    for t in np.asarray(taps, dtype=complex)))
        fh.write('\n\n'.join(blocks) + '\n')
