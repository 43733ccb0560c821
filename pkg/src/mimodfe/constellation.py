"""Gray-mapped square QAM with unit average symbol energy."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = ['Constellation', 'qam', 'QPSK']


def _gray_pam(bits):
    # Index i holds the level for label i; the most positive level has
    # label 0 so a 1-bit axis maps b -> 1 - 2b.
    L = 2 ** bits
    levels = np.empty(L)
    for i in range(L):
        levels[i ^ (i >> 1)] = L - 1 - 2 * i
    return levels


@dataclass(frozen=True)
class Constellation:
    """``points[label]``; labels read MSB first from the bit groups."""
    name: str
    points: np.ndarray

    @property
    def bits_per_symbol(self):
        return int(np.log2(self.points.size))

    def label_bits(self, labels):
        m = self.bits_per_symbol
        shifts = np.arange(m - 1, -1, -1)
        return (np.asarray(labels)[..., None] >> shifts) & 1

    def bits_to_labels(self, bits):
        bits = np.asarray(bits)
        m = self.bits_per_symbol
        if bits.shape[-1] != m:
            raise ConfigurationError(f"last axis must hold {m} bits")
        weights = 1 << np.arange(m - 1, -1, -1)
        return bits @ weights

    def modulate(self, bits):
        """Map bits of shape ``(..., m)`` to symbols of shape ``(...)``."""
        return self.points[self.bits_to_labels(bits)]

    def slice(self, z):
        """
        Nearest-point labels. Exact ties go to the smaller label, i.e. the
        lexicographically smaller bit pattern.
        """
        z = np.asarray(z)
        dist = np.abs(z[..., None] - self.points) ** 2
        return np.argmin(dist, axis=-1)

    def decide(self, z):
        return self.points[self.slice(z)]


def qam(order):
    if order < 4 or order & (order - 1) or int(np.log2(order)) % 2:
        raise ConfigurationError(f"square QAM needs order 4^n, got {order}")
    half = int(np.log2(order)) // 2
    pam = _gray_pam(half)
    labels = np.arange(order)
    pts = pam[labels >> half] + 1j * pam[labels & ((1 << half) - 1)]
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    name = 'qpsk' if order == 4 else f'{order}qam'
    return Constellation(name=name, points=pts)


QPSK = qam(4)


def by_name(name):
    name = name.lower()
    if name == 'qpsk':
        return QPSK
    if name.endswith('qam') and name[:-3].isdigit():
        return qam(int(name[:-3]))
    raise ConfigurationError(f"unknown constellation {name!r}")
