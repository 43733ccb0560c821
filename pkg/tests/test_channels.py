import numpy as np
import pytest

from mimodfe.channels import (Modulation, complex_noise,
                              dmt_matrix, read_taps_file, sample_channel,
                              toeplitz_matrix, write_taps_file)
from mimodfe.errors import ConfigurationError, DimensionError
from oracles import random_complex


def test_toeplitz_memoryless():
    np.testing.assert_array_equal(toeplitz_matrix([1.0], 3), np.eye(3))


def test_toeplitz_two_taps():
    np.testing.assert_array_equal(toeplitz_matrix([1, 1], 2),
                                  [[1, 0], [1, 1], [0, 1]])


def test_toeplitz_structure_and_energy(rng):
    taps = random_complex(rng, 4)
    H = toeplitz_matrix(taps, 8)
    assert H.shape == (11, 8)
    for j in range(8):
        col = np.zeros(11, dtype=complex)
        col[j:j + 4] = taps
        np.testing.assert_array_equal(H[:, j], col)
    assert np.sum(np.abs(H) ** 2) == pytest.approx(8 * np.sum(np.abs(taps) ** 2))


def test_toeplitz_block_size():
    with pytest.raises(DimensionError):
        toeplitz_matrix([1.0], 0)


def test_dmt_identity():
    np.testing.assert_array_equal(dmt_matrix([1.0], 5), np.eye(5))


def test_dmt_unit_delay():
    np.testing.assert_allclose(np.diag(dmt_matrix([0, 1], 4)),
                               [1, -1j, -1, 1j], atol=1e-15)


def test_dmt_direct_dft(rng):
    taps = random_complex(rng, 10)
    D = dmt_matrix(taps, 32)
    m = np.arange(32)
    direct = np.array([np.sum(taps * np.exp(-2j * np.pi * np.arange(10) * k
                                             / 32)) for k in m])
    np.testing.assert_allclose(np.diag(D), direct, atol=1e-12)
    assert np.count_nonzero(D - np.diag(np.diag(D))) == 0


def test_dmt_taps_too_long():
    with pytest.raises(ConfigurationError):
        dmt_matrix(np.ones(5), 4)


def test_dmt_matches_circulant_eigenvalues(rng):
    taps = random_complex(rng, 3)
    M = 8
    C = np.zeros((M, M), dtype=complex)
    for j in range(M):
        for l, t in enumerate(taps):
            C[(j + l) % M, j] = t
    F = np.fft.fft(np.eye(M)) / np.sqrt(M)
    np.testing.assert_allclose(F @ C @ F.conj().T, dmt_matrix(taps, M),
                               atol=1e-12)


def test_sample_is_deterministic():
    a = sample_channel(np.random.default_rng(7), 9, 32)
    b = sample_channel(np.random.default_rng(7), 9, 32)
    np.testing.assert_array_equal(a.taps, b.taps)
    assert a.shape == (32, 32)
    assert a.matrix().shape == (32, 32)


def test_zero_padded_shape():
    ch = sample_channel(np.random.default_rng(0), 3, 8, 'zeropad')
    assert ch.modulation is Modulation.ZERO_PADDED
    assert ch.shape == (11, 8) == ch.matrix().shape


def test_unit_expected_energy():
    rng = np.random.default_rng(1)
    energy = [np.sum(np.abs(sample_channel(rng, 9, 32).taps) ** 2)
              for _ in range(10_000)]
    assert np.mean(energy) == pytest.approx(1.0, rel=0.03)


def test_single_tap_is_exponential():
    rng = np.random.default_rng(2)
    p = np.array([abs(sample_channel(rng, 0, 1).taps[0]) ** 2
                  for _ in range(20_000)])
    # Exp(1): mean 1, second moment 2
    assert np.mean(p) == pytest.approx(1.0, rel=0.03)
    assert np.mean(p ** 2) == pytest.approx(2.0, rel=0.06)


def test_noise_variance():
    n = complex_noise(np.random.default_rng(3), (200_000,))
    assert np.mean(np.abs(n) ** 2) == pytest.approx(1.0, rel=0.01)
    assert abs(np.mean(n.real ** 2) - np.mean(n.imag ** 2)) < 0.01


def test_taps_file_round_trip(tmp_path, rng):
    users = [random_complex(rng, 3), random_complex(rng, 2)]
    path = tmp_path / 'taps.txt'
    write_taps_file(path, users)
    back = read_taps_file(path)
    assert len(back) == 2
    for a, b in zip(users, back):
        np.testing.assert_array_equal(a, b)


def test_taps_file_format(tmp_path):
    path = tmp_path / 'taps.txt'
    path.write_text("1 0\n0.5 -0.5\n\n\n0 1\n")
    users = read_taps_file(path)
    np.testing.assert_array_equal(users[0], [1, 0.5 - 0.5j])
    np.testing.assert_array_equal(users[1], [1j])
