import numpy as np
import pytest

from mimodfe.channels import complex_noise, sample_channel
from mimodfe.constellation import QPSK, by_name, qam
from mimodfe.designer import (ChannelSet, DesignResult, design_transceivers,
                              information_matrices)
from mimodfe.dfe import (build_receiver, detect, linear_mmse_detect,
                         linear_mmse_error_variances)
from mimodfe.errors import ConfigurationError, DimensionError


def random_system(rng, K=2, M=8, counts=(3, 3), info=18.0):
    cs = ChannelSet([sample_channel(rng, 3, M).matrix() for _ in range(K)])
    return cs, design_transceivers(cs, list(counts), info)


def transmit(rng, cs, design, blocks, noise=True, const=QPSK):
    m = const.bits_per_symbol
    bits = [rng.integers(0, 2, (n, blocks, m)) for n in design.stream_counts]
    x = [const.modulate(b) for b in bits]
    y = sum(H @ T @ xk for H, T, xk in zip(cs.matrices, design.precoders, x))
    if noise:
        y = y + complex_noise(rng, y.shape)
    return bits, x, y


class TestConstellation:

    def test_qpsk_gray_unit_energy(self):
        pts = QPSK.points * np.sqrt(2)
        np.testing.assert_allclose(pts, [1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])
        assert np.mean(np.abs(QPSK.points) ** 2) == pytest.approx(1.0)

    def test_tie_goes_to_smaller_label(self):
        assert QPSK.slice(0.3j) == 0
        assert QPSK.slice(-0.3 + 0j) == 2
        assert QPSK.slice(0j) == 0

    def test_16qam_gray(self):
        q = qam(16)
        assert np.mean(np.abs(q.points) ** 2) == pytest.approx(1.0)
        # Nearest neighbours differ in exactly one bit.
        d = np.abs(q.points[:, None] - q.points[None, :])
        dmin = np.min(d[d > 1e-9])
        for a, b in zip(*np.nonzero(np.isclose(d, dmin))):
            assert bin(a ^ b).count('1') == 1

    def test_bits_round_trip(self, rng):
        q = by_name('16qam')
        bits = rng.integers(0, 2, (50, 4))
        labels = q.slice(q.modulate(bits))
        np.testing.assert_array_equal(q.label_bits(labels), bits)

    def test_unknown(self):
        with pytest.raises(ConfigurationError):
            by_name('8psk')


class TestReceiver:

    def test_scalar(self):
        g = 0.7 - 1.1j
        cs = ChannelSet([[[g]]])
        design = DesignResult([np.array([[1.0]])], 1.0)
        rx = build_receiver(design, cs)
        J = 1 + abs(g) ** 2
        np.testing.assert_allclose(rx.feedforward[0], [[np.conj(g) / J]])
        np.testing.assert_array_equal(rx.feedback[0], [[0]])
        assert rx.error_variances[0] == pytest.approx([1 / J])

    def test_identity(self):
        cs = ChannelSet([np.eye(2)])
        rx = build_receiver(DesignResult([np.eye(2)], 2.0), cs)
        np.testing.assert_allclose(rx.feedback[0], 0, atol=1e-15)
        np.testing.assert_allclose(rx.error_variances[0], [0.5, 0.5])

    def test_structure(self, rng):
        cs, design = random_system(rng)
        rx = build_receiver(design, cs)
        _, Js = information_matrices(cs, design.precoders)
        for B, d, J in zip(rx.feedback, rx.diagonals, Js):
            W = B + np.eye(B.shape[0])
            assert np.allclose(np.tril(B), 0)
            E = W @ np.linalg.inv(J) @ W.conj().T
            np.testing.assert_allclose(E, np.diag(d ** -2.0), atol=1e-9)

    def test_predicted_mse_is_bound(self, rng):
        cs, design = random_system(rng)
        rx = build_receiver(design, cs)
        assert rx.predicted_mse == pytest.approx(design.mse_bound, rel=1e-7)
        for ev in rx.error_variances:
            assert np.ptp(ev) / ev.max() <= 1e-7

    def test_monte_carlo_error_power(self, rng):
        cs, design = random_system(rng, counts=(2, 3), info=12.0)
        rx = build_receiver(design, cs)
        _, x, y = transmit(rng, cs, design, 100_000)
        res = detect(rx, design, cs, y, QPSK, genie_symbols=x)
        err = np.concatenate([np.mean(np.abs(s - xk) ** 2, axis=1)
                              for s, xk in zip(res.soft, x)])
        assert np.mean(err) == pytest.approx(rx.predicted_mse, rel=0.02)

    def test_mismatch(self, rng):
        cs, design = random_system(rng)
        with pytest.raises(ConfigurationError):
            build_receiver(design, ChannelSet(cs.matrices[:1]))


class TestDetect:

    def test_noiseless_recovery(self, rng):
        for counts in [(3, 3), (1, 4), (4, 1)]:
            cs, design = random_system(rng, counts=counts, info=20.0)
            rx = build_receiver(design, cs)
            bits, x, y = transmit(rng, cs, design, 200, noise=False)
            res = detect(rx, design, cs, y, QPSK)
            for k in range(2):
                np.testing.assert_array_equal(res.symbols[k], x[k])
                np.testing.assert_array_equal(res.bits(QPSK)[k], bits[k])

    def test_single_block_shape(self, rng):
        cs, design = random_system(rng)
        rx = build_receiver(design, cs)
        _, x, y = transmit(rng, cs, design, 1, noise=False)
        res = detect(rx, design, cs, y[:, 0], QPSK)
        assert res.symbols[0].shape == (3,)
        np.testing.assert_array_equal(res.symbols[1], x[1][:, 0])

    def test_dimension_error(self, rng):
        cs, design = random_system(rng)
        rx = build_receiver(design, cs)
        with pytest.raises(DimensionError):
            detect(rx, design, cs, np.zeros(3), QPSK)

    def test_slicer_error_across_boundary(self):
        # Scalar user with T = 1: the feedforward output for x = (1+1j)/sqrt2
        # is x/2 plus filtered noise; noise of -1 on the real axis flips bit 0.
        cs = ChannelSet([[[1.0]]])
        design = DesignResult([np.array([[1.0]])], 1.0)
        rx = build_receiver(design, cs)
        x = QPSK.points[0]
        res = detect(rx, design, cs, np.array([x - 1.0]), QPSK)
        assert res.labels[0][0] == 2
        assert np.array_equal(QPSK.label_bits(res.labels[0][0]), [1, 0])

    def test_decisions_are_constellation_points(self, rng):
        cs, design = random_system(rng, info=6.0)
        rx = build_receiver(design, cs)
        _, _, y = transmit(rng, cs, design, 500)
        res = detect(rx, design, cs, y, QPSK)
        for s in res.symbols:
            assert np.all(np.min(np.abs(s[..., None] - QPSK.points), -1)
                          == 0)

    def test_genie_hand_example(self):
        rng = np.random.default_rng(5)
        cs = ChannelSet([[[1.0]], [[1.0]]])
        design = design_transceivers(cs, [1, 1], 2.0)
        rx = build_receiver(design, cs)
        np.testing.assert_allclose(np.concatenate(rx.error_variances),
                                   [0.5, 0.5])
        _, x, y = transmit(rng, cs, design, 100_000)
        res = detect(rx, design, cs, y, QPSK, genie_symbols=x)
        for s, xk in zip(res.soft, x):
            e = np.abs(s - xk).ravel() ** 2
            se = e.std() / np.sqrt(e.size)
            assert abs(e.mean() - 0.5) <= 3 * se


class TestLinear:

    def test_noiseless(self, rng):
        cs, design = random_system(rng, info=24.0)
        _, x, y = transmit(rng, cs, design, 100, noise=False)
        res = linear_mmse_detect(design, cs, y, QPSK)
        for s, xk in zip(res.symbols, x):
            np.testing.assert_array_equal(s, xk)

    def test_scalar_matches_dfe(self, rng):
        cs = ChannelSet([[[0.4 + 0.9j]]])
        design = design_transceivers(cs, [1], 1.5)
        rx = build_receiver(design, cs)
        _, _, y = transmit(rng, cs, design, 1000)
        a = detect(rx, design, cs, y, QPSK)
        b = linear_mmse_detect(design, cs, y, QPSK)
        np.testing.assert_allclose(a.soft[0], b.soft[0], atol=1e-12)
        np.testing.assert_array_equal(a.labels[0], b.labels[0])
        assert linear_mmse_error_variances(design, cs)[0] == pytest.approx(
            rx.error_variances[0])

    def test_worse_than_genie_dfe(self, rng):
        cs, design = random_system(rng, counts=(4, 4), info=24.0)
        rx = build_receiver(design, cs)
        _, x, y = transmit(rng, cs, design, 20_000)
        genie = detect(rx, design, cs, y, QPSK, genie_symbols=x)
        lin = linear_mmse_detect(design, cs, y, QPSK)

        def ser(res):
            wrong = sum(np.sum(s != xk) for s, xk in zip(res.symbols, x))
            return wrong / sum(xk.size for xk in x)

        assert ser(lin) >= ser(genie)


class TestZeroForcingLimit:

    def test_exact_inverse_when_separable(self, rng):
        # Zero-padded channels give a tall stacked channel with full rank.
        cs = ChannelSet([sample_channel(rng, 2, 6, 'zeropad').matrix()
                         for _ in range(2)])
        design = design_transceivers(cs, [3, 3], 3.0)
        rx = build_receiver(design, cs, noise_variance=0.0)
        for B in rx.feedback:
            assert np.allclose(np.tril(B), 0)
        _, x, y = transmit(rng, cs, design, 500, noise=False)
        res = detect(rx, design, cs, y, QPSK)
        for s, xk in zip(res.soft, x):
            np.testing.assert_allclose(s, xk, atol=1e-9)
        lin = linear_mmse_detect(design, cs, y, QPSK, noise_variance=0.0)
        for s, xk in zip(lin.soft, x):
            np.testing.assert_allclose(s, xk, atol=1e-9)

    def test_shared_dimension_rejected(self):
        cs = ChannelSet([[[1.0]], [[1.0]]])
        design = design_transceivers(cs, [1, 1], 2.0)
        with pytest.raises(ConfigurationError, match='zero-forcing'):
            build_receiver(design, cs, noise_variance=0.0)

    def test_other_noise_level(self, rng):
        cs, design = random_system(rng)
        rx = build_receiver(design, cs, noise_variance=0.25)
        _, xs, y = transmit(rng, cs, design, 50_000, noise=False)
        y = y + complex_noise(rng, y.shape, variance=0.25)
        res = detect(rx, design, cs, y, QPSK, genie_symbols=xs)
        err = np.concatenate([np.mean(np.abs(s - xk) ** 2, axis=1)
                              for s, xk in zip(res.soft, xs)])
        pred = np.concatenate(rx.error_variances)
        np.testing.assert_allclose(err, pred, rtol=0.05)
