"""Tests for QAM mapping, OFDM transforms, and power scaling."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nndpd.signal import (
    OfdmConfig,
    QamConfig,
    SignalConfig,
    active_bin_indices,
    average_power,
    constellation,
    ofdm_demodulate,
    ofdm_modulate,
    qam_hard_demap,
    qam_map,
    scale_to_ibo,
)

QAM_ORDERS = [4, 16, 64]
SQRT10 = np.sqrt(10.0)


class TestConstellation:
    """Validate constellation geometry and labeling."""

    @pytest.mark.parametrize("order", QAM_ORDERS)
    def test_unit_average_energy(self, order: int) -> None:
        """Verify every constellation has unit mean symbol energy."""
        points = constellation(QamConfig(order=order))
        assert points.shape == (order,)
        np.testing.assert_allclose(np.mean(np.abs(points) ** 2), 1.0, rtol=1e-12)

    @pytest.mark.parametrize("order", QAM_ORDERS)
    def test_gray_labeling_along_axes(self, order: int) -> None:
        """Verify horizontally adjacent points differ in exactly one bit."""
        points = constellation(QamConfig(order=order))
        bits_per_axis = int(np.log2(order)) // 2
        spacing = 2.0 / np.sqrt(2.0 / 3.0 * (order - 1))
        for i in range(order):
            for j in range(i + 1, order):
                delta = points[j] - points[i]
                if abs(delta.imag) < 1e-12 and abs(abs(delta.real) - spacing) < 1e-9:
                    assert bin(i ^ j).count("1") == 1
        assert bits_per_axis >= 1

    def test_16qam_corner_labels(self) -> None:
        """Verify the frozen 16-QAM bit-to-point assignments."""
        cfg = QamConfig(order=16)
        mapped = qam_map(np.array([0, 0, 0, 0, 1, 1, 1, 1, 1, 0, 1, 0, 0, 1, 0, 1]), cfg)
        expected = np.array([3 + 3j, -1 - 1j, -3 - 3j, 1 + 1j]) / SQRT10
        np.testing.assert_allclose(mapped, expected, rtol=0, atol=1e-15)

    def test_qpsk_labels(self) -> None:
        """Verify the frozen 4-QAM quadrant assignments."""
        cfg = QamConfig(order=4)
        mapped = qam_map(np.array([0, 0, 1, 0, 0, 1, 1, 1]), cfg)
        expected = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) / np.sqrt(2.0)
        np.testing.assert_allclose(mapped, expected, rtol=0, atol=1e-15)

    def test_invalid_order_rejected(self) -> None:
        """Verify unsupported QAM orders raise."""
        with pytest.raises(ValueError):
            QamConfig(order=32)


class TestQamMapDemap:
    """Validate the map/demap pair."""

    @pytest.mark.parametrize("order", QAM_ORDERS)
    def test_roundtrip_exact(self, order: int) -> None:
        """Verify demap inverts map on clean symbols."""
        cfg = QamConfig(order=order)
        rng = np.random.default_rng(5)
        bits = rng.integers(0, 2, size=120 * cfg.bits_per_symbol)
        np.testing.assert_array_equal(qam_hard_demap(qam_map(bits, cfg), cfg), bits)

    @pytest.mark.parametrize("order", QAM_ORDERS)
    def test_roundtrip_with_small_noise(self, order: int) -> None:
        """Verify nearest-neighbor decisions survive sub-threshold noise."""
        cfg = QamConfig(order=order)
        rng = np.random.default_rng(6)
        bits = rng.integers(0, 2, size=200 * cfg.bits_per_symbol)
        symbols = qam_map(bits, cfg)
        # Half the minimum distance is the decision radius; stay inside it.
        radius = 0.4 / np.sqrt(2.0 / 3.0 * (order - 1))
        noise = radius * (rng.uniform(-1, 1, symbols.size) + 1j * rng.uniform(-1, 1, symbols.size)) / np.sqrt(2)
        np.testing.assert_array_equal(qam_hard_demap(symbols + noise, cfg), bits)

    def test_tie_breaks_toward_smaller_constellation_index(self) -> None:
        """Verify exact midpoints resolve to the smaller symbol index."""
        cfg = QamConfig(order=16)
        # Midpoint between +3 (bits 00) and +1 (bits 01) on each axis.
        midpoint = np.array([(2.0 + 2.0j) / SQRT10])
        np.testing.assert_array_equal(qam_hard_demap(midpoint, cfg),
                                      np.array([0, 0, 0, 0]))
        # Axis zero sits between -1 (bits 11) and +1 (bits 01): 01 wins.
        np.testing.assert_array_equal(qam_hard_demap(np.array([0j]), cfg),
                                      np.array([0, 1, 0, 1]))

    def test_bit_length_must_divide(self) -> None:
        """Verify map rejects bit streams that do not fill symbols."""
        with pytest.raises(ValueError):
            qam_map(np.array([0, 1, 1]), QamConfig(order=16))

    @given(
        n_symbols=st.integers(min_value=1, max_value=64),
        order=st.sampled_from(QAM_ORDERS),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_roundtrip_property(self, n_symbols: int, order: int, seed: int) -> None:
        """Verify map/demap is the identity for any bit stream."""
        cfg = QamConfig(order=order)
        bits = np.random.default_rng(seed).integers(0, 2, size=n_symbols * cfg.bits_per_symbol)
        np.testing.assert_array_equal(qam_hard_demap(qam_map(bits, cfg), cfg), bits)


class TestActiveBins:
    """Validate the active-subcarrier layout."""

    def test_small_even_layout(self) -> None:
        """Verify the frozen bin order for n_fft=8, n_active=4."""
        idx = active_bin_indices(OfdmConfig(n_fft=8, n_active=4, cp_len=0))
        np.testing.assert_array_equal(idx, np.array([6, 7, 1, 2]))

    def test_small_odd_layout(self) -> None:
        """Verify odd active counts put the extra bin on the positive side."""
        idx = active_bin_indices(OfdmConfig(n_fft=8, n_active=5, cp_len=0))
        np.testing.assert_array_equal(idx, np.array([6, 7, 1, 2, 3]))

    def test_dc_and_guards_unused(self) -> None:
        """Verify DC is never an active bin at the default dimensions."""
        cfg = OfdmConfig()
        idx = active_bin_indices(cfg)
        assert idx.size == cfg.n_active
        assert 0 not in idx
        assert idx.size == np.unique(idx).size


class TestOfdm:
    """Validate the modulate/demodulate pair."""

    def test_roundtrip(self) -> None:
        """Verify demodulate(modulate(s)) recovers s to 1e-12."""
        cfg = OfdmConfig(n_fft=256, n_active=120, cp_len=32)
        rng = np.random.default_rng(7)
        symbols = rng.standard_normal(5 * cfg.n_active) + 1j * rng.standard_normal(5 * cfg.n_active)
        recovered = ofdm_demodulate(ofdm_modulate(symbols, cfg), cfg)
        assert np.max(np.abs(recovered - symbols)) < 1e-12

    def test_output_length(self) -> None:
        """Verify each OFDM symbol occupies n_fft + cp_len samples."""
        cfg = OfdmConfig(n_fft=64, n_active=24, cp_len=16)
        signal = ofdm_modulate(np.ones(3 * cfg.n_active, dtype=complex), cfg)
        assert signal.shape == (3 * (cfg.n_fft + cfg.cp_len),)

    def test_cyclic_prefix_copies_tail(self) -> None:
        """Verify the prefix equals the tail of each symbol body."""
        cfg = OfdmConfig(n_fft=64, n_active=24, cp_len=16)
        rng = np.random.default_rng(8)
        symbols = rng.standard_normal(2 * cfg.n_active) + 1j * rng.standard_normal(2 * cfg.n_active)
        signal = ofdm_modulate(symbols, cfg).reshape(2, cfg.n_fft + cfg.cp_len)
        for row in signal:
            np.testing.assert_array_equal(row[:cfg.cp_len], row[cfg.n_fft:])

    def test_unitary_energy(self) -> None:
        """Verify the transform preserves energy between domains."""
        cfg = OfdmConfig(n_fft=128, n_active=50, cp_len=0)
        rng = np.random.default_rng(9)
        symbols = rng.standard_normal(cfg.n_active) + 1j * rng.standard_normal(cfg.n_active)
        body = ofdm_modulate(symbols, cfg)
        np.testing.assert_allclose(np.sum(np.abs(body) ** 2),
                                   np.sum(np.abs(symbols) ** 2), rtol=1e-12)

    def test_length_must_fill_symbols(self) -> None:
        """Verify partial OFDM symbols are rejected."""
        cfg = OfdmConfig(n_fft=64, n_active=24, cp_len=16)
        with pytest.raises(ValueError):
            ofdm_modulate(np.ones(25, dtype=complex), cfg)


class TestPowerScaling:
    """Validate average power and IBO scaling."""

    def test_average_power(self) -> None:
        """Verify mean-square amplitude on a hand-checked signal."""
        assert average_power(np.array([1.0 + 0j, 0.0 + 1j, 1 + 1j])) == pytest.approx(4.0 / 3.0)

    def test_scale_to_ibo_hits_target_power(self) -> None:
        """Verify the scaled signal lands exactly IBO dB below P1dB."""
        rng = np.random.default_rng(10)
        x = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
        p1db = 0.0045514294877457382
        for ibo in (0.0, 3.0, 9.5):
            scaled = scale_to_ibo(x, p1db, ibo)
            np.testing.assert_allclose(average_power(scaled),
                                       p1db / 10.0 ** (ibo / 10.0), rtol=1e-12)

    def test_scale_is_single_positive_real_factor(self) -> None:
        """Verify scaling multiplies by one positive real constant."""
        rng = np.random.default_rng(11)
        x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        scaled = scale_to_ibo(x, 1.0, 6.0)
        ratio = scaled / x
        np.testing.assert_allclose(ratio.imag, 0.0, atol=1e-15)
        np.testing.assert_allclose(ratio.real, ratio.real[0], rtol=1e-12)
        assert ratio.real[0] > 0

    def test_zero_signal_rejected(self) -> None:
        """Verify an all-zero signal cannot be power-scaled."""
        with pytest.raises(ValueError):
            scale_to_ibo(np.zeros(8, dtype=complex), 1.0, 0.0)


class TestSignalConfig:
    """Validate the combined signal configuration."""

    def test_defaults(self) -> None:
        """Verify the default dimensions."""
        cfg = SignalConfig()
        assert (cfg.qam_order, cfg.n_fft, cfg.n_active, cfg.cp_len) == (16, 1024, 600, 128)
        assert cfg.bits_per_ofdm_symbol == 600 * 4

    def test_validation(self) -> None:
        """Verify bad dimensions are rejected."""
        with pytest.raises(ValueError):
            SignalConfig(n_fft=1000)
        with pytest.raises(ValueError):
            SignalConfig(n_active=1024)
        with pytest.raises(ValueError):
            SignalConfig(cp_len=-1)
