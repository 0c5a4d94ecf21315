"""Baseband transmit-chain operations: Gray-coded QAM and CP-OFDM.

The chain is symbol-rate and noise free. Both discrete Fourier transforms
are unitary, so energy bookkeeping is symmetric between domains and the
input back-off scaling below stays a plain power ratio.

Gray mapping convention
-----------------------
Bits are split per symbol into an I group followed by a Q group (most
significant bits on I). Each group indexes a per-axis reflected Gray code
over the amplitude levels, ordered from the most positive level down, so
that for M=4 the single-bit rule is I = (1 - 2*b1)/sqrt(2) and
Q = (1 - 2*b0)/sqrt(2). Levels are {+-1}/sqrt(2), {+-1,+-3}/sqrt(10) and
{+-1,+-3,+-5,+-7}/sqrt(42) for M = 4, 16, 64, giving unit average energy
over the full constellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_bits, check_complex_signal, check_positive

_SUPPORTED_ORDERS = (4, 16, 64)
# Per-axis normalization for unit average constellation energy.
_AXIS_SCALE = {4: 1.0 / np.sqrt(2.0), 16: 1.0 / np.sqrt(10.0), 64: 1.0 / np.sqrt(42.0)}


@dataclass(frozen=True)
class QamConfig:
    """QAM constellation configuration.

    Attributes
    ----------
    order:
        Constellation size M, one of {4, 16, 64}.
    """

    order: int = 16

    def __post_init__(self):
        if self.order not in _SUPPORTED_ORDERS:
            raise ValueError(f"order must be one of {_SUPPORTED_ORDERS}, got {self.order}")

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))


@dataclass(frozen=True)
class OfdmConfig:
    """OFDM dimensioning.

    Attributes
    ----------
    n_fft:
        Transform size (power of two).
    n_active:
        Number of data subcarriers, centered around DC with DC unused,
        so n_active <= n_fft - 1.
    cp_len:
        Cyclic prefix length in samples, 0 <= cp_len <= n_fft.
    """

    n_fft: int = 1024
    n_active: int = 600
    cp_len: int = 128

    def __post_init__(self):
        if self.n_fft < 2 or (self.n_fft & (self.n_fft - 1)) != 0:
            raise ValueError(f"n_fft must be a power of two >= 2, got {self.n_fft}")
        if not 1 <= self.n_active <= self.n_fft - 1:
            raise ValueError(f"n_active must be in [1, n_fft - 1], got {self.n_active}")
        if not 0 <= self.cp_len <= self.n_fft:
            raise ValueError(f"cp_len must be in [0, n_fft], got {self.cp_len}")

    @property
    def symbol_len(self) -> int:
        """Time-domain length of one OFDM symbol including its prefix."""
        return self.n_fft + self.cp_len


@dataclass(frozen=True)
class SignalConfig:
    """Combined QAM + OFDM section as it appears in run configs."""

    qam_order: int = 16
    n_fft: int = 1024
    n_active: int = 600
    cp_len: int = 128

    def __post_init__(self):
        # Constructing the sub-configs runs their validation eagerly.
        self.qam
        self.ofdm

    @property
    def qam(self) -> QamConfig:
        return QamConfig(order=self.qam_order)

    @property
    def ofdm(self) -> OfdmConfig:
        return OfdmConfig(n_fft=self.n_fft, n_active=self.n_active, cp_len=self.cp_len)

    @property
    def bits_per_ofdm_symbol(self) -> int:
        return self.n_active * self.qam.bits_per_symbol


def _gray_axis_levels(bits_per_axis: int, scale: float) -> np.ndarray:
    """Amplitude level for each bit-group value of one axis.

    Level index i (0 = most positive) carries Gray code i ^ (i >> 1), so
    adjacent levels differ in exactly one bit. Returned array is indexed
    by the bit-group value.
    """
    n_levels = 1 << bits_per_axis
    levels = np.empty(n_levels, dtype=np.float64)
    for idx in range(n_levels):
        code = idx ^ (idx >> 1)
        levels[code] = (n_levels - 1 - 2 * idx) * scale
    return levels


def constellation(cfg: QamConfig) -> np.ndarray:
    """All M constellation points, indexed by the symbol's bit value.

    Bit value b interprets the symbol's bits MSB-first, I group first.
    """
    k = cfg.bits_per_symbol
    half = k // 2
    axis = _gray_axis_levels(half, _AXIS_SCALE[cfg.order])
    values = np.arange(cfg.order)
    i_val = axis[values >> half]
    q_val = axis[values & ((1 << half) - 1)]
    return i_val + 1j * q_val


def qam_map(bits, cfg: QamConfig) -> np.ndarray:
    """Map a bit sequence to Gray-coded QAM symbols of unit average energy.

    Parameters
    ----------
    bits:
        Flat sequence of 0/1, length divisible by log2(M).
    cfg:
        Constellation configuration.

    Returns
    -------
    Complex symbol array of length len(bits) / log2(M).
    """
    bits = check_bits(bits)
    k = cfg.bits_per_symbol
    if bits.size % k != 0:
        raise ValueError(f"bit count {bits.size} not divisible by log2(M) = {k}")
    groups = bits.reshape(-1, k)
    weights = 1 << np.arange(k - 1, -1, -1)
    values = groups @ weights
    return constellation(cfg)[values]


def qam_hard_demap(symbols, cfg: QamConfig) -> np.ndarray:
    """Nearest-neighbor hard decision back to bits.

    Decisions are made per axis at the midpoints between adjacent levels.
    A value landing exactly on a midpoint is resolved toward the adjacent
    level with the smaller bit value, i.e. the smaller constellation index.
    """
    symbols = check_complex_signal(np.asarray(symbols), "symbols")
    k = cfg.bits_per_symbol
    half = k // 2
    axis = _gray_axis_levels(half, _AXIS_SCALE[cfg.order])
    order = np.argsort(axis)                  # level values ascending
    sorted_levels = axis[order]
    thresholds = 0.5 * (sorted_levels[:-1] + sorted_levels[1:])

    def axis_bits(values: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(thresholds, values, side="left")
        if thresholds.size:
            tie = (pos < thresholds.size) & (values == thresholds.take(pos, mode="clip"))
            upper_smaller = order.take(pos + 1, mode="clip") < order.take(pos, mode="clip")
            pos = pos + (tie & upper_smaller)
        codes = order[pos]
        shifts = np.arange(half - 1, -1, -1)
        return (codes[:, None] >> shifts) & 1

    i_bits = axis_bits(symbols.real)
    q_bits = axis_bits(symbols.imag)
    return np.concatenate([i_bits, q_bits], axis=1).reshape(-1).astype(np.int64)


def active_bin_indices(cfg: OfdmConfig) -> np.ndarray:
    """FFT bin index of each data subcarrier, lowest frequency first.

    The n_active carriers are centered on DC with DC itself unused:
    floor(n_active/2) negative-frequency bins followed by the positive
    ones. Ordering defines the layout of the frequency-symbol vector.
    """
    n_neg = cfg.n_active // 2
    n_pos = cfg.n_active - n_neg
    return np.concatenate(
        [np.arange(cfg.n_fft - n_neg, cfg.n_fft), np.arange(1, n_pos + 1)]
    )


def ofdm_modulate(freq_symbols, cfg: OfdmConfig) -> np.ndarray:
    """OFDM-modulate frequency-domain symbols into a CP-OFDM time signal.

    Parameters
    ----------
    freq_symbols:
        Complex sequence whose length is a multiple of n_active; each
        block of n_active symbols produces one OFDM symbol.
    cfg:
        OFDM dimensioning.

    Returns
    -------
    Time-domain signal of length (n_fft + cp_len) per OFDM symbol. The
    inverse transform is unitary, so the symbol body preserves energy.
    """
    freq_symbols = check_complex_signal(np.asarray(freq_symbols), "freq_symbols")
    if freq_symbols.size == 0 or freq_symbols.size % cfg.n_active != 0:
        raise ValueError(
            f"freq_symbols length {freq_symbols.size} is not a positive multiple "
            f"of n_active = {cfg.n_active}"
        )
    blocks = freq_symbols.reshape(-1, cfg.n_active)
    spectrum = np.zeros((blocks.shape[0], cfg.n_fft), dtype=np.complex128)
    spectrum[:, active_bin_indices(cfg)] = blocks
    body = np.fft.ifft(spectrum, norm="ortho", axis=1)
    with_cp = np.concatenate([body[:, cfg.n_fft - cfg.cp_len:], body], axis=1)
    return with_cp.reshape(-1)


def ofdm_demodulate(signal, cfg: OfdmConfig) -> np.ndarray:
    """Strip cyclic prefixes and recover the active-bin symbols.

    Inverse of ofdm_modulate for an undistorted signal: the roundtrip
    reproduces the input within transform rounding (< 1e-12).
    """
    signal = check_complex_signal(np.asarray(signal), "signal")
    if signal.size == 0 or signal.size % cfg.symbol_len != 0:
        raise ValueError(
            f"signal length {signal.size} is not a positive multiple of "
            f"n_fft + cp_len = {cfg.symbol_len}"
        )
    frames = signal.reshape(-1, cfg.symbol_len)[:, cfg.cp_len:]
    spectrum = np.fft.fft(frames, norm="ortho", axis=1)
    return spectrum[:, active_bin_indices(cfg)].reshape(-1)


def average_power(signal) -> float:
    """Mean of |x_k|^2 over the signal, in watts."""
    signal = check_complex_signal(np.asarray(signal), "signal", allow_empty=False)
    return float(np.mean(np.abs(signal) ** 2))


def scale_to_ibo(signal, p1db_in: float, ibo_db: float) -> np.ndarray:
    """Scale a signal so its average power sits ibo_db below p1db_in.

    The scaling is a single positive real factor applied to every sample;
    the target average power is p1db_in / 10^(ibo_db / 10).
    """
    signal = check_complex_signal(np.asarray(signal), "signal", allow_empty=False)
    p1db_in = check_positive(p1db_in, "p1db_in")
    current = average_power(signal)
    if current == 0.0:
        raise ValueError("cannot scale a zero-power signal")
    target = p1db_in / 10.0 ** (float(ibo_db) / 10.0)
    return signal * np.sqrt(target / current)
