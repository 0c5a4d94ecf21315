"""EVM measurement and the EVM-versus-IBO sweep harness.

EVM is data-aided and computed in the frequency domain: received active
bins are divided by the nominal PA gain and compared against the
transmitted constellation points. Values are reported in dB
(10*log10 of the error-to-signal power ratio). When the error ratio
falls below the measurement floor the value is clamped to the floor
marker EVM_FLOOR_DB and flagged, so downstream readers can tell a real
measurement from "nothing measurable left".

Gain removal is a fixed division by the nominal gain, never an adaptive
fit: a fitted complex scalar would absorb the very amplitude and phase
distortion the predistorter is supposed to remove.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dpd import DpdModel, predistort
from .errors import ConfigError
from .pa import RappParams, apply_ideal_limiter, apply_pa, p1db_input
from .signal import (
    SignalConfig,
    ofdm_demodulate,
    ofdm_modulate,
    qam_map,
    scale_to_ibo,
)
from .validation import check_complex_signal, check_positive

EVM_FLOOR_DB = -150.0
"""Marker value written when the EVM ratio is below the numeric floor."""

_FLOOR_RATIO = 1e-15

CHAIN_NO_DPD = "no_dpd"
CHAIN_DPD = "dpd"
CHAIN_LIMIT = "limit"
CHAINS = (CHAIN_NO_DPD, CHAIN_DPD, CHAIN_LIMIT)

_CHAIN_FLAG_BIT = {CHAIN_NO_DPD: 1, CHAIN_DPD: 2, CHAIN_LIMIT: 4}

CSV_HEADER = "ibo_db,evm_db_no_dpd,evm_db_dpd,evm_db_limit,floor_flags"


def evm_db(reference, received, gain: float) -> float:
    """Error vector magnitude in dB of received against reference.

    The received samples are divided by `gain` before comparison, so a
    distortion-free chain with flat gain lands on the floor. Ratios
    below 1e-15 return exactly EVM_FLOOR_DB.
    """
    ref = check_complex_signal(np.asarray(reference), "reference", allow_empty=False)
    rec = check_complex_signal(np.asarray(received), "received", allow_empty=False)
    if ref.size != rec.size:
        raise ValueError(f"reference and received lengths differ: {ref.size} vs {rec.size}")
    gain = check_positive(gain, "gain")
    err = rec / gain - ref
    signal_power = float(np.real(np.vdot(ref, ref)))
    if signal_power == 0.0:
        raise ValueError("reference signal has zero power; EVM is undefined")
    ratio = float(np.real(np.vdot(err, err))) / signal_power
    if ratio < _FLOOR_RATIO:
        return EVM_FLOOR_DB
    return 10.0 * math.log10(ratio)


def run_chain(chain_kind: str, ibo_db: float, pa: RappParams,
              dpd_model: Optional[DpdModel], sig_cfg: SignalConfig,
              seed, n_symbols: int = 200) -> float:
    """EVM of one transmit chain at one operating point.

    Chains: "no_dpd" drives the PA directly, "dpd" predistorts first
    (dpd_model required), "limit" replaces the PA with the ideal
    limiter bound. The transmitted waveform is scaled so its mean power
    sits ibo_db below the PA 1 dB compression point; the reference is
    the demodulation of that scaled waveform, so the comparison
    isolates the nonlinearity. `seed` feeds numpy's default_rng (an int
    or a SeedSequence), and equal seeds give equal transmitted symbols
    in every chain.
    """
    if chain_kind not in CHAINS:
        raise ConfigError(f"unknown chain kind {chain_kind!r}; expected one of {CHAINS}")
    if chain_kind == CHAIN_DPD and dpd_model is None:
        raise ConfigError("chain 'dpd' requires a predistorter model, got None")
    if n_symbols < 1:
        raise ValueError(f"n_symbols must be >= 1, got {n_symbols}")

    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=n_symbols * sig_cfg.bits_per_ofdm_symbol)
    tx = ofdm_modulate(qam_map(bits, sig_cfg.qam), sig_cfg.ofdm)
    tx = scale_to_ibo(tx, p1db_input(pa), float(ibo_db))
    reference = ofdm_demodulate(tx, sig_cfg.ofdm)

    if chain_kind == CHAIN_LIMIT:
        received_time = apply_ideal_limiter(tx, pa)
    elif chain_kind == CHAIN_DPD:
        received_time = apply_pa(predistort(tx, dpd_model.amam, dpd_model.ampm), pa)
    else:
        received_time = apply_pa(tx, pa)

    received = ofdm_demodulate(received_time, sig_cfg.ofdm)
    return evm_db(reference, received, pa.g)


@dataclass(frozen=True)
class SweepConfig:
    """Operating grid and evaluation settings for an EVM sweep."""

    ibo_grid: tuple[float, ...] = tuple(float(v) for v in range(13))
    n_eval_symbols: int = 200
    seed: int = 0
    chains: tuple[str, ...] = CHAINS

    def __post_init__(self):
        grid = tuple(float(v) for v in self.ibo_grid)
        if len(grid) == 0:
            raise ConfigError("ibo_grid must not be empty")
        if not all(np.isfinite(grid)):
            raise ConfigError("ibo_grid must be finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"ibo_grid must be strictly increasing, got {grid}")
        object.__setattr__(self, "ibo_grid", grid)
        if self.n_eval_symbols < 1:
            raise ConfigError(f"n_eval_symbols must be >= 1, got {self.n_eval_symbols}")
        chains = tuple(self.chains)
        if len(chains) == 0:
            raise ConfigError("chains must not be empty")
        for chain in chains:
            if chain not in CHAINS:
                raise ConfigError(f"unknown chain kind {chain!r}; expected one of {CHAINS}")
        if len(set(chains)) != len(chains):
            raise ConfigError(f"chains contains duplicates: {chains}")
        # Canonical column order keeps the CSV layout independent of
        # the order the caller listed the chains in.
        object.__setattr__(self, "chains", tuple(c for c in CHAINS if c in chains))


@dataclass(frozen=True)
class SweepResult:
    """EVM per grid point per chain, plus provenance metadata.

    evm maps chain kind to a vector aligned with ibo_grid; chains that
    were not run are absent. floor_flags is a per-point bitmask of
    chains whose EVM sat below the measurement floor (1 = no_dpd,
    2 = dpd, 4 = limit). The metadata fields (seed, digests, tool
    version) identify the run; digests are attached by the caller that
    knows the config and model files.
    """

    ibo_grid: tuple[float, ...]
    evm: dict[str, np.ndarray]
    floor_flags: np.ndarray
    seed: int = 0
    tool_version: str = ""
    config_digest: str = ""
    model_digest: str = ""

    def to_csv_text(self) -> str:
        """Render the fixed-layout CSV (see write_csv)."""
        out = io.StringIO()
        out.write(f"# nndpd {self.tool_version} config_digest={self.config_digest}\n")
        out.write(CSV_HEADER + "\n")
        for i, ibo in enumerate(self.ibo_grid):
            cells = [_format_sig(ibo)]
            for chain in CHAINS:
                values = self.evm.get(chain)
                cells.append("" if values is None else _format_sig(float(values[i])))
            cells.append(str(int(self.floor_flags[i])))
            out.write(",".join(cells) + "\n")
        return out.getvalue()

    def write_csv(self, path) -> None:
        """Write the sweep as CSV: one comment line with tool version
        and config digest, the fixed header, then one row per grid
        point with values at 6 significant digits. Chains that were not
        run leave their column empty.
        """
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv_text())


def _format_sig(value: float) -> str:
    """Format with 6 significant digits, stable across runs."""
    return f"{value:.6g}"


def sweep(sweep_cfg: SweepConfig, pa: RappParams, dpd_model: Optional[DpdModel],
          sig_cfg: SignalConfig) -> SweepResult:
    """Run the configured chains over the IBO grid.

    Every grid point gets its own seed derived from (master seed, grid
    index), and all chains at a point share that seed, so they see the
    same transmitted waveform and comparisons across chains are paired.
    Points are independent read-only evaluations; this implementation
    runs them sequentially in grid order. Failures are re-raised with
    the grid point attached.
    """
    if CHAIN_DPD in sweep_cfg.chains and dpd_model is None:
        raise ConfigError("sweep includes chain 'dpd' but no predistorter model was given")
    grid = sweep_cfg.ibo_grid
    evm: dict[str, np.ndarray] = {c: np.empty(len(grid)) for c in sweep_cfg.chains}
    flags = np.zeros(len(grid), dtype=np.int64)
    for i, ibo in enumerate(grid):
        for chain in sweep_cfg.chains:
            point_seed = np.random.SeedSequence((sweep_cfg.seed, i))
            try:
                value = run_chain(chain, ibo, pa, dpd_model, sig_cfg, point_seed,
                                  n_symbols=sweep_cfg.n_eval_symbols)
            except (ValueError, ArithmeticError) as exc:
                raise type(exc)(
                    f"sweep failed at grid point {i} (ibo_db={ibo}), chain {chain!r}: {exc}"
                ) from exc
            evm[chain][i] = value
            if value == EVM_FLOOR_DB:
                flags[i] |= _CHAIN_FLAG_BIT[chain]
    return SweepResult(ibo_grid=grid, evm=evm, floor_flags=flags, seed=sweep_cfg.seed)
