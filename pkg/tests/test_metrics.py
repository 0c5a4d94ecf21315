"""Tests for EVM computation, chain simulation, and the IBO sweep."""

import math

import numpy as np
import pytest

from nndpd.dpd import AmAmDpdParams, AmPmDpdParams, DpdModel
from nndpd.errors import ConfigError
from nndpd.metrics import (
    CHAIN_DPD,
    CHAIN_LIMIT,
    CHAIN_NO_DPD,
    CHAINS,
    CSV_HEADER,
    EVM_FLOOR_DB,
    SweepConfig,
    SweepResult,
    evm_db,
    run_chain,
    sweep,
)
from nndpd.pa import RappParams
from nndpd.signal import SignalConfig

GAIN = 16.0
# Closed-form EVM of a pure phase rotation theta: 20*log10(2*sin(theta/2)).
ROTATION_01_RAD_EVM_DB = -20.0036194223238
ROTATION_005_RAD_EVM_DB = -26.02150471230059


def reference_symbols(n: int = 256, seed: int = 3) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def identity_model(n_amplitude: int = 8, n_phase: int = 4) -> DpdModel:
    """A predistorter that passes signals through unchanged."""
    amam = AmAmDpdParams(
        alpha=10.0, omega_rho=1e6,  # gate underflows to 0: pure identity blend
        w_out=np.zeros(n_amplitude), w_hid=np.ones(n_amplitude),
        b_hid=np.zeros(n_amplitude))
    ampm = AmPmDpdParams(
        beta=10.0, omega_phi=0.1, w_out=np.zeros(n_phase),
        w_hid=np.ones(n_phase), b_hid=np.zeros(n_phase))
    return DpdModel(amam=amam, ampm=ampm)


class TestEvmDb:
    """Validate the EVM formula and its edge cases."""

    def test_ten_percent_uniform_error(self) -> None:
        """Verify a 10% amplitude error reads -20 dB."""
        s = reference_symbols()
        assert evm_db(s, GAIN * s * 1.1, GAIN) == pytest.approx(-20.0, abs=1e-9)

    def test_small_gain_error_closed_form(self) -> None:
        """Verify evm_db(s, G*s*(1+eps)) = 20*log10(eps)."""
        s = reference_symbols()
        assert evm_db(s, GAIN * s * (1 + 1e-4), GAIN) == pytest.approx(-80.0, abs=1e-6)

    def test_rotation_closed_form(self) -> None:
        """Verify pure rotations match 20*log10(2*sin(theta/2))."""
        s = reference_symbols()
        rot = evm_db(s, GAIN * s * np.exp(0.1j), GAIN)
        assert rot == pytest.approx(ROTATION_01_RAD_EVM_DB, abs=1e-9)
        rot = evm_db(s, GAIN * s * np.exp(0.05j), GAIN)
        assert rot == pytest.approx(ROTATION_005_RAD_EVM_DB, abs=1e-9)

    def test_exact_match_reports_floor(self) -> None:
        """Verify a perfect chain returns the below-floor marker."""
        s = reference_symbols()
        assert evm_db(s, GAIN * s, GAIN) == EVM_FLOOR_DB

    def test_scale_invariance(self) -> None:
        """Verify joint scaling of reference and received changes nothing."""
        s = reference_symbols()
        r = GAIN * s * (1 + 0.03j)
        base = evm_db(s, r, GAIN)
        for c in (2.0, -3.0j, 1.0 + 2.0j, 1e-3 * (1.0 + 1.0j)):
            assert evm_db(c * s, c * r, GAIN) == pytest.approx(base, rel=1e-12)

    def test_zero_reference_rejected(self) -> None:
        """Verify zero reference power raises."""
        with pytest.raises(ValueError):
            evm_db(np.zeros(8, dtype=complex), np.ones(8, dtype=complex), GAIN)

    def test_shape_mismatch_rejected(self) -> None:
        """Verify unequal symbol counts raise."""
        with pytest.raises(ValueError):
            evm_db(np.ones(8, dtype=complex), np.ones(7, dtype=complex), GAIN)


class TestRunChain:
    """Validate single-chain simulation."""

    def test_unknown_chain_rejected(self) -> None:
        """Verify chain kinds outside the known set raise."""
        with pytest.raises(ConfigError):
            run_chain("bogus", 6.0, RappParams(), None, SignalConfig(), seed=1,
                      n_symbols=2)

    def test_dpd_chain_requires_model(self) -> None:
        """Verify the dpd chain cannot run without parameters."""
        with pytest.raises(ConfigError):
            run_chain(CHAIN_DPD, 6.0, RappParams(), None, SignalConfig(), seed=1,
                      n_symbols=2)

    def test_limiter_floors_at_high_backoff(self) -> None:
        """Verify a drive far below saturation is exactly linear."""
        value = run_chain(CHAIN_LIMIT, 40.0, RappParams(), None, SignalConfig(),
                          seed=5, n_symbols=4)
        assert value == EVM_FLOOR_DB

    def test_no_dpd_chain_reports_distortion(self) -> None:
        """Verify the plain PA chain yields a finite negative EVM."""
        value = run_chain(CHAIN_NO_DPD, 6.0, RappParams(), None, SignalConfig(),
                          seed=5, n_symbols=4)
        assert math.isfinite(value)
        assert value < -10.0

    def test_deterministic(self) -> None:
        """Verify equal seeds reproduce the EVM exactly."""
        args = (CHAIN_NO_DPD, 3.0, RappParams(), None, SignalConfig())
        assert run_chain(*args, seed=11, n_symbols=3) == \
            run_chain(*args, seed=11, n_symbols=3)

    def test_identity_dpd_matches_no_dpd(self) -> None:
        """Verify a pass-through predistorter reproduces the bare chain."""
        model = identity_model()
        a = run_chain(CHAIN_NO_DPD, 5.0, RappParams(), None, SignalConfig(),
                      seed=7, n_symbols=3)
        b = run_chain(CHAIN_DPD, 5.0, RappParams(), model, SignalConfig(),
                      seed=7, n_symbols=3)
        assert b == pytest.approx(a, abs=1e-9)


class TestSweepConfig:
    """Validate sweep configuration invariants."""

    def test_defaults(self) -> None:
        """Verify the default grid, symbol count, and chain set."""
        cfg = SweepConfig()
        assert cfg.ibo_grid == tuple(float(i) for i in range(13))
        assert cfg.n_eval_symbols == 200
        assert cfg.chains == CHAINS

    def test_chain_order_canonicalized(self) -> None:
        """Verify chains are stored in the fixed column order."""
        cfg = SweepConfig(chains=(CHAIN_LIMIT, CHAIN_NO_DPD))
        assert cfg.chains == (CHAIN_NO_DPD, CHAIN_LIMIT)

    def test_invariants(self) -> None:
        """Verify invalid settings are rejected."""
        with pytest.raises(ValueError):
            SweepConfig(ibo_grid=())
        with pytest.raises(ValueError):
            SweepConfig(ibo_grid=(3.0, 3.0))
        with pytest.raises(ValueError):
            SweepConfig(ibo_grid=(5.0, 4.0))
        with pytest.raises(ValueError):
            SweepConfig(n_eval_symbols=0)
        with pytest.raises(ValueError):
            SweepConfig(chains=("bogus",))
        with pytest.raises(ValueError):
            SweepConfig(chains=(CHAIN_LIMIT, CHAIN_LIMIT))


class TestSweep:
    """Validate the grid evaluation."""

    def test_single_point_single_chain(self) -> None:
        """Verify the smallest possible sweep."""
        cfg = SweepConfig(ibo_grid=(6.0,), chains=(CHAIN_LIMIT,), n_eval_symbols=2)
        result = sweep(cfg, RappParams(), None, SignalConfig())
        assert result.ibo_grid == (6.0,)
        assert set(result.evm) == {CHAIN_LIMIT}
        assert len(result.evm[CHAIN_LIMIT]) == 1

    def test_dpd_chain_requires_model(self) -> None:
        """Verify a dpd sweep without a model is rejected up front."""
        cfg = SweepConfig(ibo_grid=(6.0,), chains=(CHAIN_DPD,), n_eval_symbols=2)
        with pytest.raises(ConfigError):
            sweep(cfg, RappParams(), None, SignalConfig())

    def test_floor_flag_bit_set(self) -> None:
        """Verify floored limiter points carry bit 4."""
        cfg = SweepConfig(ibo_grid=(40.0,), chains=(CHAIN_LIMIT,), n_eval_symbols=2)
        result = sweep(cfg, RappParams(), None, SignalConfig())
        assert result.evm[CHAIN_LIMIT][0] == EVM_FLOOR_DB
        assert result.floor_flags[0] == 4

    def test_identity_dpd_tracks_no_dpd_across_grid(self) -> None:
        """Verify paired seeds: pass-through DPD equals the bare chain."""
        cfg = SweepConfig(ibo_grid=(2.0, 6.0), chains=(CHAIN_NO_DPD, CHAIN_DPD),
                          n_eval_symbols=2, seed=13)
        result = sweep(cfg, RappParams(), identity_model(), SignalConfig())
        np.testing.assert_allclose(result.evm[CHAIN_DPD], result.evm[CHAIN_NO_DPD],
                                   atol=1e-9)

    def test_deterministic(self) -> None:
        """Verify repeated sweeps render identical CSV text."""
        cfg = SweepConfig(ibo_grid=(3.0, 7.0), chains=(CHAIN_NO_DPD,),
                          n_eval_symbols=2, seed=4)
        r1 = sweep(cfg, RappParams(), None, SignalConfig())
        r2 = sweep(cfg, RappParams(), None, SignalConfig())
        assert r1.to_csv_text() == r2.to_csv_text()

    def test_evm_non_increasing_with_backoff(self) -> None:
        """Verify more back-off never hurts the bare PA or the limiter."""
        cfg = SweepConfig(ibo_grid=tuple(float(i) for i in range(8)),
                          chains=(CHAIN_NO_DPD, CHAIN_LIMIT), n_eval_symbols=200,
                          seed=0)
        result = sweep(cfg, RappParams(), None, SignalConfig())
        for chain in (CHAIN_NO_DPD, CHAIN_LIMIT):
            values = result.evm[chain]
            assert all(b <= a + 1e-12 for a, b in zip(values, values[1:])), chain


class TestSweepResultCsv:
    """Validate CSV rendering byte for byte."""

    def make_result(self) -> SweepResult:
        return SweepResult(
            ibo_grid=(0.0, 4.5),
            evm={CHAIN_NO_DPD: (-14.154140372, -20.5), CHAIN_LIMIT: (-24.45769820, EVM_FLOOR_DB)},
            floor_flags=(0, 4),
            seed=9, tool_version="1.2.3", config_digest="abc123",
        )

    def test_header_and_comment(self) -> None:
        """Verify the first two lines carry metadata and column names."""
        lines = self.make_result().to_csv_text().splitlines()
        assert lines[0] == "# nndpd 1.2.3 config_digest=abc123"
        assert lines[1] == CSV_HEADER
        assert CSV_HEADER == "ibo_db,evm_db_no_dpd,evm_db_dpd,evm_db_limit,floor_flags"

    def test_rows_use_six_significant_digits(self) -> None:
        """Verify cell formatting and empty cells for absent chains."""
        lines = self.make_result().to_csv_text().splitlines()
        assert lines[2] == "0,-14.1541,,-24.4577,0"
        assert lines[3] == "4.5,-20.5,,-150,4"

    def test_write_csv_round_trip(self, tmp_path) -> None:
        """Verify the file on disk equals the rendered text."""
        result = self.make_result()
        path = tmp_path / "sweep.csv"
        result.write_csv(path)
        assert path.read_text() == result.to_csv_text()

    def test_text_ends_with_newline(self) -> None:
        """Verify the rendering is a complete text file."""
        assert self.make_result().to_csv_text().endswith("\n")
