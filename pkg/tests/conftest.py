"""Shared fixtures: one full default-configuration train + sweep per session."""

import json
import time
from dataclasses import dataclass
from pathlib import Path

import pytest

from nndpd.cli import main
from nndpd.config import RunConfig
from nndpd.dpd import DpdModel, load_model


@dataclass(frozen=True)
class SweepRow:
    ibo_db: float
    evm: dict  # chain name -> float or None when the chain was not run
    floor_flags: int


def parse_sweep_csv(text: str) -> list[SweepRow]:
    """Parse the sweep CSV format back into typed rows."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    assert header[0] == "ibo_db" and header[-1] == "floor_flags"
    chains = [name.removeprefix("evm_db_") for name in header[1:-1]]
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        evm = {chain: (float(cell) if cell else None)
               for chain, cell in zip(chains, cells[1:-1])}
        rows.append(SweepRow(ibo_db=float(cells[0]), evm=evm,
                             floor_flags=int(cells[-1])))
    return rows


@dataclass(frozen=True)
class DeskRun:
    """Artifacts of one complete default-configuration run."""

    out_dir: Path
    train_seconds: float
    n_pairs: int
    model: DpdModel
    model_bytes: bytes
    model_json: dict
    csv_bytes: bytes
    rows: list


def execute_full_run(out_dir: Path) -> DeskRun:
    """Run `train` then `sweep` with default config into out_dir."""
    t0 = time.perf_counter()
    assert main(["train", "--out", str(out_dir)]) == 0
    train_seconds = time.perf_counter() - t0
    model_path = out_dir / "model.json"
    assert main(["sweep", "--model", str(model_path),
                 "--out", str(out_dir)]) == 0

    cfg = RunConfig.default()
    n_pairs = cfg.train.n_train_symbols * (cfg.signal.n_fft + cfg.signal.cp_len)
    model_bytes = model_path.read_bytes()
    csv_bytes = (out_dir / "sweep.csv").read_bytes()
    return DeskRun(
        out_dir=out_dir,
        train_seconds=train_seconds,
        n_pairs=n_pairs,
        model=load_model(model_path),
        model_bytes=model_bytes,
        model_json=json.loads(model_bytes),
        csv_bytes=csv_bytes,
        rows=parse_sweep_csv(csv_bytes.decode()),
    )


@pytest.fixture(scope="session")
def desk_run(tmp_path_factory) -> DeskRun:
    """Train the predistorter and sweep EVM once with stock settings."""
    return execute_full_run(tmp_path_factory.mktemp("desk_run"))
