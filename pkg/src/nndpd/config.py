"""Run configuration: TOML parsing, exact serialization, and digests.

A run config bundles the PA model, signal dimensions, training
hyperparameters, sweep grid, and run-level settings (master seed,
output directory) into one TOML document with sections [pa], [signal],
[train], [sweep], [run]. Every key is optional and defaults to the
built-in values, so an empty document is a valid config. Unknown
sections or keys are rejected rather than ignored: a typo must fail
loudly, not silently fall back to a default.

Serialization is canonical (fixed key order, repr-exact floats), so
parse(serialize(cfg)) reproduces cfg exactly and the SHA-256 digest of
the serialized text identifies the configuration in output files.

The master seed lives in [run] and feeds both training and sweeps;
train.train_ibo_db defaults to the minimum of sweep.ibo_grid so the
training amplitudes cover every operating point the sweep will visit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .metrics import SweepConfig
from .pa import RappParams
from .signal import SignalConfig
from .train import TrainConfig

TomlDecodeError = tomllib.TOMLDecodeError
"""Raised on malformed TOML; carries line/column context in its message."""


@dataclass(frozen=True)
class RunConfig:
    """Complete, validated configuration for any command."""

    pa: RappParams
    signal: SignalConfig
    train: TrainConfig
    sweep: SweepConfig
    seed: int = 0
    out_dir: str = "."

    @classmethod
    def default(cls) -> "RunConfig":
        return parse_run_config("")

    def with_seed(self, seed: int) -> "RunConfig":
        """Copy with the master seed replaced everywhere it appears."""
        seed = _check_seed(seed)
        return replace(
            self,
            seed=seed,
            train=replace(self.train, seed=seed),
            sweep=replace(self.sweep, seed=seed),
        )


_PA_KEYS = ("g", "p", "v_sat", "a", "b", "q")
_SIGNAL_KEYS = ("qam_order", "n_fft", "n_active", "cp_len")
_TRAIN_FLOAT_KEYS = ("learning_rate", "adam_beta1", "adam_beta2", "adam_eps")
_TRAIN_INT_KEYS = ("batch_size", "epochs", "n_train_symbols",
                   "n_amplitude_neurons", "n_phase_neurons")
_SECTIONS = ("pa", "signal", "train", "sweep", "run")


def _check_seed(value) -> int:
    value = _as_int(value, "[run] seed")
    if not 0 <= value < 2 ** 64:
        raise ConfigError(f"[run] seed must fit in an unsigned 64-bit integer, got {value}")
    return value


def _as_int(value, where: str) -> int:
    if type(value) is not int:
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return value


def _as_float(value, where: str) -> float:
    if type(value) is bool or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _as_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{where} must be a string, got {value!r}")
    return value


def _section(data: dict, name: str) -> dict:
    section = data.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(section)


def _reject_unknown(section: dict, name: str, known) -> None:
    for key in section:
        if key not in known:
            raise ConfigError(f"[{name}] unknown key {key!r}; known keys: {sorted(known)}")


def parse_run_config(text: str) -> RunConfig:
    """Parse a TOML document into a validated RunConfig.

    Raises TomlDecodeError on syntax errors (with line context) and
    ConfigError on unknown keys or invalid values (naming the section
    and key).
    """
    data = tomllib.loads(text)
    for key in data:
        if key not in _SECTIONS:
            raise ConfigError(f"unknown config section [{key}]; known sections: {list(_SECTIONS)}")

    pa_tbl = _section(data, "pa")
    _reject_unknown(pa_tbl, "pa", _PA_KEYS)
    pa_defaults = RappParams()
    pa_kwargs = {
        key: _as_float(pa_tbl[key], f"[pa] {key}") if key in pa_tbl
        else getattr(pa_defaults, key)
        for key in _PA_KEYS
    }
    try:
        pa = RappParams(**pa_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[pa] {exc}") from exc

    sig_tbl = _section(data, "signal")
    _reject_unknown(sig_tbl, "signal", _SIGNAL_KEYS)
    sig_defaults = SignalConfig()
    sig_kwargs = {
        key: _as_int(sig_tbl[key], f"[signal] {key}") if key in sig_tbl
        else getattr(sig_defaults, key)
        for key in _SIGNAL_KEYS
    }
    try:
        signal = SignalConfig(**sig_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[signal] {exc}") from exc

    run_tbl = _section(data, "run")
    _reject_unknown(run_tbl, "run", ("seed", "out_dir"))
    seed = _check_seed(run_tbl.get("seed", 0))
    out_dir = _as_str(run_tbl.get("out_dir", "."), "[run] out_dir")

    sweep_tbl = _section(data, "sweep")
    _reject_unknown(sweep_tbl, "sweep", ("ibo_grid", "n_eval_symbols", "chains"))
    sweep_defaults = SweepConfig()
    if "ibo_grid" in sweep_tbl:
        raw = sweep_tbl["ibo_grid"]
        if not isinstance(raw, list):
            raise ConfigError(f"[sweep] ibo_grid must be a list of numbers, got {raw!r}")
        ibo_grid = tuple(_as_float(v, "[sweep] ibo_grid entry") for v in raw)
    else:
        ibo_grid = sweep_defaults.ibo_grid
    if "chains" in sweep_tbl:
        raw = sweep_tbl["chains"]
        if not isinstance(raw, list):
            raise ConfigError(f"[sweep] chains must be a list of strings, got {raw!r}")
        chains = tuple(_as_str(v, "[sweep] chains entry") for v in raw)
    else:
        chains = sweep_defaults.chains
    try:
        sweep = SweepConfig(
            ibo_grid=ibo_grid,
            n_eval_symbols=_as_int(sweep_tbl["n_eval_symbols"], "[sweep] n_eval_symbols")
            if "n_eval_symbols" in sweep_tbl else sweep_defaults.n_eval_symbols,
            seed=seed,
            chains=chains,
        )
    except ConfigError as exc:
        raise ConfigError(f"[sweep] {exc}") from exc

    train_tbl = _section(data, "train")
    _reject_unknown(train_tbl, "train",
                    _TRAIN_FLOAT_KEYS + _TRAIN_INT_KEYS + ("train_ibo_db",))
    train_defaults = TrainConfig()
    kwargs: dict = {"seed": seed}
    for key in _TRAIN_INT_KEYS:
        kwargs[key] = _as_int(train_tbl[key], f"[train] {key}") if key in train_tbl \
            else getattr(train_defaults, key)
    for key in _TRAIN_FLOAT_KEYS:
        kwargs[key] = _as_float(train_tbl[key], f"[train] {key}") if key in train_tbl \
            else getattr(train_defaults, key)
    # Unset training IBO follows the sweep grid's lowest point so the
    # training amplitude range covers the whole sweep.
    kwargs["train_ibo_db"] = _as_float(train_tbl["train_ibo_db"], "[train] train_ibo_db") \
        if "train_ibo_db" in train_tbl else min(sweep.ibo_grid)
    try:
        train = TrainConfig(**kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[train] {exc}") from exc

    return RunConfig(pa=pa, signal=signal, train=train, sweep=sweep,
                     seed=seed, out_dir=out_dir)


def load_run_config(path) -> RunConfig:
    """Read and parse a TOML config file."""
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    return parse_run_config(text)


def _toml_str(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _toml_float(value: float) -> str:
    text = repr(float(value))
    # TOML floats need a decimal point or exponent ("16.0", "1e-08").
    if "." not in text and "e" not in text and "E" not in text \
            and "inf" not in text and "nan" not in text:
        text += ".0"
    return text


def serialize_run_config(cfg: RunConfig) -> str:
    """Canonical TOML text: parse(serialize(cfg)) == cfg, byte-stable."""
    lines = ["[pa]"]
    for key in _PA_KEYS:
        lines.append(f"{key} = {_toml_float(getattr(cfg.pa, key))}")
    lines.append("")
    lines.append("[signal]")
    for key in _SIGNAL_KEYS:
        lines.append(f"{key} = {getattr(cfg.signal, key)}")
    lines.append("")
    lines.append("[train]")
    lines.append(f"batch_size = {cfg.train.batch_size}")
    lines.append(f"epochs = {cfg.train.epochs}")
    lines.append(f"learning_rate = {_toml_float(cfg.train.learning_rate)}")
    lines.append(f"n_train_symbols = {cfg.train.n_train_symbols}")
    lines.append(f"n_amplitude_neurons = {cfg.train.n_amplitude_neurons}")
    lines.append(f"n_phase_neurons = {cfg.train.n_phase_neurons}")
    lines.append(f"adam_beta1 = {_toml_float(cfg.train.adam_beta1)}")
    lines.append(f"adam_beta2 = {_toml_float(cfg.train.adam_beta2)}")
    lines.append(f"adam_eps = {_toml_float(cfg.train.adam_eps)}")
    lines.append(f"train_ibo_db = {_toml_float(cfg.train.train_ibo_db)}")
    lines.append("")
    lines.append("[sweep]")
    grid = ", ".join(_toml_float(v) for v in cfg.sweep.ibo_grid)
    lines.append(f"ibo_grid = [{grid}]")
    lines.append(f"n_eval_symbols = {cfg.sweep.n_eval_symbols}")
    chains = ", ".join(_toml_str(c) for c in cfg.sweep.chains)
    lines.append(f"chains = [{chains}]")
    lines.append("")
    lines.append("[run]")
    lines.append(f"seed = {cfg.seed}")
    lines.append(f"out_dir = {_toml_str(cfg.out_dir)}")
    return "\n".join(lines) + "\n"


def config_digest(cfg: RunConfig) -> str:
    """SHA-256 hex digest of the canonical serialization.

    The output directory is excluded (normalized before hashing): it
    changes where artifacts land, never what they contain, so identical
    experiments produce identical digests wherever they are written.
    """
    canonical = serialize_run_config(replace(cfg, out_dir="."))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
