"""Command-line front end: p1db, train, and sweep subcommands.

Every command is a pure function of (config file, model file, seed):
output bytes contain no wall-clock, locale, or environment dependence,
so reruns with identical inputs are byte-identical. All output files
carry a header comment with the tool version and the config digest.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical or
training failure.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
from dataclasses import replace
from typing import Optional, Sequence

from . import __version__
from .config import (
    RunConfig,
    TomlDecodeError,
    config_digest,
    load_run_config,
)
from .dpd import DpdModel, load_model, save_model
from .errors import ConfigError, ModelFormatError, NumericalError, TrainingError
from .metrics import CHAIN_DPD, sweep
from .pa import p1db_input, rapp_am_am
from .train import generate_ila_dataset, train_dpd

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class _UsageError(Exception):
    """Command-line usage problem; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we own the codes
        raise _UsageError(message)


def _u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="nndpd",
        description="Neural-network digital predistortion simulation toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"nndpd {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{p1db,train,sweep}",
                                parser_class=_Parser)
    sub.required = True

    descriptions = {
        "p1db": "Solve for the PA input power at the 1 dB compression point.",
        "train": "Generate a training dataset, train the predistorter, and "
                 "write the model file plus a loss-history CSV.",
        "sweep": "Evaluate EVM versus IBO for the configured chains and "
                 "write the sweep CSV.",
    }
    for name, description in descriptions.items():
        cmd = sub.add_parser(name, help=description, description=description)
        cmd.add_argument("--config", metavar="PATH",
                         help="TOML run config (built-in defaults when omitted)")
        cmd.add_argument("--model", metavar="PATH",
                         help="model file path (output for train, input for sweep)")
        cmd.add_argument("--out", metavar="DIR",
                         help="output directory (overrides [run] out_dir)")
        cmd.add_argument("--seed", type=_u64, metavar="U64",
                         help="master seed (overrides [run] seed)")
    return parser


def _resolve_config(args) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig.default()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def cmd_p1db(cfg: RunConfig, stdout=None) -> int:
    """Print the 1 dB compression input point and the solver residual."""
    stdout = stdout or sys.stdout
    power_watts = p1db_input(cfg.pa)
    amplitude = math.sqrt(power_watts)
    power_dbm = 10.0 * math.log10(power_watts) + 30.0
    residual = rapp_am_am(amplitude, cfg.pa) / (cfg.pa.g * amplitude) - 10.0 ** (-1.0 / 20.0)
    print(f"p1db_input_amplitude = {amplitude!r}", file=stdout)
    print(f"p1db_input_power_watts = {power_watts!r}", file=stdout)
    print(f"p1db_input_power_dbm = {power_dbm!r}", file=stdout)
    print(f"residual = {residual:.6e}", file=stdout)
    return EXIT_OK


def cmd_train(cfg: RunConfig, model_path: Optional[str] = None, stdout=None) -> int:
    """Train both branches and write the model file and loss CSV."""
    stdout = stdout or sys.stdout
    os.makedirs(cfg.out_dir, exist_ok=True)
    digest = config_digest(cfg)

    dataset = generate_ila_dataset(cfg.pa, cfg.signal, cfg.train)
    amam, ampm, loss_history = train_dpd(dataset, cfg.train)

    model_file = model_path or os.path.join(cfg.out_dir, "model.json")
    save_model(model_file, DpdModel(amam=amam, ampm=ampm),
               tool_version=__version__, config_digest=digest)

    loss_file = os.path.join(cfg.out_dir, "training_loss.csv")
    with open(loss_file, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# nndpd {__version__} config_digest={digest}\n")
        fh.write("epoch,amam_loss,ampm_loss\n")
        for epoch in range(loss_history.shape[0]):
            fh.write(f"{epoch},{float(loss_history[epoch, 0])!r},"
                     f"{float(loss_history[epoch, 1])!r}\n")

    print(f"wrote {model_file}", file=stdout)
    print(f"wrote {loss_file}", file=stdout)
    print(f"final_amam_loss = {float(loss_history[-1, 0])!r}", file=stdout)
    print(f"final_ampm_loss = {float(loss_history[-1, 1])!r}", file=stdout)
    return EXIT_OK


def _summarize_csv(csv_text: str, stdout) -> None:
    """Print the per-point table and the headline gap, reading back the
    CSV that was just written so the summary reflects the artifact.
    """
    rows = [line.split(",") for line in csv_text.splitlines()
            if line and not line.startswith("#")]
    header, data = rows[0], rows[1:]
    widths = [max(len(h), 12) for h in header]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)), file=stdout)
    for row in data:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)), file=stdout)
    col = {name: i for i, name in enumerate(header)}
    gaps = []
    for row in data:
        no_dpd_cell = row[col["evm_db_no_dpd"]]
        dpd_cell = row[col["evm_db_dpd"]]
        if no_dpd_cell and dpd_cell:
            gaps.append(float(no_dpd_cell) - float(dpd_cell))
    if gaps:
        print(f"max_no_dpd_minus_dpd_gap_db = {max(gaps):.6g}", file=stdout)


def cmd_sweep(cfg: RunConfig, model_path: Optional[str] = None, stdout=None) -> int:
    """Run the EVM sweep and write the sweep CSV."""
    stdout = stdout or sys.stdout
    if CHAIN_DPD in cfg.sweep.chains and model_path is None:
        raise ConfigError(
            "sweep config includes chain 'dpd'; pass --model or drop the chain"
        )
    model = None
    model_digest = ""
    if model_path is not None:
        model = load_model(model_path)
        with open(model_path, "rb") as fh:
            model_digest = hashlib.sha256(fh.read()).hexdigest()

    os.makedirs(cfg.out_dir, exist_ok=True)
    digest = config_digest(cfg)
    result = sweep(cfg.sweep, cfg.pa, model, cfg.signal)
    result = replace(result, tool_version=__version__, config_digest=digest,
                     model_digest=model_digest)

    sweep_file = os.path.join(cfg.out_dir, "sweep.csv")
    result.write_csv(sweep_file)
    print(f"wrote {sweep_file}", file=stdout)
    _summarize_csv(result.to_csv_text(), stdout)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"nndpd: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help / --version print-and-exit path
        code = exc.code
        return int(code) if code else EXIT_OK

    try:
        cfg = _resolve_config(args)
        if args.command == "p1db":
            return cmd_p1db(cfg)
        if args.command == "train":
            return cmd_train(cfg, model_path=args.model)
        return cmd_sweep(cfg, model_path=args.model)
    except TrainingError as exc:
        print(f"nndpd: training failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericalError as exc:
        print(f"nndpd: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ModelFormatError, TomlDecodeError) as exc:
        print(f"nndpd: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"nndpd: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
