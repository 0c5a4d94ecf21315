"""Micro-network digital predistorter.

Two tiny single-input networks, one per impairment branch:

* The amplitude network approximates the scaled inverse of the PA
  AM/AM curve. A sigmoid gate blends an identity term with a constant
  boost, and a one-hidden-layer ReLU net refines the shape:

      gate(u)  = sigmoid(alpha * (u - omega_rho))
      blend(u) = gate(u) + (1 - gate(u)) * u
      out(u)   = blend(u) + sum_j w_out_j * relu(w_hid_j * u + b_hid_j)

* The phase network approximates the negated AM/PM curve in degrees,
  a gated ReLU net with no identity path:

      out(u) = sigmoid(beta * (u - omega_phi)) * sum_j w_out_j * relu(w_hid_j * u + b_hid_j)

Predistortion applies the amplitude network to |x|, then corrects the
phase at the predistorted amplitude, since that is the amplitude the PA
actually sees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import ModelFormatError
from .validation import check_amplitudes, check_complex_signal

MODEL_FORMAT_VERSION = 1

# Ceiling of the gain-normalized amplitude scale for the default PA:
# v_sat / g. AM/AM inputs |y|/G can never exceed it, so it stands in for
# the expected peak amplitude when initializing the gate centers.
DEFAULT_PEAK_AMPLITUDE = 1.9 / 16.0

_GATE_SHARPNESS_INIT = 10.0
_GATE_CENTER_FRACTION = 0.8


def _as_param_vector(value, name: str, n: int) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


def _check_scalar(value, name: str) -> float:
    val = float(value)
    if not np.isfinite(val):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return val


@dataclass(frozen=True, eq=False)
class AmAmDpdParams:
    """Amplitude-branch parameters.

    alpha and omega_rho shape the sigmoid gate; w_out, w_hid, b_hid are
    the output weights, hidden weights, and hidden biases of the ReLU
    refinement net. All vectors share length n_neurons.
    """

    alpha: float
    omega_rho: float
    w_out: np.ndarray
    w_hid: np.ndarray
    b_hid: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.w_out).shape[0] if np.ndim(self.w_out) == 1 else 0
        if n < 1:
            raise ValueError("w_out must be a vector with at least one neuron")
        object.__setattr__(self, "alpha", _check_scalar(self.alpha, "alpha"))
        object.__setattr__(self, "omega_rho", _check_scalar(self.omega_rho, "omega_rho"))
        object.__setattr__(self, "w_out", _as_param_vector(self.w_out, "w_out", n))
        object.__setattr__(self, "w_hid", _as_param_vector(self.w_hid, "w_hid", n))
        object.__setattr__(self, "b_hid", _as_param_vector(self.b_hid, "b_hid", n))

    @property
    def n_neurons(self) -> int:
        return self.w_out.shape[0]


@dataclass(frozen=True, eq=False)
class AmPmDpdParams:
    """Phase-branch parameters, mirroring AmAmDpdParams with a beta gate."""

    beta: float
    omega_phi: float
    w_out: np.ndarray
    w_hid: np.ndarray
    b_hid: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.w_out).shape[0] if np.ndim(self.w_out) == 1 else 0
        if n < 1:
            raise ValueError("w_out must be a vector with at least one neuron")
        object.__setattr__(self, "beta", _check_scalar(self.beta, "beta"))
        object.__setattr__(self, "omega_phi", _check_scalar(self.omega_phi, "omega_phi"))
        object.__setattr__(self, "w_out", _as_param_vector(self.w_out, "w_out", n))
        object.__setattr__(self, "w_hid", _as_param_vector(self.w_hid, "w_hid", n))
        object.__setattr__(self, "b_hid", _as_param_vector(self.b_hid, "b_hid", n))

    @property
    def n_neurons(self) -> int:
        return self.w_out.shape[0]


class DpdModel(NamedTuple):
    """Trained predistorter: one parameter set per branch."""

    amam: AmAmDpdParams
    ampm: AmPmDpdParams


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # exp overflow for very negative z only pushes the result to exactly 0,
    # which is the correct limit; silence the spurious warning.
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def amam_forward(u, params: AmAmDpdParams) -> np.ndarray | float:
    """Evaluate the amplitude branch at amplitude(s) u."""
    u = check_amplitudes(u)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    gate = _sigmoid(params.alpha * (u - params.omega_rho))
    blend = gate + (1.0 - gate) * u
    hidden = np.maximum(u[:, None] * params.w_hid + params.b_hid, 0.0)
    out = blend + hidden @ params.w_out
    return float(out[0]) if scalar else out


def ampm_forward(u, params: AmPmDpdParams) -> np.ndarray | float:
    """Evaluate the phase branch at amplitude(s) u; output in degrees."""
    u = check_amplitudes(u)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    gate = _sigmoid(params.beta * (u - params.omega_phi))
    hidden = np.maximum(u[:, None] * params.w_hid + params.b_hid, 0.0)
    out = gate * (hidden @ params.w_out)
    return float(out[0]) if scalar else out


def predistort(signal, amam: AmAmDpdParams, ampm: AmPmDpdParams) -> np.ndarray:
    """Predistort a complex baseband signal.

    Per sample: a' = amam_forward(|x|), then the output is a' rotated to
    arg(x) plus the phase correction ampm_forward(a') (degrees converted
    to radians). The phase correction is evaluated at a' because that is
    the amplitude the PA receives. arg(0) is taken as 0.
    """
    signal = check_complex_signal(np.asarray(signal), "signal")
    amplitude = np.abs(signal)
    predistorted = amam_forward(amplitude, amam)
    phase = np.angle(signal) + np.deg2rad(ampm_forward(np.abs(predistorted), ampm))
    return predistorted * np.exp(1j * phase)


def initialize_params(
    seed: int,
    n_amplitude_neurons: int = 8,
    n_phase_neurons: int = 4,
    peak_amplitude: float = DEFAULT_PEAK_AMPLITUDE,
) -> tuple[AmAmDpdParams, AmPmDpdParams]:
    """Draw fresh parameters for both branches, deterministically per seed.

    Hidden weights and biases are uniform on [-1, 1) scaled by
    1/sqrt(fan_in) (fan-in is 1 here); output weights are uniform on
    [-0.1, 0.1). Gates start at sharpness 10 centered at 0.8 times the
    expected peak of the normalized amplitude scale. Draw order is fixed:
    amplitude branch (w_hid, b_hid, w_out), then phase branch.
    """
    if n_amplitude_neurons < 1 or n_phase_neurons < 1:
        raise ValueError("neuron counts must be >= 1")
    rng = np.random.default_rng(seed)
    omega = _GATE_CENTER_FRACTION * float(peak_amplitude)

    def draw(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        w_hid = rng.uniform(-1.0, 1.0, n)
        b_hid = rng.uniform(-1.0, 1.0, n)
        w_out = rng.uniform(-0.1, 0.1, n)
        return w_hid, b_hid, w_out

    w_hid, b_hid, w_out = draw(n_amplitude_neurons)
    amam = AmAmDpdParams(alpha=_GATE_SHARPNESS_INIT, omega_rho=omega,
                         w_out=w_out, w_hid=w_hid, b_hid=b_hid)
    w_hid, b_hid, w_out = draw(n_phase_neurons)
    ampm = AmPmDpdParams(beta=_GATE_SHARPNESS_INIT, omega_phi=omega,
                         w_out=w_out, w_hid=w_hid, b_hid=b_hid)
    return amam, ampm


def _params_payload(params: AmAmDpdParams | AmPmDpdParams) -> dict:
    gate_names = ("alpha", "omega_rho") if isinstance(params, AmAmDpdParams) else ("beta", "omega_phi")
    payload = {"n_neurons": params.n_neurons}
    for name in gate_names:
        payload[name] = getattr(params, name)
    for name in ("w_out", "w_hid", "b_hid"):
        payload[name] = getattr(params, name).tolist()
    return payload


def save_model(path, model: DpdModel, tool_version: str = "", config_digest: str = "") -> None:
    """Write a trained model as structured text (JSON).

    Floats are serialized via repr, so numeric payloads survive a
    save/load roundtrip bit for bit.
    """
    document = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "nndpd-model",
        "tool_version": tool_version,
        "config_digest": config_digest,
        "amam": _params_payload(model.amam),
        "ampm": _params_payload(model.ampm),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2)
        fh.write("\n")


def _load_branch(document: dict, branch: str, gate_names: tuple[str, str], path) -> dict:
    try:
        payload = document[branch]
        n = int(payload["n_neurons"])
        fields = {name: float(payload[name]) for name in gate_names}
        for name in ("w_out", "w_hid", "b_hid"):
            vector = np.asarray(payload[name], dtype=np.float64)
            if vector.shape != (n,):
                raise ModelFormatError(
                    f"model file {path}: field {branch}.{name} has length "
                    f"{vector.shape}, expected ({n},)"
                )
            fields[name] = vector
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"model file {path}: bad or missing field in {branch!r}: {exc}") from exc
    return fields


def load_model(path) -> DpdModel:
    """Load a model file written by save_model, validating its format."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file {path} is not valid JSON: {exc}") from exc
    version = document.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"model file {path}: unsupported format_version {version!r} "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    amam = AmAmDpdParams(**_load_branch(document, "amam", ("alpha", "omega_rho"), path))
    ampm = AmPmDpdParams(**_load_branch(document, "ampm", ("beta", "omega_phi"), path))
    return DpdModel(amam=amam, ampm=ampm)


class NeuralPredistorter(BaseEstimator, TransformerMixin):
    """Estimator facade: fit a predistorter on PA observations, then
    transform transmit signals.

    fit(X, y) takes paired complex samples observed at the PA input (X)
    and output (y) and trains both branches post-inverse style: the
    amplitude branch on (|y|/gain -> |X|), the phase branch on
    (|X| -> measured phase shift negated). transform applies the trained
    predistorter. Training is deterministic given seed.
    """

    def __init__(self, n_amplitude_neurons: int = 8, n_phase_neurons: int = 4,
                 epochs: int = 50, batch_size: int = 128,
                 learning_rate: float = 0.001, gain: float = 16.0, seed: int = 0):
        self.n_amplitude_neurons = n_amplitude_neurons
        self.n_phase_neurons = n_phase_neurons
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.gain = gain
        self.seed = seed

    def fit(self, X, y):
        from .train import TrainConfig, ila_pairs, train_dpd

        dataset = ila_pairs(X, y, self.gain)
        cfg = TrainConfig(
            batch_size=self.batch_size,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            n_amplitude_neurons=self.n_amplitude_neurons,
            n_phase_neurons=self.n_phase_neurons,
            seed=self.seed,
        )
        amam, ampm, losses = train_dpd(dataset, cfg)
        self.amam_params_ = amam
        self.ampm_params_ = ampm
        self.loss_history_ = losses
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "amam_params_")
        return predistort(X, self.amam_params_, self.ampm_params_)

    def model_(self) -> DpdModel:
        check_is_fitted(self, "amam_params_")
        return DpdModel(amam=self.amam_params_, ampm=self.ampm_params_)
