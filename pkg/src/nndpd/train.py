"""Post-inverse training of the predistorter networks.

The PA is observed through paired complex samples (input x, output y).
Training data follows the indirect-learning recipe: fit a post-inverse
on the reversed mapping and deploy it in front of the PA.

* amplitude branch: inputs |y|/G, targets |x|. A perfect fit composes
  with the PA to the straight line G|x|.
* phase branch: inputs |x| (the amplitude the PA sees), targets the
  negated per-sample phase shift -arg(conj(x) y) in degrees, so the
  trained branch cancels the AM/PM curve.

Both branches are independent scalar regressions trained with
mini-batch MSE and an Adam loop implemented here from scratch. Training
is deterministic given (seed, config, dataset): initialization, epoch
shuffles, batch boundaries, and summation order are all fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dpd import AmAmDpdParams, AmPmDpdParams, initialize_params
from .errors import NumericalError, TrainingError
from .pa import RappParams, apply_pa, p1db_input
from .signal import SignalConfig, ofdm_modulate, qam_map, scale_to_ibo
from .validation import check_complex_signal, check_positive


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters.

    n_train_symbols counts OFDM symbols for dataset generation; the
    default 2000 is the desk-scale setting (about 2.3e6 sample pairs
    with the default OFDM dimensions), while 1e5 symbols is the nominal
    full-scale run. train_ibo_db should sit at the minimum of the
    evaluation grid so training amplitudes cover the whole compression
    range seen anywhere in a sweep; the run-config layer resolves that
    coupling and 0 dB matches the default grid.
    """

    batch_size: int = 128
    epochs: int = 50
    learning_rate: float = 0.001
    n_train_symbols: int = 2000
    n_amplitude_neurons: int = 8
    n_phase_neurons: int = 4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    train_ibo_db: float = 0.0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not (np.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.n_train_symbols < 1:
            raise ValueError(f"n_train_symbols must be >= 1, got {self.n_train_symbols}")
        if self.n_amplitude_neurons < 1 or self.n_phase_neurons < 1:
            raise ValueError("neuron counts must be >= 1")
        for name in ("adam_beta1", "adam_beta2"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {value}")
        if not (np.isfinite(self.adam_eps) and self.adam_eps > 0):
            raise ValueError(f"adam_eps must be positive, got {self.adam_eps}")
        if not np.isfinite(self.train_ibo_db):
            raise ValueError(f"train_ibo_db must be finite, got {self.train_ibo_db}")


@dataclass(frozen=True)
class IlaDataset:
    """Per-sample training pairs for the two branches.

    The pair streams are stored as parallel arrays: amplitude branch
    (amam_input -> amam_target), phase branch (ampm_input -> ampm_target,
    degrees). All four arrays share one length, one entry per time-domain
    sample.
    """

    amam_input: np.ndarray
    amam_target: np.ndarray
    ampm_input: np.ndarray
    ampm_target: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("amam_input", "amam_target", "ampm_input", "ampm_target"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1 or arr.size == 0:
                raise ValueError(f"{name} must be a nonempty vector")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            arrays[name] = arr
        lengths = {arr.size for arr in arrays.values()}
        if len(lengths) != 1:
            raise ValueError(f"pair streams differ in length: { {k: v.size for k, v in arrays.items()} }")
        for name in ("amam_input", "amam_target", "ampm_input"):
            if np.any(arrays[name] < 0):
                raise ValueError(f"{name} holds amplitudes and must be nonnegative")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.amam_input.size


def ila_pairs(pa_input, pa_output, gain: float) -> IlaDataset:
    """Build the post-inverse pair streams from PA observations.

    Phase targets come from the conjugate product conj(x) * y, whose
    angle is exactly the PA phase shift; negating it gives the
    correction the phase branch must learn.
    """
    x = check_complex_signal(np.asarray(pa_input), "pa_input", allow_empty=False)
    y = check_complex_signal(np.asarray(pa_output), "pa_output", allow_empty=False)
    if x.size != y.size:
        raise ValueError(f"pa_input and pa_output lengths differ: {x.size} vs {y.size}")
    gain = check_positive(gain, "gain")
    return IlaDataset(
        amam_input=np.abs(y) / gain,
        amam_target=np.abs(x),
        ampm_input=np.abs(x),
        ampm_target=-np.rad2deg(np.angle(np.conj(x) * y)),
    )


def generate_ila_dataset(pa: RappParams, sig_cfg: SignalConfig, train_cfg: TrainConfig) -> IlaDataset:
    """Synthesize a training dataset from the transmit chain.

    Seeded random bits run through QAM and OFDM, are scaled to
    train_ibo_db below the PA compression point, and pass through the
    PA; every time-domain sample becomes one training pair per branch.
    Deterministic given train_cfg.seed.
    """
    rng = np.random.default_rng(train_cfg.seed)
    n_bits = train_cfg.n_train_symbols * sig_cfg.bits_per_ofdm_symbol
    bits = rng.integers(0, 2, size=n_bits)
    symbols = qam_map(bits, sig_cfg.qam)
    tx = ofdm_modulate(symbols, sig_cfg.ofdm)
    tx = scale_to_ibo(tx, p1db_input(pa), train_cfg.train_ibo_db)
    return ila_pairs(tx, apply_pa(tx, pa), pa.g)


def mse_loss(pred, target) -> float:
    """Mean squared error between two equal-length value sequences."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.ndim != 1 or pred.size == 0:
        raise ValueError(
            f"pred and target must be nonempty vectors of equal length, "
            f"got shapes {pred.shape} and {target.shape}"
        )
    diff = pred - target
    return float(np.dot(diff, diff) / diff.size)


# Flat parameter vectors keep the training loop allocation-light. Layout:
# [gate sharpness, gate center, w_out (n), w_hid (n), b_hid (n)].

def _pack(params: AmAmDpdParams | AmPmDpdParams) -> np.ndarray:
    gate = (params.alpha, params.omega_rho) if isinstance(params, AmAmDpdParams) \
        else (params.beta, params.omega_phi)
    return np.concatenate([gate, params.w_out, params.w_hid, params.b_hid])


def _unpack_amam(theta: np.ndarray, n: int) -> AmAmDpdParams:
    return AmAmDpdParams(alpha=theta[0], omega_rho=theta[1], w_out=theta[2:2 + n],
                         w_hid=theta[2 + n:2 + 2 * n], b_hid=theta[2 + 2 * n:2 + 3 * n])


def _unpack_ampm(theta: np.ndarray, n: int) -> AmPmDpdParams:
    return AmPmDpdParams(beta=theta[0], omega_phi=theta[1], w_out=theta[2:2 + n],
                         w_hid=theta[2 + n:2 + 2 * n], b_hid=theta[2 + 2 * n:2 + 3 * n])


def _amam_kernel(theta: np.ndarray, n: int, u: np.ndarray, target: np.ndarray,
                 grad: np.ndarray) -> float:
    """Batch loss and analytic gradient of the amplitude branch.

    Writes the gradient into `grad` (same layout as theta) and returns
    the batch MSE. The ReLU subgradient at 0 is taken as 0.
    """
    alpha, omega = theta[0], theta[1]
    w_out = theta[2:2 + n]
    w_hid = theta[2 + n:2 + 2 * n]
    b_hid = theta[2 + 2 * n:2 + 3 * n]

    # Overflow to inf is tolerated here; divergence is detected from the
    # returned loss by the caller rather than by floating-point warnings.
    with np.errstate(over="ignore", invalid="ignore"):
        d = u - omega
        gate = 1.0 / (1.0 + np.exp(-alpha * d))
        one_minus_gate = 1.0 - gate
        z = u[:, None] * w_hid + b_hid
        h = np.maximum(z, 0.0)
        pred = gate + one_minus_gate * u + h @ w_out
        r = pred - target
        loss = float(np.dot(r, r) / r.size)

        c = (2.0 / r.size) * r
        s = gate * one_minus_gate
        cg = c * (1.0 - u)              # d pred / d gate
        cgs = cg * s
        grad[0] = np.dot(cgs, d)
        grad[1] = -alpha * np.sum(cgs)
        grad[2:2 + n] = h.T @ c
        dmat = (z > 0.0) * (c[:, None] * w_out)
        grad[2 + n:2 + 2 * n] = dmat.T @ u
        grad[2 + 2 * n:2 + 3 * n] = dmat.sum(axis=0)
    return loss


def _ampm_kernel(theta: np.ndarray, n: int, u: np.ndarray, target: np.ndarray,
                 grad: np.ndarray) -> float:
    """Batch loss and analytic gradient of the phase branch."""
    beta, omega = theta[0], theta[1]
    w_out = theta[2:2 + n]
    w_hid = theta[2 + n:2 + 2 * n]
    b_hid = theta[2 + 2 * n:2 + 3 * n]

    with np.errstate(over="ignore", invalid="ignore"):
        d = u - omega
        gate = 1.0 / (1.0 + np.exp(-beta * d))
        z = u[:, None] * w_hid + b_hid
        h = np.maximum(z, 0.0)
        g2 = h @ w_out
        pred = gate * g2
        r = pred - target
        loss = float(np.dot(r, r) / r.size)

        c = (2.0 / r.size) * r
        s = gate * (1.0 - gate)
        cgs = (c * g2) * s
        grad[0] = np.dot(cgs, d)
        grad[1] = -beta * np.sum(cgs)
        cg = c * gate
        grad[2:2 + n] = h.T @ cg
        dmat = (z > 0.0) * (cg[:, None] * w_out)
        grad[2 + n:2 + 2 * n] = dmat.T @ u
        grad[2 + 2 * n:2 + 3 * n] = dmat.sum(axis=0)
    return loss


def gradients(batch, params: AmAmDpdParams | AmPmDpdParams) -> dict[str, float | np.ndarray]:
    """Analytic partial derivatives of the batch MSE for one branch.

    batch is a (inputs, targets) pair of equal-length vectors. Returns
    one entry per parameter field, floats for the gate scalars and
    vectors for the layer parameters.
    """
    u, target = batch
    u = np.asarray(u, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if u.shape != target.shape or u.ndim != 1 or u.size == 0:
        raise ValueError("batch inputs and targets must be nonempty vectors of equal length")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(target))):
        raise ValueError("batch contains non-finite values")
    if isinstance(params, AmAmDpdParams):
        kernel = _amam_kernel
        gate_names = ("alpha", "omega_rho")
    elif isinstance(params, AmPmDpdParams):
        kernel = _ampm_kernel
        gate_names = ("beta", "omega_phi")
    else:
        raise TypeError(f"unsupported parameter container: {type(params).__name__}")
    theta = _pack(params)
    n = params.n_neurons
    grad = np.empty_like(theta)
    kernel(theta, n, u, target, grad)
    return {
        gate_names[0]: float(grad[0]),
        gate_names[1]: float(grad[1]),
        "w_out": grad[2:2 + n].copy(),
        "w_hid": grad[2 + n:2 + 2 * n].copy(),
        "b_hid": grad[2 + 2 * n:2 + 3 * n].copy(),
    }


@dataclass
class AdamState:
    """First and second moment accumulators, keyed like the parameter dict."""

    m: dict[str, float | np.ndarray] = field(default_factory=dict)
    v: dict[str, float | np.ndarray] = field(default_factory=dict)

    @classmethod
    def zeros(cls, params: dict[str, float | np.ndarray]) -> "AdamState":
        m = {}
        v = {}
        for name, value in params.items():
            if isinstance(value, np.ndarray):
                m[name] = np.zeros_like(value)
                v[name] = np.zeros_like(value)
            else:
                m[name] = 0.0
                v[name] = 0.0
        return cls(m=m, v=v)


def adam_step(params: dict, grads: dict, state: AdamState, t: int,
              cfg: TrainConfig) -> tuple[dict, AdamState]:
    """One Adam update with bias correction, elementwise:

        m <- b1 m + (1 - b1) g        mhat = m / (1 - b1^t)
        v <- b2 v + (1 - b2) g^2      vhat = v / (1 - b2^t)
        theta <- theta - lr * mhat / (sqrt(vhat) + eps)

    t is the 1-based step index; state must hold zero moments before the
    first step. Returns updated (params, state) without mutating inputs.
    """
    if t < 1:
        raise ValueError(f"step index t must be >= 1, got {t}")
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    lr, eps = cfg.learning_rate, cfg.adam_eps
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    new_params: dict = {}
    new_m: dict = {}
    new_v: dict = {}
    for name, g in grads.items():
        g = np.asarray(g, dtype=np.float64)
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient for parameter {name!r}")
        m = b1 * np.asarray(state.m[name]) + (1.0 - b1) * g
        v = b2 * np.asarray(state.v[name]) + (1.0 - b2) * (g * g)
        step = lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
        updated = np.asarray(params[name]) - step
        if isinstance(params[name], np.ndarray):
            new_params[name] = updated
            new_m[name] = m
            new_v[name] = v
        else:
            new_params[name] = float(updated)
            new_m[name] = float(m)
            new_v[name] = float(v)
    return new_params, AdamState(m=new_m, v=new_v)


class TrainResult(NamedTuple):
    """train_dpd output: trained branches plus per-epoch mean losses.

    loss_history has shape (epochs, 2): column 0 amplitude branch,
    column 1 phase branch.
    """

    amam: AmAmDpdParams
    ampm: AmPmDpdParams
    loss_history: np.ndarray


def _train_branch(kernel, theta: np.ndarray, n: int, u: np.ndarray, target: np.ndarray,
                  cfg: TrainConfig, shuffle_rng: np.random.Generator,
                  branch_name: str) -> tuple[np.ndarray, np.ndarray]:
    """Mini-batch Adam on one branch. Returns (theta, per-epoch losses)."""
    n_samples = u.size
    batch = cfg.batch_size
    params = {"theta": theta}
    state = AdamState.zeros(params)
    grad = np.empty_like(theta)
    epoch_losses = np.empty(cfg.epochs)
    t = 0
    for epoch in range(cfg.epochs):
        perm = shuffle_rng.permutation(n_samples)
        u_epoch = u[perm]
        target_epoch = target[perm]
        loss_sum = 0.0
        n_batches = 0
        for start in range(0, n_samples, batch):
            stop = min(start + batch, n_samples)
            loss = kernel(params["theta"], n, u_epoch[start:stop],
                          target_epoch[start:stop], grad)
            if not math.isfinite(loss):
                raise TrainingError(
                    f"{branch_name} training loss became non-finite in epoch {epoch}",
                    epoch=epoch,
                )
            t += 1
            params, state = adam_step(params, {"theta": grad}, state, t, cfg)
            loss_sum += loss
            n_batches += 1
        epoch_losses[epoch] = loss_sum / n_batches
    return params["theta"], epoch_losses


def train_dpd(dataset: IlaDataset, cfg: TrainConfig) -> TrainResult:
    """Train both branches independently on their pair streams.

    Each branch shuffles its pairs every epoch (Fisher-Yates through the
    generator's permutation, stream derived from cfg.seed) and walks them
    in mini-batches of cfg.batch_size (final short batch included). The
    per-epoch loss is the mean over that epoch's batch losses. Raises
    TrainingError if a loss turns non-finite.
    """
    amam0, ampm0 = initialize_params(cfg.seed, cfg.n_amplitude_neurons, cfg.n_phase_neurons)
    amam_stream, ampm_stream = np.random.SeedSequence(cfg.seed).spawn(2)

    theta_a, losses_a = _train_branch(
        _amam_kernel, _pack(amam0), cfg.n_amplitude_neurons,
        dataset.amam_input, dataset.amam_target, cfg,
        np.random.default_rng(amam_stream), "amplitude-branch",
    )
    theta_p, losses_p = _train_branch(
        _ampm_kernel, _pack(ampm0), cfg.n_phase_neurons,
        dataset.ampm_input, dataset.ampm_target, cfg,
        np.random.default_rng(ampm_stream), "phase-branch",
    )
    return TrainResult(
        amam=_unpack_amam(theta_a, cfg.n_amplitude_neurons),
        ampm=_unpack_ampm(theta_p, cfg.n_phase_neurons),
        loss_history=np.column_stack([losses_a, losses_p]),
    )
