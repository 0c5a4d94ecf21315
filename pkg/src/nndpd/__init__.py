"""nndpd: neural-network digital predistortion simulation toolkit.

Baseband simulation of a power amplifier linearized by a two-branch
micro neural network: an OFDM/QAM transmit chain, a Rapp PA model with
AM/AM and AM/PM distortion, post-inverse (indirect-learning) training
with a from-scratch Adam loop, and an EVM-versus-IBO sweep harness.
"""

__version__ = "0.1.0"

from .config import (
    RunConfig,
    config_digest,
    load_run_config,
    parse_run_config,
    serialize_run_config,
)
from .dpd import (
    AmAmDpdParams,
    AmPmDpdParams,
    DpdModel,
    NeuralPredistorter,
    amam_forward,
    ampm_forward,
    initialize_params,
    load_model,
    predistort,
    save_model,
)
from .errors import ConfigError, ModelFormatError, NumericalError, TrainingError
from .metrics import (
    CHAINS,
    EVM_FLOOR_DB,
    SweepConfig,
    SweepResult,
    evm_db,
    run_chain,
    sweep,
)
from .pa import (
    IdealLimiter,
    RappParams,
    RappPowerAmplifier,
    apply_ideal_limiter,
    apply_pa,
    p1db_input,
    p1db_input_closed_form,
    rapp_am_am,
    rapp_am_pm,
)
from .signal import (
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
from .train import (
    AdamState,
    IlaDataset,
    TrainConfig,
    TrainResult,
    adam_step,
    generate_ila_dataset,
    gradients,
    ila_pairs,
    mse_loss,
    train_dpd,
)

__all__ = [
    "AdamState",
    "AmAmDpdParams",
    "AmPmDpdParams",
    "CHAINS",
    "ConfigError",
    "DpdModel",
    "EVM_FLOOR_DB",
    "IdealLimiter",
    "IlaDataset",
    "ModelFormatError",
    "NeuralPredistorter",
    "NumericalError",
    "OfdmConfig",
    "QamConfig",
    "RappParams",
    "RappPowerAmplifier",
    "RunConfig",
    "SignalConfig",
    "SweepConfig",
    "SweepResult",
    "TrainConfig",
    "TrainResult",
    "TrainingError",
    "active_bin_indices",
    "adam_step",
    "amam_forward",
    "ampm_forward",
    "apply_ideal_limiter",
    "apply_pa",
    "average_power",
    "config_digest",
    "constellation",
    "evm_db",
    "generate_ila_dataset",
    "gradients",
    "ila_pairs",
    "initialize_params",
    "load_model",
    "load_run_config",
    "mse_loss",
    "ofdm_demodulate",
    "ofdm_modulate",
    "p1db_input",
    "p1db_input_closed_form",
    "parse_run_config",
    "predistort",
    "qam_hard_demap",
    "qam_map",
    "rapp_am_am",
    "rapp_am_pm",
    "run_chain",
    "save_model",
    "scale_to_ibo",
    "serialize_run_config",
    "sweep",
    "train_dpd",
    "__version__",
]
