"""Deep BSDE pricing and hedging of barrier options."""

from ._core import (
    CSV_SCHEMA_VERSION,
    Model,
    NumericFault,
    ValidationError,
    __version__,
    barrier_up_out_call,
    bridge_no_breach_prob,
    bs_vanilla,
    config_hash,
    discretely_monitored_upper,
    mc_price,
    normalize_config,
    run_cli,
    simulate_paths,
    train,
)

__all__ = [
    "CSV_SCHEMA_VERSION",
    "Model",
    "NumericFault",
    "ValidationError",
    "__version__",
    "barrier_up_out_call",
    "bridge_no_breach_prob",
    "bs_vanilla",
    "config_hash",
    "discretely_monitored_upper",
    "mc_price",
    "normalize_config",
    "run_cli",
    "simulate_paths",
    "train",
]
