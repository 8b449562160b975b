"""Shuffle-model differentially private multi-armed bandits."""

from ._core import (
    EliminationEvent,
    PrivacyParams,
    RegretTrace,
    audit_grid,
    derive_params,
    hockey_stick,
    noise_distribution,
    noise_offset,
    payload_length,
    private_sum,
    regime,
    run_episode,
    run_experiment,
    sample_errors,
)

__all__ = [
    "EliminationEvent",
    "PrivacyParams",
    "RegretTrace",
    "audit_grid",
    "derive_params",
    "hockey_stick",
    "noise_distribution",
    "noise_offset",
    "payload_length",
    "private_sum",
    "regime",
    "run_episode",
    "run_experiment",
    "sample_errors",
]

__version__ = "0.1.0"
