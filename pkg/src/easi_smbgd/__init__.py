"""Streaming EASI independent component analysis with SMBGD updates."""

from .easi import (
    Hyperparameters,
    Nonlinearity,
    Optimizer,
    SampleResult,
    SeparatorState,
    init_separator,
    step_sample,
)
from .metrics import ConvergenceCriterion, amari_index, crosstalk_db
from .pipeline import PipelineMode, PipelineSpec, stage_count, throughput

__all__ = [
    "ConvergenceCriterion",
    "Hyperparameters",
    "Nonlinearity",
    "Optimizer",
    "PipelineMode",
    "PipelineSpec",
    "SampleResult",
    "SeparatorState",
    "amari_index",
    "crosstalk_db",
    "init_separator",
    "stage_count",
    "step_sample",
    "throughput",
]
