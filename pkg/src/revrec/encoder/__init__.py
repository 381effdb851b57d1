"""Hierarchical attention document encoder with analytic gradients."""

from revrec.encoder.params import (
    AttentionParams,
    GruBlock,
    ModelDims,
    ModelParams,
    init_params,
    load_params,
    save_params,
    zeros_like_params,
)
from revrec.encoder.network import (
    AttentionTrace,
    ForwardResult,
    bce_loss,
    encode_document,
    encode_sentence,
    forward,
    gru_cell,
    loss_and_gradients,
    param_gradients,
    sigmoid,
)
from revrec.encoder.training import TrainConfig, TrainResult, TrainingDivergedError, train
from revrec.encoder.highlights import (
    HighlightReport,
    attention_highlights,
    format_attention_trace,
)

__all__ = [
    "AttentionParams",
    "AttentionTrace",
    "ForwardResult",
    "GruBlock",
    "HighlightReport",
    "ModelDims",
    "ModelParams",
    "TrainConfig",
    "TrainResult",
    "TrainingDivergedError",
    "attention_highlights",
    "bce_loss",
    "encode_document",
    "encode_sentence",
    "format_attention_trace",
    "forward",
    "gru_cell",
    "init_params",
    "load_params",
    "loss_and_gradients",
    "param_gradients",
    "save_params",
    "sigmoid",
    "train",
    "zeros_like_params",
]
