"""Mini-batch training with Adam steps and seeded determinism.

All randomness derives from one master seed through named substreams,
so two runs with identical seed and inputs produce bit-identical
parameters and loss histories.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from revrec.corpus import ReviewerProfile
from revrec.encoder.network import loss_and_gradients
from revrec.encoder.params import ModelDims, ModelParams, init_params

logger = logging.getLogger(__name__)

_SUBSTREAMS = {"init": 0, "shuffle": 1}


def substream_rng(seed: int, name: str) -> np.random.Generator:
    """Independent generator for a named substream of the master seed."""
    return np.random.default_rng(np.random.SeedSequence([seed, _SUBSTREAMS[name]]))


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class TrainResult:
    params: ModelParams
    epoch_losses: list[float] = field(default_factory=list)


def train(profiles: Sequence[ReviewerProfile], dims: ModelDims, config: TrainConfig) -> TrainResult:
    """Fit the encoder on reviewer profiles; returns params and loss history."""
    if not profiles:
        raise ValueError("no profiles to train on")
    labels = np.zeros((len(profiles), dims.num_labels))
    for row, profile in enumerate(profiles):
        for label in profile.label_set:
            if not 0 <= label < dims.num_labels:
                raise ValueError(f"label id {label} outside [0, {dims.num_labels})")
            labels[row, label] = 1.0
    documents = [p.document for p in profiles]

    params = init_params(dims, substream_rng(config.seed, "init"))
    shuffle_rng = substream_rng(config.seed, "shuffle")

    moment1 = {name: np.zeros_like(arr) for name, arr in params.arrays()}
    moment2 = {name: np.zeros_like(arr) for name, arr in params.arrays()}
    step = 0
    history: list[float] = []

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(documents))
        epoch_loss = 0.0
        seen = 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            batch_docs = [documents[i] for i in batch]
            loss, grads = loss_and_gradients(batch_docs, labels[batch], params)
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"non-finite loss at epoch {epoch}")
            step += 1
            correction1 = 1.0 - config.beta1 ** step
            correction2 = 1.0 - config.beta2 ** step
            for (name, param), (_, grad) in zip(params.arrays(), grads.arrays()):
                m = moment1[name]
                v = moment2[name]
                m *= config.beta1
                m += (1.0 - config.beta1) * grad
                v *= config.beta2
                v += (1.0 - config.beta2) * grad * grad
                param -= config.learning_rate * (m / correction1) / (
                    np.sqrt(v / correction2) + config.eps
                )
            epoch_loss += loss * len(batch)
            seen += len(batch)
        history.append(epoch_loss / seen)
        logger.info("epoch %d/%d: loss %.6f", epoch + 1, config.epochs, history[-1])
    return TrainResult(params=params, epoch_losses=history)
