"""Seeded mini-batch gradient descent over one or more training stages.

Stages are consumed strictly in order (curriculum stages of the correction
model, or corpora listed sequentially for a tagger). Each epoch shuffles
its stage with the run's seeded generator, so the parameter trajectory is
bit-identical for identical (seed, data, config).
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .corpus import Document, LabeledSentence
from .correction import CorrectionPair
from .errors import ConfigError, DivergenceError, EmptyDatasetError
from .model import (
    CorrectionModel,
    TaggerModel,
    correction_loss_and_grads,
    decode_correction,
    decode_main_task,
    model_tensors,
    tagger_loss_and_grads,
)
from .tasks import make_task_labels


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs_per_stage: int = 20
    batch_size: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if self.epochs_per_stage < 1 or self.batch_size < 1:
            raise ConfigError(
                f"epochs_per_stage and batch_size must be >= 1, got "
                f"{self.epochs_per_stage} and {self.batch_size}"
            )


@dataclass(frozen=True)
class EpochRecord:
    stage: int
    epoch: int
    loss: float


def _sgd(stages, config: TrainConfig, batch_fn, tensors) -> list[EpochRecord]:
    rng = np.random.default_rng(config.seed)
    trace: list[EpochRecord] = []
    for stage_idx, stage in enumerate(stages):
        if not stage:
            raise EmptyDatasetError(f"training stage {stage_idx} is empty")
        for epoch in range(config.epochs_per_stage):
            order = rng.permutation(len(stage))
            epoch_nll = 0.0
            epoch_tokens = 0
            for batch_idx, at in enumerate(range(0, len(order), config.batch_size)):
                batch = [stage[i] for i in order[at : at + config.batch_size]]
                loss, grads, n_tokens = batch_fn(batch)
                if not np.isfinite(loss):
                    raise DivergenceError(
                        f"non-finite loss at stage {stage_idx}, epoch {epoch}, "
                        f"batch {batch_idx}",
                        stage=stage_idx,
                        epoch=epoch,
                        batch=batch_idx,
                    )
                for name, grad in grads.items():
                    tensors[name] -= config.learning_rate * grad
                epoch_nll += loss * n_tokens
                epoch_tokens += n_tokens
            trace.append(EpochRecord(stage_idx, epoch, epoch_nll / epoch_tokens))
    return trace


def train_correction(
    model: CorrectionModel,
    stages: Sequence[Sequence[CorrectionPair]],
    config: TrainConfig,
) -> list[EpochRecord]:
    """Train the correction model in place; pass one stage for no curriculum."""
    model.check()
    return _sgd(
        [list(stage) for stage in stages],
        config,
        lambda batch: correction_loss_and_grads(batch, model),
        model_tensors(model),
    )


def train_tagger(
    model: TaggerModel,
    stages: Sequence[Sequence[LabeledSentence]],
    config: TrainConfig,
) -> list[EpochRecord]:
    """Train a (single- or multi-task) tagger in place, stage by stage."""
    model.check()
    prepared = [
        [
            (sent.tokens, np.asarray(make_task_labels(sent.labels, model.tasks)))
            for sent in stage
        ]
        for stage in stages
    ]
    return _sgd(
        prepared,
        config,
        lambda batch: tagger_loss_and_grads(batch, model),
        model_tensors(model),
    )


def correct_labels(documents: Sequence[Document], model: CorrectionModel) -> list[Document]:
    """Replace each sentence's (noisy) labels with the model's corrections."""
    out = []
    for doc in documents:
        sentences = tuple(
            LabeledSentence(s.tokens, tuple(decode_correction(s.tokens, s.labels, model)))
            for s in doc.sentences
        )
        out.append(Document(doc.id, sentences))
    return out


def tag_documents(documents: Sequence[Document], model: TaggerModel) -> list[Document]:
    """Predict labels with the tagger's main head (existing labels are ignored)."""
    out = []
    for doc in documents:
        sentences = tuple(
            LabeledSentence(s.tokens, tuple(decode_main_task(s.tokens, model)))
            for s in doc.sentences
        )
        out.append(Document(doc.id, sentences))
    return out


def format_trace(trace: Sequence[EpochRecord]) -> str:
    """Stable text rendering: one "stage<TAB>epoch<TAB>loss" line per epoch."""
    return "".join(f"{r.stage}\t{r.epoch}\t{r.loss!r}\n" for r in trace)


def write_trace(trace: Sequence[EpochRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_trace(trace))
