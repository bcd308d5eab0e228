"""Compact trainable tagger with hand-derived gradients.

The encoder embeds each token, concatenates the embeddings of a fixed
context window around position i (out-of-range positions use a BOUNDARY
embedding, unseen tokens an UNKNOWN embedding) and projects through tanh:

    r_i = tanh(W @ concat(x_{i-w}, ..., x_{i+w}) + b)

Two model kinds share this encoder. The correction model concatenates the
representation with a one-hot embedding of the token's noisy label and
classifies over the 9 IOB2 labels; it consumes noisy labels at training
and at prediction time. The tagger model attaches one softmax head per
task of a TaskConfig (main task only when the config has no windows) and
minimizes the task-weighted sum of per-token negative log-likelihoods.

All gradients are computed analytically; finite_difference_grads provides
the independent numerical check.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .corpus import LABEL_INDEX, LABELS, NUM_LABELS, Iob2Label
from .errors import ConfigError, ShapeError
from .tasks import TaskConfig, TaskDescriptor, describe_tasks, task_count

UNKNOWN_ID = 0
BOUNDARY_ID = 1
RESERVED_IDS = 2


@dataclass(frozen=True)
class Vocabulary:
    """Dense token -> id mapping with reserved UNKNOWN and BOUNDARY ids."""

    index: dict[str, int]

    @property
    def size(self) -> int:
        return RESERVED_IDS + len(self.index)

    def id_of(self, token: str) -> int:
        return self.index.get(token, UNKNOWN_ID)

    def ids(self, tokens: Sequence[str]) -> np.ndarray:
        return np.array([self.id_of(t) for t in tokens], dtype=np.int64)

    def tokens_by_id(self) -> list[str]:
        ordered = [""] * len(self.index)
        for token, token_id in self.index.items():
            ordered[token_id - RESERVED_IDS] = token
        return ordered

    @classmethod
    def from_tokens(cls, token_lists) -> "Vocabulary":
        index: dict[str, int] = {}
        for tokens in token_lists:
            for token in tokens:
                if token not in index:
                    index[token] = RESERVED_IDS + len(index)
        return cls(index)

    @classmethod
    def from_token_list(cls, tokens: Sequence[str]) -> "Vocabulary":
        return cls({t: RESERVED_IDS + i for i, t in enumerate(tokens)})


@dataclass
class ModelConfig:
    """Architecture sizes; training hyperparameters live in TrainConfig."""

    embedding_dim: int = 16
    hidden_dim: int = 32
    radius: int = 1
    label_dim: int = NUM_LABELS  # one-hot size for noisy-label embeddings

    def __post_init__(self):
        if min(self.embedding_dim, self.hidden_dim) < 1 or self.radius < 0:
            raise ConfigError(f"invalid model dimensions: {self}")
        if self.label_dim < NUM_LABELS:
            raise ConfigError(
                f"label_dim must be >= {NUM_LABELS}, got {self.label_dim}"
            )


@dataclass
class EncoderParams:
    embeddings: np.ndarray  # (V, E)
    projection: np.ndarray  # (H, (2w+1)*E)
    bias: np.ndarray  # (H,)
    radius: int

    @property
    def hidden_dim(self) -> int:
        return self.projection.shape[0]

    def check(self, vocab_size: int) -> None:
        v, e = self.embeddings.shape
        h, d = self.projection.shape
        if v != vocab_size:
            raise ConfigError(f"embedding table has {v} rows for a vocabulary of {vocab_size}")
        if d != (2 * self.radius + 1) * e:
            raise ConfigError(
                f"projection expects input dim {d}, window provides {(2 * self.radius + 1) * e}"
            )
        if self.bias.shape != (h,):
            raise ConfigError(f"bias shape {self.bias.shape} does not match hidden dim {h}")


@dataclass(frozen=True)
class LabelEmbedder:
    """Assigns each IOB2 label a distinct one-hot vector of length dim."""

    dim: int = NUM_LABELS

    def __post_init__(self):
        if self.dim < NUM_LABELS:
            raise ConfigError(f"label embedding dim must be >= {NUM_LABELS}, got {self.dim}")

    def vector(self, label: Iob2Label) -> np.ndarray:
        v = np.zeros(self.dim)
        v[LABEL_INDEX[label]] = 1.0
        return v

    def matrix(self, labels: Sequence[Iob2Label]) -> np.ndarray:
        out = np.zeros((len(labels), self.dim))
        for i, label in enumerate(labels):
            out[i, LABEL_INDEX[label]] = 1.0
        return out


@dataclass
class HeadParams:
    weight: np.ndarray  # (classes, input_dim)
    bias: np.ndarray  # (classes,)


@dataclass
class CorrectionModel:
    vocab: Vocabulary
    encoder: EncoderParams
    label_embedder: LabelEmbedder
    head: HeadParams
    use_noisy_input: bool = True

    @property
    def input_dim(self) -> int:
        dim = self.encoder.hidden_dim
        if self.use_noisy_input:
            dim += self.label_embedder.dim
        return dim

    def check(self) -> None:
        self.encoder.check(self.vocab.size)
        if self.head.weight.shape != (NUM_LABELS, self.input_dim):
            raise ConfigError(
                f"correction head shape {self.head.weight.shape}, "
                f"expected {(NUM_LABELS, self.input_dim)}"
            )


@dataclass
class TaggerModel:
    vocab: Vocabulary
    encoder: EncoderParams
    tasks: TaskConfig
    heads: list[HeadParams]
    alphas: np.ndarray  # (T,) task weights
    descriptors: list[TaskDescriptor] = field(init=False)

    def __post_init__(self):
        self.descriptors = describe_tasks(self.tasks)

    def check(self) -> None:
        self.encoder.check(self.vocab.size)
        expected = task_count(self.tasks)
        if len(self.heads) != expected:
            raise ConfigError(f"{len(self.heads)} heads for {expected} tasks")
        if self.alphas.shape != (expected,):
            raise ConfigError(f"{self.alphas.shape[0]} task weights for {expected} tasks")
        h = self.encoder.hidden_dim
        for head, task in zip(self.heads, self.descriptors):
            if head.weight.shape != (task.num_classes, h):
                raise ConfigError(
                    f"head for {task} has shape {head.weight.shape}, "
                    f"expected {(task.num_classes, h)}"
                )

    @property
    def main_head(self) -> HeadParams:
        return self.heads[-1]


def default_alphas(count: int) -> np.ndarray:
    return np.full(count, 1.0 / count)


INIT_SCALE = 0.1


def _init_encoder(vocab: Vocabulary, cfg: ModelConfig, rng: np.random.Generator) -> EncoderParams:
    window = 2 * cfg.radius + 1
    return EncoderParams(
        embeddings=rng.uniform(-INIT_SCALE, INIT_SCALE, (vocab.size, cfg.embedding_dim)),
        projection=rng.uniform(-INIT_SCALE, INIT_SCALE, (cfg.hidden_dim, window * cfg.embedding_dim)),
        bias=np.zeros(cfg.hidden_dim),
        radius=cfg.radius,
    )


def _init_head(classes: int, input_dim: int, rng: np.random.Generator) -> HeadParams:
    return HeadParams(
        weight=rng.uniform(-INIT_SCALE, INIT_SCALE, (classes, input_dim)),
        bias=np.zeros(classes),
    )


def init_correction_model(
    vocab: Vocabulary, cfg: ModelConfig, seed: int, use_noisy_input: bool = True
) -> CorrectionModel:
    """Seeded uniform(-0.1, 0.1) initialization, biases zero."""
    rng = np.random.default_rng(seed)
    encoder = _init_encoder(vocab, cfg, rng)
    input_dim = cfg.hidden_dim + (cfg.label_dim if use_noisy_input else 0)
    model = CorrectionModel(
        vocab=vocab,
        encoder=encoder,
        label_embedder=LabelEmbedder(cfg.label_dim),
        head=_init_head(NUM_LABELS, input_dim, rng),
        use_noisy_input=use_noisy_input,
    )
    model.check()
    return model


def init_tagger_model(
    vocab: Vocabulary,
    tasks: TaskConfig,
    cfg: ModelConfig,
    seed: int,
    alphas: Sequence[float] | None = None,
) -> TaggerModel:
    rng = np.random.default_rng(seed)
    encoder = _init_encoder(vocab, cfg, rng)
    descriptors = describe_tasks(tasks)
    heads = [_init_head(task.num_classes, cfg.hidden_dim, rng) for task in descriptors]
    if alphas is None:
        weights = default_alphas(len(descriptors))
    else:
        weights = np.asarray(alphas, dtype=float)
    model = TaggerModel(vocab=vocab, encoder=encoder, tasks=tasks, heads=heads, alphas=weights)
    model.check()
    return model


# ---------------------------------------------------------------------------
# Forward passes
#
# Batches are processed as one stacked token matrix: the window id matrix
# holds, for every token position, the vocabulary ids of its context window
# (BOUNDARY past the sentence edges), so gathering, projecting and the
# embedding scatter in the backward pass are single numpy calls.
# ---------------------------------------------------------------------------


def _window_id_matrix(tokens: Sequence[str], vocab: Vocabulary, radius: int) -> np.ndarray:
    """Per-token context-window vocabulary ids, shape (len(tokens), 2w+1)."""
    ids = vocab.ids(tokens)
    pad = np.full(radius, BOUNDARY_ID, dtype=np.int64)
    padded = np.concatenate([pad, ids, pad])
    window = np.arange(len(tokens))[:, None] + np.arange(2 * radius + 1)[None, :]
    return padded[window]


def _stack_window_ids(token_seqs, vocab: Vocabulary, radius: int) -> np.ndarray:
    rows = [_window_id_matrix(tokens, vocab, radius) for tokens in token_seqs]
    if not rows:
        return np.zeros((0, 2 * radius + 1), dtype=np.int64)
    return np.concatenate(rows, axis=0)


def _hidden_from_ids(window_ids: np.ndarray, enc: EncoderParams):
    """Concatenated window inputs and tanh representations for stacked tokens."""
    concat = enc.embeddings[window_ids].reshape(window_ids.shape[0], -1)
    hidden = np.tanh(concat @ enc.projection.T + enc.bias)
    return concat, hidden


def encode(tokens: Sequence[str], vocab: Vocabulary, enc: EncoderParams) -> np.ndarray:
    """Per-token representations, shape (len(tokens), hidden_dim)."""
    enc.check(vocab.size)
    return _hidden_from_ids(_window_id_matrix(tokens, vocab, enc.radius), enc)[1]


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(_log_softmax(logits))


def _correction_batch(pairs, model: CorrectionModel):
    """Stacked window ids, features and gold indices for a batch of pairs."""
    pairs = list(pairs)
    model.check()
    window_ids = _stack_window_ids((p.tokens for p in pairs), model.vocab, model.encoder.radius)
    concat, hidden = _hidden_from_ids(window_ids, model.encoder)
    if model.use_noisy_input:
        onehots = np.concatenate([model.label_embedder.matrix(p.noisy) for p in pairs])
        features = np.concatenate([hidden, onehots], axis=1)
    else:
        features = hidden
    gold = np.array(
        [LABEL_INDEX[label] for p in pairs for label in p.gold], dtype=np.int64
    )
    return window_ids, concat, hidden, features, gold


def correction_forward(
    tokens: Sequence[str], noisy: Sequence[Iob2Label], model: CorrectionModel
) -> np.ndarray:
    """Per-token probability distributions over the 9 labels, shape (m, 9)."""
    if len(tokens) != len(noisy):
        raise ShapeError(f"{len(tokens)} tokens but {len(noisy)} noisy labels")
    model.check()
    window_ids = _window_id_matrix(tokens, model.vocab, model.encoder.radius)
    hidden = _hidden_from_ids(window_ids, model.encoder)[1]
    if model.use_noisy_input:
        features = np.concatenate([hidden, model.label_embedder.matrix(noisy)], axis=1)
    else:
        features = hidden
    return softmax(features @ model.head.weight.T + model.head.bias)


def multitask_forward(tokens: Sequence[str], model: TaggerModel) -> list[np.ndarray]:
    """One (m, classes) probability matrix per task, in canonical task order."""
    model.check()
    hidden = encode(tokens, model.vocab, model.encoder)
    return [softmax(hidden @ head.weight.T + head.bias) for head in model.heads]


# ---------------------------------------------------------------------------
# Losses (mean negative log-likelihood per token) and analytic gradients
# ---------------------------------------------------------------------------


def correction_loss(pairs, model: CorrectionModel) -> float:
    """Mean over tokens of -log p(gold label | token context, noisy label)."""
    _, _, _, features, gold = _correction_batch(pairs, model)
    if gold.size == 0:
        raise ShapeError("loss is undefined on an empty batch")
    log_probs = _log_softmax(features @ model.head.weight.T + model.head.bias)
    return -log_probs[np.arange(gold.size), gold].sum() / gold.size


def multitask_loss(
    tokens: Sequence[str], task_labels: Sequence[Sequence[int]], model: TaggerModel
) -> float:
    """Task-weighted NLL summed over tasks, averaged over the sentence's tokens."""
    if len(task_labels) != len(tokens):
        raise ShapeError(f"{len(tokens)} tokens but {len(task_labels)} task-label rows")
    return tagger_batch_loss([(tuple(tokens), np.asarray(task_labels))], model)


def _tagger_batch(batch, model: TaggerModel):
    model.check()
    for tokens, matrix in batch:
        matrix = np.asarray(matrix)
        if matrix.shape != (len(tokens), len(model.heads)):
            raise ShapeError(
                f"task-label matrix {matrix.shape} does not match "
                f"({len(tokens)}, {len(model.heads)})"
            )
    window_ids = _stack_window_ids(
        (tokens for tokens, _ in batch), model.vocab, model.encoder.radius
    )
    targets = (
        np.concatenate([np.asarray(matrix) for _, matrix in batch])
        if batch
        else np.zeros((0, len(model.heads)), dtype=np.int64)
    )
    return window_ids, targets


def tagger_batch_loss(batch, model: TaggerModel) -> float:
    """Batch variant of multitask_loss over (tokens, task-label matrix) pairs."""
    window_ids, targets = _tagger_batch(batch, model)
    n_tokens = targets.shape[0]
    if n_tokens == 0:
        raise ShapeError("loss is undefined on an empty batch")
    hidden = _hidden_from_ids(window_ids, model.encoder)[1]
    rows = np.arange(n_tokens)
    total = 0.0
    for h, head in enumerate(model.heads):
        log_probs = _log_softmax(hidden @ head.weight.T + head.bias)
        total -= model.alphas[h] * log_probs[rows, targets[:, h]].sum()
    return total / n_tokens


def correction_loss_and_grads(pairs, model: CorrectionModel):
    """Loss plus analytic gradients for every trainable tensor.

    Returns (loss, grads, token_count) with grads keyed like model_tensors.
    """
    window_ids, concat, hidden, features, gold = _correction_batch(pairs, model)
    n_tokens = gold.size
    if n_tokens == 0:
        raise ShapeError("gradient is undefined on an empty batch")
    grads = {name: np.zeros_like(tensor) for name, tensor in model_tensors(model).items()}
    scale = 1.0 / n_tokens
    h_dim = model.encoder.hidden_dim

    log_probs = _log_softmax(features @ model.head.weight.T + model.head.bias)
    rows = np.arange(n_tokens)
    total = -log_probs[rows, gold].sum() * scale

    d_logits = np.exp(log_probs)  # softmax probabilities
    d_logits[rows, gold] -= 1.0
    d_logits *= scale
    grads["head.weight"] += d_logits.T @ features
    grads["head.bias"] += d_logits.sum(axis=0)
    d_hidden = (d_logits @ model.head.weight)[:, :h_dim]
    _backprop_encoder(d_hidden, window_ids, concat, hidden, model.encoder, grads)
    return total, grads, n_tokens


def tagger_loss_and_grads(batch, model: TaggerModel):
    """Loss plus analytic gradients for a batch of (tokens, task matrix) pairs."""
    window_ids, targets = _tagger_batch(batch, model)
    n_tokens = targets.shape[0]
    if n_tokens == 0:
        raise ShapeError("gradient is undefined on an empty batch")
    grads = {name: np.zeros_like(tensor) for name, tensor in model_tensors(model).items()}
    scale = 1.0 / n_tokens
    concat, hidden = _hidden_from_ids(window_ids, model.encoder)
    rows = np.arange(n_tokens)
    total = 0.0
    d_hidden = np.zeros_like(hidden)
    for h, head in enumerate(model.heads):
        log_probs = _log_softmax(hidden @ head.weight.T + head.bias)
        total -= model.alphas[h] * log_probs[rows, targets[:, h]].sum() * scale
        d_logits = np.exp(log_probs)
        d_logits[rows, targets[:, h]] -= 1.0
        d_logits *= model.alphas[h] * scale
        grads[f"head.{h}.weight"] += d_logits.T @ hidden
        grads[f"head.{h}.bias"] += d_logits.sum(axis=0)
        d_hidden += d_logits @ head.weight
    _backprop_encoder(d_hidden, window_ids, concat, hidden, model.encoder, grads)
    return total, grads, n_tokens


def _backprop_encoder(d_hidden, window_ids, concat, hidden, enc, grads):
    """Push dLoss/dhidden back through tanh, the projection and the embeddings."""
    d_pre = d_hidden * (1.0 - hidden**2)  # tanh'
    grads["encoder.projection"] += d_pre.T @ concat
    grads["encoder.bias"] += d_pre.sum(axis=0)
    d_concat = d_pre @ enc.projection  # (N, (2w+1)*E)
    d_windows = d_concat.reshape(d_concat.shape[0], window_ids.shape[1], -1)
    np.add.at(grads["encoder.embeddings"], window_ids, d_windows)


def model_tensors(model) -> dict[str, np.ndarray]:
    """Live views of every trainable tensor, keyed for grads and updates."""
    tensors = {
        "encoder.embeddings": model.encoder.embeddings,
        "encoder.projection": model.encoder.projection,
        "encoder.bias": model.encoder.bias,
    }
    if isinstance(model, CorrectionModel):
        tensors["head.weight"] = model.head.weight
        tensors["head.bias"] = model.head.bias
    else:
        for h, head in enumerate(model.heads):
            tensors[f"head.{h}.weight"] = head.weight
            tensors[f"head.{h}.bias"] = head.bias
    return tensors


def finite_difference_grads(
    loss_fn: Callable[[], float], tensors: dict[str, np.ndarray], step: float = 1e-3
) -> dict[str, np.ndarray]:
    """Central finite differences of loss_fn w.r.t. every tensor coordinate.

    loss_fn must read the live tensors; each coordinate is perturbed in
    place and restored.
    """
    grads: dict[str, np.ndarray] = {}
    for name, tensor in tensors.items():
        grad = np.zeros_like(tensor)
        flat = tensor.reshape(-1)
        flat_grad = grad.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            up = loss_fn()
            flat[i] = original - step
            down = loss_fn()
            flat[i] = original
            flat_grad[i] = (up - down) / (2.0 * step)
        grads[name] = grad
    return grads


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------


def repair_iob2(labels: Sequence[Iob2Label]) -> list[Iob2Label]:
    """Minimal repair of an unconstrained per-token decode: an I-t whose
    predecessor is not B-t/I-t becomes B-t."""
    repaired: list[Iob2Label] = []
    prev_type = None
    for label in labels:
        if label.is_inside and prev_type is not label.entity_type:
            label = Iob2Label.begin(label.entity_type)
        repaired.append(label)
        prev_type = label.entity_type
    return repaired


def decode_correction(
    tokens: Sequence[str], noisy: Sequence[Iob2Label], model: CorrectionModel
) -> list[Iob2Label]:
    probs = correction_forward(tokens, noisy, model)
    return repair_iob2([LABELS[i] for i in probs.argmax(axis=1)])


def decode_main_task(tokens: Sequence[str], model: TaggerModel) -> list[Iob2Label]:
    hidden = encode(tokens, model.vocab, model.encoder)
    head = model.main_head
    probs = softmax(hidden @ head.weight.T + head.bias)
    return repair_iob2([LABELS[i] for i in probs.argmax(axis=1)])
