"""Model checkpoints as deterministic JSON.

The container stores the vocabulary, every parameter tensor with its
shape, the task configuration and the training seed. Serialization is
canonical (sorted keys, shortest round-trip float repr), so
save -> load -> save is byte-stable.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import CheckpointError
from .model import (
    CorrectionModel,
    EncoderParams,
    HeadParams,
    LabelEmbedder,
    TaggerModel,
    Vocabulary,
)
from .tasks import TaskConfig

FORMAT = "wsner-checkpoint"
VERSION = 1


def _tensor_payload(tensor: np.ndarray) -> dict:
    return {"shape": list(tensor.shape), "data": tensor.ravel().tolist()}


def _tensor_from_payload(payload, what: str) -> np.ndarray:
    try:
        shape = tuple(payload["shape"])
        data = np.array(payload["data"], dtype=float)
        return data.reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed tensor {what!r}: {exc}") from exc


def _head_payload(head: HeadParams) -> dict:
    return {"weight": _tensor_payload(head.weight), "bias": _tensor_payload(head.bias)}


def _head_from_payload(payload, what: str) -> HeadParams:
    return HeadParams(
        weight=_tensor_from_payload(payload["weight"], f"{what}.weight"),
        bias=_tensor_from_payload(payload["bias"], f"{what}.bias"),
    )


def save_checkpoint(path, model, seed: int) -> None:
    payload = {
        "format": FORMAT,
        "version": VERSION,
        "seed": seed,
        "vocab": model.vocab.tokens_by_id(),
        "encoder": {
            "radius": model.encoder.radius,
            "embeddings": _tensor_payload(model.encoder.embeddings),
            "projection": _tensor_payload(model.encoder.projection),
            "bias": _tensor_payload(model.encoder.bias),
        },
    }
    if isinstance(model, CorrectionModel):
        payload["kind"] = "correction"
        payload["correction"] = {
            "label_dim": model.label_embedder.dim,
            "use_noisy_input": model.use_noisy_input,
            "head": _head_payload(model.head),
        }
    elif isinstance(model, TaggerModel):
        payload["kind"] = "tagger"
        payload["tagger"] = {
            "binary_windows": list(model.tasks.binary_windows),
            "positional_windows": list(model.tasks.positional_windows),
            "alphas": model.alphas.tolist(),
            "heads": [_head_payload(h) for h in model.heads],
        }
    else:
        raise CheckpointError(f"cannot checkpoint object of type {type(model).__name__}")
    text = json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_checkpoint(path):
    """Read a checkpoint; returns (model, seed)."""
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: not a checkpoint file: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT:
        raise CheckpointError(f"{path}: not a {FORMAT} file")
    if payload.get("version") != VERSION:
        raise CheckpointError(
            f"{path}: unsupported checkpoint version {payload.get('version')!r}"
        )
    try:
        vocab = Vocabulary.from_token_list(payload["vocab"])
        enc = payload["encoder"]
        encoder = EncoderParams(
            embeddings=_tensor_from_payload(enc["embeddings"], "encoder.embeddings"),
            projection=_tensor_from_payload(enc["projection"], "encoder.projection"),
            bias=_tensor_from_payload(enc["bias"], "encoder.bias"),
            radius=int(enc["radius"]),
        )
        seed = int(payload["seed"])
        kind = payload["kind"]
        if kind == "correction":
            section = payload["correction"]
            model = CorrectionModel(
                vocab=vocab,
                encoder=encoder,
                label_embedder=LabelEmbedder(int(section["label_dim"])),
                head=_head_from_payload(section["head"], "head"),
                use_noisy_input=bool(section["use_noisy_input"]),
            )
        elif kind == "tagger":
            section = payload["tagger"]
            tasks = TaskConfig(
                binary_windows=tuple(int(w) for w in section["binary_windows"]),
                positional_windows=tuple(int(w) for w in section["positional_windows"]),
            )
            model = TaggerModel(
                vocab=vocab,
                encoder=encoder,
                tasks=tasks,
                heads=[
                    _head_from_payload(h, f"head.{i}")
                    for i, h in enumerate(section["heads"])
                ],
                alphas=np.array(section["alphas"], dtype=float),
            )
        else:
            raise CheckpointError(f"{path}: unknown model kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: malformed checkpoint: {exc}") from exc
    model.check()
    return model, seed
