"""Versioned checkpoint files: tensors plus config and vocabulary.

The container is a numpy .npz archive (self-describing shapes). A
``format_version`` entry gates loading, and every tensor shape is checked
against the stored config before the model is accepted.
"""

from __future__ import annotations

import json

import numpy as np

from .model import ClassifierConfig, EncoderParams
from .vocab import Vocabulary

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_params(path: str, params: EncoderParams, config: ClassifierConfig, vocab: Vocabulary) -> None:
    vocab_payload = {
        "char_to_id": vocab.char_to_id,
        "pad_id": vocab.pad_id,
        "unk_id": vocab.unk_id,
    }
    np.savez(
        path,
        format_version=np.asarray(FORMAT_VERSION),
        config_json=np.asarray(config.to_json()),
        vocab_json=np.asarray(json.dumps(vocab_payload, ensure_ascii=False)),
        **params.tensors(),
    )


def load_params(path: str) -> tuple[EncoderParams, ClassifierConfig, Vocabulary]:
    try:
        archive = np.load(path, allow_pickle=False)
    except Exception as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    with archive:
        try:
            version = int(archive["format_version"])
        except KeyError:
            raise CheckpointError(f"{path}: not a classifier checkpoint") from None
        if version != FORMAT_VERSION:
            raise CheckpointError(
                f"{path}: format version {version} unsupported (expected {FORMAT_VERSION})"
            )
        config = ClassifierConfig(**json.loads(str(archive["config_json"])))
        raw_vocab = json.loads(str(archive["vocab_json"]))
        vocab = Vocabulary(
            char_to_id={k: int(v) for k, v in raw_vocab["char_to_id"].items()},
            pad_id=int(raw_vocab["pad_id"]),
            unk_id=int(raw_vocab["unk_id"]),
        )
        field_names = EncoderParams.__dataclass_fields__
        tensors = {}
        for name in field_names:
            if name not in archive:
                raise CheckpointError(f"{path}: missing tensor {name}")
            tensors[name] = archive[name]
    params = EncoderParams(**tensors)
    expected = params.expected_shapes(config, vocab.size)
    for name, tensor in params.tensors().items():
        if tensor.shape != expected[name]:
            raise CheckpointError(
                f"{path}: tensor {name} has shape {tensor.shape}, "
                f"config requires {expected[name]}"
            )
    params.check_finite()
    return params, config, vocab
