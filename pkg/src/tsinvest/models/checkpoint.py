"""Checkpoint directory format: manifest.json describing every tensor
(name, shape, dtype, learnable flag) plus config, vocabulary and feature
schema hash; params.bin holds the raw little-endian float64 payload
concatenated in manifest order. Round-trips are bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..data.schema import schema_hash
from ..data.vocab import CategoryVocabulary
from ..errors import SchemaMismatchError, ValidationError
from .config import config_from_json
from .registry import build_model

MANIFEST = "manifest.json"
PARAMS_BIN = "params.bin"


def save_checkpoint(directory, model, vocab: CategoryVocabulary,
                    task: str) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    chunks = []
    for name, p in model.params.items():
        entries.append({"name": name, "shape": list(p.shape), "dtype": "f64",
                        "learnable": True})
        chunks.append(p.data.astype("<f8").tobytes())
    for name, buf in model.buffers().items():
        entries.append({"name": name, "shape": list(buf.shape), "dtype": "f64",
                        "learnable": False})
        chunks.append(np.asarray(buf).astype("<f8").tobytes())
    manifest = {
        "model": model.name,
        "task": task,
        "config": model.config.to_json(),
        "vocab_size": model.vocab_size,
        "vocabulary": vocab.to_json(),
        "schema_hash": schema_hash(),
        "tensors": entries,
    }
    (directory / PARAMS_BIN).write_bytes(b"".join(chunks))
    with open(directory / MANIFEST, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)


def load_checkpoint(directory):
    """Returns (model, vocabulary, task). Verifies the schema hash."""
    directory = Path(directory)
    with open(directory / MANIFEST, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("schema_hash") != schema_hash():
        raise SchemaMismatchError(
            f"checkpoint {directory} was built against feature schema "
            f"{manifest.get('schema_hash')}, current is {schema_hash()}")
    config = config_from_json(manifest["model"], manifest["config"])
    model = build_model(manifest["model"], config, manifest["vocab_size"], seed=0)
    raw = (directory / PARAMS_BIN).read_bytes()
    offset = 0
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape)) if shape else 1
        block = np.frombuffer(raw, dtype="<f8", count=n, offset=offset)
        offset += n * 8
        value = block.reshape(shape).astype(np.float64)
        if entry["learnable"]:
            if entry["name"] not in model.params:
                raise ValidationError(
                    f"checkpoint tensor {entry['name']} unknown to model "
                    f"{manifest['model']}")
            model.params[entry["name"]].data = value
        else:
            model.set_buffer(entry["name"], value)
    if offset != len(raw):
        raise ValidationError(
            f"checkpoint payload has {len(raw) - offset} trailing bytes")
    vocab = CategoryVocabulary.from_json(manifest["vocabulary"])
    return model, vocab, manifest["task"]
