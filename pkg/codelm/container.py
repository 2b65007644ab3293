"""Model container ("CGRU" files).

Byte layout, all integers little-endian:

    offset 0   4 bytes   magic b"CGRU"
    offset 4   uint16    format version (currently 1)
    offset 6   uint32    metadata length L
    offset 10  L bytes   UTF-8 YAML metadata: cell_kind, vocab_size, embed_dim,
                         hidden_dim, use_bias, config (TrainConfig fields),
                         vocabulary (tokens in id order), tensors (name + shape
                         in storage order)
    offset 10+L          tensors in the declared order, each as float32 "<f4"
                         values in C order; nothing may follow the last tensor

Tensors are held as float64 in memory and rounded to float32 on save.
"""
from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from ._loguru import logger
from .config import TrainConfig, build_train_config
from .errors import ConfigError, ModelFormatError
from .model import TENSOR_ORDER, ModelParams
from .vocabulary import Vocabulary

MAGIC = b"CGRU"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHI")


@dataclass(slots=True)
class ModelBundle:
    params: ModelParams
    vocab: Vocabulary
    config: TrainConfig


def save_model(params: ModelParams, vocab: Vocabulary, config: TrainConfig, path: str | Path) -> None:
    params.check()
    if vocab.size != params.vocab_size:
        raise ModelFormatError(f"vocabulary has {vocab.size} entries, model expects {params.vocab_size}", 0)

    names = list(TENSOR_ORDER[params.cell_kind])
    metadata = {
        "cell_kind": params.cell_kind,
        "vocab_size": params.vocab_size,
        "embed_dim": params.embed_dim,
        "hidden_dim": params.hidden_dim,
        "use_bias": params.use_bias,
        "config": config.model_dump(),
        "vocabulary": list(vocab.id_to_token),
        "tensors": [{"name": name, "shape": list(params.tensors[name].shape)} for name in names],
    }
    meta_bytes = yaml.safe_dump(metadata, allow_unicode=True, sort_keys=False).encode("utf-8")
    chunks = [_HEADER.pack(MAGIC, FORMAT_VERSION, len(meta_bytes)), meta_bytes]
    for name in names:
        chunks.append(np.ascontiguousarray(params.tensors[name], dtype="<f4").tobytes())

    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=out.name, suffix=".tmp", dir=out.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            for chunk in chunks:
                fh.write(chunk)
        os.replace(tmp_name, out)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    logger.info("Saved {cell} model ({vocab} tokens) to {path}", cell=params.cell_kind, vocab=vocab.size, path=out)


def load_model(path: str | Path) -> ModelBundle:
    data = Path(path).read_bytes()
    bundle = parse_model(data)
    logger.info("Loaded {cell} model from {path}", cell=bundle.params.cell_kind, path=path)
    return bundle


def parse_model(data: bytes) -> ModelBundle:
    if len(data) < _HEADER.size:
        raise ModelFormatError("file shorter than header", len(data))
    magic, version, meta_len = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}", 0)
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {version}", 4)

    offset = _HEADER.size
    if offset + meta_len > len(data):
        raise ModelFormatError("truncated metadata block", len(data))
    try:
        metadata = yaml.safe_load(data[offset : offset + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, yaml.YAMLError) as exc:
        raise ModelFormatError(f"unreadable metadata: {exc}", offset) from exc
    if not isinstance(metadata, dict):
        raise ModelFormatError("metadata is not a mapping", offset)
    offset += meta_len

    try:
        cell_kind = metadata["cell_kind"]
        params = ModelParams(
            cell_kind=cell_kind,
            vocab_size=int(metadata["vocab_size"]),
            embed_dim=int(metadata["embed_dim"]),
            hidden_dim=int(metadata["hidden_dim"]),
            tensors={},
            use_bias=bool(metadata.get("use_bias", True)),
        )
        declared = [(item["name"], tuple(int(d) for d in item["shape"])) for item in metadata["tensors"]]
        vocab = Vocabulary.from_tokens([str(tok) for tok in metadata["vocabulary"]])
        config = build_train_config(**metadata["config"])
    except (KeyError, TypeError, ValueError, ConfigError) as exc:
        raise ModelFormatError(f"incomplete metadata: {exc}", _HEADER.size) from exc

    if cell_kind not in TENSOR_ORDER or [name for name, _ in declared] != list(TENSOR_ORDER[cell_kind]):
        raise ModelFormatError("tensor list does not match the cell kind", _HEADER.size)

    for name, shape in declared:
        if shape != params.expected_shape(name):
            raise ModelFormatError(f"tensor {name} declared with shape {shape}", _HEADER.size)
        count = int(np.prod(shape))
        nbytes = count * 4
        if offset + nbytes > len(data):
            raise ModelFormatError(f"truncated tensor {name}", len(data))
        values = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
        params.tensors[name] = values.astype(np.float64).reshape(shape)
        offset += nbytes

    if offset != len(data):
        raise ModelFormatError("trailing bytes after last tensor", offset)
    if vocab.size != params.vocab_size:
        raise ModelFormatError("vocabulary size does not match vocab_size", _HEADER.size)
    return ModelBundle(params=params, vocab=vocab, config=config)
