"""Deterministic flat-binary checkpoint container.

Layout:  8-byte magic ``SSCKPT1\\n`` | uint64 little-endian manifest length |
UTF-8 JSON manifest (sorted keys, no whitespace) | raw float64 little-endian
C-order tensor data, concatenated in manifest order (tensors sorted by name).

The format contains no timestamps and no environment-dependent fields, so
saving the same tensors/config/seed twice yields byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import CheckpointError

__all__ = ["Checkpoint", "save_checkpoint", "load_checkpoint", "config_hash"]

MAGIC = b"SSCKPT1\n"
FORMAT_VERSION = 1


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(config: Mapping) -> str:
    """Stable hex digest of a JSON-safe config mapping."""
    return hashlib.sha256(_canonical_json(dict(config)).encode("utf-8")).hexdigest()[:16]


@dataclass
class Checkpoint:
    tensors: dict[str, np.ndarray]
    config: dict
    seed: int | None
    extra: dict
    config_digest: str


def save_checkpoint(
    path: str | Path,
    tensors: Mapping[str, np.ndarray],
    config: Mapping,
    seed: int | None = None,
    extra: Mapping | None = None,
) -> None:
    names = sorted(tensors)
    entries = []
    offset = 0
    blobs = []
    for name in names:
        arr = np.ascontiguousarray(np.asarray(tensors[name], dtype=np.float64))
        raw = arr.astype("<f8", copy=False).tobytes()
        entries.append({
            "name": name,
            "shape": list(arr.shape),
            "offset": offset,
            "nbytes": len(raw),
        })
        offset += len(raw)
        blobs.append(raw)
    manifest = {
        "format": FORMAT_VERSION,
        "seed": seed,
        "config": dict(config),
        "config_hash": config_hash(config),
        "extra": dict(extra) if extra else {},
        "tensors": entries,
    }
    manifest_bytes = _canonical_json(manifest).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(manifest_bytes).to_bytes(8, "little"))
        fh.write(manifest_bytes)
        for raw in blobs:
            fh.write(raw)


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    data = path.read_bytes()
    if len(data) < len(MAGIC) + 8 or data[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"bad checkpoint magic in {path}")
    man_len = int.from_bytes(data[len(MAGIC): len(MAGIC) + 8], "little")
    man_start = len(MAGIC) + 8
    if man_start + man_len > len(data):
        raise CheckpointError(f"truncated checkpoint manifest in {path}")
    try:
        manifest = json.loads(data[man_start: man_start + man_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"unreadable checkpoint manifest in {path}") from exc
    if manifest.get("format") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format {manifest.get('format')!r}")
    blob = data[man_start + man_len:]
    tensors: dict[str, np.ndarray] = {}
    for entry in manifest["tensors"]:
        start, nbytes = entry["offset"], entry["nbytes"]
        if start + nbytes > len(blob):
            raise CheckpointError(f"tensor {entry['name']!r} overruns checkpoint data")
        arr = np.frombuffer(blob[start: start + nbytes], dtype="<f8")
        shape = tuple(entry["shape"])
        if arr.size != int(np.prod(shape, dtype=np.int64)):
            raise CheckpointError(f"tensor {entry['name']!r} size mismatch")
        tensors[entry["name"]] = arr.reshape(shape).astype(np.float64).copy()
    stored = manifest.get("config_hash")
    recomputed = config_hash(manifest.get("config", {}))
    if stored != recomputed:
        raise CheckpointError(f"config hash mismatch in {path}: "
                              f"manifest says {stored}, contents give {recomputed}")
    return Checkpoint(
        tensors=tensors,
        config=manifest.get("config", {}),
        seed=manifest.get("seed"),
        extra=manifest.get("extra", {}),
        config_digest=stored,
    )
