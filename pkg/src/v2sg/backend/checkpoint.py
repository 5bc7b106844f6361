"""Generator checkpoint container (magic ``V2SGGEN1``) and loading.

Same envelope as the trajectory format: magic, little-endian u32 manifest
length, JSON manifest, then concatenated f32le arrays in manifest order.
``load_pretrained`` accepts this toy format natively; checkpoints of real
generator families are integrated by registering an adapter callable.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import BinaryIO, Callable

import numpy as np
import torch

from ..errors import CorruptionError, FormatError, LoadError, UnsupportedVersionError
from .base import GeneratorBackend, GeneratorSpec
from .toy import ToyGenerator, ToyWeights

GENERATOR_MAGIC = b"V2SGGEN1"
_VERSION = 1

CACHE_ENV = "V2SG_CACHE"

_ADAPTERS: dict[str, Callable[[Path, Path | None], GeneratorBackend]] = {}


def register_adapter(name: str, loader: Callable[[Path, Path | None], GeneratorBackend]) -> None:
    """Register a loader for an external checkpoint family."""
    _ADAPTERS[name] = loader


def _array_entries(weights: ToyWeights) -> list[tuple[str, torch.Tensor]]:
    entries = [("freqs", weights.freqs), ("phases", weights.phases)]
    entries += [(f"affine_w.{l}", t) for l, t in enumerate(weights.affine_w)]
    entries += [(f"affine_b.{l}", t) for l, t in enumerate(weights.affine_b)]
    entries += [(f"mix.{l}", t) for l, t in enumerate(weights.mix)]
    entries.append(("rgb", weights.rgb))
    return entries


def write_generator(backend: ToyGenerator, destination: BinaryIO) -> int:
    entries = _array_entries(backend.weights)
    manifest = {
        "version": _VERSION,
        "kind": "toy",
        "layer_count": backend.spec.layer_count,
        "image_size": backend.spec.image_size,
        "frequency_count": backend.spec.frequency_count,
        "channel_widths": list(backend.spec.channel_widths),
        "seed": backend.spec.seed,
        "dtype": "f32le",
        "arrays": [{"name": n, "shape": list(t.shape)} for n, t in entries],
    }
    header = json.dumps(manifest, separators=(",", ":")).encode("utf-8")
    destination.write(GENERATOR_MAGIC)
    destination.write(len(header).to_bytes(4, "little"))
    destination.write(header)
    written = len(GENERATOR_MAGIC) + 4 + len(header)
    for _, t in entries:
        blob = np.ascontiguousarray(t.numpy(), dtype="<f4").tobytes()
        destination.write(blob)
        written += len(blob)
    return written


def save_generator(backend: ToyGenerator, path) -> int:
    with open(path, "wb") as fh:
        return write_generator(backend, fh)


def read_generator(source: BinaryIO) -> ToyGenerator:
    magic = source.read(len(GENERATOR_MAGIC))
    if magic != GENERATOR_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {GENERATOR_MAGIC!r}")
    raw_len = source.read(4)
    if len(raw_len) != 4:
        raise CorruptionError("truncated manifest length")
    header = source.read(int.from_bytes(raw_len, "little"))
    try:
        manifest = json.loads(header.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptionError(f"unreadable manifest: {exc}") from exc
    if manifest.get("version") != _VERSION:
        raise UnsupportedVersionError(f"unsupported checkpoint version {manifest.get('version')!r}")
    if manifest.get("kind") != "toy":
        raise FormatError(f"unknown checkpoint kind {manifest.get('kind')!r}")

    spec = GeneratorSpec(
        layer_count=manifest["layer_count"],
        channel_widths=tuple(manifest["channel_widths"]),
        image_size=manifest["image_size"],
        frequency_count=manifest["frequency_count"],
        seed=manifest["seed"],
    )
    arrays: dict[str, torch.Tensor] = {}
    for entry in manifest["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        blob = source.read(count * 4)
        if len(blob) != count * 4:
            raise CorruptionError(f"array {entry['name']!r} truncated")
        arr = np.frombuffer(blob, dtype="<f4").reshape(shape).astype(np.float64)
        arrays[entry["name"]] = torch.from_numpy(arr)
    try:
        weights = ToyWeights(
            freqs=arrays["freqs"],
            phases=arrays["phases"],
            affine_w=[arrays[f"affine_w.{l}"] for l in range(spec.layer_count)],
            affine_b=[arrays[f"affine_b.{l}"] for l in range(spec.layer_count)],
            mix=[arrays[f"mix.{l}"] for l in range(spec.layer_count)],
            rgb=arrays["rgb"],
        )
    except KeyError as exc:
        raise CorruptionError(f"checkpoint missing array {exc}") from exc
    return ToyGenerator(spec, weights)


def resolve_checkpoint(path) -> Path:
    """Resolve *path* directly or inside the $V2SG_CACHE directory."""
    p = Path(path)
    if p.exists():
        return p
    cache = os.environ.get(CACHE_ENV)
    if cache:
        candidate = Path(cache) / p
        if candidate.exists():
            return candidate
    raise LoadError(f"checkpoint not found: {path}")


def load_pretrained(path, finetuned_weights=None, family: str = "auto") -> GeneratorBackend:
    """Load a generator checkpoint; optional fine-tuned synthesis weights.

    The fine-tuned checkpoint replaces synthesis weights only; the affine
    (w -> s) maps stay addressable from the base checkpoint so mined channel
    catalogs remain valid.
    """
    if family not in ("auto", "toy") and family in _ADAPTERS:
        return _ADAPTERS[family](resolve_checkpoint(path),
                                 resolve_checkpoint(finetuned_weights) if finetuned_weights else None)
    resolved = resolve_checkpoint(path)
    try:
        with open(resolved, "rb") as fh:
            base = read_generator(fh)
    except (FormatError, CorruptionError, UnsupportedVersionError, OSError) as exc:
        raise LoadError(f"cannot load generator from {resolved}: {exc}") from exc
    if finetuned_weights is None:
        return base
    resolved_ft = resolve_checkpoint(finetuned_weights)
    try:
        with open(resolved_ft, "rb") as fh:
            tuned = read_generator(fh)
    except (FormatError, CorruptionError, UnsupportedVersionError, OSError) as exc:
        raise LoadError(f"cannot load fine-tuned weights from {resolved_ft}: {exc}") from exc
    try:
        return base.with_synthesis_weights(tuned)
    except Exception as exc:
        raise LoadError(f"incompatible fine-tuned weights: {exc}") from exc
