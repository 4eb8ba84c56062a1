"""Binary checkpoints of MetaQuantNet parameters.

Layout: 8-byte magic, little-endian uint64 manifest length, UTF-8 JSON
manifest, then every parameter as contiguous little-endian float32 in
descriptor order.  Descriptor offsets are relative to the payload start and
tile it exactly.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..constants import CHECKPOINT_FORMAT_VERSION, CHECKPOINT_MAGIC
from ..errors import FormatError
from ..hypernet import MetaQuantNet
from ..target_net import get_spec

logger = logging.getLogger(__name__)

_LENGTH = struct.Struct("<Q")
_PAYLOAD_DTYPE = np.dtype("<f4")


@dataclass
class Checkpoint:
    manifest: dict[str, Any]
    arrays: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def final_loss(self) -> float | None:
        value = self.manifest.get("final_loss")
        return None if value is None else float(value)

    @property
    def loss_policy(self) -> tuple[int, ...] | None:
        value = self.manifest.get("loss_policy")
        return None if value is None else tuple(int(q) for q in value)


def save_checkpoint(
    net: MetaQuantNet,
    path: Path,
    final_loss: float | None = None,
    loss_policy: tuple[int, ...] | None = None,
) -> Path:
    descriptors = []
    chunks = []
    offset = 0
    for name, tensor in net.parameters().items():
        raw = np.ascontiguousarray(tensor.data, dtype=_PAYLOAD_DTYPE).tobytes()
        descriptors.append({"name": name, "shape": list(tensor.shape), "offset": offset, "length": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    manifest = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "spec": net.spec.name,
        "class_count": net.spec.class_count,
        "input_shape": list(net.spec.input_shape),
        "bit_range": list(net.bit_range),
        "hidden": net.hidden,
        "ste_clip": net.ste_clip,
        "quantize": net.quantize,
        "final_loss": final_loss,
        "loss_policy": list(loss_policy) if loss_policy is not None else None,
        "tensors": descriptors,
    }
    header = json.dumps(manifest, sort_keys=True).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        handle.write(CHECKPOINT_MAGIC)
        handle.write(_LENGTH.pack(len(header)))
        handle.write(header)
        for chunk in chunks:
            handle.write(chunk)
    logger.debug("Saved %d tensors (%d payload bytes) to %s", len(descriptors), offset, path)
    return path


def load_checkpoint(path: Path) -> Checkpoint:
    blob = path.read_bytes()
    magic_end = len(CHECKPOINT_MAGIC)
    if blob[:magic_end] != CHECKPOINT_MAGIC:
        raise FormatError(f"{path} is not a MetaQuant checkpoint", 0)
    if len(blob) < magic_end + _LENGTH.size:
        raise FormatError(f"{path} is truncated inside the header", len(blob))
    (header_length,) = _LENGTH.unpack_from(blob, magic_end)
    header_start = magic_end + _LENGTH.size
    payload_start = header_start + header_length
    if payload_start > len(blob):
        raise FormatError(f"{path} manifest runs past the end of file", len(blob))
    try:
        manifest = json.loads(blob[header_start:payload_start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path} has an unreadable manifest: {exc}", header_start) from exc
    if not isinstance(manifest, dict):
        raise FormatError(f"{path} manifest is not a JSON object", header_start)
    if manifest.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise FormatError(f"{path} has unsupported format version {manifest.get('format_version')!r}", header_start)

    payload = memoryview(blob)[payload_start:]
    arrays: dict[str, np.ndarray] = {}
    expected = 0
    for descriptor in manifest.get("tensors", []):
        try:
            name = str(descriptor["name"])
            offset, length = int(descriptor["offset"]), int(descriptor["length"])
            shape = tuple(int(d) for d in descriptor["shape"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path} has a malformed tensor descriptor: {exc!r}", header_start) from exc
        if offset != expected:
            raise FormatError(f"tensor {name} does not follow its predecessor", payload_start + offset)
        if length != int(np.prod(shape)) * _PAYLOAD_DTYPE.itemsize or offset + length > len(payload):
            raise FormatError(f"tensor {name} has a bad length {length}", payload_start + offset)
        values = np.frombuffer(payload[offset : offset + length], dtype=_PAYLOAD_DTYPE)
        arrays[name] = values.reshape(shape).astype(np.float32)
        expected = offset + length
    if expected != len(payload):
        raise FormatError(f"{path} has {len(payload) - expected} trailing payload bytes", payload_start + expected)
    return Checkpoint(manifest=manifest, arrays=arrays)


def restore_net(checkpoint: Checkpoint) -> MetaQuantNet:
    """Rebuild the hypernetwork described by ``checkpoint`` and load its parameters."""
    manifest = checkpoint.manifest
    try:
        input_shape = tuple(manifest["input_shape"])
        spec_name = str(manifest["spec"])
        class_count = int(manifest["class_count"])
        hidden = int(manifest["hidden"])
        ste_clip = float(manifest["ste_clip"])
        bit_range = (int(manifest["bit_range"][0]), int(manifest["bit_range"][1]))
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise FormatError(f"checkpoint manifest is missing or mangles a field: {exc!r}") from exc
    spec = get_spec(spec_name, class_count=class_count, image_size=int(input_shape[-1]))
    net = MetaQuantNet(
        spec,
        hidden=hidden,
        ste_clip=ste_clip,
        bit_range=bit_range,
        quantize=bool(manifest.get("quantize", True)),
    )
    net.load_parameters(checkpoint.arrays)
    return net
