"""Binary checkpoint format for codec parameters.

Layout: magic ``RGWM`` | u32 version | u32 header length | JSON header |
payload of little-endian float32 values.  The header records the architecture
descriptor, per-parameter shapes and byte offsets into the payload, a config
hash, and the training seed.  Loading validates every field and round-trips
bit-exactly.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .codec import CodecConfig, CodecParams, _param_shapes

MAGIC = b"RGWM"
VERSION = 1


class CheckpointError(ValueError):
    """Malformed or inconsistent checkpoint file."""


def save_checkpoint(params: CodecParams, path, seed=0, config_hash=""):
    """Write parameters to ``path``; returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    entries = []
    chunks = []
    offset = 0
    for name, node in params.params.items():
        data = np.ascontiguousarray(node.value.astype("<f4"))
        raw = data.tobytes()
        entries.append({"name": name, "shape": list(data.shape), "offset": offset})
        chunks.append(raw)
        offset += len(raw)
    header = {
        "architecture": params.config.to_dict(),
        "seed": int(seed),
        "config_hash": str(config_hash),
        "params": entries,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<I", len(header_bytes)))
        f.write(header_bytes)
        f.write(b"".join(chunks))
    return path


def load_checkpoint(path, expected_config_hash=None):
    """Read parameters back; returns (CodecParams, header dict).

    Validates the magic, version, header contents, parameter names/shapes
    against the architecture descriptor, payload offsets (in-range and
    non-overlapping), and optionally the stored config hash.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12:
        raise CheckpointError(f"checkpoint truncated: {len(raw)} bytes")
    if raw[:4] != MAGIC:
        raise CheckpointError(f"bad magic {raw[:4]!r}, expected {MAGIC!r}")
    version = struct.unpack("<I", raw[4:8])[0]
    if version != VERSION:
        raise CheckpointError(f"unsupported version {version}, expected {VERSION}")
    header_len = struct.unpack("<I", raw[8:12])[0]
    if len(raw) < 12 + header_len:
        raise CheckpointError("checkpoint truncated inside header")
    try:
        header = json.loads(raw[12:12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"unreadable header: {exc}") from exc
    for key in ("architecture", "seed", "config_hash", "params"):
        if key not in header:
            raise CheckpointError(f"header missing field '{key}'")
    if expected_config_hash is not None and header["config_hash"] != expected_config_hash:
        raise CheckpointError(
            f"config_hash mismatch: checkpoint has {header['config_hash']!r}, "
            f"expected {expected_config_hash!r}")

    config = CodecConfig.from_dict(header["architecture"])
    expected_shapes = _param_shapes(config)
    payload = raw[12 + header_len:]

    entries = header["params"]
    names = [e.get("name") for e in entries]
    if sorted(names) != sorted(expected_shapes):
        missing = sorted(set(expected_shapes) - set(names))
        extra = sorted(set(names) - set(expected_shapes))
        raise CheckpointError(f"parameter set mismatch: missing {missing}, unexpected {extra}")

    spans = []
    params = {}
    for entry in entries:
        name = entry["name"]
        shape = tuple(entry["shape"])
        if shape != expected_shapes[name]:
            raise CheckpointError(
                f"parameter '{name}' has shape {shape}, expected {expected_shapes[name]}")
        offset = int(entry["offset"])
        nbytes = int(np.prod(shape)) * 4
        if offset < 0 or offset + nbytes > len(payload):
            raise CheckpointError(f"parameter '{name}' payload span out of range")
        spans.append((offset, offset + nbytes, name))
        arr = np.frombuffer(payload, dtype="<f4", count=int(np.prod(shape)),
                            offset=offset).reshape(shape)
        params[name] = ad.parameter(arr.astype(np.float32))
    spans.sort()
    for (s0, e0, n0), (s1, e1, n1) in zip(spans, spans[1:]):
        if s1 < e0:
            raise CheckpointError(f"parameter payload overlap between '{n0}' and '{n1}'")
    ordered = {name: params[name] for name in expected_shapes}
    return CodecParams(config, ordered), header
