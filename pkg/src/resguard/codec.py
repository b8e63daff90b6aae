"""Toy watermark codec: residual-additive encoder and convolutional decoder.

Images are (H, W, C) float arrays in [0, 1]; messages are length-L bit vectors.
The encoder expands the message to a few spatial planes, concatenates them with
the host, runs a small conv stack, and adds a strength-scaled residual head to
the host.  The decoder is a conv stack with two 2x average pools and a sigmoid
head producing soft bits in (0, 1).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, asdict

import numpy as np

from . import autodiff as ad
from .autodiff import DiffNode, RngStream


@dataclass(frozen=True)
class CodecConfig:
    """Architecture descriptor; shapes of every parameter follow from it."""

    image_size: int = 32
    channels: int = 3
    message_length: int = 16
    hidden_channels: int = 32
    message_planes: int = 4
    strength: float = 0.05
    clamp_straight_through: bool = True

    def validate(self):
        if self.image_size < 8 or self.image_size % 4 != 0:
            raise ValueError(f"image_size must be >= 8 and divisible by 4, got {self.image_size}")
        if self.message_length < 1:
            raise ValueError("message_length must be >= 1")
        if self.strength < 0:
            raise ValueError("strength must be >= 0")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        cfg = cls(**d)
        cfg.validate()
        return cfg


def _param_shapes(cfg: CodecConfig):
    """Ordered name -> shape map for all trainable tensors."""
    h = cfg.image_size
    c = cfg.channels
    m = cfg.message_planes
    hid = cfg.hidden_channels
    L = cfg.message_length
    pooled = h // 4
    shapes = {
        "enc.msg_fc.w": (L, h * h * m),
        "enc.msg_fc.b": (h * h * m,),
        "enc.conv1.w": (3, 3, c + m, hid),
        "enc.conv1.b": (hid,),
        "enc.conv2.w": (3, 3, hid, hid),
        "enc.conv2.b": (hid,),
        "enc.conv3.w": (3, 3, hid, hid),
        "enc.conv3.b": (hid,),
        "enc.head.w": (3, 3, hid, c),
        "enc.head.b": (c,),
        "dec.conv1.w": (3, 3, c, hid),
        "dec.conv1.b": (hid,),
        "dec.conv2.w": (3, 3, hid, hid),
        "dec.conv2.b": (hid,),
        "dec.conv3.w": (3, 3, hid, hid),
        "dec.conv3.b": (hid,),
        "dec.conv4.w": (3, 3, hid, hid),
        "dec.conv4.b": (hid,),
        "dec.fc.w": (pooled * pooled * hid, L),
        "dec.fc.b": (L,),
    }
    return shapes


class CodecParams:
    """Named parameter tensors for one encoder/decoder pair."""

    def __init__(self, config: CodecConfig, params: dict[str, DiffNode]):
        self.config = config
        self.params = params

    @classmethod
    def init(cls, config: CodecConfig, rng: RngStream, dtype=np.float32):
        config.validate()
        params = {}
        for name, shape in _param_shapes(config).items():
            if name.endswith(".b"):
                arr = np.zeros(shape, dtype=dtype)
            else:
                if ".w" in name and "conv" in name:
                    fan_in = shape[0] * shape[1] * shape[2]
                    std = np.sqrt(2.0 / fan_in)  # He init for relu blocks
                else:
                    fan_in = shape[0] if len(shape) == 2 else int(np.prod(shape[:-1]))
                    std = np.sqrt(1.0 / fan_in)
                if name == "enc.head.w":
                    fan_in = shape[0] * shape[1] * shape[2]
                    std = np.sqrt(1.0 / fan_in)
                arr = rng.normal(shape, 0.0, std).astype(dtype)
            params[name] = ad.parameter(arr)
        return cls(config, params)

    def values(self):
        return {name: p.value for name, p in self.params.items()}

    def copy(self):
        return CodecParams(self.config, {n: ad.parameter(p.value.copy()) for n, p in self.params.items()})

    def hash_hex(self):
        """Digest of all parameter bytes (snapshot identity checks)."""
        h = hashlib.sha256()
        for name in sorted(self.params):
            h.update(name.encode())
            h.update(np.ascontiguousarray(self.params[name].value).tobytes())
        return h.hexdigest()

    @property
    def dtype(self):
        return next(iter(self.params.values())).value.dtype


# ---------------------------------------------------------------------------
# graph-level forward passes (used by the trainer and by the public API)
# ---------------------------------------------------------------------------

def _as_image_batch(x, cfg, dtype):
    node = x if isinstance(x, DiffNode) else ad.constant(np.asarray(x, dtype=dtype))
    v = node.value
    single = v.ndim == 3
    expected = (cfg.image_size, cfg.image_size, cfg.channels)
    if single:
        if v.shape != expected:
            raise ValueError(f"image shape {v.shape} does not match model {expected}")
        node = ad.reshape(node, (1,) + expected)
    elif v.ndim != 4 or v.shape[1:] != expected:
        raise ValueError(f"image batch shape {v.shape} does not match model {expected}")
    return node, single


def _as_message_batch(msgs, cfg, dtype, batch):
    arr = msgs.value if isinstance(msgs, DiffNode) else np.asarray(msgs, dtype=dtype)
    if arr.ndim == 1:
        arr = arr[None]
    if arr.ndim != 2 or arr.shape[1] != cfg.message_length:
        raise ValueError(
            f"message length {arr.shape[-1] if arr.ndim else 0} does not match model L={cfg.message_length}")
    if arr.shape[0] != batch:
        raise ValueError(f"got {arr.shape[0]} messages for {batch} images")
    if isinstance(msgs, DiffNode):
        return msgs if msgs.value.ndim == 2 else ad.reshape(msgs, arr.shape)
    return ad.constant(arr.astype(dtype))


def encode_residual(params: CodecParams, hosts: DiffNode, msgs: DiffNode) -> DiffNode:
    """Residual head of the encoder, before strength scaling and clamping."""
    cfg = params.config
    p = params.params
    n = hosts.value.shape[0]
    planes = ad.matmul(msgs, p["enc.msg_fc.w"]) + p["enc.msg_fc.b"]
    planes = ad.reshape(planes, (n, cfg.image_size, cfg.image_size, cfg.message_planes))
    x = ad.concat([hosts, planes], axis=3)
    x = ad.relu(ad.conv2d(x, p["enc.conv1.w"], p["enc.conv1.b"]))
    x = ad.relu(ad.conv2d(x, p["enc.conv2.w"], p["enc.conv2.b"]))
    x = ad.relu(ad.conv2d(x, p["enc.conv3.w"], p["enc.conv3.b"]))
    return ad.conv2d(x, p["enc.head.w"], p["enc.head.b"])


def embed_nodes(params: CodecParams, hosts: DiffNode, msgs: DiffNode):
    """Watermarked images and post-clamp residuals as graph nodes.

    The residual is defined after clamping, so residual + host reproduces the
    watermarked image exactly.
    """
    cfg = params.config
    delta = encode_residual(params, hosts, msgs)
    wm = ad.clamp01(hosts + ad.scale(delta, cfg.strength),
                    straight_through=cfg.clamp_straight_through)
    residuals = wm - hosts
    return wm, residuals


def extract_nodes(params: CodecParams, images: DiffNode) -> DiffNode:
    """Soft decoded bits in (0, 1), shape (N, L)."""
    cfg = params.config
    p = params.params
    n = images.value.shape[0]
    x = ad.relu(ad.conv2d(images, p["dec.conv1.w"], p["dec.conv1.b"]))
    x = ad.relu(ad.conv2d(x, p["dec.conv2.w"], p["dec.conv2.b"]))
    x = ad.avg_pool2(x)
    x = ad.relu(ad.conv2d(x, p["dec.conv3.w"], p["dec.conv3.b"]))
    x = ad.relu(ad.conv2d(x, p["dec.conv4.w"], p["dec.conv4.b"]))
    x = ad.avg_pool2(x)
    flat = ad.reshape(x, (n, -1))
    logits = ad.matmul(flat, p["dec.fc.w"]) + p["dec.fc.b"]
    return ad.sigmoid(logits)


# ---------------------------------------------------------------------------
# public single/batch API on plain arrays
# ---------------------------------------------------------------------------

def embed(host, msg, params: CodecParams):
    """Embed a message into a host image; returns watermarked pixels in [0, 1]."""
    with ad.no_grad():
        hosts, single = _as_image_batch(host, params.config, params.dtype)
        msgs = _as_message_batch(np.asarray(msg, dtype=params.dtype), params.config,
                                 params.dtype, hosts.value.shape[0])
        wm, _ = embed_nodes(params, hosts, msgs)
    out = wm.value
    return out[0] if single else out


def extract(image, params: CodecParams):
    """Decode soft bits from an image; returns values in (0, 1)."""
    with ad.no_grad():
        images, single = _as_image_batch(image, params.config, params.dtype)
        soft = extract_nodes(params, images)
    out = soft.value
    return out[0] if single else out


def threshold(soft):
    """Soft bits to hard bits: 1 iff value > 0.5 (ties resolve to 0)."""
    soft = np.asarray(soft)
    if not np.all(np.isfinite(soft)):
        raise ValueError("threshold: soft values must be finite")
    return (soft > 0.5).astype(np.uint8)


def residual(host, msg, params: CodecParams):
    """Post-clamp embedding residual: embed(host, msg) - host."""
    host = np.asarray(host, dtype=params.dtype)
    return embed(host, msg, params) - host


# ---------------------------------------------------------------------------
# messages
# ---------------------------------------------------------------------------

def random_message(length, rng: RngStream):
    return rng.bits(length)


def message_to_hex(bits):
    """Bits (MSB first) to lowercase hex, left-padded to full nibbles."""
    bits = np.asarray(bits).astype(np.uint8)
    n = bits.size
    width = (n + 3) // 4
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return format(value, f"0{width}x")


def message_from_hex(hexstr, length):
    """Hex (MSB first) to a length-L bit vector; value must fit in L bits."""
    hexstr = hexstr.strip().lower()
    if hexstr.startswith("0x"):
        hexstr = hexstr[2:]
    if not hexstr or any(c not in "0123456789abcdef" for c in hexstr):
        raise ValueError(f"invalid hex message: {hexstr!r}")
    value = int(hexstr, 16)
    if value >= (1 << length):
        raise ValueError(f"hex message {hexstr!r} does not fit in {length} bits")
    return np.array([(value >> (length - 1 - i)) & 1 for i in range(length)], dtype=np.uint8)
