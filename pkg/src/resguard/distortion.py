"""Channel distortions and the KOA noise layer.

Gaussian noise, Gaussian blur, and the JPEG approximation are differentiable
with respect to the input image (the JPEG rounding step propagates a
straight-through gradient).  Salt-and-pepper and median blur are eval-only by
default; a straight-through train-time variant can be opted into per spec via
``train_straight_through`` but is considered experimental.

All outputs stay in [0, 1] and every distortion is a pure function of
(input, parameters, rng stream).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import autodiff as ad
from .autodiff import DiffNode, RngStream

KINDS = ("identity", "jpeg", "gaussian_noise", "salt_pepper", "gaussian_blur", "median_blur")

# JPEG Annex K luminance quantization table, applied to all channels here.
_JPEG_BASE_TABLE = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.float64)


@dataclass(frozen=True)
class DistortionSpec:
    """One distortion with its parameters.

    Only the fields relevant to ``kind`` are meaningful: quality (jpeg),
    mean/std (gaussian_noise), prob (salt_pepper), radius (gaussian_blur),
    ksize (median_blur).
    """

    kind: str
    quality: int = 25
    mean: float = 0.0
    std: float = 0.05
    prob: float = 0.05
    radius: int = 4
    ksize: int = 7
    train_straight_through: bool = False

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distortion kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "jpeg" and not 1 <= int(self.quality) <= 100:
            raise ValueError(f"jpeg quality must be in [1, 100], got {self.quality}")
        if self.kind == "gaussian_noise" and self.std < 0:
            raise ValueError(f"gaussian noise std must be >= 0, got {self.std}")
        if self.kind == "salt_pepper" and not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"salt-and-pepper prob must be in [0, 1], got {self.prob}")
        if self.kind == "gaussian_blur" and self.radius < 1:
            raise ValueError(f"gaussian blur radius must be >= 1, got {self.radius}")
        if self.kind == "median_blur" and (self.ksize < 1 or self.ksize % 2 == 0):
            raise ValueError(f"median blur kernel must be odd and >= 1, got {self.ksize}")
        return self

    @property
    def is_differentiable(self):
        return self.kind in ("identity", "jpeg", "gaussian_noise", "gaussian_blur")

    @property
    def needs_rng(self):
        return self.kind in ("gaussian_noise", "salt_pepper")

    def label(self):
        if self.kind == "jpeg":
            return f"jpeg(q={int(self.quality)})"
        if self.kind == "gaussian_noise":
            return f"gaussian_noise(mean={self.mean:g},std={self.std:g})"
        if self.kind == "salt_pepper":
            return f"salt_pepper(p={self.prob:g})"
        if self.kind == "gaussian_blur":
            return f"gaussian_blur(r={int(self.radius)})"
        if self.kind == "median_blur":
            return f"median_blur(k={int(self.ksize)})"
        return "identity"

    _FIELDS_BY_KIND = {
        "identity": set(),
        "jpeg": {"quality"},
        "gaussian_noise": {"mean", "std"},
        "salt_pepper": {"prob"},
        "gaussian_blur": {"radius"},
        "median_blur": {"ksize"},
    }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind", None)
        if kind not in KINDS:
            raise ValueError(f"distortion entry needs a valid 'kind', got {kind!r}")
        allowed = cls._FIELDS_BY_KIND[kind] | {"train_straight_through"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown keys {sorted(unknown)} for distortion kind {kind!r}")
        return cls(kind=kind, **d).validate()

    def to_dict(self):
        out = {"kind": self.kind}
        for f in sorted(self._FIELDS_BY_KIND[self.kind]):
            out[f] = getattr(self, f)
        if self.train_straight_through:
            out["train_straight_through"] = True
        return out


def default_menu():
    """The default combined-noise menu: Gaussian noise only."""
    return [DistortionSpec(kind="gaussian_noise", mean=0.0, std=0.05)]


def trainable_specs(specs):
    """Subset of a menu usable inside the training noise layer."""
    return [s for s in specs if s.is_differentiable or s.train_straight_through]


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _wrap(img):
    if isinstance(img, DiffNode):
        return img, True
    arr = np.asarray(img)
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(np.float32)
    return ad.constant(arr), False


def _unwrap(node, was_node):
    return node if was_node else node.value


def _eval_or_ste(img_node, distorted_value, train):
    """Non-differentiable result: cut gradients (eval) or pass them through."""
    if train and img_node.requires_grad:
        delta = ad.constant(np.asarray(distorted_value - img_node.value, dtype=img_node.dtype))
        return img_node + delta
    return ad.constant(np.asarray(distorted_value, dtype=img_node.dtype))


@lru_cache(maxsize=16)
def _blur_matrix(n, radius):
    """Band matrix of a 1-D normalized Gaussian (sigma = radius/2) with
    replicate edge handling (out-of-range taps accumulate at the border)."""
    sigma = radius / 2.0
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(t ** 2) / (2.0 * sigma ** 2))
    k /= k.sum()
    mat = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for off, wgt in zip(range(-radius, radius + 1), k):
            j = min(max(i + off, 0), n - 1)
            mat[i, j] += wgt
    return mat


@lru_cache(maxsize=1)
def _dct_matrix():
    i = np.arange(8, dtype=np.float64)[:, None]
    j = np.arange(8, dtype=np.float64)[None, :]
    mat = np.sqrt(2.0 / 8.0) * np.cos((2.0 * j + 1.0) * i * np.pi / 16.0)
    mat[0, :] = np.sqrt(1.0 / 8.0)
    return mat


def jpeg_quant_table(quality):
    """Luminance table scaled by the standard quality-factor convention."""
    q = int(quality)
    if not 1 <= q <= 100:
        raise ValueError(f"jpeg quality must be in [1, 100], got {quality}")
    scale = 5000 // q if q < 50 else 200 - 2 * q
    tbl = np.floor((_JPEG_BASE_TABLE * scale + 50.0) / 100.0)
    return np.clip(tbl, 1.0, 255.0)


# ---------------------------------------------------------------------------
# distortions
# ---------------------------------------------------------------------------

def apply_identity(img):
    return img


def apply_gaussian_noise(img, mean, std, rng: RngStream):
    """clamp01(img + n), n ~ N(mean, std^2) i.i.d.; noise treated as constant."""
    if std < 0:
        raise ValueError(f"gaussian noise std must be >= 0, got {std}")
    node, was_node = _wrap(img)
    noise = rng.normal(node.value.shape, mean, std).astype(node.dtype)
    out = ad.clamp01(node + ad.constant(noise))
    return _unwrap(out, was_node)


def apply_salt_pepper(img, prob, rng: RngStream, train=False):
    """Each element independently set to 0 or 1 (equal odds) with probability prob."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"salt-and-pepper prob must be in [0, 1], got {prob}")
    node, was_node = _wrap(img)
    v = node.value
    hit = rng.uniform(v.shape) < prob
    salt = (rng.uniform(v.shape) < 0.5).astype(v.dtype)
    distorted = np.where(hit, salt, v)
    return _unwrap(_eval_or_ste(node, distorted, train), was_node)


def apply_gaussian_blur(img, radius):
    """Separable Gaussian blur (kernel 2r+1, sigma=r/2) with edge replication."""
    radius = int(radius)
    if radius < 1:
        raise ValueError(f"gaussian blur radius must be >= 1, got {radius}")
    node, was_node = _wrap(img)
    h, w = node.value.shape[-3], node.value.shape[-2]
    out = ad.apply_matrix(node, _blur_matrix(h, radius), axis=-3)
    out = ad.apply_matrix(out, _blur_matrix(w, radius), axis=-2)
    out = ad.clamp01(out)
    return _unwrap(out, was_node)


def apply_median_blur(img, ksize, train=False):
    """Per-channel k x k window median with edge replication; eval-only."""
    ksize = int(ksize)
    if ksize % 2 == 0:
        raise ValueError(f"median blur kernel size must be odd, got {ksize}")
    if ksize < 1:
        raise ValueError(f"median blur kernel size must be >= 1, got {ksize}")
    node, was_node = _wrap(img)
    v = node.value
    r = (ksize - 1) // 2
    pads = [(0, 0)] * v.ndim
    pads[-3] = (r, r)
    pads[-2] = (r, r)
    padded = np.pad(v, pads, mode="edge")
    wins = sliding_window_view(padded, (ksize, ksize), axis=(v.ndim - 3, v.ndim - 2))
    med = np.median(wins, axis=(-2, -1)).astype(v.dtype)
    return _unwrap(_eval_or_ste(node, med, train), was_node)


def apply_jpeg_approx(img, quality, rounding=True):
    """Blockwise DCT / quantize / dequantize / inverse DCT approximation.

    8x8 blocks per channel, luminance table on all channels, replicate padding
    when dimensions are not multiples of 8.  ``rounding=False`` gives the
    smooth surrogate whose gradient the straight-through rounding reports.
    """
    tbl = jpeg_quant_table(quality)
    node, was_node = _wrap(img)
    v = node.value
    single = v.ndim == 3
    x = ad.reshape(node, (1,) + v.shape) if single else node
    n, h, w, c = x.value.shape
    ph, pw = (-h) % 8, (-w) % 8
    x = ad.pad_edge_hw(x, ph, pw)
    hp, wp = h + ph, w + pw
    dct = _dct_matrix()
    y = ad.affine(x, 255.0, -128.0)
    blocks = ad.reshape(y, (n, hp // 8, 8, wp // 8, 8, c))
    blocks = ad.transpose(blocks, (0, 1, 3, 5, 2, 4))  # (n, bh, bw, c, 8, 8)
    coef = ad.apply_matrix(ad.apply_matrix(blocks, dct, axis=-2), dct, axis=-1)
    scaled = ad.mul(coef, ad.constant(np.broadcast_to(1.0 / tbl, coef.shape).astype(coef.dtype)))
    if rounding:
        scaled = ad.round_ste(scaled)
    deq = ad.mul(scaled, ad.constant(np.broadcast_to(tbl, scaled.shape).astype(scaled.dtype)))
    rec = ad.apply_matrix(ad.apply_matrix(deq, dct.T, axis=-2), dct.T, axis=-1)
    rec = ad.transpose(rec, (0, 1, 4, 2, 5, 3))
    rec = ad.reshape(rec, (n, hp, wp, c))
    rec = ad.crop_hw(rec, h, w)
    out = ad.clamp01(ad.affine(rec, 1.0 / 255.0, 128.0 / 255.0))
    if single:
        out = ad.reshape(out, v.shape)
    return _unwrap(out, was_node)


def sample_combined(specs, rng: RngStream):
    """Uniform choice from a non-empty distortion menu (one per training step)."""
    if not specs:
        raise ValueError("sample_combined: distortion menu is empty")
    idx = int(rng.integers(0, len(specs)))
    return specs[idx]


def apply(spec: DistortionSpec, img, rng: RngStream = None, train=False):
    """Apply one distortion spec; stochastic kinds require an rng stream."""
    spec.validate()
    if spec.needs_rng and rng is None:
        raise ValueError(f"distortion {spec.label()} needs an rng stream")
    if spec.kind == "identity":
        return apply_identity(img)
    if spec.kind == "gaussian_noise":
        return apply_gaussian_noise(img, spec.mean, spec.std, rng)
    if spec.kind == "salt_pepper":
        return apply_salt_pepper(img, spec.prob, rng, train=train and spec.train_straight_through)
    if spec.kind == "gaussian_blur":
        return apply_gaussian_blur(img, spec.radius)
    if spec.kind == "median_blur":
        return apply_median_blur(img, spec.ksize, train=train and spec.train_straight_through)
    if spec.kind == "jpeg":
        return apply_jpeg_approx(img, spec.quality)
    raise ValueError(f"unknown distortion kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# KOA noise layer
# ---------------------------------------------------------------------------

def koa_tamper(target, donor_residual, clamp=True):
    """Subtract a donor residual from a watermarked image.

    Differentiable w.r.t. both operands.  Clamped to [0, 1] by default so the
    simulated attack emits valid images; the unclamped variant exists for the
    algebraic-cancellation checks.
    """
    t_node, t_was = _wrap(target)
    d_node, d_was = _wrap(donor_residual)
    if t_node.value.shape != d_node.value.shape:
        raise ValueError(
            f"koa_tamper: shape mismatch {t_node.value.shape} vs {d_node.value.shape}")
    out = t_node - d_node
    if clamp:
        out = ad.clamp01(out)
    out.op = "koa_tamper"
    return _unwrap(out, t_was or d_was)
