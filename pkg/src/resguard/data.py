"""Dataset generation and ingestion.

The synthetic generator stands in for a photo corpus at desk scale: each image
mixes a random linear gradient, band-limited noise, and a few random
rectangles/ellipses, clamped to [0, 1].  Everything is deterministic per seed.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np
from PIL import Image

from .autodiff import RngStream
from .distortion import _blur_matrix


def _coordinate_grid(size):
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    return (ys + 0.5) / size, (xs + 0.5) / size


def _band_limited_noise(rng, size, radius):
    noise = rng.normal((size, size, 3))
    mat = _blur_matrix(size, radius)
    smooth = np.einsum("ij,jkc->ikc", mat, noise)
    smooth = np.einsum("ij,kjc->kic", mat, smooth)
    peak = np.abs(smooth).max()
    return smooth / peak if peak > 0 else smooth


def generate_synthetic_dataset(count, size, seed):
    """Deterministic procedural RGB images in [0, 1], shape (count, size, size, 3)."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = RngStream(seed).split("synthetic-images")
    ys, xs = _coordinate_grid(size)
    images = np.empty((count, size, size, 3), dtype=np.float32)
    for i in range(count):
        theta = rng.uniform(()) * 2.0 * np.pi
        t = xs * np.cos(theta) + ys * np.sin(theta)
        t = (t - t.min()) / max(t.max() - t.min(), 1e-9)
        c0 = rng.uniform((3,))
        c1 = rng.uniform((3,))
        img = t[:, :, None] * c1 + (1.0 - t[:, :, None]) * c0

        amp = rng.uniform((), 0.05, 0.35)
        radius = int(rng.integers(1, 4))
        img = img + amp * _band_limited_noise(rng, size, radius)

        for _ in range(int(rng.integers(2, 7))):
            color = rng.uniform((3,))
            alpha = rng.uniform((), 0.3, 1.0)
            cy, cx = rng.uniform((2,), 0.1, 0.9)
            ry, rx = rng.uniform((2,), 0.05, 0.4)
            if rng.uniform(()) < 0.5:
                mask = (np.abs(ys - cy) < ry) & (np.abs(xs - cx) < rx)
            else:
                mask = ((ys - cy) / ry) ** 2 + ((xs - cx) / rx) ** 2 < 1.0
            img = np.where(mask[:, :, None], (1.0 - alpha) * img + alpha * color, img)

        images[i] = np.clip(img, 0.0, 1.0).astype(np.float32)
    return images


def bilinear_resize(img, out_h, out_w):
    """Bilinear resampling with half-pixel centers and edge clamping."""
    img = np.asarray(img)
    h, w = img.shape[:2]
    if (h, w) == (out_h, out_w):
        return img.copy()
    src = img.astype(np.float64)
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0.0, h - 1.0)
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    top = src[y0][:, x0] * (1.0 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1.0 - fx) + src[y1][:, x1] * fx
    out = top * (1.0 - fy) + bot * fy
    return out.astype(img.dtype if img.dtype in (np.float32, np.float64) else np.float32)


def center_crop_square(img):
    h, w = img.shape[:2]
    if h == w:
        return img
    s = min(h, w)
    top = (h - s) // 2
    left = (w - s) // 2
    return img[top:top + s, left:left + s]


def load_image_dir(path, size=None):
    """Load 8-bit RGB PNGs from a directory, scaled to [0, 1].

    Files are processed in sorted name order; non-PNG files are skipped and
    unreadable PNGs are skipped with a warning.  Images are center-cropped to a
    square and bilinearly resized to ``size`` when given.
    """
    directory = Path(path)
    if not directory.is_dir():
        raise FileNotFoundError(f"image directory not found: {directory}")
    images = []
    for name in sorted(p.name for p in directory.iterdir() if p.is_file()):
        if not name.lower().endswith(".png"):
            continue
        fpath = directory / name
        try:
            with Image.open(fpath) as im:
                arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
        except Exception as exc:
            warnings.warn(f"skipping unreadable image {fpath}: {exc}")
            continue
        img = arr.astype(np.float32) / 255.0
        if size is not None:
            img = center_crop_square(img)
            if img.shape[0] != size:
                img = bilinear_resize(img, size, size).astype(np.float32)
        images.append(img)
    if not images:
        raise ValueError(f"no readable PNG images in {directory}")
    return np.stack(images)


def save_image_png(img, path):
    """Save a [0, 1] float image as an 8-bit RGB PNG."""
    arr = np.clip(np.asarray(img), 0.0, 1.0)
    quantized = np.rint(arr * 255.0).astype(np.uint8)
    Image.fromarray(quantized, mode="RGB").save(path, format="PNG")


def load_image_png(path):
    """Load one PNG as a [0, 1] float32 RGB array."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return arr.astype(np.float32) / 255.0
