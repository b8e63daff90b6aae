"""Evaluation metrics: bit accuracy, PSNR, SSIM, residual similarity, reports.

PSNR assumes [0, 1] inputs and caps identical images at 100 dB.  SSIM converts
to ITU-R 601 luma and uses the standard 11x11 Gaussian window (sigma 1.5,
C1=0.01^2, C2=0.03^2) averaged over valid windows.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import codec
from .autodiff import RngStream, ZeroNormWarning

_LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float64)
_SSIM_C1 = 0.01 ** 2
_SSIM_C2 = 0.03 ** 2
_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5


def bit_accuracy(expected, decoded):
    """Fraction of matching bit positions."""
    a = np.asarray(expected).reshape(-1)
    b = np.asarray(decoded).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"bit_accuracy: length mismatch {a.size} vs {b.size}")
    return float(np.mean(a == b))


def psnr(a, b):
    """10 * log10(1 / MSE) for [0, 1] images; identical images cap at 100 dB."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"psnr: shape mismatch {a.shape} vs {b.shape}")
    err = float(np.mean((a - b) ** 2))
    if err == 0.0:
        return 100.0
    return float(10.0 * np.log10(1.0 / err))


def _gaussian_kernel_1d(size, sigma):
    t = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-(t ** 2) / (2.0 * sigma ** 2))
    return k / k.sum()


def _filter_valid(img, k1d):
    """Separable valid-mode correlation of a 2-D array with a 1-D kernel."""
    out = sliding_window_view(img, len(k1d), axis=0) @ k1d
    out = sliding_window_view(out, len(k1d), axis=1) @ k1d
    return out


def _luma(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] == 3:
        return img @ _LUMA
    raise ValueError(f"ssim expects (H, W) or (H, W, 3) images, got shape {img.shape}")


def ssim(a, b):
    """Mean structural similarity over valid 11x11 Gaussian windows on luma."""
    ya, yb = _luma(a), _luma(b)
    if ya.shape != yb.shape:
        raise ValueError(f"ssim: shape mismatch {ya.shape} vs {yb.shape}")
    if min(ya.shape) < _SSIM_WINDOW:
        raise ValueError(
            f"ssim: image {ya.shape} smaller than the {_SSIM_WINDOW}x{_SSIM_WINDOW} window")
    k = _gaussian_kernel_1d(_SSIM_WINDOW, _SSIM_SIGMA)
    mu_a = _filter_valid(ya, k)
    mu_b = _filter_valid(yb, k)
    var_a = _filter_valid(ya * ya, k) - mu_a * mu_a
    var_b = _filter_valid(yb * yb, k) - mu_b * mu_b
    cov = _filter_valid(ya * yb, k) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + _SSIM_C1) * (2.0 * cov + _SSIM_C2)
    den = (mu_a * mu_a + mu_b * mu_b + _SSIM_C1) * (var_a + var_b + _SSIM_C2)
    return float(np.mean(num / den))


def residual_similarity(params, images, message):
    """Mean pairwise cosine similarity of residuals for one shared message.

    Embeds the same message into every image; residuals are flattened and all
    unordered pairs are averaged.  Zero-norm residuals contribute similarity 0
    with a warning (degenerate, e.g. at embedding strength 0).
    """
    images = np.asarray(images)
    n = images.shape[0]
    if n < 2:
        raise ValueError(f"residual_similarity needs at least 2 images, got {n}")
    msgs = np.tile(np.asarray(message).reshape(1, -1), (n, 1))
    wm = codec.embed(images, msgs, params)
    res = (wm - images.astype(wm.dtype)).reshape(n, -1).astype(np.float64)
    norms = np.sqrt((res * res).sum(axis=1))
    zero = norms == 0.0
    if zero.any():
        warnings.warn("residual_similarity: zero-norm residual(s), similarity set to 0",
                      ZeroNormWarning)
        norms = np.where(zero, 1.0, norms)
    unit = res / norms[:, None]
    unit[zero] = 0.0
    sims = unit @ unit.T
    iu = np.triu_indices(n, k=1)
    return float(np.mean(sims[iu]))


# ---------------------------------------------------------------------------
# evaluation report
# ---------------------------------------------------------------------------

@dataclass
class EvalReport:
    """All quantitative results for one trained model."""

    clean_bit_acc: float
    distortion_bit_acc: dict
    koa: list                      # list of attack.SweepRow as dicts
    psnr_watermarked: float
    ssim_watermarked: float
    residual_similarity: float
    n_targets: int
    message_modes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    def koa_acc(self, n, mode):
        for row in self.koa:
            if row["n"] == n and row["message_mode"] == mode:
                return row["bit_acc_mean"]
        raise KeyError(f"no KOA row for N={n}, mode={mode!r}")


def _thread_count():
    try:
        return max(1, int(os.environ.get("RESGUARD_THREADS", "1")))
    except ValueError:
        return 1


def map_image_batches(fn, images, chunk=64):
    """Apply ``fn(chunk, start_index)`` to image chunks, preserving order.

    Parallelism is capped by the RESGUARD_THREADS environment variable; results
    are reassembled in image-index order so the output is deterministic.
    """
    images = np.asarray(images)
    pieces = [(images[i:i + chunk], i) for i in range(0, len(images), chunk)]
    workers = _thread_count()
    if workers == 1 or len(pieces) == 1:
        parts = [fn(c, s) for c, s in pieces]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda cs: fn(*cs), pieces))
    return np.concatenate(parts, axis=0)


def evaluate(params, images, distortions, n_grid, message_modes, rng: RngStream,
             n_targets=200, n_residual_images=100, clamp=True):
    """Full evaluation of a trained codec on held-out images.

    ``images`` must hold max(n_grid) attacker images plus ``n_targets``
    evaluation targets (the same split the attack sweep uses).  Clean and
    per-distortion accuracies, image quality, KOA rows per (N, mode), and the
    residual-similarity statistic are all computed deterministically from the
    seeded rng.
    """
    from . import attack as attack_mod

    images = np.asarray(images)
    n_grid = sorted(int(n) for n in n_grid)
    pool_size = n_grid[-1] if n_grid else 0
    required = pool_size + n_targets
    if len(images) < required:
        raise ValueError(
            f"evaluate needs at least {required} images "
            f"({pool_size} attacker + {n_targets} targets), got {len(images)}")
    targets = images[pool_size:pool_size + n_targets]
    L = params.config.message_length

    msgs = rng.split("clean-messages").bits(n_targets * L).reshape(n_targets, L)
    wm = map_image_batches(
        lambda c, s: codec.embed(c, msgs[s:s + len(c)], params), targets)

    extract_batched = lambda c, s: codec.extract(c, params)
    clean_bits = codec.threshold(map_image_batches(extract_batched, wm))
    clean_acc = float(np.mean([bit_accuracy(msgs[i], clean_bits[i]) for i in range(n_targets)]))

    dist_acc = {}
    from . import distortion as dist_mod
    for spec in distortions:
        drng = rng.split(f"distortion/{spec.label()}")
        distorted = dist_mod.apply(spec, wm, drng)
        bits = codec.threshold(map_image_batches(extract_batched, distorted))
        dist_acc[spec.label()] = float(
            np.mean([bit_accuracy(msgs[i], bits[i]) for i in range(n_targets)]))

    psnr_wm = float(np.mean([psnr(targets[i], wm[i]) for i in range(n_targets)]))
    ssim_wm = float(np.mean([ssim(targets[i], wm[i]) for i in range(n_targets)]))

    koa_rows = []
    if n_grid:
        for mode in message_modes:
            rows = attack_mod.run_attack_sweep(
                params, images, n_grid, mode, rng.split(f"sweep/{mode}"),
                n_targets=n_targets, clamp=clamp)
            koa_rows.extend(asdict(r) for r in rows)

    resid_message = codec.random_message(L, rng.split("residual-message"))
    n_resid = min(n_residual_images, n_targets)
    resid_sim = residual_similarity(params, targets[:n_resid], resid_message)

    return EvalReport(
        clean_bit_acc=clean_acc,
        distortion_bit_acc=dist_acc,
        koa=koa_rows,
        psnr_watermarked=psnr_wm,
        ssim_watermarked=ssim_wm,
        residual_similarity=resid_sim,
        n_targets=n_targets,
        message_modes=list(message_modes),
    )
