"""The known-original attack: average residual estimation and subtraction.

The adversary holds N (host, watermarked) pairs, averages their differences,
and subtracts that estimate from unseen watermarked images.  The sweep protocol
varies N, keeping attacker pairs disjoint from the evaluation targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import codec, metrics
from .autodiff import RngStream

MESSAGE_MODES = ("same", "different")


def average_residual(pairs):
    """Elementwise mean of watermarked-minus-host over pairs, 64-bit accumulation.

    Pairs are summed in ascending index order (the canonical order, so the
    result is reproducible bit-for-bit for any listing of the same pairs).
    """
    if len(pairs) == 0:
        raise ValueError("average_residual: need at least one (host, watermarked) pair")
    shape = np.asarray(pairs[0][0]).shape
    acc = np.zeros(shape, dtype=np.float64)
    for i, (host, wm) in enumerate(pairs):
        host = np.asarray(host)
        wm = np.asarray(wm)
        if host.shape != shape or wm.shape != shape:
            raise ValueError(
                f"average_residual: pair {i} shape {host.shape}/{wm.shape} != {shape}")
        acc += wm.astype(np.float64) - host.astype(np.float64)
    return (acc / len(pairs)).astype(np.asarray(pairs[0][0]).dtype)


def koa_attack(target_watermarked, r_avg, clamp=True):
    """Subtract the estimated residual from a watermarked image.

    Clamped to [0, 1] by default; the unclamped mode exists for the exact
    cancellation check.
    """
    target = np.asarray(target_watermarked)
    r_avg = np.asarray(r_avg)
    if target.shape != r_avg.shape:
        raise ValueError(f"koa_attack: shape mismatch {target.shape} vs {r_avg.shape}")
    out = target - r_avg
    if clamp:
        out = np.clip(out, 0.0, 1.0)
    return out


@dataclass
class AttackKit:
    """The adversary's knowledge: pairs plus the derived averaged residual."""

    pairs: list
    message_mode: str = "same"
    r_avg: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.message_mode not in MESSAGE_MODES:
            raise ValueError(f"message_mode must be one of {MESSAGE_MODES}, got {self.message_mode!r}")
        if self.r_avg is None:
            self.r_avg = average_residual(self.pairs)

    @property
    def n(self):
        return len(self.pairs)


@dataclass(frozen=True)
class SweepRow:
    """One (N, mode) cell of the attack sweep."""

    n: int
    message_mode: str
    bit_acc_mean: float
    bit_acc_std: float
    psnr_attacked_mean: float
    ssim_attacked_mean: float


def run_attack_sweep(params, images, n_grid, message_mode, rng: RngStream,
                     n_targets=200, clamp=True):
    """Attack sweep over N for one message mode.

    The first max(n_grid) images form the attacker pool and the next
    ``n_targets`` are the evaluation targets, so the two splits are disjoint.
    For each N, fresh pairs are drawn from the pool without replacement, the
    averaged residual is subtracted from every target, and the mean/std bit
    accuracy plus attacked-image quality are recorded.  Rows are assembled in
    ascending-N order.
    """
    if message_mode not in MESSAGE_MODES:
        raise ValueError(f"message_mode must be one of {MESSAGE_MODES}, got {message_mode!r}")
    n_grid = sorted(int(n) for n in n_grid)
    if not n_grid or n_grid[0] < 1:
        raise ValueError("n_grid must contain integers >= 1")
    images = np.asarray(images)
    pool_size = n_grid[-1]
    required = pool_size + n_targets
    if len(images) < required:
        raise ValueError(
            f"attack sweep needs at least {required} images "
            f"({pool_size} attacker pairs + {n_targets} disjoint targets), got {len(images)}")

    L = params.config.message_length
    pool_hosts = images[:pool_size]
    target_hosts = images[pool_size:pool_size + n_targets]

    msg_rng = rng.split("messages")
    if message_mode == "same":
        shared = codec.random_message(L, msg_rng)
        pool_msgs = np.tile(shared, (pool_size, 1))
        target_msgs = np.tile(shared, (n_targets, 1))
    else:
        pool_msgs = msg_rng.bits(pool_size * L).reshape(pool_size, L)
        target_msgs = msg_rng.bits(n_targets * L).reshape(n_targets, L)

    pool_wm = codec.embed(pool_hosts, pool_msgs, params)
    target_wm = codec.embed(target_hosts, target_msgs, params)

    rows = []
    for n in n_grid:
        pick = np.sort(rng.split(f"pairs/N={n}").choice_without_replacement(pool_size, n))
        pairs = [(pool_hosts[i], pool_wm[i]) for i in pick]
        kit = AttackKit(pairs=pairs, message_mode=message_mode)
        attacked = koa_attack(target_wm, np.broadcast_to(kit.r_avg, target_wm.shape), clamp=clamp)
        attacked = attacked.astype(target_wm.dtype)
        soft = codec.extract(attacked, params)
        bits = codec.threshold(soft)
        accs = np.array([
            metrics.bit_accuracy(target_msgs[i], bits[i]) for i in range(n_targets)
        ])
        psnrs = np.array([metrics.psnr(target_hosts[i], attacked[i]) for i in range(n_targets)])
        ssims = np.array([metrics.ssim(target_hosts[i], attacked[i]) for i in range(n_targets)])
        rows.append(SweepRow(
            n=n,
            message_mode=message_mode,
            bit_acc_mean=float(accs.mean()),
            bit_acc_std=float(accs.std()),
            psnr_attacked_mean=float(psnrs.mean()),
            ssim_attacked_mean=float(ssims.mean()),
        ))
    return rows
