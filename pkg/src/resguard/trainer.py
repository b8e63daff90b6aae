"""Dual-pair training loop with the RSE loss and the KOA noise layer.

Each step samples dual-pair batches (two distinct hosts, two distinct
messages), embeds all four host/message combinations under one parameter
snapshot, and combines:

  * the channel branch: host1+message1 through a sampled channel distortion,
    decoded against message1;
  * the KOA noise layer (optional): host2+message2 tampered with the residual
    of host1+message1, decoded against message2;
  * the RSE branch (optional): contrastive loss over the three residuals;
  * the image loss on the host1 pair.

With both flags off this reduces exactly to the plain END objective (no RSE or
tamper nodes appear in the graph at all).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import codec as codec_mod
from . import distortion as dist_mod
from . import losses
from .autodiff import Adam, RngStream
from .codec import CodecConfig, CodecParams
from .losses import LossWeights


@dataclass
class DualPairBatch:
    """Two hosts x two messages; wmXY/resXY = host X embedded with message Y.

    The watermarked/residual nodes are derived inside the training step, all
    under a single parameter snapshot.
    """

    index1: int
    index2: int
    host1: np.ndarray
    host2: np.ndarray
    message1: np.ndarray
    message2: np.ndarray
    wm11: object = None
    wm12: object = None
    wm21: object = None
    wm22: object = None
    res11: object = None
    res12: object = None
    res21: object = None

    def swapped(self):
        """Roles of the two pairs exchanged (symmetric training)."""
        return DualPairBatch(self.index2, self.index1, self.host2, self.host1,
                             self.message2, self.message1)


@dataclass
class TrainConfig:
    codec: CodecConfig = field(default_factory=CodecConfig)
    steps: int = 3000
    lr: float = 1e-3
    batch_pairs: int = 4
    weights: LossWeights = field(default_factory=LossWeights)
    distortions: list = field(default_factory=dist_mod.default_menu)
    enable_rse: bool = False
    enable_knl: bool = False
    seed: int = 0
    symmetric: bool = True      # swap pair roles on alternating steps
    eval_every: int = 250
    probe_images: int = 32

    def validate(self):
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.batch_pairs < 1:
            raise ValueError("batch_pairs must be >= 1")
        self.weights.validate()
        self.codec.validate()
        return self


def build_dual_pair_batch(dataset, rng: RngStream, message_length):
    """Sample two distinct hosts and two distinct messages."""
    n = len(dataset)
    if n < 2:
        raise ValueError(f"dual-pair sampling needs a dataset of >= 2 images, got {n}")
    i1, i2 = (int(i) for i in rng.choice_without_replacement(n, 2))
    w1 = rng.bits(message_length)
    w2 = rng.bits(message_length)
    while np.array_equal(w1, w2):
        w2 = rng.bits(message_length)
    return DualPairBatch(i1, i2, np.asarray(dataset[i1]), np.asarray(dataset[i2]), w1, w2)


def forward_losses(params: CodecParams, batches, weights: LossWeights,
                   enable_rse, enable_knl, channel_spec, noise_rng: RngStream):
    """Build the step's loss graph; returns named scalar nodes."""
    cfg = params.config
    dtype = params.dtype
    n_pairs = len(batches)

    hosts = np.stack([h for b in batches for h in (b.host1, b.host1, b.host2, b.host2)])
    msgs = np.stack([m for b in batches for m in (b.message1, b.message2, b.message1, b.message2)])
    host_node = ad.constant(hosts.astype(dtype))
    msg_node = ad.constant(msgs.astype(dtype))
    wm, res = codec_mod.embed_nodes(params, host_node, msg_node)

    for p, b in enumerate(batches):
        base = 4 * p
        b.wm11 = ad.take0(wm, [base])
        b.wm12 = ad.take0(wm, [base + 1])
        b.wm21 = ad.take0(wm, [base + 2])
        b.wm22 = ad.take0(wm, [base + 3])
        b.res11 = ad.take0(res, [base])
        b.res12 = ad.take0(res, [base + 1])
        b.res21 = ad.take0(res, [base + 2])

    ch_idx = [4 * p for p in range(n_pairs)]
    msg1 = np.stack([b.message1 for b in batches]).astype(dtype)
    msg2 = np.stack([b.message2 for b in batches]).astype(dtype)

    wm_ch = ad.take0(wm, ch_idx)
    distorted = dist_mod.apply(channel_spec, wm_ch, noise_rng, train=True)
    soft_ch = codec_mod.extract_nodes(params, distorted)

    koa_term = None
    if enable_knl:
        tampered = dist_mod.koa_tamper(ad.take0(wm, [4 * p + 3 for p in range(n_pairs)]),
                                       ad.take0(res, ch_idx))
        soft_koa = codec_mod.extract_nodes(params, tampered)
        koa_term = losses.koa_loss(ad.constant(msg2), soft_koa)

    rse_term = None
    if enable_rse:
        acc = None
        for b in batches:
            term = losses.rse_loss(b.res11, b.res12, b.res21, weights.tau)
            acc = term if acc is None else acc + term
        rse_term = ad.scale(acc, 1.0 / n_pairs)

    img = losses.image_loss(ad.take0(host_node, ch_idx), ad.take0(wm, ch_idx))
    mes = losses.message_loss(ad.constant(msg1), soft_ch, koa_term, weights.lambda1)
    total = losses.total_loss(mes, img, rse_term, weights.lambda2, weights.lambda3)

    return {
        "total": total,
        "message": mes,
        "image": img,
        "rse": rse_term,
        "koa": koa_term,
    }


def train_step(batches, params: CodecParams, optimizer: Adam, weights: LossWeights,
               enable_rse, enable_knl, channel_spec, noise_rng: RngStream):
    """One forward/backward/Adam update; returns the loss breakdown."""
    nodes = forward_losses(params, batches, weights, enable_rse, enable_knl,
                           channel_spec, noise_rng)
    breakdown = {k: (float(v.value) if v is not None else 0.0) for k, v in nodes.items()}
    if not all(np.isfinite(v) for v in breakdown.values()):
        raise RuntimeError(f"non-finite loss in training step: {breakdown}")
    ad.backward(nodes["total"])
    optimizer.step()
    return breakdown


def probe_bit_accuracy(params, images, messages):
    """Clean embed->extract accuracy on a small probe set."""
    wm = codec_mod.embed(images, messages, params)
    bits = codec_mod.threshold(codec_mod.extract(wm, params))
    return float(np.mean(bits == messages))


def train(config: TrainConfig, dataset):
    """Run the training loop; returns (params, per-step log rows)."""
    config.validate()
    dataset = np.asarray(dataset)
    L = config.codec.message_length

    menu = dist_mod.trainable_specs(config.distortions)
    if not menu:
        raise ValueError("no trainable distortions in the menu "
                         "(salt_pepper/median_blur are eval-only by default)")

    rng = RngStream(config.seed)
    params = CodecParams.init(config.codec, rng.split("init"))
    optimizer = Adam(params.params, lr=config.lr)
    batch_rng = rng.split("batches")
    spec_rng = rng.split("channel-spec")
    noise_rng = rng.split("channel-noise")
    probe_rng = rng.split("probe")

    n_probe = min(config.probe_images, len(dataset))
    probe_images = dataset[len(dataset) - n_probe:]
    probe_msgs = probe_rng.bits(n_probe * L).reshape(n_probe, L)

    log = []
    for step in range(config.steps):
        batches = [build_dual_pair_batch(dataset, batch_rng, L)
                   for _ in range(config.batch_pairs)]
        if config.symmetric and step % 2 == 1:
            batches = [b.swapped() for b in batches]
        spec = dist_mod.sample_combined(menu, spec_rng)
        breakdown = train_step(batches, params, optimizer, config.weights,
                               config.enable_rse, config.enable_knl, spec, noise_rng)
        row = {
            "step": step,
            "loss_total": breakdown["total"],
            "loss_message": breakdown["message"],
            "loss_image": breakdown["image"],
            "loss_rse": breakdown["rse"],
            "loss_koa": breakdown["koa"],
            "clean_bit_acc": None,
        }
        if config.eval_every and (step + 1) % config.eval_every == 0:
            row["clean_bit_acc"] = probe_bit_accuracy(params, probe_images, probe_msgs)
        log.append(row)
    return params, log
