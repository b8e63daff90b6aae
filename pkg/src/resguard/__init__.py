"""Desk-scale deep image watermarking with a known-original-attack engine,
the ResGuard defense (residual specificity loss + KOA noise layer), a metrics
suite, and a seeded experiment runner."""

from .autodiff import Adam, DiffNode, RngStream, backward, gradient_check
from .codec import CodecConfig, CodecParams, embed, extract, residual, threshold
from .distortion import DistortionSpec, koa_tamper
from .losses import LossWeights, image_loss, koa_loss, message_loss, rse_loss, total_loss
from .attack import AttackKit, average_residual, koa_attack, run_attack_sweep
from .trainer import DualPairBatch, TrainConfig, build_dual_pair_batch, train
from .metrics import EvalReport, bit_accuracy, evaluate, psnr, residual_similarity, ssim
from .config import ExperimentConfig
from .experiment import run_experiment

__version__ = "0.1.0"

__all__ = [
    "Adam", "DiffNode", "RngStream", "backward", "gradient_check",
    "CodecConfig", "CodecParams", "embed", "extract", "residual", "threshold",
    "DistortionSpec", "koa_tamper",
    "LossWeights", "image_loss", "koa_loss", "message_loss", "rse_loss", "total_loss",
    "AttackKit", "average_residual", "koa_attack", "run_attack_sweep",
    "DualPairBatch", "TrainConfig", "build_dual_pair_batch", "train",
    "EvalReport", "bit_accuracy", "evaluate", "psnr", "residual_similarity", "ssim",
    "ExperimentConfig", "run_experiment",
    "__version__",
]
