"""End-to-end experiment runner: train, attack, evaluate, write artifacts.

For each requested model variant the runner trains (or reloads) a codec, runs
the attack sweep and full evaluation, and writes a training-log CSV, an
eval-report JSON, a sweep CSV, a residual-similarity CSV, and SVG plots.  All
outputs are deterministic functions of (config, seed, input data); rerunning
with the same config yields byte-identical CSVs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import data as data_mod
from . import metrics, plotting, trainer
from .autodiff import RngStream
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig

SWEEP_HEADER = ["N", "message_mode", "bit_acc_mean", "bit_acc_std",
                "psnr_attacked_mean", "ssim_attacked_mean"]
TRAIN_LOG_HEADER = ["step", "loss_total", "loss_message", "loss_image",
                    "loss_rse", "loss_koa", "clean_bit_acc"]
RESIDUAL_HEADER = ["model", "n_images", "mean_pairwise_cosine_similarity"]
SUMMARY_HEADER = ["model", "clean_bit_acc", "psnr_watermarked", "ssim_watermarked",
                  "residual_similarity", "koa_bit_acc_n1_same"]


def _fmt(x):
    if x is None or x == "":
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.6f}"


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    return path


def write_training_log(path, log_rows):
    rows = [[r["step"], r["loss_total"], r["loss_message"], r["loss_image"],
             r["loss_rse"], r["loss_koa"], r["clean_bit_acc"]] for r in log_rows]
    return write_csv(path, TRAIN_LOG_HEADER, rows)


def write_sweep_csv(path, koa_rows):
    rows = [[r["n"], r["message_mode"], r["bit_acc_mean"], r["bit_acc_std"],
             r["psnr_attacked_mean"], r["ssim_attacked_mean"]] for r in koa_rows]
    return write_csv(path, SWEEP_HEADER, rows)


def write_eval_report(path, report):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def load_dataset(config: ExperimentConfig):
    """Train/eval split for a config (synthetic unless dataset_dir is set)."""
    total = config.train_images + config.eval_images
    if config.dataset_dir is not None:
        images = data_mod.load_image_dir(config.dataset_dir, size=config.image_size)
        if len(images) < total:
            raise ValueError(
                f"dataset_dir holds {len(images)} images, need {total} "
                f"(train_images + eval_images)")
        images = images[:total]
    else:
        images = data_mod.generate_synthetic_dataset(total, config.image_size, config.seed)
    return images[:config.train_images], images[config.train_images:total]


def evaluate_model(config: ExperimentConfig, params, model_name):
    rng = RngStream(config.seed).split(f"evaluate/{model_name}")
    _, eval_set = load_dataset(config)
    return metrics.evaluate(
        params, eval_set, config.distortion_specs(), config.n_grid,
        config.message_modes, rng, n_targets=config.attack_targets,
        n_residual_images=config.residual_images)


def train_model(config: ExperimentConfig, model_name, out_dir=None, seed=None):
    """Train one variant; writes checkpoint + training log when out_dir given."""
    train_set, _ = load_dataset(config)
    tcfg = config.train_config(model_name, seed=seed)
    params, log = trainer.train(tcfg, train_set)
    artifacts = {}
    if out_dir is not None:
        out_dir = Path(out_dir)
        artifacts["checkpoint"] = save_checkpoint(
            params, out_dir / "checkpoint.rgwm", seed=tcfg.seed,
            config_hash=config.config_hash())
        artifacts["training_log"] = write_training_log(out_dir / "training_log.csv", log)
        artifacts["training_plot"] = plotting.save_training_curves(
            log, out_dir / "plots" / "training_losses.svg",
            title=f"training losses ({model_name})")
    return params, log, artifacts


def run_experiment(config: ExperimentConfig):
    """Run the full pipeline for every model in the config; returns paths."""
    config.validate()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config.to_json(out / "config.json")

    artifacts = {"out_dir": out, "models": {}}
    sweep_series = {}
    summary_rows = []
    for model_name in config.models:
        model_dir = out / model_name
        ckpt_path = model_dir / "checkpoint.rgwm"
        if config.reuse_checkpoints and ckpt_path.exists():
            params, _ = load_checkpoint(ckpt_path, expected_config_hash=config.config_hash())
            model_art = {"checkpoint": ckpt_path}
        else:
            params, _, model_art = train_model(config, model_name, out_dir=model_dir)

        report = evaluate_model(config, params, model_name)
        model_art["eval_report"] = write_eval_report(model_dir / "eval_report.json", report)
        model_art["sweep"] = write_sweep_csv(model_dir / "sweep.csv", report.koa)
        model_art["residual_similarity"] = write_csv(
            model_dir / "residual_similarity.csv", RESIDUAL_HEADER,
            [[model_name, min(config.residual_images, config.attack_targets),
              report.residual_similarity]])

        per_model_series = {}
        for mode in config.message_modes:
            rows = [r for r in report.koa if r["message_mode"] == mode]
            series = ([r["n"] for r in rows], [r["bit_acc_mean"] for r in rows])
            per_model_series[f"{model_name}/{mode}"] = series
            sweep_series[f"{model_name}/{mode}"] = series
        model_art["sweep_plot"] = plotting.save_sweep_plot(
            per_model_series, model_dir / "plots" / "koa_bit_acc.svg",
            title=f"KOA bit accuracy vs N ({model_name})")

        summary_rows.append([
            model_name, report.clean_bit_acc, report.psnr_watermarked,
            report.ssim_watermarked, report.residual_similarity,
            _koa_n1_same(report),
        ])
        artifacts["models"][model_name] = model_art

    artifacts["summary"] = write_csv(out / "summary.csv", SUMMARY_HEADER, summary_rows)
    if sweep_series:
        artifacts["sweep_plot"] = plotting.save_sweep_plot(
            sweep_series, out / "plots" / "koa_bit_acc_all_models.svg")
    return artifacts


def _koa_n1_same(report):
    for row in report.koa:
        if row["n"] == 1 and row["message_mode"] == "same":
            return row["bit_acc_mean"]
    return ""


def render_report(run_dir):
    """Re-render figures and the summary table from an existing run directory."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"run directory not found: {run_dir}")
    series = {}
    summary_rows = []
    for model_dir in sorted(p for p in run_dir.iterdir() if p.is_dir() and p.name != "plots"):
        sweep_path = model_dir / "sweep.csv"
        report_path = model_dir / "eval_report.json"
        if not sweep_path.exists():
            continue
        with open(sweep_path, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        per_model = {}
        modes = sorted({r["message_mode"] for r in rows})
        for mode in modes:
            sel = [r for r in rows if r["message_mode"] == mode]
            label = f"{model_dir.name}/{mode}"
            data = ([int(r["N"]) for r in sel], [float(r["bit_acc_mean"]) for r in sel])
            per_model[label] = data
            series[label] = data
        plotting.save_sweep_plot(per_model, model_dir / "plots" / "koa_bit_acc.svg",
                                 title=f"KOA bit accuracy vs N ({model_dir.name})")
        if report_path.exists():
            with open(report_path, encoding="utf-8") as f:
                rep = json.load(f)
            n1 = next((r["bit_acc_mean"] for r in rep["koa"]
                       if r["n"] == 1 and r["message_mode"] == "same"), "")
            summary_rows.append([model_dir.name, rep["clean_bit_acc"],
                                 rep["psnr_watermarked"], rep["ssim_watermarked"],
                                 rep["residual_similarity"], n1])
    if not series:
        raise ValueError(f"no sweep.csv files under {run_dir}")
    out = {"sweep_plot": plotting.save_sweep_plot(
        series, run_dir / "plots" / "koa_bit_acc_all_models.svg")}
    if summary_rows:
        out["summary"] = write_csv(run_dir / "summary.csv", SUMMARY_HEADER, summary_rows)
    return out
