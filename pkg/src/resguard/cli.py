"""Command line interface.

Subcommands: gen-data, train, embed, extract, attack, evaluate, sweep, ablate,
report, run.  Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import codec as codec_mod
from . import data as data_mod
from . import experiment
from .attack import AttackKit, koa_attack
from .checkpoint import load_checkpoint
from .config import MODEL_FLAGS, ExperimentConfig


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common_flags(sub):
    sub.add_argument("--config", help="path to the experiment config JSON")
    sub.add_argument("--seed", type=int, help="override the config seed")
    sub.add_argument("--out", help="override the output directory")


def _load_config(args, required=True):
    if args.config is None:
        if required:
            raise UsageError("the --config flag is required for this command")
        return None
    cfg = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        cfg.seed = int(args.seed)
    if args.out is not None:
        cfg.out_dir = args.out
    return cfg.validate()


class UsageError(Exception):
    pass


def build_parser():
    parser = _Parser(prog="resguard",
                     description="Desk-scale watermarking under the known-original attack")
    subs = parser.add_subparsers(dest="command", metavar="command")

    p = subs.add_parser("gen-data", parents=[], help="write a synthetic PNG dataset",
                        add_help=True)
    _common_flags(p)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--size", type=int, default=32)
    p.set_defaults(func=cmd_gen_data)

    p = subs.add_parser("train", help="train one model variant")
    _common_flags(p)
    p.add_argument("--model", choices=sorted(MODEL_FLAGS), default="resguard")
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("embed", help="embed a message into a PNG image")
    _common_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--message-hex", required=True)
    p.add_argument("--output", help="output PNG path (default: <image>.watermarked.png)")
    p.set_defaults(func=cmd_embed)

    p = subs.add_parser("extract", help="decode the message from a PNG image")
    _common_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image", required=True)
    p.set_defaults(func=cmd_extract)

    p = subs.add_parser("attack", help="average-residual removal on a target image")
    _common_flags(p)
    p.add_argument("--pair", nargs=2, action="append", metavar=("HOST", "WATERMARKED"),
                   required=True, help="one known host/watermarked PNG pair (repeatable)")
    p.add_argument("--target", required=True, help="watermarked PNG to attack")
    p.add_argument("--output", required=True, help="attacked PNG path")
    p.add_argument("--unclamped", action="store_true")
    p.set_defaults(func=cmd_attack)

    p = subs.add_parser("evaluate", help="evaluate a checkpoint")
    _common_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--model", default="model", help="label recorded in the report")
    p.set_defaults(func=cmd_evaluate)

    p = subs.add_parser("sweep", help="attack sweep over N for a checkpoint")
    _common_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--model", default="model")
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("ablate", help="train and evaluate all four ablation cells")
    _common_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = subs.add_parser("run", help="run the configured experiment end to end")
    _common_flags(p)
    p.set_defaults(func=cmd_run)

    p = subs.add_parser("report", help="re-render figures and summary from a run directory")
    _common_flags(p)
    p.add_argument("--run-dir", help="run directory (defaults to --out or the config out_dir)")
    p.set_defaults(func=cmd_report)

    return parser


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_gen_data(args):
    out = Path(args.out or "dataset")
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else 0
    images = data_mod.generate_synthetic_dataset(args.count, args.size, seed)
    for i, img in enumerate(images):
        data_mod.save_image_png(img, out / f"img_{i:05d}.png")
    print(f"wrote {len(images)} images to {out}")
    return 0


def cmd_train(args):
    cfg = _load_config(args)
    out_dir = Path(cfg.out_dir) / args.model
    params, log, artifacts = experiment.train_model(cfg, args.model, out_dir=out_dir)
    final_acc = next((r["clean_bit_acc"] for r in reversed(log)
                      if r["clean_bit_acc"] is not None), None)
    acc_text = f"{final_acc:.4f}" if final_acc is not None else "n/a"
    print(f"trained {args.model}: {cfg.steps} steps, final probe bit acc {acc_text}")
    print(f"checkpoint: {artifacts['checkpoint']}")
    return 0


def _load_params(path):
    params, header = load_checkpoint(path)
    return params


def cmd_embed(args):
    params = _load_params(args.checkpoint)
    img = data_mod.load_image_png(args.image)
    bits = codec_mod.message_from_hex(args.message_hex, params.config.message_length)
    wm = codec_mod.embed(img, bits, params)
    out_path = Path(args.output) if args.output else Path(args.image).with_suffix(".watermarked.png")
    data_mod.save_image_png(wm, out_path)
    print(f"embedded {codec_mod.message_to_hex(bits)} -> {out_path}")
    return 0


def cmd_extract(args):
    params = _load_params(args.checkpoint)
    img = data_mod.load_image_png(args.image)
    soft = codec_mod.extract(img, params)
    bits = codec_mod.threshold(soft)
    print(f"hex: {codec_mod.message_to_hex(bits)}")
    print("bits: " + "".join(str(int(b)) for b in bits))
    print("soft: " + " ".join(f"{v:.4f}" for v in soft))
    return 0


def cmd_attack(args):
    pairs = []
    for host_path, wm_path in args.pair:
        pairs.append((data_mod.load_image_png(host_path), data_mod.load_image_png(wm_path)))
    kit = AttackKit(pairs=pairs)
    target = data_mod.load_image_png(args.target)
    attacked = koa_attack(target, kit.r_avg, clamp=not args.unclamped)
    data_mod.save_image_png(attacked, args.output)
    print(f"attacked with N={kit.n} averaged residual -> {args.output}")
    return 0


def cmd_evaluate(args):
    cfg = _load_config(args)
    params = _load_params(args.checkpoint)
    report = experiment.evaluate_model(cfg, params, args.model)
    out_dir = Path(cfg.out_dir) / args.model
    path = experiment.write_eval_report(out_dir / "eval_report.json", report)
    print(f"clean bit acc:      {report.clean_bit_acc:.4f}")
    for label, acc in report.distortion_bit_acc.items():
        print(f"{label}: {acc:.4f}")
    print(f"psnr watermarked:   {report.psnr_watermarked:.2f} dB")
    print(f"ssim watermarked:   {report.ssim_watermarked:.4f}")
    print(f"residual similarity: {report.residual_similarity:.4f}")
    for row in report.koa:
        print(f"KOA N={row['n']:<3d} mode={row['message_mode']:<9s} "
              f"bit acc {row['bit_acc_mean']:.4f}")
    print(f"report: {path}")
    return 0


def cmd_sweep(args):
    cfg = _load_config(args)
    params = _load_params(args.checkpoint)
    report = experiment.evaluate_model(cfg, params, args.model)
    out_dir = Path(cfg.out_dir) / args.model
    sweep_path = experiment.write_sweep_csv(out_dir / "sweep.csv", report.koa)
    from . import plotting
    series = {}
    for mode in cfg.message_modes:
        rows = [r for r in report.koa if r["message_mode"] == mode]
        series[f"{args.model}/{mode}"] = ([r["n"] for r in rows],
                                          [r["bit_acc_mean"] for r in rows])
    plot_path = plotting.save_sweep_plot(series, out_dir / "plots" / "koa_bit_acc.svg",
                                         title=f"KOA bit accuracy vs N ({args.model})")
    print(f"sweep:  {sweep_path}")
    print(f"figure: {plot_path}")
    return 0


def cmd_ablate(args):
    cfg = _load_config(args)
    cfg.models = sorted(MODEL_FLAGS)
    artifacts = experiment.run_experiment(cfg)
    print(f"ablation grid written to {artifacts['out_dir']}")
    return 0


def cmd_run(args):
    cfg = _load_config(args)
    artifacts = experiment.run_experiment(cfg)
    print(f"experiment written to {artifacts['out_dir']}")
    return 0


def cmd_report(args):
    run_dir = args.run_dir or args.out
    if run_dir is None and args.config is not None:
        run_dir = _load_config(args).out_dir
    if run_dir is None:
        raise UsageError("report needs --run-dir, --out, or --config")
    out = experiment.render_report(run_dir)
    print(f"figures rendered under {run_dir}")
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args) or 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
