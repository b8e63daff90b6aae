"""Figure rendering for sweep results (SVG via matplotlib).

Output is deterministic: element ids are derived from a fixed hash salt and no
creation date is embedded.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _deterministic_rc():
    plt.rcParams["svg.hashsalt"] = "resguard"


def save_sweep_plot(series, path, title="bit accuracy under the known-original attack"):
    """Line plot of bit accuracy vs number of known pairs N.

    ``series`` maps a label (e.g. "base/same") to a (n_values, accuracies)
    pair.  Saved as SVG.
    """
    _deterministic_rc()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for label in sorted(series):
        ns, accs = series[label]
        ax.plot(ns, accs, marker="o", markersize=3.5, linewidth=1.2, label=label)
    ax.set_xlabel("known host-watermarked pairs N")
    ax.set_ylabel("bit accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7)
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def save_training_curves(log_rows, path, title="training losses"):
    """Loss curves over training steps from the trainer's log rows."""
    _deterministic_rc()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    steps = [r["step"] for r in log_rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for key in ("loss_total", "loss_message", "loss_image", "loss_rse", "loss_koa"):
        vals = [r[key] for r in log_rows]
        if any(v not in (0.0, None) for v in vals):
            ax.plot(steps, vals, linewidth=1.0, label=key.replace("loss_", ""))
    ax.set_xlabel("step")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7)
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
