"""Flat JSON experiment configuration.

Unknown keys are hard errors so typos never silently change an experiment.
The attack grid is restricted to N in [1, 50].
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, asdict
from pathlib import Path

from .codec import CodecConfig
from .distortion import DistortionSpec, default_menu
from .losses import LossWeights
from .trainer import TrainConfig

MODEL_FLAGS = {
    "base": (False, False),        # (enable_rse, enable_knl)
    "rse": (True, False),
    "knl": (False, True),
    "resguard": (True, True),
}


@dataclass
class ExperimentConfig:
    image_size: int = 32
    message_length: int = 16
    hidden_channels: int = 32
    message_planes: int = 4
    strength: float = 0.05
    steps: int = 3000
    lr: float = 1e-3
    batch_pairs: int = 4
    lambda1: float = 1.0
    lambda2: float = 0.7
    lambda3: float = 0.5
    tau: float = 0.1
    distortions: list = field(default_factory=lambda: [d.to_dict() for d in default_menu()])
    models: list = field(default_factory=lambda: ["base", "resguard"])
    n_grid: list = field(default_factory=lambda: [1, 5, 10, 25, 50])
    message_modes: list = field(default_factory=lambda: ["same", "different"])
    train_images: int = 2000
    eval_images: int = 500
    attack_targets: int = 200
    residual_images: int = 100
    dataset_dir: str = None
    seed: int = 0
    out_dir: str = "runs/desk"
    eval_every: int = 250
    symmetric_pairs: bool = True
    reuse_checkpoints: bool = False

    def validate(self):
        for m in self.models:
            if m not in MODEL_FLAGS:
                raise ValueError(f"unknown model {m!r}; expected one of {sorted(MODEL_FLAGS)}")
        if not self.n_grid:
            raise ValueError("n_grid must not be empty")
        for n in self.n_grid:
            if not 1 <= int(n) <= 50:
                raise ValueError(f"n_grid entries must lie in [1, 50], got {n}")
        for mode in self.message_modes:
            if mode not in ("same", "different"):
                raise ValueError(f"unknown message mode {mode!r}")
        if self.train_images < 2:
            raise ValueError("train_images must be >= 2")
        needed = max(int(n) for n in self.n_grid) + self.attack_targets
        if self.eval_images < needed:
            raise ValueError(
                f"eval_images={self.eval_images} too small: need max(n_grid) + "
                f"attack_targets = {needed} for disjoint attacker/eval splits")
        if self.dataset_dir is not None and not Path(self.dataset_dir).is_dir():
            raise FileNotFoundError(f"dataset_dir not found: {self.dataset_dir}")
        self.distortion_specs()
        self.weights().validate()
        self.codec_config().validate()
        return self

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d).validate()

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def to_dict(self):
        return asdict(self)

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    # derived pieces -------------------------------------------------------

    def codec_config(self):
        return CodecConfig(
            image_size=self.image_size,
            channels=3,
            message_length=self.message_length,
            hidden_channels=self.hidden_channels,
            message_planes=self.message_planes,
            strength=self.strength,
        )

    def weights(self):
        return LossWeights(lambda1=self.lambda1, lambda2=self.lambda2,
                           lambda3=self.lambda3, tau=self.tau)

    def distortion_specs(self):
        return [DistortionSpec.from_dict(d) for d in self.distortions]

    def train_config(self, model, seed=None):
        enable_rse, enable_knl = MODEL_FLAGS[model]
        return TrainConfig(
            codec=self.codec_config(),
            steps=self.steps,
            lr=self.lr,
            batch_pairs=self.batch_pairs,
            weights=self.weights(),
            distortions=self.distortion_specs(),
            enable_rse=enable_rse,
            enable_knl=enable_knl,
            seed=self.seed if seed is None else seed,
            symmetric=self.symmetric_pairs,
            eval_every=self.eval_every,
        )
