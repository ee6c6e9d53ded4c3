"""Shared training configuration for both tagger architectures."""

from __future__ import annotations

from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for tagger training.

    The seed is mandatory: every training run must be reproducible. The
    remaining defaults are sized for desk-scale corpora (hundreds of
    sentences) and are recorded in every saved model file.
    """

    seed: int
    epochs: int = 50
    lr: float = 0.5
    l2: float = 1e-4
    batch_size: int = 16
    d_emb: int = 50
    d_hid: int = 64
    clip_norm: float = 5.0
    patience: int = 5
    dev_fraction: float = 0.1

    def __post_init__(self):
        for name in ("epochs", "lr", "batch_size", "d_emb", "d_hid", "clip_norm", "patience"):
            if getattr(self, name) <= 0:
                raise ValueError(f"TrainConfig.{name} must be positive")
        if self.l2 < 0:
            raise ValueError("TrainConfig.l2 must be non-negative")
        if not 0.0 <= self.dev_fraction < 1.0:
            raise ValueError("TrainConfig.dev_fraction must lie in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)
