"""Hyperparameter bundle shared by the four classifier kinds."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from ..errors import ConfigError

LOGISTIC = "logistic"
FOREST = "forest"
ADABOOST = "adaboost"
MLP = "mlp"
MODEL_KINDS = (LOGISTIC, FOREST, ADABOOST, MLP)


@dataclass(frozen=True)
class TrainConfig:
    """One grid point. Fields irrelevant to `kind` are ignored by training."""
    kind: str = LOGISTIC
    seed: int = 0
    # logistic
    learning_rate: float = 0.5
    epochs: int = 300
    l2: float = 0.0
    # forest
    n_trees: int = 100
    max_depth: int | None = 16
    min_leaf: int = 1
    features_per_split: int | str | None = None  # None/"sqrt", "all", or a count
    criterion: str = "gini"
    bootstrap: bool = True
    # adaboost
    n_rounds: int = 100
    # mlp
    hidden: tuple[int, ...] = (400, 400, 400)
    dropout: float = 0.1
    mlp_learning_rate: float = 0.01
    mlp_epochs: int = 20
    batch_size: int = 128

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if self.learning_rate <= 0 or self.mlp_learning_rate <= 0:
            raise ConfigError("learning rates must be > 0")
        if self.epochs < 1 or self.mlp_epochs < 1 or self.n_trees < 1 or self.n_rounds < 1:
            raise ConfigError("iteration counts must be >= 1")
        if any(w < 1 for w in self.hidden):
            raise ConfigError("hidden layer widths must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must lie in [0, 1)")
        if self.criterion not in ("gini", "entropy"):
            raise ConfigError(f"unknown split criterion {self.criterion!r}")
        if self.min_leaf < 1 or self.batch_size < 1:
            raise ConfigError("min_leaf and batch_size must be >= 1")

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=seed)

    def describe(self) -> str:
        """Compact, deterministic rendering of the non-default hyperparameters."""
        default = TrainConfig(kind=self.kind)
        parts = [self.kind]
        for f in fields(self):
            if f.name in ("kind", "seed"):
                continue
            value = getattr(self, f.name)
            if value != getattr(default, f.name):
                parts.append(f"{f.name}={value}")
        return " ".join(parts)


def default_grid(kind: str) -> list[TrainConfig]:
    """Small desk-scale grids used when an experiment declares none."""
    if kind == LOGISTIC:
        return [TrainConfig(kind=LOGISTIC, l2=v) for v in (0.0, 1e-4, 1e-2)]
    if kind == FOREST:
        return [TrainConfig(kind=FOREST, n_trees=t, max_depth=d)
                for t in (50, 100) for d in (8, 16, None)]
    if kind == ADABOOST:
        return [TrainConfig(kind=ADABOOST, n_rounds=r) for r in (50, 100, 200)]
    if kind == MLP:
        return [TrainConfig(kind=MLP, mlp_learning_rate=v) for v in (1e-3, 1e-2)]
    raise ConfigError(f"unknown model kind {kind!r}")
