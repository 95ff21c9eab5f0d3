"""Run configuration for the benchmark harness, loaded from JSON."""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field

SEED_ENV_VAR = "CINESTAT_SEED"

# Default per-model attribute lists (the comparison tables' feature sets).
MLR_FEATURES = [
    "budget", "reviews_from_users", "reviews_from_critics", "top1000_voters_rating",
    "Action", "Animation", "Crime", "Drama", "Family", "Fantasy", "Horror",
    "Music", "Musical", "Mystery", "Sport", "Thriller",
]
LOGISTIC_FEATURES = [
    "top1000_voters_rating", "Action", "Crime", "Drama", "Fantasy", "Mystery",
    "Romance", "Sport", "Thriller", "War",
]
SVM_FEATURES = list(LOGISTIC_FEATURES)
ANN_FEATURES = [
    "duration", "avg_vote", "Action", "Adventure", "Animation", "Biography",
    "Comedy", "Crime", "Drama", "Family", "Fantasy", "Horror", "Mystery", "Thriller",
]
SLR_CANDIDATES = [
    "duration", "avg_vote", "votes", "budget", "reviews_from_users",
    "reviews_from_critics", "top1000_voters_rating",
]

MLR_FEATURES_2020 = ["duration", "Action", "Animation", "Biography", "Drama", "Horror"]
LOGISTIC_FEATURES_2020 = ["avg_vote", "Action", "Crime", "Fantasy", "Mystery"]
SVM_FEATURES_2020 = ["avg_vote", "Action", "Crime", "Drama", "Fantasy", "Mystery", "Thriller"]

ALL_MODELS = ("slr", "mlr", "logistic", "ridge", "lasso", "kmeans", "svm", "ann")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    dataset: str
    output_dir: str = "out"
    column_map: dict[str, str] = field(default_factory=dict)
    models: list[str] = field(default_factory=lambda: list(ALL_MODELS))
    features: dict[str, list[str]] = field(default_factory=dict)
    features_2020: dict[str, list[str]] = field(default_factory=dict)
    slr_candidates: list[str] = field(default_factory=lambda: list(SLR_CANDIDATES))
    bin_thresholds: tuple[int, int] = (40, 60)
    seed: int = 0
    ridge_lambda: float = 1150.0
    lasso_lambda: float = 0.145
    svm_C: float = 1.0
    svm_epochs: int = 50
    kmeans_restarts: int = 10
    sarimax_grid: dict[str, list[int]] = field(
        default_factory=lambda: {k: [0, 1] for k in "pdqPDQ"}
    )
    sarimax_exog: list[str] = field(default_factory=lambda: ["duration", "movie_count"])
    sarimax_max_evaluations: int = 300
    forecast_horizon: int = 24
    mlp_max_epochs: int = 500
    per_movie_rows: int = 10
    # optional second CSV of held-out movies with the flagged column rename
    # (a coefficient trained on one column is reused on another)
    test_2020: str | None = None
    test_2020_substitutions: dict[str, str] = field(
        default_factory=lambda: {"top1000_voters_rating": "avg_vote"}
    )

    def __post_init__(self):
        self.bin_thresholds = tuple(self.bin_thresholds)
        if len(self.bin_thresholds) != 2 or not self.bin_thresholds[0] < self.bin_thresholds[1]:
            raise ConfigError("bin thresholds must be two ordered values")
        unknown = set(self.models) - set(ALL_MODELS)
        if unknown:
            raise ConfigError(f"unknown models: {sorted(unknown)}")
        defaults = {
            "mlr": MLR_FEATURES, "logistic": LOGISTIC_FEATURES, "svm": SVM_FEATURES,
            "kmeans": SVM_FEATURES, "ann": ANN_FEATURES, "ridge": MLR_FEATURES,
            "lasso": MLR_FEATURES,
        }
        for name, feats in defaults.items():
            self.features.setdefault(name, list(feats))
        defaults_2020 = {
            "mlr": MLR_FEATURES_2020, "logistic": LOGISTIC_FEATURES_2020,
            "svm": SVM_FEATURES_2020,
        }
        for name, feats in defaults_2020.items():
            self.features_2020.setdefault(name, list(feats))
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed is not None:
            try:
                self.seed = int(env_seed)
            except ValueError as exc:
                raise ConfigError(f"{SEED_ENV_VAR} must be an integer") from exc

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        raw = copy.deepcopy(raw)
        if "dataset" not in raw:
            raise ConfigError("config must name a dataset")
        allowed = set(cls.__dataclass_fields__)
        unknown = set(raw) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
