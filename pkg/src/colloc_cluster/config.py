"""Pipeline configuration and aggregated validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Any, Mapping

from .measures import FULL, SIMPLIFIED

AUTO_K = (2, 15)


class ConfigError(ValueError):
    """Carries every validation problem found, not just the first."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class PipelineConfig:
    corpus: str | None = None
    stoplist: str | None = None
    out: str | None = None
    min_count: int = 1
    clusters: int | None = None  # None selects k by cross-validation
    k_min: int = AUTO_K[0]
    k_max: int = AUTO_K[1]
    folds: int = 10
    cv_max_points: int = 2000
    threshold: float = 0.30
    noise_mad_factor: float = 3.0
    tol: float = 1e-6
    max_iter: int = 500
    seed: int = 42
    variance: str = FULL
    strip_diacritics: bool = False
    threads: int = 1

    @property
    def k_range(self) -> tuple[int, int]:
        if self.clusters is not None:
            return (self.clusters, self.clusters)
        return (self.k_min, self.k_max)


def parse_clusters(value: Any) -> tuple[int | None, int, int]:
    """``"9"`` pins k; ``"auto"`` or ``"auto:3-12"`` selects it."""
    if isinstance(value, int):
        return value, value, value
    text = str(value).strip().lower()
    if text == "auto":
        return None, AUTO_K[0], AUTO_K[1]
    if text.startswith("auto:"):
        lo, _, hi = text[5:].partition("-")
        return None, int(lo), int(hi)
    k = int(text)
    return k, k, k


def validate_config(raw: Mapping[str, Any] | None = None) -> PipelineConfig:
    """Build a :class:`PipelineConfig` from loose values, reporting all problems at once."""
    raw = dict(raw or {})
    errors: list[str] = []
    known = {f.name for f in fields(PipelineConfig)}
    values: dict[str, Any] = {}

    for key in list(raw):
        if raw[key] is None:
            raw.pop(key)
        elif key not in known:
            errors.append(f"unknown option {key!r}")
            raw.pop(key)

    if "clusters" in raw:
        try:
            k, lo, hi = parse_clusters(raw.pop("clusters"))
            values["clusters"] = k
            if k is None:
                values["k_min"], values["k_max"] = lo, hi
        except ValueError:
            errors.append("clusters must be an integer or 'auto[:KMIN-KMAX]'")

    casts = {
        "min_count": int, "k_min": int, "k_max": int, "folds": int, "cv_max_points": int,
        "max_iter": int, "seed": int, "threads": int,
        "threshold": float, "noise_mad_factor": float, "tol": float,
    }
    for key, cast in casts.items():
        if key in raw:
            try:
                values[key] = cast(raw.pop(key))
            except (TypeError, ValueError):
                errors.append(f"{key} must be {'an integer' if cast is int else 'a number'}")
    values.update(raw)

    cfg = PipelineConfig(**{k: v for k, v in values.items() if k in known})

    if not 0.0 <= cfg.threshold <= 1.0 or math.isnan(cfg.threshold):
        errors.append("threshold out of [0,1]")
    if cfg.min_count < 1:
        errors.append("min_count must be >= 1")
    if cfg.clusters is not None and cfg.clusters < 1:
        errors.append("clusters must be >= 1")
    if cfg.clusters is None and not 1 <= cfg.k_min <= cfg.k_max:
        errors.append("auto cluster range needs 1 <= k_min <= k_max")
    if cfg.folds < 2:
        errors.append("folds must be >= 2")
    if cfg.cv_max_points < 2:
        errors.append("cv_max_points must be >= 2")
    if not cfg.noise_mad_factor >= 0:
        errors.append("noise_mad_factor must be >= 0")
    if not cfg.tol > 0:
        errors.append("tol must be > 0")
    if cfg.max_iter < 1:
        errors.append("max_iter must be >= 1")
    if cfg.variance not in (FULL, SIMPLIFIED):
        errors.append(f"variance must be '{FULL}' or '{SIMPLIFIED}'")
    if cfg.threads < 1:
        errors.append("threads must be >= 1")
    if errors:
        raise ConfigError(errors)
    return cfg
