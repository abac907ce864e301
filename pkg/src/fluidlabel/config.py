"""Aggregated pipeline configuration.

One flat record covering superpixel extraction, label growth, noise
refinement, and the training-math weights, loadable from a JSON file with
field-by-field overrides (CLI flags, HTTP PATCH). Defaults are the settings
the pipeline is tuned for out of the box.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Union

from .errors import ValidationError
from .pseudolabel import GrowthConfig
from .refinement import RefineConfig
from .trainmath import LossWeights


@dataclass(frozen=True)
class PipelineConfig:
    # superpixels
    region_size: int = 13
    compactness: float = 10.0
    iterations: int = 10
    # pseudo-label growth
    threshold_srf_irf: float = 0.6
    threshold_ped: float = 0.5
    trust_init: float = 0.5
    trust_seed: float = 1.0
    decay_per_hop: float = 0.05
    # noise refinement
    self_confidence_keep_fraction: float = 0.8
    trust_gate: float = 0.8
    delta: Union[float, str] = 1.0
    # training math
    alpha: float = 1.0
    beta: float = 1.0
    w_max: float = 0.1
    t_max: int = 1000
    ema_decay: float = 0.99

    def __post_init__(self):
        # delegate range checks to the per-stage configs
        self.growth()
        self.refine()
        self.loss_weights()
        if self.region_size < 2:
            raise ValidationError(f"region_size must be >= 2, got {self.region_size}")
        if self.iterations < 1:
            raise ValidationError(f"iterations must be >= 1, got {self.iterations}")
        if self.compactness <= 0:
            raise ValidationError(f"compactness must be positive, got {self.compactness}")

    def growth(self) -> GrowthConfig:
        return GrowthConfig(
            threshold_srf_irf=self.threshold_srf_irf,
            threshold_ped=self.threshold_ped,
            trust_init=self.trust_init,
            trust_seed=self.trust_seed,
            decay_per_hop=self.decay_per_hop,
        )

    def refine(self) -> RefineConfig:
        return RefineConfig(
            self_confidence_keep_fraction=self.self_confidence_keep_fraction,
            trust_gate=self.trust_gate,
            delta=self.delta,
        )

    def loss_weights(self) -> LossWeights:
        return LossWeights(
            alpha=self.alpha,
            beta=self.beta,
            w_max=self.w_max,
            t_max=self.t_max,
            ema_decay=self.ema_decay,
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def merged(self, overrides: dict[str, Any]) -> "PipelineConfig":
        """New config with the given fields replaced; unknown fields rejected."""
        known = {f.name: f for f in fields(self)}
        cleaned: dict[str, Any] = {}
        for key, value in overrides.items():
            if key not in known:
                raise ValidationError(f"unknown config field {key!r}")
            cleaned[key] = _coerce(key, value)
        return replace(self, **cleaned)


_INT_FIELDS = {"region_size", "iterations", "t_max"}


def _coerce(key: str, value: Any) -> Any:
    if key == "delta":
        if value == "static":
            return "static"
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        raise ValidationError('delta must be a number in [0, 1] or "static"')
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"config field {key!r} must be a number, got {value!r}")
    if key in _INT_FIELDS:
        if int(value) != value:
            raise ValidationError(f"config field {key!r} must be an integer")
        return int(value)
    return float(value)


def load_config(path: Union[str, Path]) -> PipelineConfig:
    """Read a JSON config file; missing fields keep their defaults."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed config file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"config file {path} must hold a JSON object")
    return PipelineConfig().merged(doc)
