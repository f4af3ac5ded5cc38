"""Validated experiment configuration."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

__all__ = ["AttackConfig", "ConfigError", "ExperimentConfig", "load_config"]


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class AttackConfig(_Strict):
    family: Literal["nasty", "malicious"]
    strategy: Literal["random_flip", "half_relabel_targeted", "adversarial_labels", "band_stuffing"]
    params: dict = Field(default_factory=dict)


class ExperimentConfig(_Strict):
    mode: Literal["predict", "region", "active", "abl", "bench"]
    hypothesis_class: dict
    distribution: dict
    target: dict
    m: int = Field(ge=1)
    eta: float = Field(default=0.0, ge=0.0, le=1.0)
    nu: float = Field(default=0.0, ge=0.0, lt=1.0)
    attack: AttackConfig | None = None
    trials: int = Field(default=1, ge=1)
    seed: int = 0
    n_test: int = Field(default=200, ge=1)
    epsilon: float = Field(default=0.02, gt=0.0, lt=1.0)
    delta: float = Field(default=0.1, gt=0.0, lt=1.0)
    active_method: Literal["rr", "dhm"] = "rr"
    schedule: dict | None = None
    alpha: float | None = Field(default=None, gt=0.0)
    out: str | None = None

    @field_validator("hypothesis_class", "distribution", "target")
    @classmethod
    def _has_kind(cls, v):
        if "kind" not in v:
            raise ValueError("descriptor needs a 'kind'")
        return v

    @model_validator(mode="after")
    def _consistent(self):
        from .adversaries import AttackSpec

        if self.attack is not None:
            AttackSpec(self.attack.family, self.attack.strategy, self.eta)
        if self.mode == "abl" and self.hypothesis_class.get("kind") != "halfspace":
            raise ValueError("abl mode needs a halfspace class")
        if self.mode == "bench" and self.attack is not None and self.attack.strategy != "half_relabel_targeted":
            raise ValueError("bench mode replays the targeted half-relabel attack")
        return self

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(exclude={"out"}), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]


def load_config(source: str | Path | dict) -> ExperimentConfig:
    """Parse a JSON file, JSON text or dict; raises :class:`ConfigError`."""
    try:
        if isinstance(source, dict):
            data = source
        else:
            text = str(source)
            if not text.lstrip().startswith("{"):
                text = Path(source).read_text()
            data = json.loads(text)
        return ExperimentConfig.model_validate(data)
    except (ValidationError, json.JSONDecodeError, OSError, ValueError) as e:
        raise ConfigError(str(e)) from e
