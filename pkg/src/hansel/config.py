"""Augmentation and evaluation configuration.

One frozen config object drives token placement, residual sampling, training
mix composition, and evaluation caps.  Multi-unit control is configured by
passing an ordered list of units (coarsest first) with one stride per unit;
the residual always applies to the last listed unit.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .tokens import TokenRendering
from .units import LengthUnit

FRAMEWORK_HANSEL = "hansel"
FRAMEWORK_GRETEL = "gretel"
FRAMEWORK_VANILLA = "vanilla"
FRAMEWORKS = (FRAMEWORK_HANSEL, FRAMEWORK_GRETEL, FRAMEWORK_VANILLA)

# Inference-only variant: a vanilla-trained model prompted with a target length.
FRAMEWORK_VANILLA_STAR = "vanilla*"


def _as_tuple(value) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


@dataclass(frozen=True)
class HanselConfig:
    delta: int | tuple[int, ...] = 20
    residual_max: int = 1
    residual_fraction: float = 0.20
    mask_n: int = 10
    unit: LengthUnit | tuple[LengthUnit, ...] = LengthUnit.WORD
    rendering: TokenRendering = field(default_factory=TokenRendering)
    seed: int = 0
    vanilla_fraction: float = 0.20
    gretel_within_nonvanilla: float = 0.20
    max_tokens: int = 1722

    def __post_init__(self):
        units = _as_tuple(self.unit)
        deltas = _as_tuple(self.delta)
        if len(deltas) == 1 and len(units) > 1:
            deltas = deltas * len(units)
        if len(deltas) != len(units):
            raise ConfigError(
                f"{len(units)} units need {len(units)} strides, got {len(deltas)}"
            )
        if len(set(units)) != len(units):
            raise ConfigError("duplicate length units in multi-unit config")
        for d in deltas:
            if not isinstance(d, int) or d < 1:
                raise ConfigError(f"stride must be an integer >= 1, got {d!r}")
        if self.residual_max < 0:
            raise ConfigError(f"residual_max must be >= 0, got {self.residual_max}")
        if self.residual_max >= deltas[-1]:
            raise ConfigError(
                f"residual_max {self.residual_max} must be smaller than the "
                f"residual unit's stride {deltas[-1]}"
            )
        for name in ("residual_fraction", "vanilla_fraction", "gretel_within_nonvanilla"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.mask_n < 0:
            raise ConfigError(f"mask_n must be >= 0, got {self.mask_n}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.max_tokens < 1:
            raise ConfigError(f"max_tokens must be >= 1, got {self.max_tokens}")
        object.__setattr__(self, "unit", units[0] if len(units) == 1 else units)
        object.__setattr__(self, "delta", deltas[0] if len(deltas) == 1 else deltas)

    @property
    def families(self) -> tuple[tuple[LengthUnit, int], ...]:
        """(unit, stride) pairs in placement order; singletons for single-unit."""
        return tuple(zip(_as_tuple(self.unit), _as_tuple(self.delta)))

    @property
    def residual_family(self) -> tuple[LengthUnit, int]:
        """The family the residual applies to (the last listed unit)."""
        return self.families[-1]

    @property
    def multi_unit(self) -> bool:
        return len(self.families) > 1

    def with_overrides(self, **kwargs) -> "HanselConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs) if kwargs else self

    def to_dict(self) -> dict[str, Any]:
        return {
            "delta": list(_as_tuple(self.delta)) if self.multi_unit else self.delta,
            "residual_max": self.residual_max,
            "residual_fraction": self.residual_fraction,
            "mask_n": self.mask_n,
            "unit": [u.value for u in _as_tuple(self.unit)] if self.multi_unit else _as_tuple(self.unit)[0].value,
            "rendering": {
                "template": self.rendering.template,
                "compact_template": self.rendering.compact_template,
            },
            "seed": self.seed,
            "vanilla_fraction": self.vanilla_fraction,
            "gretel_within_nonvanilla": self.gretel_within_nonvanilla,
            "max_tokens": self.max_tokens,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "HanselConfig":
        known = {
            "delta", "residual_max", "residual_fraction", "mask_n", "unit",
            "rendering", "seed", "vanilla_fraction", "gretel_within_nonvanilla",
            "max_tokens",
        }
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kwargs = dict(d)
        if "unit" in kwargs:
            raw = kwargs["unit"]
            if isinstance(raw, str):
                kwargs["unit"] = LengthUnit.parse(raw)
            else:
                kwargs["unit"] = tuple(LengthUnit.parse(u) for u in raw)
        if "delta" in kwargs and isinstance(kwargs["delta"], list):
            kwargs["delta"] = tuple(kwargs["delta"])
        if "rendering" in kwargs and isinstance(kwargs["rendering"], dict):
            kwargs["rendering"] = TokenRendering(**kwargs["rendering"])
        return cls(**kwargs)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:12]


def load_config(path: str | Path) -> HanselConfig:
    """Load a JSON config file; missing fields fall back to defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    return HanselConfig.from_dict(data)
