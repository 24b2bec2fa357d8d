"""Strict JSON configuration for simulation runs.

All lengths are meters and angles radians, except the SG ``axis_deg``
fields.  Unknown keys are rejected.  Every number without a default in the
physics literature is a desk-scale choice made here.
"""

import json
import math
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

__all__ = [
    "ConfigError",
    "GridConfig",
    "ClassicConfig",
    "ModifiedConfig",
    "SGConfig",
    "RunConfig",
    "load_config",
    "parse_config",
    "DEFAULT_GRIDS",
]


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridConfig(_Strict):
    n: Optional[int] = Field(None, ge=16)
    dx: Optional[float] = Field(None, gt=0)
    wavelength: Optional[float] = Field(None, gt=0)


DEFAULT_GRIDS = {
    "modified": {"n": 2**14, "dx": 2e-6, "wavelength": 532e-9},
    "classic": {"n": 2**14, "dx": 5e-6, "wavelength": 532e-9},
}


class ClassicConfig(_Strict):
    slit_separation: float = Field(500e-6, gt=0)
    slit_width: float = Field(25e-6, gt=0)
    L1: float = Field(1.0, gt=0)
    L2: float = Field(0.5, gt=0)
    focal: float = Field(0.75, gt=0)
    L3: float = Field(1.5, gt=0)
    # 0.1 of the fringe period wavelength*L1/slit_separation at the defaults
    wire_width: float = Field(106.4e-6, gt=0)
    n_wires: int = Field(5, ge=0)
    segments: int = Field(30, ge=1)
    absorber_margin: float = Field(0.1, gt=0, le=0.25)


class ModifiedConfig(_Strict):
    beam_waist: float = Field(1.5e-3, gt=0)
    # fringe period wavelength / (2 sin(half_angle)) = 100 um at 532 nm
    half_angle: float = Field(2.66e-3, gt=0, lt=math.pi / 2)
    crossing_z: float = Field(0.2, gt=0)
    L_far: float = Field(3.0, gt=0)
    wire_width: float = Field(10e-6, gt=0)
    n_wires: int = Field(5, ge=0)
    segments: int = Field(8, ge=1)
    absorber_margin: float = Field(0.1, gt=0, le=0.25)
    window_factor: float = Field(1.5, gt=0)


class _DeviceSpec(_Strict):
    axis_deg: float
    block: Literal["none", "up", "down", "both"] = "none"
    name: str = ""


class _DeviceElement(_Strict):
    device: _DeviceSpec


class _MergeSpec(_Strict):
    name: str = "merged"


class _MergeElement(_Strict):
    merge: _MergeSpec


class _DetectElement(_Strict):
    detect: dict = Field(default_factory=dict)

    @model_validator(mode="after")
    def _empty(self):
        if self.detect:
            raise ValueError("detect takes no parameters")
        return self


class _InputBeam(_Strict):
    axis_deg: float = 90.0
    sign: Literal["up", "down"] = "up"
    weight: float = Field(1.0, ge=0)


def _confirmation_chain():
    return [
        {"device": {"axis_deg": 90, "block": "down"}},
        {"device": {"axis_deg": 0}},
        {"merge": {}},
        {"device": {"axis_deg": 90, "block": "down"}},
        {"device": {"axis_deg": 0}},
        {"detect": {}},
    ]


class SGConfig(_Strict):
    input: _InputBeam = Field(default_factory=_InputBeam)
    elements: list[Union[_DeviceElement, _MergeElement, _DetectElement]] = Field(
        default_factory=_confirmation_chain, validate_default=True
    )


class RunConfig(_Strict):
    scenario: Literal["classic", "modified", "sg"]
    seed: int = Field(20070214, ge=0, lt=2**64)
    photons: int = Field(100_000, ge=0)
    grid: GridConfig = Field(default_factory=GridConfig)
    classic: ClassicConfig = Field(default_factory=ClassicConfig)
    modified: ModifiedConfig = Field(default_factory=ModifiedConfig)
    sg: SGConfig = Field(default_factory=SGConfig)

    def grid_params(self):
        """Grid parameters with per-scenario defaults filled in."""
        base = dict(DEFAULT_GRIDS.get(self.scenario, DEFAULT_GRIDS["modified"]))
        base.update({k: v for k, v in self.grid.model_dump().items() if v is not None})
        return base


def _format_errors(err):
    parts = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"])
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def parse_config(data):
    """Validate a decoded JSON object; raise :class:`ConfigError` naming bad keys."""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_errors(err)) from None


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return parse_config(data)
