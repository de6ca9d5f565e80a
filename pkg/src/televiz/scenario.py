"""Declarative scenario configuration and the built-in presets.

A scenario file is a single JSON object matching :class:`ScenarioConfig`.
Parsing and serialization round-trip losslessly, and invalid input raises
:class:`ConfigError` carrying the offending field path.
"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from .world import CameraModel, MeshModel, SceneBox, SceneModel, SceneRect

__all__ = [
    "ConfigError",
    "Mode",
    "ScenarioConfig",
    "load_scenario",
    "loads_scenario",
    "dumps_scenario",
    "preset",
    "preset_names",
]


class ConfigError(Exception):
    """Invalid scenario input; the message names the field path."""


class Mode(str, Enum):
    FIXED_RGB = "FixedRGB"
    DECOUPLED = "Decoupled"
    DECOUPLED_WITH_MESH = "DecoupledWithMesh"


Color = tuple[int, int, int]


class HeadSweep(BaseModel):
    """Sinusoidal yaw sweep: amplitude * sin(2*pi*(t-start)/period)."""

    kind: Literal["head_sweep"] = "head_sweep"
    start_s: float = Field(ge=0)
    duration_s: float = Field(gt=0)
    amplitude_deg: float = Field(gt=0, le=180)
    period_s: float = Field(gt=0)


class HeadTarget(BaseModel):
    """Slew the head linearly to a target orientation, then hold."""

    kind: Literal["head_target"] = "head_target"
    at_s: float = Field(ge=0)
    yaw_deg: float = Field(ge=-180, le=180)
    pitch_deg: float = Field(ge=-90, le=90, default=0.0)
    move_duration_s: float = Field(ge=0, default=0.0)


class OperatorShift(BaseModel):
    """One-shot displacement of the operator inside the tracked volume."""

    kind: Literal["operator_shift"] = "operator_shift"
    at_s: float = Field(ge=0)
    offset_m: tuple[float, float, float]


class CalibrateEvent(BaseModel):
    kind: Literal["calibrate"] = "calibrate"
    at_s: float = Field(ge=0)


class ScanPhase(BaseModel):
    """Window during which captured frames are folded into the mesh."""

    kind: Literal["scan"] = "scan"
    start_s: float = Field(ge=0)
    stop_s: float = Field(gt=0)


class BaseMove(BaseModel):
    """Commanded base velocity over a window (kinematic locomotion)."""

    kind: Literal["base_move"] = "base_move"
    at_s: float = Field(ge=0)
    duration_s: float = Field(gt=0)
    forward_mps: float = Field(ge=-2, le=2, default=0.0)
    turn_dps: float = Field(ge=-180, le=180, default=0.0)


ScriptEvent = Annotated[
    Union[HeadSweep, HeadTarget, OperatorShift, CalibrateEvent, ScanPhase, BaseMove],
    Field(discriminator="kind"),
]


class InstabilityConfig(BaseModel):
    start_s: float = Field(ge=0)
    duration_s: float = Field(gt=0)
    extra_delay_s: float = Field(ge=0)


class NetworkConfig(BaseModel):
    command_delay_s: float = Field(ge=0, default=0.2)
    feedback_delay_s: float = Field(ge=0, default=0.2)
    jitter_stddev_s: float = Field(ge=0, default=0.0)
    instability: Optional[InstabilityConfig] = None


class NeckConfig(BaseModel):
    yaw_limit_deg: float = Field(gt=0, le=180, default=55.0)
    pitch_limit_deg: float = Field(gt=0, le=90, default=40.0)
    max_rate_dps: float = Field(gt=0, default=120.0)
    mount_height_m: float = Field(gt=0, default=1.5)
    camera_offset_m: tuple[float, float, float] = (0.05, 0.0, 0.10)


class CameraConfig(BaseModel):
    hfov_deg: float = Field(gt=0, lt=180)
    vfov_deg: float = Field(gt=0, lt=180)
    max_range_m: float = Field(gt=0, default=10.0)
    cols: int = Field(ge=1, le=1024, default=64)
    rows: int = Field(ge=1, le=1024, default=64)
    depth_jitter_std_m: float = Field(ge=0, default=0.0)

    def to_model(self) -> CameraModel:
        return CameraModel(
            horizontal_fov_deg=self.hfov_deg,
            vertical_fov_deg=self.vfov_deg,
            max_range_m=self.max_range_m,
            cols=self.cols,
            rows=self.rows,
        )


class BoxSpec(BaseModel):
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    color: Color


class PlaneSpec(BaseModel):
    """Axis-aligned rectangle: axis index, plane offset, bounds on the other axes."""

    axis: int = Field(ge=0, le=2)
    offset: float
    lo2: tuple[float, float]
    hi2: tuple[float, float]
    color: Color


class RoomSpec(BaseModel):
    """Closed rectangular room centered on the origin with the floor at z=0."""

    size: tuple[float, float, float] = (8.0, 6.0, 3.0)
    wall_colors: tuple[Color, Color, Color, Color] = (
        (180, 60, 60),
        (60, 140, 190),
        (200, 170, 60),
        (90, 170, 90),
    )
    floor_color: Color = (110, 98, 85)
    ceiling_color: Color = (235, 235, 228)


class SceneConfig(BaseModel):
    room: Optional[RoomSpec] = RoomSpec()
    boxes: list[BoxSpec] = []
    planes: list[PlaneSpec] = []
    prescanned: bool = False

    def to_model(self) -> SceneModel:
        boxes = [SceneBox(lo=b.lo, hi=b.hi, color=b.color) for b in self.boxes]
        rects = [
            SceneRect(axis=p.axis, offset=p.offset, lo2=p.lo2, hi2=p.hi2, color=p.color)
            for p in self.planes
        ]
        if self.room is not None:
            sx, sy, sz = self.room.size
            hx, hy = sx / 2, sy / 2
            w = self.room.wall_colors
            rects += [
                SceneRect(axis=2, offset=0.0, lo2=(-hx, -hy), hi2=(hx, hy),
                          color=self.room.floor_color),
                SceneRect(axis=2, offset=sz, lo2=(-hx, -hy), hi2=(hx, hy),
                          color=self.room.ceiling_color),
                SceneRect(axis=0, offset=hx, lo2=(-hy, 0.0), hi2=(hy, sz), color=w[0]),
                SceneRect(axis=0, offset=-hx, lo2=(-hy, 0.0), hi2=(hy, sz), color=w[1]),
                SceneRect(axis=1, offset=hy, lo2=(-hx, 0.0), hi2=(hx, sz), color=w[2]),
                SceneRect(axis=1, offset=-hy, lo2=(-hx, 0.0), hi2=(hx, sz), color=w[3]),
            ]
        if not boxes and not rects:
            raise ConfigError("scene: must contain at least one primitive")
        return SceneModel(boxes=boxes, rects=rects)


class MeshConfig(BaseModel):
    cell_size_m: float = Field(gt=0, default=0.05)
    tint_strength: float = Field(gt=0, le=1, default=0.35)

    def to_model(self) -> MeshModel:
        return MeshModel(cell_size=self.cell_size_m, tint_strength=self.tint_strength)


class OperatorConfig(BaseModel):
    height_m: float = Field(gt=0, default=1.6)
    script: list[ScriptEvent] = []


class OdometryConfig(BaseModel):
    noise_std_m: float = Field(ge=0, default=0.0)
    noise_std_deg: float = Field(ge=0, default=0.0)


class ScenarioConfig(BaseModel):
    name: str = "scenario"
    duration_s: float = Field(gt=0, default=10.0)
    tick_rate_hz: float = Field(gt=0, le=1000, default=60.0)
    seed: int = 0
    mode: Mode = Mode.DECOUPLED
    scene: SceneConfig = SceneConfig()
    mesh: MeshConfig = MeshConfig()
    network: NetworkConfig = NetworkConfig()
    neck: NeckConfig = NeckConfig()
    camera: CameraConfig = CameraConfig(hfov_deg=90, vfov_deg=60)
    hmd: CameraConfig = CameraConfig(hfov_deg=107, vfov_deg=98)
    filter_rate: float = Field(gt=0, le=1, default=0.2)
    filter_rotation: bool = True
    filter_translation: bool = True
    coverage_every_n_ticks: int = Field(ge=0, default=1)
    lag_window_s: float = Field(gt=0, default=4.0)
    snapshot_rate_hz: float = Field(gt=0, default=20.0)
    operator: OperatorConfig = OperatorConfig()
    odometry: OdometryConfig = OdometryConfig()


def loads_scenario(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from exc
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            path = ".".join(str(p) for p in err["loc"])
            lines.append(f"{path}: {err['msg']}")
        raise ConfigError("; ".join(lines)) from exc


def load_scenario(path) -> ScenarioConfig:
    return loads_scenario(Path(path).read_text(encoding="utf-8"))


def dumps_scenario(config: ScenarioConfig) -> str:
    return json.dumps(config.model_dump(mode="json"), indent=2) + "\n"


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def _latency_sweep() -> ScenarioConfig:
    """Head-tracking latency measurement: full-range sweep, nominal delays."""
    return ScenarioConfig(
        name="latency_sweep",
        duration_s=20.0,
        mode=Mode.DECOUPLED,
        coverage_every_n_ticks=0,
        operator=OperatorConfig(
            script=[HeadSweep(start_s=1.0, duration_s=19.0, amplitude_deg=75, period_s=2.8)]
        ),
    )


def _latency_instability() -> ScenarioConfig:
    """Same sweep with a mid-run episode of heavy extra feedback delay."""
    return ScenarioConfig(
        name="latency_instability",
        duration_s=30.0,
        mode=Mode.DECOUPLED,
        coverage_every_n_ticks=0,
        network=NetworkConfig(
            command_delay_s=0.2,
            feedback_delay_s=0.2,
            instability=InstabilityConfig(start_s=10.0, duration_s=14.0, extra_delay_s=1.5),
        ),
        operator=OperatorConfig(
            script=[HeadSweep(start_s=1.0, duration_s=29.0, amplitude_deg=75, period_s=2.8)]
        ),
    )


def _rom_gap() -> ScenarioConfig:
    """Turn to a yaw beyond the neck limit and hold; measures the gap."""
    return ScenarioConfig(
        name="rom_gap",
        duration_s=8.0,
        mode=Mode.DECOUPLED_WITH_MESH,
        scene=SceneConfig(prescanned=True),
        operator=OperatorConfig(
            script=[HeadTarget(at_s=1.0, yaw_deg=75, move_duration_s=1.5)]
        ),
    )


def _head_turn(seed: int = 0) -> ScenarioConfig:
    """Look-around pattern used for the three-way mode comparison."""
    return ScenarioConfig(
        name="head_turn",
        duration_s=12.0,
        seed=seed,
        mode=Mode.DECOUPLED,
        scene=SceneConfig(prescanned=True),
        coverage_every_n_ticks=2,
        network=NetworkConfig(command_delay_s=0.2, feedback_delay_s=0.2, jitter_stddev_s=0.02),
        operator=OperatorConfig(
            script=[
                HeadTarget(at_s=1.0, yaw_deg=40, move_duration_s=0.8),
                HeadTarget(at_s=3.5, yaw_deg=-40, move_duration_s=1.2),
                HeadTarget(at_s=6.5, yaw_deg=70, move_duration_s=1.0),
                HeadTarget(at_s=9.5, yaw_deg=0, move_duration_s=0.8),
            ]
        ),
    )


def _coverage_props() -> ScenarioConfig:
    """Static scan phase followed by sweeps; exercises the coverage labels."""
    return ScenarioConfig(
        name="coverage_props",
        duration_s=10.0,
        mode=Mode.DECOUPLED_WITH_MESH,
        mesh=MeshConfig(cell_size_m=0.10),
        operator=OperatorConfig(
            script=[
                ScanPhase(start_s=1.0, stop_s=4.0),
                HeadSweep(start_s=5.0, duration_s=4.5, amplitude_deg=70, period_s=4.0),
            ]
        ),
    )


def _calibration_drift() -> ScenarioConfig:
    """Operator shifts sideways mid-run, then triggers a calibration."""
    return ScenarioConfig(
        name="calibration_drift",
        duration_s=8.0,
        mode=Mode.DECOUPLED,
        operator=OperatorConfig(
            script=[
                OperatorShift(at_s=2.0, offset_m=(0.0, 0.35, -0.05)),
                CalibrateEvent(at_s=5.0),
            ]
        ),
    )


def _demo() -> ScenarioConfig:
    """Longer mixed scenario for interactive serving."""
    return ScenarioConfig(
        name="demo",
        duration_s=60.0,
        mode=Mode.DECOUPLED_WITH_MESH,
        coverage_every_n_ticks=3,
        mesh=MeshConfig(cell_size_m=0.10),
        scene=SceneConfig(
            boxes=[
                BoxSpec(lo=(1.5, -1.0, 0.0), hi=(2.3, 0.2, 0.8), color=(150, 75, 40)),
                BoxSpec(lo=(-2.5, 1.0, 0.0), hi=(-1.9, 2.6, 1.8), color=(70, 70, 160)),
            ]
        ),
        operator=OperatorConfig(
            script=[
                ScanPhase(start_s=1.0, stop_s=6.0),
                HeadSweep(start_s=7.0, duration_s=12.0, amplitude_deg=70, period_s=6.0),
                HeadTarget(at_s=20.0, yaw_deg=0, move_duration_s=1.0),
            ]
        ),
    )


_PRESETS = {
    "latency_sweep": _latency_sweep,
    "latency_instability": _latency_instability,
    "rom_gap": _rom_gap,
    "head_turn": _head_turn,
    "coverage_props": _coverage_props,
    "calibration_drift": _calibration_drift,
    "demo": _demo,
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def preset(name: str, seed: Optional[int] = None) -> ScenarioConfig:
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset '{name}'; choose from {preset_names()}") from None
    config = builder()
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    return config
