"""Request/response and wire-message schemas for the service layer.

The websocket protocol carries one JSON object per text frame, each with a
`type` field: snapshot | command | ack | error. Label grids travel as a
row-major string of L/M/B characters and colors as six hex digits per
cell, which keeps snapshot frames compact.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

from ..harness import CompareReport, MetricsRow, RunSummary
from ..scenario import Mode, ScenarioConfig

LABEL_CHARS = "LMB"


class PoseModel(BaseModel):
    position: tuple[float, float, float]
    orientation_wxyz: tuple[float, float, float, float]
    yaw_deg: float
    pitch_deg: float


class CoverageImage(BaseModel):
    cols: int
    rows: int
    labels: str
    colors_hex: str


class CoverageReportModel(BaseModel):
    live_fraction: float
    mesh_fraction: float
    blank_fraction: float


class SnapshotMessage(BaseModel):
    type: Literal["snapshot"] = "snapshot"
    tick: int
    time_s: float
    mode: Mode
    scanning: bool = False
    operator_pose: PoseModel
    robot_pose: PoseModel
    coverage_image: Optional[CoverageImage] = None
    coverage_report: Optional[CoverageReportModel] = None
    lag_estimate: Optional[float] = None
    calibration_residual: float = 0.0


class HeadTargetCommand(BaseModel):
    type: Literal["command"] = "command"
    name: Literal["head_target"] = "head_target"
    yaw: float = Field(ge=-180, le=180)
    pitch: float = Field(ge=-90, le=90, default=0.0)


class BaseVelocityCommand(BaseModel):
    type: Literal["command"] = "command"
    name: Literal["base_velocity"] = "base_velocity"
    v: float = Field(ge=-2, le=2)
    turn: float = Field(ge=-180, le=180, default=0.0)


class CalibrateCommand(BaseModel):
    type: Literal["command"] = "command"
    name: Literal["calibrate"] = "calibrate"


class SetModeCommand(BaseModel):
    type: Literal["command"] = "command"
    name: Literal["set_mode"] = "set_mode"
    mode: Mode


class ScanCommand(BaseModel):
    type: Literal["command"] = "command"
    name: Literal["scan"] = "scan"
    action: Literal["start", "stop"]


CommandMessage = Union[
    HeadTargetCommand, BaseVelocityCommand, CalibrateCommand, SetModeCommand, ScanCommand
]


class AckMessage(BaseModel):
    type: Literal["ack"] = "ack"
    name: str
    tick: int


class ErrorMessage(BaseModel):
    type: Literal["error"] = "error"
    message: str


class RunRequest(BaseModel):
    config: ScenarioConfig
    seed: Optional[int] = None
    include_metrics: bool = False


class RunResponse(BaseModel):
    summary: RunSummary
    metrics: Optional[list[MetricsRow]] = None


class CompareRequest(BaseModel):
    config: ScenarioConfig
    seed: Optional[int] = None


class SweepRequest(BaseModel):
    config: ScenarioConfig
    rates: list[float] = Field(min_length=1)


class SweepEntryModel(BaseModel):
    rate: float
    lag_ms: float


class SweepResponse(BaseModel):
    entries: list[SweepEntryModel]


class HealthResponse(BaseModel):
    status: str
    version: str


__all__ = [
    "LABEL_CHARS",
    "PoseModel",
    "CoverageImage",
    "CoverageReportModel",
    "SnapshotMessage",
    "CommandMessage",
    "HeadTargetCommand",
    "BaseVelocityCommand",
    "CalibrateCommand",
    "SetModeCommand",
    "ScanCommand",
    "AckMessage",
    "ErrorMessage",
    "RunRequest",
    "RunResponse",
    "CompareRequest",
    "CompareReport",
    "SweepRequest",
    "SweepResponse",
    "SweepEntryModel",
    "HealthResponse",
]
