"""Scenario runner, metrics emission, and the preset experiments.

Runs are plain functions over a :class:`ScenarioConfig`; the FastAPI layer
and the CLI both call them. Metrics are written as comma-separated text
with a header row and a fixed float format so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional

from pydantic import BaseModel

from .engine import Engine, OperatorScript
from .geometry import Pose
from .netsim import DegenerateSignal
from .scenario import Mode, ScenarioConfig
from .signals import estimate_lag
from .smoothing import measure_filter_lag

__all__ = [
    "MetricsRow",
    "RunSummary",
    "ModeComparison",
    "CompareReport",
    "FilterSweepEntry",
    "run_scenario",
    "compare_modes",
    "sweep_filter",
    "write_metrics_csv",
    "format_summary",
    "format_compare",
    "write_sweep_csv",
]

MODE_ORDER = [Mode.FIXED_RGB, Mode.DECOUPLED, Mode.DECOUPLED_WITH_MESH]


class MetricsRow(BaseModel):
    time_s: float
    operator_yaw_deg: float
    operator_pitch_deg: float
    robot_yaw_deg: float
    robot_pitch_deg: float
    lag_s: Optional[float] = None
    live_fraction: Optional[float] = None
    mesh_fraction: Optional[float] = None
    blank_fraction: Optional[float] = None
    calibration_residual: float = 0.0


class RunSummary(BaseModel):
    name: str
    mode: Mode
    ticks: int
    duration_s: float
    mean_lag_s: Optional[float] = None
    peak_lag_s: Optional[float] = None
    trace_lag_s: Optional[float] = None
    episode_lag_s: Optional[float] = None
    steady_state_gap_deg: float = 0.0
    time_avg_live_fraction: Optional[float] = None
    time_avg_mesh_fraction: Optional[float] = None
    time_avg_blank_fraction: Optional[float] = None
    final_calibration_residual: float = 0.0


class ModeComparison(BaseModel):
    mode: Mode
    time_avg_blank_fraction: Optional[float]
    time_avg_live_fraction: Optional[float]
    time_avg_mesh_fraction: Optional[float]
    mean_lag_s: Optional[float]
    steady_state_gap_deg: float


class CompareReport(BaseModel):
    name: str
    seed: int
    rows: list[ModeComparison]


class FilterSweepEntry(BaseModel):
    rate: float
    lag_ms: float


def _mean(values) -> Optional[float]:
    values = [v for v in values if v is not None]
    if not values:
        return None
    return float(sum(values) / len(values))


def run_scenario(config: ScenarioConfig, out_dir=None, seed: Optional[int] = None,
                 prebuilt_mesh_cells: Optional[dict] = None):
    """Run one scenario; returns (rows, summary) and optionally writes files."""
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    engine = Engine(config, prebuilt_mesh_cells=prebuilt_mesh_cells)
    ticks = engine.run()
    rows = [
        MetricsRow(
            time_s=t.time_s,
            operator_yaw_deg=math.degrees(t.operator_yaw),
            operator_pitch_deg=math.degrees(t.operator_pitch),
            robot_yaw_deg=math.degrees(t.robot_yaw),
            robot_pitch_deg=math.degrees(t.robot_pitch),
            lag_s=t.lag_s,
            live_fraction=t.live_fraction,
            mesh_fraction=t.mesh_fraction,
            blank_fraction=t.blank_fraction,
            calibration_residual=t.residual,
        )
        for t in ticks
    ]
    summary = _summarize(config, engine, rows)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_metrics_csv(rows, out / "metrics.csv")
        (out / "summary.txt").write_text(format_summary(summary), encoding="utf-8")
    return rows, summary


def _summarize(config: ScenarioConfig, engine: Engine, rows: list[MetricsRow]) -> RunSummary:
    dt = 1.0 / config.tick_rate_hz
    lags = [r.lag_s for r in rows if r.lag_s is not None]

    trace_lag = None
    try:
        trace_lag = estimate_lag(
            engine.operator_yaw_trace, engine.robot_yaw_trace, dt,
            max_lag_s=min(2.5, config.duration_s / 4.0),
        )
    except (DegenerateSignal, ValueError):
        pass

    episode_lag = None
    window = config.network.instability
    if window is not None:
        i0 = int(round((window.start_s + 0.3 * window.duration_s) / dt))
        i1 = int(round((window.start_s + window.duration_s) / dt))
        i1 = min(i1, len(engine.operator_yaw_trace))
        if i1 - i0 > int(3.0 / dt):
            try:
                episode_lag = estimate_lag(
                    engine.operator_yaw_trace[i0:i1],
                    engine.robot_yaw_trace[i0:i1],
                    dt,
                    max_lag_s=2.5,
                )
            except (DegenerateSignal, ValueError):
                pass

    tail = max(1, int(round(1.0 / dt)))
    gap_tail = engine.gap_trace[-tail:]
    return RunSummary(
        name=config.name,
        mode=config.mode,
        ticks=len(rows),
        duration_s=config.duration_s,
        mean_lag_s=_mean(lags),
        peak_lag_s=max(lags) if lags else None,
        trace_lag_s=trace_lag,
        episode_lag_s=episode_lag,
        steady_state_gap_deg=float(sum(gap_tail) / len(gap_tail)),
        time_avg_live_fraction=_mean(r.live_fraction for r in rows),
        time_avg_mesh_fraction=_mean(r.mesh_fraction for r in rows),
        time_avg_blank_fraction=_mean(r.blank_fraction for r in rows),
        final_calibration_residual=rows[-1].calibration_residual if rows else 0.0,
    )


def compare_modes(config: ScenarioConfig) -> CompareReport:
    """Run the same script and seed under all three viewing modes."""
    prebuilt = None
    if config.scene.prescanned:
        mesh = config.mesh.to_model()
        mesh.fill_from_scene(config.scene.to_model())
        prebuilt = mesh.cells
    comparisons = []
    for mode in MODE_ORDER:
        variant = config.model_copy(update={"mode": mode})
        cells = dict(prebuilt) if (prebuilt is not None and mode is Mode.DECOUPLED_WITH_MESH) else None
        _, summary = run_scenario(variant, prebuilt_mesh_cells=cells)
        comparisons.append(ModeComparison(
            mode=mode,
            time_avg_blank_fraction=summary.time_avg_blank_fraction,
            time_avg_live_fraction=summary.time_avg_live_fraction,
            time_avg_mesh_fraction=summary.time_avg_mesh_fraction,
            mean_lag_s=summary.mean_lag_s,
            steady_state_gap_deg=summary.steady_state_gap_deg,
        ))
    return CompareReport(name=config.name, seed=config.seed, rows=comparisons)


def sweep_filter(config: ScenarioConfig, rates) -> list[FilterSweepEntry]:
    """Measure smoothing lag for each rate on the scenario's head script."""
    dt = 1.0 / config.tick_rate_hz
    script = OperatorScript(config.operator.script, config.operator.height_m)
    n = int(round(config.duration_s * config.tick_rate_hz))
    poses = []
    for k in range(n):
        s = script.step(k * dt)
        poses.append(Pose.from_yaw_pitch(s.yaw, s.pitch, s.position))
    out = []
    for rate in rates:
        lag = measure_filter_lag(rate, dt, poses, max_lag_s=1.0)
        out.append(FilterSweepEntry(rate=rate, lag_ms=lag * 1000.0))
    return out


# ---------------------------------------------------------------------------
# text emission
# ---------------------------------------------------------------------------

_CSV_FIELDS = [
    "time_s",
    "operator_yaw_deg",
    "operator_pitch_deg",
    "robot_yaw_deg",
    "robot_pitch_deg",
    "lag_s",
    "live_fraction",
    "mesh_fraction",
    "blank_fraction",
    "calibration_residual",
]


def _fmt(value) -> str:
    if value is None:
        return "nan"
    return f"{value:.10g}"


def write_metrics_csv(rows: list[MetricsRow], path) -> None:
    lines = [",".join(_CSV_FIELDS)]
    for row in rows:
        data = row.model_dump()
        lines.append(",".join(_fmt(data[f]) for f in _CSV_FIELDS))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def format_summary(summary: RunSummary) -> str:
    lines = [f"name = {summary.name}", f"mode = {summary.mode.value}"]
    lines.append(f"ticks = {summary.ticks}")
    lines.append(f"duration_s = {_fmt(summary.duration_s)}")
    for key in (
        "mean_lag_s",
        "peak_lag_s",
        "trace_lag_s",
        "episode_lag_s",
        "steady_state_gap_deg",
        "time_avg_live_fraction",
        "time_avg_mesh_fraction",
        "time_avg_blank_fraction",
        "final_calibration_residual",
    ):
        lines.append(f"{key} = {_fmt(getattr(summary, key))}")
    return "\n".join(lines) + "\n"


def format_compare(report: CompareReport) -> str:
    header = f"{'mode':<20} {'blank':>9} {'live':>9} {'mesh':>9} {'lag_s':>8} {'gap_deg':>8}"
    lines = [f"scenario {report.name} seed {report.seed}", header]
    for row in report.rows:
        lines.append(
            f"{row.mode.value:<20} "
            f"{_fmt(row.time_avg_blank_fraction):>9} "
            f"{_fmt(row.time_avg_live_fraction):>9} "
            f"{_fmt(row.time_avg_mesh_fraction):>9} "
            f"{_fmt(row.mean_lag_s):>8} "
            f"{_fmt(row.steady_state_gap_deg):>8}"
        )
    return "\n".join(lines) + "\n"


def write_sweep_csv(entries: list[FilterSweepEntry], path) -> None:
    lines = ["rate,lag_ms"]
    for e in entries:
        lines.append(f"{_fmt(e.rate)},{_fmt(e.lag_ms)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
