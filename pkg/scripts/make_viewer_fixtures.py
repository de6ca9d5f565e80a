"""Generate viewer protocol fixtures from a real engine run.

Produces a snapshot sequence in which the operator drifts sideways (the
standing misalignment shows up in the residual), looks around over a
partially reconstructed room, and finally triggers a calibration that
zeroes the residual. The viewer test suite replays these frames.
"""

import json
from pathlib import Path

from televiz.scenario import (
    CameraConfig,
    HeadTarget,
    Mode,
    NetworkConfig,
    OperatorConfig,
    OperatorShift,
    ScenarioConfig,
)
from televiz.service.live import LiveEngine
from televiz.service.models import CalibrateCommand

OUT = Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures" / "snapshots.json"


def main() -> None:
    config = ScenarioConfig(
        name="viewer_fixture",
        duration_s=10.0,
        seed=7,
        mode=Mode.DECOUPLED_WITH_MESH,
        scene={"prescanned": True},
        mesh={"cell_size_m": 0.10},
        coverage_every_n_ticks=1,
        hmd=CameraConfig(hfov_deg=107, vfov_deg=98, cols=32, rows=32),
        network=NetworkConfig(command_delay_s=0.1, feedback_delay_s=0.1),
        operator=OperatorConfig(script=[
            OperatorShift(at_s=0.2, offset_m=(0.0, 0.35, 0.0)),
            HeadTarget(at_s=0.5, yaw_deg=65, move_duration_s=0.6),
        ]),
    )
    live = LiveEngine(config)
    frames = []

    def grab():
        frames.append(json.loads(live.snapshot().model_dump_json()))

    live.step_ticks(6)
    grab()                      # early, still aligned head but shifted body
    live.step_ticks(60)
    grab()                      # mid-turn: mixed live/mesh/blank labels
    live.step_ticks(60)
    grab()                      # settled at the yaw target, residual standing
    live.submit(CalibrateCommand())
    live.step_ticks(1)
    grab()                      # first frame after calibration: residual ~ 0
    live.step_ticks(12)
    grab()

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({
        "snapshot_period_s": live.snapshot_period_s,
        "frames": frames,
    }, indent=1) + "\n", encoding="utf-8")
    residuals = [f["calibration_residual"] for f in frames]
    print(f"wrote {len(frames)} frames to {OUT}")
    print("residuals:", ["%.3g" % r for r in residuals])


if __name__ == "__main__":
    main()
