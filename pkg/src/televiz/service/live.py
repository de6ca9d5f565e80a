"""Wall-clock paced engine loop feeding websocket subscribers.

The engine itself runs on simulated time; this wrapper advances it so sim
time tracks wall time, assembles a snapshot every few ticks, and fans it
out to subscriber queues. Commands from any client are queued into the
engine and take effect at the next tick boundary.
"""

from __future__ import annotations

import asyncio
import math
from typing import Optional

import numpy as np

from ..engine import Engine, EngineCommand, TickResult
from ..geometry import Pose, compose, pitch_of, yaw_of
from ..scenario import ScenarioConfig
from .models import (
    LABEL_CHARS,
    CommandMessage,
    CoverageImage,
    CoverageReportModel,
    PoseModel,
    SnapshotMessage,
)

__all__ = ["LiveEngine"]


def _pose_model(pose: Pose) -> PoseModel:
    return PoseModel(
        position=tuple(float(v) for v in pose.t),
        orientation_wxyz=tuple(float(v) for v in pose.q),
        yaw_deg=math.degrees(yaw_of(pose)),
        pitch_deg=math.degrees(pitch_of(pose)),
    )


def _coverage_image(labels: np.ndarray, colors: np.ndarray) -> CoverageImage:
    flat = labels.ravel()
    chars = np.array(list(LABEL_CHARS))
    label_str = "".join(chars[flat])
    hexdigits = colors.reshape(-1, 3).astype(np.uint8).tobytes().hex()
    return CoverageImage(
        cols=labels.shape[1], rows=labels.shape[0],
        labels=label_str, colors_hex=hexdigits,
    )


class LiveEngine:
    """One engine, many snapshot subscribers."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.engine = Engine(config)
        self.dt = 1.0 / config.tick_rate_hz
        self.ticks_per_snapshot = max(
            1, int(round(config.tick_rate_hz / config.snapshot_rate_hz))
        )
        self.snapshot_period_s = self.ticks_per_snapshot * self.dt
        self._subscribers: set[asyncio.Queue] = set()
        self._last_tick: Optional[TickResult] = None
        self._task: Optional[asyncio.Task] = None
        self._scanning = False

    # ------------------------------------------------------------------
    def subscribe(self) -> asyncio.Queue:
        queue: asyncio.Queue = asyncio.Queue(maxsize=4)
        self._subscribers.add(queue)
        return queue

    def unsubscribe(self, queue: asyncio.Queue) -> None:
        self._subscribers.discard(queue)

    def submit(self, command: CommandMessage) -> int:
        """Queue a wire command; returns the tick it will apply at."""
        if command.name == "head_target":
            self.engine.queue_command(
                EngineCommand(name="head_target", yaw_deg=command.yaw, pitch_deg=command.pitch)
            )
        elif command.name == "base_velocity":
            self.engine.queue_command(
                EngineCommand(name="base_velocity", forward_mps=command.v, turn_dps=command.turn)
            )
        elif command.name == "calibrate":
            self.engine.queue_command(EngineCommand(name="calibrate"))
        elif command.name == "set_mode":
            self.engine.queue_command(EngineCommand(name="set_mode", mode=command.mode))
        elif command.name == "scan":
            self._scanning = command.action == "start"
            self.engine.queue_command(
                EngineCommand(name="scan", scan_on=self._scanning)
            )
        return self.engine.tick_index

    # ------------------------------------------------------------------
    def step_ticks(self, n: int) -> None:
        for _ in range(n):
            self._last_tick = self.engine.tick()

    def snapshot(self) -> SnapshotMessage:
        engine = self.engine
        if self._last_tick is None:
            self.step_ticks(1)
        last = self._last_tick
        operator = engine.view.hmd_in_world_virtual
        robot = compose(engine.anchors.robot_in_world_virtual, engine.latest_zed_in_robot)
        image = None
        report = None
        if engine.last_labels is not None:
            image = _coverage_image(engine.last_labels, engine.last_colors)
            report = CoverageReportModel(
                live_fraction=engine.last_report.live_fraction,
                mesh_fraction=engine.last_report.mesh_fraction,
                blank_fraction=engine.last_report.blank_fraction,
            )
        return SnapshotMessage(
            tick=last.tick,
            time_s=last.time_s,
            mode=engine.mode,
            scanning=self._scanning,
            operator_pose=_pose_model(operator),
            robot_pose=_pose_model(robot),
            coverage_image=image,
            coverage_report=report,
            lag_estimate=last.lag_s,
            calibration_residual=last.residual,
        )

    def _broadcast(self, snapshot: SnapshotMessage) -> None:
        text = snapshot.model_dump_json()
        for queue in list(self._subscribers):
            if queue.full():
                try:
                    queue.get_nowait()  # drop the stalest frame
                except asyncio.QueueEmpty:
                    pass
            queue.put_nowait(text)

    async def run(self) -> None:
        """Advance the engine in real time and broadcast snapshots."""
        loop = asyncio.get_running_loop()
        start = loop.time()
        next_snapshot_tick = 0
        while True:
            due = int((loop.time() - start) / self.dt) + 1
            behind = due - self.engine.tick_index
            # cap the catch-up burst so a paused event loop cannot stall us
            self.step_ticks(max(1, min(behind, self.ticks_per_snapshot * 5)))
            if self.engine.tick_index > next_snapshot_tick:
                self._broadcast(self.snapshot())
                next_snapshot_tick = self.engine.tick_index + self.ticks_per_snapshot - 1
            target = start + self.engine.tick_index * self.dt
            delay = max(0.0, target - loop.time())
            await asyncio.sleep(delay if delay > 0 else 0)

    def start(self) -> None:
        if self._task is None or self._task.done():
            self._task = asyncio.get_running_loop().create_task(self.run())

    async def stop(self) -> None:
        if self._task is not None:
            self._task.cancel()
            try:
                await self._task
            except asyncio.CancelledError:
                pass
            self._task = None
