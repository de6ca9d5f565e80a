"""Fixed-step simulation engine.

One engine owns the whole live state: the scripted operator, the command
and feedback channels, the robot's neck servo and base, the virtual-scene
anchors, the smoothing filter, the reconstruction mesh, and the coverage
classifier. Everything advances tick by tick on simulated time; identical
config and seed give bit-identical runs.

Per tick, in order: the operator moves and the head/base command is sent;
the robot polls commands, slews its neck within joint limits, integrates
the base, and sends feedback (pose measurements plus captured points while
scanning); the operator side polls feedback, applies queued calibration or
mode commands at the boundary, refreshes the anchors, filters the
tracked-volume frame, recomputes the rendered view, classifies coverage,
and appends one metrics row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import statechain
from .calibration import alignment_residual, apply_calibration, calibrate
from .geometry import Pose, compose, inverse
from .netsim import ChannelConfig, DelayedChannel, InstabilityWindow
from .scenario import (
    BaseMove,
    CalibrateEvent,
    HeadSweep,
    HeadTarget,
    Mode,
    OperatorShift,
    ScanPhase,
    ScenarioConfig,
)
from .smoothing import FilterState, filter_step
from .statechain import AnchorMode, MeasurementSet, VirtualAnchors
from .world import (
    PointCloudFrame,
    capture_pointcloud,
    classify_coverage_grid,
    scan_mesh,
)

__all__ = ["Engine", "OperatorSample", "OperatorScript", "EngineCommand", "TickResult"]


@dataclass(frozen=True)
class OperatorSample:
    yaw: float
    pitch: float
    position: np.ndarray
    base_forward: float
    base_turn: float
    calibrate: bool
    scanning: bool


class OperatorScript:
    """Stateful evaluation of the scripted operator, one sample per tick."""

    def __init__(self, events, height_m: float):
        self.height = height_m
        self.events = sorted(events, key=lambda e: getattr(e, "at_s", getattr(e, "start_s", 0.0)))
        self.yaw = 0.0
        self.pitch = 0.0
        self.shift = np.zeros(3)
        self._pending = list(self.events)
        self._sweep: Optional[HeadSweep] = None
        self._slew = None  # (t0, yaw0, pitch0, target_yaw, target_pitch, duration)
        self._scans = [e for e in self.events if isinstance(e, ScanPhase)]
        self._bases = [e for e in self.events if isinstance(e, BaseMove)]

    def step(self, t: float) -> OperatorSample:
        fire_calibration = False
        while self._pending:
            ev = self._pending[0]
            start = getattr(ev, "at_s", getattr(ev, "start_s", 0.0))
            if start > t:
                break
            self._pending.pop(0)
            if isinstance(ev, HeadSweep):
                self._sweep = ev
                self._slew = None
            elif isinstance(ev, HeadTarget):
                # anchored at the scheduled time, not the activating tick
                self._slew = (
                    ev.at_s,
                    self.yaw,
                    self.pitch,
                    math.radians(ev.yaw_deg),
                    math.radians(ev.pitch_deg),
                    ev.move_duration_s,
                )
                self._sweep = None
            elif isinstance(ev, OperatorShift):
                self.shift = self.shift + np.asarray(ev.offset_m, dtype=float)
            elif isinstance(ev, CalibrateEvent):
                fire_calibration = True
            # scan and base windows are evaluated by time, not consumed

        if self._sweep is not None:
            sw = self._sweep
            phase = min(max(t - sw.start_s, 0.0), sw.duration_s)
            self.yaw = math.radians(sw.amplitude_deg) * math.sin(
                2.0 * math.pi * phase / sw.period_s
            )
            self.pitch = 0.0
        elif self._slew is not None:
            t0, y0, p0, yt, pt, dur = self._slew
            u = 1.0 if dur <= 0 else min((t - t0) / dur, 1.0)
            self.yaw = y0 + u * (yt - y0)
            self.pitch = p0 + u * (pt - p0)

        scanning = any(s.start_s <= t < s.stop_s for s in self._scans)
        forward = turn = 0.0
        for b in self._bases:
            if b.at_s <= t < b.at_s + b.duration_s:
                forward, turn = b.forward_mps, math.radians(b.turn_dps)
        position = np.array([0.0, 0.0, self.height]) + self.shift
        return OperatorSample(
            yaw=self.yaw,
            pitch=self.pitch,
            position=position,
            base_forward=forward,
            base_turn=turn,
            calibrate=fire_calibration,
            scanning=scanning,
        )


@dataclass(frozen=True)
class EngineCommand:
    """External command applied at the next tick boundary."""

    name: str  # head_target | base_velocity | calibrate | set_mode | scan
    yaw_deg: float = 0.0
    pitch_deg: float = 0.0
    forward_mps: float = 0.0
    turn_dps: float = 0.0
    mode: Optional[Mode] = None
    scan_on: Optional[bool] = None


@dataclass
class TickResult:
    tick: int
    time_s: float
    operator_yaw: float
    operator_pitch: float
    robot_yaw: float
    robot_pitch: float
    lag_s: Optional[float]
    live_fraction: Optional[float]
    mesh_fraction: Optional[float]
    blank_fraction: Optional[float]
    residual: float
    gap_deg: float


def _clip(value: float, limit: float) -> float:
    return max(-limit, min(limit, value))


class Engine:
    """Deterministic fixed-step simulation of one scenario."""

    def __init__(self, config: ScenarioConfig, prebuilt_mesh_cells: Optional[dict] = None):
        self.config = config
        self.dt = 1.0 / config.tick_rate_hz
        self.mode = config.mode
        self.scene = config.scene.to_model()
        self.camera = config.camera.to_model()
        self.hmd = config.hmd.to_model()
        self.script = OperatorScript(config.operator.script, config.operator.height_m)

        net = config.network
        instability = None
        if net.instability is not None:
            instability = InstabilityWindow(
                start=net.instability.start_s,
                duration=net.instability.duration_s,
                extra_delay=net.instability.extra_delay_s,
            )
        self.command_channel = DelayedChannel(ChannelConfig(
            base_delay=net.command_delay_s,
            jitter_stddev=net.jitter_stddev_s,
            seed=config.seed,
            tick_rate=config.tick_rate_hz,
        ))
        # instability models a congested feedback path; commands keep flowing
        self.feedback_channel = DelayedChannel(ChannelConfig(
            base_delay=net.feedback_delay_s,
            jitter_stddev=net.jitter_stddev_s,
            instability=instability,
            seed=config.seed + 1,
            tick_rate=config.tick_rate_hz,
        ))
        self._odometry_rng = np.random.default_rng(config.seed + 2)

        self.mesh = config.mesh.to_model()
        if prebuilt_mesh_cells is not None:
            self.mesh.cells = dict(prebuilt_mesh_cells)
        elif config.scene.prescanned and self.mode is Mode.DECOUPLED_WITH_MESH:
            self.mesh.fill_from_scene(self.scene)

        # robot state
        self.neck_yaw = 0.0
        self.neck_pitch = 0.0
        self.base_yaw = 0.0
        self.base_pos = np.zeros(3)
        self._cmd_target = (0.0, 0.0, 0.0, 0.0)  # yaw, pitch, forward, turn

        # operator-side state: latest arrived measurements, primed from t=0 truth
        self._camera_extrinsic = Pose.translation(*config.neck.camera_offset_m)
        zr0 = statechain.zed_in_robot(
            statechain.neck_pose(0.0, 0.0, (0, 0, config.neck.mount_height_m)),
            self._camera_extrinsic,
        )
        body0 = Pose.identity()
        zw0 = compose(body0, zr0)
        self.latest_zed_in_robot = zr0
        self.latest_zed_in_world = zw0
        self.latest_neck = (0.0, 0.0)
        self.latest_frame = PointCloudFrame(
            points=np.zeros((0, 3)), colors=np.zeros((0, 3), dtype=np.int64),
            capture_pose=zw0, timestamp=0.0, camera=self.camera,
        )

        hmd0 = Pose.from_yaw_pitch(0.0, 0.0, (0, 0, config.operator.height_m))
        anchor_mode = (
            AnchorMode.MESH_ANCHORED if self.mode is Mode.DECOUPLED_WITH_MESH
            else AnchorMode.NO_MESH
        )
        self.anchors = VirtualAnchors(
            tracking_in_robot_virtual=calibrate(zr0, hmd0).tracking_in_robot_virtual,
            robot_in_world_virtual=statechain.robot_body_from_odometry(zw0, zr0),
            mesh_in_world_virtual=Pose.identity(),
            mode=anchor_mode,
        )
        self.filter = FilterState(
            smoothed=compose(self.anchors.robot_in_world_virtual,
                             self.anchors.tracking_in_robot_virtual),
            rate=config.filter_rate,
            period=self.dt,
            filter_rotation=config.filter_rotation,
            filter_translation=config.filter_translation,
        )

        self.tick_index = 0
        self.view = None
        self.last_report = None
        self.last_labels = None
        self.last_colors = None
        self._manual_head: Optional[tuple[float, float]] = None
        self._manual_base: Optional[tuple[float, float]] = None
        self._manual_scan: Optional[bool] = None
        self._queued: list[EngineCommand] = []
        self._op_yaw_trace: list[float] = []
        self._robot_yaw_trace: list[float] = []
        self.gap_trace: list[float] = []

    # ------------------------------------------------------------------
    def queue_command(self, command: EngineCommand) -> None:
        self._queued.append(command)

    def _drain_commands(self) -> bool:
        """Apply queued external commands at the tick boundary.

        Input-like commands take effect immediately on this tick.
        Returns whether a calibration was requested; it runs later in the
        tick, against the measurements this tick produces.
        """
        want_calibrate = False
        for cmd in self._queued:
            if cmd.name == "head_target":
                self._manual_head = (math.radians(cmd.yaw_deg), math.radians(cmd.pitch_deg))
            elif cmd.name == "base_velocity":
                self._manual_base = (cmd.forward_mps, math.radians(cmd.turn_dps))
            elif cmd.name == "calibrate":
                want_calibrate = True
            elif cmd.name == "set_mode" and cmd.mode is not None:
                self._set_mode(cmd.mode)
            elif cmd.name == "scan" and cmd.scan_on is not None:
                self._manual_scan = cmd.scan_on
        self._queued.clear()
        return want_calibrate

    def _set_mode(self, mode: Mode) -> None:
        self.mode = mode
        anchor_mode = (
            AnchorMode.MESH_ANCHORED if mode is Mode.DECOUPLED_WITH_MESH
            else AnchorMode.NO_MESH
        )
        self.anchors = replace(self.anchors, mode=anchor_mode)

    # ------------------------------------------------------------------
    def tick(self) -> TickResult:
        t = self.tick_index * self.dt
        cfg = self.config
        want_calibrate = self._drain_commands()

        # 1. operator
        sample = self.script.step(t)
        op_yaw, op_pitch = sample.yaw, sample.pitch
        if self._manual_head is not None:
            op_yaw, op_pitch = self._manual_head
        base_cmd = (sample.base_forward, sample.base_turn)
        if self._manual_base is not None:
            base_cmd = self._manual_base
        scanning = sample.scanning if self._manual_scan is None else self._manual_scan
        hmd_pose = Pose.from_yaw_pitch(op_yaw, op_pitch, sample.position)
        hmd_in_tracking = statechain.hmd_in_tracking(Pose.identity(), hmd_pose)

        # 2. command path
        self.command_channel.send((op_yaw, op_pitch, base_cmd[0], base_cmd[1]), t)

        # 3. robot
        for payload in self.command_channel.poll(t):
            self._cmd_target = payload
        cmd_yaw, cmd_pitch, fwd, turn = self._cmd_target
        neck = cfg.neck
        max_step = math.radians(neck.max_rate_dps) * self.dt
        want_yaw = _clip(cmd_yaw, math.radians(neck.yaw_limit_deg))
        want_pitch = _clip(cmd_pitch, math.radians(neck.pitch_limit_deg))
        self.neck_yaw += _clip(want_yaw - self.neck_yaw, max_step)
        self.neck_pitch += _clip(want_pitch - self.neck_pitch, max_step)
        self.base_yaw += turn * self.dt
        heading = self.base_yaw
        self.base_pos = self.base_pos + fwd * self.dt * np.array(
            [math.cos(heading), math.sin(heading), 0.0]
        )
        body = Pose.from_yaw_pitch(self.base_yaw, 0.0, self.base_pos)
        head_in_body = statechain.neck_pose(
            self.neck_yaw, self.neck_pitch, (0, 0, neck.mount_height_m)
        )
        zed_r = statechain.zed_in_robot(head_in_body, self._camera_extrinsic)
        zed_w_true = compose(body, zed_r)
        zed_w = self._noisy_odometry(zed_w_true)

        if scanning:
            frame = capture_pointcloud(
                self.scene, self.camera, zed_w,
                depth_jitter_std=cfg.camera.depth_jitter_std_m,
                rng=self._odometry_rng if cfg.camera.depth_jitter_std_m > 0 else None,
            )
            frame = replace(frame, timestamp=t)
        else:
            frame = PointCloudFrame(
                points=np.zeros((0, 3)), colors=np.zeros((0, 3), dtype=np.int64),
                capture_pose=zed_w, timestamp=t, camera=self.camera,
            )

        # 4. feedback path
        self.feedback_channel.send(
            (self.neck_yaw, self.neck_pitch, zed_r, zed_w, frame), t
        )

        # 5. operator side receives
        arrived = self.feedback_channel.poll(t)
        for neck_yaw, neck_pitch, a_zr, a_zw, a_frame in arrived:
            self.latest_neck = (neck_yaw, neck_pitch)
            self.latest_zed_in_robot = a_zr
            self.latest_zed_in_world = a_zw
            self.latest_frame = a_frame
            if len(a_frame) and self.mode is Mode.DECOUPLED_WITH_MESH:
                scan_mesh(self.mesh, a_frame)

        # 6. re-anchor if requested, with this tick's measurements
        if want_calibrate or sample.calibrate:
            result = calibrate(self.latest_zed_in_robot, hmd_in_tracking, tick=self.tick_index)
            self.anchors = apply_calibration(self.anchors, result)
            # re-anchoring is intentional; snap the filter so the new anchor
            # takes effect on this very view instead of slewing toward it
            self.filter = replace(
                self.filter,
                smoothed=compose(self.anchors.robot_in_world_virtual,
                                 self.anchors.tracking_in_robot_virtual),
            )

        # 7. anchors per mode
        if self.anchors.mode is AnchorMode.MESH_ANCHORED:
            self.anchors = replace(
                self.anchors,
                robot_in_world_virtual=statechain.robot_body_from_odometry(
                    self.latest_zed_in_world, self.latest_zed_in_robot
                ),
            )

        # 8. smooth the tracked-volume frame
        target = compose(self.anchors.robot_in_world_virtual,
                         self.anchors.tracking_in_robot_virtual)
        if cfg.filter_rate >= 1.0:
            effective = self.anchors
            self.filter = replace(self.filter, smoothed=target)
        else:
            self.filter = filter_step(self.filter, target)
            effective = replace(
                self.anchors,
                tracking_in_robot_virtual=compose(
                    inverse(self.anchors.robot_in_world_virtual), self.filter.smoothed
                ),
            )

        # 9. rendered view
        meas = MeasurementSet(
            hmd_in_tracking=hmd_in_tracking,
            zed_in_robot=self.latest_zed_in_robot,
            zed_in_world=self.latest_zed_in_world,
            timestamp=t,
        )
        self.view = statechain.decoupled_view(meas, effective)
        zed_world_virtual = compose(
            effective.robot_in_world_virtual, self.latest_zed_in_robot
        )
        gap = math.degrees(_axis_angle(
            self.view.hmd_in_world_virtual.forward(), zed_world_virtual.forward()
        ))
        residual = alignment_residual(self.view.zed_in_hmd_virtual)

        # 10. coverage
        live = mesh_f = blank = None
        every = cfg.coverage_every_n_ticks
        if every > 0 and self.tick_index % every == 0:
            use_mesh = self.mesh if self.mode is Mode.DECOUPLED_WITH_MESH else None
            display_lock = (
                self.view.hmd_in_world_virtual if self.mode is Mode.FIXED_RGB else None
            )
            report, labels, colors = classify_coverage_grid(
                self.scene, use_mesh, self.hmd,
                self.view.hmd_in_world_virtual, self.latest_frame,
                display_lock=display_lock,
            )
            self.last_report, self.last_labels, self.last_colors = report, labels, colors
        if self.last_report is not None:
            live = self.last_report.live_fraction
            mesh_f = self.last_report.mesh_fraction
            blank = self.last_report.blank_fraction

        # 11. lag over a trailing window
        self._op_yaw_trace.append(op_yaw)
        self._robot_yaw_trace.append(self.latest_neck[0])
        lag = self._windowed_lag()

        self.gap_trace.append(gap)
        result = TickResult(
            tick=self.tick_index,
            time_s=t,
            operator_yaw=op_yaw,
            operator_pitch=op_pitch,
            robot_yaw=self.latest_neck[0],
            robot_pitch=self.latest_neck[1],
            lag_s=lag,
            live_fraction=live,
            mesh_fraction=mesh_f,
            blank_fraction=blank,
            residual=residual,
            gap_deg=gap,
        )
        self.tick_index += 1
        return result

    # ------------------------------------------------------------------
    def _noisy_odometry(self, pose: Pose) -> Pose:
        odo = self.config.odometry
        if odo.noise_std_m <= 0 and odo.noise_std_deg <= 0:
            return pose
        t = pose.t
        q = pose.q
        if odo.noise_std_m > 0:
            t = t + self._odometry_rng.normal(0.0, odo.noise_std_m, size=3)
        if odo.noise_std_deg > 0:
            axis = self._odometry_rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = math.radians(self._odometry_rng.normal(0.0, odo.noise_std_deg))
            half = angle / 2.0
            dq = np.array([math.cos(half), *(math.sin(half) * axis)])
            q = compose(Pose(q=dq), Pose(q=q)).q
        return Pose(q=q, t=t)

    def _windowed_lag(self) -> Optional[float]:
        window = int(round(self.config.lag_window_s / self.dt))
        if len(self._op_yaw_trace) < window:
            return None
        a = np.asarray(self._op_yaw_trace[-window:])
        b = np.asarray(self._robot_yaw_trace[-window:])
        a = a - a.mean()
        b = b - b.mean()
        if a.std() < 1e-9 or b.std() < 1e-9:
            return None
        cc = np.correlate(b, a, mode="full")
        lags = np.arange(-(window - 1), window)
        keep = (lags >= 0) & (lags <= window // 2)
        k = int(lags[keep][np.argmax(cc[keep])])
        return k * self.dt

    def run(self) -> list[TickResult]:
        n = int(round(self.config.duration_s * self.config.tick_rate_hz))
        return [self.tick() for _ in range(n)]

    # traces the harness consumes for summary metrics
    @property
    def operator_yaw_trace(self) -> list[float]:
        return self._op_yaw_trace

    @property
    def robot_yaw_trace(self) -> list[float]:
        return self._robot_yaw_trace


def _axis_angle(a: np.ndarray, b: np.ndarray) -> float:
    cross = np.linalg.norm(np.cross(a, b))
    dot = float(a @ b)
    return math.atan2(cross, dot)
