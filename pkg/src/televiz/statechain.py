"""Mapping between operator, robot, and virtual-scene frames.

The live state is a triple of measurements (headset in its tracked volume,
head camera in the robot body, head camera in the world) plus a set of
virtual-scene anchors. Each rendered quantity is a checked path composition
through a :class:`~televiz.geometry.FrameGraph`, so the transform chains
stay declarative instead of hand-expanded matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .geometry import EdgeTag, FrameGraph, FrameId, Pose, compose, inverse

__all__ = [
    "MeasurementSet",
    "AnchorMode",
    "VirtualAnchors",
    "ViewState",
    "hmd_in_tracking",
    "zed_in_robot",
    "neck_pose",
    "robot_body_from_odometry",
    "decoupled_view",
]


@dataclass(frozen=True)
class MeasurementSet:
    """The streamed measurement triple driving the virtual scene.

    hmd_in_tracking is sampled locally on the operator side each tick;
    zed_in_robot and zed_in_world arrive over the feedback channel and may
    be stale relative to the headset sample.
    """

    hmd_in_tracking: Pose
    zed_in_robot: Pose
    zed_in_world: Pose
    timestamp: float = 0.0


class AnchorMode(Enum):
    NO_MESH = "no_mesh"
    MESH_ANCHORED = "mesh_anchored"


@dataclass(frozen=True)
class VirtualAnchors:
    """Anchors that place the tracked volume and robot in the virtual scene.

    tracking_in_robot_virtual is the calibrated tracked-volume pose in the
    virtual robot body frame. robot_in_world_virtual is a fixed constant in
    NO_MESH mode and follows the camera odometry every tick in
    MESH_ANCHORED mode. mesh_in_world_virtual pins the reconstructed
    surface into the virtual world.
    """

    tracking_in_robot_virtual: Pose
    robot_in_world_virtual: Pose
    mesh_in_world_virtual: Pose
    mode: AnchorMode = AnchorMode.NO_MESH


@dataclass(frozen=True)
class ViewState:
    """Rendered-view poses derived from one measurement set."""

    zed_in_hmd_virtual: Pose
    hmd_in_world_virtual: Pose
    mesh_in_hmd_virtual: Pose


def hmd_in_tracking(base_in_tracking: Pose, hmd_in_base: Pose) -> Pose:
    """Headset pose in the tracked volume: room-setup edge times live sample."""
    return compose(base_in_tracking, hmd_in_base)


def neck_pose(yaw: float, pitch: float, mount=(0.0, 0.0, 1.5)) -> Pose:
    """Head pose in the robot body for a yaw-then-pitch two-joint neck."""
    return Pose.from_yaw_pitch(yaw, pitch, mount)


def zed_in_robot(head_in_body: Pose, zed_in_head: Pose) -> Pose:
    """Camera pose in the robot body: neck kinematics times camera extrinsic."""
    return compose(head_in_body, zed_in_head)


def robot_body_from_odometry(zed_in_world: Pose, zed_in_robot: Pose) -> Pose:
    """Robot body pose in the world recovered from camera odometry."""
    return compose(zed_in_world, inverse(zed_in_robot))


def decoupled_view(meas: MeasurementSet, anchors: VirtualAnchors) -> ViewState:
    """Current rendered-view poses for one tick.

    The headset sample and the (possibly stale) camera measurements move
    independently; their only coupling is the calibrated anchor, which is
    what lets the operator look around while the camera catches up.
    """
    g = FrameGraph()
    g.set_edge(FrameId.H_V, FrameId.T_V, meas.hmd_in_tracking)
    g.set_edge(FrameId.T_V, FrameId.R_V, anchors.tracking_in_robot_virtual)
    g.set_edge(FrameId.R_V, FrameId.W_V, anchors.robot_in_world_virtual)
    g.set_edge(FrameId.Z_V, FrameId.R_V, meas.zed_in_robot)
    g.set_edge(FrameId.S, FrameId.W_V, anchors.mesh_in_world_virtual, EdgeTag.STATIC)
    return ViewState(
        zed_in_hmd_virtual=g.query(FrameId.Z_V, FrameId.H_V),
        hmd_in_world_virtual=g.query(FrameId.H_V, FrameId.W_V),
        mesh_in_hmd_virtual=g.query(FrameId.S, FrameId.H_V),
    )
