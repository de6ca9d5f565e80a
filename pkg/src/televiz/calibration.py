"""Online viewpoint calibration.

Operator height differences and body shifts move the virtual headset off
the virtual camera, which degrades how the streamed points read from the
operator's viewpoint. Calibration re-seats the tracked volume inside the
virtual robot body frame so the headset lands exactly on the camera,
without touching the live headset-in-tracking measurement itself.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .geometry import Pose, compose, inverse, pose_distance
from .statechain import VirtualAnchors

__all__ = ["CalibrationResult", "calibrate", "apply_calibration", "alignment_residual"]


@dataclass(frozen=True)
class CalibrationResult:
    """New tracked-volume anchor plus a diagnostic residual.

    The residual is the rotation angle (radians) plus translation distance
    (meters) left between the re-anchored headset and the virtual camera,
    evaluated with the same measurements that produced the result. It is
    numerical noise by construction.
    """

    tracking_in_robot_virtual: Pose
    applied_at: int = 0
    residual: float = 0.0


def alignment_residual(zed_in_hmd_virtual: Pose) -> float:
    """Pose distance of the virtual camera from the virtual headset."""
    rot, trans = pose_distance(Pose.identity(), zed_in_hmd_virtual)
    return rot + trans


def calibrate(zed_in_robot: Pose, hmd_in_tracking: Pose, tick: int = 0) -> CalibrationResult:
    """Closed-form anchor update that puts the virtual headset on the camera.

    Both inputs must be from the same tick. The camera-in-body pose chained
    with the inverted headset measurement is exactly the tracked-volume
    pose under which the two frames coincide.
    """
    anchor = compose(zed_in_robot, inverse(hmd_in_tracking))
    reanchored_hmd = compose(anchor, hmd_in_tracking)
    rot, trans = pose_distance(reanchored_hmd, zed_in_robot)
    return CalibrationResult(
        tracking_in_robot_virtual=anchor,
        applied_at=tick,
        residual=rot + trans,
    )


def apply_calibration(anchors: VirtualAnchors, result: CalibrationResult) -> VirtualAnchors:
    """Install a calibration result; everything else in the anchors is kept."""
    return replace(anchors, tracking_in_robot_virtual=result.tracking_in_robot_virtual)
