"""Rigid-transform algebra and a typed frame graph.

Conventions used across the package:

- right-handed coordinates, z up, x forward
- a :class:`Pose` stores the pose of a child frame expressed in a parent
  frame, as a unit quaternion (scalar first) plus a translation in meters
- ``compose(a, b)`` chains "b then a": if ``a`` is the pose of frame X in
  frame Y and ``b`` the pose of frame C in frame X, the result is the pose
  of C in Y

Quaternions are renormalized after every operation so long simulations do
not accumulate drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Pose",
    "FrameId",
    "EdgeTag",
    "FrameGraph",
    "NoPath",
    "compose",
    "inverse",
    "apply",
    "quat_slerp",
    "rotation_angle",
    "pose_distance",
    "yaw_of",
    "pitch_of",
]


def _normalized(q: np.ndarray) -> np.ndarray:
    n = math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    if n == 0.0:
        raise ValueError("zero quaternion")
    return q / n


def _quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def _quat_rotate(q: np.ndarray, v) -> np.ndarray:
    # v' = v + w*t + q_vec x t with t = 2 * q_vec x v
    w, x, y, z = q
    vx, vy, vz = float(v[0]), float(v[1]), float(v[2])
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    return np.array([
        vx + w * tx + (y * tz - z * ty),
        vy + w * ty + (z * tx - x * tz),
        vz + w * tz + (x * ty - y * tx),
    ])


def rotation_angle(q: np.ndarray) -> float:
    """Rotation magnitude of a unit quaternion, in radians (0..pi)."""
    vec = math.sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    return 2.0 * math.atan2(vec, abs(float(q[0])))


def quat_slerp(a: np.ndarray, b: np.ndarray, u: float) -> np.ndarray:
    """Spherical interpolation from a toward b by fraction u in [0, 1]."""
    dot = float(a @ b)
    if dot < 0.0:
        b = -b
        dot = -dot
    if dot > 1.0 - 1e-12:
        return _normalized(a + u * (b - a))
    theta = math.acos(min(dot, 1.0))
    s = math.sin(theta)
    return _normalized(
        (math.sin((1.0 - u) * theta) / s) * a + (math.sin(u * theta) / s) * b
    )


@dataclass(frozen=True)
class Pose:
    """Pose of one frame expressed in another: unit quaternion + translation."""

    q: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    t: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "q", _normalized(np.asarray(self.q, dtype=float)))
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def translation(x: float, y: float, z: float) -> "Pose":
        return Pose(t=np.array([x, y, z], dtype=float))

    @staticmethod
    def rot_z(angle: float) -> "Pose":
        h = angle / 2.0
        return Pose(q=np.array([math.cos(h), 0.0, 0.0, math.sin(h)]))

    @staticmethod
    def rot_y(angle: float) -> "Pose":
        h = angle / 2.0
        return Pose(q=np.array([math.cos(h), 0.0, math.sin(h), 0.0]))

    @staticmethod
    def from_yaw_pitch(yaw: float, pitch: float, t=(0.0, 0.0, 0.0)) -> "Pose":
        """Yaw about +z, then pitch about +y (positive pitch tips forward-down)."""
        hy, hp = yaw / 2.0, pitch / 2.0
        qz = np.array([math.cos(hy), 0.0, 0.0, math.sin(hy)])
        qy = np.array([math.cos(hp), 0.0, math.sin(hp), 0.0])
        return Pose(q=_quat_mul(qz, qy), t=np.asarray(t, dtype=float))

    def forward(self) -> np.ndarray:
        """The frame's +x axis expressed in the parent frame."""
        return _quat_rotate(self.q, (1.0, 0.0, 0.0))

    def rotation(self) -> np.ndarray:
        """3x3 rotation matrix (columns are the rotated basis axes)."""
        return np.stack(
            [
                _quat_rotate(self.q, (1.0, 0.0, 0.0)),
                _quat_rotate(self.q, (0.0, 1.0, 0.0)),
                _quat_rotate(self.q, (0.0, 0.0, 1.0)),
            ],
            axis=1,
        )

    def rotation_angle(self) -> float:
        return rotation_angle(self.q)

    def same_bits(self, other: "Pose") -> bool:
        return self.q.tobytes() == other.q.tobytes() and self.t.tobytes() == other.t.tobytes()

    def __repr__(self):
        q = ", ".join(f"{v:.6g}" for v in self.q)
        t = ", ".join(f"{v:.6g}" for v in self.t)
        return f"Pose(q=[{q}], t=[{t}])"


def compose(a: Pose, b: Pose) -> Pose:
    """Chain two poses: apply b, then a."""
    return Pose(q=_quat_mul(a.q, b.q), t=a.t + _quat_rotate(a.q, b.t))


def inverse(p: Pose) -> Pose:
    conj = np.array([p.q[0], -p.q[1], -p.q[2], -p.q[3]])
    return Pose(q=conj, t=-_quat_rotate(conj, p.t))


def apply(p: Pose, point) -> np.ndarray:
    """Map a point from the child frame into the parent frame."""
    return _quat_rotate(p.q, point) + p.t


def pose_distance(a: Pose, b: Pose) -> tuple[float, float]:
    """(rotation angle in radians, translation distance in meters) between poses."""
    rel = _quat_mul(np.array([a.q[0], -a.q[1], -a.q[2], -a.q[3]]), b.q)
    return rotation_angle(rel), float(np.linalg.norm(a.t - b.t))


def yaw_of(p: Pose) -> float:
    """Heading of the pose's forward axis, in radians."""
    f = p.forward()
    return math.atan2(f[1], f[0])


def pitch_of(p: Pose) -> float:
    """Elevation of the pose's forward axis; positive looks down."""
    f = p.forward()
    return math.atan2(-f[2], math.hypot(f[0], f[1]))


class FrameId(Enum):
    """The named coordinate frames of the televisualization state.

    Real side: operator headset H, its base station B, the tracked volume T,
    the robot body R, the robot head Rh, the head camera Z, and the world W.
    Virtual side: primed counterparts of headset, camera, tracked volume,
    robot body and world, plus the reconstructed-surface frame S.
    """

    H = "H"
    Z = "Z"
    T = "T"
    R = "R"
    W = "W"
    RH = "Rh"
    B = "B"
    H_V = "H'"
    Z_V = "Z'"
    T_V = "T'"
    R_V = "R'"
    W_V = "W'"
    S = "S"


class EdgeTag(Enum):
    STATIC = "static"
    STREAMED = "streamed"


class NoPath(Exception):
    """Raised when two frames are not connected in the graph."""


_FRAME_ORDER = {f: i for i, f in enumerate(FrameId)}


class FrameGraph:
    """Directed registry of child-in-parent transforms with path queries.

    Edges are registered child -> parent and must keep the directed graph
    acyclic. Queries walk the undirected path (shortest, deterministic
    tie-break) and compose edge poses, inverting edges traversed against
    their registered direction. Edge poses may be updated in place; the
    topology-dependent path cache survives value updates.
    """

    def __init__(self):
        self._edges: dict[tuple[FrameId, FrameId], tuple[Pose, EdgeTag]] = {}
        self._paths: dict[tuple[FrameId, FrameId], list[tuple[tuple[FrameId, FrameId], bool]]] = {}

    def set_edge(self, child: FrameId, parent: FrameId, pose: Pose,
                 tag: EdgeTag = EdgeTag.STREAMED) -> None:
        if child is parent:
            raise ValueError("self-edge not allowed")
        key = (child, parent)
        if key not in self._edges:
            if self._reaches(parent, child):
                raise ValueError(f"edge {child.value}->{parent.value} would create a cycle")
            self._paths.clear()
        self._edges[key] = (pose, tag)

    def edge(self, child: FrameId, parent: FrameId) -> Pose:
        return self._edges[(child, parent)][0]

    def edges(self):
        return dict(self._edges)

    def _reaches(self, src: FrameId, dst: FrameId) -> bool:
        stack = [src]
        seen = set()
        while stack:
            node = stack.pop()
            if node is dst:
                return True
            if node in seen:
                continue
            seen.add(node)
            stack.extend(p for (c, p) in self._edges if c is node)
        return False

    def _find_path(self, child: FrameId, parent: FrameId):
        # BFS over the undirected view; neighbors visited in frame order
        neighbors: dict[FrameId, list[tuple[FrameId, tuple[FrameId, FrameId], bool]]] = {}
        for (c, p) in self._edges:
            neighbors.setdefault(c, []).append((p, (c, p), False))
            neighbors.setdefault(p, []).append((c, (c, p), True))
        for lst in neighbors.values():
            lst.sort(key=lambda item: _FRAME_ORDER[item[0]])
        prev: dict[FrameId, tuple[FrameId, tuple[FrameId, FrameId], bool]] = {}
        queue = [child]
        seen = {child}
        while queue:
            node = queue.pop(0)
            if node is parent:
                steps = []
                while node is not child:
                    back, key, inverted = prev[node]
                    steps.append((key, inverted))
                    node = back
                # steps now run parent-side first, which is composition order
                return steps
            for nxt, key, inverted in neighbors.get(node, []):
                if nxt not in seen:
                    seen.add(nxt)
                    prev[nxt] = (node, key, inverted)
                    queue.append(nxt)
        raise NoPath(f"no path from {child.value} to {parent.value}")

    def query(self, child: FrameId, parent: FrameId) -> Pose:
        """Pose of `child` expressed in `parent`, composed along the path."""
        if child is parent:
            return Pose.identity()
        key = (child, parent)
        steps = self._paths.get(key)
        if steps is None:
            steps = self._find_path(child, parent)
            self._paths[key] = steps
        out = Pose.identity()
        for edge_key, inverted in steps:
            pose = self._edges[edge_key][0]
            out = compose(out, inverse(pose) if inverted else pose)
        return out
