"""Synthetic environment and the coverage analysis built on it.

The scene is a set of axis-aligned boxes and rectangles with flat colors.
A camera model shoots one ray per grid cell through its frustum; hits
become depth points with the surface color. Scanned surface cells are kept
in an occupancy grid whose stored color is tinted away from the base color
so reconstructed regions stay visually distinct from live data. Coverage
classification labels every viewing ray live, mesh, or blank.

Surface cells are probed a hair past the hit point along the viewing ray
(into the material), which keeps quantization stable when surfaces sit
exactly on cell boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .geometry import Pose, apply, inverse

__all__ = [
    "SceneBox",
    "SceneRect",
    "SceneModel",
    "CameraModel",
    "PointCloudFrame",
    "MeshModel",
    "CoverageReport",
    "PointBehindCamera",
    "capture_pointcloud",
    "scan_mesh",
    "classify_coverage",
    "classify_coverage_grid",
    "billboard_distortion",
    "write_pointcloud_ascii",
    "LABEL_LIVE",
    "LABEL_MESH",
    "LABEL_BLANK",
]

_EPS = 1e-9
_CELL_NUDGE = 1e-6
BLANK_COLOR = (128, 128, 128)

LABEL_LIVE = 0
LABEL_MESH = 1
LABEL_BLANK = 2


class PointBehindCamera(Exception):
    """Raised when a point sits behind the projecting camera."""


@dataclass(frozen=True)
class SceneBox:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    color: tuple[int, int, int]


@dataclass(frozen=True)
class SceneRect:
    """Axis-aligned rectangle: plane coordinate along `axis`, bounds on the others."""

    axis: int
    offset: float
    lo2: tuple[float, float]
    hi2: tuple[float, float]
    color: tuple[int, int, int]


class SceneModel:
    """Non-empty set of colored axis-aligned primitives."""

    def __init__(self, boxes=(), rects=()):
        self.boxes = tuple(boxes)
        self.rects = tuple(rects)
        if not self.boxes and not self.rects:
            raise ValueError("scene must contain at least one primitive")
        self.colors = np.array(
            [b.color for b in self.boxes] + [r.color for r in self.rects], dtype=np.int64
        )
        self._box_lo = np.array([b.lo for b in self.boxes], dtype=float).reshape(-1, 3)
        self._box_hi = np.array([b.hi for b in self.boxes], dtype=float).reshape(-1, 3)

    def cast(self, origin, dirs):
        """Nearest-hit distances for unit rays from a common origin.

        Returns (t, prim_index) arrays; misses hold inf and -1. Boxes seen
        from inside hit their exit face, so a single box doubles as a room.
        """
        origin = np.asarray(origin, dtype=float)
        dirs = np.asarray(dirs, dtype=float)
        n = dirs.shape[0]
        best_t = np.full(n, np.inf)
        best_idx = np.full(n, -1, dtype=np.int64)

        with np.errstate(divide="ignore", invalid="ignore"):
            for i in range(len(self.boxes)):
                t1 = (self._box_lo[i] - origin) / dirs
                t2 = (self._box_hi[i] - origin) / dirs
                tnear = np.nanmax(np.minimum(t1, t2), axis=1)
                tfar = np.nanmin(np.maximum(t1, t2), axis=1)
                ok = (tfar >= tnear) & (tfar > _EPS)
                t = np.where(tnear > _EPS, tnear, tfar)
                take = ok & (t < best_t)
                best_t[take] = t[take]
                best_idx[take] = i

            for j, rect in enumerate(self.rects):
                a = rect.axis
                others = [k for k in range(3) if k != a]
                da = dirs[:, a]
                t = np.where(np.abs(da) > _EPS, (rect.offset - origin[a]) / da, np.inf)
                p0 = origin[others[0]] + t * dirs[:, others[0]]
                p1 = origin[others[1]] + t * dirs[:, others[1]]
                ok = (
                    (t > _EPS)
                    & (p0 >= rect.lo2[0] - _EPS)
                    & (p0 <= rect.hi2[0] + _EPS)
                    & (p1 >= rect.lo2[1] - _EPS)
                    & (p1 <= rect.hi2[1] + _EPS)
                )
                take = ok & (t < best_t)
                best_t[take] = t[take]
                best_idx[take] = len(self.boxes) + j

        return best_t, best_idx

    def surface_cell_colors(self, cell_size: float):
        """cell index -> base color for every cell any surface touches.

        Each face contributes the exact rectangle of grid cells it crosses,
        one layer on either side of the face plane, so the result is a
        superset of what any single viewpoint could probe. Used to
        pre-populate a fully scanned reconstruction.
        """
        cells: dict = {}
        tiny = 1e-9

        def emit_face(axis, coord, lo2, hi2, color):
            lo_i = [int(math.floor((lo2[k] + tiny) / cell_size)) for k in range(2)]
            hi_i = [int(math.floor((hi2[k] - tiny) / cell_size)) for k in range(2)]
            if hi_i[0] < lo_i[0] or hi_i[1] < lo_i[1]:
                return
            u = np.arange(lo_i[0], hi_i[0] + 1, dtype=np.int64)
            v = np.arange(lo_i[1], hi_i[1] + 1, dtype=np.int64)
            uu, vv = np.meshgrid(u, v, indexing="ij")
            others = [k for k in range(3) if k != axis]
            for side in (coord - _CELL_NUDGE, coord + _CELL_NUDGE):
                idx = np.empty((uu.size, 3), dtype=np.int64)
                idx[:, axis] = int(math.floor(side / cell_size))
                idx[:, others[0]] = uu.ravel()
                idx[:, others[1]] = vv.ravel()
                for cell in map(tuple, idx.tolist()):
                    cells.setdefault(cell, color)

        for box in self.boxes:
            lo, hi = np.asarray(box.lo), np.asarray(box.hi)
            for axis in range(3):
                others = [k for k in range(3) if k != axis]
                lo2 = (lo[others[0]], lo[others[1]])
                hi2 = (hi[others[0]], hi[others[1]])
                emit_face(axis, lo[axis], lo2, hi2, box.color)
                emit_face(axis, hi[axis], lo2, hi2, box.color)
        for rect in self.rects:
            emit_face(rect.axis, rect.offset, rect.lo2, rect.hi2, rect.color)
        return cells

    def surface_cells(self, cell_size: float):
        return set(self.surface_cell_colors(cell_size))

    def color_at(self, prim_index: int) -> tuple[int, int, int]:
        return tuple(int(c) for c in self.colors[prim_index])


@dataclass(frozen=True)
class CameraModel:
    """Pin-hole style frustum: symmetric horizontal/vertical FOV, planar ray grid."""

    horizontal_fov_deg: float
    vertical_fov_deg: float
    max_range_m: float
    cols: int = 64
    rows: int = 64

    def __post_init__(self):
        for fov in (self.horizontal_fov_deg, self.vertical_fov_deg):
            if not 0.0 < fov < 180.0:
                raise ValueError("fov must be in (0, 180) degrees")
        if self.max_range_m <= 0:
            raise ValueError("max_range_m must be positive")
        if self.cols < 1 or self.rows < 1:
            raise ValueError("grid must be at least 1x1")

    def tan_half(self) -> tuple[float, float]:
        return (
            math.tan(math.radians(self.horizontal_fov_deg) / 2.0),
            math.tan(math.radians(self.vertical_fov_deg) / 2.0),
        )

    def ray_directions(self) -> np.ndarray:
        """Unit directions through all grid cell centers, row-major (rows, cols).

        The returned array is cached and shared; treat it as read-only.
        """
        return _ray_grid(self)

    def contains(self, points_cam: np.ndarray) -> np.ndarray:
        """Frustum + range membership for camera-frame points."""
        p = np.atleast_2d(points_cam)
        th, tv = self.tan_half()
        x = p[:, 0]
        ok = x > _EPS
        ok &= np.abs(p[:, 1]) <= x * th + _EPS
        ok &= np.abs(p[:, 2]) <= x * tv + _EPS
        ok &= np.linalg.norm(p, axis=1) <= self.max_range_m + _EPS
        return ok


@lru_cache(maxsize=32)
def _ray_grid(camera: CameraModel) -> np.ndarray:
    th, tv = camera.tan_half()
    u = ((np.arange(camera.cols) + 0.5) / camera.cols * 2.0 - 1.0) * th
    v = ((np.arange(camera.rows) + 0.5) / camera.rows * 2.0 - 1.0) * tv
    vv, uu = np.meshgrid(v, u, indexing="ij")
    dirs = np.stack([np.ones(uu.size), -uu.ravel(), -vv.ravel()], axis=1)
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


@dataclass(frozen=True)
class PointCloudFrame:
    """Depth points in the capturing camera's frame, plus the capture pose."""

    points: np.ndarray
    colors: np.ndarray
    capture_pose: Pose
    timestamp: float
    camera: CameraModel

    def __len__(self):
        return int(self.points.shape[0])


def _tint(color, tone, strength):
    out = tuple(
        int(round((1.0 - strength) * c + strength * t)) for c, t in zip(color, tone)
    )
    if out == tuple(int(c) for c in color):
        # guarantee the reconstructed color is distinguishable
        r, g, b = out
        out = (min(r + 1, 255) if r < 255 else r - 1, g, b)
    return out


# cell indices are packed into one integer key so grid lookups stay cheap
_KEY_OFFSET = 1 << 19
_KEY_SPAN = 1 << 20


def _encode_cells(idx: np.ndarray) -> np.ndarray:
    return (
        (idx[:, 0] + _KEY_OFFSET) * _KEY_SPAN + (idx[:, 1] + _KEY_OFFSET)
    ) * _KEY_SPAN + (idx[:, 2] + _KEY_OFFSET)


def _encode_one(cell) -> int:
    return (
        (int(cell[0]) + _KEY_OFFSET) * _KEY_SPAN + (int(cell[1]) + _KEY_OFFSET)
    ) * _KEY_SPAN + (int(cell[2]) + _KEY_OFFSET)


def _decode_key(key: int) -> tuple[int, int, int]:
    z = key % _KEY_SPAN - _KEY_OFFSET
    rest = key // _KEY_SPAN
    y = rest % _KEY_SPAN - _KEY_OFFSET
    x = rest // _KEY_SPAN - _KEY_OFFSET
    return (int(x), int(y), int(z))


@dataclass
class MeshModel:
    """Scanned-surface occupancy grid with tinted per-cell colors.

    Cells are keyed internally by packed integers; use cell_indices() for
    the spatial (ix, iy, iz) view.
    """

    cell_size: float = 0.05
    tint_strength: float = 0.35
    tint_tone: tuple[int, int, int] = (200, 150, 80)
    cells: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tint_strength <= 0.0:
            raise ValueError("tint_strength must be positive")

    def scanned_count(self) -> int:
        return len(self.cells)

    def cell_indices(self) -> set:
        return {_decode_key(k) for k in self.cells}

    def mark(self, cell, base_color) -> None:
        key = _encode_one(cell)
        if key not in self.cells:
            self.cells[key] = _tint(base_color, self.tint_tone, self.tint_strength)

    def color_of(self, cell):
        return self.cells.get(_encode_one(cell))

    def fill_from_scene(self, scene: SceneModel) -> None:
        """Mark every surface cell of the scene, as an exhaustive scan would."""
        for cell, color in scene.surface_cell_colors(self.cell_size).items():
            self.mark(cell, color)


def capture_pointcloud(scene: SceneModel, camera: CameraModel, pose: Pose,
                       depth_jitter_std: float = 0.0,
                       rng: Optional[np.random.Generator] = None) -> PointCloudFrame:
    """One depth point per grid cell whose ray hits a surface within range."""
    dirs_cam = camera.ray_directions()
    dirs_world = dirs_cam @ pose.rotation().T
    t, idx = scene.cast(pose.t, dirs_world)
    hit = np.isfinite(t) & (t <= camera.max_range_m)
    t_hit = t[hit]
    if depth_jitter_std > 0.0 and rng is not None and t_hit.size:
        t_hit = t_hit + rng.normal(0.0, depth_jitter_std, size=t_hit.shape)
    points = dirs_cam[hit] * t_hit[:, None]
    colors = scene.colors[idx[hit]].astype(np.int64)
    return PointCloudFrame(
        points=points,
        colors=colors,
        capture_pose=pose,
        timestamp=0.0,
        camera=camera,
    )


def scan_mesh(mesh: MeshModel, frame: PointCloudFrame) -> MeshModel:
    """Fold a captured frame into the occupancy grid; existing cells stay."""
    if len(frame) == 0:
        return mesh
    world = frame.points @ frame.capture_pose.rotation().T + frame.capture_pose.t
    rays = world - frame.capture_pose.t
    norms = np.linalg.norm(rays, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    probes = world + rays / norms * _CELL_NUDGE
    keys = _encode_cells(np.floor(probes / mesh.cell_size).astype(np.int64)).tolist()
    colors = frame.colors.tolist()
    cells = mesh.cells
    tone, strength = mesh.tint_tone, mesh.tint_strength
    for key, color in zip(keys, colors):
        if key not in cells:
            cells[key] = _tint(color, tone, strength)
    return mesh


@dataclass(frozen=True)
class CoverageReport:
    live_fraction: float
    mesh_fraction: float
    blank_fraction: float


def classify_coverage_grid(scene: SceneModel, mesh: Optional[MeshModel],
                           hmd: CameraModel, hmd_pose: Pose,
                           last_frame: Optional[PointCloudFrame],
                           display_lock: Optional[Pose] = None):
    """Label every viewing ray live, mesh, or blank.

    live: the ray hits a surface point inside the last captured frustum
    (and, when `display_lock` is set, also inside the capture camera's
    frustum re-seated at that pose, which models a feed glued to the view
    instead of world-registered). mesh: the hit cell has been scanned.
    blank: everything else, including rays that hit nothing in range.

    Returns (CoverageReport, labels, colors) with labels shaped
    (rows, cols) and colors (rows, cols, 3).
    """
    dirs_cam = hmd.ray_directions()
    dirs_world = dirs_cam @ hmd_pose.rotation().T
    t, idx = scene.cast(hmd_pose.t, dirs_world)
    hit = np.isfinite(t) & (t <= hmd.max_range_m)

    n = dirs_cam.shape[0]
    labels = np.full(n, LABEL_BLANK, dtype=np.int8)
    colors = np.empty((n, 3), dtype=np.int64)
    colors[:] = BLANK_COLOR

    points = hmd_pose.t + dirs_world * np.where(np.isfinite(t), t, 0.0)[:, None]

    live = np.zeros(n, dtype=bool)
    if last_frame is not None and hit.any():
        cap_inv = inverse(last_frame.capture_pose)
        p_cap = points @ cap_inv.rotation().T + cap_inv.t
        live = hit & last_frame.camera.contains(p_cap)
        if display_lock is not None:
            lock_inv = inverse(display_lock)
            p_lock = points @ lock_inv.rotation().T + lock_inv.t
            live &= last_frame.camera.contains(p_lock)
    labels[live] = LABEL_LIVE
    colors[live] = scene.colors[idx[live]]

    if mesh is not None and mesh.cells:
        candidates = hit & ~live
        if candidates.any():
            probes = points[candidates] + dirs_world[candidates] * _CELL_NUDGE
            keys = _encode_cells(np.floor(probes / mesh.cell_size).astype(np.int64))
            where = np.flatnonzero(candidates).tolist()
            lookup = mesh.cells.get
            for pos, key in zip(where, keys.tolist()):
                tinted = lookup(key)
                if tinted is not None:
                    labels[pos] = LABEL_MESH
                    colors[pos] = tinted

    counts = np.bincount(labels, minlength=3)
    report = CoverageReport(
        live_fraction=counts[LABEL_LIVE] / n,
        mesh_fraction=counts[LABEL_MESH] / n,
        blank_fraction=counts[LABEL_BLANK] / n,
    )
    return report, labels.reshape(hmd.rows, hmd.cols), colors.reshape(hmd.rows, hmd.cols, 3)


def classify_coverage(scene: SceneModel, mesh: Optional[MeshModel], hmd: CameraModel,
                      hmd_pose: Pose, last_frame: Optional[PointCloudFrame],
                      display_lock: Optional[Pose] = None) -> CoverageReport:
    report, _, _ = classify_coverage_grid(
        scene, mesh, hmd, hmd_pose, last_frame, display_lock
    )
    return report


def billboard_distortion(scene_point, camera_pose: Pose, hmd_pose: Pose,
                         plane_depth: float = 1.0) -> float:
    """Angular error of a flat projection versus the true 3-d point.

    The camera projects the point onto its forward plane at `plane_depth`.
    Seen from the observer, the projected point and the real point subtend
    an angle; depth-true rendering of the same point has zero error by
    construction. Raises PointBehindCamera when the point is not in front
    of the projecting camera.
    """
    p_cam = apply(inverse(camera_pose), scene_point)
    if p_cam[0] <= _EPS:
        raise PointBehindCamera(f"point at camera-frame x={p_cam[0]:.4g}")
    projected = apply(camera_pose, p_cam * (plane_depth / p_cam[0]))
    a = projected - hmd_pose.t
    b = np.asarray(scene_point, dtype=float) - hmd_pose.t
    cross = np.linalg.norm(np.cross(a, b))
    dot = float(a @ b)
    return math.atan2(cross, dot)


def write_pointcloud_ascii(frame: PointCloudFrame, path) -> None:
    """Write one `x y z r g b` line per point, in world coordinates."""
    world = frame.points @ frame.capture_pose.rotation().T + frame.capture_pose.t
    with open(path, "w", encoding="utf-8") as fh:
        for p, c in zip(world, frame.colors):
            fh.write(
                f"{p[0]:.6f} {p[1]:.6f} {p[2]:.6f} {int(c[0])} {int(c[1])} {int(c[2])}\n"
            )
