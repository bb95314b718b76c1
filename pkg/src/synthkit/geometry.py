"""Coordinate frames, rigid transforms, pinhole projection, oriented boxes.

Conventions: the world frame is right-handed with up = +z. The camera frame
follows KITTI: +x right, +y down, +z forward (optical axis). Vectors are
numpy arrays of shape (3,); rotations are 3x3 row-major orthonormal matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Points closer than this to the image plane are treated as unprojectable.
NEAR_PLANE = 0.1


def vec3(x, y, z) -> np.ndarray:
    return np.array([x, y, z], dtype=np.float64)


@dataclass(frozen=True)
class Pose:
    """Rigid transform: the pose of a child frame expressed in a parent frame.

    ``rotation`` columns are the child axes in parent coordinates, so a point
    transforms parent-ward as ``rotation @ p + translation``.
    """

    rotation: np.ndarray
    translation: np.ndarray

    def is_valid(self, tol: float = 1e-9) -> bool:
        r = self.rotation
        if r.shape != (3, 3) or self.translation.shape != (3,):
            return False
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(self.translation))):
            return False
        if np.max(np.abs(r.T @ r - np.eye(3))) > tol:
            return False
        return abs(np.linalg.det(r) - 1.0) <= tol

    def apply(self, point: np.ndarray) -> np.ndarray:
        return self.rotation @ point + self.translation

    def apply_many(self, points: np.ndarray) -> np.ndarray:
        return points @ self.rotation.T + self.translation


def identity_pose() -> Pose:
    return Pose(np.eye(3), np.zeros(3))


def compose(a: Pose, b: Pose) -> Pose:
    """Pose of b's child expressed in a's parent (a then b)."""
    return Pose(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def invert(a: Pose) -> Pose:
    rt = a.rotation.T
    return Pose(rt, -(rt @ a.translation))


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def is_valid(self) -> bool:
        return (
            self.fx > 0
            and self.fy > 0
            and self.width >= 1
            and self.height >= 1
            and 0 <= self.cx < self.width
            and 0 <= self.cy < self.height
        )


@dataclass(frozen=True)
class OrientedBox3:
    """3D box with yaw-only orientation about the world up-axis (+z).

    ``extent`` holds half-lengths along the local length/width/height axes.
    """

    center: np.ndarray
    extent: np.ndarray
    yaw: float

    def rotation(self) -> np.ndarray:
        return yaw_matrix(self.yaw)

    def is_valid(self) -> bool:
        return (
            self.center.shape == (3,)
            and self.extent.shape == (3,)
            and bool(np.all(self.extent > 0))
            and -math.pi <= self.yaw < math.pi
        )


@dataclass(frozen=True)
class Rect2:
    """Axis-aligned pixel rectangle, 0-based, left < right and top < bottom."""

    left: float
    top: float
    right: float
    bottom: float

    def area(self) -> float:
        return max(0.0, self.right - self.left) * max(0.0, self.bottom - self.top)

    def width(self) -> float:
        return self.right - self.left

    def height(self) -> float:
        return self.bottom - self.top


def yaw_matrix(yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def wrap_angle(theta: float) -> float:
    """Wrap an angle to [-pi, pi); the +pi endpoint maps to -pi."""
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


def project(point_world: np.ndarray, camera_pose_world: Pose, k: CameraIntrinsics):
    """Project a world point through a pinhole camera.

    Returns (u, v, depth) or None when the camera-frame depth is at or behind
    NEAR_PLANE. Out-of-image pixels are still returned; callers clip.
    """
    p = camera_pose_world.rotation.T @ (point_world - camera_pose_world.translation)
    z = p[2]
    if z <= NEAR_PLANE:
        return None
    return (k.fx * p[0] / z + k.cx, k.fy * p[1] / z + k.cy, z)


def project_points(points_world: np.ndarray, camera_pose_world: Pose, k: CameraIntrinsics):
    """Batch projection.

    Returns (uv: (N,2), z: (N,), in_front: (N,) bool). uv rows with
    ``~in_front`` are meaningless and set to nan.
    """
    p = (points_world - camera_pose_world.translation) @ camera_pose_world.rotation
    z = p[:, 2]
    in_front = z > NEAR_PLANE
    uv = np.full((len(z), 2), np.nan)
    zs = np.where(in_front, z, 1.0)
    uv[:, 0] = np.where(in_front, k.fx * p[:, 0] / zs + k.cx, np.nan)
    uv[:, 1] = np.where(in_front, k.fy * p[:, 1] / zs + k.cy, np.nan)
    return uv, z, in_front


def unproject(u: float, v: float, z: float, camera_pose_world: Pose, k: CameraIntrinsics) -> np.ndarray:
    """Back-project a pixel with known camera-frame depth to a world point."""
    p = np.array([(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z])
    return camera_pose_world.apply(p)


# Corner enumeration: index i in 0..7, bit 0 -> x sign, bit 1 -> y sign,
# bit 2 -> z sign; a set bit selects +extent, a clear bit -extent. This order
# is part of the interchange contract.
_CORNER_SIGNS = np.array(
    [[1 if i & 1 else -1, 1 if i & 2 else -1, 1 if i & 4 else -1] for i in range(8)],
    dtype=np.float64,
)


def box_vertices(box: OrientedBox3) -> np.ndarray:
    """The 8 world-frame corners of a box, in the documented fixed order."""
    local = _CORNER_SIGNS * box.extent
    return local @ box.rotation().T + box.center


def point_in_oriented_box(p: np.ndarray, box: OrientedBox3) -> bool:
    """Boundary-inclusive containment test."""
    local = box.rotation().T @ (p - box.center)
    return bool(np.all(np.abs(local) <= box.extent))


def points_in_oriented_box(points: np.ndarray, box: OrientedBox3) -> np.ndarray:
    """Vectorized boundary-inclusive containment mask for an (N,3) array."""
    local = (points - box.center) @ box.rotation()
    return np.all(np.abs(local) <= box.extent, axis=1)


def rect_intersection(a: Rect2, b: Rect2):
    left = max(a.left, b.left)
    top = max(a.top, b.top)
    right = min(a.right, b.right)
    bottom = min(a.bottom, b.bottom)
    if left >= right or top >= bottom:
        return None
    return Rect2(left, top, right, bottom)


def rect_iou(a: Rect2, b: Rect2) -> float:
    inter = rect_intersection(a, b)
    if inter is None:
        return 0.0
    ai = inter.area()
    union = a.area() + b.area() - ai
    if union <= 0.0:
        return 0.0
    return ai / union
