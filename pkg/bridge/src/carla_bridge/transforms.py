"""Coordinate conversion between the simulator and the interchange format.

The simulator uses a left-handed frame: x forward, y right, z up, with yaw
in degrees increasing from +x toward +y. The interchange dumps use a
right-handed world with z up and yaw in radians about +z (counterclockwise).
Mapping: negate y, negate yaw. All conversion lives here so nothing
downstream ever sees a left-handed coordinate.
"""

from __future__ import annotations

import math

import numpy as np


def lh_location_to_world(location) -> np.ndarray:
    """(x, y, z) left-handed -> right-handed world point."""
    x, y, z = location
    return np.array([x, -y, z], dtype=np.float64)


def world_to_lh_location(point) -> tuple:
    x, y, z = point
    return (float(x), float(-y), float(z))


def lh_yaw_to_world(yaw_deg: float) -> float:
    """Left-handed yaw in degrees -> right-handed yaw in radians, wrapped."""
    yaw = -math.radians(yaw_deg)
    return (yaw + math.pi) % (2.0 * math.pi) - math.pi


def world_yaw_to_lh(yaw_rad: float) -> float:
    return -math.degrees(yaw_rad)


def yaw_rotation(yaw: float) -> np.ndarray:
    """Right-handed rotation about +z."""
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def lh_points_to_world(points: np.ndarray) -> np.ndarray:
    """Vectorized handedness flip for an (N, >=3) point array (copies)."""
    out = np.array(points, dtype=np.float64)
    out[:, 1] = -out[:, 1]
    return out


# Camera axes expressed in the right-handed ego frame (x forward, y left,
# z up): image-right = -y_ego, image-down = -z_ego, optical axis = +x_ego.
# Columns are the camera basis vectors.
CAMERA_IN_EGO_ROTATION = np.array([
    [0.0, 0.0, 1.0],
    [-1.0, 0.0, 0.0],
    [0.0, -1.0, 0.0],
])


def intrinsics_from_fov(width: int, height: int, fov_deg: float) -> dict:
    """Pinhole intrinsics for the simulator's horizontal-FOV camera model."""
    fx = width / (2.0 * math.tan(math.radians(fov_deg) / 2.0))
    return {
        "fx": fx,
        "fy": fx,
        "cx": width / 2.0,
        "cy": height / 2.0,
        "width": width,
        "height": height,
    }
