"""Shared fixture builders: sensor rigs, synthetic frames, and dumps."""

import numpy as np
import pytest

from synthkit.frame_model import (
    CameraRig,
    DepthMap,
    FrameDump,
    FrameMeta,
    LidarRig,
    LidarScan,
    ObjectState,
    SegMap,
    SensorRig,
    write_frame,
)
from synthkit.geometry import CameraIntrinsics, OrientedBox3, Pose, identity_pose, vec3

# Camera looking along world +x with up = world +z:
# camera x (right) = -y_world, camera y (down) = -z_world, camera z = +x_world.
CAM_IN_EGO = Pose(
    rotation=np.array([
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
    ]),
    translation=np.zeros(3),
)

DEFAULT_CATEGORIES = {0: "unlabeled", 1: "road", 2: "car", 3: "pedestrian"}


def make_intrinsics(width=640, height=480, fx=500.0, fy=500.0):
    return CameraIntrinsics(fx=fx, fy=fy, cx=width / 2.0, cy=height / 2.0,
                            width=width, height=height)


def make_rig(width=640, height=480, fx=500.0, fy=500.0):
    return SensorRig(
        camera=CameraRig(make_intrinsics(width, height, fx, fy), CAM_IN_EGO),
        lidar=LidarRig(identity_pose(), points_per_scan_hint=1000),
    )


def flat_depth(width, height, value=1000.0):
    return DepthMap(width, height, np.full((height, width), value, dtype=np.float32))


def make_box(center, extent=(2.0, 1.0, 0.8), yaw=0.0):
    return OrientedBox3(center=vec3(*center), extent=vec3(*extent), yaw=yaw)


def make_object(object_id, center, extent=(2.0, 1.0, 0.8), yaw=0.0,
                category="Car", forward_yaw=0.0):
    return ObjectState(object_id=object_id, category=category,
                       box=make_box(center, extent, yaw), forward_yaw=forward_yaw)


def make_frame(objects=(), depth=None, rig=None, frame_id=0, lidar_points=None,
               source="sim", weather_tag="unspecified", seg=None):
    rig = rig or make_rig()
    k = rig.camera.intrinsics
    depth = depth or flat_depth(k.width, k.height)
    if seg is None:
        seg = SegMap(k.width, k.height,
                     np.zeros((k.height, k.width), dtype=np.uint8),
                     dict(DEFAULT_CATEGORIES))
    if lidar_points is None:
        lidar_points = np.zeros((0, 4))
    return FrameDump(
        meta=FrameMeta(frame_id=frame_id, timestamp=0.1 * frame_id,
                       ego_pose_world=identity_pose(),
                       weather_tag=weather_tag, source=source),
        rgb_path=None,
        depth=depth,
        seg=seg,
        lidar=LidarScan(np.asarray(lidar_points, dtype=np.float64).reshape(-1, 4)),
        objects=tuple(objects),
        rig=rig,
    )


def write_fixture_dump(root, frames, rng=None):
    for frame in frames:
        write_frame(root, frame)
    return root


@pytest.fixture
def simple_frame():
    return make_frame(objects=[make_object(1, (15.0, 0.0, 0.8))])
