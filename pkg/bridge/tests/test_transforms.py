import math

import numpy as np

from carla_bridge.transforms import (
    CAMERA_IN_EGO_ROTATION,
    intrinsics_from_fov,
    lh_location_to_world,
    lh_points_to_world,
    lh_yaw_to_world,
    world_to_lh_location,
    world_yaw_to_lh,
    yaw_rotation,
)


class TestHandedness:
    def test_location_round_trip(self):
        p = (3.0, -2.5, 1.25)
        assert world_to_lh_location(lh_location_to_world(p)) == p

    def test_y_negated(self):
        assert lh_location_to_world((1.0, 2.0, 3.0)).tolist() == [1.0, -2.0, 3.0]

    def test_points_batch_matches_scalar(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(50, 4))
        out = lh_points_to_world(pts)
        for row, orig in zip(out, pts):
            assert np.allclose(row[:3], lh_location_to_world(orig[:3]))
            assert row[3] == orig[3]

    def test_yaw_sign_flip(self):
        # simulator yaw toward its +y (right) becomes a clockwise world yaw
        assert math.isclose(lh_yaw_to_world(90.0), -math.pi / 2)
        assert math.isclose(lh_yaw_to_world(-45.0), math.pi / 4)

    def test_yaw_round_trip(self):
        for deg in (-170.0, -90.0, 0.0, 30.0, 179.0):
            assert math.isclose(world_yaw_to_lh(lh_yaw_to_world(deg)), deg)

    def test_yaw_wrapped(self):
        assert -math.pi <= lh_yaw_to_world(350.0) < math.pi
        assert math.isclose(lh_yaw_to_world(350.0), math.radians(10.0))

    def test_forward_axis_preserved(self):
        # a point dead ahead of the simulator ego stays dead ahead
        yaw_deg = 30.0
        c, s = math.cos(math.radians(yaw_deg)), math.sin(math.radians(yaw_deg))
        ahead_lh = np.array([10.0 * c, 10.0 * s, 0.0])   # left-handed forward
        world = lh_location_to_world(ahead_lh)
        forward_world = yaw_rotation(lh_yaw_to_world(yaw_deg)) @ np.array([1.0, 0.0, 0.0])
        assert np.allclose(world / np.linalg.norm(world), forward_world)


class TestRotations:
    def test_yaw_rotation_right_handed(self):
        r = yaw_rotation(math.pi / 2)
        assert np.allclose(r @ [1, 0, 0], [0, 1, 0], atol=1e-12)
        assert np.isclose(np.linalg.det(r), 1.0)

    def test_camera_rotation_orthonormal(self):
        r = CAMERA_IN_EGO_ROTATION
        assert np.allclose(r @ r.T, np.eye(3))
        assert np.isclose(np.linalg.det(r), 1.0)

    def test_camera_axes(self):
        # optical axis is ego-forward; image right is ego-right (-y);
        # image down is ego-down (-z)
        r = CAMERA_IN_EGO_ROTATION
        assert np.allclose(r @ [0, 0, 1], [1, 0, 0])      # cam z -> ego x
        assert np.allclose(r @ [1, 0, 0], [0, -1, 0])     # cam x -> ego -y
        assert np.allclose(r @ [0, 1, 0], [0, 0, -1])     # cam y -> ego -z


class TestIntrinsics:
    def test_ninety_degree_fov(self):
        k = intrinsics_from_fov(640, 480, 90.0)
        assert math.isclose(k["fx"], 320.0)
        assert k["fy"] == k["fx"]
        assert (k["cx"], k["cy"]) == (320.0, 240.0)

    def test_narrow_fov_longer_focal(self):
        wide = intrinsics_from_fov(640, 480, 90.0)
        narrow = intrinsics_from_fov(640, 480, 45.0)
        assert narrow["fx"] > wide["fx"]
