"""Simulator backends.

Both backends speak simulator conventions: left-handed coordinates
(x forward, y right, z up), yaw in degrees, depth cameras returning 24-bit
RGB-encoded depth. `SyntheticBackend` is a deterministic in-process stand-in
with the same surface as the live client, so the capture path can run and be
tested without a simulator process.
"""

from __future__ import annotations

import math
import queue
from dataclasses import dataclass, field

import numpy as np

from .depth import encode_depth_rgb
from .errors import BridgeConnectionError
from .transforms import intrinsics_from_fov

CATEGORY_IDS = {"unlabeled": 0, "road": 1, "car": 2, "pedestrian": 3}
CATEGORY_TABLE = {0: "unlabeled", 1: "road", 2: "car", 3: "pedestrian"}

_SEG_ID = {"Car": CATEGORY_IDS["car"], "Pedestrian": CATEGORY_IDS["pedestrian"]}
_RGB_TINT = {"Car": (180, 60, 60), "Pedestrian": (60, 60, 180)}

_EXTENTS = {"Car": (2.2, 1.0, 0.75), "Pedestrian": (0.35, 0.35, 0.9)}


@dataclass
class BackendConfig:
    width: int = 640
    height: int = 480
    fov_deg: float = 90.0
    far_plane: float = 1000.0
    delta_seconds: float = 0.05
    camera_offset: tuple = (1.6, 0.0, 1.5)   # simulator ego frame
    lidar_offset: tuple = (0.0, 0.0, 1.8)
    lidar_points: int = 2000


@dataclass
class ActorState:
    actor_id: int
    category: str
    location: np.ndarray       # box center, simulator coords
    yaw_deg: float
    extent: tuple              # half extents (x, y, z)
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))


@dataclass
class SensorBundle:
    tick_id: int
    timestamp: float
    sensor_ticks: dict         # sensor name -> tick id it observed
    rgb: np.ndarray            # (H, W, 3) uint8
    depth_rgb: np.ndarray      # (H, W, 3) uint8, 24-bit encoded
    seg: np.ndarray            # (H, W) uint8
    lidar: np.ndarray          # (N, 4) simulator lidar frame
    ego_location: np.ndarray   # ego ground point, simulator coords
    ego_yaw_deg: float
    actors: list               # ActorState, ego included


class SyntheticBackend:
    """Closed-form scene renderer standing in for a live simulator.

    A ground plane, the ego car, and a few ambient actors; depth is rendered
    analytically and handed out in the simulator's 24-bit encoding. Optional
    `desync_ticks` makes the lidar report a stale tick id on those ticks, to
    exercise the dropped-frame path.
    """

    def __init__(self, config: BackendConfig | None = None, seed: int = 0,
                 desync_ticks=(), ambient_actors: bool = True,
                 record_true_depth: bool = False):
        self.config = config or BackendConfig()
        self._rng = np.random.default_rng(seed)
        self._desync_ticks = frozenset(desync_ticks)
        self._ambient = ambient_actors
        self._record_true_depth = record_true_depth
        self.true_depths = {}        # tick_id -> float32 metres, when recording
        self.weather = None
        self._connected = False
        self._tick = 0
        self._next_id = 1
        self._actors = []
        self._ego_location = np.zeros(3)
        self._ego_yaw = 0.0
        k = intrinsics_from_fov(self.config.width, self.config.height, self.config.fov_deg)
        self._fx, self._fy = k["fx"], k["fy"]
        self._cx, self._cy = k["cx"], k["cy"]
        self._lidar_dirs = self._make_lidar_dirs()

    # -- lifecycle ----------------------------------------------------------

    def connect(self):
        self._connected = True
        if self._ambient:
            self._spawn("Car", (25.0, 3.0, 0.0), 0.0)
            oncoming = self._spawn("Car", (60.0, -3.5, 0.0), 180.0)
            oncoming.velocity = np.array([-8.0, 0.0, 0.0])
            walker = self._spawn("Pedestrian", (15.0, -4.0, 0.0), 0.0)
            walker.velocity = np.array([1.2, 0.0, 0.0])
        return self

    def disconnect(self):
        self._connected = False

    def set_weather(self, weather: dict):
        self.weather = dict(weather)

    # -- actors -------------------------------------------------------------

    def _spawn(self, category, location, yaw_deg) -> ActorState:
        extent = _EXTENTS.get(category)
        if extent is None:
            raise ValueError(f"no blueprint for category {category!r}")
        center = np.array(location, dtype=np.float64)
        center[2] += extent[2]           # ground point -> box center
        state = ActorState(self._next_id, category, center, float(yaw_deg), extent)
        self._next_id += 1
        self._actors.append(state)
        return state

    def spawn_actor(self, category, location, yaw_deg) -> int:
        if not self._connected:
            raise BridgeConnectionError("synthetic", "not connected")
        return self._spawn(category, location, yaw_deg).actor_id

    def set_actor_transform(self, actor_id, location, yaw_deg):
        for a in self._actors:
            if a.actor_id == actor_id:
                a.location = np.array(location, dtype=np.float64)
                a.location[2] += a.extent[2]
                a.yaw_deg = float(yaw_deg)
                return
        raise ValueError(f"unknown actor id {actor_id}")

    def set_ego_transform(self, location, yaw_deg):
        self._ego_location = np.array(location, dtype=np.float64)
        self._ego_yaw = float(yaw_deg)

    # -- stepping -----------------------------------------------------------

    def tick(self) -> SensorBundle:
        if not self._connected:
            raise BridgeConnectionError("synthetic", "not connected")
        tick_id = self._tick
        self._tick += 1
        timestamp = tick_id * self.config.delta_seconds

        depth, seg, rgb = self._render(timestamp)
        lidar = self._scan()
        if self._record_true_depth:
            self.true_depths[tick_id] = depth

        sensor_ticks = {"rgb": tick_id, "depth": tick_id, "seg": tick_id, "lidar": tick_id}
        if tick_id in self._desync_ticks:
            sensor_ticks["lidar"] = tick_id - 1

        ego_extent = (2.3, 1.0, 0.9)
        ego_center = self._ego_location + np.array([0.0, 0.0, ego_extent[2]])
        actors = [ActorState(0, "Car", ego_center, self._ego_yaw, ego_extent)]
        actors.extend(ActorState(a.actor_id, a.category, a.location.copy(),
                                 a.yaw_deg, a.extent) for a in self._actors)

        bundle = SensorBundle(
            tick_id=tick_id,
            timestamp=timestamp,
            sensor_ticks=sensor_ticks,
            rgb=rgb,
            depth_rgb=encode_depth_rgb(depth, self.config.far_plane),
            seg=seg,
            lidar=lidar,
            ego_location=self._ego_location.copy(),
            ego_yaw_deg=self._ego_yaw,
            actors=actors,
        )
        for a in self._actors:
            a.location = a.location + a.velocity * self.config.delta_seconds
        return bundle

    # -- rendering ----------------------------------------------------------

    def _camera_pose(self):
        yaw = math.radians(self._ego_yaw)
        c, s = math.cos(yaw), math.sin(yaw)
        # left-handed yaw rotation (x forward, y right)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        loc = self._ego_location + rot @ np.array(self.config.camera_offset)
        return rot, loc

    def _render(self, timestamp):
        cfg = self.config
        h, w = cfg.height, cfg.width
        depth = np.full((h, w), cfg.far_plane, dtype=np.float32)
        seg = np.zeros((h, w), dtype=np.uint8)
        rgb = np.full((h, w, 3), 110, dtype=np.uint8)
        rgb[: h // 2] = (140, 170, 210)

        rot, cam_loc = self._camera_pose()
        cam_height = cam_loc[2]

        rows = np.arange(h, dtype=np.float64)
        below = rows > self._cy
        ground = np.full(h, cfg.far_plane)
        ground[below] = cam_height * self._fy / (rows[below] - self._cy)
        ground = np.minimum(ground, cfg.far_plane).astype(np.float32)
        depth[:] = ground[:, None]
        seg[below] = CATEGORY_IDS["road"]

        for a in self._actors:
            d = rot.T @ (a.location - cam_loc)
            forward, right, up = d
            if forward <= 0.5:
                continue
            u = self._cx + self._fx * right / forward
            v = self._cy - self._fy * up / forward
            hw = self._fx * max(a.extent[0], a.extent[1]) / forward
            hh = self._fy * a.extent[2] / forward
            left = max(int(u - hw), 0)
            top = max(int(v - hh), 0)
            rightpx = min(int(u + hw) + 1, w)
            bottom = min(int(v + hh) + 1, h)
            if left >= rightpx or top >= bottom:
                continue
            window = depth[top:bottom, left:rightpx]
            mask = window > forward
            window[mask] = forward
            seg[top:bottom, left:rightpx][mask] = _SEG_ID[a.category]
            rgb[top:bottom, left:rightpx][mask] = _RGB_TINT[a.category]
        return depth, seg, rgb

    def _make_lidar_dirs(self):
        n = self.config.lidar_points
        az = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        elev = np.deg2rad(-np.linspace(2.0, 24.0, 8))[np.arange(n) % 8]
        return np.stack([
            np.cos(elev) * np.cos(az),
            np.cos(elev) * np.sin(az),
            np.sin(elev),
        ], axis=1)

    def _scan(self):
        """Ray-drop each beam onto the ground plane; range-limit the rest."""
        cfg = self.config
        sensor_z = self._ego_location[2] + cfg.lidar_offset[2]
        dz = self._lidar_dirs[:, 2]
        ranges = np.full(len(dz), 120.0)
        down = dz < -1e-6
        ranges[down] = np.minimum(ranges[down], -sensor_z / dz[down])
        points = self._lidar_dirs * ranges[:, None]
        intensity = np.full((len(points), 1), 0.5)
        return np.hstack([points, intensity])


class CarlaBackend:
    """Thin wrapper over the live simulator's Python client in sync mode.

    Requires the `carla` package and a reachable server; untested paths are
    kept close to the stock sensor-queue recipe.
    """

    def __init__(self, host: str, port: int, config: BackendConfig | None = None):
        self.host = host
        self.port = port
        self.config = config or BackendConfig()
        self._carla = None
        self._world = None
        self._ego = None
        self._sensors = {}
        self._queues = {}
        self._spawned = []

    def connect(self):
        try:
            import carla
        except ImportError as e:
            raise BridgeConnectionError(f"{self.host}:{self.port}",
                                        f"carla client library unavailable: {e}")
        self._carla = carla
        try:
            client = carla.Client(self.host, self.port)
            client.set_timeout(10.0)
            self._world = client.get_world()
        except RuntimeError as e:
            raise BridgeConnectionError(f"{self.host}:{self.port}", str(e))
        settings = self._world.get_settings()
        settings.synchronous_mode = True
        settings.fixed_delta_seconds = self.config.delta_seconds
        self._world.apply_settings(settings)
        self._spawn_rig()
        return self

    def _spawn_rig(self):
        carla, cfg = self._carla, self.config
        lib = self._world.get_blueprint_library()
        spawn = self._world.get_map().get_spawn_points()[0]
        self._ego = self._world.spawn_actor(lib.filter("vehicle.*model3*")[0], spawn)
        self._spawned.append(self._ego)

        def attach(bp_name, offset, name, **attrs):
            bp = lib.find(bp_name)
            for k, v in attrs.items():
                bp.set_attribute(k, str(v))
            tf = carla.Transform(carla.Location(*offset))
            sensor = self._world.spawn_actor(bp, tf, attach_to=self._ego)
            self._spawned.append(sensor)
            q = queue.Queue()
            sensor.listen(q.put)
            self._sensors[name] = sensor
            self._queues[name] = q

        cam = dict(image_size_x=cfg.width, image_size_y=cfg.height, fov=cfg.fov_deg)
        attach("sensor.camera.rgb", cfg.camera_offset, "rgb", **cam)
        attach("sensor.camera.depth", cfg.camera_offset, "depth", **cam)
        attach("sensor.camera.semantic_segmentation", cfg.camera_offset, "seg", **cam)
        attach("sensor.lidar.ray_cast", cfg.lidar_offset, "lidar",
               points_per_second=cfg.lidar_points * 20, rotation_frequency=20)

    def disconnect(self):
        for actor in reversed(self._spawned):
            actor.destroy()
        self._spawned.clear()

    def set_weather(self, weather: dict):
        carla = self._carla
        self._world.set_weather(carla.WeatherParameters(
            sun_altitude_angle=weather["sun_altitude_deg"],
            sun_azimuth_angle=weather["sun_azimuth_deg"],
            cloudiness=weather["cloudiness_pct"],
            precipitation=weather["precipitation_pct"],
            precipitation_deposits=weather["precipitation_deposits_pct"],
        ))

    def spawn_actor(self, category, location, yaw_deg) -> int:
        carla = self._carla
        lib = self._world.get_blueprint_library()
        pattern = "walker.pedestrian.*" if category == "Pedestrian" else "vehicle.*model3*"
        bp = lib.filter(pattern)[0]
        tf = carla.Transform(carla.Location(*location), carla.Rotation(yaw=yaw_deg))
        actor = self._world.spawn_actor(bp, tf)
        self._spawned.append(actor)
        return actor.id

    def set_actor_transform(self, actor_id, location, yaw_deg):
        carla = self._carla
        actor = self._world.get_actor(actor_id)
        actor.set_transform(carla.Transform(carla.Location(*location),
                                            carla.Rotation(yaw=yaw_deg)))

    def set_ego_transform(self, location, yaw_deg):
        carla = self._carla
        self._ego.set_transform(carla.Transform(carla.Location(*location),
                                                carla.Rotation(yaw=yaw_deg)))

    def tick(self) -> SensorBundle:
        frame = self._world.tick()
        data, sensor_ticks = {}, {}
        for name, q in self._queues.items():
            item = q.get(timeout=5.0)
            data[name] = item
            sensor_ticks[name] = item.frame

        cfg = self.config
        rgb = np.frombuffer(data["rgb"].raw_data, dtype=np.uint8).reshape(
            cfg.height, cfg.width, 4)[:, :, 2::-1]          # BGRA -> RGB
        depth_rgb = np.frombuffer(data["depth"].raw_data, dtype=np.uint8).reshape(
            cfg.height, cfg.width, 4)[:, :, 2::-1]
        seg = np.frombuffer(data["seg"].raw_data, dtype=np.uint8).reshape(
            cfg.height, cfg.width, 4)[:, :, 2]              # red channel holds ids
        lidar = np.frombuffer(data["lidar"].raw_data, dtype=np.float32).reshape(-1, 4)

        tf = self._ego.get_transform()
        actors = []
        for actor in self._world.get_actors().filter("*"):
            category = ("Car" if actor.type_id.startswith("vehicle")
                        else "Pedestrian" if actor.type_id.startswith("walker") else None)
            if category is None:
                continue
            bb, atf = actor.bounding_box, actor.get_transform()
            center = atf.transform(bb.location)
            actors.append(ActorState(
                actor.id, category,
                np.array([center.x, center.y, center.z]),
                atf.rotation.yaw,
                (bb.extent.x, bb.extent.y, bb.extent.z),
            ))

        return SensorBundle(
            tick_id=frame,
            timestamp=data["rgb"].timestamp,
            sensor_ticks=sensor_ticks,
            rgb=np.ascontiguousarray(rgb),
            depth_rgb=np.ascontiguousarray(depth_rgb),
            seg=np.ascontiguousarray(seg),
            lidar=lidar.astype(np.float64),
            ego_location=np.array([tf.location.x, tf.location.y, tf.location.z]),
            ego_yaw_deg=tf.rotation.yaw,
            actors=actors,
        )
