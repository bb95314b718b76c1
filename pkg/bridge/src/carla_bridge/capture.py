"""Synchronous capture sessions: tick the simulator, convert, write frames."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backends import BackendConfig, CarlaBackend, CATEGORY_TABLE, SensorBundle
from .depth import decode_depth_rgb
from .dumpwriter import DumpWriter, FrameRecord, pose_json
from .errors import DesyncError, SpawnError
from .scenario import Script
from .transforms import (
    CAMERA_IN_EGO_ROTATION,
    intrinsics_from_fov,
    lh_location_to_world,
    lh_points_to_world,
    lh_yaw_to_world,
    yaw_rotation,
)

log = logging.getLogger("carla_bridge")


@dataclass
class CaptureSession:
    dump_root: Path
    frames_to_capture: int = 100
    host: str = "localhost"
    port: int = 2000
    weather: dict | None = None          # weather manifest contents, or None
    scenario: Script | None = None
    ego_speed_mps: float = 5.0
    config: BackendConfig = field(default_factory=BackendConfig)

    def __post_init__(self):
        if self.frames_to_capture <= 0:
            raise ValueError("frames_to_capture must be > 0")


def _offset_to_ego_frame(offset) -> list:
    """Simulator mount offset (x fwd, y right, z up) -> right-handed ego frame."""
    x, y, z = offset
    return [float(x), float(-y), float(z)]


def _rig_json(cfg: BackendConfig) -> dict:
    return {
        "camera": {
            "intrinsics": intrinsics_from_fov(cfg.width, cfg.height, cfg.fov_deg),
            "pose_in_ego": pose_json(CAMERA_IN_EGO_ROTATION,
                                     _offset_to_ego_frame(cfg.camera_offset)),
        },
        "lidar": {
            "pose_in_ego": pose_json(np.eye(3), _offset_to_ego_frame(cfg.lidar_offset)),
            "points_per_scan_hint": cfg.lidar_points,
        },
    }


def _to_frame_record(bundle: SensorBundle, frame_id: int, weather_tag: str,
                     far_plane: float) -> FrameRecord:
    objects = [
        {
            "object_id": a.actor_id,
            "category": a.category,
            "center": lh_location_to_world(a.location),
            "extent": [float(x) for x in a.extent],
            "yaw": lh_yaw_to_world(a.yaw_deg),
        }
        for a in bundle.actors
    ]
    ego_yaw = lh_yaw_to_world(bundle.ego_yaw_deg)
    return FrameRecord(
        frame_id=frame_id,
        tick_id=bundle.tick_id,
        timestamp=bundle.timestamp,
        ego_rotation=yaw_rotation(ego_yaw),
        ego_translation=lh_location_to_world(bundle.ego_location),
        weather_tag=weather_tag,
        rgb=bundle.rgb,
        depth_m=decode_depth_rgb(bundle.depth_rgb, far_plane),
        seg=bundle.seg,
        lidar=lh_points_to_world(bundle.lidar),
        objects=objects,
    )


def _capture_loop(session: CaptureSession, backend, writer: DumpWriter,
                  frames: int, weather_tag: str, before_tick=None) -> int:
    """Tick until `frames` consistent frames are written; desynced ticks are
    dropped (logged), with a hard attempt cap so a sick backend cannot spin."""
    captured = 0
    attempts = 0
    max_attempts = frames * 3 + 10
    delta = session.config.delta_seconds
    while captured < frames:
        if attempts >= max_attempts:
            raise DesyncError(attempts, {"dropped": attempts - captured})
        t = attempts * delta
        backend.set_ego_transform((session.ego_speed_mps * t, 0.0, 0.0), 0.0)
        if before_tick is not None:
            before_tick(t, session.ego_speed_mps * t)
        bundle = backend.tick()
        attempts += 1
        mismatched = {k: v for k, v in bundle.sensor_ticks.items() if v != bundle.tick_id}
        if mismatched:
            err = DesyncError(bundle.tick_id, bundle.sensor_ticks)
            log.warning("dropping frame: %s", err)
            continue
        writer.write(_to_frame_record(bundle, captured, weather_tag,
                                      session.config.far_plane))
        captured += 1
    return captured


def capture(session: CaptureSession, backend=None) -> Path:
    """Capture `frames_to_capture` synchronized frames into a fresh dump."""
    if backend is None:
        backend = CarlaBackend(session.host, session.port, session.config)
    backend.connect()
    try:
        weather_tag = "unspecified"
        if session.weather is not None:
            backend.set_weather(session.weather)
            weather_tag = str(session.weather["name"])
        writer = DumpWriter(session.dump_root, _rig_json(session.config),
                            CATEGORY_TABLE, session.weather)
        _capture_loop(session, backend, writer, session.frames_to_capture, weather_tag)
    finally:
        backend.disconnect()
    return Path(session.dump_root)


class _ScriptedActor:
    def __init__(self, spec, actor_id, location, yaw_deg):
        self.spec = spec
        self.actor_id = actor_id
        self.location = np.array(location, dtype=np.float64)
        self.yaw_deg = yaw_deg
        self.triggered = False


def run_scenario(session: CaptureSession, backend=None) -> Path:
    """Spawn a script's actors, fire its triggers, and capture duration_s."""
    script = session.scenario
    if script is None:
        raise ValueError("session has no scenario script")
    if backend is None:
        backend = CarlaBackend(session.host, session.port, session.config)
    backend.connect()
    try:
        backend.set_weather(script.weather.to_dict())
        writer = DumpWriter(session.dump_root, _rig_json(session.config),
                            CATEGORY_TABLE, script.weather.to_dict())

        scripted = []
        for index, spec in enumerate(script.actors):
            forward, left, up = spec.spawn_offset
            location = (forward, -left, up)     # ego frame -> simulator handedness
            yaw_deg = -spec.heading_deg
            try:
                actor_id = backend.spawn_actor(spec.category, location, yaw_deg)
            except ValueError as e:
                raise SpawnError(index, str(e))
            scripted.append(_ScriptedActor(spec, actor_id, location, yaw_deg))

        delta = session.config.delta_seconds
        frames = max(1, int(round(script.duration_s / delta)))

        def advance(t, ego_distance):
            for actor in scripted:
                spec = actor.spec
                if not actor.triggered:
                    fired = (t >= spec.trigger_value if spec.trigger_type == "time"
                             else ego_distance >= spec.trigger_value)
                    if not fired:
                        continue
                    actor.triggered = True
                yaw = math.radians(actor.yaw_deg)
                step = spec.speed_mps * delta
                actor.location += np.array([step * math.cos(yaw), step * math.sin(yaw), 0.0])
                backend.set_actor_transform(actor.actor_id, tuple(actor.location),
                                            actor.yaw_deg)

        _capture_loop(session, backend, writer, frames, script.weather.name,
                      before_tick=advance)
    finally:
        backend.disconnect()
    return Path(session.dump_root)
