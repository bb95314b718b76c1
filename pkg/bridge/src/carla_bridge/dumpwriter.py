"""Writer for the interchange dump layout consumed by the annotation toolkit.

Layout (all JSON keys lower_snake_case, angles in radians, lengths in metres):

    dump_root/
      rig.json                  # sensor rig: intrinsics + poses
      categories.json           # segmentation id -> category name
      weather.json              # weather applied to this capture (bridge extra)
      frames/<frame_id>/
        meta.json
        rgb.png                 # 8-bit RGB
        depth.f32               # "DPF1" | u32 LE width | u32 LE height | f32 LE row-major
        seg.png                 # 8-bit single-channel category ids
        lidar.bin               # N x (f32 x, f32 y, f32 z, f32 intensity), LE
        objects.json
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

DEPTH_MAGIC = b"DPF1"


def pose_json(rotation: np.ndarray, translation) -> dict:
    return {
        "rotation": [float(x) for x in np.asarray(rotation).reshape(-1)],
        "translation": [float(x) for x in translation],
    }


@dataclass(frozen=True)
class FrameRecord:
    """Everything needed to persist one frame, already in world conventions."""
    frame_id: int
    tick_id: int
    timestamp: float
    ego_rotation: np.ndarray       # 3x3 right-handed world rotation
    ego_translation: np.ndarray
    weather_tag: str
    rgb: np.ndarray                # (H, W, 3) uint8
    depth_m: np.ndarray            # (H, W) float32 metres
    seg: np.ndarray                # (H, W) uint8 category ids
    lidar: np.ndarray              # (N, 4) float, right-handed lidar frame
    objects: list                  # dicts: object_id, category, center, extent, yaw


class DumpWriter:
    def __init__(self, dump_root, rig: dict, categories: dict, weather: dict | None = None):
        self.root = Path(dump_root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "rig.json").write_text(json.dumps(rig, indent=1))
        (self.root / "categories.json").write_text(
            json.dumps({str(k): v for k, v in categories.items()}))
        if weather is not None:
            (self.root / "weather.json").write_text(json.dumps(weather, indent=1, sort_keys=True))

    def write(self, frame: FrameRecord) -> None:
        fdir = self.root / "frames" / str(frame.frame_id)
        fdir.mkdir(parents=True, exist_ok=True)

        (fdir / "meta.json").write_text(json.dumps({
            "frame_id": frame.frame_id,
            "tick_id": frame.tick_id,
            "timestamp": frame.timestamp,
            "ego_pose_world": pose_json(frame.ego_rotation, frame.ego_translation),
            "weather_tag": frame.weather_tag,
            "source": "sim",
        }, indent=1))

        Image.fromarray(frame.rgb, mode="RGB").save(fdir / "rgb.png")
        Image.fromarray(frame.seg, mode="L").save(fdir / "seg.png")

        header = DEPTH_MAGIC + struct.pack(
            "<II", frame.depth_m.shape[1], frame.depth_m.shape[0])
        (fdir / "depth.f32").write_bytes(
            header + np.ascontiguousarray(frame.depth_m, dtype="<f4").tobytes())

        (fdir / "lidar.bin").write_bytes(
            np.ascontiguousarray(frame.lidar, dtype="<f4").tobytes())

        (fdir / "objects.json").write_text(json.dumps([
            {
                "object_id": int(o["object_id"]),
                "category": o["category"],
                "box": {
                    "center": [float(x) for x in o["center"]],
                    "extent": [float(x) for x in o["extent"]],
                    "yaw": float(o["yaw"]),
                },
                "forward_yaw": float(o["yaw"]),
            }
            for o in frame.objects
        ], indent=1))
