"""On-disk interchange format for captured simulator frames.

Dump layout:

    dump_root/
      rig.json                  # sensor rig: intrinsics + poses
      categories.json           # segmentation id -> category name
      frames/<frame_id>/
        meta.json
        rgb.png                 # 8-bit RGB
        depth.f32               # "DPF1" | u32 LE width | u32 LE height | f32 LE row-major
        seg.png                 # 8-bit single-channel category ids
        lidar.bin               # N x (f32 x, f32 y, f32 z, f32 intensity), LE
        objects.json

All JSON keys are lower_snake_case; angles in radians, lengths in meters.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvariantViolation, MalformedHeader, MissingFile, OutOfBounds
from .geometry import CameraIntrinsics, OrientedBox3, Pose

DEPTH_MAGIC = b"DPF1"

KITTI_CATEGORIES = frozenset(
    {"Car", "Van", "Truck", "Pedestrian", "Person_sitting", "Cyclist", "Tram", "Misc"}
)

SOURCES = ("sim", "real", "enhanced")


@dataclass(frozen=True)
class CameraRig:
    intrinsics: CameraIntrinsics
    pose_in_ego: Pose


@dataclass(frozen=True)
class LidarRig:
    pose_in_ego: Pose
    points_per_scan_hint: int = 100_000


@dataclass(frozen=True)
class SensorRig:
    camera: CameraRig
    lidar: LidarRig


@dataclass(frozen=True)
class FrameMeta:
    frame_id: int
    timestamp: float
    ego_pose_world: Pose
    weather_tag: str = "unspecified"
    source: str = "sim"


@dataclass(frozen=True)
class DepthMap:
    width: int
    height: int
    data: np.ndarray  # float32 (height, width), meters


@dataclass(frozen=True)
class SegMap:
    width: int
    height: int
    data: np.ndarray  # uint8 (height, width)
    category_table: dict


@dataclass(frozen=True)
class LidarScan:
    points: np.ndarray  # (N, 4): x, y, z, intensity in lidar frame


@dataclass(frozen=True)
class ObjectState:
    object_id: int
    category: str
    box: OrientedBox3
    forward_yaw: float


@dataclass(frozen=True)
class FrameDump:
    meta: FrameMeta
    rgb_path: Path
    depth: DepthMap
    seg: SegMap
    lidar: LidarScan
    objects: tuple
    rig: SensorRig


def depth_at(d: DepthMap, u: float, v: float) -> float:
    """Nearest-neighbor depth sample; rounds half away from zero."""
    iu = math.floor(u + 0.5) if u >= 0 else -math.floor(-u + 0.5)
    iv = math.floor(v + 0.5) if v >= 0 else -math.floor(-v + 0.5)
    if not (0 <= iu < d.width and 0 <= iv < d.height):
        raise OutOfBounds(f"pixel ({u}, {v}) outside {d.width}x{d.height} depth map")
    return float(d.data[iv, iu])


# ---------------------------------------------------------------------------
# JSON codecs

def _pose_to_json(p: Pose) -> dict:
    return {
        "rotation": [float(x) for x in p.rotation.reshape(-1)],
        "translation": [float(x) for x in p.translation],
    }


def _pose_from_json(obj: dict, path) -> Pose:
    try:
        rot = np.array(obj["rotation"], dtype=np.float64).reshape(3, 3)
        trans = np.array(obj["translation"], dtype=np.float64)
    except (KeyError, ValueError, TypeError) as e:
        raise MalformedHeader(path, f"bad pose: {e}")
    pose = Pose(rot, trans)
    if not pose.is_valid():
        raise InvariantViolation(path, "rotation matrix is not orthonormal with det +1")
    return pose


def _rig_to_json(rig: SensorRig) -> dict:
    k = rig.camera.intrinsics
    return {
        "camera": {
            "intrinsics": {
                "fx": k.fx, "fy": k.fy, "cx": k.cx, "cy": k.cy,
                "width": k.width, "height": k.height,
            },
            "pose_in_ego": _pose_to_json(rig.camera.pose_in_ego),
        },
        "lidar": {
            "pose_in_ego": _pose_to_json(rig.lidar.pose_in_ego),
            "points_per_scan_hint": rig.lidar.points_per_scan_hint,
        },
    }


def _rig_from_json(obj: dict, path) -> SensorRig:
    try:
        ki = obj["camera"]["intrinsics"]
        k = CameraIntrinsics(
            fx=float(ki["fx"]), fy=float(ki["fy"]),
            cx=float(ki["cx"]), cy=float(ki["cy"]),
            width=int(ki["width"]), height=int(ki["height"]),
        )
        cam_pose = _pose_from_json(obj["camera"]["pose_in_ego"], path)
        lidar_pose = _pose_from_json(obj["lidar"]["pose_in_ego"], path)
        hint = int(obj["lidar"].get("points_per_scan_hint", 100_000))
    except (KeyError, ValueError, TypeError) as e:
        raise MalformedHeader(path, f"bad rig: {e}")
    if not k.is_valid():
        raise InvariantViolation(path, "invalid camera intrinsics")
    return SensorRig(CameraRig(k, cam_pose), LidarRig(lidar_pose, hint))


def _object_to_json(o: ObjectState) -> dict:
    return {
        "object_id": o.object_id,
        "category": o.category,
        "box": {
            "center": [float(x) for x in o.box.center],
            "extent": [float(x) for x in o.box.extent],
            "yaw": float(o.box.yaw),
        },
        "forward_yaw": float(o.forward_yaw),
    }


def _object_from_json(obj: dict, path) -> ObjectState:
    try:
        box = OrientedBox3(
            center=np.array(obj["box"]["center"], dtype=np.float64),
            extent=np.array(obj["box"]["extent"], dtype=np.float64),
            yaw=float(obj["box"]["yaw"]),
        )
        state = ObjectState(
            object_id=int(obj["object_id"]),
            category=str(obj["category"]),
            box=box,
            forward_yaw=float(obj["forward_yaw"]),
        )
    except (KeyError, ValueError, TypeError) as e:
        raise MalformedHeader(path, f"bad object state: {e}")
    if state.category not in KITTI_CATEGORIES:
        raise InvariantViolation(path, f"unknown category {state.category!r}")
    if not box.is_valid():
        raise InvariantViolation(path, f"invalid box for object {state.object_id}")
    return state


def _load_json(path: Path):
    if not path.is_file():
        raise MissingFile(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise MalformedHeader(path, f"invalid JSON: {e}")


# ---------------------------------------------------------------------------
# Binary codecs

def read_depth(path: Path) -> DepthMap:
    if not path.is_file():
        raise MissingFile(path)
    raw = path.read_bytes()
    if len(raw) < 12 or raw[:4] != DEPTH_MAGIC:
        raise MalformedHeader(path, "bad magic, expected DPF1")
    width, height = struct.unpack_from("<II", raw, 4)
    expected = 12 + 4 * width * height
    if len(raw) != expected:
        raise MalformedHeader(path, f"size {len(raw)} != expected {expected} for {width}x{height}")
    data = np.frombuffer(raw, dtype="<f4", offset=12).reshape(height, width)
    if not np.all(np.isfinite(data)) or np.any(data < 0):
        raise InvariantViolation(path, "depth values must be finite and >= 0")
    return DepthMap(width, height, data)


def write_depth(path: Path, depth: DepthMap) -> None:
    header = DEPTH_MAGIC + struct.pack("<II", depth.width, depth.height)
    path.write_bytes(header + np.ascontiguousarray(depth.data, dtype="<f4").tobytes())


def read_lidar(path: Path) -> LidarScan:
    if not path.is_file():
        raise MissingFile(path)
    raw = path.read_bytes()
    if len(raw) % 16 != 0:
        raise MalformedHeader(path, f"size {len(raw)} is not a multiple of 16")
    points = np.frombuffer(raw, dtype="<f4").reshape(-1, 4).astype(np.float64)
    if not np.all(np.isfinite(points)):
        raise InvariantViolation(path, "lidar points must be finite")
    return LidarScan(points)


def write_lidar(path: Path, scan: LidarScan) -> None:
    path.write_bytes(np.ascontiguousarray(scan.points, dtype="<f4").tobytes())


def read_seg(path: Path, category_table: dict) -> SegMap:
    if not path.is_file():
        raise MissingFile(path)
    try:
        img = Image.open(path)
        data = np.asarray(img, dtype=np.uint8)
    except Exception as e:
        raise MalformedHeader(path, f"unreadable PNG: {e}")
    if data.ndim != 2:
        raise MalformedHeader(path, "segmentation PNG must be single-channel")
    present = set(np.unique(data).tolist())
    missing = present - set(category_table)
    if missing:
        raise InvariantViolation(path, f"ids {sorted(missing)} absent from category_table")
    return SegMap(data.shape[1], data.shape[0], data, category_table)


# ---------------------------------------------------------------------------
# Frame-level load/save

def frames_dir(dump_root) -> Path:
    return Path(dump_root) / "frames"


def load_rig(dump_root) -> SensorRig:
    path = Path(dump_root) / "rig.json"
    return _rig_from_json(_load_json(path), path)


def load_categories(dump_root) -> dict:
    path = Path(dump_root) / "categories.json"
    obj = _load_json(path)
    try:
        return {int(k): str(v) for k, v in obj.items()}
    except (ValueError, AttributeError) as e:
        raise MalformedHeader(path, f"bad category table: {e}")


def load_frame(dump_root, frame_id: int, rig: SensorRig | None = None,
               category_table: dict | None = None) -> FrameDump:
    """Decode and validate one frame of a dump."""
    root = Path(dump_root)
    if rig is None:
        rig = load_rig(root)
    if category_table is None:
        category_table = load_categories(root)
    fdir = frames_dir(root) / str(frame_id)

    meta_path = fdir / "meta.json"
    m = _load_json(meta_path)
    try:
        meta = FrameMeta(
            frame_id=int(m["frame_id"]),
            timestamp=float(m["timestamp"]),
            ego_pose_world=_pose_from_json(m["ego_pose_world"], meta_path),
            weather_tag=str(m.get("weather_tag", "unspecified")),
            source=str(m.get("source", "sim")),
        )
    except (KeyError, ValueError, TypeError) as e:
        raise MalformedHeader(meta_path, f"bad meta: {e}")
    if meta.source not in SOURCES:
        raise InvariantViolation(meta_path, f"source must be one of {SOURCES}")
    if meta.frame_id != frame_id:
        raise InvariantViolation(meta_path, f"frame_id {meta.frame_id} != directory {frame_id}")

    rgb_path = fdir / "rgb.png"
    if not rgb_path.is_file():
        raise MissingFile(rgb_path)

    depth = read_depth(fdir / "depth.f32")
    k = rig.camera.intrinsics
    if (depth.width, depth.height) != (k.width, k.height):
        raise InvariantViolation(
            fdir / "depth.f32",
            f"depth {depth.width}x{depth.height} != intrinsics {k.width}x{k.height}",
        )
    seg = read_seg(fdir / "seg.png", category_table)
    if (seg.width, seg.height) != (k.width, k.height):
        raise InvariantViolation(
            fdir / "seg.png",
            f"seg {seg.width}x{seg.height} != intrinsics {k.width}x{k.height}",
        )
    lidar = read_lidar(fdir / "lidar.bin")

    objects_path = fdir / "objects.json"
    obj_list = _load_json(objects_path)
    if not isinstance(obj_list, list):
        raise MalformedHeader(objects_path, "objects.json must hold an array")
    objects = tuple(_object_from_json(o, objects_path) for o in obj_list)
    ids = [o.object_id for o in objects]
    if len(ids) != len(set(ids)):
        raise InvariantViolation(objects_path, "duplicate object_id")

    return FrameDump(meta, rgb_path, depth, seg, lidar, objects, rig)


def write_frame(dump_root, frame: FrameDump, rgb: np.ndarray | None = None) -> None:
    """Write one frame in the interchange layout; rig/categories written once."""
    root = Path(dump_root)
    root.mkdir(parents=True, exist_ok=True)
    rig_path = root / "rig.json"
    if not rig_path.exists():
        rig_path.write_text(json.dumps(_rig_to_json(frame.rig), indent=1))
    cat_path = root / "categories.json"
    if not cat_path.exists():
        cat_path.write_text(json.dumps({str(k): v for k, v in frame.seg.category_table.items()}))

    fdir = frames_dir(root) / str(frame.meta.frame_id)
    fdir.mkdir(parents=True, exist_ok=True)
    (fdir / "meta.json").write_text(json.dumps({
        "frame_id": frame.meta.frame_id,
        "timestamp": frame.meta.timestamp,
        "ego_pose_world": _pose_to_json(frame.meta.ego_pose_world),
        "weather_tag": frame.meta.weather_tag,
        "source": frame.meta.source,
    }, indent=1))
    if rgb is None:
        rgb = np.zeros((frame.depth.height, frame.depth.width, 3), dtype=np.uint8)
    Image.fromarray(rgb, mode="RGB").save(fdir / "rgb.png")
    write_depth(fdir / "depth.f32", frame.depth)
    Image.fromarray(frame.seg.data, mode="L").save(fdir / "seg.png")
    write_lidar(fdir / "lidar.bin", frame.lidar)
    (fdir / "objects.json").write_text(
        json.dumps([_object_to_json(o) for o in frame.objects], indent=1)
    )


def list_frame_ids(dump_root) -> list:
    fdir = frames_dir(dump_root)
    if not fdir.is_dir():
        return []
    ids = []
    for entry in fdir.iterdir():
        if entry.is_dir() and entry.name.isdigit():
            ids.append(int(entry.name))
    return sorted(ids)


@dataclass
class ValidationReport:
    frame_count: int = 0
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "frame_count": self.frame_count,
            "errors": self.errors,
            "warnings": self.warnings,
            "ok": self.ok,
        }


def validate_dump(dump_root) -> ValidationReport:
    """Non-destructive scan of a dump; every load error becomes a report entry."""
    root = Path(dump_root)
    report = ValidationReport()

    rig = None
    categories = None
    try:
        rig = load_rig(root)
    except MissingFile:
        report.errors.append({"file": str(root / "rig.json"), "kind": "MissingFile",
                              "message": "missing rig.json"})
    except (MalformedHeader, InvariantViolation) as e:
        report.errors.append({"file": e.path, "kind": type(e).__name__, "message": str(e)})
    try:
        categories = load_categories(root)
    except MissingFile:
        report.errors.append({"file": str(root / "categories.json"), "kind": "MissingFile",
                              "message": "missing categories.json"})
    except (MalformedHeader, InvariantViolation) as e:
        report.errors.append({"file": e.path, "kind": type(e).__name__, "message": str(e)})

    fdir = frames_dir(root)
    if fdir.is_dir():
        for entry in sorted(fdir.iterdir()):
            if entry.is_dir() and not entry.name.isdigit():
                report.warnings.append(f"non-numeric frame directory {entry.name!r}")

    frame_ids = list_frame_ids(root)
    if not frame_ids:
        report.warnings.append("dump contains no frames")
    if rig is None or categories is None:
        return report

    seen_ids = set()
    for fid in frame_ids:
        try:
            frame = load_frame(root, fid, rig=rig, category_table=categories)
        except MissingFile as e:
            report.errors.append({"file": e.path, "kind": "MissingFile", "message": str(e)})
            continue
        except (MalformedHeader, InvariantViolation) as e:
            report.errors.append({"file": e.path, "kind": type(e).__name__, "message": str(e)})
            continue
        report.frame_count += 1
        if frame.meta.frame_id in seen_ids:
            report.errors.append({"file": str(fdir / str(fid) / "meta.json"),
                                  "kind": "InvariantViolation",
                                  "message": f"duplicate frame_id {frame.meta.frame_id}"})
        seen_ids.add(frame.meta.frame_id)
        hint = rig.lidar.points_per_scan_hint
        n = len(frame.lidar.points)
        if hint and n > 3 * hint:
            report.warnings.append(f"frame {fid}: {n} lidar points, far above hint {hint}")
    return report
