"""KITTI label generation from captured frames.

Pipeline per frame: select nearby candidate objects, project their box
vertices, depth-test visibility against the frame's depth map, and emit a
KITTI label row for every object that clears the visibility filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateProjection, ParseError
from .frame_model import DepthMap, FrameDump, ObjectState
from .geometry import (
    NEAR_PLANE,
    OrientedBox3,
    Pose,
    Rect2,
    box_vertices,
    compose,
    points_in_oriented_box,
    project_points,
    rect_intersection,
    wrap_angle,
)

DEFAULT_CATEGORIES = ("Car", "Pedestrian")


@dataclass(frozen=True)
class AnnotationConfig:
    radius_m: float = 120.0
    min_visible_vertices: int = 3
    min_pixel_height: float = 25.0
    vertex_neighborhood: int = 3  # odd window side length, pixels
    depth_tolerance_m: float = 0.15
    face_samples_per_axis: int = 5
    categories: tuple = DEFAULT_CATEGORIES


@dataclass(frozen=True)
class VisibilityReport:
    visible_vertex_count: int
    occlusion_fraction: float
    projected_rect: Rect2 | None
    clipped_rect: Rect2 | None
    pixel_height: float


@dataclass(frozen=True)
class KittiLabel:
    type: str
    truncated: float
    occluded: int
    alpha: float
    bbox: Rect2
    dimensions: tuple  # (height, width, length) meters
    location: tuple    # (x, y, z) camera frame, bottom-center of the 3D box
    rotation_y: float


@dataclass(frozen=True)
class LidarObjectRecord:
    object_id: int
    category: str
    location: tuple    # world frame box center
    forward_yaw: float
    point_count: int

    def to_dict(self) -> dict:
        return {
            "object_id": self.object_id,
            "category": self.category,
            "location": list(self.location),
            "forward_yaw": self.forward_yaw,
            "point_count": self.point_count,
        }


def camera_pose_world(frame: FrameDump) -> Pose:
    return compose(frame.meta.ego_pose_world, frame.rig.camera.pose_in_ego)


def lidar_pose_world(frame: FrameDump) -> Pose:
    return compose(frame.meta.ego_pose_world, frame.rig.lidar.pose_in_ego)


def select_candidates(frame: FrameDump, cfg: AnnotationConfig) -> list:
    """Objects of an annotated category within the capture radius of the camera.

    The ego vehicle is recognized (and skipped) as the object whose box
    contains the camera origin.
    """
    cam_origin = camera_pose_world(frame).translation
    out = []
    for obj in frame.objects:
        if obj.category not in cfg.categories:
            continue
        if np.linalg.norm(obj.box.center - cam_origin) > cfg.radius_m:
            continue
        local = obj.box.rotation().T @ (cam_origin - obj.box.center)
        if np.all(np.abs(local) <= obj.box.extent):
            continue
        out.append(obj)
    return out


_EDGE_PAIRS = [(i, i | bit) for bit in (1, 2, 4) for i in range(8) if not i & bit]

# Box faces as (axis, sign); span axes are the two remaining ones.
_FACES = [(a, s) for a in range(3) for s in (-1.0, 1.0)]


def _round_px(x: np.ndarray) -> np.ndarray:
    # round half away from zero; projections are near-positive in-image anyway
    return np.where(x >= 0, np.floor(x + 0.5), -np.floor(-x + 0.5)).astype(np.int64)


def _projected_hull(verts_cam: np.ndarray, k) -> Rect2 | None:
    """Hull of box corners after clipping the 12 box edges to the near plane."""
    pts = []
    z = verts_cam[:, 2]
    front = z > NEAR_PLANE
    pts.extend(verts_cam[front])
    for i, j in _EDGE_PAIRS:
        if front[i] == front[j]:
            continue
        a, b = verts_cam[i], verts_cam[j]
        t = (NEAR_PLANE - a[2]) / (b[2] - a[2])
        pts.append(a + t * (b - a))
    if not pts:
        return None
    p = np.asarray(pts)
    u = k.fx * p[:, 0] / p[:, 2] + k.cx
    v = k.fy * p[:, 1] / p[:, 2] + k.cy
    left, right = float(u.min()), float(u.max())
    top, bottom = float(v.min()), float(v.max())
    if left >= right or top >= bottom:
        return None
    return Rect2(left, top, right, bottom)


def assess_visibility(obj: ObjectState, frame: FrameDump, cfg: AnnotationConfig) -> VisibilityReport:
    """Vertex visibility, occlusion fraction, and projected rectangles.

    A projected vertex counts as visible when any pixel of its neighborhood
    window carries a depth no closer than the vertex depth minus the
    tolerance. The occlusion fraction is measured over a sample grid on each
    camera-facing box face with a single-pixel depth test.
    """
    k = frame.rig.camera.intrinsics
    cam_pose = camera_pose_world(frame)
    depth = frame.depth
    tol = cfg.depth_tolerance_m

    verts = box_vertices(obj.box)
    uv, z, in_front = project_points(verts, cam_pose, k)
    half = cfg.vertex_neighborhood // 2

    visible = 0
    for i in range(8):
        if not in_front[i]:
            continue
        iu = int(math.floor(uv[i, 0] + 0.5)) if uv[i, 0] >= 0 else -1
        iv = int(math.floor(uv[i, 1] + 0.5)) if uv[i, 1] >= 0 else -1
        if not (0 <= iu < k.width and 0 <= iv < k.height):
            continue
        window = depth.data[max(0, iv - half):iv + half + 1, max(0, iu - half):iu + half + 1]
        if window.size and float(window.max()) >= z[i] - tol:
            visible += 1

    # Occlusion fraction over camera-facing faces.
    n = cfg.face_samples_per_axis
    g = (2.0 * np.arange(n) + 1.0) / n - 1.0  # cell centers in (-1, 1)
    rot = obj.box.rotation()
    cam_origin = cam_pose.translation
    sample_blocks = []
    for axis, sign in _FACES:
        normal = sign * rot[:, axis]
        face_center = obj.box.center + normal * obj.box.extent[axis]
        if float(normal @ (face_center - cam_origin)) >= 0.0:
            continue
        u_ax, v_ax = [a for a in range(3) if a != axis]
        du = rot[:, u_ax] * obj.box.extent[u_ax]
        dv = rot[:, v_ax] * obj.box.extent[v_ax]
        grid = face_center + np.repeat(g, n).reshape(-1, 1) * du \
            + np.tile(g, n).reshape(-1, 1) * dv
        sample_blocks.append(grid)

    total_in_image = 0
    occluded = 0
    if sample_blocks:
        samples = np.concatenate(sample_blocks, axis=0)
        suv, sz, sfront = project_points(samples, cam_pose, k)
        if np.any(sfront):
            iu = _round_px(np.where(sfront, suv[:, 0], -1.0))
            iv = _round_px(np.where(sfront, suv[:, 1], -1.0))
            in_img = sfront & (iu >= 0) & (iu < k.width) & (iv >= 0) & (iv < k.height)
            total_in_image = int(in_img.sum())
            if total_in_image:
                d = depth.data[iv[in_img], iu[in_img]]
                occluded = int(np.sum(d < sz[in_img] - tol))
    occlusion_fraction = occluded / total_in_image if total_in_image else 1.0

    verts_cam = (verts - cam_pose.translation) @ cam_pose.rotation
    projected = _projected_hull(verts_cam, k)
    clipped = None
    if projected is not None:
        clipped = rect_intersection(projected, Rect2(0.0, 0.0, float(k.width), float(k.height)))
    pixel_height = clipped.height() if clipped is not None else 0.0

    return VisibilityReport(
        visible_vertex_count=visible,
        occlusion_fraction=occlusion_fraction,
        projected_rect=projected,
        clipped_rect=clipped,
        pixel_height=pixel_height,
    )


def occluded_level(occlusion_fraction: float, depth_available: bool = True) -> int:
    if not depth_available:
        return 3
    if occlusion_fraction < 0.20:
        return 0
    if occlusion_fraction <= 0.50:
        return 1
    return 2


def compute_label(obj: ObjectState, report: VisibilityReport, frame: FrameDump) -> KittiLabel:
    if report.projected_rect is None or report.projected_rect.area() <= 0.0 \
            or report.clipped_rect is None:
        raise DegenerateProjection(f"object {obj.object_id} projects to zero area")

    cam_pose = camera_pose_world(frame)
    r_cw = cam_pose.rotation.T

    ex, ey, ez = (float(v) for v in obj.box.extent)
    bottom_center_world = obj.box.center - np.array([0.0, 0.0, ez])
    loc = r_cw @ (bottom_center_world - cam_pose.translation)

    heading_world = np.array([math.cos(obj.forward_yaw), math.sin(obj.forward_yaw), 0.0])
    f = r_cw @ heading_world
    rotation_y = wrap_angle(math.atan2(-f[2], f[0]))
    alpha = wrap_angle(rotation_y - math.atan2(loc[0], loc[2]))

    truncated = 1.0 - report.clipped_rect.area() / report.projected_rect.area()
    truncated = min(1.0, max(0.0, truncated))

    return KittiLabel(
        type=obj.category,
        truncated=truncated,
        occluded=occluded_level(report.occlusion_fraction),
        alpha=alpha,
        bbox=report.clipped_rect,
        dimensions=(2.0 * ez, 2.0 * ey, 2.0 * ex),
        location=(float(loc[0]), float(loc[1]), float(loc[2])),
        rotation_y=rotation_y,
    )


@dataclass(frozen=True)
class AnnotatedObject:
    state: ObjectState
    report: VisibilityReport
    label: KittiLabel


@dataclass
class FrameAnnotation:
    labels: list = field(default_factory=list)        # KittiLabel, object_id order
    annotated: list = field(default_factory=list)     # AnnotatedObject, same order
    rejects: dict = field(default_factory=dict)       # reason -> count


REJECT_WRONG_CATEGORY = "wrong_category"
REJECT_OUT_OF_RADIUS = "out_of_radius"
REJECT_TOO_FEW_VERTICES = "too_few_visible_vertices"
REJECT_TOO_SHORT = "too_short"


def annotate_frame_detailed(frame: FrameDump, cfg: AnnotationConfig = AnnotationConfig()) -> FrameAnnotation:
    """Full annotation pass with per-reason rejection counts."""
    out = FrameAnnotation()
    cam_origin = camera_pose_world(frame).translation
    rejects = {REJECT_WRONG_CATEGORY: 0, REJECT_OUT_OF_RADIUS: 0,
               REJECT_TOO_FEW_VERTICES: 0, REJECT_TOO_SHORT: 0}

    candidates = []
    for obj in frame.objects:
        local = obj.box.rotation().T @ (cam_origin - obj.box.center)
        if np.all(np.abs(local) <= obj.box.extent):
            continue  # ego vehicle
        if obj.category not in cfg.categories:
            rejects[REJECT_WRONG_CATEGORY] += 1
            continue
        if np.linalg.norm(obj.box.center - cam_origin) > cfg.radius_m:
            rejects[REJECT_OUT_OF_RADIUS] += 1
            continue
        candidates.append(obj)

    for obj in sorted(candidates, key=lambda o: o.object_id):
        report = assess_visibility(obj, frame, cfg)
        if report.visible_vertex_count < cfg.min_visible_vertices:
            rejects[REJECT_TOO_FEW_VERTICES] += 1
            continue
        if not report.pixel_height > cfg.min_pixel_height:
            rejects[REJECT_TOO_SHORT] += 1
            continue
        label = compute_label(obj, report, frame)
        out.labels.append(label)
        out.annotated.append(AnnotatedObject(obj, report, label))
    out.rejects = rejects
    return out


def annotate_frame(frame: FrameDump, cfg: AnnotationConfig = AnnotationConfig()) -> list:
    return annotate_frame_detailed(frame, cfg).labels


def annotate_lidar(frame: FrameDump, cfg: AnnotationConfig = AnnotationConfig()) -> list:
    """Per-candidate lidar hit counts; zero-hit objects stay in the output."""
    pose = lidar_pose_world(frame)
    pts = frame.lidar.points
    world = pose.apply_many(pts[:, :3]) if len(pts) else np.zeros((0, 3))
    records = []
    for obj in sorted(select_candidates(frame, cfg), key=lambda o: o.object_id):
        count = int(points_in_oriented_box(world, obj.box).sum()) if len(world) else 0
        records.append(LidarObjectRecord(
            object_id=obj.object_id,
            category=obj.category,
            location=tuple(float(v) for v in obj.box.center),
            forward_yaw=float(obj.forward_yaw),
            point_count=count,
        ))
    return records


# ---------------------------------------------------------------------------
# KITTI text codec (Table-1 field order, 2-decimal floats)

def format_kitti_line(label: KittiLabel) -> str:
    b = label.bbox
    h, w, l = label.dimensions
    x, y, z = label.location
    return (
        f"{label.type} {label.truncated:.2f} {label.occluded:d} {label.alpha:.2f} "
        f"{b.left:.2f} {b.top:.2f} {b.right:.2f} {b.bottom:.2f} "
        f"{h:.2f} {w:.2f} {l:.2f} {x:.2f} {y:.2f} {z:.2f} {label.rotation_y:.2f}"
    )


def write_kitti(labels, sink) -> None:
    """Write labels to a file-like sink, one 15-token line per label."""
    for label in labels:
        sink.write(format_kitti_line(label) + "\n")


def kitti_text(labels) -> str:
    return "".join(format_kitti_line(label) + "\n" for label in labels)


def parse_kitti(text: str) -> list:
    labels = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != 15:
            raise ParseError(lineno, len(tokens), f"expected 15 tokens, got {len(tokens)}")
        values = []
        for idx in range(1, 15):
            try:
                values.append(int(tokens[idx]) if idx == 2 else float(tokens[idx]))
            except ValueError:
                raise ParseError(lineno, idx, f"bad number {tokens[idx]!r}")
        labels.append(KittiLabel(
            type=tokens[0],
            truncated=values[0],
            occluded=values[1],
            alpha=values[2],
            bbox=Rect2(values[3], values[4], values[5], values[6]),
            dimensions=(values[7], values[8], values[9]),
            location=(values[10], values[11], values[12]),
            rotation_y=values[13],
        ))
    return labels
