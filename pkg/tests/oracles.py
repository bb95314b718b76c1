"""Independent brute-force oracles used by the unit and acceptance tests.

These deliberately avoid the library's own code paths: poses are handled as
4x4 homogeneous matrices, IoU by pixel-grid counting, merging by a direct
O(n^2) scan.
"""

import numpy as np


def pose_to_matrix(rotation, translation):
    m = np.eye(4)
    m[:3, :3] = rotation
    m[:3, 3] = translation
    return m


def project_homogeneous(point_world, cam_rotation, cam_translation, fx, fy, cx, cy,
                        near=0.1):
    """Pinhole projection via explicit 4x4 matrix inversion."""
    world_from_cam = pose_to_matrix(cam_rotation, cam_translation)
    cam_from_world = np.linalg.inv(world_from_cam)
    p = cam_from_world @ np.array([*point_world, 1.0])
    z = p[2]
    if z <= near:
        return None
    kmat = np.array([[fx, 0.0, cx], [0.0, fy, cy], [0.0, 0.0, 1.0]])
    uvw = kmat @ p[:3]
    return (uvw[0] / uvw[2], uvw[1] / uvw[2], z)


def point_in_box_homogeneous(point, center, extent, yaw):
    """Containment via an explicit box-to-world matrix inverse."""
    c, s = np.cos(yaw), np.sin(yaw)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    world_from_box = pose_to_matrix(rot, np.asarray(center, dtype=float))
    local = np.linalg.inv(world_from_box) @ np.array([*point, 1.0])
    return bool(np.all(np.abs(local[:3]) <= np.asarray(extent) + 0.0))


def iou_grid_count(a, b, cell=1):
    """IoU of integer-aligned rects (left, top, right, bottom) by counting cells."""
    def cells(r):
        out = set()
        for x in range(int(r[0]), int(r[2]), cell):
            for y in range(int(r[1]), int(r[3]), cell):
                out.add((x, y))
        return out

    ca, cb = cells(a), cells(b)
    union = len(ca | cb)
    if union == 0:
        return 0.0
    return len(ca & cb) / union


def greedy_match_oracle(gt_rects, gt_categories, dets, iou_fn, threshold):
    """Direct O(n^2) restatement of greedy confidence-ordered matching."""
    order = sorted(range(len(dets)), key=lambda i: -dets[i].confidence)
    taken = set()
    matches = []
    for di in order:
        candidates = []
        for gi in range(len(gt_rects)):
            if gi in taken or gt_categories[gi] != dets[di].category:
                continue
            iou = iou_fn(gt_rects[gi], dets[di].rect)
            if iou >= threshold:
                candidates.append((-iou, gi))
        if candidates:
            candidates.sort()
            gi = candidates[0][1]
            taken.add(gi)
            matches.append((di, gi))
    return matches


def cascade_merge_oracle(stages, iou_fn, threshold):
    """O(n^2) restatement of the earlier-stage-priority merge rule."""
    kept_by_stage = []
    for si, stage in enumerate(stages):
        stage_kept = []
        earlier = [d for block in kept_by_stage for d in block]
        for det in stage:
            dropped = False
            for prev in earlier:
                if prev.category == det.category and iou_fn(prev.rect, det.rect) >= threshold:
                    dropped = True
                    break
            if not dropped:
                stage_kept.append(det)
        kept_by_stage.append(stage_kept)
    return [d for block in kept_by_stage for d in block]


def run_length_oracle(flags):
    """Enumerate maximal consecutive True runs by scanning every start index."""
    runs = []
    i = 0
    n = len(flags)
    while i < n:
        if flags[i]:
            j = i
            while j < n and flags[j]:
                j += 1
            runs.append(j - i)
            i = j
        else:
            i += 1
    return runs


def occlusion_fraction_oracle(center, extent, yaw, cam_rotation, cam_translation,
                              fx, fy, cx, cy, width, height, occluders,
                              samples_per_axis=5, tol=0.15, near=0.1):
    """Covered fraction of camera-facing face samples, from first principles.

    ``occluders`` is a list of (left, top, right, bottom, depth) pixel rects
    rendered into the scene in front of the background. Projection goes
    through the homogeneous-matrix path; coverage is tested directly against
    the occluder rects instead of a depth image.
    """
    c, s = np.cos(yaw), np.sin(yaw)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    center = np.asarray(center, dtype=float)
    extent = np.asarray(extent, dtype=float)
    cam_origin = np.asarray(cam_translation, dtype=float)

    n = samples_per_axis
    grid = [(2.0 * i + 1.0) / n - 1.0 for i in range(n)]
    total_in_image = 0
    covered = 0
    for axis in range(3):
        for sign in (-1.0, 1.0):
            normal = sign * rot[:, axis]
            face_center = center + normal * extent[axis]
            if normal @ (face_center - cam_origin) >= 0.0:
                continue
            u_ax, v_ax = [a for a in range(3) if a != axis]
            for gu in grid:
                for gv in grid:
                    p = face_center + gu * rot[:, u_ax] * extent[u_ax] \
                        + gv * rot[:, v_ax] * extent[v_ax]
                    proj = project_homogeneous(p, cam_rotation, cam_translation,
                                               fx, fy, cx, cy, near=near)
                    if proj is None:
                        continue
                    u, v, z = proj
                    iu = int(np.floor(u + 0.5)) if u >= 0 else -1
                    iv = int(np.floor(v + 0.5)) if v >= 0 else -1
                    if not (0 <= iu < width and 0 <= iv < height):
                        continue
                    total_in_image += 1
                    for (ol, ot, orr, ob, od) in occluders:
                        if ol <= iu < orr and ot <= iv < ob and od < z - tol:
                            covered += 1
                            break
    if total_in_image == 0:
        return 1.0
    return covered / total_in_image
