"""Detection evaluation: greedy matching, accident-trace metrics, and the
staged-classifier cascade merge rule."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .geometry import Rect2, rect_iou


@dataclass(frozen=True)
class Detection:
    frame_id: int
    category: str
    rect: Rect2
    confidence: float
    stage: int = 0   # 1 = easy classifier; 0 = unstaged

    def to_dict(self) -> dict:
        return {
            "frame_id": self.frame_id,
            "category": self.category,
            "left": self.rect.left,
            "top": self.rect.top,
            "right": self.rect.right,
            "bottom": self.rect.bottom,
            "confidence": self.confidence,
            "stage": self.stage,
        }

    @staticmethod
    def from_dict(obj: dict) -> "Detection":
        return Detection(
            frame_id=int(obj["frame_id"]),
            category=obj["category"],
            rect=Rect2(float(obj["left"]), float(obj["top"]),
                       float(obj["right"]), float(obj["bottom"])),
            confidence=float(obj["confidence"]),
            stage=int(obj.get("stage", 0)),
        )


@dataclass(frozen=True)
class GtTrack:
    track_id: int
    category: str
    rects: dict   # frame_id -> Rect2

    def to_dict(self) -> dict:
        return {
            "track_id": self.track_id,
            "category": self.category,
            "frames": [
                {"frame_id": fid, "left": r.left, "top": r.top,
                 "right": r.right, "bottom": r.bottom}
                for fid, r in sorted(self.rects.items())
            ],
        }

    @staticmethod
    def from_dict(obj: dict) -> "GtTrack":
        return GtTrack(
            track_id=int(obj["track_id"]),
            category=obj["category"],
            rects={
                int(f["frame_id"]): Rect2(float(f["left"]), float(f["top"]),
                                          float(f["right"]), float(f["bottom"]))
                for f in obj["frames"]
            },
        )


@dataclass(frozen=True)
class EvalConfig:
    iou_threshold: float = 0.5
    merge_iou_threshold: float = 0.5

    def validate(self) -> "EvalConfig":
        for name in ("iou_threshold", "merge_iou_threshold"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        return self


@dataclass
class MatchResult:
    matches: list = field(default_factory=list)          # (det_index, gt_index)
    false_positive_dets: list = field(default_factory=list)
    missed_gts: list = field(default_factory=list)


def match_frame(gts, dets, cfg: EvalConfig = EvalConfig()) -> MatchResult:
    """Greedy confidence-ordered matching within one frame.

    ``gts`` is a sequence of (rect, category). Each detection, highest
    confidence first, claims the unmatched same-category ground truth with
    the highest IoU >= threshold; IoU ties go to the lower gt index.
    """
    result = MatchResult()
    taken = [False] * len(gts)
    order = sorted(range(len(dets)), key=lambda i: -dets[i].confidence)
    for di in order:
        det = dets[di]
        best_gi = -1
        best_iou = 0.0
        for gi, (rect, category) in enumerate(gts):
            if taken[gi] or category != det.category:
                continue
            iou = rect_iou(rect, det.rect)
            # strict > with index-order iteration breaks IoU ties toward the
            # lower gt index
            if iou >= cfg.iou_threshold and iou > best_iou:
                best_iou = iou
                best_gi = gi
        if best_gi >= 0:
            taken[best_gi] = True
            result.matches.append((di, best_gi))
        else:
            result.false_positive_dets.append(di)
    result.missed_gts = [gi for gi, t in enumerate(taken) if not t]
    return result


@dataclass(frozen=True)
class AccidentMetrics:
    first_detection_frame: int | None
    coverage_pct: float
    avg_consecutive_run: float

    def to_dict(self) -> dict:
        return {
            "first_detection_frame": self.first_detection_frame,
            "coverage_pct": self.coverage_pct,
            "avg_consecutive_run": self.avg_consecutive_run,
        }


def detection_trace(track: GtTrack, dets, cfg: EvalConfig = EvalConfig()) -> dict:
    """frame_id -> bool: whether the track was matched in that frame."""
    by_frame = {}
    for det in dets:
        by_frame.setdefault(det.frame_id, []).append(det)
    trace = {}
    for fid, rect in sorted(track.rects.items()):
        frame_dets = by_frame.get(fid, [])
        matched = match_frame([(rect, track.category)], frame_dets, cfg)
        trace[fid] = bool(matched.matches)
    return trace


def run_lengths(flags) -> list:
    """Lengths of maximal consecutive True runs."""
    runs = []
    current = 0
    for f in flags:
        if f:
            current += 1
        elif current:
            runs.append(current)
            current = 0
    if current:
        runs.append(current)
    return runs


def accident_metrics(track: GtTrack, dets, cfg: EvalConfig = EvalConfig()) -> AccidentMetrics:
    """First-detection frame, coverage percentage, and mean consecutive run."""
    trace = detection_trace(track, dets, cfg)
    frames = sorted(trace)
    flags = [trace[f] for f in frames]
    detected_frames = [f for f in frames if trace[f]]
    runs = run_lengths(flags)
    return AccidentMetrics(
        first_detection_frame=detected_frames[0] if detected_frames else None,
        coverage_pct=100.0 * len(detected_frames) / len(frames),
        avg_consecutive_run=sum(runs) / len(runs) if runs else 0.0,
    )


def cascade_merge(stages, cfg: EvalConfig = EvalConfig()) -> list:
    """Combine staged detections with earlier-stage priority.

    ``stages`` is an ordered sequence of detection lists, easiest stage
    first; the rule generalizes to any number of stages. A detection is
    discarded iff a kept detection from a strictly earlier stage has the same
    category and IoU >= the merge threshold. Output preserves (stage,
    input-order).
    """
    kept = []
    kept_earlier = []
    for stage_dets in stages:
        stage_kept = []
        for det in stage_dets:
            suppressed = any(
                prev.category == det.category
                and rect_iou(prev.rect, det.rect) >= cfg.merge_iou_threshold
                for prev in kept_earlier
            )
            if not suppressed:
                stage_kept.append(det)
        kept.extend(stage_kept)
        kept_earlier = list(kept)
    return kept


# ---------------------------------------------------------------------------
# JSONL IO and report rendering

def write_detections(dets, sink) -> None:
    for det in dets:
        sink.write(json.dumps(det.to_dict(), sort_keys=True) + "\n")


def read_detections(source) -> list:
    return [Detection.from_dict(json.loads(line)) for line in source if line.strip()]


def write_tracks(tracks, sink) -> None:
    for track in tracks:
        sink.write(json.dumps(track.to_dict(), sort_keys=True) + "\n")


def read_tracks(source) -> list:
    return [GtTrack.from_dict(json.loads(line)) for line in source if line.strip()]


def metrics_table(per_track: dict) -> str:
    """Plain-text table keyed by track id."""
    lines = [f"{'track':>6} {'category':>12} {'first':>6} {'coverage%':>10} {'avg_run':>8}"]
    for track_id in sorted(per_track):
        m = per_track[track_id]["metrics"]
        first = m.first_detection_frame if m.first_detection_frame is not None else "-"
        lines.append(
            f"{track_id:>6} {per_track[track_id]['category']:>12} {first!s:>6} "
            f"{m.coverage_pct:>10.1f} {m.avg_consecutive_run:>8.2f}"
        )
    return "\n".join(lines) + "\n"
