"""Difficulty binning and dataset split manifests.

Binning criteria per object: occlusion fraction and bounding-box pixel size;
per frame additionally the object count. A frame's bin is the hardest bin
among its graded objects and the count criterion.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .errors import EmptyPool

EASY = "easy"
MEDIUM = "medium"
HARD = "hard"
UNGRADED = "ungraded"

_HARDNESS = {EASY: 0, MEDIUM: 1, HARD: 2}

SIZE_METRIC_AREA = "area"
SIZE_METRIC_HEIGHT = "height"


@dataclass(frozen=True)
class ObjectStat:
    occlusion_fraction: float
    bbox_pixel_area: float
    bbox_pixel_height: float = 0.0


@dataclass
class SampleRecord:
    frame_ref: str            # "<dump_id>/<frame_id>"
    source: str               # sim | real | enhanced
    weather_tag: str
    objects: list = field(default_factory=list)   # ObjectStat
    frame_bin: str = UNGRADED

    @property
    def object_count(self) -> int:
        return len(self.objects)


def _occlusion_bin(fraction: float) -> str:
    if fraction < 0.20:
        return EASY
    if fraction <= 0.50:
        return MEDIUM
    return HARD


def _size_bin(value: float) -> str:
    # same threshold table for area (px^2) and the height reinterpretation
    if value > 400:
        return EASY
    if value >= 100:
        return MEDIUM
    if value >= 25:
        return HARD
    return UNGRADED


def _harder(a: str, b: str) -> str:
    return a if _HARDNESS[a] >= _HARDNESS[b] else b


def bin_object(occlusion_fraction: float, bbox_pixel_size: float) -> str:
    """Difficulty of one object; the harder of the two criterion bins.

    An object below the smallest size bin is ungraded and excluded from
    frame grading.
    """
    size = _size_bin(bbox_pixel_size)
    if size == UNGRADED:
        return UNGRADED
    return _harder(_occlusion_bin(occlusion_fraction), size)


def bin_frame(object_bins, object_count: int) -> str:
    """Frame difficulty: hardest of the count bin and all graded object bins."""
    graded = [b for b in object_bins if b != UNGRADED]
    if not graded:
        return UNGRADED
    if object_count < 3:
        count_bin = EASY
    elif object_count <= 6:
        count_bin = MEDIUM
    else:
        count_bin = HARD
    result = count_bin
    for b in graded:
        result = _harder(result, b)
    return result


def grade_record(record: SampleRecord, size_metric: str = SIZE_METRIC_AREA) -> SampleRecord:
    """Fill in frame_bin from the record's per-object stats."""
    bins = []
    for obj in record.objects:
        size = obj.bbox_pixel_area if size_metric == SIZE_METRIC_AREA else obj.bbox_pixel_height
        bins.append(bin_object(obj.occlusion_fraction, size))
    record.frame_bin = bin_frame(bins, record.object_count)
    return record


@dataclass
class SplitManifest:
    name: str
    seed: int
    role: str                 # train | validation
    entries: list = field(default_factory=list)   # SampleRecord


def build_strv_split(sim_pool, real_pool, sim_cap_ratio=None, seed: int = 0):
    """Simulated-training / real-validation arrangement.

    Simulated (and enhanced) records form the training manifest, real records
    the validation manifest. ``sim_cap_ratio`` caps the training set to a
    seeded uniform subsample of floor(ratio * len(sim_pool)) records.
    """
    sim_pool = list(sim_pool)
    real_pool = list(real_pool)
    if not sim_pool or not real_pool:
        raise EmptyPool("both the simulated and the real pool must be non-empty")

    train_entries = [r for r in sim_pool if r.source in ("sim", "enhanced")]
    val_entries = [r for r in real_pool if r.source == "real"]

    if sim_cap_ratio is not None:
        k = int(sim_cap_ratio * len(sim_pool))
        rng = random.Random(seed)
        keep = sorted(rng.sample(range(len(train_entries)), min(k, len(train_entries))))
        train_entries = [train_entries[i] for i in keep]

    return (
        SplitManifest(name="strv_train", seed=seed, role="train", entries=train_entries),
        SplitManifest(name="strv_validation", seed=seed, role="validation", entries=val_entries),
    )


def build_staged_splits(pool, seed: int = 0) -> dict:
    """Easy/medium/hard manifests; ungraded frames are dropped."""
    manifests = {
        b: SplitManifest(name=f"staged_{b}", seed=seed, role="train") for b in (EASY, MEDIUM, HARD)
    }
    for record in pool:
        if record.frame_bin in manifests:
            manifests[record.frame_bin].entries.append(record)
    return manifests


# ---------------------------------------------------------------------------
# JSONL / JSON serialization

def record_to_dict(record: SampleRecord) -> dict:
    return {
        "frame_ref": record.frame_ref,
        "source": record.source,
        "weather_tag": record.weather_tag,
        "frame_bin": record.frame_bin,
        "objects": [
            {
                "occlusion_fraction": o.occlusion_fraction,
                "bbox_pixel_area": o.bbox_pixel_area,
                "bbox_pixel_height": o.bbox_pixel_height,
            }
            for o in record.objects
        ],
    }


def record_from_dict(obj: dict) -> SampleRecord:
    return SampleRecord(
        frame_ref=obj["frame_ref"],
        source=obj["source"],
        weather_tag=obj.get("weather_tag", "unspecified"),
        objects=[
            ObjectStat(
                occlusion_fraction=float(o["occlusion_fraction"]),
                bbox_pixel_area=float(o["bbox_pixel_area"]),
                bbox_pixel_height=float(o.get("bbox_pixel_height", 0.0)),
            )
            for o in obj.get("objects", [])
        ],
        frame_bin=obj.get("frame_bin", UNGRADED),
    )


def write_records(records, sink) -> None:
    for record in records:
        sink.write(json.dumps(record_to_dict(record), sort_keys=True) + "\n")


def read_records(source) -> list:
    records = []
    for line in source:
        line = line.strip()
        if line:
            records.append(record_from_dict(json.loads(line)))
    return records


def manifest_lines(manifest: SplitManifest) -> str:
    out = []
    for record in manifest.entries:
        out.append(json.dumps({
            "frame_ref": record.frame_ref,
            "source": record.source,
            "weather_tag": record.weather_tag,
            "frame_bin": record.frame_bin,
        }, sort_keys=True))
    return "".join(line + "\n" for line in out)


def pool_summary(records) -> dict:
    """Counts per bin, source, and weather tag."""
    records = list(records)
    by_bin, by_source, by_weather = {}, {}, {}
    for r in records:
        by_bin[r.frame_bin] = by_bin.get(r.frame_bin, 0) + 1
        by_source[r.source] = by_source.get(r.source, 0) + 1
        by_weather[r.weather_tag] = by_weather.get(r.weather_tag, 0) + 1
    return {
        "frames": len(records),
        "by_bin": by_bin,
        "by_source": by_source,
        "by_weather": by_weather,
    }
