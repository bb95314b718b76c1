"""Command-line entry point.

Exit codes: 0 success, 1 fatal input error, 2 invariant violation. Set
SYNTHKIT_LOG=debug|info|warning for verbosity. Every command writes a
machine-readable JSON report next to its human-readable output.
"""

from __future__ import annotations

import io
import json
import logging
import multiprocessing
import os
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import annotator, curator, evalharness, frame_model, scenariogen
from .errors import (
    EmptyPool,
    InvariantViolation,
    MalformedHeader,
    MissingFile,
    RangeError,
    SynthkitError,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INVARIANT = 2

log = logging.getLogger("synthkit")


def _setup_logging():
    level = os.environ.get("SYNTHKIT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def load_config(path) -> dict:
    """Simple `key = value` config file; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.ClickException(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


_ANNOTATION_KEYS = {
    "radius_m": float,
    "min_visible_vertices": int,
    "min_pixel_height": float,
    "vertex_neighborhood": int,
    "depth_tolerance_m": float,
    "face_samples_per_axis": int,
}


def _annotation_config(config_path) -> annotator.AnnotationConfig:
    cfg = annotator.AnnotationConfig()
    if config_path:
        values = load_config(config_path)
        overrides = {}
        for key, cast in _ANNOTATION_KEYS.items():
            if key in values:
                overrides[key] = cast(values[key])
        if "categories" in values:
            overrides["categories"] = tuple(
                c.strip() for c in values["categories"].split(",") if c.strip()
            )
        cfg = replace(cfg, **overrides)
    return cfg


def _eval_config(config_path) -> evalharness.EvalConfig:
    cfg = evalharness.EvalConfig()
    if config_path:
        values = load_config(config_path)
        overrides = {}
        for key in ("iou_threshold", "merge_iou_threshold"):
            if key in values:
                overrides[key] = float(values[key])
        cfg = replace(cfg, **overrides)
    return cfg.validate()


@click.group()
def main():
    """Simulator-to-KITTI dataset toolkit."""
    _setup_logging()


# ---------------------------------------------------------------------------
# annotate

def _annotate_one(args):
    dump_root, frame_id, cfg = args
    frame = frame_model.load_frame(dump_root, frame_id)
    result = annotator.annotate_frame_detailed(frame, cfg)
    lidar = annotator.annotate_lidar(frame, cfg)
    records = [
        curator.ObjectStat(
            occlusion_fraction=a.report.occlusion_fraction,
            bbox_pixel_area=a.report.clipped_rect.area(),
            bbox_pixel_height=a.report.pixel_height,
        )
        for a in result.annotated
    ]
    record = curator.SampleRecord(
        frame_ref=f"{Path(dump_root).name}/{frame_id}",
        source=frame.meta.source,
        weather_tag=frame.meta.weather_tag,
        objects=records,
    )
    return frame_id, annotator.kitti_text(result.labels), lidar, result.rejects, record


@main.command()
@click.argument("dump_root", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--workers", default=1, show_default=True)
def annotate(dump_root, out_dir, config_path, workers):
    """Generate KITTI labels and lidar ground truth for every frame."""
    cfg = _annotation_config(config_path)
    frame_ids = frame_model.list_frame_ids(dump_root)
    if not frame_ids:
        click.echo("no frames in dump", err=True)
        sys.exit(EXIT_INPUT)

    out = Path(out_dir)
    (out / "labels").mkdir(parents=True, exist_ok=True)
    (out / "lidar_gt").mkdir(parents=True, exist_ok=True)

    tasks = [(dump_root, fid, cfg) for fid in frame_ids]
    try:
        if workers > 1:
            with multiprocessing.Pool(workers) as pool:
                results = pool.map(_annotate_one, tasks)
        else:
            results = [_annotate_one(t) for t in tasks]
    except (MissingFile, MalformedHeader) as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_INPUT)
    except InvariantViolation as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_INVARIANT)

    results.sort(key=lambda r: r[0])
    total_labels = 0
    rejects = {}
    records = []
    for frame_id, text, lidar, frame_rejects, record in results:
        (out / "labels" / f"{frame_id}.txt").write_text(text)
        (out / "lidar_gt" / f"{frame_id}.json").write_text(
            json.dumps([r.to_dict() for r in lidar], indent=1)
        )
        total_labels += text.count("\n")
        for reason, count in frame_rejects.items():
            rejects[reason] = rejects.get(reason, 0) + count
        records.append(record)

    with open(out / "records.jsonl", "w") as sink:
        curator.write_records(records, sink)
    summary = {
        "frames": len(frame_ids),
        "labels": total_labels,
        "rejects": rejects,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True))
    click.echo(json.dumps(summary, sort_keys=True))


# ---------------------------------------------------------------------------
# validate

@main.command()
@click.argument("dump_root", type=click.Path(exists=True, file_okay=False))
@click.option("--report", "report_path", type=click.Path(dir_okay=False))
def validate(dump_root, report_path):
    """Check every invariant of an interchange dump."""
    report = frame_model.validate_dump(dump_root)
    payload = json.dumps(report.to_dict(), indent=1, sort_keys=True)
    if report_path:
        Path(report_path).write_text(payload)
    click.echo(payload)
    if report.ok:
        sys.exit(EXIT_OK)
    if any(e["kind"] == "InvariantViolation" for e in report.errors):
        sys.exit(EXIT_INVARIANT)
    sys.exit(EXIT_INPUT)


# ---------------------------------------------------------------------------
# curate

@main.group()
def curate():
    """Difficulty binning and dataset split manifests."""


@curate.command("bin")
@click.argument("records_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--size-metric", type=click.Choice(["area", "height"]), default="area",
              show_default=True, help="interpret the size thresholds as bbox area or height")
@click.option("--summary", "summary_path", type=click.Path(dir_okay=False))
def curate_bin(records_path, out_path, size_metric, summary_path):
    """Grade sample records into easy/medium/hard bins."""
    with open(records_path) as source:
        records = curator.read_records(source)
    for record in records:
        curator.grade_record(record, size_metric=size_metric)
    with open(out_path, "w") as sink:
        curator.write_records(records, sink)
    summary = curator.pool_summary(records)
    if summary_path:
        Path(summary_path).write_text(json.dumps(summary, indent=1, sort_keys=True))
    click.echo(json.dumps(summary, sort_keys=True))


def _read_records(path):
    with open(path) as source:
        return curator.read_records(source)


@curate.command("split-strv")
@click.option("--sim", "sim_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--real", "real_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--sim-cap-ratio", type=float, default=None)
@click.option("--seed", default=0, show_default=True)
def curate_split_strv(sim_path, real_path, out_dir, sim_cap_ratio, seed):
    """Simulated-training / real-validation manifests."""
    try:
        train, val = curator.build_strv_split(
            _read_records(sim_path), _read_records(real_path),
            sim_cap_ratio=sim_cap_ratio, seed=seed,
        )
    except EmptyPool as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_INPUT)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "train.jsonl").write_text(curator.manifest_lines(train))
    (out / "validation.jsonl").write_text(curator.manifest_lines(val))
    click.echo(json.dumps({"train": len(train.entries), "validation": len(val.entries)}))


@curate.command("split-staged")
@click.argument("records_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=0, show_default=True)
def curate_split_staged(records_path, out_dir, seed):
    """Easy/medium/hard staged manifests from graded records."""
    manifests = curator.build_staged_splits(_read_records(records_path), seed=seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    counts = {}
    for name, manifest in manifests.items():
        (out / f"{name}.jsonl").write_text(curator.manifest_lines(manifest))
        counts[name] = len(manifest.entries)
    click.echo(json.dumps(counts, sort_keys=True))


# ---------------------------------------------------------------------------
# scenario

@main.group()
def scenario():
    """Weather and accident scenario manifests."""


@scenario.command("presets")
@click.option("--out", "out_path", type=click.Path(dir_okay=False))
def scenario_presets(out_path):
    """Emit the six named weather presets."""
    specs = [spec.to_dict() for spec in scenariogen.weather_presets()]
    payload = json.dumps(specs, indent=1, sort_keys=True)
    if out_path:
        Path(out_path).write_text(payload)
    click.echo(payload)


@scenario.command("sweep")
@click.option("--axis", "axes", multiple=True,
              help="name=v1,v2,... ; repeatable, one per weather parameter")
@click.option("--out", "out_path", type=click.Path(dir_okay=False))
def scenario_sweep(axes, out_path):
    """Cartesian product of weather parameter axes."""
    parsed = {}
    for axis in axes:
        if "=" not in axis:
            raise click.ClickException(f"bad axis {axis!r}, expected name=v1,v2,...")
        name, values = axis.split("=", 1)
        parsed[name.strip()] = [float(v) for v in values.split(",") if v.strip()]
    try:
        specs = scenariogen.weather_sweep(parsed)
    except RangeError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_INPUT)
    payload = json.dumps([s.to_dict() for s in specs], indent=1, sort_keys=True)
    if out_path:
        Path(out_path).write_text(payload)
    click.echo(payload)


@scenario.command("accident")
@click.argument("template", type=click.Choice(list(scenariogen.ACCIDENT_TEMPLATES)))
@click.option("--param", "params", multiple=True, help="name=value; repeatable")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False))
def scenario_accident(template, params, seed, out_path):
    """Instantiate an accident scenario script."""
    parsed = {}
    for param in params:
        if "=" not in param:
            raise click.ClickException(f"bad param {param!r}, expected name=value")
        name, value = param.split("=", 1)
        try:
            parsed[name.strip()] = float(value)
        except ValueError:
            parsed[name.strip()] = value.strip()
    try:
        script = scenariogen.make_accident(template, parsed, seed=seed)
    except RangeError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_INPUT)
    payload = script.to_json()
    if out_path:
        Path(out_path).write_text(payload)
    click.echo(payload)


# ---------------------------------------------------------------------------
# eval

@main.group("eval")
def eval_group():
    """Detection-trace metrics and cascade merging."""


@eval_group.command("metrics")
@click.option("--tracks", "tracks_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--detections", "dets_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False))
def eval_metrics(tracks_path, dets_path, config_path, out_path):
    """Accident metrics for every ground-truth track."""
    cfg = _eval_config(config_path)
    with open(tracks_path) as source:
        tracks = evalharness.read_tracks(source)
    with open(dets_path) as source:
        dets = evalharness.read_detections(source)
    per_track = {}
    report = {}
    for track in sorted(tracks, key=lambda t: t.track_id):
        metrics = evalharness.accident_metrics(track, dets, cfg)
        per_track[track.track_id] = {"category": track.category, "metrics": metrics}
        report[str(track.track_id)] = {"category": track.category, **metrics.to_dict()}
    payload = json.dumps(report, indent=1, sort_keys=True)
    if out_path:
        Path(out_path).write_text(payload)
    click.echo(evalharness.metrics_table(per_track))
    click.echo(payload)


@eval_group.command("merge")
@click.argument("stage_files", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def eval_merge(stage_files, config_path, out_path):
    """Merge staged detection files, earliest (easiest) stage first."""
    cfg = _eval_config(config_path)
    stages = []
    for path in stage_files:
        with open(path) as source:
            stages.append(evalharness.read_detections(source))
    merged = evalharness.cascade_merge(stages, cfg)
    buf = io.StringIO()
    evalharness.write_detections(merged, buf)
    Path(out_path).write_text(buf.getvalue())
    click.echo(json.dumps({"stages": len(stages), "kept": len(merged)}))


if __name__ == "__main__":
    main()
