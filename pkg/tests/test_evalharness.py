import io
import random

import pytest

from synthkit.evalharness import (
    Detection,
    EvalConfig,
    GtTrack,
    accident_metrics,
    cascade_merge,
    match_frame,
    read_detections,
    read_tracks,
    run_lengths,
    write_detections,
    write_tracks,
)
from synthkit.geometry import Rect2, rect_iou

from oracles import cascade_merge_oracle, greedy_match_oracle, run_length_oracle

CFG = EvalConfig()


def det(rect, category="Car", confidence=0.9, frame_id=0, stage=0):
    return Detection(frame_id=frame_id, category=category, rect=rect,
                     confidence=confidence, stage=stage)


def rrect(rng, span=100):
    x = rng.uniform(0, span)
    y = rng.uniform(0, span)
    return Rect2(x, y, x + rng.uniform(5, 40), y + rng.uniform(5, 40))


class TestMatchFrame:
    def test_perfect_match(self):
        r = Rect2(0, 0, 10, 10)
        result = match_frame([(r, "Car")], [det(r)], CFG)
        assert result.matches == [(0, 0)]
        assert not result.false_positive_dets and not result.missed_gts

    def test_below_threshold(self):
        gt = Rect2(0, 0, 10, 10)
        d = det(Rect2(6, 0, 16, 10))  # IoU = 4/16 = 0.25
        result = match_frame([(gt, "Car")], [d], CFG)
        assert not result.matches
        assert result.false_positive_dets == [0]
        assert result.missed_gts == [0]

    def test_category_mismatch(self):
        r = Rect2(0, 0, 10, 10)
        result = match_frame([(r, "Pedestrian")], [det(r, category="Car")], CFG)
        assert not result.matches

    def test_confidence_priority(self):
        gt = Rect2(0, 0, 10, 10)
        weak = det(gt, confidence=0.2)
        strong = det(gt, confidence=0.8)
        result = match_frame([(gt, "Car")], [weak, strong], CFG)
        assert result.matches == [(1, 0)]
        assert result.false_positive_dets == [0]

    def test_iou_tie_lower_gt_index(self):
        gt_a = Rect2(0, 0, 10, 10)
        gt_b = Rect2(20, 0, 30, 10)
        d = det(Rect2(0, 0, 10, 10))
        shifted = Rect2(20, 0, 30, 10)
        assert rect_iou(gt_a, d.rect) == rect_iou(gt_b, shifted)
        result = match_frame([(gt_a, "Car"), (gt_b, "Car")], [d, det(shifted)], CFG)
        assert sorted(result.matches) == [(0, 0), (1, 1)]

    def test_random_against_oracle(self):
        rng = random.Random(73)
        for _ in range(20):
            gts = [(rrect(rng), rng.choice(["Car", "Pedestrian"])) for _ in range(rng.randrange(1, 8))]
            dets = [det(rrect(rng), rng.choice(["Car", "Pedestrian"]),
                        confidence=round(rng.random(), 3)) for _ in range(rng.randrange(1, 10))]
            result = match_frame(gts, dets, CFG)
            expected = greedy_match_oracle([g[0] for g in gts], [g[1] for g in gts],
                                           dets, rect_iou, CFG.iou_threshold)
            assert sorted(result.matches) == sorted(expected)
            # no gt double-assigned, no cross-category match
            gis = [gi for _, gi in result.matches]
            assert len(gis) == len(set(gis))
            for di, gi in result.matches:
                assert dets[di].category == gts[gi][1]


def track_with_trace(frames, detected, rect=Rect2(100, 100, 150, 150)):
    track = GtTrack(track_id=1, category="Car", rects={f: rect for f in frames})
    dets = [det(rect, frame_id=f) for f in detected]
    return track, dets


class TestAccidentMetrics:
    def test_reference_pattern(self):
        track, dets = track_with_trace(range(10), {2, 3, 4, 7, 8})
        m = accident_metrics(track, dets, CFG)
        assert m.first_detection_frame == 2
        assert m.coverage_pct == 50.0
        assert m.avg_consecutive_run == 2.5

    def test_never_detected(self):
        track, dets = track_with_trace(range(10), set())
        m = accident_metrics(track, dets, CFG)
        assert m.first_detection_frame is None
        assert m.coverage_pct == 0.0
        assert m.avg_consecutive_run == 0.0

    def test_always_detected(self):
        track, dets = track_with_trace(range(7), set(range(7)))
        m = accident_metrics(track, dets, CFG)
        assert m.coverage_pct == 100.0
        assert m.avg_consecutive_run == 7.0

    def test_random_against_run_length_oracle(self):
        rng = random.Random(79)
        for _ in range(100):
            n = rng.randrange(1, 30)
            detected = {f for f in range(n) if rng.random() < 0.5}
            track, dets = track_with_trace(range(n), detected)
            m = accident_metrics(track, dets, CFG)
            flags = [f in detected for f in range(n)]
            runs = run_length_oracle(flags)
            assert run_lengths(flags) == runs
            assert sum(runs) == len(detected)
            assert m.coverage_pct == pytest.approx(100.0 * len(detected) / n)
            assert m.avg_consecutive_run == pytest.approx(
                sum(runs) / len(runs) if runs else 0.0)
            assert m.first_detection_frame == (min(detected) if detected else None)


class TestCascadeMerge:
    def test_empty_easy_stage(self):
        medium = [det(rrect(random.Random(1)), stage=2) for _ in range(4)]
        assert cascade_merge([[], medium], CFG) == medium

    def test_duplicate_discarded(self):
        r = Rect2(0, 0, 10, 10)
        easy = [det(r, stage=1)]
        medium = [det(Rect2(0.5, 0, 10.5, 10), stage=2)]
        merged = cascade_merge([easy, medium], CFG)
        assert merged == easy

    def test_different_category_kept(self):
        r = Rect2(0, 0, 10, 10)
        easy = [det(r, category="Car", stage=1)]
        medium = [det(r, category="Pedestrian", stage=2)]
        merged = cascade_merge([easy, medium], CFG)
        assert len(merged) == 2

    def test_single_stage_identity(self):
        rng = random.Random(83)
        dets = [det(rrect(rng)) for _ in range(10)]
        assert cascade_merge([dets], CFG) == dets

    def test_within_stage_no_suppression(self):
        r = Rect2(0, 0, 10, 10)
        medium = [det(r, stage=2), det(r, stage=2)]
        assert cascade_merge([[], medium], CFG) == medium

    def test_many_stages_against_oracle(self):
        rng = random.Random(89)
        for _ in range(50):
            stages = []
            for si in range(rng.randrange(1, 5)):
                stages.append([det(rrect(rng, span=60), rng.choice(["Car", "Pedestrian"]),
                                   stage=si + 1) for _ in range(rng.randrange(0, 8))])
            merged = cascade_merge(stages, CFG)
            assert merged == cascade_merge_oracle(stages, rect_iou, CFG.merge_iou_threshold)
            # stage-1 detections always retained
            for d in stages[0]:
                assert d in merged


class TestIOAndConfig:
    def test_detection_jsonl_roundtrip(self):
        rng = random.Random(97)
        dets = [det(rrect(rng), confidence=round(rng.random(), 3), frame_id=i, stage=1)
                for i in range(5)]
        sink = io.StringIO()
        write_detections(dets, sink)
        assert read_detections(io.StringIO(sink.getvalue())) == dets

    def test_track_jsonl_roundtrip(self):
        track = GtTrack(track_id=7, category="Pedestrian",
                        rects={0: Rect2(1, 2, 3, 4), 1: Rect2(2, 3, 4, 5)})
        sink = io.StringIO()
        write_tracks([track], sink)
        assert read_tracks(io.StringIO(sink.getvalue())) == [track]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            EvalConfig(iou_threshold=0.0).validate()
        with pytest.raises(ValueError):
            EvalConfig(merge_iou_threshold=1.5).validate()
        assert EvalConfig().validate().iou_threshold == 0.5
