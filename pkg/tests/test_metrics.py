import json
import random

import pytest

from resplab.errors import InvalidHorizon, SchemaViolation
from resplab.metrics import (
    EvalConfig,
    dataset_stats,
    event_counts,
    event_f1,
    iou,
    load_prediction_file,
    match_events,
    segment_counts,
    segment_f1,
    write_prediction_csv,
)

from helpers import (
    TABLE_CORPUS,
    generate_table_corpus,
    max_matching_tp,
    segment_counts_oracle,
)


class TestSegmentCounts:
    def test_perfect_agreement(self):
        report = segment_f1({"wheeze": [(0, 1000)]}, {"wheeze": [(0, 1000)]}, 1500)
        assert report.scores["wheeze"].f1 == 1.0

    def test_worked_example(self):
        score = segment_counts([(0, 1000)], [(500, 1500)], 1500, 50)
        assert (score.tp, score.fp, score.fn) == (10, 10, 10)
        assert score.f1 == 0.5

    def test_empty_pred(self):
        score = segment_counts([(0, 1000)], [], 1500, 50)
        assert score.f1 == 0.0

    def test_interval_outside_horizon(self):
        with pytest.raises(InvalidHorizon):
            segment_counts([(0, 2000)], [], 1500, 50)

    def test_matches_enumeration_oracle_randomized(self):
        rng = random.Random(99)
        for _ in range(500):
            horizon = rng.choice([500, 1000, 1490, 3000])
            frame = rng.choice([10, 50, 70])
            def intervals():
                out = []
                for _ in range(rng.randint(0, 6)):
                    s = rng.randint(0, horizon - 1)
                    out.append((s, rng.randint(s + 1, horizon)))
                return out
            ref, pred = intervals(), intervals()
            score = segment_counts(ref, pred, horizon, frame)
            assert (score.tp, score.fp, score.fn) == \
                segment_counts_oracle(ref, pred, horizon, frame)

    def test_tp_bounded_by_frames(self):
        score = segment_counts([(0, 1000)], [(0, 1000)], 1000, 50)
        assert score.tp <= 1000 // 50


class TestEventCounts:
    def test_perfect(self):
        assert event_counts([(0, 10)], [(0, 10)], 0.5).f1 == 1.0

    def test_worked_example_iou_below_threshold(self):
        assert iou((0, 1000), (500, 1500)) == pytest.approx(1 / 3)
        score = event_counts([(0, 1000)], [(500, 1500)], 0.5)
        assert (score.tp, score.fp, score.fn) == (0, 1, 1)
        assert score.f1 == 0.0

    def test_two_matches(self):
        score = event_counts([(0, 1000), (2000, 3000)],
                             [(0, 900), (2100, 3000)], 0.5)
        assert score.tp == 2
        assert score.f1 == 1.0

    def test_each_event_matches_once(self):
        # two predictions inside one ref: only one can match
        score = event_counts([(0, 1000)], [(0, 999), (1, 1000)], 0.5)
        assert score.tp == 1
        assert score.fp == 1

    def test_greedy_matches_max_matching_randomized(self):
        rng = random.Random(7)
        failures = []
        for trial in range(2000):
            ref = _disjoint_intervals(rng, rng.randint(0, 6))
            pred = [_random_interval(rng) for _ in range(rng.randint(0, 6))]
            got = len(match_events(ref, pred, 0.5))
            want = max_matching_tp(ref, pred, 0.5)
            if got != want:
                failures.append((trial, ref, pred, got, want))
        assert failures == []

    def test_tp_bound(self):
        rng = random.Random(12)
        for _ in range(200):
            ref = _disjoint_intervals(rng, rng.randint(0, 5))
            pred = [_random_interval(rng) for _ in range(rng.randint(0, 5))]
            score = event_counts(ref, pred, 0.5)
            assert score.tp <= min(len(ref), len(pred))


def _random_interval(rng, span=10000):
    s = rng.randint(0, span - 2)
    return (s, rng.randint(s + 1, min(s + 2000, span)))


def _disjoint_intervals(rng, n, span=10000):
    starts = sorted(rng.sample(range(0, span, 100), min(n * 2, span // 100)))
    out = []
    for i in range(0, len(starts) - 1, 2):
        if len(out) == n:
            break
        out.append((starts[i], rng.randint(starts[i] + 1, starts[i + 1])))
    return out


class TestSymmetry:
    def test_swap_ref_pred_swaps_precision_recall(self):
        rng = random.Random(3)
        for _ in range(100):
            ref = {"wheeze": _disjoint_intervals(rng, rng.randint(1, 4))}
            pred = {"wheeze": _disjoint_intervals(rng, rng.randint(1, 4))}
            for make in (
                lambda a, b: segment_f1(a, b, 10000),
                lambda a, b: event_f1(a, b),
            ):
                fwd = make(ref, pred).scores["wheeze"]
                rev = make(pred, ref).scores["wheeze"]
                assert fwd.precision == rev.recall
                assert fwd.recall == rev.precision
                assert fwd.f1 == rev.f1

    def test_translation_invariance(self):
        ref = {"wheeze": [(100, 600), (1000, 1400)]}
        pred = {"wheeze": [(150, 640), (2000, 2200)]}
        offset = 7000
        shift = lambda d: {k: [(s + offset, e + offset) for s, e in v]
                           for k, v in d.items()}
        a = segment_f1(ref, pred, 3000, EvalConfig(frame_ms=50)).scores["wheeze"]
        b = segment_f1(shift(ref), shift(pred), 3000 + offset,
                       EvalConfig(frame_ms=50)).scores["wheeze"]
        # frame grid alignment is preserved because offset % frame_ms == 0
        assert (a.tp, a.fp, a.fn) == (b.tp, b.fp, b.fn)
        ea = event_f1(ref, pred).scores["wheeze"]
        eb = event_f1(shift(ref), shift(pred)).scores["wheeze"]
        assert (ea.tp, ea.fp, ea.fn) == (eb.tp, eb.fp, eb.fn)


class TestGroupMapping:
    def test_wheeze_scores_against_continuous_by_group(self):
        ref = {"continuous": [(0, 1000)]}
        pred = {"wheeze": [(0, 1000)]}
        exact = event_f1(ref, pred, EvalConfig(mode="event"))
        assert exact.scores["continuous"].f1 == 0.0
        grouped = event_f1(ref, pred, EvalConfig(mode="event",
                                                 class_mapping="by_group"))
        assert grouped.scores["cas"].f1 == 1.0

    def test_undefined_for_absent_class(self):
        report = event_f1({"wheeze": []}, {"wheeze": []})
        assert report.scores["wheeze"].f1 is None


class TestDatasetStats:
    def test_table_corpus_counts_and_means(self, tmp_path):
        corpus = generate_table_corpus(tmp_path / "corpus", n_files=20)
        files = sorted(corpus.rglob("*.labels.json"))
        durations = {k: int(v) for k, v in json.loads(
            (corpus / "recordings.json").read_text()).items()}
        table = dataset_stats(files, recording_durations=durations)

        assert table.classes["inspiration"].count == 34095
        assert table.classes["inspiration"].total_duration_min == 528.14
        assert table.classes["inspiration"].mean_duration_sec == 0.93
        assert table.classes["expiration"].mean_duration_sec == 0.96
        assert table.classes["wheeze"].count == 8457
        assert table.groups["cas"].count == 8457 + 686 + 4740 == 13883
        assert table.groups["cas"].total_duration_min == 191.16
        assert table.groups["cas"].mean_duration_sec == 0.83
        assert table.groups["das"].mean_duration_sec == 0.89
        assert table.recording_count == 9765
        assert table.recording_total_min == 2441.25

    def test_empty_corpus(self):
        table = dataset_stats([])
        assert all(r.count == 0 for r in table.classes.values())
        assert all(r.mean_duration_sec is None for r in table.classes.values())

    def test_bad_file_skipped(self, tmp_path):
        bad = tmp_path / "bad.labels.json"
        bad.write_text("{\"version\": 99}")
        table = dataset_stats([bad])
        assert table.skipped_files == [str(bad)]

    def test_mean_rounds_from_rounded_total(self):
        for cls, (count, total_ms) in TABLE_CORPUS.items():
            total_min = round(total_ms / 60000, 2)
            expected = round(total_min * 60 / count, 2)
            assert abs(expected * count / 60 - total_min) < total_min  # sanity


class TestPredictionFile:
    def test_csv_rows(self, tmp_path):
        path = tmp_path / "p.csv"
        write_prediction_csv(path, [
            ("rec1", "wheeze", 0, 500),
            ("rec1", "wheeze", 700, 1200),
        ])
        pred = load_prediction_file(path)
        assert pred["rec1"]["wheeze"] == [(0, 500), (700, 1200)]

    def test_json_equivalent_to_csv(self, tmp_path):
        doc = {
            "version": 1, "recording_id": "rec1", "annotator": "m",
            "revision": 2,
            "labels": [
                {"id": "a", "class": "wheeze", "track": 1, "start_ms": 0,
                 "end_ms": 500, "annotator": "m",
                 "created_at": "2020-01-01T00:00:00Z",
                 "updated_at": "2020-01-01T00:00:00Z"},
                {"id": "b", "class": "wheeze", "track": 1, "start_ms": 700,
                 "end_ms": 1200, "annotator": "m",
                 "created_at": "2020-01-01T00:00:00Z",
                 "updated_at": "2020-01-01T00:00:00Z"},
            ],
        }
        jpath = tmp_path / "p.json"
        jpath.write_text(json.dumps(doc))
        cpath = tmp_path / "p.csv"
        write_prediction_csv(cpath, [("rec1", "wheeze", 0, 500),
                                     ("rec1", "wheeze", 700, 1200)])
        assert load_prediction_file(jpath) == load_prediction_file(cpath)

    def test_inverted_interval_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("rec1,wheeze,500,500\n")
        with pytest.raises(SchemaViolation):
            load_prediction_file(path)

    def test_unknown_class_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("rec1,sneeze,0,500\n")
        with pytest.raises(SchemaViolation):
            load_prediction_file(path)
