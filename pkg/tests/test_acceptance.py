"""Acceptance suite: one test per release criterion, each printing a
PASS line on success (run with -s to see them)."""

import csv
import random
import time

import numpy as np

from resplab.annotations import AnnotationSet, LabelClass, validate_set
from resplab.cli import main
from resplab.metrics import event_counts, segment_counts
from resplab.persistence import (
    annotation_to_payload,
    replay_journal,
    snapshot_labels,
)
from resplab.spectrogram import (
    SpectrogramParams,
    compute_spectrogram,
    window_coefficients,
)

from helpers import (
    burst_signal,
    generate_table_corpus,
    max_matching_tp,
    naive_dft_magnitudes,
    segment_counts_oracle,
    sine,
    write_wav_file,
)
from test_persistence import _write_random_journal


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_acceptance_table_statistics(tmp_path):
    started = time.monotonic()
    corpus = generate_table_corpus(tmp_path / "corpus", n_files=50)
    out = tmp_path / "stats.csv"
    assert main(["stats", "--labels", str(corpus), "--out", str(out)]) == 0
    rows = {r[0]: r for r in _read_csv(out)[1:]}

    expectations = {
        "inspiration": ("34095", "528.14", 0.93),
        "expiration": ("18349", "292.85", 0.96),
        "cas": ("13883", "191.16", 0.83),
        "wheeze": ("8457", "119.73", 0.85),
        "stridor": ("686", "9.46", 0.83),
        "rhonchus": ("4740", "61.98", 0.78),
        "das": ("15606", "230.87", 0.89),
    }
    for key, (count, total_min, mean_sec) in expectations.items():
        row = rows[key]
        assert row[1] == count, f"{key} count {row[1]} != {count}"
        assert row[2] == total_min, f"{key} total {row[2]} != {total_min}"
        assert abs(float(row[3]) - mean_sec) <= 0.005, f"{key} mean {row[3]}"
    assert int(rows["cas"][1]) == 8457 + 686 + 4740 == 13883
    assert rows["recordings"][1] == "9765"
    assert rows["recordings"][2] == "2441.25"

    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"stats reproduction took {elapsed:.1f} s"
    print(f"\nPASS: table statistics reproduction ({elapsed:.1f} s)")


def test_acceptance_stft_oracle():
    started = time.monotonic()
    rng = np.random.default_rng(2024)
    params = SpectrogramParams(floor_db=-300.0)
    w = window_coefficients(params.window_fn, params.window_size)

    for _ in range(200):
        samples = rng.uniform(-1, 1, int(rng.integers(256, 4097)))
        spec = compute_spectrogram(samples, 4000, params)
        oracle = naive_dft_magnitudes(samples, w, params.hop_size)
        recovered = (10 ** (spec.values_db / 20) - params.epsilon) * w.sum() / 2
        assert np.max(np.abs(recovered - oracle)) <= 1e-9 * np.max(oracle)

    spec = compute_spectrogram(sine(1000, 2.0, 4000), 4000)
    assert np.all(spec.values_db.argmax(axis=0) == 64)
    assert np.max(np.abs(spec.values_db[64, :])) <= 0.1

    signal = sine(500, 1.0, 4000, amplitude=0.9)
    a = compute_spectrogram(signal, 4000)
    b = compute_spectrogram(signal * 0.1, 4000)
    unclamped = (a.values_db > -80.0 + 25) & (b.values_db > -80.0)
    assert unclamped.any()
    np.testing.assert_allclose(
        a.values_db[unclamped] - b.values_db[unclamped], 20.0, atol=1e-6)

    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"STFT oracle took {elapsed:.1f} s"
    print(f"\nPASS: STFT naive-DFT oracle, sine peak, 20 dB shift ({elapsed:.1f} s)")


def _disjoint_intervals(rng, n, span=6000):
    bounds = sorted(rng.sample(range(span + 1), 2 * n))
    return [(bounds[2 * i], bounds[2 * i + 1]) for i in range(n)
            if bounds[2 * i] < bounds[2 * i + 1]]


def test_acceptance_metrics_oracle():
    started = time.monotonic()
    rng = random.Random(31337)
    event_failures = []
    for trial in range(10000):
        n_ref, n_pred = rng.randint(0, 6), rng.randint(0, 6)
        ref = _disjoint_intervals(rng, n_ref)
        pred = []
        for _ in range(n_pred):
            s = rng.randint(0, 5998)
            pred.append((s, rng.randint(s + 1, 6000)))

        frame = rng.choice([10, 50, 100])
        got = segment_counts(ref, pred, 6000, frame)
        want = segment_counts_oracle(ref, pred, 6000, frame)
        assert (got.tp, got.fp, got.fn) == want, f"segment mismatch, trial {trial}"

        tp = event_counts(ref, pred, 0.5).tp
        best = max_matching_tp(ref, pred, 0.5)
        if tp != best:
            event_failures.append((trial, ref, pred, tp, best))

    if event_failures:
        for failure in event_failures[:5]:
            print(f"counterexample: {failure}")
    assert event_failures == [], f"{len(event_failures)} greedy-vs-max mismatches"

    worked_seg = segment_counts([(0, 1000)], [(500, 1500)], 1500, 50)
    assert worked_seg.f1 == 0.5
    worked_evt = event_counts([(0, 1000)], [(500, 1500)], 0.5)
    assert worked_evt.f1 == 0.0

    elapsed = time.monotonic() - started
    assert elapsed < 120.0, f"metrics oracle took {elapsed:.1f} s"
    print(f"\nPASS: metrics oracles on 10,000 instances + worked example ({elapsed:.1f} s)")


def test_acceptance_crash_recovery(tmp_path):
    started = time.monotonic()
    rng = random.Random(60606)
    for trial in range(1000):
        path = tmp_path / f"j{trial}"
        _write_random_journal(path, rng)
        data = path.read_bytes()
        cut = rng.randint(0, len(data))
        path.write_bytes(data[:cut])

        complete = data[:cut].count(b"\n")  # independent prefix oracle
        replayed = replay_journal(path)
        assert replayed.revision == complete, f"trial {trial}"
        assert validate_set(replayed) == [], f"trial {trial}"

        full_lines = data.split(b"\n")[:complete]
        ref_path = tmp_path / "ref"
        ref_path.write_bytes(b"\n".join(full_lines) + (b"\n" if full_lines else b""))
        expected = replay_journal(ref_path)
        assert [annotation_to_payload(a) for a in replayed.annotations] == \
               [annotation_to_payload(a) for a in expected.annotations], f"trial {trial}"

    elapsed = time.monotonic() - started
    print(f"\nPASS: crash recovery on 1,000 truncated journals ({elapsed:.1f} s)")


def test_acceptance_end_to_end_pipeline(tmp_path):
    long_wav = write_wav_file(tmp_path / "long.wav", sine(300, 61.0, 4000), 4000)
    seg_dir = tmp_path / "segments"
    assert main(["truncate", str(long_wav), "--out", str(seg_dir)]) == 0
    assert len(list(seg_dir.glob("*.wav"))) == 4

    bursts = [(2.0, 2.5), (5.0, 5.5), (8.0, 8.5)]
    burst_wav = write_wav_file(tmp_path / "bursts.wav",
                               burst_signal(4000, 10.0, bursts, seed=8), 4000)
    pred_csv = tmp_path / "pred.csv"
    assert main(["detect", str(burst_wav), "--out", str(pred_csv)]) == 0
    pred_rows = _read_csv(pred_csv)[1:]
    assert len(pred_rows) == 3

    # hand-written reference labels at the true burst positions
    aset = AnnotationSet(recording_id="bursts", annotator="ref", duration_ms=10000)
    for start_s, end_s in bursts:
        aset.add_label(LabelClass.INSPIRATION, int(start_s * 1000), int(end_s * 1000))
    ref_dir = tmp_path / "ref"
    snapshot_labels(aset, ref_dir / "bursts" / "ref.labels.json")

    report = tmp_path / "report.csv"
    assert main(["eval", "--ref", str(ref_dir), "--pred", str(pred_csv),
                 "--mode", "event", "--min-iou", "0.5",
                 "--out", str(report)]) == 0
    rows = {r[0]: r for r in _read_csv(report)[1:]}
    assert float(rows["inspiration"][6]) == 1.0

    print("\nPASS: end-to-end truncate -> detect -> eval pipeline")


def test_acceptance_no_model_reproduction_claim():
    # The published detector F1 values depend on a private corpus and
    # unspecified neural models; this artifact ships no such models and the
    # metric implementation itself is covered by the oracle criteria above.
    import resplab

    assert not hasattr(resplab, "train")
    assert not hasattr(resplab, "cnn")
    print("\nPASS: no claim to reproduce published model F1 values (out of scope)")
