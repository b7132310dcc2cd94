"""Command line entry point.

Verbs: serve, stats, eval, spectrogram, truncate, detect.
Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .annotations import LabelClass
from .audio_io import load_recording, sample_window, truncate_segments, write_wav
from .detector import DetectorConfig, detect_events
from .errors import IoFailure, ResplabError
from .metrics import (
    EvalConfig,
    dataset_stats,
    event_f1,
    load_prediction_file,
    merge_counts,
    report_to_csv,
    segment_f1,
    stats_to_csv,
    write_prediction_csv,
)
from .persistence import Config, load_config, load_snapshot
from .spectrogram import SpectrogramParams, compute_spectrogram, export_matrix

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resplab")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--root", default=os.environ.get("RESPLAB_ROOT", "."))
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config", default=None)
    p.add_argument("--static", default=None, help="directory of built UI assets")

    p = sub.add_parser("stats", help="dataset statistics over label files")
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--recordings", default=None,
                   help="JSON manifest {recording_id: duration_ms}")

    p = sub.add_parser("eval", help="score predictions against reference labels")
    p.add_argument("--ref", required=True, help="directory of label snapshots")
    p.add_argument("--pred", required=True, help="prediction CSV or snapshot JSON")
    p.add_argument("--mode", choices=["segment", "event"], default="segment")
    p.add_argument("--frame-ms", type=int, default=50)
    p.add_argument("--min-iou", type=float, default=0.5)
    p.add_argument("--by-group", action="store_true")
    p.add_argument("--out", default=None)

    p = sub.add_parser("spectrogram", help="export a spectrogram matrix")
    p.add_argument("file")
    p.add_argument("--out", required=True, help=".pgm for graymap, else CSV")
    p.add_argument("--win", type=int, default=256)
    p.add_argument("--hop", type=int, default=64)
    p.add_argument("--window-fn", default="hann")
    p.add_argument("--floor-db", type=float, default=-80.0)

    p = sub.add_parser("truncate", help="cut a WAV into fixed-length segments")
    p.add_argument("file")
    p.add_argument("--seconds", type=float, default=15.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("detect", help="run the energy-envelope detector")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    p.add_argument("--class", dest="emit_class", default="inspiration")
    p.add_argument("--threshold-k", type=float, default=3.0)
    p.add_argument("--min-event-ms", type=int, default=100)
    p.add_argument("--merge-gap-ms", type=int, default=50)

    return parser


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config) if args.config else Config()
    app = create_app(args.root, config=config, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _cmd_stats(args) -> int:
    labels_dir = Path(args.labels)
    if not labels_dir.is_dir():
        raise IoFailure(f"{labels_dir} is not a directory")
    files = sorted(labels_dir.rglob("*.labels.json"))
    durations = None
    manifest = Path(args.recordings) if args.recordings else labels_dir / "recordings.json"
    if manifest.exists():
        durations = {str(k): int(v) for k, v in
                     json.loads(manifest.read_text("utf-8")).items()}
    table = dataset_stats(files, recording_durations=durations)
    stats_to_csv(table, args.out)
    for skipped in table.skipped_files:
        print(f"skipped unparseable label file: {skipped}", file=sys.stderr)
    return EXIT_OK


def _load_reference_dir(ref_dir: Path) -> dict[str, dict[str, list[tuple[int, int]]]]:
    by_recording: dict[str, dict[str, list[tuple[int, int]]]] = {}
    for path in sorted(ref_dir.rglob("*.labels.json")):
        aset = load_snapshot(path)
        per_class = by_recording.setdefault(aset.recording_id, {})
        for ann in aset.annotations:
            per_class.setdefault(ann.label_class.value, []).append(
                (ann.start_ms, ann.end_ms))
    for per_class in by_recording.values():
        for intervals in per_class.values():
            intervals.sort()
    return by_recording


def _cmd_eval(args) -> int:
    ref_dir = Path(args.ref)
    if not ref_dir.is_dir():
        raise IoFailure(f"{ref_dir} is not a directory")
    ref = _load_reference_dir(ref_dir)
    pred = load_prediction_file(args.pred)
    cfg = EvalConfig(
        mode=args.mode,
        frame_ms=args.frame_ms,
        match_min_iou=args.min_iou,
        class_mapping="by_group" if args.by_group else "exact_class",
    )
    cfg.validate()

    reports = []
    for rec_id in sorted(set(ref) | set(pred)):
        r = ref.get(rec_id, {})
        p = pred.get(rec_id, {})
        if cfg.mode == "segment":
            ends = [e for iv in list(r.values()) + list(p.values()) for _, e in iv]
            if not ends:
                continue
            horizon = -(-max(ends) // cfg.frame_ms) * cfg.frame_ms
            reports.append(segment_f1(r, p, horizon, cfg))
        else:
            reports.append(event_f1(r, p, cfg))
    merged = merge_counts(reports, cfg)

    for key in sorted(merged.scores):
        s = merged.scores[key]
        f1 = "undefined" if s.f1 is None else f"{s.f1:.4f}"
        print(f"{key}: tp={s.tp} fp={s.fp} fn={s.fn} f1={f1}")
    if args.out:
        report_to_csv(merged, args.out)
    return EXIT_OK


def _cmd_spectrogram(args) -> int:
    rec = load_recording(args.file)
    params = SpectrogramParams(window_size=args.win, hop_size=args.hop,
                               window_fn=args.window_fn, floor_db=args.floor_db)
    spec = compute_spectrogram(rec.samples, rec.sample_rate, params)
    export_matrix(spec, args.out)
    print(f"{spec.n_bins} bins x {spec.n_frames} frames -> {args.out}")
    return EXIT_OK


def _cmd_truncate(args) -> int:
    rec = load_recording(args.file)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    segments = truncate_segments(rec, int(args.seconds * 1000))
    for seg in segments:
        samples = sample_window(rec, seg.start_ms, seg.end_ms)
        write_wav(out_dir / f"{rec.id}_{seg.index:03d}.wav", samples, rec.sample_rate)
    print(f"{len(segments)} segments -> {out_dir}")
    return EXIT_OK


def _cmd_detect(args) -> int:
    rec = load_recording(args.file)
    cfg = DetectorConfig(
        emit_class=LabelClass(args.emit_class),
        threshold_k=args.threshold_k,
        min_event_ms=args.min_event_ms,
        merge_gap_ms=args.merge_gap_ms,
    )
    events = detect_events(rec.samples, rec.sample_rate, cfg)
    write_prediction_csv(args.out, [
        (rec.id, cfg.emit_class.value, s, e) for s, e in events
    ])
    print(f"{len(events)} events -> {args.out}")
    return EXIT_OK


_COMMANDS = {
    "serve": _cmd_serve,
    "stats": _cmd_stats,
    "eval": _cmd_eval,
    "spectrogram": _cmd_spectrogram,
    "truncate": _cmd_truncate,
    "detect": _cmd_detect,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except (IoFailure, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ResplabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
