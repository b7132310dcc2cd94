"""Detection scoring and dataset statistics.

Two scoring modes:
  - segment: the horizon is cut into fixed frames; a frame counts as
    positive when any interval of the target class intersects it.
  - event: predictions match references greedily in descending temporal
    IoU, one match per event, at a configurable IoU threshold.

Statistics mirror the per-class count / total duration (min) / mean
duration (sec) table shape, with CAS/DAS group rollups.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .annotations import ClassGroup, LabelClass, class_group
from .errors import InvalidHorizon, SchemaViolation

Interval = tuple[int, int]


@dataclass(frozen=True)
class EvalConfig:
    mode: str = "segment"  # segment | event
    frame_ms: int = 50
    match_min_iou: float = 0.5
    class_mapping: str = "exact_class"  # exact_class | by_group

    def validate(self) -> None:
        if self.mode not in ("segment", "event"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.frame_ms <= 0:
            raise ValueError("frame_ms must be positive")
        if not 0 < self.match_min_iou <= 1:
            raise ValueError("match_min_iou must be in (0, 1]")
        if self.class_mapping not in ("exact_class", "by_group"):
            raise ValueError(f"unknown class_mapping {self.class_mapping!r}")


@dataclass
class ClassScore:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def defined(self) -> bool:
        return (self.tp + self.fp + self.fn) > 0

    @property
    def precision(self) -> float | None:
        if not self.defined:
            return None
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 0.0

    @property
    def recall(self) -> float | None:
        if not self.defined:
            return None
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0

    @property
    def f1(self) -> float | None:
        if not self.defined:
            return None
        return 2 * self.tp / (2 * self.tp + self.fp + self.fn)


@dataclass
class EvalReport:
    config: EvalConfig
    scores: dict[str, ClassScore] = field(default_factory=dict)

    def score(self, key: str) -> ClassScore:
        return self.scores.setdefault(key, ClassScore())


# ------------------------------------------------------------ core counts

def iou(a: Interval, b: Interval) -> float:
    """Temporal intersection-over-union of two half-open intervals."""
    inter = min(a[1], b[1]) - max(a[0], b[0])
    if inter <= 0:
        return 0.0
    union = max(a[1], b[1]) - min(a[0], b[0])
    return inter / union


def segment_counts(ref: list[Interval], pred: list[Interval],
                   horizon_ms: int, frame_ms: int) -> ClassScore:
    """Frame-level tp/fp/fn over frames [i*frame_ms, (i+1)*frame_ms)."""
    if horizon_ms <= 0:
        raise InvalidHorizon(f"horizon {horizon_ms} ms")
    for s, e in list(ref) + list(pred):
        if s < 0 or e > horizon_ms:
            raise InvalidHorizon(f"interval [{s}, {e}) outside [0, {horizon_ms}]")
    n_frames = -(-horizon_ms // frame_ms)

    def mark(intervals: list[Interval]) -> list[bool]:
        active = [False] * n_frames
        for s, e in intervals:
            if e <= s:
                continue
            lo = s // frame_ms
            hi = min(-(-e // frame_ms), n_frames)
            for i in range(lo, hi):
                active[i] = True
        return active

    r, p = mark(ref), mark(pred)
    score = ClassScore()
    for ri, pi in zip(r, p):
        if ri and pi:
            score.tp += 1
        elif pi:
            score.fp += 1
        elif ri:
            score.fn += 1
    return score


def match_events(ref: list[Interval], pred: list[Interval],
                 min_iou: float) -> list[tuple[int, int]]:
    """Greedy one-to-one matching in descending IoU.

    Ties break on earlier reference start, then earlier prediction start.
    Returns matched (ref_index, pred_index) pairs.
    """
    candidates = []
    for ri, r in enumerate(ref):
        for pi, p in enumerate(pred):
            score = iou(r, p)
            if score >= min_iou:
                candidates.append((-score, r[0], p[0], ri, pi))
    candidates.sort()
    matched: list[tuple[int, int]] = []
    ref_used, pred_used = set(), set()
    for _, _, _, ri, pi in candidates:
        if ri in ref_used or pi in pred_used:
            continue
        ref_used.add(ri)
        pred_used.add(pi)
        matched.append((ri, pi))
    return matched


def event_counts(ref: list[Interval], pred: list[Interval],
                 min_iou: float) -> ClassScore:
    matched = match_events(ref, pred, min_iou)
    return ClassScore(tp=len(matched), fp=len(pred) - len(matched),
                      fn=len(ref) - len(matched))


# -------------------------------------------------------- report assembly

def _map_classes(by_class: dict[str, list[Interval]],
                 mapping: str) -> dict[str, list[Interval]]:
    if mapping == "exact_class":
        return {k: sorted(v) for k, v in by_class.items()}
    out: dict[str, list[Interval]] = {}
    for cls, intervals in by_class.items():
        group = class_group(LabelClass(cls)).value
        out.setdefault(group, []).extend(intervals)
    return {k: sorted(v) for k, v in out.items()}


def segment_f1(ref: dict[str, list[Interval]], pred: dict[str, list[Interval]],
               horizon_ms: int, cfg: EvalConfig | None = None) -> EvalReport:
    """Segment-mode report over per-class (or per-group) interval dicts."""
    cfg = cfg or EvalConfig(mode="segment")
    cfg.validate()
    ref, pred = _map_classes(ref, cfg.class_mapping), _map_classes(pred, cfg.class_mapping)
    report = EvalReport(config=cfg)
    for key in sorted(set(ref) | set(pred)):
        counts = segment_counts(ref.get(key, []), pred.get(key, []),
                                horizon_ms, cfg.frame_ms)
        s = report.score(key)
        s.tp += counts.tp
        s.fp += counts.fp
        s.fn += counts.fn
    return report


def event_f1(ref: dict[str, list[Interval]], pred: dict[str, list[Interval]],
             cfg: EvalConfig | None = None) -> EvalReport:
    """Event-mode report over per-class (or per-group) interval dicts."""
    cfg = cfg or EvalConfig(mode="event")
    cfg.validate()
    ref, pred = _map_classes(ref, cfg.class_mapping), _map_classes(pred, cfg.class_mapping)
    report = EvalReport(config=cfg)
    for key in sorted(set(ref) | set(pred)):
        counts = event_counts(ref.get(key, []), pred.get(key, []), cfg.match_min_iou)
        s = report.score(key)
        s.tp += counts.tp
        s.fp += counts.fp
        s.fn += counts.fn
    return report


def merge_counts(reports: list[EvalReport], cfg: EvalConfig) -> EvalReport:
    """Pool per-recording tp/fp/fn into one corpus-level report."""
    merged = EvalReport(config=cfg)
    for rep in reports:
        for key, score in rep.scores.items():
            s = merged.score(key)
            s.tp += score.tp
            s.fp += score.fp
            s.fn += score.fn
    return merged


def report_to_csv(report: EvalReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "tp", "fp", "fn", "precision", "recall", "f1"])
        for key in sorted(report.scores):
            s = report.scores[key]
            fmt = lambda v: "" if v is None else f"{v:.4f}"
            writer.writerow([key, s.tp, s.fp, s.fn,
                             fmt(s.precision), fmt(s.recall), fmt(s.f1)])


# ------------------------------------------------------------- statistics

@dataclass
class StatsRow:
    key: str
    count: int = 0
    total_ms: int = 0

    @property
    def total_duration_min(self) -> float:
        return round(self.total_ms / 60000.0, 2)

    @property
    def mean_duration_sec(self) -> float | None:
        if self.count == 0:
            return None
        return round(self.total_duration_min * 60.0 / self.count, 2)


@dataclass
class StatsTable:
    classes: dict[str, StatsRow] = field(default_factory=dict)
    groups: dict[str, StatsRow] = field(default_factory=dict)
    recording_count: int = 0
    recording_total_ms: int = 0
    skipped_files: list[str] = field(default_factory=list)

    @property
    def recording_total_min(self) -> float:
        return round(self.recording_total_ms / 60000.0, 2)


def dataset_stats(
    label_files: list[str | Path],
    recording_durations: dict[str, int] | None = None,
) -> StatsTable:
    """Aggregate label counts and durations; bad files are skipped and listed."""
    from .persistence import load_snapshot  # cycle-free late import

    table = StatsTable()
    for cls in LabelClass:
        table.classes[cls.value] = StatsRow(key=cls.value)
    for grp in ClassGroup:
        table.groups[grp.value] = StatsRow(key=grp.value)

    for path in label_files:
        try:
            aset = load_snapshot(path)
        except SchemaViolation:
            table.skipped_files.append(str(path))
            continue
        for ann in aset.annotations:
            crow = table.classes[ann.label_class.value]
            crow.count += 1
            crow.total_ms += ann.duration_ms
            grow = table.groups[class_group(ann.label_class).value]
            grow.count += 1
            grow.total_ms += ann.duration_ms

    if recording_durations:
        table.recording_count = len(recording_durations)
        table.recording_total_ms = sum(recording_durations.values())
    return table


def stats_to_csv(table: StatsTable, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "count", "total_duration_min", "mean_duration_sec"])
        writer.writerow(["recordings", table.recording_count,
                         f"{table.recording_total_min:.2f}", ""])
        for row in list(table.classes.values()) + list(table.groups.values()):
            mean = row.mean_duration_sec
            writer.writerow([row.key, row.count, f"{row.total_duration_min:.2f}",
                             "" if mean is None else f"{mean:.2f}"])


# ------------------------------------------------------------- predictions

_CLASS_NAMES = {c.value for c in LabelClass}


def _validate_interval_row(cls: str, start: int, end: int, where: str) -> None:
    if cls not in _CLASS_NAMES:
        raise SchemaViolation(f"{where}: unknown class {cls!r}")
    if start < 0 or end <= start:
        raise SchemaViolation(f"{where}: bad interval [{start}, {end})")


def load_prediction_file(path: str | Path) -> dict[str, dict[str, list[Interval]]]:
    """Parse detector output into {recording_id: {class: sorted intervals}}.

    Accepts either a label-snapshot JSON file or the 4-column CSV
    ``recording_id,class,start_ms,end_ms`` (header optional).
    """
    path = Path(path)
    out: dict[str, dict[str, list[Interval]]] = {}

    def put(rec_id: str, cls: str, start: int, end: int) -> None:
        out.setdefault(rec_id, {}).setdefault(cls, []).append((start, end))

    text = path.read_text("utf-8")
    if text.lstrip().startswith("{"):
        from .persistence import load_snapshot
        aset = load_snapshot(path)
        for ann in aset.annotations:
            _validate_interval_row(ann.label_class.value, ann.start_ms,
                                   ann.end_ms, str(path))
            put(aset.recording_id, ann.label_class.value, ann.start_ms, ann.end_ms)
    else:
        for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) != 4:
                raise SchemaViolation(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            rec_id, cls, start_s, end_s = (cell.strip() for cell in row)
            if lineno == 1 and not start_s.lstrip("-").isdigit():
                continue  # header row
            try:
                start, end = int(start_s), int(end_s)
            except ValueError as exc:
                raise SchemaViolation(f"{path}:{lineno}: non-integer time: {exc}") from exc
            _validate_interval_row(cls, start, end, f"{path}:{lineno}")
            put(rec_id, cls, start, end)

    for by_class in out.values():
        for intervals in by_class.values():
            intervals.sort()
    return out


def write_prediction_csv(path: str | Path,
                         rows: list[tuple[str, str, int, int]]) -> None:
    """Write (recording_id, class, start_ms, end_ms) rows with a header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["recording_id", "class", "start_ms", "end_ms"])
        writer.writerows(rows)
