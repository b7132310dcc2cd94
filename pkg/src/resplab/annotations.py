"""Label data model: taxonomy, tracks, interval edits and validation.

Labels live on tracks; within one track intervals never overlap
(touching endpoints are fine), across tracks they are independent.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum

from .errors import (
    ClassTrackMismatch,
    InvalidInterval,
    NotFound,
    OverlapViolation,
)


class LabelClass(str, Enum):
    NORMAL = "normal"
    INSPIRATION = "inspiration"
    EXPIRATION = "expiration"
    WHEEZE = "wheeze"
    STRIDOR = "stridor"
    RHONCHUS = "rhonchus"
    DISCONTINUOUS = "discontinuous"
    NBC = "nbc"
    CONTINUOUS = "continuous"
    NOISE = "noise"


class ClassGroup(str, Enum):
    PHASE = "phase"
    CAS = "cas"
    DAS = "das"
    NOISE = "noise"


_GROUPS = {
    LabelClass.NORMAL: ClassGroup.PHASE,
    LabelClass.INSPIRATION: ClassGroup.PHASE,
    LabelClass.EXPIRATION: ClassGroup.PHASE,
    LabelClass.NBC: ClassGroup.PHASE,
    LabelClass.WHEEZE: ClassGroup.CAS,
    LabelClass.STRIDOR: ClassGroup.CAS,
    LabelClass.RHONCHUS: ClassGroup.CAS,
    LabelClass.CONTINUOUS: ClassGroup.CAS,
    LabelClass.DISCONTINUOUS: ClassGroup.DAS,
    LabelClass.NOISE: ClassGroup.NOISE,
}


def class_group(cls: LabelClass) -> ClassGroup:
    """Fold a label class into its phase/CAS/DAS/noise group."""
    return _GROUPS[cls]


@dataclass(frozen=True)
class Track:
    track_id: int
    name: str
    allowed_classes: frozenset[LabelClass]


@dataclass(frozen=True)
class TrackLayout:
    tracks: tuple[Track, ...]

    def __post_init__(self):
        seen: set[LabelClass] = set()
        for track in self.tracks:
            dup = seen & track.allowed_classes
            if dup:
                raise ValueError(f"classes on multiple tracks: {sorted(c.value for c in dup)}")
            seen |= track.allowed_classes
        missing = set(LabelClass) - seen
        if missing:
            raise ValueError(f"classes on no track: {sorted(c.value for c in missing)}")

    def track_for(self, cls: LabelClass) -> int:
        for track in self.tracks:
            if cls in track.allowed_classes:
                return track.track_id
        raise ClassTrackMismatch(f"{cls.value} is on no track")  # unreachable by invariant


def default_layout() -> TrackLayout:
    return TrackLayout(tracks=(
        Track(0, "phase", frozenset({
            LabelClass.INSPIRATION, LabelClass.EXPIRATION,
            LabelClass.NBC, LabelClass.NORMAL,
        })),
        Track(1, "continuous", frozenset({
            LabelClass.WHEEZE, LabelClass.STRIDOR,
            LabelClass.RHONCHUS, LabelClass.CONTINUOUS,
        })),
        Track(2, "discontinuous", frozenset({LabelClass.DISCONTINUOUS})),
        Track(3, "noise", frozenset({LabelClass.NOISE})),
    ))


def _now() -> datetime:
    return datetime.now(timezone.utc)


def new_annotation_id() -> str:
    return uuid.uuid4().hex


@dataclass(frozen=True)
class Annotation:
    id: str
    label_class: LabelClass
    track_id: int
    start_ms: int
    end_ms: int
    annotator: str
    created_at: datetime
    updated_at: datetime

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms


@dataclass
class AnnotationSet:
    """Per-recording, per-annotator label collection.

    ``revision`` counts successful mutations; callers that need crash
    recovery mirror every mutation into a journal (persistence module).
    """

    recording_id: str
    annotator: str
    layout: TrackLayout = field(default_factory=default_layout)
    annotations: list[Annotation] = field(default_factory=list)
    revision: int = 0
    duration_ms: int | None = None  # recording duration when known

    def get(self, annotation_id: str) -> Annotation:
        for ann in self.annotations:
            if ann.id == annotation_id:
                return ann
        raise NotFound(f"no annotation {annotation_id}")

    def _check_interval(self, start_ms: int, end_ms: int) -> None:
        if not (0 <= start_ms < end_ms):
            raise InvalidInterval(f"[{start_ms}, {end_ms}) is not a valid interval")
        if self.duration_ms is not None and end_ms > self.duration_ms:
            raise InvalidInterval(
                f"end {end_ms} beyond recording duration {self.duration_ms}"
            )

    def _check_overlap(self, track_id: int, start_ms: int, end_ms: int,
                       ignore_id: str | None = None) -> None:
        for ann in self.annotations:
            if ann.track_id != track_id or ann.id == ignore_id:
                continue
            if ann.start_ms < end_ms and start_ms < ann.end_ms:
                raise OverlapViolation(
                    f"[{start_ms}, {end_ms}) overlaps {ann.id} "
                    f"[{ann.start_ms}, {ann.end_ms}) on track {track_id}"
                )

    def add_label(self, label_class: LabelClass, start_ms: int, end_ms: int,
                  annotator: str | None = None) -> Annotation:
        self._check_interval(start_ms, end_ms)
        track_id = self.layout.track_for(label_class)
        self._check_overlap(track_id, start_ms, end_ms)
        now = _now()
        ann = Annotation(
            id=new_annotation_id(),
            label_class=label_class,
            track_id=track_id,
            start_ms=start_ms,
            end_ms=end_ms,
            annotator=annotator or self.annotator,
            created_at=now,
            updated_at=now,
        )
        self.annotations.append(ann)
        self.revision += 1
        return ann

    def resize_label(self, annotation_id: str, new_start_ms: int,
                     new_end_ms: int) -> Annotation:
        ann = self.get(annotation_id)
        self._check_interval(new_start_ms, new_end_ms)
        self._check_overlap(ann.track_id, new_start_ms, new_end_ms,
                            ignore_id=annotation_id)
        updated = replace(ann, start_ms=new_start_ms, end_ms=new_end_ms,
                          updated_at=_now())
        self.annotations[self.annotations.index(ann)] = updated
        self.revision += 1
        return updated

    def delete_label(self, annotation_id: str) -> Annotation:
        ann = self.get(annotation_id)
        self.annotations.remove(ann)
        self.revision += 1
        return ann

    def total_labeled_ms(self) -> int:
        return sum(a.duration_ms for a in self.annotations)


def validate_set(aset: AnnotationSet) -> list[str]:
    """Every invariant violation as a human-readable string; [] iff consistent."""
    violations: list[str] = []
    allowed = {t.track_id: t.allowed_classes for t in aset.layout.tracks}

    for ann in aset.annotations:
        if not (0 <= ann.start_ms < ann.end_ms):
            violations.append(f"{ann.id}: invalid interval [{ann.start_ms}, {ann.end_ms})")
        if aset.duration_ms is not None and ann.end_ms > aset.duration_ms:
            violations.append(
                f"{ann.id}: end {ann.end_ms} beyond recording duration {aset.duration_ms}"
            )
        if ann.label_class not in allowed.get(ann.track_id, frozenset()):
            violations.append(
                f"{ann.id}: class {ann.label_class.value} not allowed on track {ann.track_id}"
            )

    by_track: dict[int, list[Annotation]] = {}
    for ann in aset.annotations:
        by_track.setdefault(ann.track_id, []).append(ann)
    for track_id, anns in by_track.items():
        anns.sort(key=lambda a: (a.start_ms, a.end_ms))
        for prev, cur in zip(anns, anns[1:]):
            if cur.start_ms < prev.end_ms:
                violations.append(
                    f"overlap on track {track_id}: {prev.id} and {cur.id}"
                )
    return violations
