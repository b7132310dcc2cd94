"""On-disk state: config, label snapshots, autosave journal, gold store.

Label state for one (recording, user) pair is a snapshot JSON file plus
an append-only journal of edits (`<snapshot>.journal`, one JSON event
per newline-terminated line). Autosave appends to the journal; taking a
new snapshot compacts it. Recovery replays the journal on top of the
snapshot, dropping a partially-written trailing line.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .annotations import (
    Annotation,
    AnnotationSet,
    LabelClass,
    Track,
    TrackLayout,
    default_layout,
    validate_set,
)
from .audio_io import Recording, sample_window, write_wav
from .errors import (
    CorruptJournal,
    InvalidUserId,
    IoFailure,
    OutOfRange,
    SchemaViolation,
    SequenceGap,
)
from .spectrogram import SpectrogramParams

SNAPSHOT_VERSION = 1

DEFAULT_CLASS_STYLES = {
    "normal": {"color": "#9e9e9e", "hotkey": "n"},
    "inspiration": {"color": "#1f77b4", "hotkey": "i"},
    "expiration": {"color": "#17becf", "hotkey": "e"},
    "wheeze": {"color": "#d62728", "hotkey": "w"},
    "stridor": {"color": "#e377c2", "hotkey": "s"},
    "rhonchus": {"color": "#ff7f0e", "hotkey": "r"},
    "discontinuous": {"color": "#2ca02c", "hotkey": "d"},
    "nbc": {"color": "#8c564b", "hotkey": "b"},
    "continuous": {"color": "#bcbd22", "hotkey": "c"},
    "noise": {"color": "#7f7f7f", "hotkey": "x"},
}

_USER_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


# ---------------------------------------------------------------- config

@dataclass
class Config:
    stft: SpectrogramParams = field(default_factory=SpectrogramParams)
    layout: TrackLayout = field(default_factory=default_layout)
    class_styles: dict = field(default_factory=lambda: {
        k: dict(v) for k, v in DEFAULT_CLASS_STYLES.items()
    })
    autosave_interval_ms: int = 2000
    data_root: str = "."
    segment_length_ms: int = 15000
    extra: dict = field(default_factory=dict)  # unknown keys, kept on round trip


def _check_styles(styles: dict) -> None:
    by_hotkey: dict[str, str] = {}
    for cls, style in styles.items():
        if cls not in {c.value for c in LabelClass}:
            raise SchemaViolation(f"unknown class {cls!r} in class_styles",
                                  field_path=f"class_styles.{cls}")
        hotkey = style.get("hotkey")
        if hotkey is not None:
            if len(hotkey) != 1:
                raise SchemaViolation(f"hotkey for {cls} must be one character",
                                      field_path=f"class_styles.{cls}.hotkey")
            if hotkey in by_hotkey:
                raise SchemaViolation(
                    f"hotkey {hotkey!r} bound to both {by_hotkey[hotkey]} and {cls}",
                    field_path=f"class_styles.{cls}.hotkey")
            by_hotkey[hotkey] = cls


def _layout_from_json(raw) -> TrackLayout:
    try:
        tracks = tuple(
            Track(
                track_id=int(t["track_id"]),
                name=str(t["name"]),
                allowed_classes=frozenset(LabelClass(c) for c in t["allowed_classes"]),
            )
            for t in raw
        )
        return TrackLayout(tracks=tracks)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(f"bad track layout: {exc}", field_path="layout") from exc


def _layout_to_json(layout: TrackLayout) -> list:
    return [
        {
            "track_id": t.track_id,
            "name": t.name,
            "allowed_classes": sorted(c.value for c in t.allowed_classes),
        }
        for t in layout.tracks
    ]


_CONFIG_KEYS = {"stft", "layout", "class_styles", "autosave_interval_ms",
                "data_root", "segment_length_ms"}


def load_config(path: str | Path) -> Config:
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaViolation(f"{path}: top level must be an object")

    cfg = Config()
    if "stft" in raw:
        s = raw["stft"]
        defaults = SpectrogramParams()
        try:
            cfg.stft = SpectrogramParams(
                window_size=int(s.get("window_size", defaults.window_size)),
                hop_size=int(s.get("hop_size", defaults.hop_size)),
                window_fn=str(s.get("window_fn", defaults.window_fn)),
                floor_db=float(s.get("floor_db", defaults.floor_db)),
                epsilon=float(s.get("epsilon", defaults.epsilon)),
            )
            cfg.stft.validate()
        except (TypeError, ValueError, AttributeError) as exc:
            raise SchemaViolation(f"bad stft block: {exc}", field_path="stft") from exc
    if "layout" in raw:
        cfg.layout = _layout_from_json(raw["layout"])
    if "class_styles" in raw:
        merged = {k: dict(v) for k, v in DEFAULT_CLASS_STYLES.items()}
        for cls, style in raw["class_styles"].items():
            merged.setdefault(cls, {}).update(style)
        _check_styles(merged)
        cfg.class_styles = merged
    if "autosave_interval_ms" in raw:
        cfg.autosave_interval_ms = int(raw["autosave_interval_ms"])
        if cfg.autosave_interval_ms < 100:
            raise SchemaViolation("autosave_interval_ms must be >= 100",
                                  field_path="autosave_interval_ms")
    if "data_root" in raw:
        cfg.data_root = str(raw["data_root"])
    if "segment_length_ms" in raw:
        cfg.segment_length_ms = int(raw["segment_length_ms"])
        if cfg.segment_length_ms <= 0:
            raise SchemaViolation("segment_length_ms must be positive",
                                  field_path="segment_length_ms")
    cfg.extra = {k: v for k, v in raw.items() if k not in _CONFIG_KEYS}
    return cfg


def save_config(cfg: Config, path: str | Path) -> None:
    doc = dict(cfg.extra)
    doc.update({
        "stft": {
            "window_size": cfg.stft.window_size,
            "hop_size": cfg.stft.hop_size,
            "window_fn": cfg.stft.window_fn,
            "floor_db": cfg.stft.floor_db,
            "epsilon": cfg.stft.epsilon,
        },
        "layout": _layout_to_json(cfg.layout),
        "class_styles": cfg.class_styles,
        "autosave_interval_ms": cfg.autosave_interval_ms,
        "data_root": cfg.data_root,
        "segment_length_ms": cfg.segment_length_ms,
    })
    try:
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", "utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# ------------------------------------------------------------- timestamps

def _ts_to_str(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _ts_from_str(raw: str) -> datetime:
    return datetime.fromisoformat(raw.replace("Z", "+00:00"))


# ---------------------------------------------------------------- journal

@dataclass(frozen=True)
class JournalEvent:
    seq: int
    op: str  # add | resize | delete
    payload: dict
    at: datetime

    def to_json(self) -> str:
        return json.dumps({
            "seq": self.seq,
            "op": self.op,
            "payload": self.payload,
            "at": _ts_to_str(self.at),
        }, separators=(",", ":"))

    @classmethod
    def from_json(cls, raw: str) -> "JournalEvent":
        doc = json.loads(raw)
        if doc["op"] not in ("add", "resize", "delete"):
            raise ValueError(f"unknown op {doc['op']!r}")
        return cls(seq=int(doc["seq"]), op=doc["op"],
                   payload=doc["payload"], at=_ts_from_str(doc["at"]))


def annotation_to_payload(ann: Annotation) -> dict:
    return {
        "id": ann.id,
        "class": ann.label_class.value,
        "track": ann.track_id,
        "start_ms": ann.start_ms,
        "end_ms": ann.end_ms,
        "annotator": ann.annotator,
        "created_at": _ts_to_str(ann.created_at),
        "updated_at": _ts_to_str(ann.updated_at),
    }


def annotation_from_payload(doc: dict) -> Annotation:
    try:
        return Annotation(
            id=str(doc["id"]),
            label_class=LabelClass(doc["class"]),
            track_id=int(doc["track"]),
            start_ms=int(doc["start_ms"]),
            end_ms=int(doc["end_ms"]),
            annotator=str(doc.get("annotator", "")),
            created_at=_ts_from_str(doc["created_at"]),
            updated_at=_ts_from_str(doc["updated_at"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(f"bad annotation record: {exc}") from exc


class Journal:
    """Append-only event log for one (recording, user) label file."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.last_seq = 0
        if self.path.exists():
            for ev in read_journal_events(self.path):
                self.last_seq = ev.seq

    def append_event(self, ev: JournalEvent) -> None:
        """Durably append one event; seq must continue the journal."""
        if ev.seq != self.last_seq + 1:
            raise SequenceGap(f"expected seq {self.last_seq + 1}, got {ev.seq}")
        line = ev.to_json() + "\n"
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise IoFailure(f"cannot append to {self.path}: {exc}") from exc
        self.last_seq = ev.seq

    def reset(self) -> None:
        """Drop all events (snapshot compaction)."""
        try:
            if self.path.exists():
                self.path.unlink()
        except OSError as exc:
            raise IoFailure(f"cannot reset {self.path}: {exc}") from exc
        self.last_seq = 0


def read_journal_events(path: str | Path) -> list[JournalEvent]:
    """Parse a journal file; a trailing unterminated line is discarded.

    A malformed terminated line or a sequence gap means real corruption,
    not a crash artifact, and raises CorruptJournal.
    """
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError:
        return []
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    events: list[JournalEvent] = []
    for line in data.split(b"\n")[:-1]:  # only newline-terminated lines count
        if not line.strip():
            continue
        try:
            events.append(JournalEvent.from_json(line.decode("utf-8")))
        except (ValueError, KeyError, UnicodeDecodeError) as exc:
            raise CorruptJournal(f"{path}: malformed line: {exc}") from exc
    for i, ev in enumerate(events):
        if ev.seq != (events[i - 1].seq + 1 if i else events[0].seq):
            raise CorruptJournal(f"{path}: sequence gap at seq {ev.seq}")
    return events


def apply_event(aset: AnnotationSet, ev: JournalEvent) -> None:
    """Apply one replayed event; payloads carry post-op annotation state."""
    if ev.op == "add":
        aset.annotations.append(annotation_from_payload(ev.payload))
    elif ev.op == "resize":
        updated = annotation_from_payload(ev.payload)
        for i, ann in enumerate(aset.annotations):
            if ann.id == updated.id:
                aset.annotations[i] = updated
                break
        else:
            raise CorruptJournal(f"resize of unknown annotation {updated.id}")
    elif ev.op == "delete":
        target = ev.payload.get("id")
        before = len(aset.annotations)
        aset.annotations = [a for a in aset.annotations if a.id != target]
        if len(aset.annotations) == before:
            raise CorruptJournal(f"delete of unknown annotation {target}")
    else:
        raise CorruptJournal(f"unknown op {ev.op!r}")
    aset.revision += 1


def replay_journal(path: str | Path, base: AnnotationSet | None = None) -> AnnotationSet:
    """Journal events applied in order on top of ``base`` (or an empty set)."""
    aset = base if base is not None else AnnotationSet(recording_id="", annotator="")
    events = read_journal_events(path)
    if events and events[0].seq != 1:
        raise CorruptJournal(f"{path}: first event has seq {events[0].seq}, expected 1")
    for ev in events:
        apply_event(aset, ev)
    violations = validate_set(aset)
    if violations:
        raise CorruptJournal(f"{path}: replayed state is inconsistent: {violations}")
    return aset


# --------------------------------------------------------------- snapshots

def label_file_path(data_root: str | Path, recording_id: str, user_id: str) -> Path:
    return Path(data_root) / "labels" / recording_id / f"{user_id}.labels.json"


def journal_path_for(snapshot_path: str | Path) -> Path:
    return Path(str(snapshot_path) + ".journal")


def snapshot_labels(aset: AnnotationSet, path: str | Path) -> None:
    """Write the full set and compact (reset) the sibling journal."""
    doc = {
        "version": SNAPSHOT_VERSION,
        "recording_id": aset.recording_id,
        "annotator": aset.annotator,
        "revision": aset.revision,
        "labels": [annotation_to_payload(a) for a in aset.annotations],
    }
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, indent=1) + "\n", "utf-8")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    Journal(journal_path_for(path)).reset()


def load_snapshot(path: str | Path) -> AnnotationSet:
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path} is not valid JSON: {exc}") from exc
    if raw.get("version") != SNAPSHOT_VERSION:
        raise SchemaViolation(f"{path}: unsupported version {raw.get('version')}",
                              field_path="version")
    try:
        aset = AnnotationSet(
            recording_id=str(raw["recording_id"]),
            annotator=str(raw["annotator"]),
            revision=int(raw["revision"]),
            annotations=[annotation_from_payload(l) for l in raw["labels"]],
        )
    except (KeyError, TypeError) as exc:
        raise SchemaViolation(f"{path}: missing field {exc}") from exc
    return aset


def load_labels(path: str | Path) -> AnnotationSet:
    """Snapshot plus journal replay; missing files mean an empty set."""
    path = Path(path)
    if path.exists():
        aset = load_snapshot(path)
    else:
        aset = AnnotationSet(recording_id="", annotator="")
    jpath = journal_path_for(path)
    if jpath.exists():
        events = read_journal_events(jpath)
        if events and events[0].seq != 1:
            raise CorruptJournal(
                f"{jpath}: first event has seq {events[0].seq}, expected 1")
        for ev in events:
            apply_event(aset, ev)
    violations = validate_set(aset)
    if violations:
        raise SchemaViolation(f"{path}: inconsistent label state: {violations}")
    return aset


# --------------------------------------------------------------- lock file

class ExclusiveLock:
    """Best-effort single-writer lock via O_EXCL lock file creation."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fd: int | None = None

    def __enter__(self) -> "ExclusiveLock":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError as exc:
            raise IoFailure(f"lock {self.path} is held") from exc
        return self

    def __exit__(self, *exc_info) -> None:
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None
        try:
            self.path.unlink()
        except FileNotFoundError:
            pass


# ------------------------------------------------------------- gold store

@dataclass(frozen=True)
class GoldStandardEntry:
    clip_id: str
    recording_id: str
    start_ms: int
    end_ms: int
    label_class: LabelClass
    note: str
    stored_by: str


def _gold_index_path(store_root: str | Path) -> Path:
    return Path(store_root) / "goldstandard" / "index.json"


def _read_gold_index(store_root: str | Path) -> list[dict]:
    path = _gold_index_path(store_root)
    if not path.exists():
        return []
    try:
        return json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaViolation(f"bad gold standard index {path}: {exc}") from exc


def store_gold_standard(
    rec: Recording,
    start_ms: int,
    end_ms: int,
    label_class: LabelClass,
    note: str,
    user_id: str,
    store_root: str | Path,
) -> GoldStandardEntry:
    """Copy the interval's audio into the exemplar store and index it."""
    if not (0 <= start_ms < end_ms <= rec.duration_ms):
        raise OutOfRange(f"[{start_ms}, {end_ms}) outside recording of {rec.duration_ms} ms")
    clips_dir = Path(store_root) / "goldstandard" / "clips"
    clips_dir.mkdir(parents=True, exist_ok=True)
    clip_id = f"{rec.id}_{start_ms}_{end_ms}_{label_class.value}"
    with ExclusiveLock(Path(store_root) / "goldstandard" / ".lock"):
        try:
            write_wav(clips_dir / f"{clip_id}.wav",
                      sample_window(rec, start_ms, end_ms), rec.sample_rate)
        except OSError as exc:
            raise IoFailure(f"cannot write clip {clip_id}: {exc}") from exc
        entries = _read_gold_index(store_root)
        entries.append({
            "clip_id": clip_id,
            "recording_id": rec.id,
            "start_ms": start_ms,
            "end_ms": end_ms,
            "class": label_class.value,
            "note": note,
            "stored_by": user_id,
        })
        _gold_index_path(store_root).write_text(
            json.dumps(entries, indent=1) + "\n", "utf-8")
    return GoldStandardEntry(clip_id, rec.id, start_ms, end_ms,
                             label_class, note, user_id)


def list_gold_standard(
    store_root: str | Path,
    label_class: LabelClass | None = None,
) -> list[GoldStandardEntry]:
    entries = []
    for doc in _read_gold_index(store_root):
        entry = GoldStandardEntry(
            clip_id=doc["clip_id"],
            recording_id=doc["recording_id"],
            start_ms=int(doc["start_ms"]),
            end_ms=int(doc["end_ms"]),
            label_class=LabelClass(doc["class"]),
            note=doc.get("note", ""),
            stored_by=doc.get("stored_by", ""),
        )
        if label_class is None or entry.label_class == label_class:
            entries.append(entry)
    return entries


def gold_clip_path(store_root: str | Path, clip_id: str) -> Path:
    return Path(store_root) / "goldstandard" / "clips" / f"{clip_id}.wav"


# ------------------------------------------------------------ user registry

def resolve_user(user_id: str, store_root: str | Path) -> dict:
    """Look up or create a user record; ids must be path-safe."""
    if not user_id or not _USER_ID_RE.match(user_id):
        raise InvalidUserId(f"invalid user id {user_id!r}")
    path = Path(store_root) / "users.json"
    users = {}
    if path.exists():
        users = json.loads(path.read_text("utf-8"))
    if user_id not in users:
        users[user_id] = {
            "user_id": user_id,
            "created_at": _ts_to_str(datetime.now(timezone.utc)),
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(users, indent=1) + "\n", "utf-8")
    return users[user_id]
