"""HTTP API tying audio, spectrogram, labels and the gold store together.

State layout under the data root:
    *.wav                         recordings (recursively discovered)
    labels/<rec>/<user>.labels.json[.journal]
    labels/<rec>/<user>.finalized marker set via the finalize endpoint
    goldstandard/{index.json, clips/*.wav}
    users.json

Label writes use optimistic concurrency: full PUTs carry the base
revision, autosave events carry contiguous journal sequence numbers.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query, Request, Response
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import persistence
from .annotations import AnnotationSet, LabelClass, validate_set
from .audio_io import Recording, load_recording
from .errors import (
    CorruptJournal,
    EmptyTile,
    InvalidUserId,
    OutOfRange,
    ResplabError,
    SchemaViolation,
    SequenceGap,
)
from .persistence import (
    Config,
    Journal,
    JournalEvent,
    annotation_from_payload,
    journal_path_for,
    label_file_path,
    load_labels,
    read_journal_events,
    snapshot_labels,
)
from .spectrogram import (
    Spectrogram,
    SpectrogramParams,
    compute_spectrogram,
    encode_pgm,
    render_tile,
    to_graymap,
)


def _recording_id_for(root: Path, wav: Path) -> str:
    return wav.relative_to(root).with_suffix("").as_posix().replace("/", "__")


@dataclass
class _CacheEntry:
    mtime: float
    recording: Recording


class Workspace:
    """Data-root state shared by all requests."""

    def __init__(self, root: str | Path, config: Config | None = None):
        self.root = Path(root)
        self.config = config or Config()
        self._recordings: dict[str, _CacheEntry] = {}
        self._spectrograms: dict[tuple, Spectrogram] = {}
        self._locks: dict[tuple[str, str], threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def wav_paths(self) -> dict[str, Path]:
        paths = {}
        for wav in sorted(self.root.rglob("*.wav")):
            if "goldstandard" in wav.parts:
                continue
            paths[_recording_id_for(self.root, wav)] = wav
        return paths

    def recording(self, recording_id: str) -> Recording:
        path = self.wav_paths().get(recording_id)
        if path is None:
            raise HTTPException(404, f"unknown recording {recording_id}")
        mtime = path.stat().st_mtime
        cached = self._recordings.get(recording_id)
        if cached is None or cached.mtime != mtime:
            rec = load_recording(path, recording_id=recording_id)
            cached = _CacheEntry(mtime=mtime, recording=rec)
            self._recordings[recording_id] = cached
        return cached.recording

    def spectrogram(self, recording_id: str, params: SpectrogramParams) -> Spectrogram:
        rec = self.recording(recording_id)
        key = (recording_id, params)
        if key not in self._spectrograms:
            self._spectrograms[key] = compute_spectrogram(
                rec.samples, rec.sample_rate, params)
        return self._spectrograms[key]

    def mutation_lock(self, recording_id: str, user: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault((recording_id, user), threading.Lock())

    def label_path(self, recording_id: str, user: str) -> Path:
        return label_file_path(self.root, recording_id, user)

    def labels(self, recording_id: str, user: str) -> AnnotationSet:
        rec = self.recording(recording_id)
        aset = load_labels(self.label_path(recording_id, user))
        aset.recording_id = recording_id
        aset.annotator = user
        aset.duration_ms = rec.duration_ms
        return aset

    def status(self, recording_id: str, user: str) -> str:
        base = self.label_path(recording_id, user)
        if base.with_name(f"{user}.finalized").exists():
            return "finalized"
        jpath = journal_path_for(base)
        if jpath.exists() and read_journal_events(jpath):
            return "in_progress"
        if base.exists():
            aset = persistence.load_snapshot(base)
            return "in_progress" if aset.annotations or aset.revision else "unlabeled"
        return "unlabeled"


def _set_to_json(aset: AnnotationSet) -> dict:
    return {
        "version": persistence.SNAPSHOT_VERSION,
        "recording_id": aset.recording_id,
        "annotator": aset.annotator,
        "revision": aset.revision,
        "labels": [persistence.annotation_to_payload(a) for a in aset.annotations],
    }


def _check_user(user: str) -> str:
    if not user or not persistence._USER_ID_RE.match(user):
        raise HTTPException(400, f"invalid user id {user!r}")
    return user


def create_app(root: str | Path, config: Config | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    ws = Workspace(root, config)
    app = FastAPI(title="resplab", version="0.1.0")
    app.state.workspace = ws

    @app.exception_handler(ResplabError)
    async def _domain_error(request: Request, exc: ResplabError):
        status = 422 if isinstance(exc, (SchemaViolation, OutOfRange)) else 500
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.get("/api/config")
    def get_config():
        cfg = ws.config
        return {
            "stft": {
                "window_size": cfg.stft.window_size,
                "hop_size": cfg.stft.hop_size,
                "window_fn": cfg.stft.window_fn,
                "floor_db": cfg.stft.floor_db,
            },
            "layout": persistence._layout_to_json(cfg.layout),
            "class_styles": cfg.class_styles,
            "autosave_interval_ms": cfg.autosave_interval_ms,
            "segment_length_ms": cfg.segment_length_ms,
        }

    @app.get("/api/files")
    def list_files(user: str = Query(default="")):
        entries = []
        for rec_id, path in ws.wav_paths().items():
            try:
                rec = ws.recording(rec_id)
            except ResplabError:
                continue  # undecodable files are not listed
            entry = {
                "recording_id": rec_id,
                "name": path.name,
                "duration_ms": rec.duration_ms,
                "sample_rate": rec.sample_rate,
            }
            if user:
                _check_user(user)
                aset = ws.labels(rec_id, user)
                counts: dict[str, int] = {}
                for ann in aset.annotations:
                    counts[ann.label_class.value] = counts.get(ann.label_class.value, 0) + 1
                entry["status"] = ws.status(rec_id, user)
                entry["label_counts"] = counts
                entry["revision"] = aset.revision
            entries.append(entry)
        return entries

    @app.post("/api/files", status_code=201)
    async def upload_file(request: Request, name: str = Query(...)):
        safe = Path(name).name
        if not safe.endswith(".wav"):
            raise HTTPException(400, "only .wav uploads are accepted")
        body = await request.body()
        target = ws.root / safe
        target.write_bytes(body)
        try:
            rec = load_recording(target)
        except ResplabError as exc:
            target.unlink()
            raise HTTPException(422, f"not a decodable WAV: {exc}")
        rec_id = _recording_id_for(ws.root, target)
        return {"recording_id": rec_id, "duration_ms": rec.duration_ms}

    @app.get("/api/files/{recording_id}/audio")
    def get_audio(recording_id: str):
        path = ws.wav_paths().get(recording_id)
        if path is None:
            raise HTTPException(404, f"unknown recording {recording_id}")
        return FileResponse(path, media_type="audio/wav")

    @app.get("/api/files/{recording_id}/spectrogram")
    def get_tile(
        recording_id: str,
        win: int = Query(default=256),
        hop: int = Query(default=64),
        window_fn: str = Query(default="hann"),
        floor_db: float = Query(default=-80.0),
        t0: float | None = Query(default=None),
        t1: float | None = Query(default=None),
        f0: float | None = Query(default=None),
        f1: float | None = Query(default=None),
    ):
        rec = ws.recording(recording_id)
        try:
            params = SpectrogramParams(window_size=win, hop_size=hop,
                                       window_fn=window_fn, floor_db=floor_db)
            params.validate()
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        spec = ws.spectrogram(recording_id, params)
        t0 = 0.0 if t0 is None else t0
        t1 = float(rec.duration_ms) + 1 if t1 is None else t1
        f0 = 0.0 if f0 is None else f0
        f1 = rec.sample_rate / 2 + 1 if f1 is None else f1
        try:
            tile = render_tile(spec, t0, t1, f0, f1)
        except EmptyTile as exc:
            raise HTTPException(400, str(exc))
        pgm = encode_pgm(to_graymap(tile[::-1], params.floor_db))
        headers = {
            "X-Bins": str(tile.shape[0]),
            "X-Frames": str(tile.shape[1]),
            "X-Db-Min": str(params.floor_db),
            "X-Db-Max": "0.0",
            "X-Hop-Ms": str(1000.0 * hop / rec.sample_rate),
        }
        return Response(content=pgm, media_type="image/x-portable-graymap",
                        headers=headers)

    @app.get("/api/files/{recording_id}/labels")
    def get_labels(recording_id: str, user: str = Query(...)):
        _check_user(user)
        doc = _set_to_json(ws.labels(recording_id, user))
        journal = Journal(journal_path_for(ws.label_path(recording_id, user)))
        doc["last_seq"] = journal.last_seq
        return doc

    @app.put("/api/files/{recording_id}/labels")
    def put_labels(recording_id: str, user: str = Query(...), body: dict = Body(...)):
        _check_user(user)
        with ws.mutation_lock(recording_id, user):
            current = ws.labels(recording_id, user)
            base = body.get("base_revision")
            if base is None or int(base) != current.revision:
                raise HTTPException(
                    409, f"base revision {base} != stored revision {current.revision}")
            try:
                annotations = [annotation_from_payload(l)
                               for l in body.get("labels", [])]
            except SchemaViolation as exc:
                raise HTTPException(422, str(exc))
            candidate = AnnotationSet(
                recording_id=recording_id,
                annotator=user,
                layout=ws.config.layout,
                annotations=annotations,
                revision=current.revision + 1,
                duration_ms=ws.recording(recording_id).duration_ms,
            )
            violations = validate_set(candidate)
            if violations:
                raise HTTPException(422, detail={"violations": violations})
            snapshot_labels(candidate, ws.label_path(recording_id, user))
            return {"revision": candidate.revision}

    @app.post("/api/files/{recording_id}/labels/events")
    def post_autosave_events(recording_id: str, user: str = Query(...),
                             body: dict = Body(...)):
        _check_user(user)
        raw_events = body.get("events")
        if not isinstance(raw_events, list):
            raise HTTPException(422, "body must carry an events list")
        with ws.mutation_lock(recording_id, user):
            journal = Journal(journal_path_for(ws.label_path(recording_id, user)))
            events = []
            for raw in raw_events:
                try:
                    ev = JournalEvent(
                        seq=int(raw["seq"]), op=str(raw["op"]),
                        payload=raw["payload"],
                        at=persistence._ts_from_str(raw["at"]),
                    )
                    if ev.op not in ("add", "resize", "delete"):
                        raise ValueError(f"unknown op {ev.op!r}")
                except (KeyError, TypeError, ValueError) as exc:
                    raise HTTPException(422, f"malformed event: {exc}")
                if ev.seq <= journal.last_seq:
                    continue  # idempotent resend
                events.append(ev)
            if events and events[0].seq != journal.last_seq + 1:
                raise HTTPException(
                    409, f"expected seq {journal.last_seq + 1}, got {events[0].seq}")
            # dry-run on the current state so a bad batch never hits the journal
            trial = ws.labels(recording_id, user)
            try:
                for ev in events:
                    persistence.apply_event(trial, ev)
            except (CorruptJournal, SchemaViolation, KeyError, ValueError) as exc:
                raise HTTPException(422, f"inconsistent event batch: {exc}")
            violations = validate_set(trial)
            if violations:
                raise HTTPException(422, detail={"violations": violations})
            appended = 0
            for ev in events:
                try:
                    journal.append_event(ev)
                except SequenceGap as exc:
                    raise HTTPException(409, str(exc))
                appended += 1
            return {"last_seq": journal.last_seq, "appended": appended,
                    "revision": trial.revision}

    @app.post("/api/files/{recording_id}/labels/finalize")
    def finalize_labels(recording_id: str, user: str = Query(...)):
        _check_user(user)
        with ws.mutation_lock(recording_id, user):
            aset = ws.labels(recording_id, user)
            snapshot_labels(aset, ws.label_path(recording_id, user))
            marker = ws.label_path(recording_id, user).with_name(f"{user}.finalized")
            marker.touch()
        return {"status": "finalized", "revision": aset.revision}

    @app.get("/api/goldstandard")
    def gold_list(label_class: str | None = Query(default=None, alias="class")):
        cls = None
        if label_class is not None:
            try:
                cls = LabelClass(label_class)
            except ValueError:
                raise HTTPException(400, f"unknown class {label_class!r}")
        entries = persistence.list_gold_standard(ws.root, cls)
        return [
            {
                "clip_id": e.clip_id, "recording_id": e.recording_id,
                "start_ms": e.start_ms, "end_ms": e.end_ms,
                "class": e.label_class.value, "note": e.note,
                "stored_by": e.stored_by,
            }
            for e in entries
        ]

    @app.post("/api/goldstandard", status_code=201)
    def gold_store(body: dict = Body(...)):
        try:
            rec = ws.recording(str(body["recording_id"]))
            cls = LabelClass(body["class"])
            start_ms, end_ms = int(body["start_ms"]), int(body["end_ms"])
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(422, f"bad gold standard request: {exc}")
        user = _check_user(str(body.get("user", "")))
        try:
            entry = persistence.store_gold_standard(
                rec, start_ms, end_ms, cls, str(body.get("note", "")), user, ws.root)
        except OutOfRange as exc:
            raise HTTPException(422, str(exc))
        return {"clip_id": entry.clip_id}

    @app.get("/api/goldstandard/{clip_id}/audio")
    def gold_audio(clip_id: str):
        path = persistence.gold_clip_path(ws.root, Path(clip_id).name)
        if not path.exists():
            raise HTTPException(404, f"no clip {clip_id}")
        return FileResponse(path, media_type="audio/wav")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
