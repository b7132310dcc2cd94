"""Shared test utilities: signal builders, WAV writers and independent
oracles used to cross-check the library implementations."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

# ------------------------------------------------------------ WAV writing


def wav_bytes(samples_int: np.ndarray, sample_rate: int, bit_depth: int = 16,
              channels: int = 1, format_tag: int = 1) -> bytes:
    """Build a WAV file from raw integer sample values (interleaved)."""
    if bit_depth == 8:
        pcm = (np.asarray(samples_int) + 128).astype(np.uint8).tobytes()
    elif bit_depth == 16:
        pcm = np.asarray(samples_int).astype("<i2").tobytes()
    elif bit_depth == 24:
        vals = np.asarray(samples_int).astype(np.int64) & 0xFFFFFF
        b = np.zeros((len(vals), 3), dtype=np.uint8)
        b[:, 0] = vals & 0xFF
        b[:, 1] = (vals >> 8) & 0xFF
        b[:, 2] = (vals >> 16) & 0xFF
        pcm = b.tobytes()
    elif bit_depth == 32:
        pcm = np.asarray(samples_int).astype("<i4").tobytes()
    else:
        raise ValueError(bit_depth)
    block_align = bit_depth // 8 * channels
    return b"".join([
        b"RIFF", struct.pack("<I", 36 + len(pcm)), b"WAVE",
        b"fmt ", struct.pack("<IHHIIHH", 16, format_tag, channels, sample_rate,
                             sample_rate * block_align, block_align, bit_depth),
        b"data", struct.pack("<I", len(pcm)),
    ]) + pcm


def write_wav_file(path: Path, float_samples: np.ndarray, sample_rate: int) -> Path:
    ints = np.clip(np.round(np.asarray(float_samples) * 32767.0), -32768, 32767)
    path.write_bytes(wav_bytes(ints.astype(np.int64), sample_rate))
    return path


def sine(freq_hz: float, duration_s: float, sample_rate: int,
         amplitude: float = 1.0) -> np.ndarray:
    t = np.arange(int(duration_s * sample_rate)) / sample_rate
    return amplitude * np.sin(2 * np.pi * freq_hz * t)


def burst_signal(sample_rate: int, total_s: float,
                 bursts: list[tuple[float, float]], seed: int = 0) -> np.ndarray:
    """Silence with full-scale noise bursts at the given (start_s, end_s)."""
    rng = np.random.default_rng(seed)
    out = np.zeros(int(total_s * sample_rate))
    for start_s, end_s in bursts:
        lo, hi = int(start_s * sample_rate), int(end_s * sample_rate)
        out[lo:hi] = rng.uniform(-0.95, 0.95, hi - lo)
    return out


# ----------------------------------------------------------------- oracles


def naive_dft_magnitudes(samples: np.ndarray, window: np.ndarray,
                         hop: int) -> np.ndarray:
    """One-sided |DFT| per frame straight from the transform definition,
    O(N^2) per frame via an explicit DFT matrix (no FFT)."""
    n = len(window)
    frames = (len(samples) - n) // hop + 1
    k = np.arange(n // 2 + 1)[:, None]
    t = np.arange(n)[None, :]
    dft = np.exp(-2j * np.pi * k * t / n)  # [bins x n]
    mags = np.empty((n // 2 + 1, frames))
    for f in range(frames):
        seg = samples[f * hop: f * hop + n] * window
        mags[:, f] = np.abs(dft @ seg)
    return mags


def segment_counts_oracle(ref: list[tuple[int, int]], pred: list[tuple[int, int]],
                          horizon_ms: int, frame_ms: int) -> tuple[int, int, int]:
    """Frame-by-frame enumeration: walk every frame and test intersection
    against every interval directly."""
    n = (horizon_ms + frame_ms - 1) // frame_ms
    tp = fp = fn = 0
    for i in range(n):
        lo, hi = i * frame_ms, (i + 1) * frame_ms
        r = any(s < hi and e > lo for s, e in ref)
        p = any(s < hi and e > lo for s, e in pred)
        if r and p:
            tp += 1
        elif p:
            fp += 1
        elif r:
            fn += 1
    return tp, fp, fn


def _iou(a, b) -> float:
    inter = min(a[1], b[1]) - max(a[0], b[0])
    if inter <= 0:
        return 0.0
    return inter / (max(a[1], b[1]) - min(a[0], b[0]))


def max_matching_tp(ref: list[tuple[int, int]], pred: list[tuple[int, int]],
                    min_iou: float) -> int:
    """Exhaustive maximum bipartite matching size (feasible for <= ~8 refs)."""
    edges = [
        [pi for pi, p in enumerate(pred) if _iou(r, p) >= min_iou]
        for r in ref
    ]

    def best(ri: int, used: frozenset) -> int:
        if ri == len(edges):
            return 0
        top = best(ri + 1, used)  # leave ref ri unmatched
        for pi in edges[ri]:
            if pi not in used:
                top = max(top, 1 + best(ri + 1, used | {pi}))
        return top

    return best(0, frozenset())


# ------------------------------------------------- Table-shaped corpus

# class -> (label count, exact total duration in ms)
TABLE_CORPUS = {
    "inspiration": (34095, 31_688_400),   # 528.14 min
    "expiration": (18349, 17_571_000),    # 292.85 min
    "wheeze": (8457, 7_183_680),          # 119.73 min after rounding
    "stridor": (686, 567_480),            # 9.46 min after rounding
    "rhonchus": (4740, 3_718_560),        # 61.98 min after rounding
    "discontinuous": (15606, 13_852_200), # 230.87 min
}

TABLE_RECORDING_COUNT = 9765
TABLE_RECORDING_MS = 15000

_CLASS_TRACK = {"inspiration": 0, "expiration": 0, "wheeze": 1,
                "stridor": 1, "rhonchus": 1, "discontinuous": 2}


def exact_durations(count: int, total_ms: int) -> list[int]:
    """Integer durations summing to exactly total_ms."""
    base, extra = divmod(total_ms, count)
    return [base + 1] * extra + [base] * (count - extra)


def generate_table_corpus(out_dir: Path, n_files: int = 100) -> Path:
    """Synthetic label corpus reproducing the reference statistics table."""
    out_dir.mkdir(parents=True, exist_ok=True)
    ts = "2019-10-01T00:00:00Z"

    buckets: list[list[dict]] = [[] for _ in range(n_files)]
    serial = 0
    for cls, (count, total_ms) in TABLE_CORPUS.items():
        for i, dur in enumerate(exact_durations(count, total_ms)):
            buckets[i % n_files].append({
                "class": cls, "dur": dur, "id": f"L{serial:06d}",
            })
            serial += 1

    for fi, labels in enumerate(buckets):
        cursor = {0: 0, 1: 0, 2: 0}  # per-track layout cursor
        records = []
        for lab in labels:
            track = _CLASS_TRACK[lab["class"]]
            start = cursor[track]
            cursor[track] = start + lab["dur"]
            records.append({
                "id": lab["id"], "class": lab["class"], "track": track,
                "start_ms": start, "end_ms": start + lab["dur"],
                "annotator": "synth", "created_at": ts, "updated_at": ts,
            })
        doc = {
            "version": 1,
            "recording_id": f"synthetic_{fi:04d}",
            "annotator": "synth",
            "revision": len(records),
            "labels": records,
        }
        rec_dir = out_dir / f"synthetic_{fi:04d}"
        rec_dir.mkdir(exist_ok=True)
        (rec_dir / "synth.labels.json").write_text(json.dumps(doc))

    manifest = {
        f"rec_{i:05d}": TABLE_RECORDING_MS for i in range(TABLE_RECORDING_COUNT)
    }
    (out_dir / "recordings.json").write_text(json.dumps(manifest))
    return out_dir
