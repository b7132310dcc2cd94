"""STFT magnitude spectrograms in dB with a configurable display floor.

Normalization is 2/sum(window): a full-scale bin-aligned sine peaks at
0 dB, so the floor is read directly as "dB below full scale".
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyTile, IoFailure, TooShort

WINDOW_FUNCTIONS = ("hann", "hamming", "rectangular")


@dataclass(frozen=True)
class SpectrogramParams:
    window_size: int = 256
    hop_size: int = 64
    window_fn: str = "hann"
    floor_db: float = -80.0
    epsilon: float = 1e-12

    def validate(self) -> None:
        if self.window_size <= 0 or self.window_size & (self.window_size - 1):
            raise ValueError(f"window_size must be a power of two, got {self.window_size}")
        if not 0 < self.hop_size <= self.window_size:
            raise ValueError(f"hop_size must be in (0, window_size], got {self.hop_size}")
        if self.window_fn not in WINDOW_FUNCTIONS:
            raise ValueError(f"unknown window function {self.window_fn!r}")
        if self.floor_db >= 0:
            raise ValueError(f"floor_db must be negative, got {self.floor_db}")


@dataclass(frozen=True)
class Spectrogram:
    params: SpectrogramParams
    sample_rate: int
    frame_times_ms: np.ndarray = field(repr=False)
    bin_freqs_hz: np.ndarray = field(repr=False)
    values_db: np.ndarray = field(repr=False)  # [bins x frames]

    @property
    def n_bins(self) -> int:
        return self.values_db.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values_db.shape[1]


def window_coefficients(name: str, size: int) -> np.ndarray:
    if name == "hann":
        return np.hanning(size)
    if name == "hamming":
        return np.hamming(size)
    if name == "rectangular":
        return np.ones(size)
    raise ValueError(f"unknown window function {name!r}")


def frame_count(sample_count: int, window_size: int, hop_size: int) -> int:
    if sample_count < window_size:
        return 0
    return (sample_count - window_size) // hop_size + 1


def compute_spectrogram(
    samples: np.ndarray,
    sample_rate: int,
    params: SpectrogramParams | None = None,
) -> Spectrogram:
    """STFT magnitude in dB, one-sided, clamped at params.floor_db.

    Frame t covers samples [t*hop, t*hop + window); its dB value is
    max(floor_db, 20*log10(2*|X[k]| / sum(w) + epsilon)).
    """
    if params is None:
        params = SpectrogramParams()
    params.validate()

    samples = np.asarray(samples, dtype=np.float64)
    n, hop = params.window_size, params.hop_size
    frames = frame_count(len(samples), n, hop)
    if frames == 0:
        raise TooShort(f"{len(samples)} samples < window of {n}")

    w = window_coefficients(params.window_fn, n)
    starts = np.arange(frames) * hop
    # [frames x window] strided view, windowed, transformed in one batch
    segs = np.lib.stride_tricks.sliding_window_view(samples, n)[starts]
    mags = np.abs(np.fft.rfft(segs * w, axis=1)).T  # [bins x frames]

    db = 20.0 * np.log10(2.0 * mags / w.sum() + params.epsilon)
    np.maximum(db, params.floor_db, out=db)

    return Spectrogram(
        params=params,
        sample_rate=sample_rate,
        frame_times_ms=starts * 1000.0 / sample_rate,
        bin_freqs_hz=np.arange(n // 2 + 1) * sample_rate / n,
        values_db=db,
    )


def render_tile(
    spec: Spectrogram,
    t0_ms: float,
    t1_ms: float,
    f0_hz: float,
    f1_hz: float,
) -> np.ndarray:
    """Sub-matrix of values_db for frame times in [t0, t1) and bin
    frequencies in [f0, f1). Rows ascend in frequency, columns in time."""
    cols = np.flatnonzero((spec.frame_times_ms >= t0_ms) & (spec.frame_times_ms < t1_ms))
    rows = np.flatnonzero((spec.bin_freqs_hz >= f0_hz) & (spec.bin_freqs_hz < f1_hz))
    if len(cols) == 0 or len(rows) == 0:
        raise EmptyTile(
            f"tile [{t0_ms},{t1_ms})ms x [{f0_hz},{f1_hz})Hz misses the spectrogram"
        )
    return spec.values_db[np.ix_(rows, cols)]


def to_graymap(values_db: np.ndarray, floor_db: float) -> np.ndarray:
    """Map dB values to uint8 pixels: floor_db -> 0, 0 dB -> 255, linear."""
    scaled = (values_db - floor_db) / (0.0 - floor_db) * 255.0
    return np.clip(np.round(scaled), 0, 255).astype(np.uint8)


def encode_pgm(pixels: np.ndarray) -> bytes:
    """Binary 8-bit portable graymap (P5)."""
    rows, cols = pixels.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + pixels.tobytes()


def export_matrix(spec: Spectrogram, path: str | Path) -> None:
    """Write the dB matrix to disk.

    ``.pgm`` paths get an 8-bit graymap (0 = floor_db, 255 = 0 dB);
    anything else gets CSV with a leading parameter header line, one row
    per bin, 6 decimal places.
    """
    path = Path(path)
    try:
        if path.suffix.lower() == ".pgm":
            path.write_bytes(encode_pgm(to_graymap(spec.values_db, spec.params.floor_db)))
            return
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            p = spec.params
            writer.writerow([
                f"window_size={p.window_size}", f"hop_size={p.hop_size}",
                f"window_fn={p.window_fn}", f"floor_db={p.floor_db}",
                f"sample_rate={spec.sample_rate}",
            ])
            for row in spec.values_db:
                writer.writerow([f"{v:.6f}" for v in row])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
