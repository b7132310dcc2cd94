"""Energy-envelope event detector.

A deliberately simple baseline so the label -> evaluate pipeline can run
end to end: band-limit, short-time log-energy envelope, adaptive
median + k*MAD threshold, then run-length cleanup.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve, firwin

from .annotations import LabelClass
from .errors import ConfigInvalid

_LOG_GUARD = 1e-30  # keeps log finite on all-silence frames
_FIR_TAPS = 101     # linear phase; bounds time smearing to ~ half a kernel
_MIN_MARGIN = 0.5   # log10-energy floor when MAD collapses on near-silence


@dataclass(frozen=True)
class DetectorConfig:
    band_low_hz: float = 100.0
    band_high_hz: float = 1800.0
    envelope_window_ms: int = 50
    threshold_k: float = 3.0
    min_event_ms: int = 100
    merge_gap_ms: int = 50
    emit_class: LabelClass = LabelClass.INSPIRATION

    def validate(self, sample_rate: int) -> None:
        nyquist = sample_rate / 2
        if not 0 <= self.band_low_hz < self.band_high_hz <= nyquist:
            raise ConfigInvalid(
                f"band [{self.band_low_hz}, {self.band_high_hz}] Hz invalid "
                f"for Nyquist {nyquist}")
        if self.min_event_ms <= 0:
            raise ConfigInvalid("min_event_ms must be positive")
        if self.envelope_window_ms <= 0:
            raise ConfigInvalid("envelope_window_ms must be positive")
        if self.merge_gap_ms < 0:
            raise ConfigInvalid("merge_gap_ms must be non-negative")


def _bandpass(samples: np.ndarray, sample_rate: int,
              low: float, high: float) -> np.ndarray:
    nyquist = sample_rate / 2
    if low <= 0 and high >= nyquist:
        return samples
    taps = min(_FIR_TAPS, 2 * (len(samples) // 2) - 1)
    if taps < 3:
        return samples
    if low <= 0:
        kernel = firwin(taps, high, fs=sample_rate)
    elif high >= nyquist:
        kernel = firwin(taps, low, fs=sample_rate, pass_zero=False)
    else:
        kernel = firwin(taps, [low, high], fs=sample_rate, pass_zero=False)
    return fftconvolve(samples, kernel, mode="same")


def log_energy_envelope(samples: np.ndarray, sample_rate: int,
                        window_ms: int) -> np.ndarray:
    """Log10 energy of consecutive non-overlapping windows."""
    win = max(1, window_ms * sample_rate // 1000)
    n = len(samples) // win
    if n == 0:
        return np.array([])
    frames = samples[: n * win].reshape(n, win)
    return np.log10(np.sum(frames * frames, axis=1) + _LOG_GUARD)


def detect_events(samples: np.ndarray, sample_rate: int,
                  cfg: DetectorConfig | None = None) -> list[tuple[int, int]]:
    """Intervals (start_ms, end_ms) where band-limited energy is anomalous.

    Input is peak-normalized first, so the result is invariant to any
    positive gain applied to the whole signal.
    """
    cfg = cfg or DetectorConfig()
    cfg.validate(sample_rate)
    samples = np.asarray(samples, dtype=np.float64)
    if len(samples) == 0:
        raise ConfigInvalid("empty input")

    peak = np.max(np.abs(samples))
    if peak == 0:
        return []
    samples = samples / peak

    filtered = _bandpass(samples, sample_rate, cfg.band_low_hz, cfg.band_high_hz)
    envelope = log_energy_envelope(filtered, sample_rate, cfg.envelope_window_ms)
    if len(envelope) == 0:
        return []

    median = np.median(envelope)
    mad = np.median(np.abs(envelope - median))
    active = envelope > median + max(cfg.threshold_k * mad, _MIN_MARGIN)

    win_ms = cfg.envelope_window_ms
    events: list[tuple[int, int]] = []
    start = None
    for i, flag in enumerate(active):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            events.append((start * win_ms, i * win_ms))
            start = None
    if start is not None:
        events.append((start * win_ms, len(active) * win_ms))

    merged: list[tuple[int, int]] = []
    for s, e in events:
        if merged and s - merged[-1][1] < cfg.merge_gap_ms:
            merged[-1] = (merged[-1][0], e)
        else:
            merged.append((s, e))

    return [(s, e) for s, e in merged if e - s >= cfg.min_event_ms]
