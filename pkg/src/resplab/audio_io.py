"""WAV decoding, fixed-length segmentation and sample windowing.

The parser reads RIFF/WAVE containers with integer PCM data (8/16/24/32
bit, 1-2 channels, any sample rate). Samples are normalized to
[-1.0, +1.0] and mixed down to mono. Export is always 16-bit PCM
little-endian.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyAudio, MalformedContainer, OutOfRange, UnsupportedEncoding

WAVE_FORMAT_PCM = 1

_SUPPORTED_BIT_DEPTHS = (8, 16, 24, 32)


@dataclass(frozen=True)
class Recording:
    """Decoded mono audio plus its provenance."""

    id: str
    source_path: str
    sample_rate: int
    bit_depth: int
    channels: int
    duration_ms: int
    samples: np.ndarray = field(repr=False, compare=False)

    @property
    def sample_count(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class SegmentRef:
    """One fixed-length analysis segment of a recording."""

    recording_id: str
    index: int
    start_ms: int
    end_ms: int


def _read_chunks(data: bytes):
    """Yield (chunk_id, payload) for every top-level RIFF chunk."""
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        payload = data[pos + 8:pos + 8 + size]
        if len(payload) < size:
            raise MalformedContainer(
                f"chunk {cid!r} declares {size} bytes but only {len(payload)} remain"
            )
        yield cid, payload
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def _decode_pcm(raw: bytes, bit_depth: int, channels: int) -> np.ndarray:
    """Decode interleaved integer PCM to a float64 mono signal in [-1, 1]."""
    bytes_per_sample = bit_depth // 8
    frame_size = bytes_per_sample * channels
    usable = len(raw) - len(raw) % frame_size
    raw = raw[:usable]

    if bit_depth == 8:
        # 8-bit WAV PCM is unsigned with a 128 midpoint
        values = np.frombuffer(raw, dtype=np.uint8).astype(np.int32) - 128
    elif bit_depth == 16:
        values = np.frombuffer(raw, dtype="<i2").astype(np.int32)
    elif bit_depth == 24:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3)
        values = (
            b[:, 0].astype(np.int32)
            | (b[:, 1].astype(np.int32) << 8)
            | (b[:, 2].astype(np.int32) << 16)
        )
        values = np.where(values >= 1 << 23, values - (1 << 24), values)
    else:  # 32
        values = np.frombuffer(raw, dtype="<i4").astype(np.int64)

    scale = float(1 << (bit_depth - 1))
    mono = values.reshape(-1, channels).mean(axis=1)
    return mono / scale


def load_recording(path: str | Path, recording_id: str | None = None) -> Recording:
    """Decode a WAV file into a normalized mono Recording.

    Raises MalformedContainer, UnsupportedEncoding or EmptyAudio.
    """
    path = Path(path)
    data = path.read_bytes()

    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedContainer(f"{path}: not a RIFF/WAVE file")

    fmt = None
    pcm_bytes = None
    for cid, payload in _read_chunks(data):
        if cid == b"fmt " and fmt is None:
            if len(payload) < 16:
                raise MalformedContainer(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", payload, 0)
        elif cid == b"data" and pcm_bytes is None:
            pcm_bytes = payload

    if fmt is None:
        raise MalformedContainer(f"{path}: missing fmt chunk")
    if pcm_bytes is None:
        raise MalformedContainer(f"{path}: missing data chunk")

    audio_format, channels, sample_rate, _, _, bit_depth = fmt
    if audio_format != WAVE_FORMAT_PCM:
        raise UnsupportedEncoding(
            f"{path}: format tag {audio_format}, only integer PCM is supported"
        )
    if bit_depth not in _SUPPORTED_BIT_DEPTHS:
        raise UnsupportedEncoding(f"{path}: unsupported bit depth {bit_depth}")
    if channels < 1:
        raise MalformedContainer(f"{path}: channel count {channels}")
    if sample_rate <= 0:
        raise MalformedContainer(f"{path}: sample rate {sample_rate}")

    samples = _decode_pcm(pcm_bytes, bit_depth, channels)
    if len(samples) == 0:
        raise EmptyAudio(f"{path}: no samples")

    samples.setflags(write=False)
    return Recording(
        id=recording_id if recording_id is not None else path.stem,
        source_path=str(path),
        sample_rate=sample_rate,
        bit_depth=bit_depth,
        channels=channels,
        duration_ms=1000 * len(samples) // sample_rate,
        samples=samples,
    )


def truncate_segments(rec: Recording, segment_length_ms: int = 15000) -> list[SegmentRef]:
    """Split a recording into contiguous fixed-length segments.

    The trailing remainder shorter than ``segment_length_ms`` is discarded;
    a recording shorter than one segment yields an empty list.
    """
    if segment_length_ms <= 0:
        raise ValueError("segment_length_ms must be positive")
    n = rec.duration_ms // segment_length_ms
    return [
        SegmentRef(
            recording_id=rec.id,
            index=i,
            start_ms=i * segment_length_ms,
            end_ms=(i + 1) * segment_length_ms,
        )
        for i in range(n)
    ]


def sample_window(rec: Recording, start_ms: int, end_ms: int) -> np.ndarray:
    """Samples with indices [floor(start_ms*fs/1000), floor(end_ms*fs/1000))."""
    if not (0 <= start_ms < end_ms <= rec.duration_ms):
        raise OutOfRange(
            f"window [{start_ms}, {end_ms}) outside [0, {rec.duration_ms}]"
        )
    lo = start_ms * rec.sample_rate // 1000
    hi = end_ms * rec.sample_rate // 1000
    return rec.samples[lo:hi]


def write_wav(path: str | Path, samples: np.ndarray, sample_rate: int) -> None:
    """Write a mono float signal in [-1, 1] as 16-bit little-endian PCM."""
    quantized = np.clip(np.round(np.asarray(samples) * 32768.0), -32768, 32767)
    pcm = quantized.astype("<i2").tobytes()
    header = b"".join([
        b"RIFF",
        struct.pack("<I", 36 + len(pcm)),
        b"WAVE",
        b"fmt ",
        struct.pack("<IHHIIHH", 16, WAVE_FORMAT_PCM, 1, sample_rate,
                    sample_rate * 2, 2, 16),
        b"data",
        struct.pack("<I", len(pcm)),
    ])
    Path(path).write_bytes(header + pcm)
