"""RIFF/WAVE decoding and min/max peak pyramids for waveform display.

Only uncompressed PCM 16-bit and IEEE float32 are decoded; compressed
codecs are rejected outright rather than half-supported. Peaks are built
over a mono mixdown, since the roll shows a single waveform lane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BASE_BUCKET_SAMPLES = 256
MAX_TOP_LEVEL_BUCKETS = 1024

_FORMAT_PCM = 1
_FORMAT_IEEE_FLOAT = 3


class WavError(ValueError):
    """Raised when WAV bytes cannot be decoded."""


@dataclass(frozen=True, eq=False)
class PcmAudio:
    """Decoded audio: per-channel normalized samples in [-1, 1]."""

    sample_rate: int
    channels: tuple[np.ndarray, ...]

    @property
    def channel_count(self) -> int:
        return len(self.channels)

    @property
    def frame_count(self) -> int:
        return len(self.channels[0]) if self.channels else 0

    @property
    def duration_sec(self) -> float:
        return self.frame_count / self.sample_rate


@dataclass(frozen=True, eq=False)
class PeakLevel:
    bucket_size_samples: int
    mins: np.ndarray
    maxs: np.ndarray

    @property
    def bucket_count(self) -> int:
        return len(self.mins)


@dataclass(frozen=True, eq=False)
class PeakPyramid:
    """Multi-resolution (min, max) summaries of the mono mixdown.

    levels[0] is the finest; each next level halves the bucket count by
    combining neighbor pairs (min of mins, max of maxes).
    """

    levels: tuple[PeakLevel, ...]
    total_samples: int


def parse_wav(data: bytes) -> PcmAudio:
    """Decode a RIFF/WAVE container (PCM16 or float32, mono/stereo)."""
    if len(data) < 12 or data[:4] != b"RIFF":
        raise WavError("not a WAV file: missing RIFF magic")
    if data[8:12] != b"WAVE":
        raise WavError("not a WAV file: missing WAVE form type")

    fmt: tuple[int, int, int, int] | None = None  # code, channels, rate, bits
    offset = 12
    while offset + 8 <= len(data):
        chunk_id = data[offset : offset + 4]
        chunk_len = int.from_bytes(data[offset + 4 : offset + 8], "little")
        body_start = offset + 8
        if chunk_id == b"fmt ":
            if chunk_len < 16 or body_start + 16 > len(data):
                raise WavError("truncated fmt chunk")
            code = int.from_bytes(data[body_start : body_start + 2], "little")
            channels = int.from_bytes(data[body_start + 2 : body_start + 4], "little")
            rate = int.from_bytes(data[body_start + 4 : body_start + 8], "little")
            bits = int.from_bytes(data[body_start + 14 : body_start + 16], "little")
            fmt = (code, channels, rate, bits)
        elif chunk_id == b"data":
            if fmt is None:
                raise WavError("data chunk before fmt chunk")
            if body_start + chunk_len > len(data):
                raise WavError("truncated data chunk")
            return _decode_samples(fmt, data[body_start : body_start + chunk_len])
        # Chunks are word-aligned: odd sizes carry one pad byte.
        offset = body_start + chunk_len + (chunk_len & 1)
    raise WavError("no data chunk found")


def _decode_samples(fmt: tuple[int, int, int, int], body: bytes) -> PcmAudio:
    code, channels, rate, bits = fmt
    if channels not in (1, 2):
        raise WavError(f"unsupported channel count {channels} (mono/stereo only)")
    if rate <= 0:
        raise WavError(f"bad sample rate {rate}")
    if code == _FORMAT_PCM and bits == 16:
        raw = np.frombuffer(body[: len(body) // 2 * 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif code == _FORMAT_IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(body[: len(body) // 4 * 4], dtype="<f4")
        samples = np.clip(raw.astype(np.float64), -1.0, 1.0)
    else:
        raise WavError(f"unsupported codec: format {code}, {bits}-bit")

    frames = len(samples) // channels
    samples = samples[: frames * channels]
    deinterleaved = samples.reshape(frames, channels).T
    return PcmAudio(sample_rate=rate, channels=tuple(np.ascontiguousarray(c) for c in deinterleaved))


def build_peaks(pcm: PcmAudio) -> PeakPyramid:
    """Min/max buckets over the mono mixdown, coarsened until the top level
    has at most 1024 buckets. The last partial bucket is kept."""
    if pcm.frame_count == 0:
        raise ValueError("cannot build peaks over empty audio")
    mono = np.mean(np.vstack(pcm.channels), axis=0)

    mins, maxs = _bucket_min_max(mono, BASE_BUCKET_SAMPLES)
    levels = [PeakLevel(BASE_BUCKET_SAMPLES, mins, maxs)]
    bucket_size = BASE_BUCKET_SAMPLES
    while levels[-1].bucket_count > MAX_TOP_LEVEL_BUCKETS:
        prev = levels[-1]
        pair_count = prev.bucket_count // 2
        mins = np.minimum(prev.mins[0 : 2 * pair_count : 2], prev.mins[1 : 2 * pair_count : 2])
        maxs = np.maximum(prev.maxs[0 : 2 * pair_count : 2], prev.maxs[1 : 2 * pair_count : 2])
        if prev.bucket_count % 2:
            mins = np.append(mins, prev.mins[-1])
            maxs = np.append(maxs, prev.maxs[-1])
        bucket_size *= 2
        levels.append(PeakLevel(bucket_size, mins, maxs))
    return PeakPyramid(levels=tuple(levels), total_samples=len(mono))


def _bucket_min_max(mono: np.ndarray, bucket: int) -> tuple[np.ndarray, np.ndarray]:
    full = len(mono) // bucket * bucket
    core = mono[:full].reshape(-1, bucket)
    mins = core.min(axis=1) if full else np.empty(0)
    maxs = core.max(axis=1) if full else np.empty(0)
    if full < len(mono):
        tail = mono[full:]
        mins = np.append(mins, tail.min())
        maxs = np.append(maxs, tail.max())
    return mins, maxs


def peaks_for_window(
    pyramid: PeakPyramid,
    sample_rate: int,
    t0_sec: float,
    t1_sec: float,
    columns: int,
) -> list[tuple[float, float]]:
    """(min, max) per display column over [t0, t1), conservative covering.

    Picks the coarsest level whose buckets are no wider than one column,
    then aggregates every bucket intersecting each column's time span.
    Columns past the end of the audio read as (0.0, 0.0).
    """
    if not t1_sec > t0_sec:
        raise ValueError(f"empty window: {t0_sec}..{t1_sec}")
    if columns < 1:
        raise ValueError(f"columns must be >= 1: {columns}")

    column_sec = (t1_sec - t0_sec) / columns
    level = pyramid.levels[0]
    for candidate in pyramid.levels:
        if candidate.bucket_size_samples / sample_rate <= column_sec:
            level = candidate
    bucket = level.bucket_size_samples

    out: list[tuple[float, float]] = []
    for i in range(columns):
        col_start = t0_sec + i * column_sec
        col_end = t0_sec + (i + 1) * column_sec
        s0 = max(0, math.floor(col_start * sample_rate))
        s1 = math.ceil(col_end * sample_rate)
        if s1 <= 0:
            out.append((0.0, 0.0))
            continue
        j0 = s0 // bucket
        j1 = min(level.bucket_count, -(-s1 // bucket))
        if j0 >= j1:
            out.append((0.0, 0.0))
        else:
            out.append((float(level.mins[j0:j1].min()), float(level.maxs[j0:j1].max())))
    return out
