"""Hand-rolled SMF/WAV byte builders for fixtures and oracles.

These deliberately do not use the package's encoders: fixture bytes are an
independent statement of the file formats, so parser bugs cannot cancel out
against encoder bugs.
"""

from __future__ import annotations

import numpy as np


def ref_vlq(value: int) -> bytes:
    """Reference VLQ encoder: split into 7-bit groups, high groups first."""
    groups = []
    while True:
        groups.insert(0, value & 0x7F)
        value >>= 7
        if value == 0:
            break
    return bytes(
        group | (0x80 if i < len(groups) - 1 else 0) for i, group in enumerate(groups)
    )


def track_chunk(events: list[tuple[int, bytes]], end_delta: int = 0) -> bytes:
    """Build one MTrk chunk from (delta, raw event bytes) pairs.

    Appends an end-of-track meta event after end_delta ticks.
    """
    body = b"".join(ref_vlq(delta) + payload for delta, payload in events)
    body += ref_vlq(end_delta) + bytes([0xFF, 0x2F, 0x00])
    return b"MTrk" + len(body).to_bytes(4, "big") + body


def smf_bytes(tracks: list[bytes], ppq: int = 480, fmt: int | None = None) -> bytes:
    if fmt is None:
        fmt = 0 if len(tracks) <= 1 else 1
    header = (
        b"MThd"
        + (6).to_bytes(4, "big")
        + fmt.to_bytes(2, "big")
        + len(tracks).to_bytes(2, "big")
        + ppq.to_bytes(2, "big")
    )
    return header + b"".join(tracks)


def note_on(channel: int, pitch: int, velocity: int) -> bytes:
    return bytes([0x90 | channel, pitch, velocity])


def note_off(channel: int, pitch: int, velocity: int = 0) -> bytes:
    return bytes([0x80 | channel, pitch, velocity])


def control_change(channel: int, controller: int, value: int) -> bytes:
    return bytes([0xB0 | channel, controller, value])


def tempo_meta(us_per_quarter: int) -> bytes:
    return bytes([0xFF, 0x51, 0x03]) + us_per_quarter.to_bytes(3, "big")


def simple_note_track(
    notes: list[tuple[int, int, int]], channel: int = 0, velocity: int = 64
) -> bytes:
    """Track of (pitch, on_tick, off_tick) notes, ticks absolute."""
    moments: list[tuple[int, int, bytes]] = []
    for pitch, on_tick, off_tick in notes:
        moments.append((on_tick, 1, note_on(channel, pitch, velocity)))
        moments.append((off_tick, 0, note_off(channel, pitch)))
    # Offs before ons at equal ticks, so repeated pitches re-trigger cleanly.
    moments.sort(key=lambda m: (m[0], m[1]))
    events = []
    now = 0
    for tick, _, payload in moments:
        events.append((tick - now, payload))
        now = tick
    return track_chunk(events)


# --- fixture corpus ---------------------------------------------------------

# Tick grid: 100 PPQ at 1_000_000 us/quarter = exactly 10 ms per tick.
CENTISECOND_PPQ = 100
CENTISECOND_TEMPO = 1_000_000


def _centisecond_file(notes_cs: list[tuple[int, int, int]]) -> bytes:
    """File whose (pitch, onset, offset) are given in centiseconds."""
    track = simple_note_track([(p, on, off) for p, on, off in notes_cs])
    tempo_track = track_chunk([(0, tempo_meta(CENTISECOND_TEMPO))])
    return smf_bytes([tempo_track, track], ppq=CENTISECOND_PPQ, fmt=1)


# The two hand-built comparison fixtures used across CLI and matching tests:
# reference (60, 0.00-0.50), (60, 1.00-1.50), (64, 2.00-2.40)
# estimate  (60, 0.03-0.55), (60, 1.20-1.60), (64, 2.01-2.38), (67, 3.00-3.20)
FIXTURE_F_REF_NOTES = [(60, 0, 50), (60, 100, 150), (64, 200, 240)]
FIXTURE_F_EST_NOTES = [(60, 3, 55), (60, 120, 160), (64, 201, 238), (67, 300, 320)]


def fixture_f_ref() -> bytes:
    return _centisecond_file(FIXTURE_F_REF_NOTES)


def fixture_f_est() -> bytes:
    return _centisecond_file(FIXTURE_F_EST_NOTES)


def minimal_tempo_only() -> bytes:
    return smf_bytes([track_chunk([(0, tempo_meta(500_000))])], ppq=480)


def running_status_file() -> bytes:
    # Second and later note events omit the status byte.
    body = (
        (0, note_on(0, 60, 64)),
        (48, bytes([60, 0])),        # running status: note-on velocity 0
        (0, bytes([64, 69])),        # running status: note-on pitch 64
        (48, bytes([64, 0])),        # running status: closes it
    )
    return smf_bytes([track_chunk(list(body))], ppq=480)


def overlapping_fifo_file() -> bytes:
    events = [
        (0, note_on(0, 60, 64)),
        (48, note_on(0, 60, 80)),
        (48, note_off(0, 60)),
        (48, note_off(0, 60)),
    ]
    return smf_bytes([track_chunk(events)], ppq=480)


def two_tempo_file() -> bytes:
    track = track_chunk(
        [
            (0, tempo_meta(500_000)),
            (0, note_on(0, 60, 64)),
            (960, tempo_meta(250_000)),
            (480, note_off(0, 60)),
        ]
    )
    return smf_bytes([track], ppq=480)


def pedal_file() -> bytes:
    track = track_chunk(
        [
            (0, note_on(0, 62, 90)),
            (0, control_change(0, 64, 127)),
            (480, control_change(0, 64, 0)),
            (0, note_off(0, 62)),
            (480, control_change(0, 64, 127)),
        ],
        end_delta=480,
    )
    return smf_bytes([track], ppq=480)


def multitrack_file() -> bytes:
    tempo_track = track_chunk([(0, tempo_meta(500_000))])
    melody = simple_note_track([(72, 0, 240), (74, 240, 480)], channel=0)
    bass = simple_note_track([(48, 0, 480)], channel=1, velocity=100)
    return smf_bytes([tempo_track, melody, bass], ppq=480, fmt=1)


def messy_file() -> bytes:
    """Orphan note-off and an unterminated note-on, both tolerated."""
    track = track_chunk(
        [
            (0, note_off(0, 55)),      # orphan
            (0, note_on(0, 60, 64)),
            (240, note_off(0, 60)),
            (0, note_on(0, 67, 64)),   # left open until end of track
        ],
        end_delta=240,
    )
    return smf_bytes([track], ppq=480)


# Fixture registry: name -> (builder, has notes).
FIXTURES: dict[str, tuple] = {
    "fixture_f_ref": (fixture_f_ref, True),
    "fixture_f_est": (fixture_f_est, True),
    "minimal_tempo_only": (minimal_tempo_only, False),
    "running_status": (running_status_file, True),
    "overlapping_fifo": (overlapping_fifo_file, True),
    "two_tempo": (two_tempo_file, True),
    "pedal": (pedal_file, True),
    "multitrack": (multitrack_file, True),
    "messy": (messy_file, True),
}


# --- WAV synthesis ----------------------------------------------------------


def wav_bytes_pcm16(channels: list[np.ndarray], sample_rate: int) -> bytes:
    """Build a PCM16 WAV from int16 per-channel arrays."""
    stacked = np.vstack([np.asarray(c, dtype="<i2") for c in channels])
    interleaved = stacked.T.reshape(-1).astype("<i2").tobytes()
    return _riff(interleaved, sample_rate, len(channels), bits=16, fmt_code=1)


def wav_bytes_float32(channels: list[np.ndarray], sample_rate: int) -> bytes:
    stacked = np.vstack([np.asarray(c, dtype="<f4") for c in channels])
    interleaved = stacked.T.reshape(-1).astype("<f4").tobytes()
    return _riff(interleaved, sample_rate, len(channels), bits=32, fmt_code=3)


def _riff(payload: bytes, sample_rate: int, n_channels: int, bits: int, fmt_code: int) -> bytes:
    block_align = n_channels * bits // 8
    fmt = (
        b"fmt "
        + (16).to_bytes(4, "little")
        + fmt_code.to_bytes(2, "little")
        + n_channels.to_bytes(2, "little")
        + sample_rate.to_bytes(4, "little")
        + (sample_rate * block_align).to_bytes(4, "little")
        + block_align.to_bytes(2, "little")
        + bits.to_bytes(2, "little")
    )
    data = b"data" + len(payload).to_bytes(4, "little") + payload
    if len(payload) % 2:
        data += b"\x00"
    body = b"WAVE" + fmt + data
    return b"RIFF" + len(body).to_bytes(4, "little") + body


def deterministic_ramp_int16(n: int) -> np.ndarray:
    """Integer sawtooth, fully deterministic (no float math)."""
    return ((np.arange(n, dtype=np.int64) % 200) * 300 - 30000).astype("<i2")
