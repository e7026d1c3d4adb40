"""Standard MIDI File decoding: timed events, paired notes, sustain spans.

Supports format 0 and 1 files with PPQ (ticks-per-quarter) division.
Format 2 and SMPTE division are rejected; messy note streams (orphan
note-offs, unterminated note-ons) are tolerated and counted instead of
failing, since transcription-model output is rarely pristine.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
import math

HEADER_MAGIC = b"MThd"
TRACK_MAGIC = b"MTrk"

VLQ_MAX_BYTES = 4
VLQ_MAX_VALUE = (1 << 28) - 1

SUSTAIN_CONTROLLER = 64
# CC64 value >= 64 means pedal down, < 64 means pedal up.
SUSTAIN_DOWN_THRESHOLD = 64


class SmfError(ValueError):
    """Raised when MIDI bytes cannot be decoded."""


@dataclass(frozen=True)
class NoteOn:
    channel: int
    pitch: int
    velocity: int


@dataclass(frozen=True)
class NoteOff:
    channel: int
    pitch: int
    velocity: int


@dataclass(frozen=True)
class Tempo:
    microseconds_per_quarter: int


@dataclass(frozen=True)
class ControlChange:
    channel: int
    controller: int
    value: int


@dataclass(frozen=True)
class EndOfTrack:
    pass


@dataclass(frozen=True)
class Other:
    """Any event we decode but do not interpret (sysex, unknown meta, ...).

    For meta events the first payload byte is the meta type.
    """

    status: int
    payload: bytes


EventKind = NoteOn | NoteOff | Tempo | ControlChange | EndOfTrack | Other


@dataclass(frozen=True)
class TimedEvent:
    tick: int
    kind: EventKind


@dataclass(frozen=True)
class MidiFile:
    format: int
    division: int
    tracks: tuple[tuple[TimedEvent, ...], ...]


@dataclass(frozen=True)
class NoteEvent:
    """One sounded note in absolute seconds."""

    pitch: int
    onset_sec: float
    offset_sec: float
    velocity: int = 64
    track_index: int = 0
    channel: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch out of range: {self.pitch}")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity out of range: {self.velocity}")
        if not 0 <= self.channel <= 15:
            raise ValueError(f"channel out of range: {self.channel}")
        if not (math.isfinite(self.onset_sec) and self.onset_sec >= 0):
            raise ValueError(f"onset must be finite and >= 0: {self.onset_sec}")
        if not self.offset_sec > self.onset_sec:
            raise ValueError(
                f"offset must exceed onset: {self.onset_sec}..{self.offset_sec}"
            )

    @property
    def duration_sec(self) -> float:
        return self.offset_sec - self.onset_sec


@dataclass(frozen=True)
class PedalSpan:
    """Sustain-pedal-down interval in absolute seconds."""

    start_sec: float
    end_sec: float
    track_index: int = 0
    channel: int = 0

    def __post_init__(self) -> None:
        if not self.end_sec > self.start_sec:
            raise ValueError(
                f"pedal span must have positive length: {self.start_sec}..{self.end_sec}"
            )


@dataclass
class ParseReport:
    """Counts of tolerated oddities found while pairing notes."""

    orphan_note_offs: int = 0
    unterminated_note_ons: int = 0
    zero_length_notes: int = 0
    malformed_tempo_events: int = 0


def decode_vlq(data: bytes, offset: int = 0) -> tuple[int, int]:
    """Decode one variable-length quantity.

    Returns (value, consumed byte count). Values are 7 bits per byte,
    big-endian, continuation flagged by the top bit; at most 4 bytes.
    """
    value = 0
    consumed = 0
    while True:
        if offset + consumed >= len(data):
            raise SmfError("truncated variable-length quantity")
        byte = data[offset + consumed]
        consumed += 1
        value = (value << 7) | (byte & 0x7F)
        if byte & 0x80 == 0:
            return value, consumed
        if consumed == VLQ_MAX_BYTES:
            raise SmfError("malformed variable-length quantity: longer than 4 bytes")


def encode_vlq(value: int) -> bytes:
    """Encode a non-negative integer < 2**28 as a canonical VLQ."""
    if not 0 <= value <= VLQ_MAX_VALUE:
        raise ValueError(f"value out of VLQ range: {value}")
    groups = [value & 0x7F]
    value >>= 7
    while value:
        groups.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(groups))


def parse_smf(data: bytes) -> MidiFile:
    """Parse Standard MIDI File bytes into timed events with absolute ticks."""
    if len(data) < 4 or data[:4] != HEADER_MAGIC:
        raise SmfError("not a Standard MIDI File: missing MThd header")
    if len(data) < 14:
        raise SmfError("truncated MThd header")
    header_len = int.from_bytes(data[4:8], "big")
    if header_len != 6:
        raise SmfError(f"unexpected MThd length {header_len} (expected 6)")
    fmt = int.from_bytes(data[8:10], "big")
    ntrks = int.from_bytes(data[10:12], "big")
    division = int.from_bytes(data[12:14], "big")
    if fmt == 2:
        raise SmfError("format 2 files are not supported")
    if fmt not in (0, 1):
        raise SmfError(f"unknown SMF format {fmt}")
    if division & 0x8000:
        raise SmfError("SMPTE division is not supported (PPQ only)")
    if division == 0:
        raise SmfError("division must be a positive tick count")

    tracks: list[tuple[TimedEvent, ...]] = []
    offset = 14
    while len(tracks) < ntrks:
        if offset + 8 > len(data):
            raise SmfError(
                f"truncated file: header declares {ntrks} tracks, found {len(tracks)}"
            )
        chunk_id = data[offset : offset + 4]
        chunk_len = int.from_bytes(data[offset + 4 : offset + 8], "big")
        offset += 8
        if offset + chunk_len > len(data):
            raise SmfError("truncated track chunk")
        if chunk_id == TRACK_MAGIC:
            tracks.append(_parse_track(data[offset : offset + chunk_len]))
        # Alien chunk ids are skipped, per the SMF spec.
        offset += chunk_len
    return MidiFile(format=fmt, division=division, tracks=tuple(tracks))


def _parse_track(chunk: bytes) -> tuple[TimedEvent, ...]:
    events: list[TimedEvent] = []
    tick = 0
    pos = 0
    running: int | None = None

    def need(count: int) -> None:
        if pos + count > len(chunk):
            raise SmfError("truncated event inside track chunk")

    while pos < len(chunk):
        delta, used = decode_vlq(chunk, pos)
        pos += used
        tick += delta
        need(1)
        status = chunk[pos]
        if status < 0x80:
            # Running status: data byte reuses the previous channel-voice status.
            if running is None:
                raise SmfError("data byte with no running status in effect")
            status = running
        else:
            pos += 1

        if status == 0xFF:
            running = None
            need(1)
            meta_type = chunk[pos]
            pos += 1
            length, used = decode_vlq(chunk, pos)
            pos += used
            need(length)
            payload = chunk[pos : pos + length]
            pos += length
            if meta_type == 0x2F:
                events.append(TimedEvent(tick, EndOfTrack()))
                break
            if meta_type == 0x51 and length == 3:
                value = int.from_bytes(payload, "big")
                if value > 0:
                    events.append(TimedEvent(tick, Tempo(value)))
                    continue
            events.append(TimedEvent(tick, Other(0xFF, bytes([meta_type]) + payload)))
        elif status in (0xF0, 0xF7):
            running = None
            length, used = decode_vlq(chunk, pos)
            pos += used
            need(length)
            events.append(TimedEvent(tick, Other(status, chunk[pos : pos + length])))
            pos += length
        elif status >= 0xF0:
            raise SmfError(f"unexpected system status byte 0x{status:02X} in track")
        else:
            running = status
            kind = status & 0xF0
            channel = status & 0x0F
            n_data = 1 if kind in (0xC0, 0xD0) else 2
            need(n_data)
            data_bytes = chunk[pos : pos + n_data]
            pos += n_data
            if any(b >= 0x80 for b in data_bytes):
                raise SmfError("status byte found where data byte expected")
            if kind == 0x90:
                events.append(
                    TimedEvent(tick, NoteOn(channel, data_bytes[0], data_bytes[1]))
                )
            elif kind == 0x80:
                events.append(
                    TimedEvent(tick, NoteOff(channel, data_bytes[0], data_bytes[1]))
                )
            elif kind == 0xB0:
                events.append(
                    TimedEvent(tick, ControlChange(channel, data_bytes[0], data_bytes[1]))
                )
            else:
                events.append(TimedEvent(tick, Other(status, bytes(data_bytes))))
    return tuple(events)


def _final_tick(track: tuple[TimedEvent, ...]) -> int:
    return track[-1].tick if track else 0


def extract_notes_with_report(mid, tempo_map) -> tuple[list[NoteEvent], ParseReport]:
    """Pair note-on/note-off events into NoteEvents, counting oddities.

    A note-on with velocity 0 closes like a note-off. Overlapping notes of
    the same pitch/channel pair FIFO: the oldest open onset closes first.
    Notes still open at end of track close at the track's final tick.
    """
    report = ParseReport()
    notes: list[NoteEvent] = []

    def close(track_index, channel, pitch, on_tick, velocity, off_tick):
        onset = tempo_map.seconds_at(on_tick)
        offset = tempo_map.seconds_at(off_tick)
        if offset <= onset:
            report.zero_length_notes += 1
            return
        notes.append(
            NoteEvent(
                pitch=pitch,
                onset_sec=onset,
                offset_sec=offset,
                velocity=velocity,
                track_index=track_index,
                channel=channel,
            )
        )

    for track_index, track in enumerate(mid.tracks):
        open_notes: dict[tuple[int, int], deque[tuple[int, int]]] = {}
        for event in track:
            kind = event.kind
            if isinstance(kind, NoteOn) and kind.velocity > 0:
                key = (kind.channel, kind.pitch)
                open_notes.setdefault(key, deque()).append((event.tick, kind.velocity))
            elif isinstance(kind, NoteOff) or (
                isinstance(kind, NoteOn) and kind.velocity == 0
            ):
                key = (kind.channel, kind.pitch)
                pending = open_notes.get(key)
                if not pending:
                    report.orphan_note_offs += 1
                    continue
                on_tick, velocity = pending.popleft()
                close(track_index, kind.channel, kind.pitch, on_tick, velocity, event.tick)
        end_tick = _final_tick(track)
        for (channel, pitch), pending in open_notes.items():
            for on_tick, velocity in pending:
                report.unterminated_note_ons += 1
                close(track_index, channel, pitch, on_tick, velocity, end_tick)

    notes.sort(key=lambda n: (n.onset_sec, n.pitch))
    return notes, report


def extract_notes(mid, tempo_map) -> list[NoteEvent]:
    """Like extract_notes_with_report, discarding the report."""
    notes, _ = extract_notes_with_report(mid, tempo_map)
    return notes


def extract_pedal(mid, tempo_map) -> list[PedalSpan]:
    """Extract sustain-pedal (CC64) spans per track and channel.

    Value >= 64 opens a span, < 64 closes it; a span still open at end of
    track closes at the final tick. Releases with no open span are ignored.
    """
    spans: list[PedalSpan] = []
    for track_index, track in enumerate(mid.tracks):
        open_since: dict[int, int] = {}
        for event in track:
            kind = event.kind
            if not isinstance(kind, ControlChange) or kind.controller != SUSTAIN_CONTROLLER:
                continue
            if kind.value >= SUSTAIN_DOWN_THRESHOLD:
                # Re-pressing while held keeps the original start.
                open_since.setdefault(kind.channel, event.tick)
            else:
                start_tick = open_since.pop(kind.channel, None)
                if start_tick is not None:
                    _append_span(spans, tempo_map, track_index, kind.channel, start_tick, event.tick)
        end_tick = _final_tick(track)
        for channel, start_tick in open_since.items():
            _append_span(spans, tempo_map, track_index, channel, start_tick, end_tick)
    spans.sort(key=lambda s: (s.start_sec, s.track_index, s.channel))
    return spans


def _append_span(spans, tempo_map, track_index, channel, start_tick, end_tick) -> None:
    start = tempo_map.seconds_at(start_tick)
    end = tempo_map.seconds_at(end_tick)
    if end > start:
        spans.append(
            PedalSpan(start_sec=start, end_sec=end, track_index=track_index, channel=channel)
        )
