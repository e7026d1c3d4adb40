"""Playback transport: play/pause/stop/seek, A-B looping, per-track mix,
and time-windowed event queries for an audio backend.

The transport owns no clock and no audio. Every operation takes the wall
time it needs as a parameter and returns a new immutable state, which makes
the whole machine deterministic under test; the backend polls events_in()
over small lookahead windows and applies pan/gain itself.

The loop region is half-open [a, b): the playhead wraps from b back to a,
and adjacent event windows concatenate without duplicates or losses.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Literal, Mapping


class LoopError(ValueError):
    """Raised for loop regions that are empty after clamping."""


class ClockSkewError(ValueError):
    """Raised when a wall-clock reading precedes the playback anchor."""


@dataclass(frozen=True)
class Stopped:
    pass


@dataclass(frozen=True)
class Paused:
    media_sec: float


@dataclass(frozen=True)
class Playing:
    anchor_wall_sec: float
    anchor_media_sec: float


Mode = Stopped | Paused | Playing


@dataclass(frozen=True)
class TransportState:
    mode: Mode = Stopped()
    loop: tuple[float, float] | None = None
    duration_sec: float = 0.0

    def __post_init__(self) -> None:
        if self.duration_sec < 0:
            raise ValueError(f"duration must be >= 0: {self.duration_sec}")
        if self.loop is not None:
            a, b = self.loop
            if not 0 <= a < b <= self.duration_sec:
                raise LoopError(f"loop out of range: [{a}, {b}) in 0..{self.duration_sec}")
        if isinstance(self.mode, Paused) and not 0 <= self.mode.media_sec <= self.duration_sec:
            raise ValueError(f"paused position out of range: {self.mode.media_sec}")
        if isinstance(self.mode, Playing) and not (
            0 <= self.mode.anchor_media_sec <= self.duration_sec
        ):
            raise ValueError(f"anchor position out of range: {self.mode.anchor_media_sec}")


@dataclass(frozen=True)
class TrackMix:
    layer_id: str
    mute: bool = False
    pan: float = 0.0
    gain: float = 1.0

    def __post_init__(self) -> None:
        if not -1.0 <= self.pan <= 1.0:
            raise ValueError(f"pan out of range: {self.pan}")
        if not 0.0 <= self.gain <= 2.0:
            raise ValueError(f"gain out of range: {self.gain}")


@dataclass(frozen=True)
class ScheduledEvent:
    at_sec: float
    kind: Literal["note_on", "note_off"]
    layer_id: str
    pitch: int
    velocity: int
    pan: float
    gain: float


def initial_state(duration_sec: float) -> TransportState:
    return TransportState(mode=Stopped(), loop=None, duration_sec=duration_sec)


def play(state: TransportState, wall_now_sec: float) -> TransportState:
    if isinstance(state.mode, Playing):
        return state
    if isinstance(state.mode, Paused):
        media = state.mode.media_sec
    else:
        media = state.loop[0] if state.loop else 0.0
    return dataclasses.replace(state, mode=Playing(wall_now_sec, media))


def pause(state: TransportState, wall_now_sec: float) -> TransportState:
    if isinstance(state.mode, Paused):
        return state
    return dataclasses.replace(state, mode=Paused(current_time(state, wall_now_sec)))


def stop(state: TransportState) -> TransportState:
    if isinstance(state.mode, Stopped):
        return state
    return dataclasses.replace(state, mode=Stopped())


def seek(state: TransportState, target_sec: float, wall_now_sec: float = 0.0) -> TransportState:
    """Clamp the target into range and move there without changing mode.

    Seeking while playing re-anchors the clock, so wall_now_sec must be the
    current wall reading in that case. A stopped transport has no position
    to store, so it comes back paused at the target.
    """
    target = min(max(0.0, float(target_sec)), state.duration_sec)
    if isinstance(state.mode, Playing):
        return dataclasses.replace(state, mode=Playing(wall_now_sec, target))
    return dataclasses.replace(state, mode=Paused(target))


def set_loop(
    state: TransportState,
    a_sec: float,
    b_sec: float,
    wall_now_sec: float = 0.0,
) -> TransportState:
    """Store loop [a, b) after clamping both ends into [0, duration].

    If the transport is playing outside the new region the playhead snaps
    to a; paused or stopped transports keep their position until play.
    """
    a = min(max(0.0, float(a_sec)), state.duration_sec)
    b = min(max(0.0, float(b_sec)), state.duration_sec)
    if a >= b:
        raise LoopError(f"loop must satisfy a < b after clamping: [{a}, {b})")
    new_state = dataclasses.replace(state, loop=(a, b))
    if isinstance(state.mode, Playing):
        position = current_time(state, wall_now_sec)
        if not a <= position < b:
            new_state = dataclasses.replace(new_state, mode=Playing(wall_now_sec, a))
    return new_state


def clear_loop(state: TransportState, wall_now_sec: float = 0.0) -> TransportState:
    """Drop the loop; playback continues from the current position, no jump."""
    if state.loop is None:
        return state
    if isinstance(state.mode, Playing):
        position = current_time(state, wall_now_sec)
        return dataclasses.replace(
            state, loop=None, mode=Playing(wall_now_sec, position)
        )
    return dataclasses.replace(state, loop=None)


def current_time(state: TransportState, wall_now_sec: float) -> float:
    """Media position implied by the state at the given wall reading."""
    mode = state.mode
    if isinstance(mode, Stopped):
        return 0.0
    if isinstance(mode, Paused):
        return mode.media_sec
    if wall_now_sec < mode.anchor_wall_sec:
        raise ClockSkewError(
            f"wall clock {wall_now_sec} precedes anchor {mode.anchor_wall_sec}"
        )
    raw = mode.anchor_media_sec + (wall_now_sec - mode.anchor_wall_sec)
    if state.loop is not None:
        a, b = state.loop
        if raw < b:
            return raw
        wrapped = a + math.fmod(raw - a, b - a)
        # Guard against float rounding landing exactly on b.
        return a if wrapped >= b else wrapped
    return min(raw, state.duration_sec)


def advance(state: TransportState, wall_now_sec: float) -> TransportState:
    """Normalize the state at a wall reading: auto-stop at end of media.

    Queries never mutate, so the owning loop calls this periodically to
    observe the end of an un-looped playback.
    """
    mode = state.mode
    if isinstance(mode, Playing) and state.loop is None:
        raw = mode.anchor_media_sec + (wall_now_sec - mode.anchor_wall_sec)
        if raw >= state.duration_sec:
            return dataclasses.replace(state, mode=Stopped())
    return state


_DEFAULT_MIX = TrackMix(layer_id="")


def events_in(
    doc,
    mixes: Mapping[str, TrackMix],
    t0_sec: float,
    t1_sec: float,
) -> list[ScheduledEvent]:
    """Note on/off events of visible, unmuted MIDI layers in [t0, t1).

    Sorted by time, then document layer order; at equal times note-offs
    come before note-ons so a backend never double-triggers a voice.
    """
    if not t0_sec < t1_sec:
        raise ValueError(f"empty window: {t0_sec}..{t1_sec}")

    keyed: list[tuple[tuple, ScheduledEvent]] = []
    for layer_index, layer in enumerate(doc.layers):
        if layer.kind != "midi" or not layer.visible:
            continue
        mix = mixes.get(layer.id, _DEFAULT_MIX)
        if mix.mute:
            continue
        for note_index, note in enumerate(doc.notes_by_layer.get(layer.id, ())):
            if t0_sec <= note.onset_sec < t1_sec:
                event = ScheduledEvent(
                    at_sec=note.onset_sec,
                    kind="note_on",
                    layer_id=layer.id,
                    pitch=note.pitch,
                    velocity=note.velocity,
                    pan=mix.pan,
                    gain=mix.gain,
                )
                keyed.append(((note.onset_sec, layer_index, 1, note.pitch, note_index), event))
            if t0_sec <= note.offset_sec < t1_sec:
                event = ScheduledEvent(
                    at_sec=note.offset_sec,
                    kind="note_off",
                    layer_id=layer.id,
                    pitch=note.pitch,
                    velocity=0,
                    pan=mix.pan,
                    gain=mix.gain,
                )
                keyed.append(((note.offset_sec, layer_index, 0, note.pitch, note_index), event))
    keyed.sort(key=lambda pair: pair[0])
    return [event for _, event in keyed]
