"""Tick-to-seconds conversion under a piecewise-constant tempo map."""

from __future__ import annotations

from bisect import bisect_right

from .smf import MidiFile, Tempo

# SMF convention: 120 bpm when a file declares no tempo.
DEFAULT_TEMPO = 500_000


class TempoMap:
    """Ordered (start_tick, microseconds-per-quarter) segments with cached
    cumulative seconds at each segment start, so lookups cost O(log n).

    Tempo changes may arrive unsorted and with duplicate ticks; the last
    change seen for a tick wins. A default segment is inserted at tick 0
    when none is given.
    """

    __slots__ = ("ppq", "segments", "_start_ticks", "_cumulative")

    def __init__(self, ppq: int, changes=()):
        if ppq <= 0:
            raise ValueError(f"ppq must be positive: {ppq}")
        by_tick: dict[int, int] = {}
        for tick, tempo in changes:
            if tick < 0:
                raise ValueError(f"tempo change at negative tick {tick}")
            if tempo <= 0 or tempo > 0xFFFFFF:
                raise ValueError(f"tempo out of 24-bit range: {tempo}")
            by_tick[tick] = tempo  # later entries overwrite earlier ones
        if 0 not in by_tick:
            by_tick[0] = DEFAULT_TEMPO

        self.ppq = ppq
        self.segments: tuple[tuple[int, int], ...] = tuple(sorted(by_tick.items()))
        self._start_ticks = tuple(start for start, _ in self.segments)
        cumulative = [0.0]
        for (start, tempo), (next_start, _) in zip(self.segments, self.segments[1:]):
            cumulative.append(
                cumulative[-1] + (next_start - start) / ppq * tempo * 1e-6
            )
        self._cumulative = tuple(cumulative)

    def seconds_at(self, tick: int) -> float:
        """Absolute seconds for a non-negative absolute tick."""
        if tick < 0:
            raise ValueError(f"tick must be non-negative: {tick}")
        index = bisect_right(self._start_ticks, tick) - 1
        start, tempo = self.segments[index]
        return self._cumulative[index] + (tick - start) / self.ppq * tempo * 1e-6

    def __repr__(self) -> str:
        return f"TempoMap(ppq={self.ppq}, segments={self.segments!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, TempoMap):
            return NotImplemented
        return self.ppq == other.ppq and self.segments == other.segments

    def __hash__(self) -> int:
        return hash((self.ppq, self.segments))


def build_tempo_map(mid: MidiFile) -> TempoMap:
    """Collect tempo events from every track into one global map.

    Format 1 files conventionally keep tempo on track 0, but transcription
    output is not always conventional, so all tracks contribute.
    """
    changes = [
        (event.tick, event.kind.microseconds_per_quarter)
        for track in mid.tracks
        for event in track
        if isinstance(event.kind, Tempo)
    ]
    changes.sort(key=lambda change: change[0])  # stable: same-tick order preserved
    return TempoMap(mid.division, changes)


def ticks_to_seconds(tempo_map: TempoMap, tick: int) -> float:
    return tempo_map.seconds_at(tick)
