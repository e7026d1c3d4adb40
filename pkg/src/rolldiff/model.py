"""The layered piano-roll document: tracks as toggleable visual layers on a
single time/pitch grid, plus the manifest format that feeds it.

Documents are immutable values; update operations return a new document and
never touch the input, so snapshots can be shared freely (and undo is a
matter of keeping the old value around).
"""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

from .smf import NoteEvent, PedalSpan
from .wave import PeakPyramid

Rgba = tuple[int, int, int, int]

# Default layer colors, cycled by layer index.
PALETTE: tuple[Rgba, ...] = (
    (31, 119, 180, 255),   # blue
    (255, 127, 14, 255),   # orange
    (44, 160, 44, 255),    # green
    (214, 39, 40, 255),    # red
    (148, 103, 189, 255),  # purple
    (140, 86, 75, 255),    # brown
    (227, 119, 194, 255),  # pink
    (23, 190, 207, 255),   # cyan
)

# 88-key piano range, used when a document has no notes to frame.
FULL_PITCH_RANGE = (21, 108)
PITCH_PADDING = 2
MIN_TIME_SPAN = 0.001


class ManifestError(ValueError):
    """Raised when manifest JSON cannot be interpreted."""


class UnknownLayerError(ValueError):
    """Raised when an operation names a layer id not in the document."""


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    name: str
    type: Literal["audio", "midi"]


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]


@dataclass(frozen=True)
class TrackLayer:
    id: str
    name: str
    kind: Literal["audio", "midi"]
    color: Rgba
    visible: bool = True
    sustain_visible: bool = True
    source_path: str = ""


@dataclass(frozen=True)
class Viewport:
    time_start: float
    time_end: float
    pitch_min: int
    pitch_max: int

    def __post_init__(self) -> None:
        if not self.time_end > self.time_start:
            raise ValueError(f"empty time window: {self.time_start}..{self.time_end}")
        if not 0 <= self.pitch_min < self.pitch_max <= 127:
            raise ValueError(f"bad pitch window: {self.pitch_min}..{self.pitch_max}")


@dataclass(frozen=True)
class MidiSource:
    """Parsed MIDI content for one manifest entry."""

    notes: tuple[NoteEvent, ...]
    pedal: tuple[PedalSpan, ...] = ()


@dataclass(frozen=True, eq=False)
class AudioSource:
    """Decoded audio content for one manifest entry."""

    peaks: PeakPyramid
    sample_rate: int
    duration_sec: float


@dataclass(frozen=True, eq=False)
class Waveform:
    """Peak pyramid of the document's audio layer, kept by reference."""

    layer_id: str
    sample_rate: int
    duration_sec: float
    peaks: PeakPyramid


@dataclass(frozen=True)
class RollDocument:
    layers: tuple[TrackLayer, ...]
    notes_by_layer: Mapping[str, tuple[NoteEvent, ...]]
    pedal_by_layer: Mapping[str, tuple[PedalSpan, ...]]
    waveform: Waveform | None
    viewport: Viewport
    duration_sec: float

    def layer(self, layer_id: str) -> TrackLayer:
        for layer in self.layers:
            if layer.id == layer_id:
                return layer
        raise UnknownLayerError(f"unknown layer id: {layer_id}")

    def midi_layers(self) -> list[TrackLayer]:
        return [layer for layer in self.layers if layer.kind == "midi"]


def load_manifest(text: str) -> Manifest:
    """Parse the manifest: a JSON array of {path, name, type} objects.

    Unknown keys are ignored; a missing name defaults to the file stem.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise ManifestError("manifest must be a JSON array")

    entries: list[ManifestEntry] = []
    audio_count = 0
    for position, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ManifestError(f"manifest entry {position} must be an object")
        path = item.get("path")
        if not isinstance(path, str) or not path:
            raise ManifestError(f"manifest entry {position} is missing a path")
        entry_type = item.get("type")
        if entry_type not in ("audio", "midi"):
            raise ManifestError(
                f"manifest entry {position} has unknown type {entry_type!r}"
            )
        if entry_type == "audio":
            audio_count += 1
            if audio_count > 1:
                raise ManifestError("manifest may contain at most one audio entry")
        name = item.get("name")
        if not isinstance(name, str) or not name:
            name = _stem(path)
        entries.append(ManifestEntry(path=path, name=name, type=entry_type))
    return Manifest(entries=tuple(entries))


def _stem(path: str) -> str:
    base = re.split(r"[/\\]", path)[-1]
    return base.rsplit(".", 1)[0] if "." in base else base


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def build_document(
    manifest: Manifest, sources: Sequence[MidiSource | AudioSource]
) -> RollDocument:
    """Assemble layers from manifest entries and their parsed sources.

    Layer order follows the manifest; ids are slugged names (de-duplicated
    by index), colors cycle the default palette, everything starts visible.
    """
    if len(sources) != len(manifest.entries):
        raise ValueError(
            f"{len(manifest.entries)} manifest entries but {len(sources)} sources"
        )

    layers: list[TrackLayer] = []
    notes_by_layer: dict[str, tuple[NoteEvent, ...]] = {}
    pedal_by_layer: dict[str, tuple[PedalSpan, ...]] = {}
    waveform: Waveform | None = None
    used_ids: set[str] = set()

    for index, (entry, source) in enumerate(zip(manifest.entries, sources)):
        layer_id = _slug(entry.name) or f"layer-{index}"
        if layer_id in used_ids:
            layer_id = f"{layer_id}-{index}"
        if layer_id in used_ids:
            raise ValueError(f"duplicate layer id: {layer_id}")
        used_ids.add(layer_id)

        layer = TrackLayer(
            id=layer_id,
            name=entry.name,
            kind=entry.type,
            color=PALETTE[index % len(PALETTE)],
            source_path=entry.path,
        )
        layers.append(layer)

        if entry.type == "midi":
            if not isinstance(source, MidiSource):
                raise ValueError(f"entry {entry.path} is midi but source is not")
            notes_by_layer[layer_id] = tuple(source.notes)
            pedal_by_layer[layer_id] = tuple(source.pedal)
        else:
            if not isinstance(source, AudioSource):
                raise ValueError(f"entry {entry.path} is audio but source is not")
            if waveform is not None:
                raise ValueError("document already has an audio layer")
            waveform = Waveform(
                layer_id=layer_id,
                sample_rate=source.sample_rate,
                duration_sec=source.duration_sec,
                peaks=source.peaks,
            )

    duration = 0.0
    for notes in notes_by_layer.values():
        for note in notes:
            duration = max(duration, note.offset_sec)
    for spans in pedal_by_layer.values():
        for span in spans:
            duration = max(duration, span.end_sec)
    if waveform is not None:
        duration = max(duration, waveform.duration_sec)

    all_pitches = [n.pitch for notes in notes_by_layer.values() for n in notes]
    if all_pitches:
        pitch_min = max(0, min(all_pitches) - PITCH_PADDING)
        pitch_max = min(127, max(all_pitches) + PITCH_PADDING)
    else:
        pitch_min, pitch_max = FULL_PITCH_RANGE

    viewport = Viewport(
        time_start=0.0,
        time_end=max(duration, MIN_TIME_SPAN),
        pitch_min=pitch_min,
        pitch_max=pitch_max,
    )
    return RollDocument(
        layers=tuple(layers),
        notes_by_layer=notes_by_layer,
        pedal_by_layer=pedal_by_layer,
        waveform=waveform,
        viewport=viewport,
        duration_sec=duration,
    )


def _replace_layer(doc: RollDocument, layer_id: str, **changes) -> RollDocument:
    if all(layer.id != layer_id for layer in doc.layers):
        raise UnknownLayerError(f"unknown layer id: {layer_id}")
    layers = tuple(
        dataclasses.replace(layer, **changes) if layer.id == layer_id else layer
        for layer in doc.layers
    )
    return dataclasses.replace(doc, layers=layers)


def set_layer_visibility(doc: RollDocument, layer_id: str, visible: bool) -> RollDocument:
    return _replace_layer(doc, layer_id, visible=visible)


def set_sustain_visibility(doc: RollDocument, layer_id: str, visible: bool) -> RollDocument:
    return _replace_layer(doc, layer_id, sustain_visible=visible)


def set_layer_color(doc: RollDocument, layer_id: str, color: Rgba) -> RollDocument:
    color = tuple(int(c) for c in color)
    if len(color) != 4 or any(not 0 <= c <= 255 for c in color):
        raise ValueError(f"color must be four 8-bit channels: {color}")
    return _replace_layer(doc, layer_id, color=color)


def set_viewport(
    doc: RollDocument,
    time_start: float,
    time_end: float,
    pitch_min: int,
    pitch_max: int,
) -> RollDocument:
    """Clamp the requested window into range; panning never raises.

    Degenerate windows are expanded to a minimum of 1 ms / 1 pitch row.
    """
    time_start = max(0.0, float(time_start))
    max_end = max(doc.duration_sec, time_start + MIN_TIME_SPAN)
    time_end = min(float(time_end), max_end)
    if time_end <= time_start:
        time_end = time_start + MIN_TIME_SPAN

    pitch_min = min(127, max(0, int(pitch_min)))
    pitch_max = min(127, max(0, int(pitch_max)))
    if pitch_min >= pitch_max:
        if pitch_min >= 127:
            pitch_min = 126
        pitch_max = pitch_min + 1

    viewport = Viewport(time_start, time_end, pitch_min, pitch_max)
    return dataclasses.replace(doc, viewport=viewport)
