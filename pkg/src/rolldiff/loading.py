"""File-to-document plumbing shared by the CLI and the HTTP server."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

from .matching import DEFAULT_TOLERANCE, DiffReport, MatchTolerance, classify_diff
from .model import (
    AudioSource,
    Manifest,
    MidiSource,
    RollDocument,
    build_document,
    load_manifest,
)
from .smf import extract_notes, extract_pedal, parse_smf
from .timebase import build_tempo_map
from .wave import build_peaks, parse_wav


def midi_source_from_bytes(data: bytes) -> MidiSource:
    mid = parse_smf(data)
    tempo_map = build_tempo_map(mid)
    return MidiSource(
        notes=tuple(extract_notes(mid, tempo_map)),
        pedal=tuple(extract_pedal(mid, tempo_map)),
    )


def audio_source_from_bytes(data: bytes) -> AudioSource:
    pcm = parse_wav(data)
    if pcm.frame_count == 0:
        raise ValueError("audio file contains no samples")
    return AudioSource(
        peaks=build_peaks(pcm),
        sample_rate=pcm.sample_rate,
        duration_sec=pcm.duration_sec,
    )


def load_manifest_file(path: str | Path) -> tuple[Manifest, Path]:
    """Read a manifest; entry paths resolve relative to the manifest's dir."""
    manifest_path = Path(path)
    manifest = load_manifest(manifest_path.read_text(encoding="utf-8"))
    return manifest, manifest_path.parent


def load_sources(manifest: Manifest, base_dir: Path) -> list[MidiSource | AudioSource]:
    sources: list[MidiSource | AudioSource] = []
    for entry in manifest.entries:
        data = (base_dir / entry.path).read_bytes()
        if entry.type == "midi":
            sources.append(midi_source_from_bytes(data))
        else:
            sources.append(audio_source_from_bytes(data))
    return sources


def document_from_manifest_path(path: str | Path) -> tuple[RollDocument, Manifest, Path]:
    manifest, base_dir = load_manifest_file(path)
    doc = build_document(manifest, load_sources(manifest, base_dir))
    return doc, manifest, base_dir


def default_reports(
    doc: RollDocument, tolerance: MatchTolerance = DEFAULT_TOLERANCE
) -> dict[tuple[str, str], DiffReport]:
    """Diff the first MIDI layer (reference) against every later MIDI layer."""
    midi_layers = doc.midi_layers()
    if len(midi_layers) < 2:
        return {}
    ref = midi_layers[0]
    reports: dict[tuple[str, str], DiffReport] = {}
    for est in midi_layers[1:]:
        reports[(ref.id, est.id)] = classify_diff(
            doc.notes_by_layer.get(ref.id, ()),
            doc.notes_by_layer.get(est.id, ()),
            tolerance,
        )
    return reports
