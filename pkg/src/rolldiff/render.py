"""Canonical JSON serialization of documents/diffs and static SVG rendering.

Both outputs are deterministic byte-for-byte: JSON keys are emitted in a
fixed order with floats at exactly six decimals, and SVG coordinates are
formatted through one number formatter. That makes golden-file tests and
HTTP caching trivially safe.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

from .matching import (
    DiffReport,
    HighlightClass,
    MatchTolerance,
    compute_metrics,
)
from .model import RollDocument, TrackLayer, Viewport, Waveform
from .smf import NoteEvent, PedalSpan
from .wave import peaks_for_window

SCHEMA_VERSION = 1

MIN_CANVAS_PX = 16
NOTE_HEIGHT_FRACTION = 0.9
PEDAL_OPACITY = 0.15
WAVEFORM_OPACITY = 0.35
WAVEFORM_AMPLITUDE_FRACTION = 0.45

_HIGHLIGHT_STROKES = {
    HighlightClass.MATCHED: ' stroke="#000000" stroke-width="2"',
    HighlightClass.MISSED: ' stroke="#000000" stroke-width="1.5" stroke-dasharray="4,2"',
    HighlightClass.EXTRA: ' stroke="#000000" stroke-width="1.5" stroke-dasharray="1.5,1.5"',
}


@dataclass(frozen=True)
class RenderOptions:
    width_px: int = 1000
    height_px: int = 600
    show_waveform: bool = True
    show_pedal: bool = True
    show_playhead: bool = False
    playhead_sec: float | None = None
    highlight: Mapping[tuple[str, int], HighlightClass] | None = None

    def __post_init__(self) -> None:
        if self.width_px < MIN_CANVAS_PX or self.height_px < MIN_CANVAS_PX:
            raise ValueError(
                f"canvas must be at least {MIN_CANVAS_PX}px per side: "
                f"{self.width_px}x{self.height_px}"
            )


# --- canonical JSON ---------------------------------------------------------


def canonical_json(value) -> str:
    """Serialize with imposed key order (dict insertion order), compact
    separators, and floats at exactly six decimals."""
    parts: list[str] = []
    _emit(value, parts)
    return "".join(parts)


def _emit(value, parts: list[str]) -> None:
    if isinstance(value, bool):
        parts.append("true" if value else "false")
    elif isinstance(value, int):
        parts.append(str(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot serialize non-finite float: {value}")
        parts.append(f"{value + 0.0:.6f}" if value == 0 else f"{value:.6f}")
    elif isinstance(value, str):
        parts.append(json.dumps(value))
    elif isinstance(value, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(value):
            if i:
                parts.append(",")
            _emit(item, parts)
        parts.append("]")
    elif isinstance(value, dict):
        parts.append("{")
        for i, (key, item) in enumerate(value.items()):
            if i:
                parts.append(",")
            parts.append(json.dumps(str(key)))
            parts.append(":")
            _emit(item, parts)
        parts.append("}")
    elif value is None:
        parts.append("null")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def _tolerance_dict(tol: MatchTolerance) -> dict:
    return {
        "onsetTolSec": float(tol.onset_tol_sec),
        "requireExactPitch": tol.require_exact_pitch,
        "offsetEnabled": tol.offset_enabled,
        "offsetRatio": float(tol.offset_ratio),
        "offsetMinTolSec": float(tol.offset_min_tol_sec),
    }


def _report_dict(ref_id: str, est_id: str, report: DiffReport) -> dict:
    metrics = compute_metrics(report)
    return {
        "refLayer": ref_id,
        "estLayer": est_id,
        "tolerance": _tolerance_dict(report.tolerance),
        "pairs": [[r, e] for r, e in report.pairs],
        "missedRef": list(report.missed_ref),
        "extraEst": list(report.extra_est),
        "metrics": {
            "precision": float(metrics.precision),
            "recall": float(metrics.recall),
            "f1": float(metrics.f1),
            "matchedCount": metrics.matched_count,
            "refCount": metrics.ref_count,
            "estCount": metrics.est_count,
        },
    }


def reports_fragment(
    doc: RollDocument, reports: Mapping[tuple[str, str], DiffReport]
) -> dict:
    """The reports array alone, for CLI --json output."""
    known = {layer.id for layer in doc.layers}
    entries = []
    for (ref_id, est_id) in sorted(reports):
        if ref_id not in known or est_id not in known:
            raise ValueError(f"report references unknown layer: {ref_id}/{est_id}")
        entries.append(_report_dict(ref_id, est_id, reports[(ref_id, est_id)]))
    return {"reports": entries}


def export_document_json(
    doc: RollDocument, reports: Mapping[tuple[str, str], DiffReport] | None = None
) -> str:
    """Canonical document JSON (schema v1). Identical inputs give identical
    bytes; the manifest echo is derived from layer metadata."""
    reports = reports or {}
    payload: dict = {
        "schemaVersion": SCHEMA_VERSION,
        "manifest": [
            {"path": layer.source_path, "name": layer.name, "type": layer.kind}
            for layer in doc.layers
        ],
        "durationSec": float(doc.duration_sec),
        "viewport": {
            "timeStart": float(doc.viewport.time_start),
            "timeEnd": float(doc.viewport.time_end),
            "pitchMin": doc.viewport.pitch_min,
            "pitchMax": doc.viewport.pitch_max,
        },
        "layers": [
            {
                "id": layer.id,
                "name": layer.name,
                "kind": layer.kind,
                "color": list(layer.color),
                "visible": layer.visible,
                "sustainVisible": layer.sustain_visible,
                "sourcePath": layer.source_path,
            }
            for layer in doc.layers
        ],
        "notes": {
            layer.id: [
                {
                    "pitch": note.pitch,
                    "onsetSec": float(note.onset_sec),
                    "offsetSec": float(note.offset_sec),
                    "velocity": note.velocity,
                    "channel": note.channel,
                    "trackIndex": note.track_index,
                }
                for note in doc.notes_by_layer.get(layer.id, ())
            ]
            for layer in doc.layers
            if layer.kind == "midi"
        },
        "pedal": {
            layer.id: [
                {
                    "startSec": float(span.start_sec),
                    "endSec": float(span.end_sec),
                    "channel": span.channel,
                    "trackIndex": span.track_index,
                }
                for span in doc.pedal_by_layer.get(layer.id, ())
            ]
            for layer in doc.layers
            if layer.kind == "midi"
        },
    }
    payload.update(reports_fragment(doc, reports))
    return canonical_json(payload)


def import_document_json(text: str) -> tuple[RollDocument, dict[tuple[str, str], DiffReport]]:
    """Rebuild a document and its diff reports from exported JSON.

    The waveform is not part of the document JSON (peaks travel separately),
    so imported documents carry none.
    """
    raw = json.loads(text)
    if raw.get("schemaVersion") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schemaVersion: {raw.get('schemaVersion')!r}")

    layers = tuple(
        TrackLayer(
            id=item["id"],
            name=item["name"],
            kind=item["kind"],
            color=tuple(item["color"]),
            visible=item["visible"],
            sustain_visible=item["sustainVisible"],
            source_path=item.get("sourcePath", ""),
        )
        for item in raw["layers"]
    )
    notes_by_layer = {
        layer_id: tuple(
            NoteEvent(
                pitch=note["pitch"],
                onset_sec=note["onsetSec"],
                offset_sec=note["offsetSec"],
                velocity=note["velocity"],
                track_index=note.get("trackIndex", 0),
                channel=note.get("channel", 0),
            )
            for note in items
        )
        for layer_id, items in raw["notes"].items()
    }
    pedal_by_layer = {
        layer_id: tuple(
            PedalSpan(
                start_sec=span["startSec"],
                end_sec=span["endSec"],
                track_index=span.get("trackIndex", 0),
                channel=span.get("channel", 0),
            )
            for span in items
        )
        for layer_id, items in raw["pedal"].items()
    }
    viewport = Viewport(
        time_start=raw["viewport"]["timeStart"],
        time_end=raw["viewport"]["timeEnd"],
        pitch_min=raw["viewport"]["pitchMin"],
        pitch_max=raw["viewport"]["pitchMax"],
    )
    doc = RollDocument(
        layers=layers,
        notes_by_layer=notes_by_layer,
        pedal_by_layer=pedal_by_layer,
        waveform=None,
        viewport=viewport,
        duration_sec=float(raw["durationSec"]),
    )

    reports: dict[tuple[str, str], DiffReport] = {}
    for item in raw.get("reports", ()):
        tol = item["tolerance"]
        reports[(item["refLayer"], item["estLayer"])] = DiffReport(
            pairs=tuple((r, e) for r, e in item["pairs"]),
            missed_ref=tuple(item["missedRef"]),
            extra_est=tuple(item["extraEst"]),
            tolerance=MatchTolerance(
                onset_tol_sec=tol["onsetTolSec"],
                require_exact_pitch=tol["requireExactPitch"],
                offset_enabled=tol["offsetEnabled"],
                offset_ratio=tol["offsetRatio"],
                offset_min_tol_sec=tol["offsetMinTolSec"],
            ),
        )
    return doc, reports


def peaks_json(waveform: Waveform) -> str:
    """Canonical peaks JSON for the document's audio layer."""
    payload = {
        "schemaVersion": SCHEMA_VERSION,
        "layerId": waveform.layer_id,
        "sampleRate": waveform.sample_rate,
        "durationSec": float(waveform.duration_sec),
        "levels": [
            {
                "bucketSizeSamples": level.bucket_size_samples,
                "min": [float(v) for v in level.mins],
                "max": [float(v) for v in level.maxs],
            }
            for level in waveform.peaks.levels
        ],
    }
    return canonical_json(payload)


# --- SVG --------------------------------------------------------------------


def _num(value: float) -> str:
    s = f"{value:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _hex_color(color) -> str:
    r, g, b, _ = color
    return f"#{r:02X}{g:02X}{b:02X}"


def render_svg(doc: RollDocument, opts: RenderOptions = RenderOptions()) -> str:
    """Deterministic static SVG of the layered roll within its viewport.

    One rect per visible note intersecting the viewport, geometrically
    clipped to the canvas; pedal spans as translucent full-height bands;
    the waveform as a filled polyline lane; later layers paint on top.
    """
    vp = doc.viewport
    width = float(opts.width_px)
    height = float(opts.height_px)
    px_per_sec = width / (vp.time_end - vp.time_start)
    rows = vp.pitch_max - vp.pitch_min + 1
    row_height = height / rows
    highlight = opts.highlight or {}

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{opts.width_px}" '
        f'height="{opts.height_px}" viewBox="0 0 {opts.width_px} {opts.height_px}">',
        f'<rect width="{opts.width_px}" height="{opts.height_px}" fill="#FFFFFF"/>',
    ]

    if opts.show_waveform and doc.waveform is not None:
        audio_layer = doc.layer(doc.waveform.layer_id)
        if audio_layer.visible:
            parts.append(_waveform_polyline(doc.waveform, audio_layer, vp, width, height))

    if opts.show_pedal:
        for layer in doc.layers:
            if layer.kind != "midi" or not layer.visible or not layer.sustain_visible:
                continue
            spans = doc.pedal_by_layer.get(layer.id, ())
            band_parts = []
            for span in spans:
                if span.end_sec <= vp.time_start or span.start_sec >= vp.time_end:
                    continue
                x0 = max(0.0, (span.start_sec - vp.time_start) * px_per_sec)
                x1 = min(width, (span.end_sec - vp.time_start) * px_per_sec)
                if x1 <= x0:
                    continue
                band_parts.append(
                    f'<rect x="{_num(x0)}" y="0" width="{_num(x1 - x0)}" '
                    f'height="{opts.height_px}" fill="{_hex_color(layer.color)}" '
                    f'fill-opacity="{_num(PEDAL_OPACITY)}"/>'
                )
            if band_parts:
                parts.append(f'<g class="layer-pedal" data-layer="{layer.id}">')
                parts.extend(band_parts)
                parts.append("</g>")

    for layer in doc.layers:
        if layer.kind != "midi" or not layer.visible:
            continue
        parts.append(f'<g class="layer-notes" data-layer="{layer.id}">')
        fill = _hex_color(layer.color)
        opacity = _num(layer.color[3] / 255.0)
        for note_index, note in enumerate(doc.notes_by_layer.get(layer.id, ())):
            if note.pitch < vp.pitch_min or note.pitch > vp.pitch_max:
                continue
            if note.offset_sec <= vp.time_start or note.onset_sec >= vp.time_end:
                continue
            x0 = max(0.0, (note.onset_sec - vp.time_start) * px_per_sec)
            x1 = min(width, (note.offset_sec - vp.time_start) * px_per_sec)
            rect_width = max(1.0, x1 - x0)
            if x0 + rect_width > width:
                x0 = width - rect_width
            y = (vp.pitch_max - note.pitch) * row_height
            stroke = _HIGHLIGHT_STROKES.get(highlight.get((layer.id, note_index)), "")
            parts.append(
                f'<rect x="{_num(x0)}" y="{_num(y)}" width="{_num(rect_width)}" '
                f'height="{_num(row_height * NOTE_HEIGHT_FRACTION)}" fill="{fill}" '
                f'fill-opacity="{opacity}"{stroke}/>'
            )
        parts.append("</g>")

    if opts.show_playhead and opts.playhead_sec is not None:
        if vp.time_start <= opts.playhead_sec <= vp.time_end:
            x = (opts.playhead_sec - vp.time_start) * px_per_sec
            parts.append(
                f'<line class="playhead" x1="{_num(x)}" y1="0" x2="{_num(x)}" '
                f'y2="{opts.height_px}" stroke="#FF3333" stroke-width="1.5"/>'
            )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _waveform_polyline(
    waveform: Waveform, layer: TrackLayer, vp: Viewport, width: float, height: float
) -> str:
    columns = max(1, int(width))
    pairs = peaks_for_window(
        waveform.peaks, waveform.sample_rate, vp.time_start, vp.time_end, columns
    )
    mid = height / 2.0
    amplitude = height * WAVEFORM_AMPLITUDE_FRACTION
    points: list[str] = []
    for i, (_, high) in enumerate(pairs):
        points.append(f"{_num(i + 0.5)},{_num(mid - high * amplitude)}")
    for i in range(len(pairs) - 1, -1, -1):
        low = pairs[i][0]
        points.append(f"{_num(i + 0.5)},{_num(mid - low * amplitude)}")
    return (
        f'<polyline class="waveform" data-layer="{layer.id}" '
        f'points="{" ".join(points)}" fill="{_hex_color(layer.color)}" '
        f'fill-opacity="{_num(WAVEFORM_OPACITY)}" stroke="none"/>'
    )
