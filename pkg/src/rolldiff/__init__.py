"""rolldiff: comparative analysis of MIDI piano rolls.

Parse Standard MIDI Files, time-align them on one seconds axis, match
notes between tracks under configurable tolerances, render layered rolls
to SVG, and drive synchronized playback with A-B looping.
"""

from .matching import (
    DEFAULT_TOLERANCE,
    DiffReport,
    HighlightClass,
    HighlightMode,
    HitMatrix,
    MatchTolerance,
    Metrics,
    candidate_hits,
    classify_diff,
    compute_metrics,
    highlight_assignment,
    max_bipartite_match,
)
from .model import (
    Manifest,
    ManifestEntry,
    ManifestError,
    RollDocument,
    TrackLayer,
    UnknownLayerError,
    Viewport,
    build_document,
    load_manifest,
    set_layer_color,
    set_layer_visibility,
    set_viewport,
)
from .render import (
    RenderOptions,
    export_document_json,
    import_document_json,
    render_svg,
)
from .smf import (
    MidiFile,
    NoteEvent,
    PedalSpan,
    SmfError,
    decode_vlq,
    encode_vlq,
    extract_notes,
    extract_pedal,
    parse_smf,
)
from .timebase import TempoMap, build_tempo_map, ticks_to_seconds
from .transport import (
    ClockSkewError,
    LoopError,
    ScheduledEvent,
    TrackMix,
    TransportState,
    clear_loop,
    current_time,
    events_in,
    initial_state,
    pause,
    play,
    seek,
    set_loop,
    stop,
)
from .wave import PcmAudio, PeakPyramid, WavError, build_peaks, parse_wav, peaks_for_window

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOLERANCE",
    "ClockSkewError",
    "DiffReport",
    "HighlightClass",
    "HighlightMode",
    "HitMatrix",
    "LoopError",
    "Manifest",
    "ManifestEntry",
    "ManifestError",
    "MatchTolerance",
    "Metrics",
    "MidiFile",
    "NoteEvent",
    "PcmAudio",
    "PeakPyramid",
    "PedalSpan",
    "RenderOptions",
    "RollDocument",
    "ScheduledEvent",
    "SmfError",
    "TempoMap",
    "TrackLayer",
    "TrackMix",
    "TransportState",
    "UnknownLayerError",
    "Viewport",
    "WavError",
    "build_document",
    "build_peaks",
    "build_tempo_map",
    "candidate_hits",
    "classify_diff",
    "clear_loop",
    "compute_metrics",
    "current_time",
    "decode_vlq",
    "encode_vlq",
    "events_in",
    "export_document_json",
    "extract_notes",
    "extract_pedal",
    "highlight_assignment",
    "import_document_json",
    "initial_state",
    "load_manifest",
    "max_bipartite_match",
    "parse_smf",
    "parse_wav",
    "pause",
    "peaks_for_window",
    "play",
    "render_svg",
    "seek",
    "set_layer_color",
    "set_layer_visibility",
    "set_loop",
    "set_viewport",
    "stop",
    "ticks_to_seconds",
]
