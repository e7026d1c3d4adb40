"""Command-line front door: compare, render, export, peaks, serve.

Exit codes are a stable scripting contract: 0 success, 1 internal error,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .loading import (
    default_reports,
    document_from_manifest_path,
    load_manifest_file,
    load_sources,
    midi_source_from_bytes,
)
from .matching import HighlightMode, MatchTolerance, compute_metrics, highlight_assignment
from .model import Manifest, ManifestEntry, ManifestError, build_document, set_viewport
from .render import (
    RenderOptions,
    canonical_json,
    export_document_json,
    peaks_json,
    render_svg,
    reports_fragment,
)
from .smf import SmfError
from .wave import WavError, parse_wav

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2

_INPUT_ERRORS = (SmfError, WavError, ManifestError, OSError, ValueError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rolldiff",
        description="Compare, render, and serve layered MIDI piano rolls.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compare = sub.add_parser("compare", help="match notes of estimates against a reference")
    compare.add_argument("ref", help="reference MIDI file")
    compare.add_argument("est", nargs="+", help="estimate MIDI file(s)")
    _add_tolerance_flags(compare)
    compare.add_argument("--json", action="store_true", help="emit machine-readable reports")

    render = sub.add_parser("render", help="render a manifest to a static SVG")
    render.add_argument("manifest", help="manifest JSON file")
    render.add_argument("--out", required=True, help="output SVG path")
    render.add_argument("--width", type=int, default=1000)
    render.add_argument("--height", type=int, default=600)
    render.add_argument(
        "--highlight",
        choices=[mode.value for mode in HighlightMode],
        default=HighlightMode.OFF.value,
        help="highlight classes from diffing the first two MIDI layers",
    )
    render.add_argument("--t0", type=float, default=None, help="viewport start seconds")
    render.add_argument("--t1", type=float, default=None, help="viewport end seconds")
    _add_tolerance_flags(render)

    export = sub.add_parser("export", help="export the document JSON for a manifest")
    export.add_argument("manifest")
    export.add_argument("--out", required=True, help="output JSON path")
    _add_tolerance_flags(export)

    peaks = sub.add_parser("peaks", help="compute waveform peak JSON for a WAV file")
    peaks.add_argument("wav")
    peaks.add_argument("--out", required=True, help="output JSON path")

    serve = sub.add_parser("serve", help="serve document/peaks/files over HTTP, read-only")
    serve.add_argument("manifest")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000, help="0 picks a free port")
    serve.add_argument("--ui-dir", default=None, help="static web UI assets to serve at /")
    _add_tolerance_flags(serve)

    return parser


def _add_tolerance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--onset-tol", type=float, default=0.05, metavar="SEC")
    parser.add_argument("--offsets", action="store_true", help="also require offsets to match")
    parser.add_argument("--offset-ratio", type=float, default=0.2)
    parser.add_argument("--offset-min-tol", type=float, default=0.05, metavar="SEC")


def _tolerance_from_args(args) -> MatchTolerance:
    return MatchTolerance(
        onset_tol_sec=args.onset_tol,
        offset_enabled=args.offsets,
        offset_ratio=args.offset_ratio,
        offset_min_tol_sec=args.offset_min_tol,
    )


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def run() -> None:
    sys.exit(main())


def _dispatch(args) -> int:
    if args.command == "compare":
        return _cmd_compare(args)
    if args.command == "render":
        return _cmd_render(args)
    if args.command == "export":
        return _cmd_export(args)
    if args.command == "peaks":
        return _cmd_peaks(args)
    if args.command == "serve":
        return _cmd_serve(args)
    raise ValueError(f"unknown command {args.command!r}")


def _read_input(path: str) -> bytes:
    file_path = Path(path)
    if not file_path.is_file():
        raise OSError(f"cannot read {path}: no such file")
    return file_path.read_bytes()


def _compare_document(args):
    paths = [args.ref, *args.est]
    manifest = Manifest(
        entries=tuple(
            ManifestEntry(path=p, name=Path(p).stem or p, type="midi") for p in paths
        )
    )
    sources = []
    for path in paths:
        try:
            sources.append(midi_source_from_bytes(_read_input(path)))
        except (SmfError, OSError) as exc:
            raise SmfError(f"{path}: {exc}") from exc
    doc = build_document(manifest, sources)
    reports = default_reports(doc, _tolerance_from_args(args))
    return doc, reports


def _cmd_compare(args) -> int:
    doc, reports = _compare_document(args)
    if args.json:
        print(canonical_json(reports_fragment(doc, reports)))
        return EXIT_OK
    midi_layers = doc.midi_layers()
    ref_layer = midi_layers[0]
    for layer, path in zip(midi_layers[1:], args.est):
        metrics = compute_metrics(reports[(ref_layer.id, layer.id)])
        print(
            f"{path}: "
            f"P={metrics.precision:.3f} R={metrics.recall:.3f} F1={metrics.f1:.3f} "
            f"matched={metrics.matched_count} "
            f"missed={metrics.ref_count - metrics.matched_count} "
            f"extra={metrics.est_count - metrics.matched_count}"
        )
    return EXIT_OK


def _cmd_render(args) -> int:
    doc, _, _ = document_from_manifest_path(args.manifest)
    if args.t0 is not None or args.t1 is not None:
        t0 = args.t0 if args.t0 is not None else doc.viewport.time_start
        t1 = args.t1 if args.t1 is not None else doc.viewport.time_end
        doc = set_viewport(doc, t0, t1, doc.viewport.pitch_min, doc.viewport.pitch_max)

    highlight = None
    mode = HighlightMode(args.highlight)
    if mode is not HighlightMode.OFF:
        midi_layers = doc.midi_layers()
        if len(midi_layers) < 2:
            raise ValueError("highlighting needs at least two MIDI layers to compare")
        reports = default_reports(doc, _tolerance_from_args(args))
        ref_id, est_id = midi_layers[0].id, midi_layers[1].id
        highlight = highlight_assignment(
            doc, ref_id, est_id, reports[(ref_id, est_id)], mode
        )

    options = RenderOptions(width_px=args.width, height_px=args.height, highlight=highlight)
    Path(args.out).write_text(render_svg(doc, options), encoding="utf-8")
    return EXIT_OK


def _cmd_export(args) -> int:
    doc, _, _ = document_from_manifest_path(args.manifest)
    reports = default_reports(doc, _tolerance_from_args(args))
    Path(args.out).write_text(export_document_json(doc, reports), encoding="utf-8")
    return EXIT_OK


def _cmd_peaks(args) -> int:
    from .loading import audio_source_from_bytes
    from .model import Waveform

    source = audio_source_from_bytes(_read_input(args.wav))
    waveform = Waveform(
        layer_id=Path(args.wav).stem or args.wav,
        sample_rate=source.sample_rate,
        duration_sec=source.duration_sec,
        peaks=source.peaks,
    )
    Path(args.out).write_text(peaks_json(waveform), encoding="utf-8")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .server import make_server

    try:
        server = make_server(
            args.manifest,
            host=args.host,
            port=args.port,
            tolerance=_tolerance_from_args(args),
            ui_dir=args.ui_dir,
        )
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK
