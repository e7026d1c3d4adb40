"""Read-only HTTP server feeding the web viewer.

Serves the exported document JSON (with optional tolerance query
parameters so a client can re-run matching through the engine), waveform
peaks, the raw source files named by the manifest, and optionally a static
UI directory. Everything is computed from immutable in-memory state, so
concurrent requests need no locking.
"""

from __future__ import annotations

import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlsplit

from .loading import default_reports, document_from_manifest_path
from .matching import DEFAULT_TOLERANCE, MatchTolerance
from .render import export_document_json, peaks_json

_CONTENT_TYPES = {
    ".mid": "audio/midi",
    ".midi": "audio/midi",
    ".wav": "audio/wav",
    ".json": "application/json",
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
}

_TRUE_WORDS = {"1", "true", "yes", "on"}
_FALSE_WORDS = {"0", "false", "no", "off"}


def _content_type(path: str) -> str:
    return _CONTENT_TYPES.get(Path(path).suffix.lower(), "application/octet-stream")


class DocumentServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, manifest_path, tolerance, ui_dir):
        self.doc, self.manifest, self.base_dir = document_from_manifest_path(manifest_path)
        self.default_tolerance = tolerance
        self.default_document_json = export_document_json(
            self.doc, default_reports(self.doc, tolerance)
        )
        self.peaks_body = (
            peaks_json(self.doc.waveform) if self.doc.waveform is not None else None
        )
        self.manifest_paths = {entry.path for entry in self.manifest.entries}
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        super().__init__(address, _Handler)

    def document_json_for_query(self, query: dict[str, list[str]]) -> str:
        if not query:
            return self.default_document_json
        tolerance = _tolerance_from_query(query, self.default_tolerance)
        return export_document_json(self.doc, default_reports(self.doc, tolerance))


def _tolerance_from_query(query, base: MatchTolerance) -> MatchTolerance:
    def float_param(name, default):
        values = query.get(name)
        return float(values[-1]) if values else default

    def bool_param(name, default):
        values = query.get(name)
        if not values:
            return default
        word = values[-1].strip().lower()
        if word in _TRUE_WORDS:
            return True
        if word in _FALSE_WORDS:
            return False
        raise ValueError(f"bad boolean for {name}: {values[-1]!r}")

    return MatchTolerance(
        onset_tol_sec=float_param("onset-tol", base.onset_tol_sec),
        offset_enabled=bool_param("offsets", base.offset_enabled),
        offset_ratio=float_param("offset-ratio", base.offset_ratio),
        offset_min_tol_sec=float_param("offset-min-tol", base.offset_min_tol_sec),
    )


class _Handler(BaseHTTPRequestHandler):
    server: DocumentServer

    def do_GET(self) -> None:  # noqa: N802 - http.server API
        url = urlsplit(self.path)
        path = unquote(url.path)
        try:
            if path == "/document.json":
                try:
                    body = self.server.document_json_for_query(parse_qs(url.query))
                except ValueError as exc:
                    self._send_text(400, f"bad tolerance query: {exc}")
                    return
                self._send(200, body.encode("utf-8"), "application/json")
            elif path == "/peaks.json":
                if self.server.peaks_body is None:
                    self._send_text(404, "document has no audio layer")
                else:
                    self._send(200, self.server.peaks_body.encode("utf-8"), "application/json")
            elif path.startswith("/files/"):
                self._send_source_file(path[len("/files/") :])
            elif self.server.ui_dir is not None:
                self._send_static(path)
            else:
                self._send_text(404, "not found")
        except BrokenPipeError:  # client went away mid-response
            pass

    def _send_source_file(self, name: str) -> None:
        if name not in self.server.manifest_paths:
            self._send_text(404, f"{name} is not a manifest source")
            return
        file_path = self.server.base_dir / name
        if not file_path.is_file():
            self._send_text(404, f"{name} not found on disk")
            return
        self._send(200, file_path.read_bytes(), _content_type(name))

    def _send_static(self, path: str) -> None:
        relative = path.lstrip("/") or "index.html"
        target = (self.server.ui_dir / relative).resolve()
        if not str(target).startswith(str(self.server.ui_dir)) or not target.is_file():
            self._send_text(404, "not found")
            return
        self._send(200, target.read_bytes(), _content_type(target.name))

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_text(self, status: int, message: str) -> None:
        self._send(status, message.encode("utf-8"), "text/plain; charset=utf-8")

    def log_message(self, format, *args) -> None:  # noqa: A002 - http.server API
        if self.server.__dict__.get("verbose"):
            sys.stderr.write("%s - %s\n" % (self.address_string(), format % args))


def make_server(
    manifest_path,
    host: str = "127.0.0.1",
    port: int = 0,
    tolerance: MatchTolerance = DEFAULT_TOLERANCE,
    ui_dir=None,
) -> DocumentServer:
    return DocumentServer((host, port), manifest_path, tolerance, ui_dir)
