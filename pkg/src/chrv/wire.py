"""Wire protocol for remote analyzers: JSON messages over HTTP or TCP.

One message per request, one per response; the full field catalogue lives
in docs/protocol.md.  Both transports share the same dispatcher over a
single driver, so the session is linearizable no matter how clients
connect.  The HTTP transport accepts POST /rpc with one JSON request per
call (this is what the browser analyzer uses, CORS is open); the TCP
transport reads newline-delimited JSON requests and writes one JSON line
per response.
"""

from __future__ import annotations

import json
import socketserver
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Optional

from . import engine as eng
from .driver import (
    AnalyzerRegistration,
    Driver,
    DriverError,
    FilterQuery,
    NoActiveSession,
    UnknownAnalyzer,
)
from .lang import ChrSemanticError, ChrSyntaxError
from .tracer import ActualTraceEvent

PROTOCOL_VERSION = 1


def event_to_json(event: ActualTraceEvent) -> dict[str, Any]:
    return {"chrono": event.chrono, "kind": event.kind, "attributes": dict(event.attributes)}


def _error(request: dict[str, Any], code: str, message: str) -> dict[str, Any]:
    return {"id": request.get("id"), "ok": False, "error": {"code": code, "message": message}}


def dispatch(driver: Driver, request: dict[str, Any]) -> dict[str, Any]:
    """Execute one protocol request against the driver."""
    op = request.get("op")
    try:
        if op == "load":
            status = driver.load(
                str(request.get("program", "")),
                str(request.get("query", "")),
                step_by_step=request.get("step_by_step"),
                budget=request.get("budget"),
            )
            return {"id": request.get("id"), "ok": True, "status": status}
        if op == "step":
            event = driver.new_step()
            return {
                "id": request.get("id"),
                "ok": True,
                "event": None if event is None else event_to_json(event),
                "status": driver.status,
            }
        if op == "control":
            cmd = str(request.get("cmd", ""))
            if cmd == "continue":
                events = driver.run_events()
                return {
                    "id": request.get("id"),
                    "ok": True,
                    "status": driver.status,
                    "events": [event_to_json(e) for e in events],
                }
            status = driver.control(cmd)
            return {"id": request.get("id"), "ok": True, "status": status, "events": []}
        if op == "filter":
            analyzer = str(request.get("analyzer", ""))
            query = FilterQuery.from_json(request.get("query"))
            try:
                driver.update_filter(analyzer, query)
            except UnknownAnalyzer:
                driver.register_analyzer(AnalyzerRegistration(analyzer, query))
            return {"id": request.get("id"), "ok": True}
        if op == "fetch":
            chrono_range = request.get("range")
            if chrono_range is not None:
                chrono_range = (int(chrono_range[0]), int(chrono_range[1]))
            if "query" in request and request["query"] is not None:
                query = FilterQuery.from_json(request["query"])
            elif "analyzer" in request:
                query = driver.analyzer_filter(str(request["analyzer"]))
            else:
                query = None
            events = driver.fetch(chrono_range, query)
            response: dict[str, Any] = {
                "id": request.get("id"),
                "ok": True,
                "events": [event_to_json(e) for e in events],
            }
            if request.get("with_state"):
                response["states"] = {str(e.chrono): driver.state_snapshot(e.chrono) for e in events}
            return response
        if op == "export_xml":
            return {"id": request.get("id"), "ok": True, "xml": driver.export_xml()}
        if op == "status":
            info = driver.session_info()
            info.update({"id": request.get("id"), "ok": True, "protocol": PROTOCOL_VERSION})
            return info
        return _error(request, "UnknownOp", f"unknown op {op!r}")
    except (ChrSyntaxError, ChrSemanticError) as exc:
        return _error(request, "ParseError", str(exc))
    except eng.BudgetExceeded as exc:
        return _error(request, "BudgetExceeded", str(exc))
    except NoActiveSession as exc:
        return _error(request, "NoActiveSession", str(exc))
    except DriverError as exc:
        return _error(request, type(exc).__name__, str(exc))
    except (ValueError, KeyError, TypeError) as exc:
        return _error(request, "BadRequest", f"{type(exc).__name__}: {exc}")


# ---------------------------------------------------------------------------
# HTTP transport
# ---------------------------------------------------------------------------

_CONTENT_TYPES = {".html": "text/html", ".js": "text/javascript", ".css": "text/css", ".map": "application/json"}


class _HttpHandler(BaseHTTPRequestHandler):
    driver: Driver
    ui_dir: Optional[Path] = None

    def _send(self, code: int, body: bytes, content_type: str = "application/json") -> None:
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "POST, GET, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):  # noqa: N802 (stdlib naming)
        self._send(204, b"")

    def do_POST(self):  # noqa: N802
        if self.path.rstrip("/") not in ("", "/rpc"):
            self._send(404, b'{"ok": false, "error": {"code": "NotFound", "message": "POST /rpc"}}')
            return
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length)
        try:
            request = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            self._send(400, json.dumps(_error({}, "BadRequest", f"invalid JSON: {exc}")).encode())
            return
        response = dispatch(self.driver, request)
        self._send(200, json.dumps(response).encode("utf-8"))

    def do_GET(self):  # noqa: N802
        if self.path == "/healthz":
            self._send(200, b'{"ok": true}')
            return
        if self.ui_dir is None:
            self._send(404, b'{"ok": false, "error": {"code": "NotFound", "message": "no UI bundled"}}')
            return
        relative = self.path.lstrip("/") or "index.html"
        target = (self.ui_dir / relative).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            self._send(404, b"not found", "text/plain")
            return
        self._send(200, target.read_bytes(), _CONTENT_TYPES.get(target.suffix, "application/octet-stream"))

    def log_message(self, fmt, *args):  # quiet by default
        pass


def make_http_server(driver: Driver, host: str = "127.0.0.1", port: int = 8737, ui_dir: Optional[Path] = None) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_HttpHandler,), {"driver": driver, "ui_dir": ui_dir})
    return ThreadingHTTPServer((host, port), handler)


# ---------------------------------------------------------------------------
# TCP line transport
# ---------------------------------------------------------------------------

class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self):
        for raw in self.rfile:
            line = raw.strip()
            if not line:
                continue
            try:
                request = json.loads(line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                response = _error({}, "BadRequest", f"invalid JSON: {exc}")
            else:
                response = dispatch(self.server.driver, request)  # type: ignore[attr-defined]
            self.wfile.write(json.dumps(response).encode("utf-8") + b"\n")


class LineProtocolServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, driver: Driver, host: str = "127.0.0.1", port: int = 8738):
        super().__init__((host, port), _LineHandler)
        self.driver = driver


def serve_forever_in_thread(server) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
