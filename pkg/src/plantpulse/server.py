"""HTTP service binding simulation control, sensor configuration, live
metrics, and query execution into one process.

Endpoints (JSON bodies, CORS open):

    POST /api/sim/start | /api/sim/stop   -> {"running": bool}
    GET  /api/sim/status                  -> running flag plus clock info
    GET  /api/metrics                     -> one metrics frame
    GET  /api/metrics/stream              -> SSE, event "metrics", ~1 frame/s
    GET  /api/sensors/config              -> current document + revision
    PUT  /api/sensors/config              -> applied | 400 {"errors": [...]}
    POST /api/query {"sql": ...}          -> {"columns", "rows", "elapsed_ms"}
    GET  /api/query/predefined            -> the two shipped queries
    GET  /api/tables                      -> schema catalog

Static assets (the browser UI) are served from ``static_dir`` under ``/``.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import schema
from .pipeline import Pipeline
from .query import (
    PlanError,
    QueryResourceError,
    QueryTimeoutError,
    SqlSyntaxError,
    predefined,
    run_sql,
)
from .query.executor import DEFAULT_MAX_INTERMEDIATE
from .sensors import SensorConfigError

log = logging.getLogger(__name__)

QUERY_TIMEOUT_S = 30.0
STREAM_INTERVAL_S = 1.0

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript",
    ".css": "text/css",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: "AppServer"

    # -- plumbing ------------------------------------------------------------

    def log_message(self, format, *args):
        log.debug("%s - %s", self.address_string(), format % args)

    def _cors(self):
        self.send_header("Access-Control-Allow-Origin", "*")

    def _send_json(self, status: int, payload):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _read_json(self):
        raw = self._read_body()
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            return None

    # -- routing ---------------------------------------------------------------

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        app = self.server.app
        if self.path == "/api/sim/status":
            self._send_json(200, app.pipeline.status())
        elif self.path == "/api/metrics":
            self._send_json(200, app.pipeline.metrics_frame())
        elif self.path == "/api/metrics/stream":
            self._stream_metrics()
        elif self.path == "/api/sensors/config":
            self._send_json(200, app.pipeline.sensor_config_doc())
        elif self.path == "/api/query/predefined":
            self._send_json(
                200,
                [
                    {"name": q.name, "description": q.description, "sql": q.sql}
                    for q in predefined()
                ],
            )
        elif self.path == "/api/tables":
            snap = app.pipeline.store.snapshot()
            self._send_json(
                200,
                [
                    {
                        "name": table,
                        "columns": [
                            {"name": s.name, "type": s.type, "nullable": s.nullable}
                            for s in snap.schema_of(table)
                        ],
                    }
                    for table in schema.TABLE_ORDER
                ],
            )
        else:
            self._static()

    def do_POST(self):
        app = self.server.app
        if self.path == "/api/sim/start":
            app.pipeline.start()
            self._send_json(200, {"running": True})
        elif self.path == "/api/sim/stop":
            app.pipeline.stop()
            self._send_json(200, {"running": False})
        elif self.path == "/api/query":
            self._query()
        else:
            self._send_json(404, {"error": "not found"})

    def do_PUT(self):
        app = self.server.app
        if self.path != "/api/sensors/config":
            self._send_json(404, {"error": "not found"})
            return
        raw = self._read_body()
        try:
            revision = app.pipeline.stage_sensor_config(raw.decode("utf-8", "replace"))
        except SensorConfigError as err:
            self._send_json(400, {"errors": err.errors})
            return
        self._send_json(200, {"applied": True, "revision": revision})

    # -- endpoint bodies ---------------------------------------------------------

    def _query(self):
        app = self.server.app
        body = self._read_json()
        if not isinstance(body, dict) or not isinstance(body.get("sql"), str):
            self._send_json(400, {"error": "body must be {\"sql\": \"...\"}", "offset": 0})
            return
        snapshot = app.pipeline.store.snapshot()
        deadline = time.perf_counter() + QUERY_TIMEOUT_S
        try:
            result = run_sql(
                body["sql"],
                snapshot,
                deadline=deadline,
                max_intermediate=app.max_intermediate,
            )
        except SqlSyntaxError as err:
            self._send_json(400, {"error": err.message, "offset": err.offset})
            return
        except PlanError as err:
            self._send_json(400, {"error": err.message, "offset": err.offset})
            return
        except (QueryResourceError, QueryTimeoutError) as err:
            self._send_json(422, {"error": str(err)})
            return
        self._send_json(
            200,
            {
                "columns": [{"name": n, "type": t} for n, t in result.columns],
                "rows": [list(row) for row in result.rows],
                "elapsed_ms": result.elapsed_ms,
            },
        )

    def _stream_metrics(self):
        app = self.server.app
        self.send_response(200)
        self._cors()
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.end_headers()
        started = time.monotonic()
        count = 0
        try:
            while not app.closing.is_set():
                frame = json.dumps(app.pipeline.metrics_frame())
                self.wfile.write(f"event: metrics\ndata: {frame}\n\n".encode("utf-8"))
                self.wfile.flush()
                count += 1
                target = started + count * STREAM_INTERVAL_S
                delay = target - time.monotonic()
                if delay > 0 and app.closing.wait(delay):
                    break
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass  # client went away; nothing to clean up

    def _static(self):
        app = self.server.app
        if app.static_dir is None:
            self._send_json(404, {"error": "not found"})
            return
        path = self.path.split("?", 1)[0]
        if path in ("/", ""):
            path = "/index.html"
        target = (app.static_dir / path.lstrip("/")).resolve()
        if not str(target).startswith(str(app.static_dir.resolve())) or not target.is_file():
            self._send_json(404, {"error": "not found"})
            return
        body = target.read_bytes()
        self.send_response(200)
        self._cors()
        self.send_header(
            "Content-Type", _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        )
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class _Httpd(ThreadingHTTPServer):
    daemon_threads = True
    app: "AppServer"


class AppServer:
    """Owns the pipeline, the HTTP listener, and the realtime ticker."""

    def __init__(
        self,
        pipeline: Pipeline | None = None,
        host: str = "127.0.0.1",
        port: int = 8080,
        static_dir: str | Path | None = None,
        max_intermediate: int = DEFAULT_MAX_INTERMEDIATE,
    ):
        self.pipeline = pipeline if pipeline is not None else Pipeline()
        self.static_dir = Path(static_dir) if static_dir else None
        self.max_intermediate = max_intermediate
        self.closing = threading.Event()
        self._httpd = _Httpd((host, port), _Handler)
        self._httpd.app = self
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    def start(self):
        if self.pipeline.clock_mode == "realtime":
            self.pipeline.start_ticker()
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, name="http-server", daemon=True
        )
        self._thread.start()

    def stop(self):
        self.closing.set()
        if self.pipeline.clock_mode == "realtime":
            self.pipeline.stop_ticker()
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def serve_forever(self):
        """Blocking variant for the CLI."""
        if self.pipeline.clock_mode == "realtime":
            self.pipeline.start_ticker()
        try:
            self._httpd.serve_forever()
        finally:
            self.closing.set()
            if self.pipeline.clock_mode == "realtime":
                self.pipeline.stop_ticker()
            self._httpd.server_close()
