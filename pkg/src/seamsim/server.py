"""Local HTTP mode for the companion workbench UI.

Serves the current model, the cached trace corpus, per-trace detail (span
tree plus transaction/overhead overlays for the original and the last
rewritten state), and runs a fresh rewrite+analysis for scenario text
submitted by the UI.  Binds localhost by default; one analysis runs at a
time.  State between requests is limited to the parsed traces, the last
scenario, and the last report.

Endpoints (all JSON unless noted):
  GET  /api/model         - current model as DSL text (text/plain)
  GET  /api/traces        - trace ids and use cases
  GET  /api/traces/{id}   - events, span tree, overlays, issues; original
                            and, when a scenario is loaded, rewritten
  POST /api/analyze       - body: scenario DSL text; 400 with diagnostics on
                            parse/merge errors, else the fresh report
  GET  /api/report        - last report (404 before the first analysis)
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .analyze import analyze_trace
from .dsl import parse_delta, serialize_model
from .model import DeploymentModel, MergeError, apply_delta
from .analyze import aggregate
from .pipeline import corpus_diffs
from .rewrite import rewrite
from .traces import Span, Trace, build_span_tree, read_trace_file
from .txsim import KernelModel, simulate

_DEFAULT_UI_DIR = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
}


def _span_list(root: Span) -> list[dict]:
    spans: list[dict] = []
    index: dict[int, int] = {}
    for span in root.walk():
        index[id(span)] = len(spans)
        spans.append(
            {
                "name": span.name,
                "start_ts": span.start_ts,
                "end_ts": span.end_ts,
                "overhead_before": span.overhead_before,
                "overhead_after": span.overhead_after,
                "depth": span.depth,
                "parent": index[id(span.parent)] if span.parent is not None else None,
                "event_ids": span.event_ids,
            }
        )
    return spans


def trace_detail_side(trace: Trace, model: DeploymentModel) -> dict:
    """Everything the timeline view needs for one trace state."""
    ann = simulate(trace, model, want_timeline=True)
    analysis = analyze_trace(ann)
    return {
        "duration": trace.duration,
        "total_overhead": trace.total_overhead(),
        "events": [e.to_obj() for e in trace.events()],
        "spans": _span_list(build_span_tree(trace)),
        "tx_overlays": ann.timeline(),
        "transactions": [
            {
                "tx_id": t.tx_id,
                "kind": t.kind,
                "demarcation": t.demarcation,
                "status": t.status,
                "started_ts": t.started_ts,
                "resolved_ts": t.resolved_ts,
                "started_event_id": t.started_event_id,
                "resolved_event_id": t.resolved_event_id,
            }
            for t in ann.transactions
        ],
        "issues": [i.to_obj() for i in analysis.issues],
        "write_outcomes": {str(k): v for k, v in sorted(analysis.write_outcomes().items())},
        "tx_started": {str(k): v for k, v in sorted(ann.tx_started().items())},
    }


class WorkbenchServer:
    def __init__(
        self,
        base_model: DeploymentModel,
        traces_path: str,
        alpha: float = 0.05,
        workers: int = 1,
        ui_dir: Optional[str] = None,
        initial_scenario: Optional[DeploymentModel] = None,
    ):
        self.base_model = base_model
        self.base_km = KernelModel(base_model)
        self.alpha = alpha
        self.workers = workers
        self.ui_dir = Path(ui_dir) if ui_dir else _DEFAULT_UI_DIR
        self.traces = read_trace_file(traces_path)
        self.by_id = {t.trace_id: t for t in self.traces}
        self.scenario_model: Optional[DeploymentModel] = None
        self.last_report: Optional[dict] = None
        self.lock = threading.Lock()
        self.httpd: Optional[ThreadingHTTPServer] = None
        if initial_scenario is not None:
            self.run_analysis_for(initial_scenario)

    # -- operations

    def run_analysis(self, scenario_text: str) -> tuple[int, dict]:
        result = parse_delta(scenario_text)
        if not result.ok:
            return 400, _diagnostics_payload(result.diagnostics)
        try:
            scenario = apply_delta(self.base_model, result.value)
        except MergeError as exc:
            return 400, {
                "diagnostics": [
                    {"severity": "error", "message": str(exc), "line": 1, "column": 1, "length": 0}
                ]
            }
        report = self.run_analysis_for(scenario)
        payload = dict(report)
        if result.diagnostics:
            payload["scenario_warnings"] = _diagnostics_payload(result.diagnostics)["diagnostics"]
        return 200, payload

    def run_analysis_for(self, scenario: DeploymentModel) -> dict:
        with self.lock:
            diffs = corpus_diffs(self.traces, self.base_km, scenario, workers=self.workers)
            report = aggregate(diffs, self.alpha, scenario).to_obj()
            self.scenario_model = scenario
            self.last_report = report
            return report

    def trace_detail(self, trace_id: str) -> Optional[dict]:
        trace = self.by_id.get(trace_id)
        if trace is None:
            return None
        detail = {
            "trace_id": trace.trace_id,
            "use_case": trace.use_case,
            "original": trace_detail_side(trace, self.base_model),
            "rewritten": None,
            "mapping": None,
        }
        scenario = self.scenario_model
        if scenario is not None:
            result = rewrite(trace, self.base_km, KernelModel(scenario))
            detail["rewritten"] = trace_detail_side(result.rewritten, scenario)
            detail["mapping"] = {
                "dropped_original": sorted(result.mapping.dropped_original),
                "inserted_rewritten": sorted(result.mapping.inserted_rewritten),
            }
        return detail

    # -- plumbing

    def serve_forever(self, host: str = "127.0.0.1", port: int = 8645) -> None:
        self.start(host, port)
        print(f"seamsim workbench on http://{host}:{self.httpd.server_address[1]}/ "
              f"({len(self.traces)} traces cached)")
        try:
            self.httpd.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            self.httpd.server_close()

    def start(self, host: str = "127.0.0.1", port: int = 0) -> int:
        handler = _make_handler(self)
        self.httpd = ThreadingHTTPServer((host, port), handler)
        return self.httpd.server_address[1]

    def shutdown(self) -> None:
        if self.httpd is not None:
            self.httpd.shutdown()
            self.httpd.server_close()


def _diagnostics_payload(diagnostics) -> dict:
    return {
        "diagnostics": [
            {
                "severity": d.severity.value,
                "message": d.message,
                "line": d.span.line,
                "column": d.span.column,
                "length": d.span.length,
            }
            for d in diagnostics
        ]
    }


def _make_handler(server: WorkbenchServer):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, body: bytes, content_type: str = "application/json") -> None:
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(body)

        def _send_json(self, status: int, obj) -> None:
            self._send(status, json.dumps(obj).encode("utf-8"))

        def do_OPTIONS(self):
            self._send(204, b"")

        def do_GET(self):
            path = self.path.split("?", 1)[0]
            if path == "/api/model":
                self._send(200, serialize_model(server.base_model).encode("utf-8"), "text/plain; charset=utf-8")
            elif path == "/api/traces":
                listing = [
                    {"trace_id": t.trace_id, "use_case": t.use_case, "duration": t.duration, "events": len(t)}
                    for t in server.traces
                ]
                self._send_json(200, {"traces": listing})
            elif path.startswith("/api/traces/"):
                detail = server.trace_detail(path[len("/api/traces/"):])
                if detail is None:
                    self._send_json(404, {"error": "unknown trace id"})
                else:
                    self._send_json(200, detail)
            elif path == "/api/report":
                if server.last_report is None:
                    self._send_json(404, {"error": "no analysis has run yet"})
                else:
                    self._send_json(200, server.last_report)
            elif path.startswith("/api/"):
                self._send_json(404, {"error": "unknown endpoint"})
            else:
                self._send_static(path)

        def _send_static(self, path: str) -> None:
            root = server.ui_dir
            rel = "index.html" if path in ("", "/") else path.lstrip("/")
            file = (root / rel).resolve() if root else None
            if file is None or not str(file).startswith(str(root.resolve())) or not file.is_file():
                if rel != "index.html" and root and (root / "index.html").is_file():
                    file = root / "index.html"  # single-page app fallback
                else:
                    self._send(404, b"not found (build the frontend or pass --ui-dir)", "text/plain")
                    return
            ctype = _CONTENT_TYPES.get(file.suffix, "application/octet-stream")
            self._send(200, file.read_bytes(), ctype)

        def do_POST(self):
            path = self.path.split("?", 1)[0]
            if path != "/api/analyze":
                self._send_json(404, {"error": "unknown endpoint"})
                return
            length = int(self.headers.get("Content-Length", "0"))
            body = self.rfile.read(length).decode("utf-8", errors="replace")
            status, payload = server.run_analysis(body)
            self._send_json(status, payload)

    return Handler
