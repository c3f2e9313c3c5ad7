"""HTTP facade over a project directory for the review workbench.

Single writer: every mutation runs through the engine under one lock and
is persisted before the response leaves.  Responses are canonical JSON
(sorted keys, compact separators) so repeated reads are byte-identical.
Stale digests map to 409, role violations to 403; actor identity is a
declared label, not an authenticated principal.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Callable, Optional

_CONTENT_TYPES = {
    ".css": "text/css; charset=utf-8",
    ".html": "text/html; charset=utf-8",
    ".ico": "image/x-icon",
    ".js": "application/javascript; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".mjs": "application/javascript; charset=utf-8",
    ".png": "image/png",
    ".svg": "image/svg+xml",
    ".txt": "text/plain; charset=utf-8",
    ".woff2": "font/woff2",
}

from . import report as docs
from .engine import (
    SYSTEM_ARCHITECT,
    Clock,
    Phase,
    Resolution,
    ResolutionKind,
    ProcessState,
    resolve_conflict,
    run_harmonization,
    run_interface_definition,
    system_clock,
)
from .errors import (
    ConflictingDecisions,
    DigestMismatch,
    InvalidProposal,
    InvalidResolution,
    InvalidThreshold,
    PiforgeError,
    PortUnavailable,
    RoleViolation,
    StaleDecision,
    UnknownConflict,
    UnknownNode,
    UnknownProposal,
    WrongPhase,
)
from .model import Attribution, Role
from .pid import Decision, Verdict
from .store import load_project, save_project
from .units import HERTZ, SECOND, BIT, Quantity


def _json_bytes(doc) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _status_for(exc: PiforgeError) -> tuple[int, str]:
    if isinstance(exc, (StaleDecision, DigestMismatch)):
        return 409, "stale_digest"
    if isinstance(exc, RoleViolation):
        return 403, "role_violation"
    if isinstance(exc, (UnknownProposal, UnknownConflict, UnknownNode)):
        return 404, "unknown_entity"
    if isinstance(
        exc,
        (
            InvalidProposal,
            InvalidResolution,
            ConflictingDecisions,
            WrongPhase,
            InvalidThreshold,
        ),
    ):
        return 400, "invalid_request"
    return 500, "internal_error"


class ApiHttpServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(
        self,
        address,
        handler,
        project_dir: Path,
        state: ProcessState,
        read_only: bool,
        clock: Clock,
        static_root: Optional[Path] = None,
    ) -> None:
        super().__init__(address, handler)
        self.project_dir = project_dir
        self.state = state
        self.read_only = read_only
        self.clock = clock
        self.static_root = static_root
        self.write_lock = threading.Lock()


class _Handler(BaseHTTPRequestHandler):
    server: ApiHttpServer

    def log_message(self, format: str, *args) -> None:
        pass  # keep test output and demo sessions quiet

    def _send(self, status: int, doc) -> None:
        body = _json_bytes(doc)
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, code: str, message: str) -> None:
        self._send(
            status,
            {
                "status": status,
                "code": code,
                "message": message,
                "digest": self.server.state.current_digest,
            },
        )

    def _fail(self, exc: PiforgeError) -> None:
        status, code = _status_for(exc)
        self._error(status, code, str(exc))

    # Reads --------------------------------------------------------------

    def _serve_asset(self, path: str) -> None:
        root = self.server.static_root
        if root is None:
            self._error(404, "unknown_endpoint", f"no endpoint {path!r}")
            return
        root = root.resolve()
        target = (root / path.lstrip("/")).resolve()
        if target != root and root not in target.parents:
            self._error(404, "unknown_endpoint", f"no asset {path!r}")
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._error(404, "unknown_endpoint", f"no asset {path!r}")
            return
        body = target.read_bytes()
        self.send_response(200)
        content_type = _CONTENT_TYPES.get(
            target.suffix.lower(), "application/octet-stream"
        )
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:
        with self.server.write_lock:
            state = self.server.state
        path = self.path.split("?", 1)[0].rstrip("/") or "/"
        try:
            if path == "/api/version":
                doc = docs.version_document(state)
                doc["read_only"] = self.server.read_only
                self._send(200, doc)
            elif path == "/api/pilog":
                self._send(200, docs.pilog_document(state))
            elif path == "/api/proposals":
                self._send(200, docs.proposals_document(state))
            elif path == "/api/conflicts":
                self._send(200, docs.conflicts_document(state))
            elif path == "/api/graph":
                self._send(200, docs.graph_payload(state))
            elif path == "/api/coverage":
                self._send(200, docs.coverage_document(state))
            elif path == "/api/icd":
                self._send(200, docs.icd_document(state))
            elif path == "/api/proreq":
                self._send(200, docs.proreq_document(state))
            elif path == "/api/process/state":
                self._send(200, docs.process_document(state))
            elif path.startswith("/api/trace/"):
                node = path[len("/api/trace/") :]
                self._send(200, docs.trace_document(state, node))
            elif path == "/api" or path.startswith("/api/"):
                self._error(404, "unknown_endpoint", f"no endpoint {path!r}")
            else:
                self._serve_asset(path)
        except PiforgeError as exc:
            self._fail(exc)

    # Mutations ----------------------------------------------------------

    def _read_body(self) -> Optional[dict]:
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b""
            doc = json.loads(raw.decode("utf-8")) if raw else {}
        except (ValueError, UnicodeDecodeError):
            self._error(400, "invalid_request", "body is not valid JSON")
            return None
        if not isinstance(doc, dict):
            self._error(400, "invalid_request", "body must be a JSON object")
            return None
        return doc

    def _attribution(self, doc, field: str) -> Attribution:
        entry = doc.get(field)
        if not isinstance(entry, dict):
            raise InvalidProposal(f"{field} must be an object with role and name")
        try:
            role = Role(str(entry.get("role", "")))
        except ValueError:
            raise InvalidProposal(f"unknown role {entry.get('role')!r}") from None
        name = str(entry.get("name", "")).strip()
        if not name:
            raise InvalidProposal(f"{field} needs a nonempty name")
        return Attribution(role, name)

    def _advance_interfaces(self, state: ProcessState) -> ProcessState:
        # One engine pass per mutation keeps the loop observable: a
        # coverage gap or fresh conflict waits for the next client action.
        if state.phase is Phase.INTERFACE_DEFINITION:
            return run_interface_definition(
                state, SYSTEM_ARCHITECT, self.server.clock
            )
        if state.phase is Phase.CONFLICT_RESOLUTION and not state.conflicts:
            return run_interface_definition(
                state, SYSTEM_ARCHITECT, self.server.clock
            )
        return state

    def _mutate(self, fn: Callable[[ProcessState], ProcessState]) -> None:
        if self.server.read_only:
            self._error(403, "read_only", "server is running read-only")
            return
        with self.server.write_lock:
            state = self.server.state
            try:
                new_state = self._advance_interfaces(fn(state))
            except PiforgeError as exc:
                self._fail(exc)
                return
            save_project(new_state, self.server.project_dir)
            self.server.state = new_state
        self._send(200, docs.process_document(new_state))

    def do_POST(self) -> None:
        path = self.path.rstrip("/")
        body = self._read_body()
        if body is None:
            return

        if path.startswith("/api/proposals/") and path.endswith("/decision"):
            proposal_id = path[len("/api/proposals/") : -len("/decision")]
            self._decision(proposal_id, body)
        elif path.startswith("/api/conflicts/") and path.endswith("/resolution"):
            conflict_id = path[len("/api/conflicts/") : -len("/resolution")]
            self._resolution(conflict_id, body)
        else:
            self._error(404, "unknown_endpoint", f"no endpoint {path!r}")

    def _decision(self, proposal_id: str, body: dict) -> None:
        def apply(state: ProcessState) -> ProcessState:
            try:
                verdict = Verdict(str(body.get("verdict", "")))
            except ValueError:
                raise InvalidProposal(
                    f"verdict must be merge or keep_separate, got {body.get('verdict')!r}"
                ) from None
            rationale = str(body.get("rationale", "")).strip()
            if not rationale:
                raise InvalidProposal("a decision needs a nonempty rationale")
            decision = Decision(
                id=f"D-{len(state.decisions) + 1:03d}",
                proposal=proposal_id,
                verdict=verdict,
                decided_by=self._attribution(body, "decided_by"),
                rationale=rationale,
                bundle_digest=str(body.get("digest", "")),
            )
            return run_harmonization(state, [decision], self.server.clock)

        self._mutate(apply)

    def _resolution(self, conflict_id: str, body: dict) -> None:
        def apply(state: ProcessState) -> ProcessState:
            digest = str(body.get("digest", ""))
            if digest != state.current_digest:
                raise StaleDecision(
                    f"resolution was made against digest {digest[:12]}..., "
                    f"state is at {state.current_digest[:12]}..."
                )
            try:
                kind = ResolutionKind(str(body.get("kind", "")))
            except ValueError:
                raise InvalidResolution(
                    f"unknown resolution kind {body.get('kind')!r}"
                ) from None
            actors_doc = body.get("actors")
            if not isinstance(actors_doc, list) or not actors_doc:
                raise InvalidResolution("actors must be a nonempty list")
            actors = [
                self._attribution({"actor": entry}, "actor") for entry in actors_doc
            ]

            def quantity(field: str, unit) -> Optional[Quantity]:
                value = body.get(field)
                if value is None:
                    return None
                return Quantity(float(value), unit)

            resolution = Resolution(
                kind=kind,
                rationale=str(body.get("rationale", "")),
                new_rate=quantity("new_rate_hz", HERTZ),
                new_payload=quantity("new_payload_bits", BIT),
                new_freshness=quantity("new_freshness_s", SECOND),
                target_bus=body.get("target_bus"),
            )
            return resolve_conflict(
                state, conflict_id, resolution, actors, self.server.clock
            )

        self._mutate(apply)


class ApiServer:
    """Running service handle: .port to reach it, .stop() to tear down."""

    def __init__(self, httpd: ApiHttpServer, thread: threading.Thread) -> None:
        self._httpd = httpd
        self._thread = thread

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    @property
    def state(self) -> ProcessState:
        return self._httpd.state

    def stop(self) -> None:
        self._httpd.shutdown()
        self._thread.join(timeout=5)
        self._httpd.server_close()


def serve(
    project_dir: str | Path,
    port: int = 0,
    read_only: bool = False,
    clock: Clock = system_clock,
    static_dir: Optional[str | Path] = None,
) -> ApiServer:
    """Load the project and serve it; port 0 picks a free port.

    ``static_dir`` mounts a directory of built workbench assets on every
    path outside ``/api``; without it those paths answer 404.
    """

    state = load_project(project_dir)
    try:
        httpd = ApiHttpServer(
            ("127.0.0.1", port),
            _Handler,
            Path(project_dir),
            state,
            read_only,
            clock,
            static_root=None if static_dir is None else Path(static_dir),
        )
    except OSError as exc:
        raise PortUnavailable(f"cannot bind port {port}: {exc}") from exc
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    return ApiServer(httpd, thread)
