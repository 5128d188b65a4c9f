"""HTTP facade over the core for the interactive editor.

JSON over HTTP/1.1. Project documents are stored one canonical file per
project id under the storage directory, with a sidecar revision counter.
Mutations use optimistic concurrency: writers send the revision they based
their change on and get 409 when it is stale. Mutations to one project are
serialized behind a per-project lock; reads snapshot the latest accepted
revision. All core operations are pure, so concurrent reads need no locks.

Endpoints (all request/response bodies JSON):

    GET    /projects                          list {id, name, revision}
    POST   /projects                          create from a project document
    GET    /projects/{id}                     {id, revision, project}
    PUT    /projects/{id}                     {revision, project} -> new revision
    DELETE /projects/{id}
    POST   /projects/{id}/validate-statement  {text} -> {ok, triples?|reason?}
    POST   /projects/{id}/validate            full validation report
    GET    /projects/{id}/extraction          extraction report + warnings
    PUT    /projects/{id}/types               {revision, types} -> new revision
    POST   /projects/{id}/kb                  {default_type?} -> {ntriples, dot}
    POST   /projects/{id}/query               {query} -> {columns, rows}

Static files of the editor bundle are served at every other GET path when a
UI directory is configured.
"""

from __future__ import annotations

import json
import re
import sys
import threading
from dataclasses import replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .document import Project, load_project, save_project, validate_project
from .errors import (
    LexError,
    QuerySyntaxError,
    QueryUnboundError,
    RusforgeError,
    SchemaError,
    UntypedError,
    VersionError,
)
from .extraction import assign_types, check_glossary, extract, report_to_dict
from .kb import build_kb, export_graph, serialize_ntriples
from .query import evaluate, parse_query, results_to_table
from .templates import match_against_set

_ID_BAD = re.compile(r"[^a-z0-9_-]+")

CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class ApiError(Exception):
    def __init__(self, status: int, payload: dict):
        super().__init__(payload.get("error", "error"))
        self.status = status
        self.payload = payload


class ProjectStore:
    """Projects on disk plus in-memory revisions and per-project locks."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._projects: dict[str, tuple[Project, int]] = {}
        self._locks: dict[str, threading.Lock] = {}
        for path in sorted(self.root.glob("*.json")):
            project_id = path.stem
            project = load_project(path.read_bytes())
            revision = 1
            rev_path = self._rev_path(project_id)
            if rev_path.exists():
                revision = int(rev_path.read_text().strip() or "1")
            self._projects[project_id] = (project, revision)
            self._locks[project_id] = threading.Lock()

    def _rev_path(self, project_id: str) -> Path:
        return self.root / f"{project_id}.rev"

    def _persist(self, project_id: str, project: Project, revision: int):
        data = save_project(project)
        tmp = self.root / f"{project_id}.json.tmp"
        tmp.write_bytes(data)
        tmp.replace(self.root / f"{project_id}.json")
        self._rev_path(project_id).write_text(str(revision))

    def list(self) -> list[dict]:
        with self._lock:
            return [
                {"id": project_id, "name": project.name, "revision": revision}
                for project_id, (project, revision) in sorted(self._projects.items())
            ]

    def create(self, project: Project) -> tuple[str, int]:
        with self._lock:
            base = _ID_BAD.sub("-", project.name.lower()).strip("-") or "project"
            project_id = base
            suffix = 2
            while project_id in self._projects:
                project_id = f"{base}-{suffix}"
                suffix += 1
            self._projects[project_id] = (project, 1)
            self._locks[project_id] = threading.Lock()
            self._persist(project_id, project, 1)
            return project_id, 1

    def get(self, project_id: str) -> tuple[Project, int]:
        with self._lock:
            if project_id not in self._projects:
                raise ApiError(404, {"error": "unknown_project", "id": project_id})
            return self._projects[project_id]

    def replace(self, project_id: str, project: Project, expected_revision: int) -> int:
        return self.mutate(project_id, expected_revision, lambda _current: project)

    def mutate(self, project_id: str, expected_revision: int, fn) -> int:
        lock = self._project_lock(project_id)
        with lock:
            project, current = self.get(project_id)
            if expected_revision != current:
                raise ApiError(409, {"error": "revision_conflict", "current": current})
            updated = fn(project)
            revision = current + 1
            self._persist(project_id, updated, revision)
            with self._lock:
                self._projects[project_id] = (updated, revision)
            return revision

    def delete(self, project_id: str):
        lock = self._project_lock(project_id)
        with lock:
            with self._lock:
                if project_id not in self._projects:
                    raise ApiError(404, {"error": "unknown_project", "id": project_id})
                del self._projects[project_id]
                del self._locks[project_id]
            (self.root / f"{project_id}.json").unlink(missing_ok=True)
            self._rev_path(project_id).unlink(missing_ok=True)

    def _project_lock(self, project_id: str) -> threading.Lock:
        with self._lock:
            if project_id not in self._locks:
                raise ApiError(404, {"error": "unknown_project", "id": project_id})
            return self._locks[project_id]


def _project_doc(project: Project) -> dict:
    return json.loads(save_project(project).decode("utf-8"))


def _validation_doc(report) -> dict:
    return {
        "ok": report.ok,
        "steps": [
            {
                "actor": v.ref.actor,
                "use_case": v.ref.use_case,
                "scenario": v.ref.scenario,
                "step": v.ref.step,
                "side": v.side,
                "text": v.text,
                "ok": v.ok,
                **(
                    {"triples": [[t.subject, t.predicate, t.object] for t in v.match.triples]}
                    if v.ok
                    else {"reason": v.reason, **({"column": v.column} if v.column is not None else {})}
                ),
            }
            for v in report.entries
        ],
        "warnings": [
            {
                "code": w.code,
                "actor": w.ref.actor,
                "use_case": w.ref.use_case,
                "scenario": w.ref.scenario,
                "step": w.ref.step,
                "side": w.side,
                "subject": w.subject,
            }
            for w in report.warnings
        ],
    }


class Api:
    """Transport-independent request handling, one method per endpoint."""

    def __init__(self, store: ProjectStore):
        self.store = store

    def list_projects(self) -> dict:
        return {"projects": self.store.list()}

    def create_project(self, body: dict) -> dict:
        project = self._parse_document(body)
        project_id, revision = self.store.create(project)
        return {"id": project_id, "revision": revision}

    def get_project(self, project_id: str) -> dict:
        project, revision = self.store.get(project_id)
        return {"id": project_id, "revision": revision, "project": _project_doc(project)}

    def put_project(self, project_id: str, body: dict) -> dict:
        revision = self._expect_revision(body)
        project = self._parse_document(body.get("project"))
        new_revision = self.store.replace(project_id, project, revision)
        return {"id": project_id, "revision": new_revision}

    def delete_project(self, project_id: str) -> None:
        self.store.delete(project_id)

    def validate_statement(self, project_id: str, body: dict) -> dict:
        project, _ = self.store.get(project_id)
        text = body.get("text")
        if not isinstance(text, str):
            raise ApiError(422, {"error": "E_SCHEMA", "message": "body needs a string 'text'"})
        try:
            result = match_against_set(text, project.template_set, project.determiners)
        except LexError as exc:
            return {"ok": False, "reason": "lex_error", "column": exc.column}
        if result is None:
            return {"ok": False, "reason": "no_match"}
        return {
            "ok": True,
            "template": result.template_id,
            "triples": [[t.subject, t.predicate, t.object] for t in result.triples],
        }

    def validate(self, project_id: str) -> dict:
        project, _ = self.store.get(project_id)
        return _validation_doc(validate_project(project))

    def extraction(self, project_id: str) -> dict:
        project, _ = self.store.get(project_id)
        report = validate_project(project)
        if not report.ok:
            raise ApiError(
                422,
                {
                    "error": "E_UNVALIDATED",
                    "steps": [
                        f"{v.ref.actor}/{v.ref.use_case}/{v.ref.scenario}:{v.ref.step}"
                        for v in report.diagnostics()
                    ],
                },
            )
        extraction = extract(report.project)
        warnings = check_glossary(extraction, project.glossary)
        return report_to_dict(extraction, warnings)

    def put_types(self, project_id: str, body: dict) -> dict:
        revision = self._expect_revision(body)
        types = body.get("types")
        if not isinstance(types, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in types.items()
        ):
            raise ApiError(422, {"error": "E_SCHEMA", "message": "body needs a 'types' object of strings"})
        try:
            new_revision = self.store.mutate(
                project_id, revision, lambda project: replace(project, type_assignments=dict(types))
            )
        except SchemaError as exc:
            raise ApiError(422, {"error": exc.code, "message": str(exc)}) from exc
        return {"id": project_id, "revision": new_revision}

    def build(self, project_id: str, body: dict) -> dict:
        project, _ = self.store.get(project_id)
        report = validate_project(project)
        if not report.ok:
            raise ApiError(422, {"error": "E_UNVALIDATED"})
        default_type = body.get("default_type")
        try:
            typed = assign_types(extract(report.project), project.type_assignments, default_type)
        except UntypedError as exc:
            raise ApiError(422, {"error": exc.code, "entities": list(exc.entities)}) from exc
        kb = build_kb(report.project, typed)
        return {
            "ntriples": serialize_ntriples(kb).decode("utf-8"),
            "dot": export_graph(kb).decode("utf-8"),
        }

    def query(self, project_id: str, body: dict) -> dict:
        project, _ = self.store.get(project_id)
        text = body.get("query")
        if not isinstance(text, str):
            raise ApiError(422, {"error": "E_SCHEMA", "message": "body needs a string 'query'"})
        report = validate_project(project)
        if not report.ok:
            raise ApiError(422, {"error": "E_UNVALIDATED"})
        try:
            typed = assign_types(extract(report.project), project.type_assignments)
        except UntypedError as exc:
            raise ApiError(422, {"error": exc.code, "entities": list(exc.entities)}) from exc
        kb = build_kb(report.project, typed)
        try:
            query = parse_query(text, kb.namespace)
        except (QuerySyntaxError, QueryUnboundError) as exc:
            payload = {"error": exc.code, "message": str(exc)}
            if isinstance(exc, QuerySyntaxError):
                payload["position"] = exc.position
            raise ApiError(422, payload) from exc
        return results_to_table(query, evaluate(query, kb))

    def _parse_document(self, doc) -> Project:
        if not isinstance(doc, dict):
            raise ApiError(422, {"error": "E_SCHEMA", "message": "expected a project document object"})
        try:
            return load_project(json.dumps(doc).encode("utf-8"))
        except (SchemaError, VersionError) as exc:
            payload = {"error": exc.code, "message": str(exc)}
            if isinstance(exc, SchemaError):
                payload["path"] = exc.path
            raise ApiError(422, payload) from exc

    def _expect_revision(self, body: dict) -> int:
        revision = body.get("revision")
        if not isinstance(revision, int) or isinstance(revision, bool):
            raise ApiError(422, {"error": "E_SCHEMA", "message": "body needs an integer 'revision'"})
        return revision


_ROUTES = [
    ("GET", re.compile(r"/projects$"), lambda api, m, body: api.list_projects()),
    ("POST", re.compile(r"/projects$"), lambda api, m, body: api.create_project(body)),
    ("GET", re.compile(r"/projects/([^/]+)$"), lambda api, m, body: api.get_project(m.group(1))),
    ("PUT", re.compile(r"/projects/([^/]+)$"), lambda api, m, body: api.put_project(m.group(1), body)),
    ("DELETE", re.compile(r"/projects/([^/]+)$"), lambda api, m, body: api.delete_project(m.group(1))),
    (
        "POST",
        re.compile(r"/projects/([^/]+)/validate-statement$"),
        lambda api, m, body: api.validate_statement(m.group(1), body),
    ),
    ("POST", re.compile(r"/projects/([^/]+)/validate$"), lambda api, m, body: api.validate(m.group(1))),
    ("GET", re.compile(r"/projects/([^/]+)/extraction$"), lambda api, m, body: api.extraction(m.group(1))),
    ("PUT", re.compile(r"/projects/([^/]+)/types$"), lambda api, m, body: api.put_types(m.group(1), body)),
    ("POST", re.compile(r"/projects/([^/]+)/kb$"), lambda api, m, body: api.build(m.group(1), body)),
    ("POST", re.compile(r"/projects/([^/]+)/query$"), lambda api, m, body: api.query(m.group(1), body)),
]


class Handler(BaseHTTPRequestHandler):
    api: Api = None  # set by make_server
    ui_dir: Path | None = None
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, status: int, payload):
        body = b"" if payload is None else json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(204 if payload is None and status == 200 else status)
        if body:
            self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ApiError(422, {"error": "E_SCHEMA", "message": f"request body is not JSON: {exc}"}) from exc
        if not isinstance(doc, dict):
            raise ApiError(422, {"error": "E_SCHEMA", "message": "request body must be a JSON object"})
        return doc

    def _dispatch(self, method: str):
        path = self.path.split("?", 1)[0].rstrip("/") or "/"
        for route_method, pattern, handler in _ROUTES:
            if route_method != method:
                continue
            m = pattern.fullmatch(path)
            if m:
                try:
                    body = self._read_body() if method in ("POST", "PUT") else {}
                    result = handler(self.api, m, body)
                except ApiError as exc:
                    self._send_json(exc.status, exc.payload)
                    return
                except RusforgeError as exc:
                    self._send_json(422, {"error": exc.code, "message": str(exc)})
                    return
                except Exception as exc:  # pragma: no cover - safety net
                    self._send_json(500, {"error": "internal", "message": repr(exc)})
                    return
                status = 201 if (method == "POST" and path == "/projects") else 200
                self._send_json(status, result)
                return
        if method == "GET" and self._serve_static(path):
            return
        self._send_json(404, {"error": "not_found", "path": path})

    def _serve_static(self, path: str) -> bool:
        if self.ui_dir is None:
            if path == "/":
                body = b"rusforge service is running; the API lives under /projects\n"
                self.send_response(200)
                self.send_header("Content-Type", "text/plain; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
                return True
            return False
        relative = "index.html" if path == "/" else path.lstrip("/")
        target = (self.ui_dir / relative).resolve()
        if not target.is_relative_to(self.ui_dir.resolve()) or not target.is_file():
            return False
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", CONTENT_TYPES.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)
        return True

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")

    def do_DELETE(self):
        self._dispatch("DELETE")


class Server(ThreadingHTTPServer):
    daemon_threads = True

    def handle_error(self, request, client_address):
        exc = sys.exc_info()[1]
        if isinstance(exc, (ConnectionResetError, BrokenPipeError)):
            return  # client went away mid-request; nothing to log
        super().handle_error(request, client_address)


def make_server(host: str, port: int, storage: Path, ui_dir: str | None = None) -> Server:
    store = ProjectStore(storage)
    api = Api(store)

    class BoundHandler(Handler):
        pass

    BoundHandler.api = api
    BoundHandler.ui_dir = Path(ui_dir) if ui_dir else None
    return Server((host, port), BoundHandler)


def run_server(host: str, port: int, storage: Path, ui_dir: str | None = None):
    server = make_server(host, port, storage, ui_dir)
    print(f"rusforge service on http://{host}:{server.server_address[1]}/ (storage: {storage})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
