"""HTTP service: endpoint contracts, optimistic concurrency, durability."""

from __future__ import annotations

import json
import threading

import pytest
import requests

from rusforge import save_project
from rusforge.service import make_server

from conftest import build_search_project, build_work_plan_project


@pytest.fixture
def server(tmp_path):
    httpd = make_server("127.0.0.1", 0, tmp_path / "storage")
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    yield base, tmp_path / "storage"
    httpd.shutdown()
    httpd.server_close()
    thread.join(timeout=5)


def _doc(project) -> dict:
    return json.loads(save_project(project).decode())


def _create(base, project) -> tuple[str, int]:
    response = requests.post(f"{base}/projects", json=_doc(project))
    assert response.status_code == 201, response.text
    body = response.json()
    return body["id"], body["revision"]


def test_project_crud(server):
    base, _ = server
    project_id, revision = _create(base, build_work_plan_project())
    assert revision == 1

    listing = requests.get(f"{base}/projects").json()["projects"]
    assert [p["id"] for p in listing] == [project_id]

    got = requests.get(f"{base}/projects/{project_id}").json()
    assert got["revision"] == 1
    assert got["project"]["name"] == "t1"

    doc = got["project"]
    doc["actors"][0]["use_cases"][0]["title"] = "renamed"
    put = requests.put(f"{base}/projects/{project_id}", json={"revision": 1, "project": doc})
    assert put.status_code == 200
    assert put.json()["revision"] == 2

    stale = requests.put(f"{base}/projects/{project_id}", json={"revision": 1, "project": doc})
    assert stale.status_code == 409
    assert stale.json()["current"] == 2

    deleted = requests.delete(f"{base}/projects/{project_id}")
    assert deleted.status_code == 204
    assert requests.get(f"{base}/projects/{project_id}").status_code == 404


def test_unknown_project_404(server):
    base, _ = server
    assert requests.get(f"{base}/projects/nope").status_code == 404
    assert requests.post(f"{base}/projects/nope/validate", json={}).status_code == 404


def test_invalid_document_422(server):
    base, _ = server
    response = requests.post(f"{base}/projects", json={"rusforge_version": 1, "name": "x", "templates": ["<S> <O>"]})
    assert response.status_code == 422
    body = response.json()
    assert body["error"] == "E_SCHEMA"
    assert body["path"] == "$.templates[0]"


def test_validate_statement(server):
    base, _ = server
    project_id, _ = _create(base, build_work_plan_project())
    url = f"{base}/projects/{project_id}/validate-statement"

    ok = requests.post(url, json={"text": "user selects an action"}).json()
    assert ok == {
        "ok": True,
        "template": "t1",
        "triples": [["user", "selects", "action"]],
    }

    no_match = requests.post(url, json={"text": "user clicks"}).json()
    assert no_match == {"ok": False, "reason": "no_match"}

    lex = requests.post(url, json={"text": "user s$es list"}).json()
    assert lex == {"ok": False, "reason": "lex_error", "column": 6}


def test_validate_statement_matches_full_validation(server):
    base, _ = server
    project_id, _ = _create(base, build_search_project())
    report = requests.post(f"{base}/projects/{project_id}/validate", json={}).json()
    assert report["ok"] is True
    url = f"{base}/projects/{project_id}/validate-statement"
    for step in report["steps"]:
        verdict = requests.post(url, json={"text": step["text"]}).json()
        assert verdict["ok"] == step["ok"]
        if verdict["ok"]:
            assert verdict["triples"] == step["triples"]


def test_extraction_endpoint(server):
    base, _ = server
    project_id, _ = _create(base, build_search_project())
    report = requests.get(f"{base}/projects/{project_id}/extraction").json()
    assert len(report["entities"]) == 7
    assert len(report["predicates"]) == 6
    assert report["warnings"] == []


def test_extraction_unvalidated_422(server):
    base, _ = server
    doc = _doc(build_work_plan_project())
    doc["actors"][0]["use_cases"][0]["main"][0]["text"] = "user clicks"
    response = requests.post(f"{base}/projects", json=doc)
    project_id = response.json()["id"]
    result = requests.get(f"{base}/projects/{project_id}/extraction")
    assert result.status_code == 422
    assert result.json()["error"] == "E_UNVALIDATED"
    assert result.json()["steps"] == ["user/uc1/main:1"]


def test_types_replacement_bumps_revision(server):
    base, _ = server
    project_id, _ = _create(base, build_work_plan_project())
    types = dict(build_work_plan_project().type_assignments, insertion="Action")
    response = requests.put(f"{base}/projects/{project_id}/types", json={"revision": 1, "types": types})
    assert response.status_code == 200
    assert response.json()["revision"] == 2
    got = requests.get(f"{base}/projects/{project_id}").json()
    assert got["project"]["type_assignments"]["insertion"] == "Action"

    stale = requests.put(f"{base}/projects/{project_id}/types", json={"revision": 1, "types": types})
    assert stale.status_code == 409


def test_kb_endpoint(server):
    base, _ = server
    project_id, _ = _create(base, build_work_plan_project())
    body = requests.post(f"{base}/projects/{project_id}/kb", json={}).json()
    assert "<urn:ucat:proj:t1#user> <urn:ucat:proj:t1#inserts> <urn:ucat:proj:t1#project_id> .\n" in body["ntriples"]
    assert body["dot"].startswith("digraph")


def test_kb_untyped_payload(server):
    base, _ = server
    doc = _doc(build_work_plan_project())
    del doc["type_assignments"]["work_plan"]
    project_id = requests.post(f"{base}/projects", json=doc).json()["id"]
    response = requests.post(f"{base}/projects/{project_id}/kb", json={})
    assert response.status_code == 422
    assert response.json() == {"error": "E_UNTYPED", "entities": ["work_plan"]}
    with_default = requests.post(f"{base}/projects/{project_id}/kb", json={"default_type": "Thing"})
    assert with_default.status_code == 200


def test_query_endpoint(server):
    base, _ = server
    project_id, _ = _create(base, build_work_plan_project())
    response = requests.post(
        f"{base}/projects/{project_id}/query",
        json={"query": "SELECT ?s WHERE { ?s ns:confirms ?o . }"},
    ).json()
    assert response["columns"] == ["s"]
    assert response["rows"] == [["urn:ucat:proj:t1#system"]]

    bad = requests.post(f"{base}/projects/{project_id}/query", json={"query": "SELECT nope"})
    assert bad.status_code == 422
    assert bad.json()["error"] == "E_Q_SYNTAX"
    assert "position" in bad.json()


def test_persistence_survives_restart(server, tmp_path):
    base, storage = server
    project_id, _ = _create(base, build_search_project())
    types = dict(build_search_project().type_assignments, list="Listing")
    assert (
        requests.put(f"{base}/projects/{project_id}/types", json={"revision": 1, "types": types}).status_code
        == 200
    )
    before = requests.get(f"{base}/projects/{project_id}").json()

    # a fresh server over the same storage reproduces the accepted state
    httpd = make_server("127.0.0.1", 0, storage)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    try:
        base2 = f"http://127.0.0.1:{httpd.server_address[1]}"
        after = requests.get(f"{base2}/projects/{project_id}").json()
        assert after == before
        assert after["revision"] == 2
    finally:
        httpd.shutdown()
        httpd.server_close()
        thread.join(timeout=5)


def test_concurrent_puts_one_winner(server):
    base, _ = server
    project_id, _ = _create(base, build_work_plan_project())
    doc = requests.get(f"{base}/projects/{project_id}").json()["project"]
    statuses = []
    barrier = threading.Barrier(2)

    def put(title):
        body = json.loads(json.dumps(doc))
        body["actors"][0]["use_cases"][0]["title"] = title
        barrier.wait()
        response = requests.put(f"{base}/projects/{project_id}", json={"revision": 1, "project": body})
        statuses.append(response.status_code)

    threads = [threading.Thread(target=put, args=(f"writer {i}",)) for i in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(statuses) == [200, 409]
    assert requests.get(f"{base}/projects/{project_id}").json()["revision"] == 2


def test_status_page_without_ui(server):
    base, _ = server
    response = requests.get(f"{base}/")
    assert response.status_code == 200
    assert "rusforge" in response.text


def test_static_ui_serving(tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>editor</title>")
    (ui / "app.js").write_text("console.log('hi')")
    sibling = tmp_path / "ui-private"
    sibling.mkdir()
    (sibling / "secret.txt").write_text("nope")
    httpd = make_server("127.0.0.1", 0, tmp_path / "storage", ui_dir=str(ui))
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    try:
        base = f"http://127.0.0.1:{httpd.server_address[1]}"
        index = requests.get(f"{base}/")
        assert index.status_code == 200
        assert "editor" in index.text
        js = requests.get(f"{base}/app.js")
        assert js.status_code == 200
        assert js.headers["Content-Type"].startswith("text/javascript")
        assert requests.get(f"{base}/../etc/passwd").status_code in (400, 404)
        # a raw request escaping into a sibling directory with the same
        # name prefix must not resolve
        import http.client

        conn = http.client.HTTPConnection("127.0.0.1", httpd.server_address[1])
        conn.request("GET", "/../ui-private/secret.txt", headers={"Host": "x"})
        assert conn.getresponse().status == 404
        conn.close()
        # API still wins over static paths
        assert requests.get(f"{base}/projects").status_code == 200
    finally:
        httpd.shutdown()
        httpd.server_close()
        thread.join(timeout=5)
