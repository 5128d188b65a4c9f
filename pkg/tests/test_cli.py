"""Command line behavior: exit codes, diagnostics, artifacts."""

from __future__ import annotations

import json

import pytest

from rusforge import (
    assign_types,
    build_kb,
    extract,
    save_project,
    serialize_ntriples,
    validate_project,
)
from rusforge.cli import main
from rusforge.kb import domain_subgraph

from conftest import build_search_project, build_work_plan_project


def _write_bad_step_project(tmp_path):
    doc = json.loads(save_project(build_work_plan_project()).decode())
    doc["actors"][0]["use_cases"][0]["main"][0]["text"] = "user clicks"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    return path


def _search_assertions_nt(tmp_path):
    project = build_search_project()
    report = validate_project(project)
    typed = assign_types(extract(report.project), project.type_assignments)
    kb = domain_subgraph(build_kb(report.project, typed))
    path = tmp_path / "search-assertions.nt"
    path.write_bytes(serialize_ntriples(kb))
    return path


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def test_validate_ok(work_plan_path, capsys):
    assert main(["validate", "--project", str(work_plan_path)]) == 0
    captured = capsys.readouterr()
    assert captured.out == ""
    assert captured.err == ""


def test_validate_reports_bad_step(tmp_path, capsys):
    path = _write_bad_step_project(tmp_path)
    assert main(["validate", "--project", str(path)]) == 1
    err = capsys.readouterr().err
    lines = [l for l in err.splitlines() if "no template matches" in l]
    assert len(lines) == 1
    assert 'user/uc1/main:1: no template matches: "user clicks"' in lines[0]


def test_validate_missing_file(tmp_path, capsys):
    assert main(["validate", "--project", str(tmp_path / "nope.json")]) == 2


def test_validate_schema_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"rusforge_version": 1, "name": "x", "templates": "oops"}')
    assert main(["validate", "--project", str(path)]) == 2
    assert "E_SCHEMA" in capsys.readouterr().err


def test_usage_error_exits_2(capsys):
    assert main(["validate"]) == 2
    assert main(["frobnicate"]) == 2


# ---------------------------------------------------------------------------
# extract
# ---------------------------------------------------------------------------


def test_extract_writes_report(work_plan_path, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["extract", "--project", str(work_plan_path), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["entities"]) == 6
    assert len(doc["predicates"]) == 2


def test_extract_glossary_check_quiet_when_covered(search_path, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["extract", "--project", str(search_path), "--glossary-check", "--out", str(out)]) == 0
    assert "W_UNKNOWN_TERM" not in capsys.readouterr().err


def test_extract_glossary_check_warns(work_plan_path, tmp_path, capsys):
    # the work_plan fixture has an empty glossary: every term warns
    out = tmp_path / "report.json"
    assert main(["extract", "--project", str(work_plan_path), "--glossary-check", "--out", str(out)]) == 0
    err = capsys.readouterr().err
    assert err.count("W_UNKNOWN_TERM") == 8  # 6 entities + 2 predicates


def test_extract_invalid_project_exits_1(tmp_path, capsys):
    path = _write_bad_step_project(tmp_path)
    assert main(["extract", "--project", str(path)]) == 1


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------


def test_build_writes_canonical_kb(work_plan_path, tmp_path):
    out = tmp_path / "kb.nt"
    assert main(["build", "--project", str(work_plan_path), "--out", str(out)]) == 0
    text = out.read_text()
    assert "<urn:ucat:proj:t1#user> <urn:ucat:proj:t1#inserts> <urn:ucat:proj:t1#project_id> .\n" in text
    again = tmp_path / "kb2.nt"
    assert main(["build", "--project", str(work_plan_path), "--out", str(again)]) == 0
    assert out.read_bytes() == again.read_bytes()


def test_build_untyped_exits_1(tmp_path, capsys):
    doc = json.loads(save_project(build_work_plan_project()).decode())
    del doc["type_assignments"]["insertion"]
    path = tmp_path / "untyped.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "kb.nt"
    assert main(["build", "--project", str(path), "--out", str(out)]) == 1
    assert "insertion" in capsys.readouterr().err
    assert main(["build", "--project", str(path), "--out", str(out), "--default-type", "Thing"]) == 0
    assert "#Thing>" in out.read_text()


def test_build_dot_and_fig(search_path, tmp_path):
    out = tmp_path / "kb.nt"
    dot = tmp_path / "kb.dot"
    fig = tmp_path / "kb.png"
    assert main(
        ["build", "--project", str(search_path), "--out", str(out), "--dot", str(dot), "--fig", str(fig)]
    ) == 0
    assert dot.read_text().startswith("digraph")
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_extract_fig(search_path, tmp_path):
    out = tmp_path / "report.json"
    fig = tmp_path / "counts.png"
    assert main(["extract", "--project", str(search_path), "--out", str(out), "--fig", str(fig)]) == 0
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_namespace_env_override(work_plan_path, tmp_path, monkeypatch):
    monkeypatch.setenv("RUSFORGE_NS", "urn:other:ns#")
    out = tmp_path / "kb.nt"
    assert main(["build", "--project", str(work_plan_path), "--out", str(out)]) == 0
    assert "<urn:other:ns#user>" in out.read_text()


# ---------------------------------------------------------------------------
# query
# ---------------------------------------------------------------------------


def test_query_user_objects(tmp_path, capsys):
    kb_path = _search_assertions_nt(tmp_path)
    assert main(["query", "--kb", str(kb_path), "SELECT ?o WHERE { ns:user ?p ?o . }"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "o"
    assert len(lines) == 5
    values = {line.rsplit("#", 1)[-1] for line in lines[1:]}
    assert values == {"search", "keyword", "search_criteria", "list"}


def test_query_empty_kb_header_only(tmp_path, capsys):
    kb_path = tmp_path / "empty.nt"
    kb_path.write_bytes(b"")
    assert main(["query", "--kb", str(kb_path), "SELECT ?s WHERE { ?s ?p ?o . }"]) == 0
    assert capsys.readouterr().out == "s\n"


def test_query_malformed_query_exits_2(tmp_path, capsys):
    kb_path = tmp_path / "empty.nt"
    kb_path.write_bytes(b"")
    assert main(["query", "--kb", str(kb_path), "SELECT ?s WHERE { }"]) == 2
    assert "E_Q_SYNTAX" in capsys.readouterr().err


def test_query_malformed_kb_exits_2(tmp_path, capsys):
    kb_path = tmp_path / "bad.nt"
    kb_path.write_text("this is not a triples file\n")
    assert main(["query", "--kb", str(kb_path), "SELECT ?s WHERE { ?s ?p ?o . }"]) == 2
    assert "E_NT_SYNTAX" in capsys.readouterr().err


def test_query_from_file_and_ns_flag(tmp_path, capsys):
    kb_path = _search_assertions_nt(tmp_path)
    query_path = tmp_path / "q.rq"
    query_path.write_text("SELECT ?o WHERE { ns:user ns:checks ?o . }")
    assert main(["query", "--kb", str(kb_path), "--file", str(query_path), "--ns", "urn:ucat:proj:search#"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1:] == ["urn:ucat:proj:search#list"]
    # inline and --file are mutually exclusive
    assert main(["query", "--kb", str(kb_path), "x", "--file", str(query_path)]) == 2


# ---------------------------------------------------------------------------
# pipeline composition
# ---------------------------------------------------------------------------


def test_pipeline_composes(search_path, tmp_path, capsys):
    assert main(["validate", "--project", str(search_path)]) == 0
    report = tmp_path / "report.json"
    assert main(["extract", "--project", str(search_path), "--out", str(report)]) == 0
    kb = tmp_path / "kb.nt"
    assert main(["build", "--project", str(search_path), "--out", str(kb)]) == 0
    report2 = tmp_path / "report2.json"
    kb2 = tmp_path / "kb2.nt"
    assert main(["extract", "--project", str(search_path), "--out", str(report2)]) == 0
    assert main(["build", "--project", str(search_path), "--out", str(kb2)]) == 0
    assert report.read_bytes() == report2.read_bytes()
    assert kb.read_bytes() == kb2.read_bytes()
    capsys.readouterr()
