"""Shared corpus fixtures.

Three real scenario projects are used throughout the suite:

* work_plan ("t1"): a four-step project/work-plan scenario over the single
  base template,
* groups: a six-step register-on-a-group scenario,
* search: a seven-step e-commerce keyword-search scenario whose step 3 is a
  multi-object statement.

The same projects exist as canonical JSON files under tests/fixtures/;
test_document asserts the two stay in sync.
"""

from __future__ import annotations

from pathlib import Path

import pytest

from rusforge import (
    Actor,
    Glossary,
    GlossaryEntry,
    Project,
    Scenario,
    Step,
    TemplateSet,
    UseCase,
    parse_template,
)

FIXTURES = Path(__file__).parent / "fixtures"


def _scenario(rows: list[tuple[str, str]]) -> Scenario:
    return Scenario(
        tuple(Step(i, side, text) for i, (side, text) in enumerate(rows, start=1))
    )


def build_work_plan_project() -> Project:
    return Project(
        name="t1",
        template_set=TemplateSet((parse_template("<S> <P> <O>", "t1"),)),
        type_assignments={
            "user": "Actor",
            "system": "System",
            "project_id": "Identifier",
            "project": "Project",
            "work_plan": "Document",
            "insertion": "Event",
        },
        actors=(
            Actor(
                "user",
                (
                    UseCase(
                        "uc1",
                        "manage work plan",
                        _scenario(
                            [
                                ("user", "user inserts project_id"),
                                ("system", "system confirms project"),
                                ("user", "user inserts work_plan"),
                                ("system", "system confirms insertion"),
                            ]
                        ),
                    ),
                ),
            ),
        ),
    )


def build_groups_project() -> Project:
    return Project(
        name="groups",
        template_set=TemplateSet(
            (
                parse_template("<S> <P> <O>", "t1"),
                parse_template("<S> <P> the <O>", "t2"),
            )
        ),
        type_assignments={
            "user": "Actor",
            "system": "System",
            "groups": "Collection",
            "group": "Group",
            "register": "Control",
            "success_message": "Message",
        },
        actors=(
            Actor(
                "user",
                (
                    UseCase(
                        "uc1",
                        "register on group",
                        _scenario(
                            [
                                ("user", "user clicks groups"),
                                ("system", "system provides the groups"),
                                ("user", "user selects group"),
                                ("user", "user clicks register"),
                                ("system", "system register user"),
                                ("system", "system provides success_message"),
                            ]
                        ),
                    ),
                ),
            ),
        ),
    )


def build_search_project() -> Project:
    terms = [
        "user", "system", "list", "search", "keyword", "search_criteria",
        "search_field", "clicks", "shows", "inserts", "performs", "creates",
        "checks",
    ]
    return Project(
        name="search",
        template_set=TemplateSet(
            (
                parse_template("<S> <P> <O>", "t1"),
                parse_template("<S> <P> in <O>", "t2"),
                parse_template("<S> <P> <O>+", "t3"),
            )
        ),
        glossary=Glossary(tuple(GlossaryEntry(t) for t in terms)),
        type_assignments={
            "user": "Actor",
            "system": "System",
            "search": "Action",
            "search_field": "Field",
            "keyword": "Input",
            "search_criteria": "Input",
            "list": "Collection",
        },
        actors=(
            Actor(
                "user",
                (
                    UseCase(
                        "uc1",
                        "search by keyword",
                        _scenario(
                            [
                                ("user", "user clicks in search"),
                                ("system", "system shows the search_field"),
                                ("user", "user inserts the keyword, search_criteria"),
                                ("system", "system performs search"),
                                ("system", "system creates list"),
                                ("system", "system shows list"),
                                ("user", "user checks list"),
                            ]
                        ),
                    ),
                ),
            ),
        ),
    )


@pytest.fixture
def work_plan_project() -> Project:
    return build_work_plan_project()


@pytest.fixture
def groups_project() -> Project:
    return build_groups_project()


@pytest.fixture
def search_project() -> Project:
    return build_search_project()


@pytest.fixture
def work_plan_path() -> Path:
    return FIXTURES / "work_plan.json"


@pytest.fixture
def groups_path() -> Path:
    return FIXTURES / "groups.json"


@pytest.fixture
def search_path() -> Path:
    return FIXTURES / "search.json"
