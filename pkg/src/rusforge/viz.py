"""Figure rendering for reports.

Renders a knowledge-base graph or the extraction term counts to an image
file next to the textual artifacts. Uses a deterministic circular layout so
repeated runs produce the same picture; node placement is alphabetical.
"""

from __future__ import annotations

import math

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from matplotlib.patches import FancyArrowPatch

from .kb import IriTerm, KnowledgeBase, RDF_TYPE, UCAT_NS, domain_assertions

NODE_COLOR = "#dbe9f4"
TYPE_COLOR = "#f4e8db"
EDGE_COLOR = "#4a4a4a"
TYPE_EDGE_COLOR = "#b08a5a"


def _local(kb: KnowledgeBase, iri: str) -> str:
    if kb.namespace and iri.startswith(kb.namespace):
        return iri[len(kb.namespace):]
    return iri.rsplit("#", 1)[-1].rsplit("/", 1)[-1]


def kb_figure(kb: KnowledgeBase) -> Figure:
    """Instance graph: assertion edges labeled by predicate, dashed edges to
    type boxes."""
    assertions = sorted(
        (t.subject.iri, t.predicate.iri, t.object.iri)
        for t in domain_assertions(kb)
        if isinstance(t.object, IriTerm)
    )
    typings = sorted(
        (t.subject.iri, t.object.iri)
        for t in kb.triples
        if t.predicate.iri == RDF_TYPE
        and isinstance(t.object, IriTerm)
        and not t.object.iri.startswith(UCAT_NS)
    )
    instances = sorted({s for s, _, _ in assertions} | {o for _, _, o in assertions} | {s for s, _ in typings})
    types = sorted({o for _, o in typings})

    fig = Figure(figsize=(8, 8))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(111)
    ax.set_axis_off()
    ax.set_aspect("equal")

    positions: dict[str, tuple[float, float]] = {}
    for i, iri in enumerate(instances):
        angle = math.pi / 2 + 2 * math.pi * i / max(len(instances), 1)
        positions[iri] = (math.cos(angle), math.sin(angle))
    for i, iri in enumerate(types):
        angle = math.pi / 2 + 2 * math.pi * (i + 0.5) / max(len(types), 1)
        positions[iri] = (1.6 * math.cos(angle), 1.6 * math.sin(angle))

    def draw_edge(a: str, b: str, label: str | None, dashed: bool):
        xa, ya = positions[a]
        xb, yb = positions[b]
        arrow = FancyArrowPatch(
            (xa, ya),
            (xb, yb),
            arrowstyle="-|>",
            mutation_scale=12,
            color=TYPE_EDGE_COLOR if dashed else EDGE_COLOR,
            linestyle="--" if dashed else "-",
            shrinkA=18,
            shrinkB=18,
            connectionstyle="arc3,rad=0.08",
        )
        ax.add_patch(arrow)
        if label:
            ax.text(
                (xa + xb) / 2,
                (ya + yb) / 2,
                label,
                fontsize=7,
                ha="center",
                va="center",
                color=EDGE_COLOR,
                bbox={"boxstyle": "round,pad=0.15", "fc": "white", "ec": "none", "alpha": 0.8},
            )

    for s, p, o in assertions:
        draw_edge(s, o, _local(kb, p), dashed=False)
    for s, o in typings:
        draw_edge(s, o, None, dashed=True)
    for iri in instances:
        x, y = positions[iri]
        ax.text(
            x, y, _local(kb, iri), fontsize=8, ha="center", va="center",
            bbox={"boxstyle": "round,pad=0.35", "fc": NODE_COLOR, "ec": EDGE_COLOR},
        )
    for iri in types:
        x, y = positions[iri]
        ax.text(
            x, y, _local(kb, iri), fontsize=8, ha="center", va="center",
            bbox={"boxstyle": "square,pad=0.35", "fc": TYPE_COLOR, "ec": TYPE_EDGE_COLOR},
        )

    limit = 2.1 if types else 1.4
    ax.set_xlim(-limit, limit)
    ax.set_ylim(-limit, limit)
    fig.tight_layout()
    return fig


def term_counts_figure(report) -> Figure:
    """Horizontal bars of occurrence counts, entities and predicates."""
    labels = [e.lexeme for e in report.entities] + [p.lexeme for p in report.predicates]
    counts = [len(e.occurrences) for e in report.entities] + [
        len(p.occurrences) for p in report.predicates
    ]
    colors = [NODE_COLOR] * len(report.entities) + [TYPE_COLOR] * len(report.predicates)

    fig = Figure(figsize=(7, max(2.0, 0.35 * len(labels) + 1)))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(111)
    y = range(len(labels))
    ax.barh(y, counts, color=colors, edgecolor=EDGE_COLOR)
    ax.set_yticks(list(y), labels=labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("occurrences")
    if counts:
        ax.set_xticks(range(0, max(counts) + 1))
    ax.set_title("extracted terms (entities, then predicates)")
    fig.tight_layout()
    return fig


def save_figure(fig: Figure, path: str, dpi: int = 150):
    fig.savefig(path, dpi=dpi)
