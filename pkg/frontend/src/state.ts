/**
 * Editor state helpers, kept pure so they are testable without a DOM.
 *
 * The editor never interprets statement text itself: a row's verdict is
 * whatever the service said for exactly that text. Rows track the last
 * verdict together with the text it applies to, so stale verdicts are
 * rendered as "unverified" instead of guessing.
 */

import type { ApiError, StatementVerdict, StepDoc, Side } from "./api.js";

export type RowVerdict =
  | { kind: "valid"; triples: string[][] }
  | { kind: "invalid"; reason: string; column?: number }
  | { kind: "unverified" };

export interface EditorRow {
  side: Side;
  text: string;
  /** verdict for verdictText (not necessarily the current text) */
  verdict: RowVerdict | null;
  verdictText: string;
}

export function newRow(side: Side = "user", text = ""): EditorRow {
  return { side, text, verdict: null, verdictText: "" };
}

export function verdictFromResponse(response: StatementVerdict): RowVerdict {
  if (response.ok) {
    return { kind: "valid", triples: response.triples ?? [] };
  }
  return {
    kind: "invalid",
    reason: response.reason ?? "no_match",
    ...(response.column !== undefined ? { column: response.column } : {}),
  };
}

export function unverified(): RowVerdict {
  return { kind: "unverified" };
}

/** The verdict to render for a row: null means "not yet committed". */
export function effectiveVerdict(row: EditorRow): RowVerdict | null {
  if (row.verdict === null) {
    return null;
  }
  if (row.verdict.kind !== "unverified" && row.verdictText !== row.text) {
    return null; // edited since last check
  }
  return row.verdict;
}

/** CSS class for a row, derived from the service verdict alone. */
export function rowClass(verdict: RowVerdict | null): string {
  if (verdict === null) {
    return "row-pending";
  }
  switch (verdict.kind) {
    case "valid":
      return "row-valid";
    case "invalid":
      return "row-invalid";
    case "unverified":
      return "row-unverified";
  }
}

export function rowTooltip(verdict: RowVerdict | null): string {
  if (verdict === null) {
    return "";
  }
  if (verdict.kind === "valid") {
    return verdict.triples.map((t) => `<${t.join(", ")}>`).join("\n");
  }
  if (verdict.kind === "invalid") {
    return verdict.reason === "lex_error"
      ? `invalid character at column ${verdict.column}`
      : "no template matches this statement";
  }
  return "not verified (service unreachable); editing continues";
}

/** Rows with text become contiguous numbered steps; blank rows are skipped. */
export function rowsToSteps(rows: EditorRow[]): StepDoc[] {
  const steps: StepDoc[] = [];
  for (const row of rows) {
    const text = row.text.trim();
    if (text === "") {
      continue;
    }
    steps.push({ index: steps.length + 1, side: row.side, text });
  }
  return steps;
}

export function stepsToRows(steps: StepDoc[]): EditorRow[] {
  return [...steps]
    .sort((a, b) => a.index - b.index)
    .map((step) => newRow(step.side, step.text));
}

/** Entities still missing a type, for the build-failure checklist. */
export function untypedChecklist(
  entities: { lexeme: string }[],
  types: Record<string, string>,
): string[] {
  return entities
    .map((e) => e.lexeme)
    .filter((lexeme) => !(types[lexeme] ?? "").trim())
    .sort();
}

export function isRevisionConflict(error: unknown): error is ApiError {
  return typeof error === "object" && error !== null && (error as ApiError).status === 409;
}

// ---------------------------------------------------------------------------
// Graph preview: parse the DOT export back into a drawable model
// ---------------------------------------------------------------------------

export interface GraphModel {
  instances: string[];
  types: string[];
  edges: { from: string; to: string; label: string }[];
  typeEdges: { from: string; to: string }[];
}

const NODE_LINE = /^\s*"((?:[^"\\]|\\.)*)" \[shape=(ellipse|box)\];$/;
const EDGE_LINE = /^\s*"((?:[^"\\]|\\.)*)" -> "((?:[^"\\]|\\.)*)" \[(label="((?:[^"\\]|\\.)*)"|style=dashed)\];$/;

function unquote(raw: string): string {
  return raw.replace(/\\(.)/g, "$1");
}

export function parseDot(dot: string): GraphModel {
  const model: GraphModel = { instances: [], types: [], edges: [], typeEdges: [] };
  for (const line of dot.split("\n")) {
    const node = NODE_LINE.exec(line);
    if (node) {
      (node[2] === "ellipse" ? model.instances : model.types).push(unquote(node[1]));
      continue;
    }
    const edge = EDGE_LINE.exec(line);
    if (edge) {
      if (edge[3] === "style=dashed") {
        model.typeEdges.push({ from: unquote(edge[1]), to: unquote(edge[2]) });
      } else {
        model.edges.push({ from: unquote(edge[1]), to: unquote(edge[2]), label: unquote(edge[4] ?? "") });
      }
    }
  }
  return model;
}

export interface Point {
  x: number;
  y: number;
}

/** Deterministic circular layout matching the node order of the DOT text. */
export function circularLayout(model: GraphModel, radius: number, center: Point): Map<string, Point> {
  const positions = new Map<string, Point>();
  const n = Math.max(model.instances.length, 1);
  model.instances.forEach((name, i) => {
    const angle = Math.PI / 2 + (2 * Math.PI * i) / n;
    positions.set(name, {
      x: center.x + radius * Math.cos(angle),
      y: center.y - radius * Math.sin(angle),
    });
  });
  const m = Math.max(model.types.length, 1);
  model.types.forEach((name, i) => {
    const angle = Math.PI / 2 + (2 * Math.PI * (i + 0.5)) / m;
    positions.set(name, {
      x: center.x + 1.55 * radius * Math.cos(angle),
      y: center.y - 1.55 * radius * Math.sin(angle),
    });
  });
  return positions;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Standalone SVG rendering of the graph model. */
export function graphToSvg(model: GraphModel, size = 520): string {
  const center = { x: size / 2, y: size / 2 };
  const positions = circularLayout(model, size * 0.3, center);
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${size} ${size}" class="kb-graph">`,
  ];
  const line = (a: Point, b: Point, cls: string) =>
    `<line x1="${a.x.toFixed(1)}" y1="${a.y.toFixed(1)}" x2="${b.x.toFixed(1)}" y2="${b.y.toFixed(1)}" class="${cls}"/>`;
  for (const edge of model.typeEdges) {
    const a = positions.get(edge.from);
    const b = positions.get(edge.to);
    if (a && b) {
      parts.push(line(a, b, "edge-type"));
    }
  }
  for (const edge of model.edges) {
    const a = positions.get(edge.from);
    const b = positions.get(edge.to);
    if (!a || !b) {
      continue;
    }
    parts.push(line(a, b, "edge-assertion"));
    parts.push(
      `<text x="${((a.x + b.x) / 2).toFixed(1)}" y="${((a.y + b.y) / 2).toFixed(1)}" class="edge-label">${escapeXml(edge.label)}</text>`,
    );
  }
  for (const [cls, names] of [
    ["node-instance", model.instances],
    ["node-type", model.types],
  ] as const) {
    for (const name of names) {
      const p = positions.get(name)!;
      parts.push(
        `<g class="${cls}"><rect x="${(p.x - 44).toFixed(1)}" y="${(p.y - 12).toFixed(1)}" width="88" height="24" rx="${cls === "node-instance" ? 12 : 3}"/><text x="${p.x.toFixed(1)}" y="${(p.y + 4).toFixed(1)}">${escapeXml(name)}</text></g>`,
      );
    }
  }
  parts.push("</svg>");
  return parts.join("");
}
