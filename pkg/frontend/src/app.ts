/**
 * The editor application: project list, two-column step table with live
 * per-row validation, typing panel, knowledge-base preview and query
 * console. All verdicts and artifacts come from the service; the client
 * renders them and never re-implements the grammar.
 */

import {
  ApiError,
  Client,
  ExtractionDoc,
  ProjectDoc,
  ProjectEnvelope,
  Side,
  StepDoc,
} from "./api.js";
import {
  EditorRow,
  effectiveVerdict,
  graphToSvg,
  isRevisionConflict,
  newRow,
  parseDot,
  rowClass,
  rowTooltip,
  rowsToSteps,
  stepsToRows,
  unverified,
  untypedChecklist,
  verdictFromResponse,
} from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") {
      node.className = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  node.append(...children);
  return node;
}

interface Selection {
  actor: number;
  useCase: number;
}

export class App {
  private root: HTMLElement;
  private client: Client;
  private envelope: ProjectEnvelope | null = null;
  private rows: EditorRow[] = [];
  private selection: Selection = { actor: 0, useCase: 0 };
  private dirty = false;
  private saving = false;

  constructor(root: HTMLElement, client: Client) {
    this.root = root;
    this.client = client;
  }

  async start() {
    await this.renderProjectList();
  }

  // -- project list ---------------------------------------------------------

  private async renderProjectList() {
    this.root.replaceChildren();
    const listing = await this.client.listProjects().catch(() => ({ projects: [] }));
    const list = el("ul", { class: "project-list" });
    for (const summary of listing.projects) {
      const open = el("button", { class: "link" }, `${summary.name} (rev ${summary.revision})`);
      open.addEventListener("click", () => void this.openProject(summary.id));
      list.append(el("li", {}, open));
    }
    const nameInput = el("input", { placeholder: "new project name" });
    const create = el("button", {}, "create project");
    create.addEventListener("click", () => void this.createProject(nameInput.value.trim()));
    this.root.append(
      el("header", {}, el("h1", {}, "rusforge editor")),
      el("section", { class: "picker" }, el("h2", {}, "projects"), list, el("div", { class: "row-line" }, nameInput, create)),
    );
  }

  private async createProject(name: string) {
    if (!name) {
      return;
    }
    const doc: ProjectDoc = {
      rusforge_version: 1,
      name,
      namespace: `urn:ucat:proj:${encodeURIComponent(name)}#`,
      templates: ["<S> <P> <O>", "<S> <P> in <O>", "<S> <P> <O>+"],
      determiners: ["a", "an", "the"],
      glossary: [],
      type_assignments: {},
      actors: [
        { name: "user", use_cases: [{ id: "uc1", title: "", main: [{ index: 1, side: "user", text: "user opens application" }], alternatives: [] }] },
      ],
    };
    const created = await this.client.createProject(doc);
    await this.openProject(created.id);
  }

  private async openProject(id: string) {
    this.envelope = await this.client.getProject(id);
    this.selection = { actor: 0, useCase: 0 };
    this.loadRowsFromSelection();
    this.dirty = false;
    this.renderEditor();
  }

  // -- editor ---------------------------------------------------------------

  private selectedUseCase() {
    const project = this.envelope!.project;
    const actor = project.actors[this.selection.actor];
    return actor ? actor.use_cases[this.selection.useCase] : undefined;
  }

  private loadRowsFromSelection() {
    const useCase = this.selectedUseCase();
    this.rows = useCase ? stepsToRows(useCase.main) : [];
    if (this.rows.length === 0) {
      this.rows.push(newRow());
    }
  }

  private renderEditor() {
    if (!this.envelope) {
      return;
    }
    const { project, revision, id } = this.envelope;
    this.root.replaceChildren();

    const back = el("button", { class: "link" }, "← projects");
    back.addEventListener("click", () => void this.renderProjectList());
    const save = el("button", { class: "primary" }, this.saving ? "saving..." : "save");
    save.addEventListener("click", () => void this.save());
    const status = el(
      "span",
      { class: "status" },
      `${id} rev ${revision}${this.dirty ? " (unsaved changes)" : ""}`,
    );
    this.root.append(el("header", {}, back, el("h1", {}, project.name), status, save));

    const layout = el("div", { class: "layout" });
    layout.append(this.renderTree(), this.renderSteps(), this.renderPanels());
    this.root.append(layout);
  }

  private renderTree(): HTMLElement {
    const project = this.envelope!.project;
    const tree = el("nav", { class: "tree" }, el("h2", {}, "use cases"));
    project.actors.forEach((actor, ai) => {
      tree.append(el("div", { class: "tree-actor" }, actor.name));
      actor.use_cases.forEach((useCase, ui) => {
        const selected = ai === this.selection.actor && ui === this.selection.useCase;
        const button = el(
          "button",
          { class: selected ? "tree-uc selected" : "tree-uc" },
          `${useCase.id} ${useCase.title}`.trim(),
        );
        button.addEventListener("click", () => {
          this.commitRowsToDocument();
          this.selection = { actor: ai, useCase: ui };
          this.loadRowsFromSelection();
          this.renderEditor();
        });
        tree.append(button);
      });
    });
    return tree;
  }

  private renderSteps(): HTMLElement {
    const section = el("section", { class: "steps" }, el("h2", {}, "scenario steps"));
    const table = el("div", { class: "step-table" });
    table.append(
      el("div", { class: "step-head" }, "#"),
      el("div", { class: "step-head" }, "user input"),
      el("div", { class: "step-head" }, "system response"),
      el("div", { class: "step-head" }, ""),
    );
    this.rows.forEach((row, i) => {
      const verdict = effectiveVerdict(row);
      const cls = `step-row ${rowClass(verdict)}`;
      const number = el("div", { class: cls }, String(i + 1));
      const cells: Partial<Record<Side, HTMLInputElement>> = {};
      for (const side of ["user", "system"] as const) {
        const input = el("input", {
          class: cls,
          value: row.side === side ? row.text : "",
          title: row.side === side ? rowTooltip(verdict) : "",
        });
        input.addEventListener("input", () => {
          row.side = side;
          row.text = input.value;
          this.dirty = true;
          const other = side === "user" ? cells.system : cells.user;
          if (other) {
            other.value = "";
          }
        });
        input.addEventListener("keydown", (event) => {
          if ((event as KeyboardEvent).key === "Enter") {
            input.blur();
          }
        });
        input.addEventListener("blur", () => {
          if (row.side === side) {
            void this.commitRow(row);
          }
        });
        cells[side] = input;
      }
      const remove = el("button", { class: "link", title: "delete step" }, "×");
      remove.addEventListener("click", () => {
        this.rows.splice(i, 1);
        this.dirty = true;
        this.renderEditor();
      });
      table.append(number, cells.user!, cells.system!, remove);
    });
    const add = el("button", {}, "add step");
    add.addEventListener("click", () => {
      this.rows.push(newRow(this.rows.length % 2 === 0 ? "user" : "system"));
      this.renderEditor();
    });
    section.append(table, add);
    return section;
  }

  /** Row commit: ask the service for the verdict of exactly this text. */
  private async commitRow(row: EditorRow) {
    const text = row.text.trim();
    if (!this.envelope || text === "") {
      row.verdict = null;
      row.verdictText = "";
      this.renderEditor();
      return;
    }
    try {
      const response = await this.client.validateStatement(this.envelope.id, text);
      row.verdict = verdictFromResponse(response);
    } catch {
      row.verdict = unverified();
    }
    row.verdictText = row.text;
    this.renderEditor();
  }

  private commitRowsToDocument() {
    const useCase = this.selectedUseCase();
    if (useCase) {
      useCase.main = rowsToSteps(this.rows);
    }
  }

  private async save() {
    if (!this.envelope || this.saving) {
      return;
    }
    this.commitRowsToDocument();
    this.saving = true;
    this.renderEditor();
    try {
      const result = await this.client.putProject(
        this.envelope.id,
        this.envelope.revision,
        this.envelope.project,
      );
      this.envelope = await this.client.getProject(result.id);
      this.loadRowsFromSelection();
      this.dirty = false;
    } catch (error) {
      if (isRevisionConflict(error)) {
        if (window.confirm("someone else saved this project; reload their version?")) {
          await this.openProject(this.envelope.id);
          return;
        }
      } else {
        window.alert(String(error));
      }
    } finally {
      this.saving = false;
      this.renderEditor();
    }
  }

  // -- panels ---------------------------------------------------------------

  private renderPanels(): HTMLElement {
    const panels = el("section", { class: "panels" });
    panels.append(this.renderTypingPanel(), this.renderKbPanel(), this.renderQueryPanel());
    return panels;
  }

  private renderTypingPanel(): HTMLElement {
    const panel = el("details", { class: "panel", open: "" }, el("summary", {}, "entity types"));
    const body = el("div", { class: "panel-body" }, "validate the project to list its entities");
    const refresh = el("button", {}, "refresh entities");
    refresh.addEventListener("click", () => void this.fillTypingPanel(body));
    panel.append(refresh, body);
    return panel;
  }

  private async fillTypingPanel(body: HTMLElement) {
    if (!this.envelope) {
      return;
    }
    body.replaceChildren();
    let extraction: ExtractionDoc;
    try {
      extraction = await this.client.extraction(this.envelope.id);
    } catch (error) {
      body.append(this.renderApiError(error, "fix the highlighted steps first"));
      return;
    }
    const types: Record<string, string> = { ...this.envelope.project.type_assignments };
    const warned = new Set(extraction.warnings.map((w) => w.term));
    const grid = el("div", { class: "typing-grid" });
    for (const entity of extraction.entities) {
      const label = el(
        "span",
        { class: warned.has(entity.lexeme) ? "term unknown-term" : "term" },
        `${entity.lexeme} (${entity.occurrences.length})`,
      );
      if (warned.has(entity.lexeme)) {
        label.title = "not in the project glossary";
      }
      const input = el("input", { value: types[entity.lexeme] ?? "", placeholder: "Type" });
      input.addEventListener("input", () => {
        types[entity.lexeme] = input.value.trim();
      });
      grid.append(label, input);
    }
    const predicates = el(
      "p",
      { class: "muted" },
      `predicates (untyped by design): ${extraction.predicates.map((p) => p.lexeme).join(", ")}`,
    );
    const save = el("button", { class: "primary" }, "save types");
    const status = el("span", { class: "status" });
    save.addEventListener("click", async () => {
      if (!this.envelope) {
        return;
      }
      const cleaned = Object.fromEntries(Object.entries(types).filter(([, v]) => v !== ""));
      try {
        const result = await this.client.putTypes(this.envelope.id, this.envelope.revision, cleaned);
        this.envelope = await this.client.getProject(result.id);
        status.textContent = `saved (rev ${result.revision})`;
      } catch (error) {
        status.textContent = isRevisionConflict(error) ? "stale revision; reload the project" : String(error);
      }
    });
    body.append(grid, predicates, el("div", { class: "row-line" }, save, status));
  }

  private renderKbPanel(): HTMLElement {
    const panel = el("details", { class: "panel" }, el("summary", {}, "knowledge base"));
    const body = el("div", { class: "panel-body" });
    const build = el("button", {}, "build knowledge base");
    build.addEventListener("click", async () => {
      if (!this.envelope) {
        return;
      }
      body.replaceChildren();
      try {
        const kb = await this.client.buildKb(this.envelope.id);
        const graph = el("div", { class: "graph-holder" });
        graph.innerHTML = graphToSvg(parseDot(kb.dot));
        body.append(
          el("h3", {}, "graph"),
          graph,
          el("h3", {}, "triples"),
          el("pre", {}, kb.ntriples || "(empty)"),
          el("h3", {}, "dot"),
          el("pre", {}, kb.dot),
        );
      } catch (error) {
        body.append(this.renderApiError(error, "assign the missing types and rebuild"));
      }
    });
    panel.append(build, body);
    return panel;
  }

  private renderQueryPanel(): HTMLElement {
    const panel = el("details", { class: "panel" }, el("summary", {}, "query console"));
    const body = el("div", { class: "panel-body" });
    const input = el("textarea", { rows: "3" }, "SELECT ?s ?o WHERE { ?s ?p ?o . }");
    const run = el("button", {}, "run query");
    const output = el("div", {});
    run.addEventListener("click", async () => {
      if (!this.envelope) {
        return;
      }
      output.replaceChildren();
      try {
        const result = await this.client.query(this.envelope.id, input.value);
        const table = el("table", { class: "results" });
        table.append(el("tr", {}, ...result.columns.map((c) => el("th", {}, c))));
        for (const row of result.rows) {
          table.append(el("tr", {}, ...row.map((cell) => el("td", {}, cell))));
        }
        output.append(table, el("p", { class: "muted" }, `${result.rows.length} rows`));
      } catch (error) {
        output.append(this.renderApiError(error, "check the query syntax"));
      }
    });
    body.append(input, run, output);
    panel.append(body);
    return panel;
  }

  private renderApiError(error: unknown, hint: string): HTMLElement {
    const box = el("div", { class: "error-box" });
    if (error instanceof ApiError && error.payload.error === "E_UNTYPED") {
      const entities = (error.payload.entities as string[]) ?? [];
      const checklist = untypedChecklist(
        entities.map((lexeme) => ({ lexeme })),
        {},
      );
      box.append(el("p", {}, "these entities still need a type:"));
      box.append(el("ul", {}, ...checklist.map((lexeme) => el("li", {}, lexeme))));
    } else if (error instanceof ApiError) {
      box.append(el("p", {}, `${error.payload.error}: ${String(error.payload.message ?? "")}`));
    } else {
      box.append(el("p", {}, String(error)));
    }
    box.append(el("p", { class: "muted" }, hint));
    return box;
  }
}

export function createApp(root: HTMLElement, client: Client): App {
  return new App(root, client);
}
