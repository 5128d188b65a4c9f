/**
 * Typed client for the rusforge HTTP service.
 *
 * Runs in the browser and under node (uses the global fetch). All mutations
 * carry the revision they are based on; a stale revision surfaces as an
 * ApiError with status 409 so callers can reload and retry.
 */

export type Side = "user" | "system";

export interface StepDoc {
  index: number;
  side: Side;
  text: string;
}

export interface AltScenarioDoc {
  branch_step: number;
  label: string;
  steps: StepDoc[];
}

export interface UseCaseDoc {
  id: string;
  title: string;
  main: StepDoc[];
  alternatives: AltScenarioDoc[];
}

export interface ActorDoc {
  name: string;
  use_cases: UseCaseDoc[];
}

export interface ProjectDoc {
  rusforge_version: number;
  name: string;
  namespace: string;
  templates: string[];
  determiners: string[];
  glossary: { term: string; type?: string }[];
  type_assignments: Record<string, string>;
  actors: ActorDoc[];
}

export interface ProjectSummary {
  id: string;
  name: string;
  revision: number;
}

export interface ProjectEnvelope {
  id: string;
  revision: number;
  project: ProjectDoc;
}

export interface StatementVerdict {
  ok: boolean;
  template?: string;
  triples?: string[][];
  reason?: "no_match" | "lex_error";
  column?: number;
}

export interface StepReport {
  actor: string;
  use_case: string;
  scenario: string;
  step: number;
  side: Side;
  text: string;
  ok: boolean;
  triples?: string[][];
  reason?: string;
  column?: number;
}

export interface ValidationReportDoc {
  ok: boolean;
  steps: StepReport[];
  warnings: {
    code: string;
    actor: string;
    use_case: string;
    scenario: string;
    step: number;
    side: Side;
    subject: string;
  }[];
}

export interface OccurrenceDoc {
  actor: string;
  use_case: string;
  scenario: string;
  step: number;
  role: string;
}

export interface TermDoc {
  lexeme: string;
  roles: string[];
  occurrences: OccurrenceDoc[];
  type: string | null;
}

export interface ExtractionDoc {
  entities: TermDoc[];
  predicates: TermDoc[];
  source_hash: string;
  warnings: { code: string; term: string; occurrences: OccurrenceDoc[] }[];
}

export interface KbDoc {
  ntriples: string;
  dot: string;
}

export interface QueryResult {
  columns: string[];
  rows: string[][];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: Record<string, unknown>,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(payload)}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (response.status === 204) {
    return undefined as T;
  }
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    throw new ApiError(response.status, body as Record<string, unknown>);
  }
  return body as T;
}

export class Client {
  constructor(readonly base: string = "") {}

  listProjects(): Promise<{ projects: ProjectSummary[] }> {
    return request(`${this.base}/projects`);
  }

  createProject(doc: ProjectDoc): Promise<{ id: string; revision: number }> {
    return request(`${this.base}/projects`, { method: "POST", body: JSON.stringify(doc) });
  }

  getProject(id: string): Promise<ProjectEnvelope> {
    return request(`${this.base}/projects/${encodeURIComponent(id)}`);
  }

  putProject(id: string, revision: number, project: ProjectDoc): Promise<{ id: string; revision: number }> {
    return request(`${this.base}/projects/${encodeURIComponent(id)}`, {
      method: "PUT",
      body: JSON.stringify({ revision, project }),
    });
  }

  deleteProject(id: string): Promise<void> {
    return request(`${this.base}/projects/${encodeURIComponent(id)}`, { method: "DELETE" });
  }

  validateStatement(id: string, text: string): Promise<StatementVerdict> {
    return request(`${this.base}/projects/${encodeURIComponent(id)}/validate-statement`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  validate(id: string): Promise<ValidationReportDoc> {
    return request(`${this.base}/projects/${encodeURIComponent(id)}/validate`, {
      method: "POST",
      body: JSON.stringify({}),
    });
  }

  extraction(id: string): Promise<ExtractionDoc> {
    return request(`${this.base}/projects/${encodeURIComponent(id)}/extraction`);
  }

  putTypes(id: string, revision: number, types: Record<string, string>): Promise<{ id: string; revision: number }> {
    return request(`${this.base}/projects/${encodeURIComponent(id)}/types`, {
      method: "PUT",
      body: JSON.stringify({ revision, types }),
    });
  }

  buildKb(id: string, defaultType?: string): Promise<KbDoc> {
    return request(`${this.base}/projects/${encodeURIComponent(id)}/kb`, {
      method: "POST",
      body: JSON.stringify(defaultType ? { default_type: defaultType } : {}),
    });
  }

  query(id: string, query: string): Promise<QueryResult> {
    return request(`${this.base}/projects/${encodeURIComponent(id)}/query`, {
      method: "POST",
      body: JSON.stringify({ query }),
    });
  }
}
