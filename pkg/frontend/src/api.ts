/** Typed REST client for the annohub platform.
 *
 * The UI talks to the server exclusively through this module, so it doubles
 * as a conformance client for the public API: every request shape and error
 * envelope used here is part of the documented surface.
 */

export interface Stats {
  annotationCount: number;
  statementCount: number;
  requestCount: number;
}

export interface WebsiteView {
  websiteId: string;
  organizationId: string;
  displayName: string;
  apiKey: string;
  counters: Stats;
}

export interface AnnotationRow {
  hash: string;
  cid: string | null;
  urlKey: string | null;
  rootType: string;
  statementCount: number;
  createdAt: string;
  updatedAt: string;
}

export interface AnnotationPage {
  page: number;
  pageSize: number;
  items: AnnotationRow[];
}

export interface AnnotationMeta extends AnnotationRow {
  websiteId: string;
  body: AnnotationDoc;
}

export interface PushResult {
  hash: string;
  created: boolean;
}

export interface ValidationViolation {
  path: string;
  code: string;
  message: string;
}

export interface ValidationReport {
  ok: boolean;
  violations: ValidationViolation[];
}

export interface RangeJson {
  kind: "primitive" | "nestedType";
  primitive?: string;
  nestedType?: { type: string; constraints: ConstraintJson[] };
}

export interface ConstraintJson {
  property: string;
  required: boolean;
  multiplicity: "single" | "many";
  ranges: RangeJson[];
}

export interface DsJson {
  dsId: string | null;
  name: string;
  targetType: string;
  version: number;
  constraints: ConstraintJson[];
}

export interface DsListRow {
  dsId: string;
  name: string;
  targetType: string;
  version: number;
}

export interface FormFieldJson {
  label: string;
  propertyToken: string;
  required: boolean;
  multiplicity: "single" | "many";
  widget: "text" | "url" | "number" | "checkbox" | "date" | "datetime" | "subform";
  subform?: FormSchemaJson;
  rangeOptions?: string[];
}

export interface FormSchemaJson {
  rootLabel: string;
  fields: FormFieldJson[];
}

export interface VocabularyClass {
  name: string;
  parents: string[];
  description: string;
}

export interface VocabularyProperty {
  name: string;
  domains: string[];
  ranges: string[];
  description: string;
}

export type ScalarValue = string | number | boolean;
export type DocValue = ScalarValue | AnnotationDoc | Array<ScalarValue | AnnotationDoc>;

export interface AnnotationDoc {
  [key: string]: DocValue;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string
  ) {
    super(`${code}: ${message}`);
  }
}

type FetchFn = typeof fetch;

export class ApiClient {
  token: string | null = null;

  constructor(
    private baseUrl: string,
    private fetchFn: FetchFn = fetch
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request(
    method: string,
    path: string,
    options: { body?: unknown; auth?: boolean } = {}
  ): Promise<Response> {
    const headers: Record<string, string> = {};
    if (options.body !== undefined) headers["content-type"] = "application/json";
    if (options.auth) {
      if (!this.token) throw new ApiError(401, "MissingToken", "not logged in");
      headers["authorization"] = `Bearer ${this.token}`;
    }
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: options.body === undefined ? undefined : JSON.stringify(options.body),
    });
    if (!resp.ok) {
      let code = "Unknown";
      let message = resp.statusText;
      try {
        const envelope = await resp.json();
        code = envelope.error.code;
        message = envelope.error.message;
      } catch {
        // non-envelope body; keep the status text
      }
      throw new ApiError(resp.status, code, message);
    }
    return resp;
  }

  private async json<T>(method: string, path: string, options: { body?: unknown; auth?: boolean } = {}): Promise<T> {
    return (await this.request(method, path, options)).json();
  }

  // -- auth ---------------------------------------------------------------

  async login(email: string, password: string): Promise<void> {
    const out = await this.json<{ token: string }>("POST", "/api/auth/login", {
      body: { email, password },
    });
    this.token = out.token;
  }

  // -- annotations ----------------------------------------------------------

  async pushAnnotation(apiKey: string, doc: AnnotationDoc, cid?: string): Promise<PushResult> {
    const query = cid === undefined ? "" : `?cid=${encodeURIComponent(cid)}`;
    const results = await this.json<Array<{ ok: boolean; hash?: string; created?: boolean; error?: { code: string; message: string } }>>(
      "POST",
      `/api/annotation/${encodeURIComponent(apiKey)}${query}`,
      { body: doc }
    );
    const first = results[0];
    if (!first.ok || first.hash === undefined) {
      const err = first.error ?? { code: "Rejected", message: "annotation rejected" };
      throw new ApiError(400, err.code, err.message);
    }
    return { hash: first.hash, created: first.created === true };
  }

  async validate(apiKey: string, dsId: string, doc: AnnotationDoc): Promise<ValidationReport> {
    return this.json(
      "POST",
      `/api/annotation/${encodeURIComponent(apiKey)}/validate?ds=${encodeURIComponent(dsId)}`,
      { body: doc }
    );
  }

  /** Raw canonical bytes of a stored annotation, exactly as the server serves them. */
  async annotationText(hash: string): Promise<string> {
    return (await this.request("GET", `/${encodeURIComponent(hash)}`)).text();
  }

  async annotationMeta(hash: string): Promise<AnnotationMeta> {
    return this.json("GET", `/api/annotation/${encodeURIComponent(hash)}`, { auth: true });
  }

  async replaceAnnotation(hash: string, doc: AnnotationDoc, cid?: string | null): Promise<void> {
    const query = cid === undefined || cid === null ? "" : `?cid=${encodeURIComponent(cid)}`;
    await this.request("PUT", `/api/annotation/${encodeURIComponent(hash)}${query}`, {
      body: doc,
      auth: true,
    });
  }

  async deleteAnnotation(hash: string): Promise<void> {
    await this.request("DELETE", `/api/annotation/${encodeURIComponent(hash)}`, { auth: true });
  }

  // -- websites ---------------------------------------------------------------

  async listWebsites(): Promise<WebsiteView[]> {
    return this.json("GET", "/api/website", { auth: true });
  }

  async createWebsite(displayName: string): Promise<{ websiteId: string; apiKey: string }> {
    return this.json("POST", "/api/website", { body: { displayName }, auth: true });
  }

  async websiteStats(websiteId: string): Promise<Stats> {
    return this.json("GET", `/api/website/${encodeURIComponent(websiteId)}/stats`, { auth: true });
  }

  async listAnnotations(websiteId: string, page = 1, pageSize = 20): Promise<AnnotationPage> {
    return this.json(
      "GET",
      `/api/website/${encodeURIComponent(websiteId)}/annotation?page=${page}&pageSize=${pageSize}`,
      { auth: true }
    );
  }

  // -- domain specifications ------------------------------------------------------

  async listDs(): Promise<DsListRow[]> {
    return this.json("GET", "/api/ds", { auth: true });
  }

  async getDs(dsId: string): Promise<DsJson> {
    return this.json("GET", `/api/ds/${encodeURIComponent(dsId)}`, { auth: true });
  }

  async getForm(dsId: string): Promise<FormSchemaJson> {
    return this.json("GET", `/api/ds/${encodeURIComponent(dsId)}/form`, { auth: true });
  }

  async saveDs(ds: DsJson): Promise<{ dsId: string; version: number }> {
    return this.json("POST", "/api/ds", { body: ds, auth: true });
  }

  // -- vocabulary --------------------------------------------------------------------

  async vocabularyClasses(): Promise<VocabularyClass[]> {
    return this.json("GET", "/api/vocabulary/classes", { auth: true });
  }

  async classProperties(token: string): Promise<VocabularyProperty[]> {
    return this.json("GET", `/api/vocabulary/class/${encodeURIComponent(token)}/properties`, {
      auth: true,
    });
  }
}
