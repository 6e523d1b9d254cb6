/** Typed client for the xrforge HTTP service. */

export type Ternary = "selected" | "deselected" | "undecided";

export interface GroupCardinality {
  min: number;
  max: number;
}

export interface FeatureObject {
  id: string;
  name: string;
  optionality: "mandatory" | "optional";
  kind: "invariable" | "variation-point" | "variant";
  parent: string | null;
  group?: GroupCardinality;
  processing?: string;
  description?: string;
}

export interface ModelDocument {
  root: string;
  features: FeatureObject[];
  dependencies: { source: string; kind: string; target: string }[];
  constraints: { kind: string; source: string; targets: string[] }[];
}

export interface DecisionRecord {
  feature: string;
  state: Ternary;
}

export interface ConfigObject {
  model: string;
  decisions: DecisionRecord[];
}

export interface Diagnostic {
  rule: string;
  features: string[];
  message: string;
}

export interface ForcedDecision {
  feature: string;
  state: Ternary;
  rule: string;
}

export interface PropagateResponse {
  configuration: ConfigObject;
  forced: ForcedDecision[];
  conflict?: Diagnostic;
}

export interface EnumerateResponse {
  count: number;
  truncated: boolean;
  configurations: ConfigObject[];
}

export interface ManifestEntry {
  path: string;
  element: string;
  caused_by: string[];
}

export interface ManifestObject {
  entries: ManifestEntry[];
}

export interface GenerateResponse {
  document: string;
  manifest: ManifestObject;
}

export interface GenerationOptions {
  app_title?: string;
  author?: string;
  include_demo_objects?: boolean;
}

export interface LoadedModel {
  document: string;
  digest: string;
  model: ModelDocument;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly diagnostics: Diagnostic[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/**
 * Monotonic request tokens. Responses may arrive out of order; a consumer
 * takes a token per request and applies only responses whose token is still
 * the newest, so a slow earlier reply can never overwrite a later one.
 */
export class RequestSequence {
  private counter = 0;

  next(): number {
    return ++this.counter;
  }

  isCurrent(token: number): boolean {
    return token === this.counter;
  }
}

async function sha256Hex(text: string): Promise<string> {
  const data = new TextEncoder().encode(text);
  const hash = await crypto.subtle.digest("SHA-256", data);
  return Array.from(new Uint8Array(hash))
    .map((b) => b.toString(16).padStart(2, "0"))
    .join("");
}

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  /** The canonical model document, parsed and identified by its digest. */
  async fetchModel(): Promise<LoadedModel> {
    const response = await this.fetchFn(`${this.baseUrl}/api/model`);
    if (!response.ok) {
      throw new ApiError(response.status, `model request failed (${response.status})`);
    }
    const document = await response.text();
    const digest = (await sha256Hex(document)).slice(0, 16);
    return { document, digest, model: JSON.parse(document) as ModelDocument };
  }

  async validate(config: ConfigObject, mode: "partial" | "complete"): Promise<Diagnostic[]> {
    const payload = await this.post("/api/validate", { config, mode });
    return (payload as { diagnostics: Diagnostic[] }).diagnostics;
  }

  async propagate(config: ConfigObject): Promise<PropagateResponse> {
    return (await this.post("/api/propagate", { config })) as PropagateResponse;
  }

  async countProducts(config: ConfigObject | null): Promise<number> {
    const payload = await this.post("/api/enumerate", { config, limit: 0 });
    return (payload as EnumerateResponse).count;
  }

  async generate(config: ConfigObject, options?: GenerationOptions): Promise<GenerateResponse> {
    const body: Record<string, unknown> = { config };
    if (options !== undefined) {
      body.options = options;
    }
    return (await this.post("/api/generate", body)) as GenerateResponse;
  }

  private async post(path: string, body: unknown): Promise<unknown> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload: unknown = await response.json();
    if (!response.ok) {
      const detail = payload as { error?: string; diagnostics?: Diagnostic[] };
      throw new ApiError(
        response.status,
        detail.error ?? `request failed (${response.status})`,
        detail.diagnostics ?? [],
      );
    }
    return payload;
  }
}
