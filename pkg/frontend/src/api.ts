/** Typed client for the question-answering service's JSON API. */

export interface ModelSummary {
  model_id: string;
  source_name: string;
  node_count: number;
  edge_count: number;
}

export interface ModelStats {
  node_count: number;
  edge_count: number;
  label_histogram: Record<string, number>;
  edge_label_histogram: Record<string, number>;
}

export interface UploadResult {
  model_id: string;
  stats: ModelStats;
  build_report: {
    node_count: number;
    edge_count: number;
    unresolved_refs: unknown[];
    unknown_types: string[];
  };
}

export interface AskResponse {
  question: string;
  cypher: string;
  context: string;
  answer: string;
  outcome: "answered" | "no_answer" | "failed";
  error: string;
  timings: Record<string, number>;
  attempts: Array<Record<string, string>>;
}

/** A failed request: HTTP status plus the server's error message. */
export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function jsonOrThrow<T>(response: Response): Promise<T> {
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    // fall through: a non-JSON body still yields a useful status message
  }
  if (!response.ok) {
    const message =
      body && typeof body === "object" && "error" in body
        ? String((body as { error: unknown }).error)
        : `request failed with status ${response.status}`;
    throw new ApiError(response.status, message);
  }
  return body as T;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async listModels(): Promise<ModelSummary[]> {
    const body = await jsonOrThrow<{ models: ModelSummary[] }>(
      await this.fetchFn(`${this.baseUrl}/models`),
    );
    return body.models;
  }

  async uploadModel(name: string, text: string): Promise<UploadResult> {
    return jsonOrThrow(
      await this.fetchFn(`${this.baseUrl}/models`, {
        method: "POST",
        headers: { "Content-Type": "text/plain", "X-Source-Name": name },
        body: text,
      }),
    );
  }

  async getStats(modelId: string): Promise<ModelStats> {
    return jsonOrThrow(
      await this.fetchFn(`${this.baseUrl}/models/${modelId}/stats`),
    );
  }

  async ask(modelId: string, question: string): Promise<AskResponse> {
    return jsonOrThrow(
      await this.fetchFn(`${this.baseUrl}/models/${modelId}/ask`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ question }),
      }),
    );
  }
}
