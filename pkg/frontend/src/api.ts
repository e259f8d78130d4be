// Thin typed client over the /v1 endpoints. fetch is injected so tests
// can drive the client with canned fixtures.

import type {
  ApiErrorBody,
  DocumentPayload,
  Filters,
  IndicatorSummary,
  NeighborhoodResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }

  get notFound(): boolean {
    return this.status === 404;
  }
}

export function filterParams(filters: Filters, depth: number, extra?: Record<string, string>): string {
  const params = new URLSearchParams();
  params.set("depth", String(depth));
  if (filters.edgeTypes && filters.edgeTypes.length) params.set("edge_types", filters.edgeTypes.join(","));
  if (filters.language) params.set("language", filters.language);
  if (filters.topic) params.set("topic", filters.topic);
  if (filters.sourceTags && filters.sourceTags.length) params.set("source_tags", filters.sourceTags.join(","));
  for (const [k, v] of Object.entries(extra ?? {})) params.set(k, v);
  return params.toString();
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, "ConnectionError", `service unreachable: ${err}`);
    }
    if (!resp.ok) {
      let body: ApiErrorBody = { code: "Internal", message: resp.statusText };
      try {
        body = (await resp.json()) as ApiErrorBody;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, body.code, body.message);
    }
    return (await resp.json()) as T;
  }

  indicatorSummary(type: string, value: string): Promise<IndicatorSummary> {
    return this.request(`/v1/indicators/${enc(type)}/${enc(value)}`);
  }

  indicatorNeighborhood(
    type: string,
    value: string,
    depth: number,
    filters: Filters,
  ): Promise<NeighborhoodResponse> {
    const qs = filterParams(filters, depth);
    return this.request(`/v1/indicators/${enc(type)}/${enc(value)}/neighborhood?${qs}`);
  }

  documentNeighborhood(checksum: string, depth: number, filters: Filters): Promise<NeighborhoodResponse> {
    const qs = filterParams(filters, depth);
    return this.request(`/v1/documents/${enc(checksum)}/neighborhood?${qs}`);
  }

  document(checksum: string): Promise<DocumentPayload> {
    return this.request(`/v1/documents/${enc(checksum)}`);
  }
}

function enc(part: string): string {
  return encodeURIComponent(part);
}
