/** Thin typed client over the documented /api/v1 endpoints. The UI issues
 *  only these calls — no undocumented endpoints, no client-side re-ranking. */

import type {
  ApiError,
  FlowListResponse,
  FlowReport,
  MetricsResponse,
  NextDocumentResponse,
  AnnotationRow,
  SearchResponse,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.base}/api/v1${path}`, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(response.status, body as ApiError);
    }
    return body as T;
  }

  search(
    query: string,
    options: { size?: number; from?: number; aggField?: string; aggDate?: string } = {},
  ): Promise<SearchResponse> {
    const params = new URLSearchParams({ q: query });
    if (options.size !== undefined) params.set("size", String(options.size));
    if (options.from !== undefined) params.set("from", String(options.from));
    if (options.aggField) params.set("agg_field", options.aggField);
    if (options.aggDate) params.set("agg_date", options.aggDate);
    return this.request<SearchResponse>(`/search?${params.toString()}`);
  }

  nextDocument(projectId: string): Promise<NextDocumentResponse> {
    return this.request<NextDocumentResponse>(`/projects/${projectId}/next`);
  }

  submitAnnotations(
    projectId: string,
    docId: string,
    annotations: AnnotationRow[],
  ): Promise<{ accepted: number }> {
    return this.request(`/projects/${projectId}/annotations`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ doc_id: docId, annotations }),
    });
  }

  metrics(projectId: string): Promise<MetricsResponse> {
    return this.request<MetricsResponse>(`/projects/${projectId}/metrics`);
  }

  listFlows(): Promise<FlowListResponse> {
    return this.request<FlowListResponse>("/flows");
  }

  flowReport(flowId: string): Promise<FlowReport | { flow_id: string; report: null }> {
    return this.request(`/flows/${flowId}/report`);
  }
}
