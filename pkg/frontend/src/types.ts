/** Wire types for the /api/v1 endpoints (see docs/api.md in the repo root).
 *  Every rendered number in the UI is traceable to one of these fields. */

export interface SearchHit {
  doc_id: string;
  score: number;
  highlights: [number, number][];
}

export interface Bucket {
  key: string;
  count: number;
}

export interface SearchResponse {
  total: number;
  hits: SearchHit[];
  aggregations?: {
    field_terms?: { field: string; buckets: Bucket[] };
    date_histogram?: { bucket: string; buckets: Bucket[] };
  };
}

export interface ApiError {
  code: string;
  message: string;
  /** present on query_syntax errors */
  position?: number;
}

export interface Entity {
  start: number;
  end: number;
  text: string;
  cui: string;
  pretty_name: string;
  confidence: number;
  meta: Record<string, string | null>;
}

export interface DocumentPayload {
  doc_id: string;
  patient_id: string;
  doc_type: string;
  timestamp: string;
  source: string;
  text: string;
  metadata: Record<string, string>;
}

export interface NextDocumentResponse {
  doc: DocumentPayload;
  pre_annotations: Entity[];
}

export interface AnnotationRow {
  start: number;
  end: number;
  cui: string;
  correct: boolean;
  meta_labels?: Record<string, string>;
}

export interface MetricsSnapshot {
  after_n_docs: number;
  per_cui_f1: Record<string, number>;
  macro_f1: number;
  created_at: string;
}

export interface MetricsResponse {
  snapshots: MetricsSnapshot[];
}

export interface NodeCounts {
  read: number;
  written: number;
  failed: number;
}

export interface FlowReport {
  flow_id: string;
  started: string;
  ended: string;
  nodes: Record<string, NodeCounts>;
  errors: { locator: string; reason: string }[];
}

export interface FlowListEntry {
  flow_id: string;
  report: FlowReport | null;
}

export interface FlowListResponse {
  flows: FlowListEntry[];
}
