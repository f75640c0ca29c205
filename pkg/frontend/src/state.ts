/** Annotation session state machine. Verdicts are recorded locally; on
 *  document completion the accumulated rows are POSTed and the next
 *  document fetched; the metrics chart refreshes after every submission
 *  (it gains a point exactly when the server finished a batch retrain). */

import { ApiClient, ApiRequestError } from "./api.js";
import type {
  AnnotationRow,
  Entity,
  MetricsSnapshot,
  NextDocumentResponse,
} from "./types.js";

export type Verdict =
  | { kind: "accept" }
  | { kind: "reject" }
  | { kind: "relabel"; cui: string }
  | { kind: "meta"; task: string; label: string };

export interface AnnotationSessionState {
  doc: NextDocumentResponse | null;
  /** index into pre_annotations of the next unresolved entity, or null
   *  when every entity has a verdict (or there are none). */
  cursor: number | null;
  pending: AnnotationRow[];
  metrics: MetricsSnapshot[];
  exhausted: boolean;
}

export function verdictToRows(entity: Entity, verdict: Verdict): AnnotationRow[] {
  switch (verdict.kind) {
    case "accept":
      return [{ start: entity.start, end: entity.end, cui: entity.cui, correct: true }];
    case "reject":
      return [{ start: entity.start, end: entity.end, cui: entity.cui, correct: false }];
    case "relabel":
      // reject the suggestion, assert the corrected concept
      return [
        { start: entity.start, end: entity.end, cui: entity.cui, correct: false },
        { start: entity.start, end: entity.end, cui: verdict.cui, correct: true },
      ];
    case "meta":
      return [
        {
          start: entity.start,
          end: entity.end,
          cui: entity.cui,
          correct: true,
          meta_labels: { [verdict.task]: verdict.label },
        },
      ];
  }
}

export class AnnotationSession {
  state: AnnotationSessionState = {
    doc: null,
    cursor: null,
    pending: [],
    metrics: [],
    exhausted: false,
  };

  constructor(
    private readonly api: ApiClient,
    private readonly projectId: string,
  ) {}

  async start(): Promise<void> {
    await this.advanceDocument();
    this.state.metrics = (await this.api.metrics(this.projectId)).snapshots;
  }

  private async advanceDocument(): Promise<void> {
    try {
      const next = await this.api.nextDocument(this.projectId);
      this.state.doc = next;
      this.state.cursor = next.pre_annotations.length > 0 ? 0 : null;
      this.state.pending = [];
    } catch (error) {
      if (error instanceof ApiRequestError && error.body.code === "queue_exhausted") {
        this.state.doc = null;
        this.state.cursor = null;
        this.state.exhausted = true;
        return;
      }
      throw error;
    }
  }

  /** Record a verdict for the cursor entity and advance the cursor. When
   *  the last entity is resolved the document is submitted and the next
   *  one fetched. Returns true when a document round-trip happened. */
  async decide(verdict: Verdict): Promise<boolean> {
    const doc = this.state.doc;
    if (!doc || this.state.cursor === null) {
      throw new Error("no entity under cursor");
    }
    const entity = doc.pre_annotations[this.state.cursor];
    this.state.pending.push(...verdictToRows(entity, verdict));
    if (this.state.cursor + 1 < doc.pre_annotations.length) {
      this.state.cursor += 1;
      return false;
    }
    await this.submitCurrent();
    return true;
  }

  private async submitCurrent(retries = 3): Promise<void> {
    const doc = this.state.doc;
    if (!doc) return;
    try {
      await this.api.submitAnnotations(this.projectId, doc.doc.doc_id, this.state.pending);
    } catch (error) {
      if (error instanceof ApiRequestError && error.status === 409 && retries > 0) {
        // server is mid-retrain; wait and retry
        await new Promise((resolve) => setTimeout(resolve, 250));
        return this.submitCurrent(retries - 1);
      }
      throw error;
    }
    // refresh metrics: gains exactly one point when this submission
    // completed a batch
    this.state.metrics = (await this.api.metrics(this.projectId)).snapshots;
    await this.advanceDocument();
  }
}
