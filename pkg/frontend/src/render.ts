/** Pure render functions: payloads in, HTML strings out. No fetching, no
 *  DOM access — everything here is unit-testable without a browser.
 *  Highlight and entity offsets come straight from the server; the client
 *  never re-tokenizes. */

import type {
  ApiError,
  Entity,
  FlowListEntry,
  MetricsSnapshot,
  NextDocumentResponse,
  SearchResponse,
} from "./types.js";

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Wrap server-provided [start, end) spans in <mark> tags. Spans are
 *  disjoint and sorted by the server contract. */
export function markSpans(text: string, spans: [number, number][]): string {
  const parts: string[] = [];
  let cursor = 0;
  for (const [start, end] of spans) {
    parts.push(escapeHtml(text.slice(cursor, start)));
    parts.push(`<mark>${escapeHtml(text.slice(start, end))}</mark>`);
    cursor = end;
  }
  parts.push(escapeHtml(text.slice(cursor)));
  return parts.join("");
}

/** Hit cards plus facet and histogram panels. `texts` maps doc_id to the
 *  document body when known (e.g. preloaded fixtures); without it the card
 *  lists the raw highlight offsets instead. */
export function renderSearchResults(
  response: SearchResponse,
  texts: Record<string, string> = {},
): string {
  if (response.total === 0) {
    return `<div class="empty">no matches</div>`;
  }
  const cards = response.hits.map((hit) => {
    const text = texts[hit.doc_id];
    const body =
      text !== undefined
        ? `<p class="snippet">${markSpans(text, hit.highlights)}</p>`
        : `<p class="offsets">highlights: ${hit.highlights
            .map(([s, e]) => `${s}-${e}`)
            .join(", ")}</p>`;
    return [
      `<article class="hit" data-doc-id="${escapeHtml(hit.doc_id)}">`,
      `<header>${escapeHtml(hit.doc_id)} <span class="score">${hit.score.toFixed(4)}</span></header>`,
      body,
      `</article>`,
    ].join("");
  });
  const panels: string[] = [];
  const fieldTerms = response.aggregations?.field_terms;
  if (fieldTerms) {
    const rows = fieldTerms.buckets
      .map(
        (b) =>
          `<li data-key="${escapeHtml(b.key)}">${escapeHtml(b.key)}: ${b.count}</li>`,
      )
      .join("");
    panels.push(
      `<aside class="facets" data-field="${escapeHtml(fieldTerms.field)}"><ul>${rows}</ul></aside>`,
    );
  }
  const histogram = response.aggregations?.date_histogram;
  if (histogram) {
    const max = Math.max(...histogram.buckets.map((b) => b.count), 1);
    const bars = histogram.buckets
      .map(
        (b) =>
          `<div class="bar" data-key="${escapeHtml(b.key)}" style="height:${Math.round(
            (100 * b.count) / max,
          )}%" title="${escapeHtml(b.key)}: ${b.count}"></div>`,
      )
      .join("");
    panels.push(`<aside class="histogram">${bars}</aside>`);
  }
  return [
    `<div class="total">${response.total} matches</div>`,
    ...cards,
    ...panels,
  ].join("");
}

/** Inline syntax-error annotation: the query with a caret at the server-
 *  reported offset. */
export function renderQueryError(query: string, error: ApiError): string {
  if (error.code !== "query_syntax" || error.position === undefined) {
    return `<div class="banner error">${escapeHtml(error.message)}</div>`;
  }
  const caretLine = `${" ".repeat(error.position)}^`;
  return [
    `<div class="syntax-error">`,
    `<pre>${escapeHtml(query)}\n${escapeHtml(caretLine)}</pre>`,
    `<span class="detail">${escapeHtml(error.message)} (offset ${error.position})</span>`,
    `</div>`,
  ].join("");
}

export function renderNetworkFailure(): string {
  return `<div class="banner error">service unreachable — retry when the network is back</div>`;
}

/** Annotation view: the document with pre-annotation spans marked, the
 *  cursor entity emphasized. */
export function renderAnnotationDoc(
  payload: NextDocumentResponse,
  cursorIndex: number,
): string {
  const text = payload.doc.text;
  const parts: string[] = [];
  let cursor = 0;
  payload.pre_annotations.forEach((entity: Entity, i: number) => {
    parts.push(escapeHtml(text.slice(cursor, entity.start)));
    const cls = i === cursorIndex ? "entity current" : "entity";
    parts.push(
      `<span class="${cls}" data-cui="${escapeHtml(entity.cui)}" ` +
        `title="${escapeHtml(entity.pretty_name)} (${entity.confidence.toFixed(3)})">` +
        `${escapeHtml(text.slice(entity.start, entity.end))}</span>`,
    );
    cursor = entity.end;
  });
  parts.push(escapeHtml(text.slice(cursor)));
  return [
    `<article class="annotate" data-doc-id="${escapeHtml(payload.doc.doc_id)}">`,
    `<header>${escapeHtml(payload.doc.doc_id)} · ${escapeHtml(payload.doc.doc_type)}</header>`,
    `<p>${parts.join("")}</p>`,
    `</article>`,
  ].join("");
}

/** Metrics series in server timeline order; one point per snapshot. */
export function renderMetrics(snapshots: MetricsSnapshot[]): string {
  if (snapshots.length === 0) {
    return `<div class="empty">no metrics yet — finish a batch to see the first point</div>`;
  }
  const points = snapshots
    .map(
      (s) =>
        `<li class="point" data-n="${s.after_n_docs}">` +
        `after ${s.after_n_docs} docs: macro-F1 ${s.macro_f1.toFixed(3)}</li>`,
    )
    .join("");
  return `<ol class="metrics">${points}</ol>`;
}

/** Flow monitor table. Rows with failed > 0 are flagged; rows violating
 *  read = written + failed get an integrity warning (the only client-side
 *  computation in the UI). */
export function renderFlowTable(flows: FlowListEntry[]): string {
  if (flows.length === 0) {
    return `<div class="empty">no flows registered</div>`;
  }
  const rows = flows.map((flow) => {
    if (!flow.report) {
      return `<tr data-flow="${escapeHtml(flow.flow_id)}"><td>${escapeHtml(
        flow.flow_id,
      )}</td><td colspan="3">never run</td></tr>`;
    }
    const cells = Object.entries(flow.report.nodes).map(([node, c]) => {
      const flagged = c.failed > 0 ? " flagged" : "";
      const broken = c.read !== c.written + c.failed;
      const warn = broken
        ? `<span class="integrity-warning">counts do not reconcile</span>`
        : "";
      return (
        `<tr class="node${flagged}" data-flow="${escapeHtml(flow.flow_id)}" ` +
        `data-node="${escapeHtml(node)}">` +
        `<td>${escapeHtml(flow.flow_id)}/${escapeHtml(node)}</td>` +
        `<td>${c.read}</td><td>${c.written}</td><td>${c.failed}</td>` +
        `<td>${warn}</td></tr>`
      );
    });
    return cells.join("");
  });
  return [
    `<table class="flows"><thead><tr>`,
    `<th>node</th><th>read</th><th>written</th><th>failed</th><th></th>`,
    `</tr></thead><tbody>`,
    ...rows,
    `</tbody></table>`,
  ].join("");
}
