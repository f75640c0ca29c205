import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  markSpans,
  renderAnnotationDoc,
  renderFlowTable,
  renderMetrics,
  renderQueryError,
  renderSearchResults,
} from "../src/render.js";
import type { NextDocumentResponse, SearchResponse } from "../src/types.js";

// fixture mirroring the API's search payload for query `fever` over the
// two-document corpus used throughout the backend tests
const FEVER_RESPONSE: SearchResponse = {
  total: 2,
  hits: [
    { doc_id: "d2", score: 0.9152, highlights: [[0, 5], [10, 15]] },
    { doc_id: "d1", score: 0.6867, highlights: [[0, 5]] },
  ],
};
const TEXTS = { d1: "fever chills", d2: "fever and fever again" };

describe("renderSearchResults", () => {
  it("renders one card per hit with highlights marked", () => {
    const html = renderSearchResults(FEVER_RESPONSE, TEXTS);
    expect(html.match(/<article class="hit"/g)).toHaveLength(2);
    expect(html).toContain('data-doc-id="d2"');
    // both occurrences of "fever" in d2 are marked via server offsets
    expect(html.match(/<mark>fever<\/mark>/g)).toHaveLength(3);
    expect(html).toContain("2 matches");
  });

  it("keeps server hit order", () => {
    const html = renderSearchResults(FEVER_RESPONSE, TEXTS);
    expect(html.indexOf('data-doc-id="d2"')).toBeLessThan(
      html.indexOf('data-doc-id="d1"'),
    );
  });

  it("renders scores from the payload verbatim", () => {
    const html = renderSearchResults(FEVER_RESPONSE, TEXTS);
    expect(html).toContain("0.9152");
    expect(html).toContain("0.6867");
  });

  it("empty result renders the no-matches state", () => {
    expect(renderSearchResults({ total: 0, hits: [] })).toContain("no matches");
  });

  it("renders facet and histogram panels from aggregations", () => {
    const response: SearchResponse = {
      ...FEVER_RESPONSE,
      aggregations: {
        field_terms: {
          field: "doc_type",
          buckets: [
            { key: "clinical_note", count: 1 },
            { key: "letter", count: 2 },
          ],
        },
        date_histogram: {
          bucket: "month",
          buckets: [
            { key: "2021-06", count: 2 },
            { key: "2021-07", count: 1 },
          ],
        },
      },
    };
    const html = renderSearchResults(response, TEXTS);
    expect(html).toContain("clinical_note: 1");
    expect(html).toContain("letter: 2");
    expect(html).toContain('data-key="2021-06"');
    expect(html).toContain('title="2021-06: 2"');
  });

  it("escapes document text", () => {
    const html = renderSearchResults(
      { total: 1, hits: [{ doc_id: "d9", score: 1, highlights: [] }] },
      { d9: "<script>alert(1)</script>" },
    );
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("markSpans", () => {
  it("wraps exactly the given ranges", () => {
    expect(markSpans("abc def ghi", [[4, 7]])).toBe("abc <mark>def</mark> ghi");
  });

  it("handles adjacent spans without duplicating text", () => {
    expect(markSpans("abcd", [[0, 2], [2, 4]])).toBe(
      "<mark>ab</mark><mark>cd</mark>",
    );
  });
});

describe("renderQueryError", () => {
  it("places the caret at the reported offset", () => {
    const html = renderQueryError("fever AND (", {
      code: "query_syntax",
      message: "expected expression",
      position: 11,
    });
    expect(html).toContain("fever AND (");
    expect(html).toContain(`${" ".repeat(11)}^`);
    expect(html).toContain("offset 11");
  });

  it("falls back to a banner for non-syntax errors", () => {
    const html = renderQueryError("x", { code: "unknown_bundle", message: "nope" });
    expect(html).toContain("banner");
    expect(html).not.toContain("^");
  });
});

describe("renderAnnotationDoc", () => {
  const payload: NextDocumentResponse = {
    doc: {
      doc_id: "d1",
      patient_id: "p1",
      doc_type: "clinical_note",
      timestamp: "2021-06-01T00:00:00Z",
      source: "test",
      text: "patient reports fever and cough",
      metadata: {},
    },
    pre_annotations: [
      {
        start: 16, end: 21, text: "fever", cui: "C1", pretty_name: "fever",
        confidence: 0.5, meta: {},
      },
      {
        start: 26, end: 31, text: "cough", cui: "C2", pretty_name: "cough",
        confidence: 0.5, meta: {},
      },
    ],
  };

  it("marks every pre-annotation and emphasizes the cursor entity", () => {
    const html = renderAnnotationDoc(payload, 0);
    expect(html.match(/class="entity/g)).toHaveLength(2);
    expect(html).toContain('class="entity current" data-cui="C1"');
    expect(html).toContain('class="entity" data-cui="C2"');
  });

  it("uses server offsets, not re-tokenization", () => {
    const html = renderAnnotationDoc(payload, 1);
    expect(html).toContain(">fever</span>");
    expect(html).toContain(">cough</span>");
  });
});

describe("renderMetrics", () => {
  it("renders one point per snapshot in server order", () => {
    const html = renderMetrics([
      { after_n_docs: 5, per_cui_f1: {}, macro_f1: 0.4, created_at: "t1" },
      { after_n_docs: 10, per_cui_f1: {}, macro_f1: 0.7, created_at: "t2" },
    ]);
    expect(html.match(/class="point"/g)).toHaveLength(2);
    expect(html.indexOf('data-n="5"')).toBeLessThan(html.indexOf('data-n="10"'));
  });

  it("renders an empty state before the first batch", () => {
    expect(renderMetrics([])).toContain("no metrics yet");
  });
});

describe("renderFlowTable", () => {
  const failedFlow = {
    flow_id: "f1",
    report: {
      flow_id: "f1",
      started: "t0",
      ended: "t1",
      nodes: {
        src: { read: 5, written: 4, failed: 1 },
        out: { read: 4, written: 4, failed: 0 },
      },
      errors: [{ locator: "src.jsonl:5", reason: "missing timestamp" }],
    },
  };

  it("flags rows with failures and shows 5/4/1", () => {
    const html = renderFlowTable([failedFlow]);
    expect(html).toContain('class="node flagged"');
    expect(html).toContain("<td>5</td><td>4</td><td>1</td>");
    // the clean node is not flagged
    expect(html).toContain('class="node" data-flow="f1" data-node="out"');
  });

  it("does not warn when counts reconcile", () => {
    expect(renderFlowTable([failedFlow])).not.toContain("integrity-warning");
  });

  it("warns when read != written + failed", () => {
    const broken = {
      flow_id: "f2",
      report: {
        ...failedFlow.report,
        flow_id: "f2",
        nodes: { src: { read: 5, written: 3, failed: 1 } },
      },
    };
    expect(renderFlowTable([broken])).toContain("integrity-warning");
  });

  it("renders the empty state with no flows", () => {
    expect(renderFlowTable([])).toContain("no flows registered");
  });

  it("renders never-run flows", () => {
    expect(renderFlowTable([{ flow_id: "f3", report: null }])).toContain(
      "never run",
    );
  });
});

describe("escapeHtml", () => {
  it("escapes the metacharacters", () => {
    expect(escapeHtml(`<a href="x">&</a>`)).toBe(
      "&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;",
    );
  });
});
