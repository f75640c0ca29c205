/** Browser bootstrap: wires the pure renderers and the annotation session
 *  to the DOM. Kept deliberately thin — everything with behavior worth
 *  testing lives in api.ts / render.ts / state.ts. */

import { ApiClient, ApiRequestError } from "./api.js";
import {
  renderFlowTable,
  renderMetrics,
  renderAnnotationDoc,
  renderNetworkFailure,
  renderQueryError,
  renderSearchResults,
} from "./render.js";
import { AnnotationSession } from "./state.js";

type View = "search" | "annotate" | "flows";

export function mount(root: HTMLElement, api = new ApiClient()): void {
  root.innerHTML = [
    `<nav>`,
    `<button data-view="search">Search</button>`,
    `<button data-view="annotate">Annotate</button>`,
    `<button data-view="flows">Flows</button>`,
    `</nav>`,
    `<section id="view"></section>`,
  ].join("");
  const view = root.querySelector<HTMLElement>("#view")!;

  const showSearch = () => {
    view.innerHTML = [
      `<form id="searchform"><input name="q" placeholder="fever AND NOT pneumonia">`,
      `<button>Search</button></form><div id="results"></div>`,
    ].join("");
    const form = view.querySelector<HTMLFormElement>("#searchform")!;
    const results = view.querySelector<HTMLElement>("#results")!;
    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      const query = new FormData(form).get("q") as string;
      try {
        const response = await api.search(query, {
          aggField: "doc_type",
          aggDate: "month",
        });
        results.innerHTML = renderSearchResults(response);
      } catch (error) {
        results.innerHTML =
          error instanceof ApiRequestError
            ? renderQueryError(query, error.body)
            : renderNetworkFailure();
      }
    });
  };

  const showAnnotate = () => {
    view.innerHTML = [
      `<form id="projectform"><input name="project" placeholder="proj-1">`,
      `<button>Open</button></form><div id="doc"></div><div id="metrics"></div>`,
      `<div id="verdicts" hidden>`,
      `<button data-verdict="accept">Accept</button>`,
      `<button data-verdict="reject">Reject</button>`,
      `</div>`,
    ].join("");
    const form = view.querySelector<HTMLFormElement>("#projectform")!;
    const docPane = view.querySelector<HTMLElement>("#doc")!;
    const metricsPane = view.querySelector<HTMLElement>("#metrics")!;
    const verdicts = view.querySelector<HTMLElement>("#verdicts")!;
    let session: AnnotationSession | null = null;

    const redraw = () => {
      if (!session) return;
      const { doc, cursor, metrics, exhausted } = session.state;
      docPane.innerHTML = exhausted
        ? `<div class="empty">queue exhausted — all training documents annotated</div>`
        : doc
          ? renderAnnotationDoc(doc, cursor ?? -1)
          : "";
      metricsPane.innerHTML = renderMetrics(metrics);
      verdicts.hidden = !doc || cursor === null;
    };

    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      const projectId = new FormData(form).get("project") as string;
      session = new AnnotationSession(api, projectId);
      await session.start();
      redraw();
    });
    verdicts.addEventListener("click", async (event) => {
      const target = event.target as HTMLElement;
      const kind = target.dataset.verdict;
      if (!session || !kind) return;
      try {
        await session.decide({ kind: kind as "accept" | "reject" });
      } catch (error) {
        if (error instanceof ApiRequestError && error.body.code === "validation_document") {
          window.alert("this is a validation document and cannot be annotated");
          return;
        }
        throw error;
      }
      redraw();
    });
  };

  const showFlows = async () => {
    view.innerHTML = `<div id="flowtable">loading…</div>`;
    const pane = view.querySelector<HTMLElement>("#flowtable")!;
    try {
      const response = await api.listFlows();
      pane.innerHTML = renderFlowTable(response.flows);
    } catch {
      pane.innerHTML = renderNetworkFailure();
    }
  };

  const views: Record<View, () => void> = {
    search: showSearch,
    annotate: showAnnotate,
    flows: showFlows,
  };
  root.querySelector("nav")!.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const name = target.dataset.view as View | undefined;
    if (name) views[name]();
  });
  showSearch();
}
