/**
 * Workbench wiring: scenario editor on the left, report table and trace
 * timeline on the right.  One analysis request in flight at a time; the
 * submit button is disabled while pending.
 */

import { ApiError, analyzeScenario, fetchModelText, fetchTraceDetail, fetchTraces } from "./api.js";
import { annotateLines, lineMarkers } from "./editor.js";
import { el, makeScale, renderTimeline } from "./render.js";
import { buildReportTable, worstAffectedTrace } from "./report.js";
import type { Report } from "./schema.js";
import { isTraceDetail } from "./schema.js";
import { buildTimeline } from "./timeline.js";

const BASE = "";

const state: { report: Report | null; busy: boolean } = { report: null, busy: false };

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function setStatus(text: string, kind: "info" | "error" = "info"): void {
  const status = $("status");
  status.textContent = text;
  status.className = `status ${kind}`;
}

function renderDiagnostics(text: string, diagnostics: Parameters<typeof lineMarkers>[0]): void {
  const panel = $("diagnostics");
  panel.replaceChildren();
  const markers = lineMarkers(diagnostics);
  for (const annotated of annotateLines(text, markers)) {
    if (!annotated.marker) continue;
    for (const message of annotated.marker.messages) {
      panel.append(el("div", { class: `diag diag-${annotated.marker.severity}` }, message));
    }
  }
}

function renderReport(report: Report): void {
  const table = buildReportTable(report);
  const container = $("report");
  container.replaceChildren();

  if (table.empty) {
    container.append(el("p", { class: "no-changes" }, "No changes: the scenario leaves every use case as it is."));
  }

  const head = el(
    "tr",
    {},
    ...["use case", "traces", "mean", "mean (scenario)", "delta", "p-value", ""].map((h) => el("th", {}, h)),
  );
  const rows = table.rows.map((row) => {
    const tr = el(
      "tr",
      { class: row.significant ? "significant" : "", "data-use-case": row.name },
      el("td", {}, row.name),
      el("td", { class: "num" }, String(row.traceCount)),
      el("td", { class: "num" }, row.meanOriginal.toFixed(1)),
      el("td", { class: "num" }, row.meanRewritten.toFixed(1)),
      el("td", { class: "num" }, (row.meanDelta >= 0 ? "+" : "") + row.meanDelta.toFixed(1)),
      el("td", { class: "num" }, row.pDisplay),
      el("td", {}, row.significant ? "significant" : row.note),
    );
    tr.addEventListener("click", () => {
      const traceId = worstAffectedTrace(report, row.name);
      if (traceId) void showTrace(traceId);
    });
    return tr;
  });
  container.append(el("table", { class: "report-table" }, head, ...rows));

  const counts = table.summary;
  container.append(
    el(
      "p",
      { class: "summary" },
      `traces ${counts.traces} | new issues ${counts.new_issues} | vanished ${counts.vanished_issues} | ` +
        `outcome changes ${counts.outcome_changes} | significant use cases ${counts.significant_use_cases}`,
    ),
  );
  for (const group of table.groups) {
    container.append(
      el(
        "p",
        { class: group.potential ? "group ok" : "group bad" },
        `{${group.label}}: ${group.potential ? "potential microservice" : "not a potential microservice"}`,
      ),
    );
  }

  if (table.issueDiffs.length || table.outcomeChanges.length) {
    const details = el("div", { class: "diff-lists" });
    for (const line of table.issueDiffs.slice(0, 200)) {
      const row = el(
        "div",
        { class: `issue-line ${line.direction}` },
        `${line.direction === "new" ? "+" : "-"} ${line.kind} ${line.entity} (trace ${line.traceId}, event ${line.eventId})`,
      );
      row.addEventListener("click", () => void showTrace(line.traceId, line.eventId));
      details.append(row);
    }
    for (const change of table.outcomeChanges.slice(0, 200)) {
      const row = el(
        "div",
        { class: "outcome-line" },
        `~ ${change.entity}: ${change.from} -> ${change.to} (trace ${change.traceId}, event ${change.eventId})`,
      );
      row.addEventListener("click", () => void showTrace(change.traceId, change.eventId));
      details.append(row);
    }
    container.append(details);
  }
}

async function showTrace(traceId: string, highlightEvent?: number): Promise<void> {
  const panel = $("trace");
  panel.replaceChildren(el("p", {}, `loading trace ${traceId}...`));
  try {
    const detail = await fetchTraceDetail(BASE, traceId);
    if (!isTraceDetail(detail)) {
      panel.replaceChildren(el("div", { class: "error-panel" }, "trace detail does not match the expected schema"));
      return;
    }
    const original = buildTimeline(detail.original);
    const rewritten = detail.rewritten ? buildTimeline(detail.rewritten) : null;
    // Side-by-side views share one time axis.
    const start = Math.min(original.range.start, rewritten?.range.start ?? Infinity);
    const end = Math.max(original.range.end, rewritten?.range.end ?? -Infinity);
    const scale = makeScale(start, end);
    panel.replaceChildren(el("h2", {}, `${detail.trace_id} - ${detail.use_case}`));
    panel.append(renderTimeline(original, scale, "original"));
    if (rewritten) panel.append(renderTimeline(rewritten, scale, "rewritten"));
    if (highlightEvent !== undefined) {
      panel.append(el("p", { class: "hint" }, `event ${highlightEvent} carries the selected finding`));
    }
  } catch (err) {
    panel.replaceChildren(el("div", { class: "error-panel" }, String(err)));
  }
}

async function runAnalysis(): Promise<void> {
  if (state.busy) return;
  const editor = $("scenario") as HTMLTextAreaElement;
  const button = $("analyze") as HTMLButtonElement;
  state.busy = true;
  button.disabled = true;
  setStatus("analyzing...");
  renderDiagnostics("", []);
  try {
    const report = await analyzeScenario(BASE, editor.value);
    state.report = report;
    renderReport(report);
    setStatus(`analysis done (alpha ${report.alpha})`);
  } catch (err) {
    if (err instanceof ApiError && err.status === 400) {
      renderDiagnostics(editor.value, err.diagnostics);
      setStatus("scenario rejected - see diagnostics", "error");
    } else {
      setStatus(String(err), "error");
    }
  } finally {
    state.busy = false;
    button.disabled = false;
  }
}

async function boot(): Promise<void> {
  try {
    $("model").textContent = await fetchModelText(BASE);
    const listing = await fetchTraces(BASE);
    $("corpus").textContent = `${listing.traces.length} traces cached`;
  } catch (err) {
    setStatus(String(err), "error");
  }
  $("analyze").addEventListener("click", () => void runAnalysis());
}

void boot();
