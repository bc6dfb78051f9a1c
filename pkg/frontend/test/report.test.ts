import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import test from "node:test";
import { fileURLToPath } from "node:url";

import { annotateLines, lineMarkers } from "../src/editor.js";
import { buildReportTable, worstAffectedTrace } from "../src/report.js";
import type { Diagnostic, Report } from "../src/schema.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const ROOT = join(HERE, "..", "..");

function loadReport(): Report {
  return JSON.parse(readFileSync(join(ROOT, "fixtures", "report.json"), "utf-8")) as Report;
}

test("report table rows carry the per-use-case statistics", () => {
  const table = buildReportTable(loadReport());
  assert.ok(table.rows.length >= 1);
  const row = table.rows.find((r) => r.name === "Create Car Contract");
  assert.ok(row);
  assert.ok(row.traceCount >= 2);
  assert.ok(row.meanRewritten > row.meanOriginal, "the split scenario adds overhead");
  assert.ok(row.pValue !== null && row.pValue >= 0 && row.pValue <= 1);
  assert.equal(typeof row.significant, "boolean");
});

test("summary and groups come through", () => {
  const table = buildReportTable(loadReport());
  assert.equal(table.summary.traces, 12);
  assert.equal(table.groups.length, 2);
  for (const group of table.groups) assert.equal(group.potential, true);
});

test("worst-affected trace prefers new issues, then duration shift", () => {
  const report = loadReport();
  const worst = worstAffectedTrace(report, "Create Car Contract");
  assert.ok(worst);
  const chosen = report.traces.find((t) => t.trace_id === worst)!;
  for (const other of report.traces) {
    if (other.use_case !== "Create Car Contract") continue;
    const byIssues = chosen.new_issues.length - other.new_issues.length;
    assert.ok(
      byIssues > 0 ||
        (byIssues === 0 && Math.abs(chosen.duration_delta) >= Math.abs(other.duration_delta)),
      `trace ${other.trace_id} would have been a worse pick`,
    );
  }
  assert.equal(worstAffectedTrace(report, "No Such Use Case"), null);
});

test("empty comparison is flagged as no changes", () => {
  const report = loadReport();
  const cleaned: Report = {
    ...report,
    summary: { ...report.summary, significant_use_cases: 0, new_issues: 0, vanished_issues: 0, outcome_changes: 0 },
  };
  assert.equal(buildReportTable(cleaned).empty, true);
  assert.equal(buildReportTable(report).empty, false);
});

test("diagnostics map to their source lines", () => {
  const diagnostics: Diagnostic[] = [
    { severity: "error", message: "unexpected token", line: 2, column: 3, length: 1 },
    { severity: "warning", message: "unknown attribute 'color'", line: 2, column: 10, length: 5 },
    { severity: "error", message: "unterminated string", line: 4, column: 1, length: 2 },
  ];
  const markers = lineMarkers(diagnostics);
  assert.deepEqual(markers.map((m) => [m.line, m.severity, m.messages.length]), [
    [2, "error", 2],
    [4, "error", 1],
  ]);
  const annotated = annotateLines("a\nb\nc\nd\ne", markers);
  assert.equal(annotated[1].marker?.line, 2);
  assert.equal(annotated[0].marker, null);
  assert.equal(annotated[3].marker?.messages[0], "4:1: unterminated string");
});
