/** Scenario editor gutter: map diagnostics to their source lines (pure). */

import type { Diagnostic } from "./schema.js";

export interface LineMarker {
  line: number; // 1-based
  severity: "error" | "warning";
  messages: string[];
}

export function lineMarkers(diagnostics: Diagnostic[]): LineMarker[] {
  const byLine = new Map<number, LineMarker>();
  for (const diag of diagnostics) {
    const existing = byLine.get(diag.line);
    const text = `${diag.line}:${diag.column}: ${diag.message}`;
    if (existing) {
      existing.messages.push(text);
      if (diag.severity === "error") existing.severity = "error";
    } else {
      byLine.set(diag.line, { line: diag.line, severity: diag.severity, messages: [text] });
    }
  }
  return [...byLine.values()].sort((a, b) => a.line - b.line);
}

/** Annotate the editor text with per-line markers for display. */
export function annotateLines(text: string, markers: LineMarker[]): { text: string; marker: LineMarker | null }[] {
  const byLine = new Map(markers.map((m) => [m.line, m]));
  return text.split("\n").map((line, i) => ({ text: line, marker: byLine.get(i + 1) ?? null }));
}
