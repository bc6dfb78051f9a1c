/** Scenario editor gutter: map diagnostics to their source lines (pure). */
export function lineMarkers(diagnostics) {
    const byLine = new Map();
    for (const diag of diagnostics) {
        const existing = byLine.get(diag.line);
        const text = `${diag.line}:${diag.column}: ${diag.message}`;
        if (existing) {
            existing.messages.push(text);
            if (diag.severity === "error")
                existing.severity = "error";
        }
        else {
            byLine.set(diag.line, { line: diag.line, severity: diag.severity, messages: [text] });
        }
    }
    return [...byLine.values()].sort((a, b) => a.line - b.line);
}
/** Annotate the editor text with per-line markers for display. */
export function annotateLines(text, markers) {
    const byLine = new Map(markers.map((m) => [m.line, m]));
    return text.split("\n").map((line, i) => ({ text: line, marker: byLine.get(i + 1) ?? null }));
}
