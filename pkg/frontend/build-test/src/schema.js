/** Wire types of the workbench API (see docs/formats.md in the backend). */
export function isReport(x) {
    const r = x;
    return !!r && r.schema_version === 1 && Array.isArray(r.use_cases) && Array.isArray(r.traces);
}
export function isTraceDetail(x) {
    const d = x;
    return !!d && typeof d.trace_id === "string" && !!d.original && Array.isArray(d.original.spans);
}
