/** Typed wrappers for the workbench endpoints. */
export class ApiError extends Error {
    status;
    diagnostics;
    constructor(message, status, diagnostics = []) {
        super(message);
        this.status = status;
        this.diagnostics = diagnostics;
    }
}
async function getJson(base, path) {
    const resp = await fetch(base + path);
    if (!resp.ok)
        throw new ApiError(`${path}: HTTP ${resp.status}`, resp.status);
    return (await resp.json());
}
export async function fetchModelText(base) {
    const resp = await fetch(base + "/api/model");
    if (!resp.ok)
        throw new ApiError(`/api/model: HTTP ${resp.status}`, resp.status);
    return await resp.text();
}
export function fetchTraces(base) {
    return getJson(base, "/api/traces");
}
export function fetchTraceDetail(base, traceId) {
    return getJson(base, `/api/traces/${encodeURIComponent(traceId)}`);
}
export function fetchLastReport(base) {
    return getJson(base, "/api/report");
}
/** POST the scenario text; a 400 carries diagnostics with source spans. */
export async function analyzeScenario(base, scenarioText) {
    const resp = await fetch(base + "/api/analyze", {
        method: "POST",
        headers: { "Content-Type": "text/plain; charset=utf-8" },
        body: scenarioText,
    });
    const body = await resp.json();
    if (resp.status === 400) {
        const diagnostics = (body.diagnostics ?? []);
        throw new ApiError("scenario rejected", 400, diagnostics);
    }
    if (!resp.ok)
        throw new ApiError(`/api/analyze: HTTP ${resp.status}`, resp.status);
    return body;
}
