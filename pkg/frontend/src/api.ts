/** Typed wrappers for the workbench endpoints. */

import type { Diagnostic, Report, TraceDetail, TraceListEntry } from "./schema.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number, readonly diagnostics: Diagnostic[] = []) {
    super(message);
  }
}

async function getJson<T>(base: string, path: string): Promise<T> {
  const resp = await fetch(base + path);
  if (!resp.ok) throw new ApiError(`${path}: HTTP ${resp.status}`, resp.status);
  return (await resp.json()) as T;
}

export async function fetchModelText(base: string): Promise<string> {
  const resp = await fetch(base + "/api/model");
  if (!resp.ok) throw new ApiError(`/api/model: HTTP ${resp.status}`, resp.status);
  return await resp.text();
}

export function fetchTraces(base: string): Promise<{ traces: TraceListEntry[] }> {
  return getJson(base, "/api/traces");
}

export function fetchTraceDetail(base: string, traceId: string): Promise<TraceDetail> {
  return getJson(base, `/api/traces/${encodeURIComponent(traceId)}`);
}

export function fetchLastReport(base: string): Promise<Report> {
  return getJson(base, "/api/report");
}

/** POST the scenario text; a 400 carries diagnostics with source spans. */
export async function analyzeScenario(base: string, scenarioText: string): Promise<Report> {
  const resp = await fetch(base + "/api/analyze", {
    method: "POST",
    headers: { "Content-Type": "text/plain; charset=utf-8" },
    body: scenarioText,
  });
  const body = await resp.json();
  if (resp.status === 400) {
    const diagnostics = (body.diagnostics ?? []) as Diagnostic[];
    throw new ApiError("scenario rejected", 400, diagnostics);
  }
  if (!resp.ok) throw new ApiError(`/api/analyze: HTTP ${resp.status}`, resp.status);
  return body as Report;
}
