/**
 * Golden tests of the timeline view model on the committed trace-detail
 * fixture: a subordinate transaction whose overlay runs past its span's
 * end, a gray suspended interval, exactly one yellow stale-read diamond,
 * and overhead whiskers.  The snapshot must be stable across runs.
 */

import assert from "node:assert/strict";
import { readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import test from "node:test";
import { fileURLToPath } from "node:url";

import type { TraceDetail } from "../src/schema.js";
import { ISSUE_COLORS, OVERLAY_COLORS, buildTimeline } from "../src/timeline.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const ROOT = join(HERE, "..", "..");
const FIXTURE = join(ROOT, "fixtures", "fig2_detail.json");
const GOLDEN = join(ROOT, "golden", "fig2_timeline.json");

function load(): TraceDetail {
  return JSON.parse(readFileSync(FIXTURE, "utf-8")) as TraceDetail;
}

function snapshot(value: unknown): string {
  return JSON.stringify(value, null, 1) + "\n";
}

test("overlay of the subordinate transaction extends past its span", () => {
  const model = buildTimeline(load().original);
  const subRow = model.rows.findIndex((r) => r.name === "createContract");
  assert.ok(subRow >= 0);
  const past = model.overlays.filter((o) => o.row === subRow && o.extendsPastSpan);
  assert.ok(past.length > 0, "expected an overlay extending past the span end");
  const spanEnd = model.rows[subRow].bar.end;
  for (const seg of past) assert.ok(seg.end > spanEnd);
});

test("suspension shows as a gray interval", () => {
  const model = buildTimeline(load().original);
  const suspended = model.overlays.filter((o) => o.state === "suspended");
  assert.equal(suspended.length, 1);
  assert.equal(suspended[0].color, OVERLAY_COLORS.suspended);
  assert.equal(suspended[0].color, "#9e9e9e");
});

test("exactly one yellow stale-read diamond", () => {
  const model = buildTimeline(load().original);
  const diamonds = model.glyphs.filter((g) => g.shape === "diamond");
  assert.equal(diamonds.length, 1);
  assert.equal(diamonds[0].kind, "STALE_READ");
  assert.equal(diamonds[0].color, ISSUE_COLORS.STALE_READ);
  assert.equal(diamonds[0].color, "#f9a825");
});

test("overhead whiskers surround the spans", () => {
  const model = buildTimeline(load().original);
  const remote = model.rows.find((r) => r.name === "createContract");
  assert.ok(remote?.whiskerBefore && remote.whiskerAfter);
  assert.equal(remote.whiskerBefore.end - remote.whiskerBefore.start, 10);
  assert.equal(remote.whiskerAfter.end - remote.whiskerAfter.start, 10);
  const top = model.rows.find((r) => r.name === "createCarContract");
  assert.ok(top?.whiskerBefore && top.whiskerAfter);
});

test("transaction event glyphs: white start, green commit", () => {
  const model = buildTimeline(load().original);
  const starts = model.glyphs.filter((g) => g.kind === "tx_start");
  const commits = model.glyphs.filter((g) => g.kind === "tx_commit");
  assert.ok(starts.length >= 3 && commits.length >= 3);
  for (const g of starts) assert.equal(g.color, "#ffffff");
  for (const g of commits) assert.equal(g.color, "#2e7d32");
  for (const g of [...starts, ...commits]) assert.equal(g.shape, "rect");
});

test("coinciding glyphs get distinct lanes", () => {
  const model = buildTimeline(load().original);
  const seen = new Set<string>();
  for (const g of model.glyphs) {
    const key = `${g.row}@${g.ts}@${g.lane}`;
    assert.ok(!seen.has(key), `two glyphs share ${key}`);
    seen.add(key);
  }
});

test("view model matches the golden snapshot and is stable across runs", () => {
  const first = snapshot(buildTimeline(load().original));
  const second = snapshot(buildTimeline(load().original));
  assert.equal(first, second, "view model construction must be deterministic");
  if (process.env.UPDATE_GOLDEN) {
    writeFileSync(GOLDEN, first);
    return;
  }
  const golden = readFileSync(GOLDEN, "utf-8");
  assert.equal(first, golden, "snapshot differs from golden/fig2_timeline.json (set UPDATE_GOLDEN=1 to regenerate)");
});
