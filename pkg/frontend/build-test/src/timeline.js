/**
 * Timeline view model: span bars with overhead whiskers, transaction-state
 * overlays, and event glyphs, ready to draw.
 *
 * Construction is a pure function of the trace-detail JSON, so snapshots of
 * the result are stable.  Colors follow the visualization conventions:
 * transaction state green (active, clean) / red (active, pending writes) /
 * gray (suspended); transaction events as rectangles (white start, green
 * commit, red abort); entity accesses as circles; consistency issues as
 * diamonds, yellow for stale reads with documented distinct colors for the
 * other kinds.  An overlay may extend past its span's end (a subordinate
 * transaction resolves with its top level).  Glyphs that coincide in time on
 * one row are offset into vertical lanes.
 */
export const OVERLAY_COLORS = {
    clean: "#2e7d32",
    dirty: "#c62828",
    suspended: "#9e9e9e",
};
export const GLYPH_COLORS = {
    tx_start: "#ffffff",
    tx_commit: "#2e7d32",
    tx_abort: "#c62828",
    entity_read: "#1565c0",
    entity_write: "#6a1b9a",
};
export const ISSUE_COLORS = {
    STALE_READ: "#f9a825", // the yellow diamond
    WRITE_CONFLICT: "#ef6c00",
    POTENTIAL_DEADLOCK: "#b71c1c",
    TX_CONFIG_VIOLATION: "#7b1fa2",
};
const GLYPH_EVENT_SHAPES = {
    tx_start: "rect",
    tx_commit: "rect",
    tx_abort: "rect",
    entity_read: "circle",
    entity_write: "circle",
};
function glyphLabel(ev) {
    switch (ev.type) {
        case "tx_start":
            return `start ${ev.tx_id}`;
        case "tx_commit":
            return `commit ${ev.tx_id}`;
        case "tx_abort":
            return `abort ${ev.tx_id}: ${ev.cause ?? ""}`;
        case "entity_read":
            return `read ${ev.entity_type}/${ev.entity_id}`;
        case "entity_write":
            return `write ${ev.entity_type}/${ev.entity_id}`;
        default:
            return ev.type;
    }
}
function issueLabel(issue) {
    const entity = issue.entity ? ` ${issue.entity.type}/${issue.entity.id}` : "";
    const txs = issue.conflicting_tx_ids.length ? ` (vs ${issue.conflicting_tx_ids.join(", ")})` : "";
    return `${issue.kind}${entity}${txs}`;
}
export function buildTimeline(side) {
    const rows = side.spans.map((span) => ({
        name: span.name,
        depth: span.depth,
        bar: { start: span.start_ts, end: span.end_ts },
        whiskerBefore: span.overhead_before > 0
            ? { start: span.start_ts - span.overhead_before, end: span.start_ts }
            : null,
        whiskerAfter: span.overhead_after > 0
            ? { start: span.end_ts, end: span.end_ts + span.overhead_after }
            : null,
    }));
    // Every event is attributed to exactly one span.
    const rowOfEvent = new Map();
    side.spans.forEach((span, index) => {
        for (const id of span.event_ids)
            rowOfEvent.set(id, index);
    });
    const tsOfEvent = new Map();
    for (const ev of side.events)
        tsOfEvent.set(ev.id, ev.ts);
    // A transaction's overlay is drawn on the row of the span it started in.
    const rowOfTx = new Map();
    for (const tx of side.transactions) {
        const row = rowOfEvent.get(tx.started_event_id);
        if (row !== undefined)
            rowOfTx.set(tx.tx_id, row);
    }
    const overlays = [];
    for (const seg of side.tx_overlays) {
        const row = rowOfTx.get(seg.tx_id);
        if (row === undefined)
            continue;
        overlays.push({
            row,
            txId: seg.tx_id,
            state: seg.state,
            color: OVERLAY_COLORS[seg.state] ?? "#000000",
            start: seg.from_ts,
            end: seg.to_ts,
            extendsPastSpan: seg.to_ts > rows[row].bar.end,
        });
    }
    const glyphs = [];
    for (const ev of side.events) {
        const shape = GLYPH_EVENT_SHAPES[ev.type];
        if (!shape)
            continue;
        glyphs.push({
            row: rowOfEvent.get(ev.id) ?? 0,
            ts: ev.ts,
            lane: 0,
            shape,
            color: GLYPH_COLORS[ev.type] ?? "#000000",
            kind: ev.type,
            eventId: ev.id,
            label: glyphLabel(ev),
        });
    }
    for (const issue of side.issues) {
        glyphs.push({
            row: rowOfEvent.get(issue.event_id) ?? 0,
            ts: tsOfEvent.get(issue.event_id) ?? 0,
            lane: 0,
            shape: "diamond",
            color: ISSUE_COLORS[issue.kind] ?? "#f9a825",
            kind: issue.kind,
            eventId: issue.event_id,
            label: issueLabel(issue),
        });
    }
    // Deterministic order, then vertical lanes for coinciding glyphs.
    glyphs.sort((a, b) => a.row - b.row || a.ts - b.ts || a.eventId - b.eventId || (a.shape < b.shape ? -1 : 1));
    const laneCounter = new Map();
    for (const glyph of glyphs) {
        const key = `${glyph.row}@${glyph.ts}`;
        const lane = laneCounter.get(key) ?? 0;
        glyph.lane = lane;
        laneCounter.set(key, lane + 1);
    }
    let start = Number.POSITIVE_INFINITY;
    let end = Number.NEGATIVE_INFINITY;
    for (const row of rows) {
        start = Math.min(start, row.whiskerBefore?.start ?? row.bar.start);
        end = Math.max(end, row.whiskerAfter?.end ?? row.bar.end);
    }
    for (const seg of overlays) {
        start = Math.min(start, seg.start);
        end = Math.max(end, seg.end);
    }
    if (!Number.isFinite(start)) {
        start = 0;
        end = 1;
    }
    return { range: { start, end }, rows, overlays, glyphs };
}
