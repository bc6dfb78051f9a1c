/** Dumb DOM/SVG drawing of the view models. */
const SVG_NS = "http://www.w3.org/2000/svg";
const ROW_HEIGHT = 34;
const BAR_HEIGHT = 14;
const LANE_OFFSET = 7;
const LABEL_WIDTH = 210;
const PLOT_WIDTH = 760;
const PAD = 10;
export function el(tag, attrs = {}, ...children) {
    const node = document.createElement(tag);
    for (const [k, v] of Object.entries(attrs)) {
        if (k === "class")
            node.className = v;
        else
            node.setAttribute(k, v);
    }
    node.append(...children);
    return node;
}
function svgEl(tag, attrs) {
    const node = document.createElementNS(SVG_NS, tag);
    for (const [k, v] of Object.entries(attrs))
        node.setAttribute(k, String(v));
    return node;
}
/**
 * Draw one timeline; `scale` maps a timestamp to an x coordinate so both
 * sides of a comparison can share one axis.
 */
export function renderTimeline(model, scale, title) {
    const height = model.rows.length * ROW_HEIGHT + 2 * PAD;
    const svg = svgEl("svg", {
        width: LABEL_WIDTH + PLOT_WIDTH + 2 * PAD,
        height,
        class: "timeline",
    });
    model.rows.forEach((row, i) => {
        const y = PAD + i * ROW_HEIGHT;
        const mid = y + ROW_HEIGHT / 2;
        const label = svgEl("text", {
            x: 4 + row.depth * 12,
            y: mid + 4,
            class: "row-label",
        });
        label.textContent = row.name;
        svg.append(label);
        // Transaction-state overlays behind the bar.
        for (const seg of model.overlays) {
            if (seg.row !== i)
                continue;
            svg.append(svgEl("rect", {
                x: scale(seg.start),
                y: y + 2,
                width: Math.max(1, scale(seg.end) - scale(seg.start)),
                height: ROW_HEIGHT - 4,
                fill: seg.color,
                opacity: 0.35,
                class: `overlay overlay-${seg.state}` + (seg.extendsPastSpan ? " overlay-extends" : ""),
            }));
        }
        // Overhead whiskers.
        for (const whisker of [row.whiskerBefore, row.whiskerAfter]) {
            if (!whisker)
                continue;
            const x1 = scale(whisker.start);
            const x2 = scale(whisker.end);
            svg.append(svgEl("line", { x1, x2, y1: mid, y2: mid, class: "whisker" }));
            svg.append(svgEl("line", { x1, x2: x1, y1: mid - 5, y2: mid + 5, class: "whisker" }));
            svg.append(svgEl("line", { x1: x2, x2, y1: mid - 5, y2: mid + 5, class: "whisker" }));
        }
        // The span bar itself.
        svg.append(svgEl("rect", {
            x: scale(row.bar.start),
            y: mid - BAR_HEIGHT / 2,
            width: Math.max(1, scale(row.bar.end) - scale(row.bar.start)),
            height: BAR_HEIGHT,
            class: "span-bar",
        }));
    });
    for (const glyph of model.glyphs) {
        const x = scale(glyph.ts);
        const y = PAD + glyph.row * ROW_HEIGHT + ROW_HEIGHT / 2 - glyph.lane * LANE_OFFSET;
        let node;
        if (glyph.shape === "rect") {
            node = svgEl("rect", { x: x - 4, y: y - 4, width: 8, height: 8, fill: glyph.color, class: "glyph" });
        }
        else if (glyph.shape === "circle") {
            node = svgEl("circle", { cx: x, cy: y, r: 4, fill: glyph.color, class: "glyph" });
        }
        else {
            node = svgEl("path", {
                d: `M ${x} ${y - 6} L ${x + 6} ${y} L ${x} ${y + 6} L ${x - 6} ${y} Z`,
                fill: glyph.color,
                class: `glyph issue-${glyph.kind}`,
            });
        }
        const tooltip = svgEl("title", {});
        tooltip.textContent = `${glyph.label} @ ${glyph.ts}`;
        node.append(tooltip);
        svg.append(node);
    }
    const wrap = el("div", { class: "timeline-side" });
    wrap.append(el("h3", {}, title));
    wrap.append(svg);
    return wrap;
}
export function makeScale(start, end) {
    const span = Math.max(1, end - start);
    return (ts) => LABEL_WIDTH + PAD + ((ts - start) / span) * PLOT_WIDTH;
}
