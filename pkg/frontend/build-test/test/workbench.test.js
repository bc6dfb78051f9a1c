/**
 * Workbench loop against the real backend: start `seamsim serve` on the
 * fixture model and corpus, submit the split scenario, and render the
 * report table; a broken scenario must surface its diagnostic at the right
 * source line.
 */
import assert from "node:assert/strict";
import { spawn } from "node:child_process";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import test, { after, before } from "node:test";
import { fileURLToPath } from "node:url";
import { ApiError, analyzeScenario, fetchModelText } from "../src/api.js";
import { lineMarkers } from "../src/editor.js";
import { buildReportTable } from "../src/report.js";
const HERE = dirname(fileURLToPath(import.meta.url));
const ROOT = join(HERE, "..", "..");
const FIXTURES = join(ROOT, "fixtures");
let child = null;
let base = "";
before(async () => {
    child = spawn("python3", [
        "-u", "-m", "seamsim.cli", "serve",
        "--model", join(FIXTURES, "car.dm"),
        "--traces", join(FIXTURES, "small.traces.ndjson"),
        "--port", "0",
    ], { stdio: ["ignore", "pipe", "pipe"] });
    const url = await new Promise((resolve, reject) => {
        const timer = setTimeout(() => reject(new Error("backend did not start within 30s")), 30_000);
        let out = "";
        child.stdout.on("data", (chunk) => {
            out += chunk.toString();
            const match = out.match(/http:\/\/[\d.]+:(\d+)\//);
            if (match) {
                clearTimeout(timer);
                resolve(`http://127.0.0.1:${match[1]}`);
            }
        });
        let err = "";
        child.stderr.on("data", (chunk) => {
            err += chunk.toString();
        });
        child.on("exit", (code) => {
            clearTimeout(timer);
            reject(new Error(`backend exited with ${code}: ${err}`));
        });
    });
    base = url;
});
after(() => {
    child?.kill();
});
test("model text is served", async () => {
    const text = await fetchModelText(base);
    assert.ok(text.includes('component "Car Insurance"'));
});
test("submitting the split scenario renders the report table", async () => {
    const scenario = readFileSync(join(FIXTURES, "split.dms"), "utf-8");
    const report = await analyzeScenario(base, scenario);
    const table = buildReportTable(report);
    assert.ok(table.rows.length >= 1, "table should have use-case rows");
    const row = table.rows.find((r) => r.name === "Create Car Contract");
    assert.ok(row, "the worked-example use case appears in the table");
    assert.ok(row.meanDelta > 0, "remote overhead should lengthen the use case");
    assert.equal(table.summary.traces, 12);
    assert.equal(table.groups.length, 2);
});
test("a parse error is shown at its source line", async () => {
    const broken = 'component "Contracts" {\n' +
        "  serviceCandidate createContract [ transactionBehavior = SOMETIMES ]\n" +
        "}\n";
    let failure = null;
    try {
        await analyzeScenario(base, broken);
    }
    catch (err) {
        failure = err;
    }
    assert.ok(failure instanceof ApiError && failure.status === 400, "expected a 400 with diagnostics");
    const markers = lineMarkers(failure.diagnostics);
    assert.equal(markers.length, 1);
    assert.equal(markers[0].line, 2);
    assert.equal(markers[0].severity, "error");
    assert.match(markers[0].messages[0], /transactionBehavior/);
});
test("an unknown element is rejected with a diagnostic", async () => {
    let failure = null;
    try {
        await analyzeScenario(base, 'component "X" { serviceCandidate ghost }\n');
    }
    catch (err) {
        failure = err;
    }
    assert.ok(failure instanceof ApiError && failure.status === 400);
    assert.match(failure.diagnostics[0].message, /ghost/);
});
