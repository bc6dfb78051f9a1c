/** Report-table view model and worst-affected-trace selection (pure). */
function formatP(p) {
    if (p === null)
        return "-";
    if (p === 0)
        return "0";
    if (p < 1e-4)
        return p.toExponential(1);
    return p.toFixed(4);
}
export function buildReportTable(report) {
    const rows = report.use_cases.map((uc) => {
        const welch = uc.welch;
        const meanDelta = welch ? welch.mean_delta : uc.rewritten.mean - uc.original.mean;
        return {
            name: uc.name,
            traceCount: uc.trace_count,
            meanOriginal: uc.original.mean,
            meanRewritten: uc.rewritten.mean,
            meanDelta,
            relativeDelta: welch ? welch.relative_delta : null,
            pValue: welch ? welch.p_value : null,
            pDisplay: formatP(welch ? welch.p_value : null),
            significant: uc.significant,
            note: uc.note,
        };
    });
    const issueDiffs = [];
    const outcomeChanges = [];
    for (const trace of report.traces) {
        for (const [direction, issues] of [
            ["new", trace.new_issues],
            ["vanished", trace.vanished_issues],
        ]) {
            for (const issue of issues) {
                issueDiffs.push({
                    traceId: trace.trace_id,
                    useCase: trace.use_case,
                    direction,
                    kind: issue.kind,
                    entity: issue.entity ? `${issue.entity.type}/${issue.entity.id}` : "",
                    eventId: issue.event_id,
                });
            }
        }
        for (const change of trace.outcome_changes) {
            outcomeChanges.push({
                traceId: trace.trace_id,
                useCase: trace.use_case,
                eventId: change.event_id,
                entity: `${change.entity.type}/${change.entity.id}`,
                from: change.original,
                to: change.rewritten,
            });
        }
    }
    const summary = report.summary;
    return {
        alpha: report.alpha,
        rows,
        issueDiffs,
        outcomeChanges,
        summary,
        groups: report.microservice_groups.map((g) => ({
            label: g.components.join(", "),
            potential: g.potential_microservice,
        })),
        empty: summary.significant_use_cases === 0 &&
            summary.new_issues === 0 &&
            summary.vanished_issues === 0 &&
            summary.outcome_changes === 0,
    };
}
/**
 * The trace a row click opens: most new issues first, then the largest
 * duration shift, then stable by id.
 */
export function worstAffectedTrace(report, useCase) {
    let best = null;
    for (const trace of report.traces) {
        if (trace.use_case !== useCase)
            continue;
        if (best === null) {
            best = trace;
            continue;
        }
        const issues = trace.new_issues.length - best.new_issues.length;
        if (issues > 0) {
            best = trace;
            continue;
        }
        if (issues === 0) {
            const delta = Math.abs(trace.duration_delta) - Math.abs(best.duration_delta);
            if (delta > 0 || (delta === 0 && trace.trace_id < best.trace_id))
                best = trace;
        }
    }
    return best ? best.trace_id : null;
}
