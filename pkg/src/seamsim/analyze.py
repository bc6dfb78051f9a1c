"""Trace analysis and original-vs-scenario comparison.

Per trace: duration, total observed overhead, remote invocation count,
consistency issues, and per-write outcomes.  Issue rules:

* STALE_READ          - a read hits an entity with a pending write of another
                        transaction while the entity's data store returns
                        possibly stale data.
* POTENTIAL_DEADLOCK  - any access hits such an entity on a blocking store
                        while the holding transaction cannot proceed until
                        the blocked caller returns (it is suspended or on the
                        other side of a non-propagating remote hop).  This
                        rule is this tool's construction and is labeled as
                        such in the report schema.
* WRITE_CONFLICT      - a write hits an entity with a pending write of
                        another transaction (any store).
* TX_CONFIG_VIOLATION - the entry decision table hit MANDATORY without a
                        transaction or NEVER with one.

Comparison: per use case with at least two traces, a two-sided Welch test of
original vs. rewritten duration samples; per trace pair, issues matched via
the event mapping on (kind, entity, event id), and committed/reverted changes
on preserved write events.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import ConflictBehavior, DeploymentModel, microservice_groups
from .rewrite import EventMapping
from .stats import DegenerateSample, SampleStats, WelchResult, welch_test
from .txsim import TxAnnotatedTrace

STALE_READ = "STALE_READ"
WRITE_CONFLICT = "WRITE_CONFLICT"
POTENTIAL_DEADLOCK = "POTENTIAL_DEADLOCK"
TX_CONFIG_VIOLATION = "TX_CONFIG_VIOLATION"


class MismatchedCorpora(Exception):
    """Original and rewritten inputs do not align one-to-one."""


@dataclass(frozen=True)
class ConsistencyIssue:
    kind: str
    event_id: int
    entity_type: Optional[str] = None
    entity_id: Optional[str] = None
    conflicting_tx_ids: tuple[str, ...] = ()

    @property
    def match_key(self) -> tuple:
        return (self.kind, self.entity_type, self.entity_id, self.event_id)

    def to_obj(self) -> dict:
        return {
            "kind": self.kind,
            "event_id": self.event_id,
            "entity": None
            if self.entity_type is None
            else {"type": self.entity_type, "id": self.entity_id},
            "conflicting_tx_ids": list(self.conflicting_tx_ids),
        }


@dataclass
class TraceAnalysis:
    trace_id: str
    use_case: str
    duration: int
    total_overhead: int
    remote_invocations: int
    issues: list[ConsistencyIssue]
    write_event_ids: np.ndarray
    write_committed: np.ndarray
    write_entities: list[tuple[str, str]]

    def write_outcomes(self) -> dict[int, str]:
        return {
            int(e): "COMMITTED" if c else "REVERTED"
            for e, c in zip(self.write_event_ids, self.write_committed)
        }


def analyze_trace(annotated: TxAnnotatedTrace, model: Optional[DeploymentModel] = None) -> TraceAnalysis:
    """Analyze one annotated trace; `model` defaults to the annotation's."""
    model = model or annotated.model
    trace = annotated.trace

    store_behavior = {
        et: store.conflict_behavior for et, store in model.store_of_entity_type.items()
    }

    issues: list[ConsistencyIssue] = []
    # One issue per (kind, event); conflicting holders merge into one record.
    merged: dict[tuple, set[str]] = {}
    order: list[tuple] = []
    for rec in annotated.conflicts:
        behavior = store_behavior.get(rec.entity_type)
        kinds = []
        if not rec.is_write and behavior is ConflictBehavior.STALE_READ:
            kinds.append(STALE_READ)
        if behavior is ConflictBehavior.BLOCK and rec.holder_unreachable:
            kinds.append(POTENTIAL_DEADLOCK)
        if rec.is_write:
            kinds.append(WRITE_CONFLICT)
        for kind in kinds:
            key = (kind, rec.entity_type, rec.entity_id, rec.event_id)
            if key not in merged:
                merged[key] = set()
                order.append(key)
            merged[key].add(annotated.tx_id_of(rec.holder_tx))
    for kind, etype, eid, event_id in order:
        issues.append(
            ConsistencyIssue(
                kind=kind,
                event_id=event_id,
                entity_type=etype,
                entity_id=eid,
                conflicting_tx_ids=tuple(sorted(merged[(kind, etype, eid, event_id)])),
            )
        )
    for event_id, code in annotated.violations:
        issues.append(ConsistencyIssue(kind=TX_CONFIG_VIOLATION, event_id=event_id))

    sim = annotated.sim
    pool = trace.pool
    a = trace.a
    b = trace.b
    write_entities = [
        (pool[a[p]], pool[b[p]]) for p in sim.write_pos.tolist()
    ]
    return TraceAnalysis(
        trace_id=trace.trace_id,
        use_case=trace.use_case,
        duration=trace.duration,
        total_overhead=trace.total_overhead(),
        remote_invocations=annotated.remote_invocations,
        issues=issues,
        write_event_ids=np.asarray(annotated.write_event_ids, dtype=np.int64),
        write_committed=np.asarray(sim.write_committed, dtype=np.int64),
        write_entities=write_entities,
    )


# ---------------------------------------------------------------------------
# Pairwise diff


@dataclass
class OutcomeChange:
    event_id: int
    entity_type: str
    entity_id: str
    original: str
    rewritten: str

    def to_obj(self) -> dict:
        return {
            "event_id": self.event_id,
            "entity": {"type": self.entity_type, "id": self.entity_id},
            "original": self.original,
            "rewritten": self.rewritten,
        }


@dataclass
class TracePairDiff:
    trace_id: str
    use_case: str
    original_duration: int
    rewritten_duration: int
    original_overhead: int
    rewritten_overhead: int
    remote_invocations: tuple[int, int]
    new_issues: list[ConsistencyIssue]
    vanished_issues: list[ConsistencyIssue]
    outcome_changes: list[OutcomeChange]

    def to_obj(self) -> dict:
        return {
            "trace_id": self.trace_id,
            "use_case": self.use_case,
            "original_duration": self.original_duration,
            "rewritten_duration": self.rewritten_duration,
            "duration_delta": self.rewritten_duration - self.original_duration,
            "new_issues": [i.to_obj() for i in self.new_issues],
            "vanished_issues": [i.to_obj() for i in self.vanished_issues],
            "outcome_changes": [c.to_obj() for c in self.outcome_changes],
        }


def diff_pair(original: TraceAnalysis, rewritten: TraceAnalysis, mapping: EventMapping) -> TracePairDiff:
    """Diff one original/rewritten analysis pair via the event mapping."""
    if original.trace_id != rewritten.trace_id:
        raise MismatchedCorpora(f"trace ids differ: {original.trace_id!r} vs {rewritten.trace_id!r}")

    # Issues match on (kind, entity, event id) with ids taken across the
    # mapping; multiset semantics (the same key can legitimately repeat).
    rew_available = Counter(i.match_key for i in rewritten.issues)
    matched: Counter = Counter()
    vanished: list[ConsistencyIssue] = []
    for issue in original.issues:
        mapped = mapping.to_rewritten(issue.event_id)
        key = (issue.kind, issue.entity_type, issue.entity_id, mapped)
        if mapped is not None and rew_available[key] > 0:
            rew_available[key] -= 1
            matched[key] += 1
        else:
            vanished.append(issue)
    new: list[ConsistencyIssue] = []
    consumed: Counter = Counter()
    for issue in rewritten.issues:
        key = issue.match_key
        if consumed[key] < matched[key]:
            consumed[key] += 1
        else:
            new.append(issue)

    # Write outcomes: write events are always preserved with their ids.
    changes: list[OutcomeChange] = []
    if len(original.write_event_ids):
        o_order = np.argsort(original.write_event_ids, kind="stable")
        r_order = np.argsort(rewritten.write_event_ids, kind="stable")
        o_ids = original.write_event_ids[o_order]
        r_ids = rewritten.write_event_ids[r_order]
        if not np.array_equal(o_ids, r_ids):
            raise MismatchedCorpora(f"write events differ for trace {original.trace_id!r}")
        o_c = original.write_committed[o_order]
        r_c = rewritten.write_committed[r_order]
        for idx in np.flatnonzero(o_c != r_c).tolist():
            etype, eid = original.write_entities[int(o_order[idx])]
            changes.append(
                OutcomeChange(
                    event_id=int(o_ids[idx]),
                    entity_type=etype,
                    entity_id=eid,
                    original="COMMITTED" if o_c[idx] else "REVERTED",
                    rewritten="COMMITTED" if r_c[idx] else "REVERTED",
                )
            )

    return TracePairDiff(
        trace_id=original.trace_id,
        use_case=original.use_case,
        original_duration=original.duration,
        rewritten_duration=rewritten.duration,
        original_overhead=original.total_overhead,
        rewritten_overhead=rewritten.total_overhead,
        remote_invocations=(original.remote_invocations, rewritten.remote_invocations),
        new_issues=new,
        vanished_issues=vanished,
        outcome_changes=changes,
    )


# ---------------------------------------------------------------------------
# Report


@dataclass
class UseCaseComparison:
    name: str
    trace_count: int
    original: SampleStats
    rewritten: SampleStats
    welch: Optional[WelchResult]
    degenerate: bool
    significant: bool
    note: str = ""

    def to_obj(self) -> dict:
        if self.welch is not None:
            welch = {
                "t": self.welch.t,
                "df": self.welch.df,
                "p_value": self.welch.p_value,
                "mean_delta": self.welch.mean_delta,
                "relative_delta": self.welch.relative_delta,
                "degenerate": False,
            }
        elif self.degenerate:
            mean_delta = self.rewritten.mean - self.original.mean
            welch = {
                "t": None,
                "df": None,
                "p_value": 1.0 if not self.significant else 0.0,
                "mean_delta": mean_delta,
                "relative_delta": mean_delta / self.original.mean if self.original.mean else 0.0,
                "degenerate": True,
            }
        else:
            welch = None
        return {
            "name": self.name,
            "trace_count": self.trace_count,
            "original": {"n": self.original.n, "mean": self.original.mean, "variance": self.original.variance},
            "rewritten": {"n": self.rewritten.n, "mean": self.rewritten.mean, "variance": self.rewritten.variance},
            "welch": welch,
            "significant": self.significant,
            "note": self.note,
        }


@dataclass
class ComparisonReport:
    alpha: float
    use_cases: list[UseCaseComparison]
    traces: list[TracePairDiff]
    microservice_groups: list[tuple[tuple[str, ...], bool]]

    @property
    def significant_use_cases(self) -> list[str]:
        return [uc.name for uc in self.use_cases if uc.significant]

    def to_obj(self) -> dict:
        new_issues = sum(len(t.new_issues) for t in self.traces)
        vanished = sum(len(t.vanished_issues) for t in self.traces)
        outcome_changes = sum(len(t.outcome_changes) for t in self.traces)
        return {
            "schema_version": 1,
            "alpha": self.alpha,
            "use_cases": [uc.to_obj() for uc in self.use_cases],
            "traces": [t.to_obj() for t in self.traces],
            "summary": {
                "traces": len(self.traces),
                "use_cases": len(self.use_cases),
                "significant_use_cases": len(self.significant_use_cases),
                "new_issues": new_issues,
                "vanished_issues": vanished,
                "outcome_changes": outcome_changes,
            },
            "microservice_groups": [
                {"components": list(components), "potential_microservice": flag}
                for components, flag in self.microservice_groups
            ],
        }


def aggregate(
    diffs: Sequence[TracePairDiff],
    alpha: float,
    scenario_model: Optional[DeploymentModel] = None,
) -> ComparisonReport:
    """Build the comparison report from per-trace diffs (input order kept)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    by_uc: dict[str, list[TracePairDiff]] = {}
    for diff in diffs:
        by_uc.setdefault(diff.use_case, []).append(diff)

    use_cases: list[UseCaseComparison] = []
    for name in sorted(by_uc):
        group = by_uc[name]
        orig = [float(d.original_duration) for d in group]
        rew = [float(d.rewritten_duration) for d in group]
        so = SampleStats.of(orig)
        sr = SampleStats.of(rew)
        if len(group) < 2:
            use_cases.append(
                UseCaseComparison(name, len(group), so, sr, None, False, False, note="fewer than two traces")
            )
            continue
        try:
            welch = welch_test(orig, rew)
            use_cases.append(
                UseCaseComparison(
                    name, len(group), so, sr, welch, False, significant=welch.p_value < alpha
                )
            )
        except DegenerateSample as deg:
            use_cases.append(
                UseCaseComparison(
                    name, len(group), so, sr, None, True,
                    significant=not deg.no_change,
                    note="no change" if deg.no_change else "zero variance, nonzero shift",
                )
            )

    groups = microservice_groups(scenario_model) if scenario_model is not None else []
    return ComparisonReport(
        alpha=alpha,
        use_cases=use_cases,
        traces=list(diffs),
        microservice_groups=[(tuple(sorted(members)), flag) for members, flag in groups],
    )


def compare(
    original_analyses: Sequence[TraceAnalysis],
    rewritten_analyses: Sequence[TraceAnalysis],
    mappings: Sequence[EventMapping],
    alpha: float = 0.05,
    scenario_model: Optional[DeploymentModel] = None,
) -> ComparisonReport:
    """Compare aligned original/rewritten analyses (one mapping per pair)."""
    if not (len(original_analyses) == len(rewritten_analyses) == len(mappings)):
        raise MismatchedCorpora("input lists have different lengths")
    diffs = [
        diff_pair(o, r, m)
        for o, r, m in zip(original_analyses, rewritten_analyses, mappings)
    ]
    return aggregate(diffs, alpha, scenario_model)
