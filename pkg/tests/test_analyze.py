import json

import pytest

from seamsim import Trace, apply_delta, parse_model, simulate
from seamsim.analyze import (
    POTENTIAL_DEADLOCK,
    STALE_READ,
    TX_CONFIG_VIOLATION,
    WRITE_CONFLICT,
    MismatchedCorpora,
    analyze_trace,
    compare,
)
from seamsim.gen import GenConfig, generate
from seamsim.pipeline import analyze_corpus
from seamsim.rewrite import IDENTITY_MAPPING, rewrite
from seamsim.traces import (
    entity_read,
    entity_write,
    entry,
    exit_,
    invocation,
    return_,
    tx_abort,
    tx_commit,
    tx_start,
    use_case_end,
    use_case_start,
)

FIG_MODEL_STALE = """\
component "App" {
  useCase "Create Contract"
  serviceCandidate createContract
  serviceCandidate validateContract [ transactionBehavior = REQUIRES_NEW ]
  entityType Contract
}
dataStore "DB" {
  entityType Contract
}
"""

FIG_MODEL_BLOCK = FIG_MODEL_STALE.replace("}\n", "} [ readWriteConflictBehavior = block ]\n", 1) \
    if False else FIG_MODEL_STALE[:-1] + " [ readWriteConflictBehavior = block ]\n"


def fig_trace():
    """A transaction suspended with a pending write while a second one reads."""
    events = [
        use_case_start(0, 0, "Create Contract"),
        invocation(1, 1, "createContract"),
        entry(1, 2, "createContract", tx_started=True),
        tx_start(1, 3, "t1"),
        entity_write(2, 4, "Contract", "c-1"),
        invocation(3, 5, "validateContract"),
        entry(3, 6, "validateContract", tx_started=True),
        tx_start(3, 7, "t2"),
        entity_read(4, 8, "Contract", "c-1"),
        tx_commit(5, 9, "t2"),
        exit_(5, 10, "validateContract"),
        return_(5, 11, "validateContract"),
        tx_commit(6, 12, "t1"),
        exit_(6, 13, "createContract"),
        return_(7, 14, "createContract"),
        use_case_end(8, 15, "Create Contract"),
    ]
    return Trace.from_events("fig", "Create Contract", events)


def parse_ok(text):
    result = parse_model(text)
    assert result.ok, [str(d) for d in result.diagnostics]
    return result.value


class TestIssueDetection:
    def test_stale_read_shape(self):
        model = parse_ok(FIG_MODEL_STALE)
        ann = simulate(fig_trace(), model)
        analysis = analyze_trace(ann)
        assert [i.kind for i in analysis.issues] == [STALE_READ]
        issue = analysis.issues[0]
        assert issue.event_id == 8
        assert issue.entity_type == "Contract"
        assert issue.entity_id == "c-1"
        assert issue.conflicting_tx_ids == ("t1",)

    def test_block_store_flags_deadlock(self):
        model = parse_ok(FIG_MODEL_BLOCK)
        analysis = analyze_trace(simulate(fig_trace(), model))
        assert [i.kind for i in analysis.issues] == [POTENTIAL_DEADLOCK]
        assert analysis.issues[0].event_id == 8

    def test_no_entity_accesses_no_issues(self, car_model):
        events = [
            use_case_start(0, 0, "Create Car Contract"),
            invocation(1, 1, "createCarContract"),
            entry(1, 2, "createCarContract", tx_started=True),
            exit_(2, 3, "createCarContract"),
            return_(3, 4, "createCarContract"),
            use_case_end(4, 5, "Create Car Contract"),
        ]
        analysis = analyze_trace(simulate(Trace.from_events("t", "Create Car Contract", events), car_model))
        assert analysis.issues == []
        assert analysis.duration == 4

    def test_write_conflict_regardless_of_store(self):
        model = parse_ok(FIG_MODEL_STALE)
        events = [
            use_case_start(0, 0, "Create Contract"),
            invocation(1, 1, "createContract"),
            entry(1, 2, "createContract", tx_started=True),
            entity_write(2, 3, "Contract", "c-1"),
            invocation(3, 4, "validateContract"),
            entry(3, 5, "validateContract", tx_started=True),
            entity_write(4, 6, "Contract", "c-1"),
            exit_(5, 7, "validateContract"),
            return_(5, 8, "validateContract"),
            exit_(6, 9, "createContract"),
            return_(7, 10, "createContract"),
            use_case_end(8, 11, "Create Contract"),
        ]
        analysis = analyze_trace(simulate(Trace.from_events("t", "Create Contract", events), model))
        assert WRITE_CONFLICT in [i.kind for i in analysis.issues]

    def test_violation_issue(self):
        model = parse_ok(
            'component "A" { useCase "UC" serviceCandidate m [ transactionBehavior = MANDATORY ] }'
        )
        events = [
            use_case_start(0, 0, "UC"),
            invocation(1, 1, "m"),
            entry(1, 2, "m"),
            exit_(2, 3, "m"),
            return_(2, 4, "m"),
            use_case_end(3, 5, "UC"),
        ]
        analysis = analyze_trace(simulate(Trace.from_events("t", "UC", events), model))
        assert [i.kind for i in analysis.issues] == [TX_CONFIG_VIOLATION]
        assert analysis.issues[0].entity_type is None

    def test_own_writes_not_conflicts(self):
        model = parse_ok(FIG_MODEL_STALE)
        events = [
            use_case_start(0, 0, "Create Contract"),
            invocation(1, 1, "createContract"),
            entry(1, 2, "createContract", tx_started=True),
            entity_write(2, 3, "Contract", "c-1"),
            entity_read(3, 4, "Contract", "c-1"),
            exit_(4, 5, "createContract"),
            return_(4, 6, "createContract"),
            use_case_end(5, 7, "Create Contract"),
        ]
        analysis = analyze_trace(simulate(Trace.from_events("t", "Create Contract", events), model))
        assert analysis.issues == []


SAGA_MODEL = """\
component "Orders" {
  useCase "Place Order"
  serviceCandidate placeOrder
  entityType Order
}
component "Billing" {
  serviceCandidate charge
  entityType Invoice
}
local "Orders" -> "Billing"
dataStore "DB" {
  entityType Order
  entityType Invoice
}
"""

SAGA_SPLIT = """\
remote "Orders" -> "Billing" [ overhead = 10 ]
"""


def saga_trace(tid="s0"):
    """One shared transaction that aborts at the very end."""
    events = [
        use_case_start(0, 0, "Place Order"),
        invocation(1, 1, "placeOrder"),
        entry(1, 2, "placeOrder", tx_started=True),
        tx_start(1, 3, "t1"),
        entity_write(2, 4, "Order", "o-1"),
        invocation(3, 5, "charge"),
        entry(3, 6, "charge", tx_started=False),
        entity_write(4, 7, "Invoice", "i-1"),
        exit_(5, 8, "charge"),
        return_(5, 9, "charge"),
        entity_write(6, 10, "Order", "o-1"),
        tx_abort(8, 11, "t1", cause="payment declined"),
        exit_(8, 12, "placeOrder"),
        return_(9, 13, "placeOrder"),
        use_case_end(10, 14, "Place Order"),
    ]
    return Trace.from_events(tid, "Place Order", events)


class TestSagaComparison:
    def test_split_reports_reverted_to_committed(self):
        from seamsim import parse_delta

        base = parse_ok(SAGA_MODEL)
        delta = parse_delta(SAGA_SPLIT).value
        scenario = apply_delta(base, delta)

        report = analyze_corpus([saga_trace("s0"), saga_trace("s1")], base, scenario)
        [d0, d1] = report.traces
        for d in (d0, d1):
            # Exactly the split-off callee's write flips to committed.
            assert [(c.event_id, c.original, c.rewritten) for c in d.outcome_changes] == [
                (7, "REVERTED", "COMMITTED")
            ]
            assert d.outcome_changes[0].entity_type == "Invoice"
        obj = report.to_obj()
        assert obj["summary"]["outcome_changes"] == 2

    def test_original_all_reverted(self):
        base = parse_ok(SAGA_MODEL)
        ann = simulate(saga_trace(), base)
        assert set(ann.write_outcomes().values()) == {"REVERTED"}


class TestCompare:
    def test_identity_compare_is_clean(self, car_model):
        traces = generate(GenConfig(trace_count=30, seed=3), car_model)
        report = analyze_corpus(traces, car_model)
        obj = report.to_obj()
        assert obj["summary"]["new_issues"] == 0
        assert obj["summary"]["vanished_issues"] == 0
        assert obj["summary"]["outcome_changes"] == 0
        assert obj["summary"]["significant_use_cases"] == 0

    def test_hot_hop_is_significant(self, car_model, merged_model):
        traces = generate(GenConfig(trace_count=60, seed=8, max_remote_invocations=20), car_model)
        report = analyze_corpus(traces, car_model, merged_model, alpha=0.05)
        obj = report.to_obj()
        assert obj["summary"]["significant_use_cases"] == 1
        [uc] = obj["use_cases"]
        assert uc["significant"] is True
        assert uc["welch"]["mean_delta"] > 0
        assert uc["welch"]["p_value"] < 0.05

    def test_issue_diff_empty_on_identity(self):
        model = parse_ok(FIG_MODEL_STALE)
        trace = fig_trace()
        analysis = analyze_trace(simulate(trace, model))
        report = compare([analysis], [analysis], [IDENTITY_MAPPING], alpha=0.05, scenario_model=model)
        [diff] = report.traces
        assert diff.new_issues == [] and diff.vanished_issues == []

    def test_mismatched_corpora(self):
        model = parse_ok(FIG_MODEL_STALE)
        a = analyze_trace(simulate(fig_trace(), model))
        with pytest.raises(MismatchedCorpora):
            compare([a], [], [], alpha=0.05)

    def test_new_issue_reported(self, car_model, merged_model):
        # Read-your-writes breakage: the caller writes, the callee reads the
        # same entity.  Locally they share a transaction (no issue); split
        # over a non-propagating remote connection the callee's read hits the
        # caller's still-pending write.
        events = [
            use_case_start(0, 0, "Create Car Contract"),
            invocation(1, 1, "createCarContract"),
            entry(1, 2, "createCarContract", tx_started=True),
            tx_start(1, 3, "t1"),
            entity_write(2, 4, "CarContract", "c-1"),
            invocation(3, 5, "createContract"),
            entry(3, 6, "createContract", tx_started=False),
            entity_read(4, 7, "CarContract", "c-1"),
            exit_(5, 8, "createContract"),
            return_(5, 9, "createContract"),
            tx_commit(6, 10, "t1"),
            exit_(6, 11, "createCarContract"),
            return_(7, 12, "createCarContract"),
            use_case_end(8, 13, "Create Car Contract"),
        ]
        trace = Trace.from_events("t", "Create Car Contract", events)
        base_report = analyze_corpus([trace], car_model)
        assert base_report.traces[0].new_issues == []

        report = analyze_corpus([trace], car_model, merged_model)
        [diff] = report.traces
        assert [i.kind for i in diff.new_issues] == [STALE_READ]
        assert diff.new_issues[0].event_id == 7
        assert diff.vanished_issues == []

    def test_report_json_deterministic(self, car_model, merged_model):
        traces = generate(GenConfig(trace_count=25, seed=4), car_model)
        a = json.dumps(analyze_corpus(traces, car_model, merged_model).to_obj())
        b = json.dumps(analyze_corpus(traces, car_model, merged_model).to_obj())
        assert a == b

    def test_workers_do_not_change_report(self, car_model, merged_model):
        traces = generate(GenConfig(trace_count=40, seed=5), car_model)
        seq = json.dumps(analyze_corpus(traces, car_model, merged_model, workers=1).to_obj())
        par = json.dumps(analyze_corpus(traces, car_model, merged_model, workers=3).to_obj())
        all_cores = json.dumps(analyze_corpus(traces, car_model, merged_model, workers=0).to_obj())
        assert seq == par == all_cores

    def test_issue_events_exist_and_are_accesses_or_entries(self, car_model, merged_model):
        import random

        from seamsim.traces import ENTITY_READ, ENTITY_WRITE, ENTRY
        from tests.randcases import random_model, random_trace

        rng = random.Random(17)
        seen = 0
        for _ in range(80):
            model = random_model(rng)
            trace = random_trace(rng, model)
            analysis = analyze_trace(simulate(trace, model))
            kinds_by_eid = {e.event_id: e.kind for e in trace.events()}
            for issue in analysis.issues:
                assert issue.event_id in kinds_by_eid
                assert kinds_by_eid[issue.event_id] in (ENTITY_READ, ENTITY_WRITE, ENTRY)
                seen += 1
        assert seen > 0

    def test_microservice_groups_in_report(self, car_model, merged_model):
        traces = generate(GenConfig(trace_count=4, seed=6), car_model)
        obj = analyze_corpus(traces, car_model, merged_model).to_obj()
        assert obj["microservice_groups"] == [
            {"components": ["Car Insurance"], "potential_microservice": True},
            {"components": ["Contracts"], "potential_microservice": True},
        ]
