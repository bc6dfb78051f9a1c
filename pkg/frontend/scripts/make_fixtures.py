"""Regenerate the committed UI test fixtures from the backend.

Run from the frontend directory:  python3 scripts/make_fixtures.py
"""

import json
from pathlib import Path

from seamsim import apply_delta, parse_delta, parse_model, simulate
from seamsim.dsl import serialize_model
from seamsim.gen import GenConfig, generate
from seamsim.pipeline import analyze_corpus
from seamsim.server import trace_detail_side
from seamsim.traces import (
    Trace,
    entity_read,
    entity_write,
    entry,
    exit_,
    invocation,
    return_,
    tx_commit,
    tx_start,
    use_case_end,
    use_case_start,
    validate_trace,
    write_trace_file,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# The worked-example deployment, plus a history check that suspends the
# caller's transaction, and a subordinate remote hop to the contracts
# component: together they produce every overlay kind the timeline shows.
FIG_MODEL = """\
component "Car Insurance" {
  useCase "Create Car Contract"
  serviceCandidate createCarContract
  serviceCandidate checkHistory [ transactionBehavior = REQUIRES_NEW ]
  entityType CarContract
}
component "Contracts" {
  serviceCandidate createContract
}
remote "Car Insurance" -> "Contracts" [ overhead = 10, transactionPropagation = subordinate ]
dataStore "Shared Database" {
  entityType CarContract
}
"""

CAR_MODEL = """\
component "Car Insurance" {
  useCase "Create Car Contract"
  serviceCandidate createCarContract [
    transactionBehavior = REQUIRED
  ]
  entityType CarContract
}
component "Contracts" {
  serviceCandidate createContract
}
local "Car Insurance" -> "Contracts"
dataStore "Shared Database" {
  entityType CarContract
}
"""

SPLIT_DELTA = """\
component "Contracts" {
  serviceCandidate createContract [
    transactionBehavior = REQUIRED
  ]
}
remote "Car Insurance" -> "Contracts" [
  overhead = 10
]
"""


def fig_trace() -> Trace:
    uc = "Create Car Contract"
    events = [
        use_case_start(0, 0, uc),
        invocation(2, 1, "createCarContract"),
        entry(4, 2, "createCarContract", tx_started=True),
        tx_start(4, 3, "t1"),
        entity_write(6, 4, "CarContract", "c-1"),
        # Remote subordinate hop: the contracts component works inside a
        # subordinate transaction that resolves with t1.
        invocation(8, 5, "createContract"),
        entry(18, 6, "createContract", tx_started=True),
        tx_start(18, 7, "s1"),
        entity_write(20, 8, "CarContract", "c-1"),
        exit_(22, 9, "createContract"),
        return_(32, 10, "createContract"),
        # Local history check with REQUIRES_NEW: suspends t1, reads the
        # entity t1 still has pending -> stale read.
        invocation(34, 11, "checkHistory"),
        entry(35, 12, "checkHistory", tx_started=True),
        tx_start(35, 13, "t2"),
        entity_read(37, 14, "CarContract", "c-1"),
        tx_commit(39, 15, "t2"),
        exit_(39, 16, "checkHistory"),
        return_(40, 17, "checkHistory"),
        tx_commit(44, 18, "t1"),
        tx_commit(44, 19, "s1"),
        exit_(44, 20, "createCarContract"),
        return_(46, 21, "createCarContract"),
        use_case_end(48, 22, uc),
    ]
    trace = Trace.from_events("fig-2", uc, events)
    validate_trace(trace)
    return trace


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)

    fig_model = parse_model(FIG_MODEL).value
    trace = fig_trace()
    # Sanity: the fixture exercises every overlay the timeline must show.
    ann = simulate(trace, fig_model)
    kinds = {t.kind for t in ann.transactions}
    assert "subordinate" in kinds
    detail = {
        "trace_id": trace.trace_id,
        "use_case": trace.use_case,
        "original": trace_detail_side(trace, fig_model),
        "rewritten": None,
        "mapping": None,
    }
    (FIXTURES / "fig2_detail.json").write_text(json.dumps(detail, indent=1, sort_keys=True) + "\n")

    (FIXTURES / "car.dm").write_text(CAR_MODEL)
    (FIXTURES / "split.dms").write_text(SPLIT_DELTA)

    base = parse_model(CAR_MODEL).value
    scenario = apply_delta(base, parse_delta(SPLIT_DELTA).value)
    corpus = generate(GenConfig(trace_count=12, max_remote_invocations=8, seed=2026), base)
    write_trace_file(corpus, FIXTURES / "small.traces.ndjson")
    report = analyze_corpus(corpus, base, scenario).to_obj()
    (FIXTURES / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")

    print("fixtures written to", FIXTURES)


if __name__ == "__main__":
    main()
