"""Acceptance suite: one test per release criterion, printed pass/fail.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS lines and
the measured timings.  The performance criteria time the analysis phase only
(corpus generation and file I/O excluded), mirroring how the reference
timings were taken; the multi-worker speedup criterion presupposes at least
four cores and is skipped (with the measured value) on smaller machines.
"""

import json
import os
import time

import numpy as np
import pytest

from seamsim import apply_delta, parse_delta, parse_model, simulate
from seamsim.analyze import STALE_READ, analyze_trace
from seamsim.gen import GenConfig, generate, generate_chain_trace
from seamsim.model import (
    Connection,
    ConnectionKind,
    ScenarioDelta,
    TransactionBehavior,
    TransactionPropagation,
    microservice_groups,
)
from seamsim.pipeline import analyze_corpus, corpus_diffs
from seamsim.rewrite import rewrite
from seamsim.stats import welch_test
from tests.conftest import CAR_INSURANCE_MODEL, SPLIT_CONTRACTS_SCENARIO

CORPUS_SIZE = 100_000
CHAIN_INVOCATIONS = 2_500_000
SINGLE_WORKER_BUDGET_S = 60.0
CHAIN_BUDGET_S = 30.0
SPEEDUP_WORKERS = 4
SPEEDUP_FACTOR = 2.0
SCALING_R2 = 0.98
ALPHA = 0.05


def ok(criterion: int, message: str) -> None:
    print(f"\nACCEPTANCE CRITERION {criterion}: PASS - {message}")


@pytest.fixture(scope="module")
def base_model():
    return parse_model(CAR_INSURANCE_MODEL).value


@pytest.fixture(scope="module")
def scenario_model(base_model):
    return apply_delta(base_model, parse_delta(SPLIT_CONTRACTS_SCENARIO).value)


@pytest.fixture(scope="module")
def big_corpus(base_model):
    return generate(
        GenConfig(trace_count=CORPUS_SIZE, max_remote_invocations=50, seed=42), base_model
    )


def test_criterion_1_listings_round_trip():
    start = time.perf_counter()
    base = parse_model(CAR_INSURANCE_MODEL)
    assert base.ok, [str(d) for d in base.diagnostics]
    delta = parse_delta(SPLIT_CONTRACTS_SCENARIO)
    assert delta.ok, [str(d) for d in delta.diagnostics]
    merged = apply_delta(base.value, delta.value)
    elapsed = time.perf_counter() - start

    from seamsim import connection_for

    view = connection_for(merged, "Car Insurance", "Contracts")
    assert view.kind is ConnectionKind.REMOTE
    assert view.overhead == 10
    assert view.propagation is TransactionPropagation.NONE
    assert merged.candidates["createContract"].transaction_behavior is TransactionBehavior.REQUIRED
    assert elapsed < 1.0
    ok(1, f"listings parse+merge exact (remote, overhead 10, none, REQUIRED) in {elapsed*1000:.0f} ms")


def test_criterion_2_identity_rewrite(base_model):
    corpus = generate(GenConfig(trace_count=10_000, max_remote_invocations=50, seed=7), base_model)
    empty = apply_delta(base_model, ScenarioDelta())
    identical = 0
    for trace in corpus[:200]:
        result = rewrite(trace, base_model, empty)
        assert result.mapping.is_identity
        assert result.rewritten.to_json() == trace.to_json()
        identical += 1
    # Spot byte-check done; the full corpus goes through the pipeline, which
    # flags any difference as an issue/outcome/significance change.
    report = analyze_corpus(corpus, base_model, empty, alpha=ALPHA).to_obj()
    s = report["summary"]
    assert (s["new_issues"], s["vanished_issues"], s["outcome_changes"]) == (0, 0, 0)
    assert s["significant_use_cases"] == 0
    for diff in report["traces"]:
        assert diff["duration_delta"] == 0
    ok(2, f"empty delta is byte-identity ({identical} traces byte-checked, 10k through the pipeline, all-zero report)")


def test_criterion_3_transaction_oracle_equivalence():
    from tests.test_tx_oracle import run_equivalence

    n = run_equivalence(1000)
    assert n == 1000
    ok(3, "engine matches the independent interpreter on 1000 random cases (flags, outcomes, pending intervals)")


def test_criterion_4_welch_correctness():
    from seamsim.stats import student_t_two_sided_p
    from tests.oracle_stats import two_sided_p

    worst = 0.0
    for df in (1.0, 2.0, 10.0, 100.0):
        for t in (0.0, 1.0, -1.0, 2.0, -2.0):
            got = student_t_two_sided_p(t, df)
            want = two_sided_p(t, df)
            worst = max(worst, abs(got - want))
            assert abs(got - want) <= 1e-6, (t, df, got, want)

    r = welch_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
    assert r.t == pytest.approx(-1.0, abs=1e-12)
    assert r.df == pytest.approx(8.0, abs=1e-12)
    oracle_p = two_sided_p(-1.0, 8.0)
    assert abs(r.p_value - oracle_p) <= 1e-4
    assert oracle_p == pytest.approx(0.3466, abs=5e-5)
    ok(4, f"p-values within {worst:.1e} of the integration oracle; worked example t=-1, df=8, p={r.p_value:.4f}")


def test_criterion_5_saga_indicator(base_model):
    from tests.test_analyze import FIG_MODEL_STALE, SAGA_MODEL, SAGA_SPLIT, fig_trace, saga_trace

    base = parse_model(SAGA_MODEL).value
    scenario = apply_delta(base, parse_delta(SAGA_SPLIT).value)
    report = analyze_corpus([saga_trace("s0"), saga_trace("s1")], base, scenario)
    for diff in report.traces:
        changes = [(c.event_id, c.entity_type, c.original, c.rewritten) for c in diff.outcome_changes]
        assert changes == [(7, "Invoice", "REVERTED", "COMMITTED")]

    fig_model = parse_model(FIG_MODEL_STALE).value
    analysis = analyze_trace(simulate(fig_trace(), fig_model))
    assert [i.kind for i in analysis.issues] == [STALE_READ]
    ok(5, "split scenario reports exactly the pre-split writes REVERTED->COMMITTED; fixture yields exactly one STALE_READ")


@pytest.fixture(scope="module")
def perf_runs(base_model, scenario_model, big_corpus):
    """Timed pipeline runs shared by the criterion-6 tests."""
    from seamsim.analyze import aggregate

    start = time.perf_counter()
    diffs_seq = corpus_diffs(big_corpus, base_model, scenario_model, workers=1)
    seq_elapsed = time.perf_counter() - start
    report_seq = json.dumps(aggregate(diffs_seq, ALPHA, scenario_model).to_obj())

    start = time.perf_counter()
    diffs_par = corpus_diffs(big_corpus, base_model, scenario_model, workers=SPEEDUP_WORKERS)
    par_elapsed = time.perf_counter() - start
    report_par = json.dumps(aggregate(diffs_par, ALPHA, scenario_model).to_obj())

    return {
        "seq_elapsed": seq_elapsed,
        "par_elapsed": par_elapsed,
        "report_seq": report_seq,
        "report_par": report_par,
    }


def test_criterion_6_performance(base_model, scenario_model, big_corpus, perf_runs):
    # Single worker over the full corpus (analysis only; generation excluded).
    seq_elapsed = perf_runs["seq_elapsed"]
    assert seq_elapsed < SINGLE_WORKER_BUDGET_S, f"single worker took {seq_elapsed:.1f}s"

    # Linear scaling over 10k / 50k / 100k (R^2 of time vs. count).
    times = []
    for count in (10_000, 50_000):
        sub = big_corpus[:count]
        t0 = time.perf_counter()
        corpus_diffs(sub, base_model, scenario_model, workers=1)
        times.append((count, time.perf_counter() - t0))
    times.append((CORPUS_SIZE, seq_elapsed))
    xs = np.array([c for c, _ in times], dtype=float)
    ys = np.array([t for _, t in times], dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    predicted = slope * xs + intercept
    ss_res = float(((ys - predicted) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot
    assert r2 >= SCALING_R2, f"R^2 {r2:.4f} over {times}"

    # Reports must agree byte for byte regardless of the worker count.
    assert perf_runs["report_par"] == perf_runs["report_seq"], "reports differ across worker counts"

    # Large single trace: 2.5M remote invocations under a retuned scenario.
    chain = generate_chain_trace(scenario_model, CHAIN_INVOCATIONS, seed=7)
    retuned = apply_delta(
        scenario_model, parse_delta('remote "Car Insurance" -> "Contracts" [ overhead = 25 ]').value
    )
    start = time.perf_counter()
    chain_report = analyze_corpus([chain], scenario_model, retuned, workers=1)
    chain_elapsed = time.perf_counter() - start
    assert chain_elapsed < CHAIN_BUDGET_S, f"2.5M-invocation trace took {chain_elapsed:.1f}s"
    assert chain_report.to_obj()["traces"][0]["duration_delta"] > 0

    ok(6, f"100k traces in {seq_elapsed:.1f}s single worker; R^2={r2:.4f}; "
          f"2.5M-invocation trace in {chain_elapsed:.1f}s; reports byte-identical across workers")


def test_criterion_6_multi_worker_speedup(perf_runs):
    speedup = perf_runs["seq_elapsed"] / perf_runs["par_elapsed"]
    if (os.cpu_count() or 1) < SPEEDUP_WORKERS:
        pytest.skip(
            f"speedup >= {SPEEDUP_FACTOR}x with {SPEEDUP_WORKERS} workers presupposes "
            f">= {SPEEDUP_WORKERS} cores; this machine has {os.cpu_count()} "
            f"(measured x{speedup:.2f}; byte-identity and time budgets asserted separately)"
        )
    assert speedup >= SPEEDUP_FACTOR, f"speedup only x{speedup:.2f} with {SPEEDUP_WORKERS} workers"
    ok(6, f"speedup x{speedup:.2f} with {SPEEDUP_WORKERS} workers")


def test_criterion_7_microservice_classification(base_model, scenario_model):
    groups = microservice_groups(scenario_model)
    assert groups == [
        (frozenset(["Car Insurance"]), True),
        (frozenset(["Contracts"]), True),
    ]

    subordinate = apply_delta(
        base_model,
        parse_delta(
            'remote "Car Insurance" -> "Contracts" [ overhead = 10, transactionPropagation = subordinate ]'
        ).value,
    )
    flipped = microservice_groups(subordinate)
    assert flipped == [
        (frozenset(["Car Insurance"]), False),
        (frozenset(["Contracts"]), False),
    ]
    ok(7, "merged model: both groups potential microservices; subordinate propagation flips both to false")
