"""Compiled-vs-pure kernel equivalence.

The two backends must be drop-in replacements: identical SimResults and
identical rewritten traces over the random case pool and generated corpora.
Skipped when the extension is not built.
"""

import random

import numpy as np
import pytest

from seamsim import kernels
from seamsim.txsim import KernelModel

pytestmark = pytest.mark.skipif(
    kernels.BACKEND != "c", reason="compiled kernel extension not available"
)


def _sim_with(impl_module, trace, km, want_timeline=False):
    cand_comp, cand_behavior, root = km.trace_tables(trace)
    if getattr(impl_module, "BACKEND", "?") == "python":
        res = impl_module.sim_walk(
            trace.kind.tolist(), trace.ts.tolist(), trace.a.tolist(), trace.b.tolist(),
            cand_comp.tolist(), cand_behavior.tolist(), km.ncomp,
            km.conn_kind.tolist(), km.conn_prop.tolist(), root, want_timeline,
        )
    else:
        res = impl_module.sim_walk(
            trace.kind, trace.ts, trace.a, trace.b,
            cand_comp, cand_behavior, km.ncomp, km.conn_kind, km.conn_prop, root, want_timeline,
        )
    return kernels._normalize(res)


def assert_sim_equal(left, right, context):
    for col in (
        "tx_kind", "tx_demarc", "tx_parent", "tx_root", "tx_start_pos", "tx_start_ts",
        "tx_frame", "tx_slot", "tx_resolve_pos", "tx_resolve_ts", "tx_committed", "tx_adopted",
        "entry_pos", "entry_flag", "frame_exit_pos", "frame_top", "frame_sub",
        "frame_top_committed", "frame_sub_committed", "frame_sub_anchor_kind", "frame_sub_anchor",
        "write_pos", "write_tx", "write_committed", "rec_pos", "rec_frame", "rec_slot",
    ):
        a = np.asarray(getattr(left, col))
        b = np.asarray(getattr(right, col))
        assert np.array_equal(a, b), f"{context}: column {col} differs\n{a}\n{b}"
    assert [tuple(c) for c in left.conflicts] == [tuple(c) for c in right.conflicts], context
    assert list(left.violations) == list(right.violations), context
    assert {k: list(v) for k, v in left.markers.items()} == {
        k: list(v) for k, v in right.markers.items()
    }, context
    assert left.remote_invocations == right.remote_invocations, context
    if left.timeline is not None or right.timeline is not None:
        assert [tuple(s) for s in left.timeline] == [tuple(s) for s in right.timeline], context


def test_sim_walk_equivalence_random_cases():
    from seamsim import _kernels, _kernels_py
    from tests.randcases import random_model, random_trace

    rng = random.Random(424242)
    for case in range(250):
        model = random_model(rng)
        trace = random_trace(rng, model)
        km = KernelModel(model)
        c = _sim_with(_kernels, trace, km, want_timeline=case % 3 == 0)
        py = _sim_with(_kernels_py, trace, km, want_timeline=case % 3 == 0)
        assert_sim_equal(c, py, f"case {case}")


def test_overhead_walk_equivalence():
    from seamsim import _kernels, _kernels_py
    from tests.randcases import random_model, random_trace
    from dataclasses import replace

    from seamsim.model import ConnectionKind

    rng = random.Random(11)
    checked = 0
    for case in range(150):
        model = random_model(rng)
        trace = random_trace(rng, model)
        scenario = replace(
            model,
            connections=tuple(
                replace(c, overhead=c.overhead + 5) if c.kind is ConnectionKind.REMOTE else c
                for c in model.connections
            ),
        )
        b_km, s_km = KernelModel(model), KernelModel(scenario)
        bt, st = b_km.overhead_tables(trace), s_km.overhead_tables(trace)

        c_ts, c_hops = _kernels.overhead_walk(
            trace.kind, trace.ts, trace.a, bt[0], bt[1], bt[2], bt[3], bt[4], bt[5],
            st[0], st[1], st[2], st[3], st[4], st[5],
        )
        p_ts, p_hops = _kernels_py.overhead_walk(
            trace.kind.tolist(), trace.ts.tolist(), trace.a.tolist(),
            bt[0].tolist(), bt[1], bt[2].tolist(), bt[3].tolist(), bt[4].tolist(), bt[5],
            st[0].tolist(), st[1], st[2].tolist(), st[3].tolist(), st[4].tolist(), st[5],
        )
        assert np.array_equal(np.asarray(c_ts), np.asarray(p_ts)), f"case {case}"
        assert [tuple(h) for h in c_hops] == [tuple(h) for h in p_hops], f"case {case}"
        checked += len(c_hops)
    assert checked > 0


def test_full_pipeline_equivalence_on_generated_corpus(car_model, merged_model, monkeypatch):
    import json
    import subprocess
    import sys

    # Run the same analysis in a pure-backend subprocess and compare reports.
    from seamsim.gen import GenConfig, generate
    from seamsim.pipeline import analyze_corpus
    from seamsim.traces import write_trace_file

    traces = generate(GenConfig(trace_count=40, seed=21, abort_probability=0.2), car_model)
    report_c = json.dumps(analyze_corpus(traces, car_model, merged_model).to_obj())

    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        tracefile = Path(tmp) / "t.ndjson"
        write_trace_file(traces, tracefile)
        from tests.conftest import CAR_INSURANCE_MODEL, SPLIT_CONTRACTS_SCENARIO

        (Path(tmp) / "m.dm").write_text(CAR_INSURANCE_MODEL)
        (Path(tmp) / "d.dms").write_text(SPLIT_CONTRACTS_SCENARIO)
        out = subprocess.run(
            [sys.executable, "-m", "seamsim.cli", "analyze",
             "--model", str(Path(tmp) / "m.dm"), "--delta", str(Path(tmp) / "d.dms"),
             "--traces", str(tracefile)],
            capture_output=True, env={"SEAMSIM_PURE": "1", "PATH": "/usr/bin:/bin"},
        )
        assert out.returncode == 0, out.stderr.decode()
        report_py = out.stdout.decode().strip()
    assert json.loads(report_c) == json.loads(report_py)
