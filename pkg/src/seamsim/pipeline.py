"""Corpus pipeline: per-trace rewrite + analysis fanned out over workers.

Each trace is processed independently (simulate under both models, rewrite,
analyze both sides, diff); results aggregate in input order, so reports are
byte-identical regardless of worker count.  Parallelism uses forked worker
processes that inherit the in-memory corpus (or parse their own slice of raw
NDJSON lines), keeping inter-process traffic to the compact per-trace diffs.
"""

from __future__ import annotations

import itertools
import multiprocessing
import os
from typing import Iterable, Iterator, Sequence, Union

from .analyze import ComparisonReport, TracePairDiff, aggregate, analyze_trace, diff_pair
from .model import DeploymentModel
from .rewrite import rewrite, _run_sim
from .traces import Trace, read_traces
from .txsim import KernelModel, TxAnnotatedTrace, simulate

_CHUNK_LINES = 2000


def _resolve_models(
    base_model: Union[DeploymentModel, KernelModel],
    scenario_model: Union[DeploymentModel, KernelModel, None],
) -> tuple[KernelModel, KernelModel]:
    base = base_model if isinstance(base_model, KernelModel) else KernelModel(base_model)
    if scenario_model is None or scenario_model is base_model or (
        not isinstance(scenario_model, KernelModel) and scenario_model == base.model
    ):
        return base, base
    scn = scenario_model if isinstance(scenario_model, KernelModel) else KernelModel(scenario_model)
    return base, scn


def analyze_pair(trace: Trace, base_km: KernelModel, scn_km: KernelModel) -> TracePairDiff:
    """Process one trace end to end, returning its original-vs-scenario diff."""
    sim_b = _run_sim(trace, base_km)
    sim_s = sim_b if scn_km is base_km else _run_sim(trace, scn_km)
    result = rewrite(trace, base_km, scn_km, _sims=(sim_b, sim_s))
    orig_ann = TxAnnotatedTrace(trace, base_km.model, sim_b)
    if result.mapping.is_identity and len(result.rewritten) == len(trace):
        # Same event sequence: the scenario simulation already fits.
        scn_ann = TxAnnotatedTrace(result.rewritten, scn_km.model, sim_s)
    else:
        scn_ann = simulate(result.rewritten, scn_km)
    return diff_pair(analyze_trace(orig_ann), analyze_trace(scn_ann), result.mapping)


# -- forked-worker plumbing ---------------------------------------------------

_SHARED: dict = {}


def _init_from_globals(base_km: KernelModel, scn_km_or_none) -> None:
    _SHARED["base"] = base_km
    _SHARED["scn"] = scn_km_or_none if scn_km_or_none is not None else base_km


def _chunk_indices(span: tuple[int, int]) -> list[TracePairDiff]:
    corpus = _SHARED["corpus"]
    base, scn = _SHARED["base"], _SHARED["scn"]
    lo, hi = span
    return [analyze_pair(corpus[i], base, scn) for i in range(lo, hi)]


def _chunk_lines(lines: list[bytes]) -> list[TracePairDiff]:
    base, scn = _SHARED["base"], _SHARED["scn"]
    return [analyze_pair(trace, base, scn) for trace in read_traces(lines)]


def _normalize_workers(workers: int) -> int:
    if workers == 0:
        workers = os.cpu_count() or 1
    if workers > 1 and "fork" not in multiprocessing.get_all_start_methods():
        return 1  # corpus handoff relies on fork; degrade gracefully elsewhere
    return max(1, workers)


def corpus_diffs(
    traces: Sequence[Trace],
    base_model: Union[DeploymentModel, KernelModel],
    scenario_model: Union[DeploymentModel, KernelModel, None] = None,
    workers: int = 1,
) -> list[TracePairDiff]:
    """Per-trace diffs for an in-memory corpus, in input order."""
    base, scn = _resolve_models(base_model, scenario_model)
    workers = _normalize_workers(workers)
    if workers <= 1 or len(traces) < 2:
        return [analyze_pair(t, base, scn) for t in traces]

    n = len(traces)
    step = max(64, (n + workers * 8 - 1) // (workers * 8))
    spans = [(lo, min(lo + step, n)) for lo in range(0, n, step)]
    _SHARED["corpus"] = traces
    _init_from_globals(base, scn if scn is not base else None)
    try:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            chunks = pool.map(_chunk_indices, spans)
    finally:
        _SHARED.pop("corpus", None)
    return list(itertools.chain.from_iterable(chunks))


def stream_diffs(
    lines: Iterable[bytes],
    base_model: Union[DeploymentModel, KernelModel],
    scenario_model: Union[DeploymentModel, KernelModel, None] = None,
    workers: int = 1,
) -> list[TracePairDiff]:
    """Per-trace diffs for an NDJSON line stream; workers parse their slices."""
    base, scn = _resolve_models(base_model, scenario_model)
    workers = _normalize_workers(workers)
    if workers <= 1:
        return [analyze_pair(t, base, scn) for t in read_traces(lines)]

    def chunks() -> Iterator[list[bytes]]:
        it = iter(lines)
        while True:
            chunk = list(itertools.islice(it, _CHUNK_LINES))
            if not chunk:
                return
            yield chunk

    _init_from_globals(base, scn if scn is not base else None)
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(workers) as pool:
        out: list[TracePairDiff] = []
        for part in pool.imap(_chunk_lines, chunks()):
            out.extend(part)
    return out


def analyze_corpus(
    traces: Sequence[Trace],
    base_model: Union[DeploymentModel, KernelModel],
    scenario_model: Union[DeploymentModel, KernelModel, None] = None,
    alpha: float = 0.05,
    workers: int = 1,
) -> ComparisonReport:
    base, scn = _resolve_models(base_model, scenario_model)
    diffs = corpus_diffs(traces, base, scn, workers=workers)
    return aggregate(diffs, alpha, scn.model)


def analyze_stream(
    lines: Iterable[bytes],
    base_model: Union[DeploymentModel, KernelModel],
    scenario_model: Union[DeploymentModel, KernelModel, None] = None,
    alpha: float = 0.05,
    workers: int = 1,
) -> ComparisonReport:
    base, scn = _resolve_models(base_model, scenario_model)
    diffs = stream_diffs(lines, base, scn, workers=workers)
    return aggregate(diffs, alpha, scn.model)
