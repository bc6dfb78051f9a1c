"""Trace rewriting: overhead adjustment and transaction-boundary regeneration.

Overhead rewriting follows each invocation/return hop through both deployment
models; where the effective connection differs in any attribute, the observed
gap is replaced by the scenario connection's overhead (zero for local) and
all later timestamps shift accordingly.  Unchanged hops keep their observed
gaps; everything else stays as observed (ceteris paribus).

Transaction-boundary rewriting simulates the event sequence under both the
base and the scenario model and rewrites only where the two disagree:

* entry tx-started flags are set to the scenario value where the simulations
  differ (and keep the recorded value where they agree),
* recorded implicit (container) transaction events are dropped where the
  scenario no longer produces them, and fresh ones are inserted where it
  newly does: a start right after the entry, a commit right before the exit
  (subordinates commit right after their top level's commit), and abort
  markers at the positions of the original abort events,
* explicit transaction events and all non-transaction events are preserved
  with their ids.

Because rewriting is a diff against the base simulation, an empty scenario
delta reproduces the input byte for byte, whatever the input looks like.
The event mapping records dropped and inserted event ids; preserved events
keep their ids, so the bijection is the identity on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np

from . import kernels, simtypes
from .model import DeploymentModel
from .simtypes import SLOT_SUB, SLOT_TOP, SimResult
from .traces import TX_ABORT, TX_COMMIT, TX_START, Trace
from .txsim import KernelModel, TxAnnotatedTrace, simulate


@dataclass(frozen=True)
class EventMapping:
    """Correspondence between original and rewritten events.

    Preserved events keep their event ids on both sides; only implicit
    transaction events are ever dropped or inserted.
    """

    dropped_original: frozenset[int]
    inserted_rewritten: frozenset[int]

    @property
    def is_identity(self) -> bool:
        return not self.dropped_original and not self.inserted_rewritten

    def to_rewritten(self, event_id: int) -> Optional[int]:
        return None if event_id in self.dropped_original else event_id

    def to_original(self, event_id: int) -> Optional[int]:
        return None if event_id in self.inserted_rewritten else event_id


IDENTITY_MAPPING = EventMapping(frozenset(), frozenset())


class RewriteResult:
    """Rewritten trace, its event mapping, and scenario-side annotations."""

    def __init__(self, original: Trace, rewritten: Trace, mapping: EventMapping, scenario_model: DeploymentModel):
        self.original = original
        self.rewritten = rewritten
        self.mapping = mapping
        self.scenario_model = scenario_model

    @cached_property
    def scenario_annotations(self) -> TxAnnotatedTrace:
        return simulate(self.rewritten, self.scenario_model)


def _as_kernel(model: Union[DeploymentModel, KernelModel]) -> KernelModel:
    return model if isinstance(model, KernelModel) else KernelModel(model)


# ---------------------------------------------------------------------------
# Overhead rewriting


def rewrite_overhead(
    trace: Trace,
    base_model: Union[DeploymentModel, KernelModel],
    scenario_model: Union[DeploymentModel, KernelModel],
) -> tuple[Trace, EventMapping]:
    """Adjust timestamps for connections the scenario modified or created.

    The mapping is always the identity: overhead rewriting never adds or
    removes events.  Returns the input trace object unchanged when no hop
    was affected.
    """
    base = _as_kernel(base_model)
    scn = _as_kernel(scenario_model)
    new_ts, hops = kernels.overhead_walk(
        trace.kind, trace.ts, trace.a, base.overhead_tables(trace), scn.overhead_tables(trace)
    )
    if not hops:
        return trace, IDENTITY_MAPPING
    rewritten = Trace(trace.trace_id, trace.use_case, trace.kind, new_ts, trace.eid, trace.a, trace.b, trace.pool)
    rewritten._pool_index = trace._pool_index
    return rewritten, IDENTITY_MAPPING


# ---------------------------------------------------------------------------
# Transaction-boundary rewriting


class _Intents:
    """Per-entry implicit-transaction intents of one simulation."""

    def __init__(self, sim: SimResult):
        self.sim = sim
        # The kernels deliver the per-frame columns precomputed; the anchor
        # of a subordinate's commit event is its root's terminator (the
        # root's frame for implicit roots, the terminator event position for
        # explicit ones).
        self.top_started = sim.frame_top >= 0
        self.top_committed = sim.frame_top_committed
        self.sub_started = sim.frame_sub >= 0
        self.sub_committed = sim.frame_sub_committed
        self.sub_anchor_kind = sim.frame_sub_anchor_kind
        self.sub_anchor = sim.frame_sub_anchor

        # Rollback markers grouped by (entry index, slot).
        self.markers: dict[tuple[int, int], tuple[int, ...]] = {}
        for tx, positions in sim.markers.items():
            slot = int(sim.tx_slot[tx])
            if slot < 0:
                continue  # explicit context: its abort event is preserved anyway
            frame = int(sim.tx_frame[tx])
            if frame >= 0:
                self.markers[(frame, slot)] = tuple(sorted(positions))

    def changed_against(self, other: "_Intents") -> tuple[np.ndarray, np.ndarray]:
        """Boolean per-entry masks (top changed, sub changed)."""
        top = (
            (self.top_started != other.top_started)
            | (self.top_committed != other.top_committed)
        )
        sub = (
            (self.sub_started != other.sub_started)
            | (self.sub_committed != other.sub_committed)
            | (self.sub_anchor_kind != other.sub_anchor_kind)
            | (self.sub_anchor != other.sub_anchor)
        )
        for key in set(self.markers) | set(other.markers):
            if self.markers.get(key) != other.markers.get(key):
                frame, slot = key
                if slot == SLOT_TOP:
                    top[frame] = True
                else:
                    sub[frame] = True
        return top, sub


def _rewrite_tx_events(trace: Trace, sim_b: SimResult, sim_s: SimResult,
                       new_ts: np.ndarray) -> tuple[Trace, EventMapping]:
    """Diff the two simulations and rebuild the event columns."""
    ib = _Intents(sim_b)
    is_ = _Intents(sim_s)
    changed_top, changed_sub = ib.changed_against(is_)
    flag_diff = sim_b.entry_flag != sim_s.entry_flag

    if not (changed_top.any() or changed_sub.any() or flag_diff.any()):
        if new_ts is trace.ts:
            return trace, IDENTITY_MAPPING
        rewritten = Trace(trace.trace_id, trace.use_case, trace.kind, new_ts,
                          trace.eid, trace.a, trace.b, trace.pool)
        rewritten._pool_index = trace._pool_index
        return rewritten, IDENTITY_MAPPING

    entry_pos = sim_s.entry_pos
    exit_pos = sim_s.frame_exit_pos
    eid = trace.eid

    # New recorded flags: scenario value where the simulations differ.
    b_col = trace.b
    if flag_diff.any():
        b_col = b_col.copy()
        pos = entry_pos[flag_diff]
        b_col[pos] = sim_s.entry_flag[flag_diff]

    # Events to drop: recorded implicit events governed by a changed slot
    # (per the base simulation's adoption).
    rec_frame = sim_b.rec_frame
    rec_slot = sim_b.rec_slot
    governed = rec_frame >= 0
    safe_frame = np.where(governed, rec_frame, 0)
    drop_mask = governed & (
        ((rec_slot == SLOT_TOP) & changed_top[safe_frame])
        | ((rec_slot == SLOT_SUB) & changed_sub[safe_frame])
    )
    drop_positions = set(sim_b.rec_pos[drop_mask].tolist())

    # Events to insert, grouped by anchor position.
    pool = list(trace.pool)
    pool_index = dict(trace.pool_index())

    def intern(s: str) -> int:
        idx = pool_index.get(s)
        if idx is None:
            idx = len(pool)
            pool_index[s] = idx
            pool.append(s)
        return idx

    def fresh_tx_id(prefix: str, e: int) -> int:
        name = f"{prefix}{int(eid[entry_pos[e]])}"
        while name in pool_index:
            name += "'"
        return intern(name)

    before: dict[int, list[tuple[int, int, int, int]]] = {}
    after: dict[int, list[tuple[int, int, int, int]]] = {}

    def insert(table, pos, kind, ts, a, b):
        table.setdefault(pos, []).append((kind, ts, a, b))

    # Map from a root frame's commit to where subordinate commits belong.
    # Recorded commit positions per (frame, slot) of the scenario-kept slots:
    kept_commit_pos: dict[tuple[int, int], int] = {}
    rec_pos_b = sim_b.rec_pos
    kind_col = trace.kind
    for ri in range(len(rec_pos_b)):
        p = int(rec_pos_b[ri])
        if kind_col[p] == TX_COMMIT and rec_frame[ri] >= 0 and not drop_mask[ri]:
            kept_commit_pos.setdefault((int(rec_frame[ri]), int(rec_slot[ri])), p)

    sub_txid: dict[int, int] = {}
    top_txid: dict[int, int] = {}

    changed_top_list = np.flatnonzero(changed_top)
    changed_sub_list = np.flatnonzero(changed_sub)

    for e in changed_top_list.tolist():
        if not is_.top_started[e]:
            continue
        txid = fresh_tx_id("~t", e)
        top_txid[e] = txid
        ep = int(entry_pos[e])
        insert(after, ep, TX_START, int(new_ts[ep]), txid, simtypes.D_IMPLICIT)
        for p in is_.markers.get((e, SLOT_TOP), ()):
            cause = int(trace.b[p]) if kind_col[p] == TX_ABORT else intern("aborted")
            insert(before, int(p), TX_ABORT, int(new_ts[p]), txid, cause)
        if is_.top_committed[e] == 1:
            xp = int(exit_pos[e])
            insert(before, xp, TX_COMMIT, int(new_ts[xp]), txid, -1)

    for e in changed_sub_list.tolist():
        if not is_.sub_started[e]:
            continue
        txid = fresh_tx_id("~s", e)
        sub_txid[e] = txid
        ep = int(entry_pos[e])
        insert(after, ep, TX_START, int(new_ts[ep]), txid, simtypes.D_IMPLICIT)
        for p in is_.markers.get((e, SLOT_SUB), ()):
            cause = int(trace.b[p]) if kind_col[p] == TX_ABORT else intern("aborted")
            insert(before, int(p), TX_ABORT, int(new_ts[p]), txid, cause)
        if is_.sub_committed[e] == 1:
            if is_.sub_anchor_kind[e] == 1:
                # Explicit root: right after its (preserved) terminator event.
                p = int(is_.sub_anchor[e])
                insert(after, p, TX_COMMIT, int(new_ts[p]), txid, -1)
            else:
                root_frame = int(is_.sub_anchor[e])
                kept = kept_commit_pos.get((root_frame, SLOT_TOP))
                if kept is not None:
                    insert(after, kept, TX_COMMIT, int(new_ts[kept]), txid, -1)
                else:
                    # Lands right after the root's own inserted commit because
                    # top-slot inserts were queued first.
                    xp = int(exit_pos[root_frame])
                    insert(before, xp, TX_COMMIT, int(new_ts[xp]), txid, -1)

    if not (drop_positions or before or after):
        rewritten = Trace(trace.trace_id, trace.use_case, trace.kind, new_ts, eid, trace.a, b_col, trace.pool)
        rewritten._pool_index = trace._pool_index
        return rewritten, IDENTITY_MAPPING

    # Rebuild the columns: merge kept originals with inserted events by a
    # stable sort key (position * 4 + phase: 0 before, 1 original, 2 after).
    n = len(trace)
    if drop_positions:
        keep = np.ones(n, dtype=bool)
        keep[list(drop_positions)] = False
        kept_pos = np.flatnonzero(keep)
    else:
        kept_pos = np.arange(n, dtype=np.int64)

    ins_key: list[int] = []
    ins_kind: list[int] = []
    ins_ts: list[int] = []
    ins_a: list[int] = []
    ins_b: list[int] = []
    for table, phase in ((before, 0), (after, 2)):
        for pos in table:
            for k, t, av, bv in table[pos]:
                ins_key.append(int(pos) * 4 + phase)
                ins_kind.append(k)
                ins_ts.append(t)
                ins_a.append(av)
                ins_b.append(bv)

    keys = np.concatenate([kept_pos * 4 + 1, np.asarray(ins_key, dtype=np.int64)])
    order = np.argsort(keys, kind="stable")
    out_kind = np.concatenate([trace.kind[kept_pos], np.asarray(ins_kind, dtype=np.uint8)])[order]
    out_ts = np.concatenate([new_ts[kept_pos], np.asarray(ins_ts, dtype=np.int64)])[order]
    out_a = np.concatenate([trace.a[kept_pos], np.asarray(ins_a, dtype=np.int32)])[order]
    out_b = np.concatenate([b_col[kept_pos], np.asarray(ins_b, dtype=np.int32)])[order]

    # Event ids: preserved events keep theirs; inserted ones get fresh ids in
    # output order, starting past the original maximum.
    n_ins = len(ins_key)
    next_id = int(eid.max()) + 1
    out_eid = np.concatenate([eid[kept_pos], np.zeros(n_ins, dtype=np.int64)])[order]
    inserted_mask = np.concatenate([np.zeros(len(kept_pos), dtype=bool), np.ones(n_ins, dtype=bool)])[order]
    inserted_ids = np.arange(next_id, next_id + n_ins, dtype=np.int64)
    out_eid[inserted_mask] = inserted_ids

    rewritten = Trace(
        trace.trace_id,
        trace.use_case,
        out_kind,
        out_ts,
        out_eid,
        out_a,
        out_b,
        pool,
    )
    rewritten._pool_index = pool_index
    mapping = EventMapping(
        dropped_original=frozenset(eid[list(drop_positions)].tolist()) if drop_positions else frozenset(),
        inserted_rewritten=frozenset(inserted_ids.tolist()),
    )
    return rewritten, mapping


def rewrite_transactions(
    trace: Trace,
    base_model: Union[DeploymentModel, KernelModel],
    scenario_model: Union[DeploymentModel, KernelModel],
) -> tuple[Trace, EventMapping]:
    """Rewrite transaction boundaries only (timestamps untouched)."""
    base = _as_kernel(base_model)
    scn = _as_kernel(scenario_model)
    sim_b = _run_sim(trace, base)
    sim_s = sim_b if scn is base else _run_sim(trace, scn)
    return _rewrite_tx_events(trace, sim_b, sim_s, trace.ts)


def _run_sim(trace: Trace, km: KernelModel) -> SimResult:
    km.check_entities(trace)
    cand_comp, cand_behavior, root = km.trace_tables(trace)
    return kernels.sim_walk(
        trace.kind, trace.ts, trace.a, trace.b,
        cand_comp, cand_behavior, km.ncomp, km.conn_kind, km.conn_prop, root,
    )


def rewrite(
    trace: Trace,
    base_model: Union[DeploymentModel, KernelModel],
    scenario_model: Union[DeploymentModel, KernelModel],
    _sims: Optional[tuple[SimResult, SimResult]] = None,
) -> RewriteResult:
    """Full rewrite: overhead first, then transaction boundaries.

    Transaction rewriting reads only event order, never timestamps, so the
    composition order cannot change any flag; fixing it makes output
    deterministic.  ``_sims`` lets the corpus pipeline pass simulations it
    already ran for the same event sequence.
    """
    base = _as_kernel(base_model)
    scn = _as_kernel(scenario_model)
    shifted, _ = rewrite_overhead(trace, base, scn)
    if _sims is not None:
        sim_b, sim_s = _sims
    else:
        sim_b = _run_sim(trace, base)
        sim_s = sim_b if scn is base else _run_sim(trace, scn)
    rewritten, mapping = _rewrite_tx_events(trace, sim_b, sim_s, shifted.ts)
    return RewriteResult(trace, rewritten, mapping, scn.model)
