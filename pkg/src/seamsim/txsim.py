"""Container-managed transaction emulation along a trace.

The engine walks a trace's events against a deployment model, deciding at
every candidate entry whether a transaction is joined, started, or suspended
(per the candidate's transaction behavior and the traversed connection),
propagating contexts over remote connections that support it as subordinate
transactions, and resolving those atomically with their top level (two-phase
commit emulation).  The result annotates the trace with computed tx-started
flags, per-write outcomes, pending-write intervals, consistency-conflict
records, and the transaction timeline used for span overlays.

Recorded implicit (container-induced) transaction events in the input are
treated as observations, not instructions: the emulation recomputes them from
the model.  Recorded aborts of implicit transactions act as positional
rollback-only markers on whatever context is in effect at that point; the
doomed transaction rolls back at its commit point.  Explicit
(application-demarcated) transaction events are replayed as-is.

Writes outside any transaction commit immediately.  A decision-table
violation (MANDATORY without a transaction, NEVER with one) is recorded as an
issue and execution continues as if the candidate were REQUIRED, so analyses
still cover the rest of the trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np

from . import kernels, simtypes, traces
from .model import (
    ConnectionKind,
    DeploymentModel,
    TransactionBehavior,
    TransactionPropagation,
)
from .simtypes import SimResult, SimulationError
from .traces import ENTITY_READ, ENTITY_WRITE, INVOCATION, Trace

BEHAVIOR_CODE = {
    TransactionBehavior.REQUIRED: simtypes.B_REQUIRED,
    TransactionBehavior.REQUIRES_NEW: simtypes.B_REQUIRES_NEW,
    TransactionBehavior.SUPPORTS: simtypes.B_SUPPORTS,
    TransactionBehavior.NOT_SUPPORTED: simtypes.B_NOT_SUPPORTED,
    TransactionBehavior.MANDATORY: simtypes.B_MANDATORY,
    TransactionBehavior.NEVER: simtypes.B_NEVER,
}

VIOLATION_CODES = {
    simtypes.A_VIOLATION_MANDATORY: "MANDATORY_WITHOUT_TX",
    simtypes.A_VIOLATION_NEVER: "NEVER_WITH_TX",
}


# ---------------------------------------------------------------------------
# Entry decision table (the spec-facing face of simtypes.DECISION)


@dataclass(frozen=True)
class EntryAction:
    """Outcome of the entry decision; VIOLATION carries its code."""

    kind: str
    violation_code: Optional[str] = None

    @classmethod
    def violation(cls, code: str) -> "EntryAction":
        return cls("VIOLATION", code)


EntryAction.JOIN = EntryAction("JOIN")  # type: ignore[attr-defined]
EntryAction.START_NEW = EntryAction("START_NEW")  # type: ignore[attr-defined]
EntryAction.SUSPEND_AND_START_NEW = EntryAction("SUSPEND_AND_START_NEW")  # type: ignore[attr-defined]
EntryAction.SUSPEND_ONLY = EntryAction("SUSPEND_ONLY")  # type: ignore[attr-defined]
EntryAction.RUN_WITHOUT_TX = EntryAction("RUN_WITHOUT_TX")  # type: ignore[attr-defined]

_ACTION_BY_CODE = {
    simtypes.A_JOIN: EntryAction.JOIN,
    simtypes.A_START_NEW: EntryAction.START_NEW,
    simtypes.A_SUSPEND_AND_START_NEW: EntryAction.SUSPEND_AND_START_NEW,
    simtypes.A_SUSPEND_ONLY: EntryAction.SUSPEND_ONLY,
    simtypes.A_RUN_WITHOUT_TX: EntryAction.RUN_WITHOUT_TX,
    simtypes.A_VIOLATION_MANDATORY: EntryAction.violation("MANDATORY_WITHOUT_TX"),
    simtypes.A_VIOLATION_NEVER: EntryAction.violation("NEVER_WITH_TX"),
}


def decide_entry(behavior: TransactionBehavior, inherited: object = None) -> EntryAction:
    """Entry decision for a candidate's behavior given an inherited context.

    `inherited` may be anything truthy (a context) or None/False.
    """
    code = simtypes.DECISION[BEHAVIOR_CODE[behavior]][1 if inherited else 0]
    return _ACTION_BY_CODE[code]


# ---------------------------------------------------------------------------
# Model tables for the kernels


class KernelModel:
    """Model compiled into flat lookup tables keyed by component index."""

    def __init__(self, model: DeploymentModel):
        self.model = model
        names = [c.name for c in model.components]
        self.component_names = names
        self.component_index = {name: i for i, name in enumerate(names)}
        nc = len(names)
        self.ncomp = nc
        self.conn_kind = np.zeros(nc * nc, dtype=np.int64)
        self.conn_prop = np.zeros(nc * nc, dtype=np.int64)
        self.conn_over = np.zeros(nc * nc, dtype=np.int64)
        for i in range(nc):
            self.conn_kind[i * nc + i] = simtypes.C_LOCAL
        for conn in model.connections:
            i = self.component_index[conn.source]
            j = self.component_index[conn.target]
            kind = simtypes.C_LOCAL if conn.kind is ConnectionKind.LOCAL else simtypes.C_REMOTE
            prop = (
                simtypes.P_SUBORDINATE
                if conn.propagation is TransactionPropagation.SUBORDINATE
                else simtypes.P_NONE
            )
            for x, y in ((i, j), (j, i)):
                self.conn_kind[x * nc + y] = kind
                self.conn_prop[x * nc + y] = prop
                self.conn_over[x * nc + y] = conn.overhead
        self.cand_map: dict[str, tuple[int, int]] = {}
        for ci, comp in enumerate(model.components):
            for cand in comp.service_candidates:
                self.cand_map.setdefault(cand.name, (ci, BEHAVIOR_CODE[cand.transaction_behavior]))
        self.uc_map = {uc: self.component_index[owner] for uc, owner in model.use_case_owner.items()}
        self.known_entity_types = frozenset(model.entity_type_owner)

    def trace_tables(self, trace: Trace) -> tuple[np.ndarray, np.ndarray, int]:
        """Per-trace candidate tables: (cand_comp, cand_behavior, root_comp).

        Cached on the trace per model (traces and models are immutable).
        """
        cache = trace._model_cache
        if cache is None:
            cache = trace._model_cache = {}
        cached = cache.get(self)
        if cached is not None:
            return cached
        tables = self._build_trace_tables(trace)
        cache[self] = tables
        return tables

    def _build_trace_tables(self, trace: Trace) -> tuple[np.ndarray, np.ndarray, int]:
        pool = trace.pool
        cand_comp = np.full(len(pool), -1, dtype=np.int64)
        cand_behavior = np.full(len(pool), -1, dtype=np.int64)
        get = self.cand_map.get
        for i, s in enumerate(pool):
            m = get(s)
            if m is not None:
                cand_comp[i] = m[0]
                cand_behavior[i] = m[1]
        root = self.uc_map.get(trace.use_case, -1)
        if root < 0:
            # Fall back to the first invoked candidate's component; a use case
            # unknown to the model then incurs no hop for the top-level call.
            inv = np.flatnonzero(trace.kind == INVOCATION)
            if len(inv):
                first = int(inv[0])
                root = int(cand_comp[trace.a[first]])
                if root < 0:
                    raise SimulationError(SimulationError.UNKNOWN_CANDIDATE, first, trace.pool[trace.a[first]])
            else:
                root = 0
        return cand_comp, cand_behavior, root

    def overhead_tables(self, trace: Trace):
        cand_comp, _, root = self.trace_tables(trace)
        return (cand_comp, self.ncomp, self.conn_kind, self.conn_prop, self.conn_over, root)

    def check_entities(self, trace: Trace) -> None:
        cache = trace._model_cache
        if cache is None:
            cache = trace._model_cache = {}
        key = (self, "entities")
        if key in cache:
            return
        mask = (trace.kind == ENTITY_READ) | (trace.kind == ENTITY_WRITE)
        if mask.any():
            for pi in np.unique(trace.a[mask]):
                if trace.pool[pi] not in self.known_entity_types:
                    pos = int(np.flatnonzero(mask & (trace.a == pi))[0])
                    raise SimulationError(SimulationError.UNKNOWN_ENTITY_TYPE, pos, trace.pool[pi])
        cache[key] = True


# ---------------------------------------------------------------------------
# Annotated traces


@dataclass(frozen=True)
class TransactionInfo:
    tx_id: str
    index: int
    kind: str  # "top_level" | "subordinate"
    demarcation: str  # "implicit" | "explicit"
    parent: Optional[int]
    status: str  # "committed" | "aborted"
    started_event_id: int
    started_ts: int
    resolved_event_id: int
    resolved_ts: int


@dataclass(frozen=True)
class ConflictRecord:
    """An entity access that hit a pending write of an unrelated transaction."""

    event_id: int
    is_write: bool
    entity_type: str
    entity_id: str
    actor_tx: int  # -1 when the access runs outside any transaction
    holder_tx: int
    holder_unreachable: bool  # suspended, or across a non-propagating remote hop


class TxAnnotatedTrace:
    """A trace plus everything the transaction emulation derived from it."""

    def __init__(self, trace: Trace, model: DeploymentModel, sim: SimResult):
        self.trace = trace
        self.model = model
        self.sim = sim

    # -- tx-started flags

    @cached_property
    def entry_event_ids(self) -> np.ndarray:
        return self.trace.eid[self.sim.entry_pos]

    @property
    def entry_flags(self) -> np.ndarray:
        return self.sim.entry_flag

    def tx_started(self) -> dict[int, bool]:
        return {int(e): bool(f) for e, f in zip(self.entry_event_ids, self.sim.entry_flag)}

    # -- writes

    @cached_property
    def write_event_ids(self) -> np.ndarray:
        return self.trace.eid[self.sim.write_pos]

    @property
    def write_committed(self) -> np.ndarray:
        return self.sim.write_committed

    def write_outcomes(self) -> dict[int, str]:
        return {
            int(e): ("COMMITTED" if c else "REVERTED")
            for e, c in zip(self.write_event_ids, self.sim.write_committed)
        }

    # -- transactions

    def tx_id_of(self, t: int) -> str:
        adopted = int(self.sim.tx_adopted[t])
        if adopted >= 0:
            return self.trace.pool[adopted]
        prefix = "~s" if int(self.sim.tx_kind[t]) == simtypes.T_SUB else "~t"
        start_pos = int(self.sim.tx_start_pos[t])
        name = f"{prefix}{int(self.trace.eid[start_pos])}"
        taken = self.trace.pool_index()
        while name in taken:
            name += "'"
        return name

    @cached_property
    def transactions(self) -> list[TransactionInfo]:
        sim = self.sim
        eid = self.trace.eid
        out = []
        for t in range(sim.n_txs):
            out.append(
                TransactionInfo(
                    tx_id=self.tx_id_of(t),
                    index=t,
                    kind="subordinate" if int(sim.tx_kind[t]) == simtypes.T_SUB else "top_level",
                    demarcation="explicit" if int(sim.tx_demarc[t]) == simtypes.D_EXPLICIT else "implicit",
                    parent=int(sim.tx_parent[t]) if sim.tx_parent[t] >= 0 else None,
                    status="committed" if sim.tx_committed[t] == 1 else "aborted",
                    started_event_id=int(eid[sim.tx_start_pos[t]]),
                    started_ts=int(sim.tx_start_ts[t]),
                    resolved_event_id=int(eid[sim.tx_resolve_pos[t]]) if sim.tx_resolve_pos[t] >= 0 else -1,
                    resolved_ts=int(sim.tx_resolve_ts[t]),
                )
            )
        return out

    # -- pending intervals

    def pending_intervals(self) -> dict[tuple[str, str], list[tuple[int, int, int]]]:
        """Per entity instance: (tx index, write event id, resolving event id).

        A write is pending from its own event (inclusive) to the resolving
        event of its transaction (exclusive); for a subordinate that is the
        top level's resolution point.  Writes outside any transaction are
        never pending.
        """
        sim = self.sim
        eid = self.trace.eid
        a = self.trace.a
        b = self.trace.b
        pool = self.trace.pool
        out: dict[tuple[str, str], list[tuple[int, int, int]]] = {}
        for wi in range(len(sim.write_pos)):
            t = int(sim.write_tx[wi])
            if t < 0:
                continue
            pos = int(sim.write_pos[wi])
            key = (pool[a[pos]], pool[b[pos]])
            out.setdefault(key, []).append((t, int(eid[pos]), int(eid[sim.tx_resolve_pos[t]])))
        return out

    # -- issues raw material

    @cached_property
    def conflicts(self) -> list[ConflictRecord]:
        pool = self.trace.pool
        eid = self.trace.eid
        return [
            ConflictRecord(
                event_id=int(eid[pos]),
                is_write=bool(w),
                entity_type=pool[et],
                entity_id=pool[ei],
                actor_tx=actor,
                holder_tx=holder,
                holder_unreachable=bool(unreachable),
            )
            for (pos, w, et, ei, actor, holder, unreachable) in self.sim.conflicts
        ]

    @cached_property
    def violations(self) -> list[tuple[int, str]]:
        """(entry event id, violation code) per decision-table violation."""
        eid = self.trace.eid
        return [(int(eid[pos]), VIOLATION_CODES[code]) for pos, code in self.sim.violations]

    # -- timeline (only when simulated with want_timeline)

    def timeline(self) -> list[dict]:
        """Transaction state segments for overlays, in emission order."""
        if self.sim.timeline is None:
            return []
        state_names = {simtypes.S_CLEAN: "clean", simtypes.S_DIRTY: "dirty", simtypes.S_SUSPENDED: "suspended"}
        out = []
        for t, state, from_ts, to_ts in self.sim.timeline:
            out.append(
                {
                    "tx": int(t),
                    "tx_id": self.tx_id_of(int(t)),
                    "state": state_names[int(state)],
                    "from_ts": int(from_ts),
                    "to_ts": int(to_ts) if to_ts >= 0 else int(self.trace.ts[-1]),
                }
            )
        return out

    @property
    def remote_invocations(self) -> int:
        return int(self.sim.remote_invocations)


def simulate(
    trace: Trace,
    model: Union[DeploymentModel, KernelModel],
    want_timeline: bool = False,
) -> TxAnnotatedTrace:
    """Run the transaction emulation of one trace against a model.

    Precondition: the trace is valid and every candidate and entity type it
    references exists in the model (SimulationError otherwise).
    """
    km = model if isinstance(model, KernelModel) else KernelModel(model)
    km.check_entities(trace)
    cand_comp, cand_behavior, root = km.trace_tables(trace)
    sim = kernels.sim_walk(
        trace.kind, trace.ts, trace.a, trace.b,
        cand_comp, cand_behavior, km.ncomp, km.conn_kind, km.conn_prop, root,
        want_timeline=want_timeline,
    )
    return TxAnnotatedTrace(trace, km.model, sim)
