"""Synthetic trace generation for tests and benchmarks.

Corpora are reproducible bit-for-bit across platforms: all randomness comes
from SplitMix64, a counter-based 64-bit generator (state advances by the
golden-ratio increment; each output mixes the state with two xor-shift
multiplies).  The counter form makes the i-th draw a pure function of (seed,
i), which both the scalar generator and the vectorized numpy variant use.

Two shapes:

* ``random`` - call trees over the model's candidates: per trace a budget of
  1..max_remote_invocations invocations is drawn and fully consumed; entity
  accesses and aborted transactions appear with the configured
  probabilities.  Implicit transaction events are emitted exactly as the
  container emulation would decide them, so generated corpora are
  self-consistent.
* ``chain`` - one flat loop of identical remote invocations per trace,
  consuming the whole budget; this is the large-trace benchmark shape and is
  built column-wise so multi-million-invocation traces stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ConnectionKind, DeploymentModel, TransactionBehavior, connection_for
from .traces import (
    DEMARCATION_IMPLICIT,
    ENTRY,
    EXIT,
    INVOCATION,
    RETURN,
    TX_COMMIT,
    TX_START,
    USE_CASE_END,
    USE_CASE_START,
    Event,
    Trace,
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
from .txsim import EntryAction, decide_entry

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Scalar SplitMix64 stream."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return _mix(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, lo: int, hi: int) -> int:
        """Uniform-ish integer in [lo, hi] (modulo; fine for workloads)."""
        return lo + self.next_u64() % (hi - lo + 1)

    def choice(self, seq):
        return seq[self.next_u64() % len(seq)]


def splitmix64_array(seed: int, start: int, count: int) -> np.ndarray:
    """Outputs start..start+count-1 of the SplitMix64 stream, vectorized."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = (np.uint64(seed) + idx * np.uint64(_GOLDEN))
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class EmptyModelError(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    trace_count: int
    max_remote_invocations: int = 50
    max_depth: int = 4
    entity_access_probability: float = 0.3
    abort_probability: float = 0.05
    use_case_pool: tuple[str, ...] = ()
    seed: int = 42
    shape: str = "random"  # "random" | "chain"

    def __post_init__(self) -> None:
        if self.trace_count < 0 or self.max_remote_invocations < 0 or self.max_depth < 0:
            raise ValueError("counts must be non-negative")
        for p in (self.entity_access_probability, self.abort_probability):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        if self.shape not in ("random", "chain"):
            raise ValueError(f"unknown shape {self.shape!r}")

    @classmethod
    def from_obj(cls, obj: dict) -> "GenConfig":
        return cls(
            trace_count=int(obj["trace_count"]),
            max_remote_invocations=int(obj.get("max_remote_invocations", 50)),
            max_depth=int(obj.get("max_depth", 4)),
            entity_access_probability=float(obj.get("entity_access_probability", 0.3)),
            abort_probability=float(obj.get("abort_probability", 0.05)),
            use_case_pool=tuple(obj.get("use_case_pool", ())),
            seed=int(obj.get("seed", 42)),
            shape=str(obj.get("shape", "random")),
        )


# ---------------------------------------------------------------------------
# Random call-tree shape


class _Budget:
    def __init__(self, n: int):
        self.remaining = n

    def take(self) -> bool:
        if self.remaining > 0:
            self.remaining -= 1
            return True
        return False


class _TraceGen:
    def __init__(self, rng: SplitMix64, model: DeploymentModel, config: GenConfig):
        self.rng = rng
        self.model = model
        self.config = config
        self.events: list[Event] = []
        self.ts = 0
        self.next_id = 0
        self.next_tx = 0
        # Candidates callable from each component (same component or any
        # connected one), precomputed sorted for determinism.
        self.callable_from: dict[str, list[str]] = {}
        for comp in model.components:
            names: list[str] = []
            for other in model.components:
                if other.name == comp.name or connection_for(model, comp.name, other.name) is not None:
                    names.extend(c.name for c in other.service_candidates)
            self.callable_from[comp.name] = sorted(names)
        self.entities = [
            (et, f"{et}-{i}")
            for et in sorted(model.entity_type_owner)
            for i in range(4)
        ]
        self.by_component: dict[str, list[tuple[str, str]]] = {}
        for et, owner in model.entity_type_owner.items():
            self.by_component.setdefault(owner, []).extend((et, f"{et}-{i}") for i in range(4))
        for v in self.by_component.values():
            v.sort()
        # Pending subordinate commits per top-level tx id.
        self.sub_commits: dict[str, list[str]] = {}
        self.doomed: set[str] = set()

    def emit(self, ctor, *args, **kw) -> Event:
        ev = ctor(self.ts, self.next_id, *args, **kw)
        self.next_id += 1
        self.events.append(ev)
        return ev

    def advance(self, lo=1, hi=3) -> None:
        self.ts += self.rng.randint(lo, hi)

    def fresh_tx(self) -> str:
        self.next_tx += 1
        return f"g{self.next_tx}"

    def hop_gap(self, view) -> int:
        if view.kind is ConnectionKind.LOCAL:
            return 0
        jitter = max(1, view.overhead // 5)
        return max(0, view.overhead + self.rng.randint(-jitter, jitter))

    def access(self, comp: str) -> None:
        pool = self.by_component.get(comp) or self.entities
        if not pool:
            return
        et, eid = self.rng.choice(pool)
        self.advance()
        if self.rng.random() < 0.6:
            self.emit(entity_read, et, eid)
        else:
            self.emit(entity_write, et, eid)

    def frame_body(self, comp: str, depth: int, budget: _Budget, ctx: Optional[str], root_tx: Optional[str]) -> None:
        rng = self.rng
        slots = rng.randint(1, 4)
        while slots > 0:
            slots -= 1
            r = rng.random()
            if r < 0.55 and depth < self.config.max_depth and budget.remaining > 0:
                callees = self.callable_from.get(comp, [])
                if callees and budget.take():
                    self.call(rng.choice(callees), comp, depth, budget, ctx, root_tx)
                    continue
            if r < 0.55 + self.config.entity_access_probability:
                self.access(comp)
            else:
                self.advance()
            # At the root, keep going until the invocation budget is gone.
            if slots == 0 and depth == 0 and budget.remaining > 0:
                slots = 1

    def call(self, cand: str, caller_comp: str, depth: int, budget: _Budget,
             caller_ctx: Optional[str], caller_root: Optional[str]) -> None:
        model = self.model
        comp = model.candidate_owner[cand]
        behavior = model.candidates[cand].transaction_behavior
        view = connection_for(model, caller_comp, comp)

        self.advance()
        self.emit(invocation, cand)
        self.ts += self.hop_gap(view)

        inherited = None
        inherited_root = None
        created_sub = None
        if view.kind is ConnectionKind.LOCAL:
            inherited = caller_ctx
            inherited_root = caller_root
        elif view.propagation is not None and view.propagation.value == "subordinate" and caller_ctx is not None:
            created_sub = self.fresh_tx()
            inherited = created_sub
            inherited_root = caller_root
            self.sub_commits.setdefault(caller_root, []).append(created_sub)

        action = decide_entry(behavior, inherited)
        if action.kind == "VIOLATION":
            action = decide_entry(TransactionBehavior.REQUIRED, inherited)

        started = None
        ctx = None
        root_tx = None
        if action == EntryAction.JOIN:
            ctx, root_tx = inherited, inherited_root
        elif action in (EntryAction.START_NEW, EntryAction.SUSPEND_AND_START_NEW):
            started = self.fresh_tx()
            ctx, root_tx = started, started
        flag = started is not None or created_sub is not None
        self.emit(entry, cand, tx_started=flag)
        if created_sub is not None:
            self.emit(tx_start, created_sub)
        if started is not None:
            self.emit(tx_start, started)

        self.frame_body(comp, depth + 1, budget, ctx, root_tx)

        self.advance()
        own = started if started is not None else created_sub
        if own is not None and root_tx not in self.doomed and created_sub is None:
            if self.rng.random() < self.config.abort_probability:
                self.emit(tx_abort, own, cause="generated-fault")
                self.doomed.add(own)
        if created_sub is not None and (inherited_root not in self.doomed):
            if self.rng.random() < self.config.abort_probability:
                # Aborting inside the subordinate dooms the whole tree.
                self.emit(tx_abort, created_sub, cause="generated-fault")
                self.doomed.add(inherited_root)
        if started is not None and started not in self.doomed:
            self.emit(tx_commit, started)
            for sub in self.sub_commits.pop(started, ()):
                self.emit(tx_commit, sub)
        self.emit(exit_, cand)
        self.ts += self.hop_gap(view)
        self.emit(return_, cand)

    def build(self, trace_id: str, use_case: str) -> Trace:
        root_comp = self.model.use_case_owner.get(use_case)
        self.emit(use_case_start, use_case)
        max_remote = self.config.max_remote_invocations
        budget = _Budget(self.rng.randint(1, max_remote) if max_remote > 0 else 0)
        if root_comp is None:
            # Unrooted use case: start from a component that has candidates.
            comps = sorted(c.name for c in self.model.components if c.service_candidates)
            root_comp = self.rng.choice(comps)
            if budget.take():
                cands = sorted(c.name for c in self.model.component(root_comp).service_candidates)
                self.call(self.rng.choice(cands), root_comp, 0, budget, None, None)
        self.frame_body(root_comp, 0, budget, None, None)
        self.advance()
        self.emit(use_case_end, use_case)
        return Trace.from_events(trace_id, use_case, self.events)


# ---------------------------------------------------------------------------
# Chain (benchmark) shape


def generate_chain_trace(
    model: DeploymentModel,
    invocations: int,
    seed: int = 42,
    trace_id: str = "chain-0",
) -> Trace:
    """One flat loop of identical invocations, built column-wise.

    The callee is the lexicographically first candidate reachable over a
    remote connection from the use case's root component (falling back to
    any reachable candidate if no remote connection exists).  Each call
    starts and commits its own container transaction; hop gaps carry
    deterministic SplitMix64 jitter around the connection overhead.
    """
    use_cases = sorted(model.use_case_owner)
    if not use_cases:
        raise EmptyModelError("model has no use cases for the chain shape")
    use_case = use_cases[0]
    root = model.use_case_owner[use_case]

    target = None
    for comp in model.components:
        view = connection_for(model, root, comp.name)
        if view is None or not comp.service_candidates:
            continue
        is_remote = view.kind is ConnectionKind.REMOTE
        cand = comp.service_candidates[0].name
        if target is None or (is_remote and not target[2]):
            target = (cand, view, is_remote)
    if target is None:
        raise EmptyModelError("model has no reachable candidates")
    cand, view, _ = target

    k = invocations
    per = 6  # invocation, entry, tx_start, tx_commit, exit, return
    n = 2 + per * k
    kind = np.empty(n, dtype=np.uint8)
    ts = np.empty(n, dtype=np.int64)
    a = np.full(n, -1, dtype=np.int32)
    b = np.full(n, -1, dtype=np.int32)

    pool = [use_case, cand] + [f"g{i}" for i in range(k)]
    pool_base = 2

    overhead = view.overhead
    jitter_span = max(1, overhead // 5) if view.kind is ConnectionKind.REMOTE else 0
    if jitter_span and k:
        draws = splitmix64_array(seed, 0, 2 * k)
        gaps = overhead + (draws % np.uint64(2 * jitter_span + 1)).astype(np.int64) - jitter_span
        gaps = np.maximum(gaps, 0)
        gap_in = gaps[0::2]
        gap_out = gaps[1::2]
    else:
        gap_in = np.zeros(k, dtype=np.int64)
        gap_out = np.zeros(k, dtype=np.int64)

    work = 2  # time spent inside the candidate per call
    block = np.arange(k, dtype=np.int64)
    # Call i starts one unit after call i-1 returned.
    per_duration = gap_in + work + gap_out + 1
    starts = np.ones(k, dtype=np.int64)
    if k > 1:
        starts[1:] += np.cumsum(per_duration[:-1])

    kind[0] = USE_CASE_START
    ts[0] = 0
    a[0] = 0
    if k:
        base = block * per + 1
        entry_ts = starts + gap_in
        for off, (kcode, tcol, acol, bcol) in enumerate(
            (
                (INVOCATION, starts, 1, -1),
                (ENTRY, entry_ts, 1, 1),
                (TX_START, entry_ts, pool_base + block, DEMARCATION_IMPLICIT),
                (TX_COMMIT, entry_ts + work, pool_base + block, -1),
                (EXIT, entry_ts + work, 1, -1),
                (RETURN, entry_ts + work + gap_out, 1, -1),
            )
        ):
            idx = base + off
            kind[idx] = kcode
            ts[idx] = tcol
            a[idx] = acol
            b[idx] = bcol
    kind[n - 1] = USE_CASE_END
    ts[n - 1] = int(ts[n - 2]) + 1 if n > 1 else 1
    a[n - 1] = 0

    eid = np.arange(n, dtype=np.int64)
    return Trace(trace_id, use_case, kind, ts, eid, a, b, pool)


# ---------------------------------------------------------------------------
# Entry point


def generate(config: GenConfig, model: DeploymentModel) -> list[Trace]:
    """Produce config.trace_count valid traces; identical inputs give
    bit-identical output."""
    if not model.candidates:
        raise EmptyModelError("model has no service candidates")
    use_cases = list(config.use_case_pool) or sorted(model.use_case_owner) or ["unassigned"]

    traces: list[Trace] = []
    for i in range(config.trace_count):
        stream = SplitMix64(_mix((config.seed + i * _GOLDEN) & _MASK))
        if config.shape == "chain":
            traces.append(
                generate_chain_trace(
                    model, config.max_remote_invocations, seed=stream.next_u64(),
                    trace_id=f"chain-{config.seed}-{i}",
                )
            )
            continue
        uc = use_cases[stream.next_u64() % len(use_cases)]
        gen = _TraceGen(stream, model, config)
        traces.append(gen.build(f"g{config.seed}-{i}", uc))
    return traces
