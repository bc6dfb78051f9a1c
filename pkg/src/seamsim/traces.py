"""Event traces: data model, NDJSON interchange format, validation, span trees.

A trace is the ordered event record of one use-case execution.  Events are
stored column-wise (numpy arrays plus a per-trace string pool) so the hot
analysis kernels can run over large traces without materializing millions of
Python objects; :class:`Event` objects are materialized on demand.

On disk a corpus is NDJSON (one trace per line, UTF-8, LF):

    {"trace_id": str, "use_case": str, "events": [
        {"type": "use_case_start", "ts": int, "id": int, "name": str},
        {"type": "invocation",     "ts": int, "id": int, "candidate": str},
        {"type": "entry",          "ts": int, "id": int, "candidate": str, "tx_started": bool},
        {"type": "exit",           "ts": int, "id": int, "candidate": str},
        {"type": "return",         "ts": int, "id": int, "candidate": str},
        {"type": "tx_start",       "ts": int, "id": int, "tx_id": str, "demarcation": "implicit"|"explicit"},
        {"type": "tx_commit",      "ts": int, "id": int, "tx_id": str},
        {"type": "tx_abort",       "ts": int, "id": int, "tx_id": str, "cause": str},
        {"type": "entity_read",    "ts": int, "id": int, "entity_type": str, "entity_id": str},
        {"type": "entity_write",   "ts": int, "id": int, "entity_type": str, "entity_id": str},
        {"type": "use_case_end",   "ts": int, "id": int, "name": str}]}

Timestamps are integers in one abstract unit (microseconds by convention)
shared with connection overheads in the deployment model.  Events with equal
timestamps keep file order; event ids break ties wherever ordering matters.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Union

import numpy as np

# Event kind codes (the `kind` column).
USE_CASE_START = 0
USE_CASE_END = 1
INVOCATION = 2
ENTRY = 3
EXIT = 4
RETURN = 5
TX_START = 6
TX_COMMIT = 7
TX_ABORT = 8
ENTITY_READ = 9
ENTITY_WRITE = 10

KIND_NAMES = (
    "use_case_start",
    "use_case_end",
    "invocation",
    "entry",
    "exit",
    "return",
    "tx_start",
    "tx_commit",
    "tx_abort",
    "entity_read",
    "entity_write",
)
_KIND_BY_NAME = {name: code for code, name in enumerate(KIND_NAMES)}

DEMARCATION_IMPLICIT = 0
DEMARCATION_EXPLICIT = 1

TRACE_FILE_SUFFIX = ".traces.ndjson"


class FormatError(Exception):
    """Malformed NDJSON input."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class TraceValidationError(Exception):
    """A trace breaks a well-formedness invariant."""

    def __init__(self, trace_id: str, event_id: Optional[int], code: str, message: str):
        super().__init__(f"trace {trace_id!r}, event {event_id}: {code}: {message}")
        self.trace_id = trace_id
        self.event_id = event_id
        self.code = code


@dataclass(frozen=True)
class Event:
    """One trace event; payload fields depend on `kind`."""

    kind: int
    ts: int
    event_id: int
    name: Optional[str] = None
    candidate: Optional[str] = None
    tx_started: Optional[bool] = None
    tx_id: Optional[str] = None
    demarcation: Optional[str] = None
    cause: Optional[str] = None
    entity_type: Optional[str] = None
    entity_id: Optional[str] = None

    def to_obj(self) -> dict:
        out: dict = {"type": KIND_NAMES[self.kind], "ts": int(self.ts), "id": int(self.event_id)}
        if self.kind in (USE_CASE_START, USE_CASE_END):
            out["name"] = self.name
        elif self.kind in (INVOCATION, EXIT, RETURN):
            out["candidate"] = self.candidate
        elif self.kind == ENTRY:
            out["candidate"] = self.candidate
            out["tx_started"] = bool(self.tx_started)
        elif self.kind == TX_START:
            out["tx_id"] = self.tx_id
            out["demarcation"] = self.demarcation
        elif self.kind == TX_COMMIT:
            out["tx_id"] = self.tx_id
        elif self.kind == TX_ABORT:
            out["tx_id"] = self.tx_id
            out["cause"] = self.cause
        else:
            out["entity_type"] = self.entity_type
            out["entity_id"] = self.entity_id
        return out


# Shorthand constructors, mostly for tests and the generator.


def use_case_start(ts: int, event_id: int, name: str) -> Event:
    return Event(USE_CASE_START, ts, event_id, name=name)


def use_case_end(ts: int, event_id: int, name: str) -> Event:
    return Event(USE_CASE_END, ts, event_id, name=name)


def invocation(ts: int, event_id: int, candidate: str) -> Event:
    return Event(INVOCATION, ts, event_id, candidate=candidate)


def entry(ts: int, event_id: int, candidate: str, tx_started: bool = False) -> Event:
    return Event(ENTRY, ts, event_id, candidate=candidate, tx_started=tx_started)


def exit_(ts: int, event_id: int, candidate: str) -> Event:
    return Event(EXIT, ts, event_id, candidate=candidate)


def return_(ts: int, event_id: int, candidate: str) -> Event:
    return Event(RETURN, ts, event_id, candidate=candidate)


def tx_start(ts: int, event_id: int, tx_id: str, demarcation: str = "implicit") -> Event:
    return Event(TX_START, ts, event_id, tx_id=tx_id, demarcation=demarcation)


def tx_commit(ts: int, event_id: int, tx_id: str) -> Event:
    return Event(TX_COMMIT, ts, event_id, tx_id=tx_id)


def tx_abort(ts: int, event_id: int, tx_id: str, cause: str = "error") -> Event:
    return Event(TX_ABORT, ts, event_id, tx_id=tx_id, cause=cause)


def entity_read(ts: int, event_id: int, entity_type: str, entity_id: str) -> Event:
    return Event(ENTITY_READ, ts, event_id, entity_type=entity_type, entity_id=entity_id)


def entity_write(ts: int, event_id: int, entity_type: str, entity_id: str) -> Event:
    return Event(ENTITY_WRITE, ts, event_id, entity_type=entity_type, entity_id=entity_id)


class Trace:
    """One use-case execution, stored column-wise.

    Columns: ``kind`` (uint8), ``ts`` (int64), ``eid`` (int64), and two
    payload columns ``a``/``b`` (int32) that index into the per-trace string
    ``pool`` or hold small scalars:

    ========== =============================== =========================
    kind       a                               b
    ========== =============================== =========================
    use case   pool: name                      -1
    invocation pool: candidate                 -1
    entry      pool: candidate                 tx_started flag (0/1)
    exit/return pool: candidate                -1
    tx_start   pool: tx id                     demarcation (0 impl/1 expl)
    tx_commit  pool: tx id                     -1
    tx_abort   pool: tx id                     pool: cause
    entity r/w pool: entity type               pool: entity id
    ========== =============================== =========================

    Traces are immutable by convention; rewriting produces new instances.
    """

    __slots__ = ("trace_id", "use_case", "kind", "ts", "eid", "a", "b", "pool", "_pool_index", "_model_cache")

    def __init__(
        self,
        trace_id: str,
        use_case: str,
        kind: np.ndarray,
        ts: np.ndarray,
        eid: np.ndarray,
        a: np.ndarray,
        b: np.ndarray,
        pool: list[str],
    ):
        self.trace_id = trace_id
        self.use_case = use_case
        self.kind = kind
        self.ts = ts
        self.eid = eid
        self.a = a
        self.b = b
        self.pool = pool
        self._pool_index: Optional[dict[str, int]] = None
        self._model_cache: Optional[dict] = None  # per-KernelModel derived tables

    def __len__(self) -> int:
        return len(self.kind)

    def pool_index(self) -> dict[str, int]:
        if self._pool_index is None:
            self._pool_index = {s: i for i, s in enumerate(self.pool)}
        return self._pool_index

    # -- construction

    @classmethod
    def from_events(cls, trace_id: str, use_case: str, events: Iterable[Event]) -> "Trace":
        events = list(events)
        n = len(events)
        kind = np.empty(n, dtype=np.uint8)
        ts = np.empty(n, dtype=np.int64)
        eid = np.empty(n, dtype=np.int64)
        a = np.full(n, -1, dtype=np.int32)
        b = np.full(n, -1, dtype=np.int32)
        pool: list[str] = []
        index: dict[str, int] = {}

        def intern(s: str) -> int:
            i = index.get(s)
            if i is None:
                i = len(pool)
                index[s] = i
                pool.append(s)
            return i

        for i, ev in enumerate(events):
            kind[i] = ev.kind
            ts[i] = ev.ts
            eid[i] = ev.event_id
            k = ev.kind
            if k in (USE_CASE_START, USE_CASE_END):
                a[i] = intern(ev.name or "")
            elif k in (INVOCATION, EXIT, RETURN):
                a[i] = intern(ev.candidate or "")
            elif k == ENTRY:
                a[i] = intern(ev.candidate or "")
                b[i] = 1 if ev.tx_started else 0
            elif k == TX_START:
                a[i] = intern(ev.tx_id or "")
                b[i] = DEMARCATION_EXPLICIT if ev.demarcation == "explicit" else DEMARCATION_IMPLICIT
            elif k == TX_COMMIT:
                a[i] = intern(ev.tx_id or "")
            elif k == TX_ABORT:
                a[i] = intern(ev.tx_id or "")
                b[i] = intern(ev.cause or "")
            else:
                a[i] = intern(ev.entity_type or "")
                b[i] = intern(ev.entity_id or "")
        trace = cls(trace_id, use_case, kind, ts, eid, a, b, pool)
        trace._pool_index = index
        return trace

    @classmethod
    def from_obj(cls, obj: dict) -> "Trace":
        """Build a trace from a decoded NDJSON object (no validation)."""
        events = obj["events"]
        n = len(events)
        kind = np.empty(n, dtype=np.uint8)
        ts = np.empty(n, dtype=np.int64)
        eid = np.empty(n, dtype=np.int64)
        a = np.full(n, -1, dtype=np.int32)
        b = np.full(n, -1, dtype=np.int32)
        pool: list[str] = []
        index: dict[str, int] = {}

        def intern(s) -> int:
            if not isinstance(s, str):
                raise KeyError("string field")
            i = index.get(s)
            if i is None:
                i = len(pool)
                index[s] = i
                pool.append(s)
            return i

        for i, ev in enumerate(events):
            k = _KIND_BY_NAME[ev["type"]]
            kind[i] = k
            ts[i] = ev["ts"]
            eid[i] = ev["id"]
            if k in (USE_CASE_START, USE_CASE_END):
                a[i] = intern(ev["name"])
            elif k in (INVOCATION, EXIT, RETURN):
                a[i] = intern(ev["candidate"])
            elif k == ENTRY:
                a[i] = intern(ev["candidate"])
                b[i] = 1 if ev["tx_started"] else 0
            elif k == TX_START:
                a[i] = intern(ev["tx_id"])
                demarcation = ev["demarcation"]
                if demarcation not in ("implicit", "explicit"):
                    raise KeyError("demarcation")
                b[i] = DEMARCATION_EXPLICIT if demarcation == "explicit" else DEMARCATION_IMPLICIT
            elif k == TX_COMMIT:
                a[i] = intern(ev["tx_id"])
            elif k == TX_ABORT:
                a[i] = intern(ev["tx_id"])
                b[i] = intern(ev["cause"])
            else:
                a[i] = intern(ev["entity_type"])
                b[i] = intern(ev["entity_id"])
        trace = cls(str(obj["trace_id"]), str(obj["use_case"]), kind, ts, eid, a, b, pool)
        trace._pool_index = index
        return trace

    # -- materialization

    def event(self, i: int) -> Event:
        k = int(self.kind[i])
        ts = int(self.ts[i])
        eid = int(self.eid[i])
        a = int(self.a[i])
        b = int(self.b[i])
        pool = self.pool
        if k in (USE_CASE_START, USE_CASE_END):
            return Event(k, ts, eid, name=pool[a])
        if k in (INVOCATION, EXIT, RETURN):
            return Event(k, ts, eid, candidate=pool[a])
        if k == ENTRY:
            return Event(k, ts, eid, candidate=pool[a], tx_started=bool(b))
        if k == TX_START:
            return Event(
                k, ts, eid, tx_id=pool[a],
                demarcation="explicit" if b == DEMARCATION_EXPLICIT else "implicit",
            )
        if k == TX_COMMIT:
            return Event(k, ts, eid, tx_id=pool[a])
        if k == TX_ABORT:
            return Event(k, ts, eid, tx_id=pool[a], cause=pool[b])
        return Event(k, ts, eid, entity_type=pool[a], entity_id=pool[b])

    def events(self) -> list[Event]:
        return [self.event(i) for i in range(len(self))]

    def to_obj(self) -> dict:
        return {
            "trace_id": self.trace_id,
            "use_case": self.use_case,
            "events": [self.event(i).to_obj() for i in range(len(self))],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), separators=(",", ":"))

    # -- quick stats

    @property
    def duration(self) -> int:
        return int(self.ts[-1] - self.ts[0]) if len(self) else 0

    def total_overhead(self) -> int:
        """Sum of observed request and response overheads over all hops."""
        after = np.flatnonzero((self.kind == ENTRY) | (self.kind == RETURN))
        if len(after) == 0:
            return 0
        return int((self.ts[after] - self.ts[after - 1]).sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.trace_id == other.trace_id
            and self.use_case == other.use_case
            and len(self) == len(other)
            and bool(np.array_equal(self.kind, other.kind))
            and bool(np.array_equal(self.ts, other.ts))
            and bool(np.array_equal(self.eid, other.eid))
            and self.events() == other.events()
        )

    def __repr__(self) -> str:
        return f"<Trace {self.trace_id!r} use_case={self.use_case!r} events={len(self)}>"


# ---------------------------------------------------------------------------
# Validation


def validate_trace(trace: Trace) -> None:
    """Raise TraceValidationError on the first broken invariant.

    Checks ordering, the use-case bracket, the invocation/entry/exit/return
    nesting (entry directly follows its invocation, return its exit), event-id
    uniqueness, non-negative observed overheads, and transaction-event
    references.  Explicit transactions must start and end within one span.
    """
    tid = trace.trace_id
    n = len(trace)
    if n == 0:
        raise TraceValidationError(tid, None, "EMPTY_TRACE", "trace has no events")
    kind = trace.kind
    ts = trace.ts
    eid = trace.eid
    a = trace.a
    b = trace.b
    pool = trace.pool

    if kind[0] != USE_CASE_START:
        raise TraceValidationError(tid, int(eid[0]), "MISSING_USE_CASE_START", "first event must be the use-case start")
    if kind[n - 1] != USE_CASE_END:
        raise TraceValidationError(tid, int(eid[n - 1]), "MISSING_USE_CASE_END", "last event must be the use-case end")
    if pool[a[0]] != trace.use_case or pool[a[n - 1]] != trace.use_case:
        raise TraceValidationError(tid, int(eid[0]), "USE_CASE_NAME_MISMATCH", "use-case event name differs from the trace use case")

    seen_ids: set[int] = set()
    # Call stack of (candidate pool idx, entry position); -1 marks the root.
    stack: list[tuple[int, int]] = [(-1, 0)]
    pending_invocation = -1  # position of an invocation awaiting its entry
    expect_return_of = -1  # candidate pool idx whose return must come next
    # txid pool idx -> state: 0 open-implicit, 1 open-explicit, 2 done; explicit also records frame depth.
    tx_state: dict[int, int] = {}
    tx_frame: dict[int, int] = {}
    open_explicit_at_depth: dict[int, set[int]] = {}

    prev_ts = ts[0]
    for i in range(n):
        k = int(kind[i])
        if ts[i] < prev_ts:
            if k == ENTRY and pending_invocation == i - 1:
                raise TraceValidationError(tid, int(eid[i]), "NEGATIVE_OVERHEAD", "entry before its invocation")
            if k == RETURN and expect_return_of >= 0:
                raise TraceValidationError(tid, int(eid[i]), "NEGATIVE_OVERHEAD", "return before its exit")
            raise TraceValidationError(tid, int(eid[i]), "TS_NOT_MONOTONIC", "timestamps must be non-decreasing")
        prev_ts = ts[i]
        e = int(eid[i])
        if e in seen_ids:
            raise TraceValidationError(tid, e, "DUPLICATE_EVENT_ID", "event id occurs twice")
        seen_ids.add(e)

        if pending_invocation >= 0 and k != ENTRY:
            raise TraceValidationError(tid, e, "ENTRY_EXPECTED", "an invocation must be followed directly by its entry")
        if expect_return_of >= 0 and k != RETURN:
            raise TraceValidationError(tid, e, "RETURN_EXPECTED", "an exit must be followed directly by its return")

        if k == USE_CASE_START:
            if i != 0:
                raise TraceValidationError(tid, e, "USE_CASE_EVENT_INSIDE", "nested use-case start")
        elif k == USE_CASE_END:
            if i != n - 1:
                raise TraceValidationError(tid, e, "USE_CASE_EVENT_INSIDE", "use-case end before the last event")
            if len(stack) != 1:
                raise TraceValidationError(tid, e, "UNBALANCED_CALL", "use case ends with open invocations")
        elif k == INVOCATION:
            pending_invocation = i
        elif k == ENTRY:
            if pending_invocation < 0:
                raise TraceValidationError(tid, e, "ENTRY_WITHOUT_INVOCATION", "entry without a preceding invocation")
            if a[pending_invocation] != a[i]:
                raise TraceValidationError(tid, e, "CANDIDATE_MISMATCH", "entry candidate differs from the invocation")
            stack.append((int(a[i]), i))
            pending_invocation = -1
        elif k == EXIT:
            if len(stack) <= 1 or stack[-1][0] != a[i]:
                raise TraceValidationError(tid, e, "UNBALANCED_CALL", "exit does not match the innermost entry")
            expect_return_of = int(a[i])
            # Explicit transactions opened in this frame must have completed.
            still_open = open_explicit_at_depth.get(len(stack) - 1)
            if still_open:
                txid = next(iter(still_open))
                raise TraceValidationError(
                    tid, e, "EXPLICIT_TX_CROSSES_SPAN",
                    f"explicit transaction {pool[txid]!r} still open at span end",
                )
            stack.pop()
        elif k == RETURN:
            if expect_return_of < 0 or a[i] != expect_return_of:
                raise TraceValidationError(tid, e, "RETURN_WITHOUT_EXIT", "return does not match the preceding exit")
            expect_return_of = -1
        elif k == TX_START:
            txid = int(a[i])
            if txid in tx_state:
                raise TraceValidationError(tid, e, "DUPLICATE_TX", f"transaction id {pool[txid]!r} reused")
            explicit = b[i] == DEMARCATION_EXPLICIT
            tx_state[txid] = 1 if explicit else 0
            if explicit:
                depth = len(stack) - 1
                tx_frame[txid] = depth
                open_explicit_at_depth.setdefault(depth, set()).add(txid)
        elif k in (TX_COMMIT, TX_ABORT):
            txid = int(a[i])
            state = tx_state.get(txid)
            if state is None:
                raise TraceValidationError(tid, e, "UNKNOWN_TX", f"transaction {pool[txid]!r} was never started")
            if state == 2:
                raise TraceValidationError(tid, e, "TX_ALREADY_COMPLETED", f"transaction {pool[txid]!r} already completed")
            if state == 1:
                depth = len(stack) - 1
                if tx_frame.get(txid) != depth:
                    raise TraceValidationError(
                        tid, e, "EXPLICIT_TX_CROSSES_SPAN",
                        f"explicit transaction {pool[txid]!r} ends outside its starting span",
                    )
                open_explicit_at_depth[depth].discard(txid)
            tx_state[txid] = 2
        else:  # ENTITY_READ / ENTITY_WRITE
            if not pool[a[i]] or not pool[b[i]]:
                raise TraceValidationError(tid, e, "EMPTY_FIELD", "entity type and id must be non-empty")

    if len(stack) != 1 or pending_invocation >= 0 or expect_return_of >= 0:
        raise TraceValidationError(tid, int(eid[n - 1]), "UNBALANCED_CALL", "trace ends with open invocations")


# ---------------------------------------------------------------------------
# NDJSON streaming


def read_traces(source: Union[IO, Iterable[Union[str, bytes]]], validate: bool = True) -> Iterator[Trace]:
    """Lazily yield traces from NDJSON lines (constant memory per trace)."""
    for line_no, line in enumerate(source, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(line_no, f"invalid JSON: {exc.msg}") from None
        try:
            trace = Trace.from_obj(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(line_no, f"malformed trace object: {exc}") from None
        if validate:
            validate_trace(trace)
        yield trace


def write_traces(traces: Iterable[Trace], sink: IO) -> None:
    """Write traces as NDJSON; reading the output back yields equal traces."""
    text_mode = isinstance(sink, io.TextIOBase)
    for trace in traces:
        line = trace.to_json() + "\n"
        sink.write(line if text_mode else line.encode("utf-8"))


def read_trace_file(path) -> list[Trace]:
    with open(path, "rb") as f:
        return list(read_traces(f))


def write_trace_file(traces: Iterable[Trace], path) -> None:
    with open(path, "wb") as f:
        write_traces(traces, f)


# ---------------------------------------------------------------------------
# Span trees


@dataclass
class Span:
    """A candidate execution (or the synthetic use-case root).

    The span interval is entry..exit; the whiskers before and after are the
    observed invocation and return overheads.  Every event of the trace is
    attributed to exactly one span (hop events to the span they delimit, body
    events to the innermost enclosing span).
    """

    name: str
    start_ts: int
    end_ts: int
    overhead_before: int = 0
    overhead_after: int = 0
    depth: int = 0
    parent: Optional["Span"] = None
    children: list["Span"] = field(default_factory=list)
    event_ids: list[int] = field(default_factory=list)

    def walk(self) -> Iterator["Span"]:
        yield self
        for child in self.children:
            yield from child.walk()


def build_span_tree(trace: Trace) -> Span:
    """Derive the span hierarchy of a valid trace.

    The root is a synthetic span for the use case itself; each invocation
    contributes one child span with its observed overheads.
    """
    n = len(trace)
    kind = trace.kind
    ts = trace.ts
    eid = trace.eid
    a = trace.a
    pool = trace.pool

    root = Span(trace.use_case, int(ts[0]), int(ts[n - 1]) if n else 0)
    stack = [root]
    pending_inv = -1
    for i in range(n):
        k = int(kind[i])
        if k == INVOCATION:
            pending_inv = i
        elif k == ENTRY:
            span = Span(
                pool[a[i]],
                int(ts[i]),
                int(ts[i]),
                overhead_before=int(ts[i] - ts[pending_inv]),
                depth=len(stack),
                parent=stack[-1],
            )
            span.event_ids.append(int(eid[pending_inv]))
            span.event_ids.append(int(eid[i]))
            stack[-1].children.append(span)
            stack.append(span)
            pending_inv = -1
        elif k == EXIT:
            span = stack[-1]
            span.end_ts = int(ts[i])
            span.event_ids.append(int(eid[i]))
        elif k == RETURN:
            span = stack.pop()
            span.overhead_after = int(ts[i] - span.end_ts)
            span.event_ids.append(int(eid[i]))
        else:
            stack[-1].event_ids.append(int(eid[i]))
    return root
