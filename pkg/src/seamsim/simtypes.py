"""Shared data structures of the simulation kernels.

Both kernel backends (the compiled extension and the pure-Python fallback)
produce these structures; everything downstream (transaction annotation,
rewriting, analysis) consumes them without knowing which backend ran.

All "position" fields are indices into the trace's event columns, not event
ids; callers translate where needed.  Transaction, entry, write, and recorded
tx-event tables are column-oriented to keep multi-million-event traces cheap.
"""

from __future__ import annotations

# Transaction behavior codes (order matches model.TransactionBehavior).
B_REQUIRED = 0
B_REQUIRES_NEW = 1
B_SUPPORTS = 2
B_NOT_SUPPORTED = 3
B_MANDATORY = 4
B_NEVER = 5

# Entry actions.
A_JOIN = 0
A_START_NEW = 1
A_SUSPEND_AND_START_NEW = 2
A_SUSPEND_ONLY = 3
A_RUN_WITHOUT_TX = 4
A_VIOLATION_MANDATORY = 5  # MANDATORY without a transaction
A_VIOLATION_NEVER = 6  # NEVER with a transaction

# Decision table: DECISION[behavior][1 if a context was inherited else 0].
DECISION = (
    (A_START_NEW, A_JOIN),  # REQUIRED
    (A_START_NEW, A_SUSPEND_AND_START_NEW),  # REQUIRES_NEW
    (A_RUN_WITHOUT_TX, A_JOIN),  # SUPPORTS
    (A_RUN_WITHOUT_TX, A_SUSPEND_ONLY),  # NOT_SUPPORTED
    (A_VIOLATION_MANDATORY, A_JOIN),  # MANDATORY
    (A_RUN_WITHOUT_TX, A_VIOLATION_NEVER),  # NEVER
)

# Connection kind / propagation codes.
C_NONE = 0
C_LOCAL = 1
C_REMOTE = 2
P_NONE = 0
P_SUBORDINATE = 1

# Transaction kinds and demarcations.
T_TOP = 0
T_SUB = 1
D_IMPLICIT = 0
D_EXPLICIT = 1

# Timeline states (matches the visualization palette).
S_CLEAN = 0
S_DIRTY = 1
S_SUSPENDED = 2

# Implicit-transaction slots of a frame.  A frame can carry at most one
# subordinate context (created by propagation) and one top-level context
# (started by the entry decision) at the same time.
SLOT_SUB = 0
SLOT_TOP = 1
SLOT_ORPHAN = 2


class SimulationError(Exception):
    """The trace cannot be executed against the model (precondition breach)."""

    UNKNOWN_CANDIDATE = "UNKNOWN_CANDIDATE"
    UNKNOWN_ENTITY_TYPE = "UNKNOWN_ENTITY_TYPE"
    NOT_CONNECTED = "NOT_CONNECTED"
    EXPLICIT_START_IN_TX = "EXPLICIT_START_IN_TX"

    def __init__(self, code: str, position: int, detail: str = ""):
        super().__init__(f"{code} at event position {position}" + (f": {detail}" if detail else ""))
        self.code = code
        self.position = position


class SimResult:
    """Raw output of one simulation walk over a trace.

    Column tables (lists from the pure backend, numpy arrays from the
    compiled one; both index-compatible):

    Transactions (index = tx):
      tx_kind, tx_demarc, tx_parent, tx_root, tx_start_pos, tx_start_ts,
      tx_frame (entry index of the creating frame, -1 for the root frame),
      tx_slot (SLOT_SUB or SLOT_TOP for implicit, -1 for explicit),
      tx_resolve_pos, tx_resolve_ts, tx_committed, tx_adopted (pool index of
      the recorded transaction id this context adopted, -1 if none).

    Entries (index = entry order, aligned across simulations of the same
    trace): entry_pos, entry_flag (computed tx-started flag), frame_exit_pos,
    plus the per-frame implicit-transaction intent columns used by the
    rewriter: frame_top / frame_sub (tx idx or -1), frame_top_committed /
    frame_sub_committed (-1 when not started), frame_sub_anchor_kind (0 = the
    subordinate's commit anchors before its implicit root's frame exit, 1 =
    after the explicit root's terminator event, -1 = none) and
    frame_sub_anchor (the root's frame entry index or terminator position).

    Writes (index = write order): write_pos, write_tx (-1 for a write outside
    any transaction), write_committed.

    Recorded implicit transaction events: rec_pos, rec_frame (governing entry
    index, -1 for the root frame), rec_slot (SLOT_*).

    Sparse event lists:
      conflicts: (pos, is_write, etype_pool, eid_pool, actor_tx, holder_tx,
                  holder_unreachable) — an access that hit a pending write of
                  an unrelated transaction.
      violations: (pos, action_code) — decision-table violations.
      markers: {tx: [positions]} — recorded abort events that marked this
                  context rollback-only (implicit contexts only).
      timeline: [(tx, state, from_ts, to_ts)] or None if not requested.

    remote_invocations: count of hops over remote connections.
    """

    __slots__ = (
        "tx_kind", "tx_demarc", "tx_parent", "tx_root", "tx_start_pos", "tx_start_ts",
        "tx_frame", "tx_slot", "tx_resolve_pos", "tx_resolve_ts", "tx_committed", "tx_adopted",
        "entry_pos", "entry_flag", "frame_exit_pos", "frame_top", "frame_sub",
        "frame_top_committed", "frame_sub_committed", "frame_sub_anchor_kind", "frame_sub_anchor",
        "write_pos", "write_tx", "write_committed",
        "rec_pos", "rec_frame", "rec_slot",
        "conflicts", "violations", "markers", "timeline",
        "remote_invocations",
    )

    def __init__(self, **kw):
        for name in self.__slots__:
            setattr(self, name, kw[name])

    @property
    def n_txs(self) -> int:
        return len(self.tx_kind)

    @property
    def n_entries(self) -> int:
        return len(self.entry_pos)
