# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Mirrors ``_kernels_py.py`` exactly; see that module for the semantics and
``simtypes.SimResult`` for the output contract.  Any change here must be
ported to the pure twin (tests/test_backends.py guards equivalence).
"""

from libc.stdlib cimport free, malloc, realloc
from libc.stdint cimport int32_t, int64_t, int8_t, uint8_t

import numpy as np

from .simtypes import SimResult, SimulationError

# Event kinds (match traces.py).
cdef enum:
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

# Actions / connection codes / tx constants (match simtypes.py).
cdef enum:
    A_JOIN = 0
    A_START_NEW = 1
    A_SUSPEND_AND_START_NEW = 2
    A_SUSPEND_ONLY = 3
    A_RUN_WITHOUT_TX = 4
    A_VIOLATION_MANDATORY = 5
    A_VIOLATION_NEVER = 6

cdef enum:
    C_NONE = 0
    C_LOCAL = 1
    C_REMOTE = 2
    P_NONE = 0
    P_SUBORDINATE = 1

cdef enum:
    T_TOP = 0
    T_SUB = 1
    D_IMPLICIT = 0
    D_EXPLICIT = 1

cdef enum:
    S_CLEAN = 0
    S_DIRTY = 1
    S_SUSPENDED = 2

cdef enum:
    SLOT_SUB = 0
    SLOT_TOP = 1
    SLOT_ORPHAN = 2

# DECISION[behavior][inherited]
cdef int DECISION[6][2]
DECISION[0][0] = A_START_NEW;     DECISION[0][1] = A_JOIN
DECISION[1][0] = A_START_NEW;     DECISION[1][1] = A_SUSPEND_AND_START_NEW
DECISION[2][0] = A_RUN_WITHOUT_TX; DECISION[2][1] = A_JOIN
DECISION[3][0] = A_RUN_WITHOUT_TX; DECISION[3][1] = A_SUSPEND_ONLY
DECISION[4][0] = A_VIOLATION_MANDATORY; DECISION[4][1] = A_JOIN
DECISION[5][0] = A_RUN_WITHOUT_TX; DECISION[5][1] = A_VIOLATION_NEVER

BACKEND = "c"


cdef struct Frame:
    int32_t comp
    int32_t ctx
    int32_t started
    int32_t created_sub
    int32_t suspended
    int32_t explicit_tx
    uint8_t hop_remote_none
    int32_t parent
    int32_t entry_idx


def sim_walk(const uint8_t[::1] kind, const int64_t[::1] ts, const int32_t[::1] a,
             const int32_t[::1] b, const int64_t[::1] cand_comp,
             const int64_t[::1] cand_behavior, int ncomp,
             const int64_t[::1] conn_kind, const int64_t[::1] conn_prop,
             int root_comp, bint want_timeline=False):
    cdef Py_ssize_t n = kind.shape[0]
    cdef Py_ssize_t npool = cand_comp.shape[0]
    cdef Py_ssize_t i
    cdef int k

    # Pre-pass: exact capacities.
    cdef Py_ssize_t n_entries = 0, n_txstart = 0, n_txevents = 0, n_writes = 0, n_explicit = 0
    for i in range(n):
        k = kind[i]
        if k == ENTRY:
            n_entries += 1
        elif k == TX_START:
            n_txstart += 1
            n_txevents += 1
            if b[i] == D_EXPLICIT:
                n_explicit += 1
        elif k == TX_COMMIT or k == TX_ABORT:
            n_txevents += 1
        elif k == ENTITY_WRITE:
            n_writes += 1

    cdef Py_ssize_t tx_cap = 2 * n_entries + n_explicit + 1

    # Transaction columns.
    tx_kind_arr = np.empty(tx_cap, dtype=np.int8)
    tx_demarc_arr = np.empty(tx_cap, dtype=np.int8)
    tx_parent_arr = np.empty(tx_cap, dtype=np.int32)
    tx_root_arr = np.empty(tx_cap, dtype=np.int32)
    tx_start_pos_arr = np.empty(tx_cap, dtype=np.int64)
    tx_start_ts_arr = np.empty(tx_cap, dtype=np.int64)
    tx_frame_arr = np.empty(tx_cap, dtype=np.int32)
    tx_slot_arr = np.empty(tx_cap, dtype=np.int8)
    tx_resolve_pos_arr = np.empty(tx_cap, dtype=np.int64)
    tx_resolve_ts_arr = np.empty(tx_cap, dtype=np.int64)
    tx_committed_arr = np.empty(tx_cap, dtype=np.int8)
    tx_adopted_arr = np.empty(tx_cap, dtype=np.int32)
    cdef int8_t[::1] tx_kind = tx_kind_arr
    cdef int8_t[::1] tx_demarc = tx_demarc_arr
    cdef int32_t[::1] tx_parent = tx_parent_arr
    cdef int32_t[::1] tx_root = tx_root_arr
    cdef int64_t[::1] tx_start_pos = tx_start_pos_arr
    cdef int64_t[::1] tx_start_ts = tx_start_ts_arr
    cdef int32_t[::1] tx_frame = tx_frame_arr
    cdef int8_t[::1] tx_slot = tx_slot_arr
    cdef int64_t[::1] tx_resolve_pos = tx_resolve_pos_arr
    cdef int64_t[::1] tx_resolve_ts = tx_resolve_ts_arr
    cdef int8_t[::1] tx_committed = tx_committed_arr
    cdef int32_t[::1] tx_adopted = tx_adopted_arr

    # Side state per transaction (not returned).
    rollback_arr = np.zeros(tx_cap, dtype=np.int8)
    state_arr = np.zeros(tx_cap, dtype=np.int8)
    pending_count_arr = np.zeros(tx_cap, dtype=np.int64)
    child_head_arr = np.full(tx_cap, -1, dtype=np.int32)
    child_next_arr = np.full(tx_cap, -1, dtype=np.int32)
    write_head_arr = np.full(tx_cap, -1, dtype=np.int32)
    cdef int8_t[::1] tx_rollback = rollback_arr
    cdef int8_t[::1] tx_state = state_arr
    cdef int64_t[::1] tx_pending = pending_count_arr
    cdef int32_t[::1] child_head = child_head_arr
    cdef int32_t[::1] child_next = child_next_arr
    cdef int32_t[::1] write_head = write_head_arr

    # Entry / frame intent columns.
    entry_pos_arr = np.empty(n_entries, dtype=np.int64)
    entry_flag_arr = np.empty(n_entries, dtype=np.int8)
    frame_exit_pos_arr = np.full(n_entries, -1, dtype=np.int64)
    frame_top_arr = np.full(n_entries, -1, dtype=np.int32)
    frame_sub_arr = np.full(n_entries, -1, dtype=np.int32)
    cdef int64_t[::1] entry_pos = entry_pos_arr
    cdef int8_t[::1] entry_flag = entry_flag_arr
    cdef int64_t[::1] frame_exit_pos = frame_exit_pos_arr
    cdef int32_t[::1] frame_top = frame_top_arr
    cdef int32_t[::1] frame_sub = frame_sub_arr

    # Write columns (+ next-pointer chains per transaction).
    write_pos_arr = np.empty(n_writes, dtype=np.int64)
    write_tx_arr = np.empty(n_writes, dtype=np.int32)
    write_committed_arr = np.empty(n_writes, dtype=np.int8)
    write_next_arr = np.full(n_writes, -1, dtype=np.int32)
    cdef int64_t[::1] write_pos = write_pos_arr
    cdef int32_t[::1] write_tx = write_tx_arr
    cdef int8_t[::1] write_committed = write_committed_arr
    cdef int32_t[::1] write_next = write_next_arr

    # Recorded implicit tx events.
    rec_pos_arr = np.empty(n_txevents, dtype=np.int64)
    rec_frame_arr = np.empty(n_txevents, dtype=np.int32)
    rec_slot_arr = np.empty(n_txevents, dtype=np.int8)
    cdef int64_t[::1] rec_pos = rec_pos_arr
    cdef int32_t[::1] rec_frame = rec_frame_arr
    cdef int8_t[::1] rec_slot = rec_slot_arr

    # Recorded-transaction-id registries indexed by pool string.
    gov_frame_arr = np.full(npool, -1, dtype=np.int32)
    gov_slot_arr = np.full(npool, SLOT_ORPHAN, dtype=np.int8)
    gov_known_arr = np.zeros(npool, dtype=np.int8)
    explicit_open_arr = np.full(npool, -1, dtype=np.int32)
    cdef int32_t[::1] gov_frame = gov_frame_arr
    cdef int8_t[::1] gov_slot = gov_slot_arr
    cdef int8_t[::1] gov_known = gov_known_arr
    cdef int32_t[::1] explicit_open = explicit_open_arr

    conflicts = []
    violations = []
    markers = {}
    timeline = [] if want_timeline else None
    open_segment = {}
    pending = {}

    cdef Py_ssize_t n_txs = 0, ne = 0, nw = 0, nrec = 0
    cdef int64_t remote_invocations = 0

    # Frame stack.
    cdef Py_ssize_t stack_cap = 64
    cdef Frame* frames = <Frame*> malloc(stack_cap * sizeof(Frame))
    if frames == NULL:
        raise MemoryError()
    cdef Py_ssize_t depth = 0  # index of the top frame
    frames[0].comp = root_comp
    frames[0].ctx = -1
    frames[0].started = -1
    frames[0].created_sub = -1
    frames[0].suspended = -1
    frames[0].explicit_tx = -1
    frames[0].hop_remote_none = 0
    frames[0].parent = -1
    frames[0].entry_idx = -1

    # Resolve-tree work stack.
    cdef Py_ssize_t rstack_cap = 64
    cdef int32_t* rstack = <int32_t*> malloc(rstack_cap * sizeof(int32_t))
    if rstack == NULL:
        free(frames)
        raise MemoryError()

    cdef int cand, comp, behavior, hop_kind, hop_prop, action
    cdef int inherited, created_sub, started, suspended, ctx, txid, t, x
    cdef int cur, actor, actor_root, slot, flag, hold_tx, hold_wi, unreach, fidx
    cdef int64_t at_ts, idx64
    cdef Py_ssize_t rtop, wi
    cdef bint crossed
    cdef list holders, alive
    cdef object key, seg

    try:
        for i in range(n):
            k = kind[i]

            if k == INVOCATION or k == USE_CASE_START or k == USE_CASE_END:
                continue

            elif k == ENTRY:
                cand = a[i]
                comp = <int> cand_comp[cand]
                behavior = <int> cand_behavior[cand]
                if comp < 0 or behavior < 0:
                    raise SimulationError(SimulationError.UNKNOWN_CANDIDATE, i)
                if comp == frames[depth].comp:
                    hop_kind = C_LOCAL
                    hop_prop = 0
                else:
                    idx64 = frames[depth].comp * ncomp + comp
                    hop_kind = <int> conn_kind[idx64]
                    hop_prop = <int> conn_prop[idx64]
                    if hop_kind == C_NONE:
                        raise SimulationError(SimulationError.NOT_CONNECTED, i)
                if hop_kind == C_REMOTE:
                    remote_invocations += 1

                inherited = -1
                created_sub = -1
                if hop_kind == C_LOCAL:
                    inherited = frames[depth].ctx
                elif hop_prop == P_SUBORDINATE and frames[depth].ctx >= 0:
                    created_sub = <int> n_txs
                    tx_kind[created_sub] = T_SUB
                    tx_demarc[created_sub] = D_IMPLICIT
                    tx_parent[created_sub] = frames[depth].ctx
                    tx_root[created_sub] = tx_root[frames[depth].ctx]
                    tx_start_pos[created_sub] = i
                    tx_start_ts[created_sub] = ts[i]
                    tx_frame[created_sub] = <int32_t> ne
                    tx_slot[created_sub] = SLOT_SUB
                    tx_resolve_pos[created_sub] = -1
                    tx_resolve_ts[created_sub] = -1
                    tx_committed[created_sub] = -1
                    tx_adopted[created_sub] = -1
                    child_next[created_sub] = child_head[frames[depth].ctx]
                    child_head[frames[depth].ctx] = created_sub
                    n_txs += 1
                    if timeline is not None:
                        timeline.append([created_sub, S_CLEAN, ts[i], -1])
                        open_segment[created_sub] = len(timeline) - 1
                    inherited = created_sub

                action = DECISION[behavior][1 if inherited >= 0 else 0]
                if action == A_VIOLATION_MANDATORY or action == A_VIOLATION_NEVER:
                    violations.append((i, action))
                    action = DECISION[0][1 if inherited >= 0 else 0]

                started = -1
                suspended = -1
                ctx = -1
                if action == A_JOIN:
                    ctx = inherited
                elif action == A_START_NEW or action == A_SUSPEND_AND_START_NEW:
                    if action == A_SUSPEND_AND_START_NEW:
                        if tx_state[inherited] != S_SUSPENDED:
                            tx_state[inherited] = S_SUSPENDED
                            if timeline is not None:
                                seg = open_segment.get(inherited)
                                if seg is not None:
                                    timeline[<Py_ssize_t> seg][3] = ts[i]
                                timeline.append([inherited, S_SUSPENDED, ts[i], -1])
                                open_segment[inherited] = len(timeline) - 1
                        suspended = inherited
                    started = <int> n_txs
                    tx_kind[started] = T_TOP
                    tx_demarc[started] = D_IMPLICIT
                    tx_parent[started] = -1
                    tx_root[started] = started
                    tx_start_pos[started] = i
                    tx_start_ts[started] = ts[i]
                    tx_frame[started] = <int32_t> ne
                    tx_slot[started] = SLOT_TOP
                    tx_resolve_pos[started] = -1
                    tx_resolve_ts[started] = -1
                    tx_committed[started] = -1
                    tx_adopted[started] = -1
                    n_txs += 1
                    if timeline is not None:
                        timeline.append([started, S_CLEAN, ts[i], -1])
                        open_segment[started] = len(timeline) - 1
                    ctx = started
                elif action == A_SUSPEND_ONLY:
                    if tx_state[inherited] != S_SUSPENDED:
                        tx_state[inherited] = S_SUSPENDED
                        if timeline is not None:
                            seg = open_segment.get(inherited)
                            if seg is not None:
                                timeline[<Py_ssize_t> seg][3] = ts[i]
                            timeline.append([inherited, S_SUSPENDED, ts[i], -1])
                            open_segment[inherited] = len(timeline) - 1
                    suspended = inherited
                # A_RUN_WITHOUT_TX: ctx stays -1.

                entry_pos[ne] = i
                entry_flag[ne] = 1 if (started >= 0 or created_sub >= 0) else 0
                frame_top[ne] = started
                frame_sub[ne] = created_sub

                depth += 1
                if depth >= stack_cap:
                    stack_cap *= 2
                    frames = <Frame*> realloc(frames, stack_cap * sizeof(Frame))
                    if frames == NULL:
                        raise MemoryError()
                frames[depth].comp = comp
                frames[depth].ctx = ctx
                frames[depth].started = started
                frames[depth].created_sub = created_sub
                frames[depth].suspended = suspended
                frames[depth].explicit_tx = -1
                frames[depth].hop_remote_none = 1 if (hop_kind == C_REMOTE and hop_prop != P_SUBORDINATE) else 0
                frames[depth].parent = <int32_t> (depth - 1)
                frames[depth].entry_idx = <int32_t> ne
                ne += 1

            elif k == EXIT:
                frame_exit_pos[frames[depth].entry_idx] = i
                at_ts = ts[i]
                started = frames[depth].started
                if started >= 0:
                    # resolve_tree(started)
                    flag = 0 if tx_rollback[tx_root[started]] else 1
                    rtop = 0
                    rstack[0] = started
                    while rtop >= 0:
                        x = rstack[rtop]
                        rtop -= 1
                        tx_resolve_pos[x] = i
                        tx_resolve_ts[x] = at_ts
                        tx_committed[x] = <int8_t> flag
                        wi = write_head[x]
                        while wi >= 0:
                            write_committed[wi] = <int8_t> flag
                            wi = write_next[wi]
                        if timeline is not None:
                            seg = open_segment.pop(x, None)
                            if seg is not None:
                                timeline[<Py_ssize_t> seg][3] = at_ts
                        t = child_head[x]
                        while t >= 0:
                            rtop += 1
                            if rtop >= rstack_cap:
                                rstack_cap *= 2
                                rstack = <int32_t*> realloc(rstack, rstack_cap * sizeof(int32_t))
                                if rstack == NULL:
                                    raise MemoryError()
                            rstack[rtop] = t
                            t = child_next[t]
                suspended = frames[depth].suspended
                if suspended >= 0 and tx_resolve_pos[suspended] < 0:
                    flag = S_DIRTY if tx_pending[suspended] > 0 else S_CLEAN
                    if tx_state[suspended] != flag:
                        tx_state[suspended] = <int8_t> flag
                        if timeline is not None:
                            seg = open_segment.get(suspended)
                            if seg is not None:
                                timeline[<Py_ssize_t> seg][3] = at_ts
                            timeline.append([suspended, flag, at_ts, -1])
                            open_segment[suspended] = len(timeline) - 1

            elif k == RETURN:
                depth -= 1

            elif k == TX_START:
                txid = a[i]
                if b[i] == D_EXPLICIT:
                    if frames[depth].ctx >= 0:
                        raise SimulationError(SimulationError.EXPLICIT_START_IN_TX, i)
                    t = <int> n_txs
                    tx_kind[t] = T_TOP
                    tx_demarc[t] = D_EXPLICIT
                    tx_parent[t] = -1
                    tx_root[t] = t
                    tx_start_pos[t] = i
                    tx_start_ts[t] = ts[i]
                    tx_frame[t] = frames[depth].entry_idx
                    tx_slot[t] = -1
                    tx_resolve_pos[t] = -1
                    tx_resolve_ts[t] = -1
                    tx_committed[t] = -1
                    tx_adopted[t] = txid
                    n_txs += 1
                    if timeline is not None:
                        timeline.append([t, S_CLEAN, ts[i], -1])
                        open_segment[t] = len(timeline) - 1
                    frames[depth].ctx = t
                    frames[depth].explicit_tx = t
                    explicit_open[txid] = t
                else:
                    slot = SLOT_ORPHAN
                    created_sub = frames[depth].created_sub
                    started = frames[depth].started
                    if created_sub >= 0 and tx_adopted[created_sub] < 0:
                        tx_adopted[created_sub] = txid
                        slot = SLOT_SUB
                    elif started >= 0 and tx_adopted[started] < 0:
                        tx_adopted[started] = txid
                        slot = SLOT_TOP
                    gov_known[txid] = 1
                    gov_frame[txid] = frames[depth].entry_idx
                    gov_slot[txid] = <int8_t> slot
                    rec_pos[nrec] = i
                    rec_frame[nrec] = frames[depth].entry_idx
                    rec_slot[nrec] = <int8_t> slot
                    nrec += 1

            elif k == TX_COMMIT or k == TX_ABORT:
                txid = a[i]
                t = explicit_open[txid]
                if t >= 0:
                    explicit_open[txid] = -1
                    if k == TX_ABORT:
                        tx_rollback[tx_root[t]] = 1
                    at_ts = ts[i]
                    flag = 0 if tx_rollback[tx_root[t]] else 1
                    rtop = 0
                    rstack[0] = t
                    while rtop >= 0:
                        x = rstack[rtop]
                        rtop -= 1
                        tx_resolve_pos[x] = i
                        tx_resolve_ts[x] = at_ts
                        tx_committed[x] = <int8_t> flag
                        wi = write_head[x]
                        while wi >= 0:
                            write_committed[wi] = <int8_t> flag
                            wi = write_next[wi]
                        if timeline is not None:
                            seg = open_segment.pop(x, None)
                            if seg is not None:
                                timeline[<Py_ssize_t> seg][3] = at_ts
                        x = child_head[x]
                        while x >= 0:
                            rtop += 1
                            if rtop >= rstack_cap:
                                rstack_cap *= 2
                                rstack = <int32_t*> realloc(rstack, rstack_cap * sizeof(int32_t))
                                if rstack == NULL:
                                    raise MemoryError()
                            rstack[rtop] = x
                            x = child_next[x]
                    if frames[depth].ctx == t:
                        frames[depth].ctx = -1
                    if frames[depth].explicit_tx == t:
                        frames[depth].explicit_tx = -1
                else:
                    if gov_known[txid]:
                        fidx = gov_frame[txid]
                        slot = gov_slot[txid]
                    else:
                        fidx = frames[depth].entry_idx
                        slot = SLOT_ORPHAN
                    rec_pos[nrec] = i
                    rec_frame[nrec] = <int32_t> fidx
                    rec_slot[nrec] = <int8_t> slot
                    nrec += 1
                    if k == TX_ABORT:
                        ctx = frames[depth].ctx
                        if ctx >= 0 and tx_resolve_pos[ctx] < 0:
                            tx_rollback[tx_root[ctx]] = 1
                            if ctx in markers:
                                markers[ctx].append(i)
                            else:
                                markers[ctx] = [i]

            else:  # ENTITY_READ / ENTITY_WRITE
                actor = frames[depth].ctx
                key = (<int64_t> a[i]) << 32 | <int64_t> b[i]
                holders = <list> pending.get(key)
                if holders is not None:
                    alive = []
                    actor_root = tx_root[actor] if actor >= 0 else -1
                    for hold in holders:
                        hold_tx = <int> (<tuple> hold)[0]
                        if tx_resolve_pos[hold_tx] >= 0:
                            continue
                        alive.append(hold)
                        if actor >= 0 and tx_root[hold_tx] == actor_root:
                            continue
                        # unreachable(hold_tx)?
                        if tx_state[hold_tx] == S_SUSPENDED:
                            unreach = 1
                        else:
                            unreach = 0
                            crossed = False
                            fidx = <int> depth
                            while fidx >= 0:
                                if frames[fidx].ctx == hold_tx:
                                    unreach = 1 if crossed else 0
                                    break
                                if frames[fidx].hop_remote_none:
                                    crossed = True
                                fidx = frames[fidx].parent
                        conflicts.append(
                            (i, 1 if k == ENTITY_WRITE else 0, a[i], b[i], actor, hold_tx, unreach)
                        )
                    if alive:
                        pending[key] = alive
                    else:
                        del pending[key]
                if k == ENTITY_WRITE:
                    write_pos[nw] = i
                    write_tx[nw] = actor
                    if actor >= 0:
                        write_committed[nw] = -1
                        write_next[nw] = write_head[actor]
                        write_head[actor] = <int32_t> nw
                        if holders is not None and key in pending:
                            (<list> pending[key]).append((actor, <int> nw))
                        else:
                            pending[key] = [(actor, <int> nw)]
                        tx_pending[actor] += 1
                        if tx_state[actor] != S_DIRTY:
                            tx_state[actor] = S_DIRTY
                            if timeline is not None:
                                seg = open_segment.get(actor)
                                if seg is not None:
                                    timeline[<Py_ssize_t> seg][3] = ts[i]
                                timeline.append([actor, S_DIRTY, ts[i], -1])
                                open_segment[actor] = len(timeline) - 1
                    else:
                        write_committed[nw] = 1
                    nw += 1
    finally:
        free(frames)
        free(rstack)

    # Per-frame intent columns for the rewriter's diff.
    ftc_arr = np.full(n_entries, -1, dtype=np.int8)
    fsc_arr = np.full(n_entries, -1, dtype=np.int8)
    fsak_arr = np.full(n_entries, -1, dtype=np.int8)
    fsa_arr = np.full(n_entries, -1, dtype=np.int64)
    cdef int8_t[::1] ftc = ftc_arr
    cdef int8_t[::1] fsc = fsc_arr
    cdef int8_t[::1] fsak = fsak_arr
    cdef int64_t[::1] fsa = fsa_arr
    cdef Py_ssize_t e
    cdef int root
    for e in range(ne):
        t = frame_top[e]
        if t >= 0:
            ftc[e] = tx_committed[t]
        t = frame_sub[e]
        if t >= 0:
            fsc[e] = tx_committed[t]
            root = tx_root[t]
            if tx_demarc[root] == D_EXPLICIT:
                fsak[e] = 1
                fsa[e] = tx_resolve_pos[root]
            else:
                fsak[e] = 0
                fsa[e] = tx_frame[root]

    return SimResult(
        tx_kind=tx_kind_arr[:n_txs],
        tx_demarc=tx_demarc_arr[:n_txs],
        tx_parent=tx_parent_arr[:n_txs],
        tx_root=tx_root_arr[:n_txs],
        tx_start_pos=tx_start_pos_arr[:n_txs],
        tx_start_ts=tx_start_ts_arr[:n_txs],
        tx_frame=tx_frame_arr[:n_txs],
        tx_slot=tx_slot_arr[:n_txs],
        tx_resolve_pos=tx_resolve_pos_arr[:n_txs],
        tx_resolve_ts=tx_resolve_ts_arr[:n_txs],
        tx_committed=tx_committed_arr[:n_txs],
        tx_adopted=tx_adopted_arr[:n_txs],
        entry_pos=entry_pos_arr,
        entry_flag=entry_flag_arr,
        frame_exit_pos=frame_exit_pos_arr,
        frame_top=frame_top_arr,
        frame_sub=frame_sub_arr,
        frame_top_committed=ftc_arr,
        frame_sub_committed=fsc_arr,
        frame_sub_anchor_kind=fsak_arr,
        frame_sub_anchor=fsa_arr,
        write_pos=write_pos_arr,
        write_tx=write_tx_arr,
        write_committed=write_committed_arr,
        rec_pos=rec_pos_arr[:nrec],
        rec_frame=rec_frame_arr[:nrec],
        rec_slot=rec_slot_arr[:nrec],
        conflicts=conflicts,
        violations=violations,
        markers=markers,
        timeline=[tuple(seg) for seg in timeline] if timeline is not None else None,
        remote_invocations=remote_invocations,
    )


def overhead_walk(const uint8_t[::1] kind, const int64_t[::1] ts, const int32_t[::1] a,
                  const int64_t[::1] b_cand_comp, int b_ncomp,
                  const int64_t[::1] b_conn_kind, const int64_t[::1] b_conn_prop,
                  const int64_t[::1] b_conn_over, int b_root,
                  const int64_t[::1] s_cand_comp, int s_ncomp,
                  const int64_t[::1] s_conn_kind, const int64_t[::1] s_conn_prop,
                  const int64_t[::1] s_conn_over, int s_root):
    cdef Py_ssize_t n = kind.shape[0]
    new_ts_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] new_ts = new_ts_arr
    hops = []

    cdef Py_ssize_t stack_cap = 64
    # per frame: b_comp, s_comp, changed, new_gap
    cdef int64_t* st = <int64_t*> malloc(stack_cap * 4 * sizeof(int64_t))
    if st == NULL:
        raise MemoryError()
    cdef Py_ssize_t depth = 0
    st[0] = b_root
    st[1] = s_root
    st[2] = 0
    st[3] = 0

    cdef int64_t shift = 0, old_gap, new_gap, idx
    cdef int b_k, b_p, s_k, s_p, b_comp, s_comp
    cdef int64_t b_over, s_over
    cdef bint changed
    cdef Py_ssize_t i
    cdef int k, cand

    try:
        for i in range(n):
            k = kind[i]
            if k == ENTRY:
                cand = a[i]
                b_comp = <int> b_cand_comp[cand]
                s_comp = <int> s_cand_comp[cand]
                if s_comp < 0 or b_comp < 0:
                    raise SimulationError(SimulationError.UNKNOWN_CANDIDATE, i)
                if b_comp == <int> st[depth * 4]:
                    b_k = C_LOCAL
                    b_over = 0
                    b_p = 0
                else:
                    idx = st[depth * 4] * b_ncomp + b_comp
                    b_k = <int> b_conn_kind[idx]
                    if b_k == C_NONE:
                        raise SimulationError(SimulationError.NOT_CONNECTED, i)
                    b_over = b_conn_over[idx]
                    b_p = <int> b_conn_prop[idx]
                    if b_k == C_LOCAL:
                        b_over = 0
                        b_p = 0
                if s_comp == <int> st[depth * 4 + 1]:
                    s_k = C_LOCAL
                    s_over = 0
                    s_p = 0
                else:
                    idx = st[depth * 4 + 1] * s_ncomp + s_comp
                    s_k = <int> s_conn_kind[idx]
                    if s_k == C_NONE:
                        raise SimulationError(SimulationError.NOT_CONNECTED, i)
                    s_over = s_conn_over[idx]
                    s_p = <int> s_conn_prop[idx]
                    if s_k == C_LOCAL:
                        s_over = 0
                        s_p = 0
                changed = (b_k != s_k) or (b_over != s_over) or (b_p != s_p)
                new_gap = s_over if s_k == C_REMOTE else 0
                if changed:
                    old_gap = ts[i] - ts[i - 1]
                    shift += new_gap - old_gap
                    hops.append((i, old_gap, new_gap))
                new_ts[i] = ts[i] + shift
                depth += 1
                if depth >= stack_cap:
                    stack_cap *= 2
                    st = <int64_t*> realloc(st, stack_cap * 4 * sizeof(int64_t))
                    if st == NULL:
                        raise MemoryError()
                st[depth * 4] = b_comp
                st[depth * 4 + 1] = s_comp
                st[depth * 4 + 2] = 1 if changed else 0
                st[depth * 4 + 3] = new_gap
            elif k == RETURN:
                if st[depth * 4 + 2]:
                    old_gap = ts[i] - ts[i - 1]
                    new_gap = st[depth * 4 + 3]
                    shift += new_gap - old_gap
                    hops.append((i, old_gap, new_gap))
                new_ts[i] = ts[i] + shift
                depth -= 1
            else:
                new_ts[i] = ts[i] + shift
    finally:
        free(st)

    return new_ts_arr, hops
