"""Pure-Python kernel backend.

Reference implementation of the per-event walks; the compiled extension in
``_kernels.pyx`` mirrors this logic exactly.  Keep the two in lockstep: any
semantic change here must be ported there (``tests/test_backends.py`` guards
equivalence).

Inputs are plain Python lists of ints (the dispatcher converts from the
columnar trace arrays); see ``simtypes.SimResult`` for the output contract.
"""

from __future__ import annotations

from .simtypes import (
    A_JOIN,
    A_RUN_WITHOUT_TX,
    A_START_NEW,
    A_SUSPEND_AND_START_NEW,
    A_SUSPEND_ONLY,
    A_VIOLATION_MANDATORY,
    A_VIOLATION_NEVER,
    C_LOCAL,
    C_NONE,
    C_REMOTE,
    D_EXPLICIT,
    D_IMPLICIT,
    DECISION,
    P_SUBORDINATE,
    S_CLEAN,
    S_DIRTY,
    S_SUSPENDED,
    SLOT_ORPHAN,
    SLOT_SUB,
    SLOT_TOP,
    SimResult,
    SimulationError,
    T_SUB,
    T_TOP,
)

# Event kind codes; must match traces.py.
_USE_CASE_START = 0
_USE_CASE_END = 1
_INVOCATION = 2
_ENTRY = 3
_EXIT = 4
_RETURN = 5
_TX_START = 6
_TX_COMMIT = 7
_TX_ABORT = 8
_ENTITY_READ = 9
_ENTITY_WRITE = 10

BACKEND = "python"


def sim_walk(kind, ts, a, b, cand_comp, cand_behavior, ncomp, conn_kind, conn_prop,
             root_comp, want_timeline=False):
    """Emulate container-managed transactions along one trace.

    The walk maintains a stack of call frames; each frame carries the
    transaction context in effect for code running in it.  At every entry the
    traversed connection decides what (if anything) is inherited, the
    candidate's behavior attribute decides the action, and at the matching
    exit implicitly started transactions resolve (subordinates prepare and
    resolve with their top level, emulating the two-phase commit).
    """
    n = len(kind)

    # Transaction columns.
    tx_kind: list[int] = []
    tx_demarc: list[int] = []
    tx_parent: list[int] = []
    tx_root: list[int] = []
    tx_start_pos: list[int] = []
    tx_start_ts: list[int] = []
    tx_frame: list[int] = []
    tx_slot: list[int] = []
    tx_resolve_pos: list[int] = []
    tx_resolve_ts: list[int] = []
    tx_committed: list[int] = []
    tx_adopted: list[int] = []
    tx_rollback: list[bool] = []
    tx_children: list[list[int]] = []
    tx_writes: list[list[int]] = []
    tx_state: list[int] = []
    tx_pending: list[int] = []

    # Entry/frame columns (index = entry order).
    entry_pos: list[int] = []
    entry_flag: list[int] = []
    frame_exit_pos: list[int] = []
    frame_top: list[int] = []
    frame_sub: list[int] = []

    # Write columns.
    write_pos: list[int] = []
    write_tx: list[int] = []
    write_committed: list[int] = []

    # Recorded implicit tx events.
    rec_pos: list[int] = []
    rec_frame: list[int] = []
    rec_slot: list[int] = []

    conflicts: list[tuple] = []
    violations: list[tuple] = []
    markers: dict[int, list[int]] = {}
    timeline: list[tuple] | None = [] if want_timeline else None

    remote_invocations = 0

    # The open timeline segment of each live transaction, by index.
    open_segment: dict[int, int] = {}

    def new_tx(kindc, demarc, parent, start_pos, start_ts, frame, slot, adopted=-1):
        t = len(tx_kind)
        tx_kind.append(kindc)
        tx_demarc.append(demarc)
        tx_parent.append(parent)
        tx_root.append(t if parent < 0 else tx_root[parent])
        tx_start_pos.append(start_pos)
        tx_start_ts.append(start_ts)
        tx_frame.append(frame)
        tx_slot.append(slot)
        tx_resolve_pos.append(-1)
        tx_resolve_ts.append(-1)
        tx_committed.append(-1)
        tx_adopted.append(adopted)
        tx_rollback.append(False)
        tx_children.append([])
        tx_writes.append([])
        tx_state.append(S_CLEAN)
        tx_pending.append(0)
        if parent >= 0:
            tx_children[parent].append(t)
        if timeline is not None:
            timeline.append([t, S_CLEAN, start_ts, -1])
            open_segment[t] = len(timeline) - 1
        return t

    def resolve_tree(t, pos, at_ts):
        committed = 0 if tx_rollback[tx_root[t]] else 1
        stack = [t]
        while stack:
            x = stack.pop()
            tx_resolve_pos[x] = pos
            tx_resolve_ts[x] = at_ts
            tx_committed[x] = committed
            for wi in tx_writes[x]:
                write_committed[wi] = committed
            if timeline is not None and x in open_segment:
                timeline[open_segment[x]][3] = at_ts
                del open_segment[x]
            stack.extend(tx_children[x])

    # Frame storage (parallel lists); index 0 is the use-case root frame.
    fr_comp = [root_comp]
    fr_ctx = [-1]
    fr_started = [-1]
    fr_created_sub = [-1]
    fr_suspended = [-1]
    fr_explicit = [-1]
    fr_hop_remote_none = [False]
    fr_parent = [-1]
    fr_entry_idx = [-1]  # entry-order index, -1 for the root
    stack = [0]

    # Pending writes per entity instance: (etype_pool, eid_pool) -> list of
    # (tx, write_index); resolved entries are pruned lazily on access.
    pending: dict[tuple[int, int], list[tuple[int, int]]] = {}

    explicit_open: dict[int, int] = {}  # txid pool idx -> tx
    rec_gov: dict[int, tuple[int, int]] = {}  # txid pool idx -> (frame entry idx, slot)

    pending_inv = -1

    def tl_set(t, state, at_ts):
        if tx_state[t] == state:
            return
        tx_state[t] = state
        if timeline is not None:
            seg = open_segment.get(t)
            if seg is not None:
                timeline[seg][3] = at_ts
            timeline.append([t, state, at_ts, -1])
            open_segment[t] = len(timeline) - 1

    def unreachable(holder, frame):
        """Spec rule: holder suspended, or active only across a remote hop
        that does not propagate transactions."""
        if tx_state[holder] == S_SUSPENDED:
            return 1
        f = frame
        crossed = False
        while f >= 0:
            if fr_ctx[f] == holder:
                return 1 if crossed else 0
            if fr_hop_remote_none[f]:
                crossed = True
            f = fr_parent[f]
        return 0

    for i in range(n):
        k = kind[i]

        if k == _INVOCATION:
            pending_inv = i

        elif k == _ENTRY:
            cand = a[i]
            comp = cand_comp[cand]
            behavior = cand_behavior[cand]
            if comp < 0 or behavior < 0:
                raise SimulationError(SimulationError.UNKNOWN_CANDIDATE, i)
            cur = stack[-1]
            ccomp = fr_comp[cur]
            if comp == ccomp:
                hop_kind, hop_prop = C_LOCAL, 0
            else:
                idx = ccomp * ncomp + comp
                hop_kind = conn_kind[idx]
                hop_prop = conn_prop[idx]
                if hop_kind == C_NONE:
                    raise SimulationError(SimulationError.NOT_CONNECTED, i)
            if hop_kind == C_REMOTE:
                remote_invocations += 1

            e_idx = len(entry_pos)
            inherited = -1
            created_sub = -1
            if hop_kind == C_LOCAL:
                inherited = fr_ctx[cur]
            elif hop_prop == P_SUBORDINATE and fr_ctx[cur] >= 0:
                created_sub = new_tx(T_SUB, D_IMPLICIT, fr_ctx[cur], i, ts[i], e_idx, SLOT_SUB)
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
            elif action == A_START_NEW:
                started = new_tx(T_TOP, D_IMPLICIT, -1, i, ts[i], e_idx, SLOT_TOP)
                ctx = started
            elif action == A_SUSPEND_AND_START_NEW:
                tl_set(inherited, S_SUSPENDED, ts[i])
                suspended = inherited
                started = new_tx(T_TOP, D_IMPLICIT, -1, i, ts[i], e_idx, SLOT_TOP)
                ctx = started
            elif action == A_SUSPEND_ONLY:
                tl_set(inherited, S_SUSPENDED, ts[i])
                suspended = inherited
            # A_RUN_WITHOUT_TX: ctx stays -1 (nothing was inherited).

            entry_pos.append(i)
            entry_flag.append(1 if (started >= 0 or created_sub >= 0) else 0)
            frame_exit_pos.append(-1)
            frame_top.append(started)
            frame_sub.append(created_sub)

            fr_comp.append(comp)
            fr_ctx.append(ctx)
            fr_started.append(started)
            fr_created_sub.append(created_sub)
            fr_suspended.append(suspended)
            fr_explicit.append(-1)
            fr_hop_remote_none.append(hop_kind == C_REMOTE and hop_prop != P_SUBORDINATE)
            fr_parent.append(cur)
            fr_entry_idx.append(e_idx)
            stack.append(len(fr_comp) - 1)
            pending_inv = -1

        elif k == _EXIT:
            f = stack[-1]
            frame_exit_pos[fr_entry_idx[f]] = i
            at_ts = ts[i]
            started = fr_started[f]
            if started >= 0:
                resolve_tree(started, i, at_ts)
            # A subordinate created here is now prepared; it resolves with its
            # top level when that commits or aborts.
            susp = fr_suspended[f]
            if susp >= 0 and tx_resolve_pos[susp] < 0:
                tl_set(susp, S_DIRTY if tx_pending[susp] > 0 else S_CLEAN, at_ts)

        elif k == _RETURN:
            stack.pop()

        elif k == _TX_START:
            txid = a[i]
            cur = stack[-1]
            if b[i] == D_EXPLICIT:
                if fr_ctx[cur] >= 0:
                    raise SimulationError(SimulationError.EXPLICIT_START_IN_TX, i)
                t = new_tx(T_TOP, D_EXPLICIT, -1, i, ts[i], fr_entry_idx[cur], -1, adopted=txid)
                fr_ctx[cur] = t
                fr_explicit[cur] = t
                explicit_open[txid] = t
            else:
                # Recorded container event: adopt the id onto this frame's
                # simulated context if one is still unnamed, else orphan.
                slot = SLOT_ORPHAN
                sub = fr_created_sub[cur]
                started = fr_started[cur]
                if sub >= 0 and tx_adopted[sub] < 0:
                    tx_adopted[sub] = txid
                    slot = SLOT_SUB
                elif started >= 0 and tx_adopted[started] < 0:
                    tx_adopted[started] = txid
                    slot = SLOT_TOP
                rec_gov[txid] = (fr_entry_idx[cur], slot)
                rec_pos.append(i)
                rec_frame.append(fr_entry_idx[cur])
                rec_slot.append(slot)

        elif k == _TX_COMMIT:
            txid = a[i]
            t = explicit_open.pop(txid, None)
            if t is not None:
                cur = stack[-1]
                resolve_tree(t, i, ts[i])
                if fr_ctx[cur] == t:
                    fr_ctx[cur] = -1
                if fr_explicit[cur] == t:
                    fr_explicit[cur] = -1
            else:
                gov = rec_gov.get(txid, (fr_entry_idx[stack[-1]], SLOT_ORPHAN))
                rec_pos.append(i)
                rec_frame.append(gov[0])
                rec_slot.append(gov[1])

        elif k == _TX_ABORT:
            txid = a[i]
            t = explicit_open.pop(txid, None)
            if t is not None:
                cur = stack[-1]
                tx_rollback[tx_root[t]] = True
                resolve_tree(t, i, ts[i])
                if fr_ctx[cur] == t:
                    fr_ctx[cur] = -1
                if fr_explicit[cur] == t:
                    fr_explicit[cur] = -1
            else:
                gov = rec_gov.get(txid, (fr_entry_idx[stack[-1]], SLOT_ORPHAN))
                rec_pos.append(i)
                rec_frame.append(gov[0])
                rec_slot.append(gov[1])
                # Positional rollback-only mark on the context in effect.
                ctx = fr_ctx[stack[-1]]
                if ctx >= 0 and tx_resolve_pos[ctx] < 0:
                    tx_rollback[tx_root[ctx]] = True
                    markers.setdefault(ctx, []).append(i)

        elif k == _ENTITY_READ or k == _ENTITY_WRITE:
            et = a[i]
            eid = b[i]
            cur = stack[-1]
            actor = fr_ctx[cur]
            is_write = 1 if k == _ENTITY_WRITE else 0
            key = (et, eid)
            holders = pending.get(key)
            if holders:
                alive = []
                actor_root = tx_root[actor] if actor >= 0 else -1
                for h, wi in holders:
                    if tx_resolve_pos[h] >= 0:
                        continue
                    alive.append((h, wi))
                    if actor >= 0 and tx_root[h] == actor_root:
                        continue  # same (distributed) transaction sees its own writes
                    conflicts.append((i, is_write, et, eid, actor, h, unreachable(h, cur)))
                if alive:
                    pending[key] = alive
                else:
                    del pending[key]
            if is_write:
                wi = len(write_pos)
                write_pos.append(i)
                write_tx.append(actor)
                if actor >= 0:
                    write_committed.append(-1)
                    tx_writes[actor].append(wi)
                    pending.setdefault(key, []).append((actor, wi))
                    tx_pending[actor] += 1
                    tl_set(actor, S_DIRTY, ts[i])
                else:
                    write_committed.append(1)  # NO_TX writes commit immediately

        # USE_CASE_START / USE_CASE_END need no transaction handling.

    # Per-frame intent columns for the rewriter's diff.
    ne = len(entry_pos)
    frame_top_committed = [-1] * ne
    frame_sub_committed = [-1] * ne
    frame_sub_anchor_kind = [-1] * ne
    frame_sub_anchor = [-1] * ne
    for e in range(ne):
        t = frame_top[e]
        if t >= 0:
            frame_top_committed[e] = tx_committed[t]
        s = frame_sub[e]
        if s >= 0:
            frame_sub_committed[e] = tx_committed[s]
            root = tx_root[s]
            if tx_demarc[root] == D_EXPLICIT:
                frame_sub_anchor_kind[e] = 1
                frame_sub_anchor[e] = tx_resolve_pos[root]
            else:
                frame_sub_anchor_kind[e] = 0
                frame_sub_anchor[e] = tx_frame[root]

    return SimResult(
        tx_kind=tx_kind, tx_demarc=tx_demarc, tx_parent=tx_parent, tx_root=tx_root,
        tx_start_pos=tx_start_pos, tx_start_ts=tx_start_ts, tx_frame=tx_frame, tx_slot=tx_slot,
        tx_resolve_pos=tx_resolve_pos, tx_resolve_ts=tx_resolve_ts,
        tx_committed=tx_committed, tx_adopted=tx_adopted,
        entry_pos=entry_pos, entry_flag=entry_flag, frame_exit_pos=frame_exit_pos,
        frame_top=frame_top, frame_sub=frame_sub,
        frame_top_committed=frame_top_committed, frame_sub_committed=frame_sub_committed,
        frame_sub_anchor_kind=frame_sub_anchor_kind, frame_sub_anchor=frame_sub_anchor,
        write_pos=write_pos, write_tx=write_tx, write_committed=write_committed,
        rec_pos=rec_pos, rec_frame=rec_frame, rec_slot=rec_slot,
        conflicts=conflicts, violations=violations, markers=markers,
        timeline=[tuple(seg) for seg in timeline] if timeline is not None else None,
        remote_invocations=remote_invocations,
    )


def overhead_walk(kind, ts, a, base_cand_comp, base_ncomp, base_conn_kind, base_conn_prop,
                  base_conn_over, base_root, scn_cand_comp, scn_ncomp, scn_conn_kind,
                  scn_conn_prop, scn_conn_over, scn_root):
    """Recompute timestamps for hops whose connection the scenario changed.

    For every invocation-entry (and exit-return) pair: resolve the traversed
    connection under both models; where the effective connection differs in
    any attribute, the gap becomes the scenario connection's overhead and all
    later events shift accordingly.  Unchanged hops keep their observed gaps.

    Returns (new_ts, hops) where hops lists (position, old_gap, new_gap) for
    each changed request/response half.
    """
    n = len(kind)
    new_ts = [0] * n
    hops: list[tuple[int, int, int]] = []
    shift = 0

    # Stack entries: (base comp, scn comp, changed, new_gap)
    stack = [(base_root, scn_root, False, 0)]

    for i in range(n):
        k = kind[i]
        if k == _ENTRY:
            cand = a[i]
            b_comp = base_cand_comp[cand]
            s_comp = scn_cand_comp[cand]
            if s_comp < 0:
                raise SimulationError(SimulationError.UNKNOWN_CANDIDATE, i)
            if b_comp < 0:
                raise SimulationError(SimulationError.UNKNOWN_CANDIDATE, i)
            b_cur = stack[-1][0]
            s_cur = stack[-1][1]
            if b_comp == b_cur:
                b_triple = (C_LOCAL, 0, 0)
            else:
                idx = b_cur * base_ncomp + b_comp
                bk = base_conn_kind[idx]
                if bk == C_NONE:
                    raise SimulationError(SimulationError.NOT_CONNECTED, i)
                b_triple = (bk, base_conn_over[idx], base_conn_prop[idx])
            if s_comp == s_cur:
                s_triple = (C_LOCAL, 0, 0)
            else:
                idx = s_cur * scn_ncomp + s_comp
                sk = scn_conn_kind[idx]
                if sk == C_NONE:
                    raise SimulationError(SimulationError.NOT_CONNECTED, i)
                s_triple = (sk, scn_conn_over[idx], scn_conn_prop[idx])
            changed = b_triple != s_triple
            new_gap = s_triple[1] if s_triple[0] == C_REMOTE else 0
            if changed:
                old_gap = ts[i] - ts[i - 1]
                shift += new_gap - old_gap
                hops.append((i, old_gap, new_gap))
            new_ts[i] = ts[i] + shift
            stack.append((b_comp, s_comp, changed, new_gap))
        elif k == _RETURN:
            _, _, changed, new_gap = stack.pop()
            if changed:
                old_gap = ts[i] - ts[i - 1]
                shift += new_gap - old_gap
                hops.append((i, old_gap, new_gap))
            new_ts[i] = ts[i] + shift
        else:
            new_ts[i] = ts[i] + shift

    return new_ts, hops
