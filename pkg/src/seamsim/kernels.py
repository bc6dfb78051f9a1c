"""Kernel backend selection.

The hot per-event walks exist twice: a compiled Cython extension
(``seamsim._kernels``) and a pure-Python twin (``seamsim._kernels_py``).
The compiled backend is picked at import time when available; set
``SEAMSIM_PURE=1`` to force the fallback (used by the backend benchmark and
the equivalence tests).  ``BACKEND`` reports which one is active.

Both backends implement the same two functions with identical semantics:

* ``sim_walk``     - transaction emulation over one trace (see simtypes).
* ``overhead_walk`` - timestamp rewriting for scenario-changed connections.

This module normalizes inputs and outputs so callers never see the
difference: columns go in as numpy arrays and come back as numpy arrays.
"""

from __future__ import annotations

import os

import numpy as np

from .simtypes import SimResult

if os.environ.get("SEAMSIM_PURE"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "c"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

_ARRAY_COLS = (
    "tx_kind", "tx_demarc", "tx_parent", "tx_root", "tx_start_pos", "tx_start_ts",
    "tx_frame", "tx_slot", "tx_resolve_pos", "tx_resolve_ts", "tx_committed", "tx_adopted",
    "entry_pos", "entry_flag", "frame_exit_pos", "frame_top", "frame_sub",
    "frame_top_committed", "frame_sub_committed", "frame_sub_anchor_kind", "frame_sub_anchor",
    "write_pos", "write_tx", "write_committed", "rec_pos", "rec_frame", "rec_slot",
)


def _normalize(res: SimResult) -> SimResult:
    """List columns (pure backend) become int64 arrays; arrays pass through."""
    for name in _ARRAY_COLS:
        value = getattr(res, name)
        if not isinstance(value, np.ndarray):
            setattr(res, name, np.asarray(value, dtype=np.int64))
    return res


def sim_walk(kind, ts, a, b, cand_comp, cand_behavior, ncomp, conn_kind, conn_prop,
             root_comp, want_timeline=False) -> SimResult:
    if BACKEND == "c":
        res = _impl.sim_walk(kind, ts, a, b, cand_comp, cand_behavior, int(ncomp),
                             conn_kind, conn_prop, int(root_comp), bool(want_timeline))
    else:
        res = _impl.sim_walk(
            kind.tolist(), ts.tolist(), a.tolist(), b.tolist(),
            cand_comp.tolist(), cand_behavior.tolist(), int(ncomp),
            conn_kind.tolist(), conn_prop.tolist(), int(root_comp), bool(want_timeline),
        )
    return _normalize(res)


def overhead_walk(kind, ts, a, base_tables, scn_tables):
    """Returns (new_ts: int64 array, hops: list of (pos, old_gap, new_gap))."""
    (b_cand_comp, b_nc, b_kind, b_prop, b_over, b_root) = base_tables
    (s_cand_comp, s_nc, s_kind, s_prop, s_over, s_root) = scn_tables
    if BACKEND == "c":
        new_ts, hops = _impl.overhead_walk(
            kind, ts, a, b_cand_comp, int(b_nc), b_kind, b_prop, b_over, int(b_root),
            s_cand_comp, int(s_nc), s_kind, s_prop, s_over, int(s_root),
        )
        return np.asarray(new_ts, dtype=np.int64), hops
    new_ts, hops = _impl.overhead_walk(
        kind.tolist(), ts.tolist(), a.tolist(),
        b_cand_comp.tolist(), int(b_nc), b_kind.tolist(), b_prop.tolist(), b_over.tolist(), int(b_root),
        s_cand_comp.tolist(), int(s_nc), s_kind.tolist(), s_prop.tolist(), s_over.tolist(), int(s_root),
    )
    return np.asarray(new_ts, dtype=np.int64), hops
