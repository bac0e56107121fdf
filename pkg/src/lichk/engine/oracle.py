"""Explicit-state breadth-first reachability, used as an independent oracle.

Every reachable latch vector is expanded under all ``2**num_inputs`` input
assignments at once, packed 64 assignments per word and evaluated by the
bit-parallel kernels.  Only practical for small models (a few dozen
latches reachable in bulk, up to ~20 inputs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..model import CheckModel, as_model
from ..netlist import Netlist
from ..sim import FlatNetlist
from .unroll import reduce_model

MAX_INPUTS = 22
MAX_LATCHES = 62


class OracleLimitError(Exception):
    pass


@dataclass
class BfsResult:
    falsified: bool
    depth: int | None
    states: int
    levels: int

    @property
    def safe(self) -> bool:
        return not self.falsified


def _input_patterns(n_in: int, nw: int) -> np.ndarray:
    lanes = np.arange(nw * 64, dtype=np.uint64)
    bits = ((lanes[None, :] >> np.arange(n_in, dtype=np.uint64)[:, None]) & np.uint64(1)).astype(np.uint8)
    return _kernels.pack_lanes(bits)


def bfs(model: CheckModel | Netlist, max_depth: int | None = None, max_states: int = 1 << 22,
        batch_lanes: int = 1 << 16, use_numba: bool | None = None, coi: bool = True) -> BfsResult:
    """Shortest depth at which some bad holds, or ``falsified=False`` once the
    reachable set is exhausted (or ``max_depth`` is passed)."""
    m = as_model(model)
    net = reduce_model(m)[0] if coi else m.netlist
    flat = FlatNetlist(net)
    n_in, n_l = len(net.inputs), len(net.latches)
    if n_in > MAX_INPUTS or n_l > MAX_LATCHES:
        raise OracleLimitError(f"{n_in} inputs / {n_l} latches is beyond the explicit-state oracle")
    if use_numba is None:
        use_numba = _kernels.USE_NUMBA
    evaluate = _kernels.eval_numba if use_numba else _kernels.eval_numpy
    combos = 1 << n_in
    nw = max(1, combos // 64)
    pattern = _input_patterns(n_in, nw)
    per_batch = max(1, batch_lanes // (nw * 64))
    shifts = np.arange(n_l, dtype=np.int64)
    bad_lits = [r for _, r in net.bads]
    init_code = int(sum(int(net.init[i]) << k for k, i in enumerate(net.latches)))
    visited = {init_code}
    frontier = np.array([init_code], dtype=np.int64)
    depth = 0
    while len(frontier):
        new_codes = []
        for start in range(0, len(frontier), per_batch):
            codes = frontier[start:start + per_batch]
            S = len(codes)
            vals = np.zeros((flat.num_nodes, S * nw), dtype=np.uint64)
            if n_in:
                vals[flat.input_idx] = np.tile(pattern, (1, S))
            if n_l:
                st = ((codes[None, :] >> shifts[:, None]) & 1).astype(bool)
                vals[flat.latch_idx] = np.repeat(np.where(st, _kernels.ALL_ONES, np.uint64(0)), nw, axis=1)
            evaluate(flat, vals)

            def lanes_of(ref):
                w = vals[ref.index] ^ (_kernels.ALL_ONES if ref.negated else np.uint64(0))
                return _kernels.unpack_lanes(w).reshape(S, nw * 64)[:, :combos]

            ok = np.ones((S, combos), dtype=bool)
            for c in net.constraints:
                ok &= lanes_of(c).astype(bool)
            hit = np.zeros((S, combos), dtype=bool)
            for r in bad_lits:
                hit |= lanes_of(r).astype(bool)
            if (hit & ok).any():
                return BfsResult(True, depth, len(visited), depth + 1)
            if max_depth is not None and depth >= max_depth:
                continue
            if n_l:
                nxt_words = vals[flat.next_idx] ^ flat.next_mask[:, None]
                bits = _kernels.unpack_lanes(nxt_words).reshape(n_l, S, nw * 64)[:, :, :combos]
                code = np.zeros((S, combos), dtype=np.int64)
                for k in range(n_l):
                    code |= bits[k].astype(np.int64) << k
                new_codes.append(np.unique(code[ok]))
        if max_depth is not None and depth >= max_depth:
            break
        if not new_codes:
            break
        cand = np.unique(np.concatenate(new_codes))
        fresh = [int(c) for c in cand if int(c) not in visited]
        visited.update(fresh)
        if len(visited) > max_states:
            raise OracleLimitError(f"more than {max_states} reachable states")
        frontier = np.array(fresh, dtype=np.int64)
        depth += 1
    return BfsResult(False, None, len(visited), depth + 1)
