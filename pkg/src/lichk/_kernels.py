"""Bit-parallel evaluation kernels.

Signal values are packed 64 lanes per ``uint64`` word; a value array has
shape ``(num_nodes, num_words)``.  Each kernel has a loop form, compiled
with numba when available, and a vectorized numpy form that evaluates one
logic level at a time.  Set ``LICHK_NUMBA=0`` to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("LICHK_NUMBA", "1") != "0"


def _eval_loop(order, ia, ib, ma, mb, vals):
    nw = vals.shape[1]
    for k in range(order.shape[0]):
        i = order[k]
        a = ia[i]
        b = ib[i]
        x = ma[i]
        y = mb[i]
        for w in range(nw):
            vals[i, w] = (vals[a, w] ^ x) & (vals[b, w] ^ y)


def _run_loop(order, ia, ib, ma, mb, input_idx, latch_idx, next_idx, next_mask,
              state, stimulus, watch_idx, watch_mask, vals, record):
    # stimulus: (T, num_inputs, nw); record: (T, num_watch, nw)
    steps = stimulus.shape[0]
    nw = vals.shape[1]
    for t in range(steps):
        for j in range(input_idx.shape[0]):
            for w in range(nw):
                vals[input_idx[j], w] = stimulus[t, j, w]
        for j in range(latch_idx.shape[0]):
            for w in range(nw):
                vals[latch_idx[j], w] = state[j, w]
        _eval_loop_inner(order, ia, ib, ma, mb, vals)
        for j in range(watch_idx.shape[0]):
            for w in range(nw):
                record[t, j, w] = vals[watch_idx[j], w] ^ watch_mask[j]
        for j in range(latch_idx.shape[0]):
            for w in range(nw):
                state[j, w] = vals[next_idx[j], w] ^ next_mask[j]


if HAVE_NUMBA:
    _eval_numba = njit(cache=True, nogil=True)(_eval_loop)
    _eval_loop_inner = _eval_numba
    _run_numba = njit(cache=True, nogil=True)(_run_loop)
else:  # pragma: no cover
    _eval_numba = None
    _run_numba = None
    _eval_loop_inner = _eval_loop


def eval_numba(flat, vals):
    _eval_numba(flat.order, flat.ia, flat.ib, flat.ma, flat.mb, vals)


def eval_numpy(flat, vals):
    for idx, a, b, x, y in flat.levels:
        vals[idx] = (vals[a] ^ x) & (vals[b] ^ y)


def run_numba(flat, state, stimulus, watch_lits):
    watch_idx = (watch_lits >> 1).astype(np.int64)
    watch_mask = np.where(watch_lits & 1, ALL_ONES, np.uint64(0))
    vals = np.zeros((flat.num_nodes, stimulus.shape[2]), dtype=np.uint64)
    record = np.zeros((stimulus.shape[0], len(watch_idx), stimulus.shape[2]), dtype=np.uint64)
    _run_numba(flat.order, flat.ia, flat.ib, flat.ma, flat.mb, flat.input_idx,
               flat.latch_idx, flat.next_idx, flat.next_mask, state, stimulus,
               watch_idx, watch_mask, vals, record)
    return record


def run_numpy(flat, state, stimulus, watch_lits):
    watch_idx = (watch_lits >> 1).astype(np.int64)
    watch_mask = np.where(watch_lits & 1, ALL_ONES, np.uint64(0))[:, None]
    nw = stimulus.shape[2]
    vals = np.zeros((flat.num_nodes, nw), dtype=np.uint64)
    record = np.zeros((stimulus.shape[0], len(watch_idx), nw), dtype=np.uint64)
    nmask = flat.next_mask[:, None]
    for t in range(stimulus.shape[0]):
        vals[flat.input_idx] = stimulus[t]
        vals[flat.latch_idx] = state
        eval_numpy(flat, vals)
        record[t] = vals[watch_idx] ^ watch_mask
        state[:] = vals[flat.next_idx] ^ nmask
    return record


evaluate = eval_numba if USE_NUMBA else eval_numpy
run = run_numba if USE_NUMBA else run_numpy


def unpack_lanes(words: np.ndarray) -> np.ndarray:
    """``(..., nw)`` uint64 -> ``(..., nw * 64)`` uint8 lane bits (lane 0 first)."""
    w = np.ascontiguousarray(words, dtype="<u8")
    bits = np.unpackbits(w.view(np.uint8), axis=-1, bitorder="little")
    return bits


def pack_lanes(bits: np.ndarray) -> np.ndarray:
    """Inverse of :func:`unpack_lanes`; the lane axis is padded to a multiple of 64."""
    bits = np.asarray(bits, dtype=np.uint8)
    lanes = bits.shape[-1]
    pad = (-lanes) % 64
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), np.uint8)], axis=-1)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)
