"""Packed, many-lane simulation of a :class:`~lichk.netlist.Netlist`."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .netlist import AND, Netlist, NodeRef

ALL_ONES = _kernels.ALL_ONES


class FlatNetlist:
    """Array form of a validated netlist, shared by the kernels."""

    def __init__(self, net: Netlist):
        net.validate()
        self.net = net
        n = len(net)
        self.num_nodes = n
        f0 = np.array(net.fan0, dtype=np.int64)
        f1 = np.array(net.fan1, dtype=np.int64)
        kinds = np.array(net.kind, dtype=np.int8)
        is_and = kinds == AND
        self.ia = np.where(is_and, f0 >> 1, 0).astype(np.int64)
        self.ib = np.where(is_and, f1 >> 1, 0).astype(np.int64)
        self.ma = np.where(is_and & (f0 & 1).astype(bool), ALL_ONES, np.uint64(0))
        self.mb = np.where(is_and & (f1 & 1).astype(bool), ALL_ONES, np.uint64(0))
        topo = net.topo_order()
        self.order = np.array([i for i in topo if net.kind[i] == AND], dtype=np.int64)
        self.input_idx = np.array(net.inputs, dtype=np.int64)
        self.latch_idx = np.array(net.latches, dtype=np.int64)
        nxt = np.array([net.fan0[i] for i in net.latches], dtype=np.int64)
        self.next_idx = nxt >> 1
        self.next_mask = np.where(nxt & 1, ALL_ONES, np.uint64(0))
        self.init = np.array([net.init[i] for i in net.latches], dtype=np.uint8)
        self.input_pos = {net.names[i]: k for k, i in enumerate(net.inputs)}
        self._levels = None

    @property
    def levels(self):
        if self._levels is None:
            level = np.zeros(self.num_nodes, dtype=np.int64)
            for i in self.order:
                level[i] = max(level[self.ia[i]], level[self.ib[i]]) + 1
            groups = []
            if len(self.order):
                lv = level[self.order]
                for k in range(1, int(lv.max()) + 1):
                    idx = self.order[lv == k]
                    groups.append((idx, self.ia[idx], self.ib[idx],
                                   self.ma[idx][:, None], self.mb[idx][:, None]))
            self._levels = groups
        return self._levels

    def lits(self, refs: Sequence[NodeRef]) -> np.ndarray:
        return np.array([r.lit for r in refs], dtype=np.int64)


class ParallelSim:
    """Runs ``lanes`` independent simulations of one netlist in lock-step."""

    def __init__(self, net: Netlist | FlatNetlist, lanes: int = 64, use_numba: bool | None = None):
        self.flat = net if isinstance(net, FlatNetlist) else FlatNetlist(net)
        self.lanes = lanes
        self.nw = max(1, (lanes + 63) // 64)
        if use_numba is None:
            use_numba = _kernels.USE_NUMBA
        self._eval = _kernels.eval_numba if use_numba else _kernels.eval_numpy
        self._run = _kernels.run_numba if use_numba else _kernels.run_numpy
        self.state = self.initial_words()

    def initial_words(self) -> np.ndarray:
        return np.where(self.flat.init[:, None].astype(bool), ALL_ONES,
                        np.uint64(0)).repeat(self.nw, axis=1).astype(np.uint64)

    def reset(self) -> None:
        self.state = self.initial_words()

    def step(self, input_words: np.ndarray) -> np.ndarray:
        """One cycle; returns the full ``(num_nodes, nw)`` value array."""
        f = self.flat
        vals = np.zeros((f.num_nodes, self.nw), dtype=np.uint64)
        vals[f.input_idx] = input_words
        vals[f.latch_idx] = self.state
        self._eval(f, vals)
        self.state = vals[f.next_idx] ^ f.next_mask[:, None]
        return vals

    def run(self, stimulus: np.ndarray, watch: Sequence[NodeRef]) -> np.ndarray:
        """Simulate ``stimulus`` of shape ``(T, num_inputs, nw)``.

        Returns the watched signals as ``(T, len(watch), nw)`` words and
        advances :attr:`state`.
        """
        stimulus = np.ascontiguousarray(stimulus, dtype=np.uint64)
        state = np.ascontiguousarray(self.state.copy())
        rec = self._run(self.flat, state, stimulus, self.flat.lits(watch))
        self.state = state
        return rec

    def random_stimulus(self, rng: np.random.Generator, steps: int,
                        fixed: Mapping[str, int] | None = None) -> np.ndarray:
        stim = rng.integers(0, 2**64, size=(steps, len(self.flat.input_idx), self.nw),
                            dtype=np.uint64)
        for name, v in (fixed or {}).items():
            stim[:, self.flat.input_pos[name], :] = ALL_ONES if v else 0
        return stim


def lane_values(words: np.ndarray, lanes: int) -> np.ndarray:
    return _kernels.unpack_lanes(words)[..., :lanes]
