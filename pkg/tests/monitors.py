"""Simulation testbenches and protocol monitors for elaborated designs."""

from __future__ import annotations

from collections import deque

import numpy as np

from lichk.elaborate import ElaboratedDesign, channel_fifo
from lichk.lang import ast as A
from lichk.netlist import NodeRef
from lichk.sim import ParallelSim, lane_values
from lichk.words import value_of


class StreamBench:
    """Cycle-by-cycle testbench on the reference simulator.

    Each external In port is fed from a list of values as a well-behaved LI
    source (valid held, data advanced only after a transfer); each external
    Out port is a sink whose ready follows ``ready(t)``.
    """

    def __init__(self, elab: ElaboratedDesign, streams: dict[str, list[int]], ready=lambda name, t: 1,
                 valid=lambda name, t: 1):
        self.elab = elab
        self.net = elab.netlist
        self.streams = {k: list(v) for k, v in streams.items()}
        self.pos = {k: 0 for k in streams}
        self.ready, self.valid = ready, valid
        self.state = self.net.initial_state()
        self.received: dict[str, list[int]] = {n: [] for n, d in elab.external_dirs.items() if d == "out"}
        self.t = 0
        self.vals = None

    def sig(self, bus: str) -> int:
        return value_of(self.vals, self.net.buses[bus])

    def step(self) -> list[int]:
        inp = {}
        offered = {}
        for name, d in self.elab.external_dirs.items():
            if d == "in":
                s, p = self.streams.get(name, []), self.pos.get(name, 0)
                v = int(p < len(s) and self.valid(name, self.t))
                data = s[p] if p < len(s) else 0
                offered[name] = v
                inp[f"{name}.vld"] = v
                width = len(self.elab.external_ports[name].dat)
                for i in range(width):
                    inp[f"{name}.dat[{i}]"] = (data >> i) & 1
            else:
                inp[f"{name}.rdy"] = int(self.ready(name, self.t))
        self.state, self.vals = self.net.simulate_step(self.state, inp)
        for name, d in self.elab.external_dirs.items():
            ps = self.elab.external_ports[name]
            if d == "in":
                if offered[name] and self.vals[ps.rdy.index] ^ ps.rdy.negated:
                    self.pos[name] += 1
            elif inp[f"{name}.rdy"] and self.vals[ps.vld.index] ^ ps.vld.negated:
                self.received[name].append(value_of(self.vals, ps.dat))
        self.t += 1
        return self.vals


def _bits_to_ints(bits: np.ndarray) -> np.ndarray:
    """(T, W, lanes) MSB-first bits -> (T, lanes) integers."""
    w = bits.shape[1]
    weights = (1 << np.arange(w - 1, -1, -1, dtype=np.int64))[None, :, None]
    return (bits.astype(np.int64) * weights).sum(axis=1)


def _random_run(net, watch: list[NodeRef], steps: int, lanes: int, seed: int, chunk: int = 4096):
    sim = ParallelSim(net, lanes=lanes)
    rng = np.random.default_rng(seed)
    out = []
    done = 0
    while done < steps:
        n = min(chunk, steps - done)
        stim = sim.random_stimulus(rng, n)
        # vary the stall pressure per chunk: AND in extra random words for some inputs
        if rng.random() < 0.5:
            stim &= sim.random_stimulus(rng, n)
        out.append(lane_values(sim.run(stim, watch), lanes))
        done += n
    return np.concatenate(out, axis=0)  # (T, len(watch), lanes)


def check_channel_trace(src_vld, src_rdy, src_dat, dst_vld, dst_rdy, dst_dat, occ, capacity) -> dict[str, int]:
    """Reference-queue monitor on one lane.  Returns violation counts."""
    v = {"order": 0, "conservation": 0, "spurious": 0, "flags": 0}
    q: deque[int] = deque()
    T = len(src_vld)
    for t in range(T):
        if occ is not None and occ[t] != len(q):
            v["conservation"] += 1
        if capacity and (dst_vld[t] != (len(q) > 0) or src_rdy[t] != (len(q) < capacity)):
            v["flags"] += 1
        push = src_vld[t] and src_rdy[t]
        pop = dst_vld[t] and dst_rdy[t]
        if capacity == 0:
            if push != pop or (push and src_dat[t] != dst_dat[t]):
                v["order"] += 1
            continue
        if pop:
            if not q:
                v["spurious"] += 1
            elif q.popleft() != dst_dat[t]:
                v["order"] += 1
        if push:
            q.append(int(src_dat[t]))
    return v


def fifo_monitor(width: int, capacity: int, steps: int = 100_000, lanes: int = 64, seed: int = 0) -> dict:
    """Random-stall simulation of a stand-alone FIFO; ``steps`` counts lane-cycles."""
    net = channel_fifo(width, capacity)
    b = net.buses
    dat_in = [net.lookup(f"push.dat[{i}]") for i in reversed(range(width))]
    watch = [net.lookup("push.vld")] + b["push.rdy"] + dat_in + b["pop.vld"] + [net.lookup("pop.rdy")] \
        + b["pop.dat"] + b["fifo.__occ"]
    T = -(-steps // lanes)
    rec = _random_run(net, watch, T, lanes, seed)
    k = 0

    def take(n):
        nonlocal k
        part = rec[:, k:k + n, :]
        k += n
        return part

    s_vld, s_rdy = take(1)[:, 0], take(1)[:, 0]
    s_dat = _bits_to_ints(take(width))
    d_vld = take(1)[:, 0]
    d_rdy = take(1)[:, 0]
    d_dat = _bits_to_ints(take(width))
    occ = _bits_to_ints(take(len(b["fifo.__occ"])))
    total = {"order": 0, "conservation": 0, "spurious": 0, "flags": 0, "pushes": 0, "pops": 0,
             "full_cycles": 0, "steps": T * lanes}
    for ln in range(lanes):
        r = check_channel_trace(s_vld[:, ln], s_rdy[:, ln], s_dat[:, ln], d_vld[:, ln], d_rdy[:, ln],
                                d_dat[:, ln], occ[:, ln], capacity)
        for key, val in r.items():
            total[key] += val
    total["pushes"] = int((s_vld & s_rdy).sum())
    total["pops"] = int((d_vld & d_rdy).sum())
    total["full_cycles"] = int((occ == capacity).sum())
    return total


def blocking_push_ports(elab: ElaboratedDesign) -> list[tuple[str, str]]:
    """(instance, port) pairs whose only operations are blocking pushes."""
    out = []
    for inst in elab.ast.instances:
        proc = elab.ast.process(inst.process)
        ops: dict[str, set] = {}
        for s in A.walk(proc.body):
            if isinstance(s, A.PORT_OPS):
                ops.setdefault(s.port, set()).add(type(s))
        out += [(inst.name, p) for p, kinds in ops.items() if kinds == {A.Push}]
    return out


def design_monitor(elab: ElaboratedDesign, steps: int = 100_000, lanes: int = 64, seed: int = 0) -> dict:
    """Random external stimulus on a whole design: per-channel FIFO monitors
    plus the blocking-push stability monitor."""
    net = elab.netlist
    b = net.buses
    watch: list[NodeRef] = []
    slots: dict[str, slice] = {}

    def add(name, refs):
        slots[name] = slice(len(watch), len(watch) + len(refs))
        watch.extend(refs)

    for ch in elab.ast.channels:
        src, dst = f"{ch.src_inst}.{ch.src_port}", f"{ch.dst_inst}.{ch.dst_port}"
        for end in (src, dst):
            for f in ("vld", "rdy", "dat"):
                if f"{end}.{f}" not in slots:
                    add(f"{end}.{f}", b[f"{end}.{f}"])
        if ch.capacity:
            add(f"{ch.name}.__occ", b[f"{ch.name}.__occ"])
    stable = blocking_push_ports(elab)
    for inst, port in stable:
        for f in ("vld", "rdy", "dat"):
            nm = f"{inst}.{port}.{f}"
            if nm not in slots:
                add(nm, b[nm])
    T = -(-steps // lanes)
    rec = _random_run(net, watch, T, lanes, seed) if watch else np.zeros((T, 0, lanes), dtype=np.uint8)

    def col(name):
        part = rec[:, slots[name], :]
        return part[:, 0] if part.shape[1] == 1 and not name.endswith(".dat") else _bits_to_ints(part)

    total = {"order": 0, "conservation": 0, "spurious": 0, "flags": 0, "stability": 0, "transfers": 0,
             "steps": T * lanes}
    for ch in elab.ast.channels:
        src, dst = f"{ch.src_inst}.{ch.src_port}", f"{ch.dst_inst}.{ch.dst_port}"
        cols = [col(f"{src}.vld"), col(f"{src}.rdy"), col(f"{src}.dat"),
                col(f"{dst}.vld"), col(f"{dst}.rdy"), col(f"{dst}.dat")]
        occ = col(f"{ch.name}.__occ") if ch.capacity else None
        for ln in range(lanes):
            r = check_channel_trace(*(c[:, ln] for c in cols), None if occ is None else occ[:, ln], ch.capacity)
            for key, val in r.items():
                total[key] += val
        total["transfers"] += int((cols[0] & cols[1]).sum())
    for inst, port in stable:
        vld, rdy, dat = (col(f"{inst}.{port}.{f}") for f in ("vld", "rdy", "dat"))
        waiting = (vld[:-1] == 1) & (rdy[:-1] == 0)
        broken = waiting & ((vld[1:] == 0) | (dat[1:] != dat[:-1]))
        total["stability"] += int(broken.sum())
    return total
