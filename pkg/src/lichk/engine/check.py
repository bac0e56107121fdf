"""Bounded model checking, k-induction and counterexample traces."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..model import CheckModel, as_model
from ..netlist import Netlist, NodeRef
from ..words import value_of
from .invariants import find_invariants
from .sat import Solver, SolverTimeout
from .unroll import FrameMap, Unroller, reduce_model


class EngineTimeout(Exception):
    def __init__(self, last_depth: int):
        super().__init__(f"timed out after completing depth {last_depth}")
        self.last_depth = last_depth


class ReplayError(Exception):
    """A counterexample failed to reproduce on the reference simulator."""


@dataclass
class Trace:
    signals: list[str]
    widths: dict[str, int]
    frames: list[dict[str, int]]
    inputs: list[dict[str, int]]
    bads_hit: list[str] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.frames) - 1

    def column(self, name: str) -> list[int]:
        return [f[name] for f in self.frames]


@dataclass
class Falsified:
    depth: int
    trace: Trace
    name = "falsified"


@dataclass
class ProvenInductive:
    k: int
    invariants: int = 0
    name = "proven"


@dataclass
class BoundReached:
    bound: int
    name = "bound_reached"


Verdict = Falsified | ProvenInductive | BoundReached


def _input_values(fm: FrameMap, model_bits: list[bool], depth: int) -> list[dict[str, int]]:
    net = fm.net
    out = []
    for t in range(depth + 1):
        out.append({net.names[i]: int(model_bits[fm.vars[(i, t)]]) for i in net.inputs})
    return out


def simulate_trace(model: CheckModel, inputs: list[dict[str, int]]) -> tuple[list[list[int]], list[int]]:
    """Node values and latch vectors per frame from reset; unnamed inputs default to 0."""
    net = model.netlist
    state = net.initial_state()
    names = net.input_names()
    vals, states = [], []
    for frame in inputs:
        states.append(state.latch_values)
        full = {n: frame.get(n, 0) for n in names}
        state, v = net.simulate_step(state, full)
        vals.append(v)
    return vals, states


def extract_trace(model: CheckModel | Netlist, frame_map: FrameMap, sat_model: list[bool],
                  depth: int | None = None) -> Trace:
    m = as_model(model)
    if depth is None:
        depth = max(t for (_, t) in frame_map.vars)
    partial = _input_values(frame_map, sat_model, depth)
    full_names = m.netlist.input_names()
    inputs = [{n: f.get(n, 0) for n in full_names} for f in partial]
    vals, _ = simulate_trace(m, inputs)
    # the reduced netlist keeps latch names: cross-check the solver's state
    red = frame_map.net
    for t in range(depth + 1):
        for i in red.latches:
            full_idx = m.netlist.lookup(red.names[i]).index
            if vals[t][full_idx] != int(sat_model[frame_map.vars[(i, t)]]):
                raise ReplayError(f"latch {red.names[i]} disagrees with the solver in frame {t}")
    signals = list(m.signal_map)
    widths = {s: len(m.signal_map[s]) for s in signals}
    frames = [{s: value_of(v, m.signal_map[s]) for s in signals} for v in vals]
    last = vals[-1]
    hit = [nm for nm, r in m.netlist.bads if last[r.index] ^ int(r.negated)]
    trace = Trace(signals, widths, frames, inputs, hit)
    if not replay(m, trace):
        raise ReplayError("extracted counterexample does not reach a bad state")
    return trace


def replay(model: CheckModel | Netlist, trace: Trace) -> bool:
    """Re-simulate the trace inputs; True iff constraints hold throughout,
    some bad is asserted in the final frame and every recorded signal value
    matches the simulation."""
    m = as_model(model)
    net = m.netlist
    if not trace.inputs:
        return False
    try:
        vals, _ = simulate_trace(m, trace.inputs)
    except Exception:
        return False
    for v in vals:
        if not all(v[c.index] ^ int(c.negated) for c in net.constraints):
            return False
    last = vals[-1]
    if not any(last[r.index] ^ int(r.negated) for _, r in net.bads):
        return False
    if trace.signals:
        if len(trace.frames) != len(vals):
            return False
        for s in trace.signals:
            refs = m.signal_map.get(s)
            if refs is None:
                if not net.has_name(s):
                    return False
                refs = [net.lookup(s)]
            if any(value_of(v, refs) != f.get(s) for v, f in zip(vals, trace.frames)):
                return False
    return True


class _Bmc:
    """Incremental BMC over the reduced model: one solver, one frame at a time."""

    def __init__(self, model: CheckModel, net: Netlist, seed=None):
        self.model = model
        self.u = Unroller(net)
        self.solver = Solver(seed=seed)
        self.depth_done = -1

    def check(self, t: int, deadline=None) -> Falsified | None:
        u, s = self.u, self.solver
        u.extend_to(t)
        b = u.bad_lit(t)
        act = u.cnf.new_var()
        u.cnf.clauses.append([-act, b])
        u.feed(s)
        try:
            sat = s.solve([act], deadline=deadline)
        except SolverTimeout:
            raise EngineTimeout(self.depth_done) from None
        if sat:
            trace = extract_trace(self.model, u.frame_map, s.model, t)
            return Falsified(t, trace)
        u.cnf.clauses.append([-act])
        u.feed(s)
        self.depth_done = t
        return None


def _check_deadline(deadline, last_depth):
    # the solver polls its deadline only every few hundred conflicts
    if deadline is not None and time.monotonic() > deadline:
        raise EngineTimeout(last_depth)


def bmc(model: CheckModel | Netlist, max_bound: int, timeout: float | None = None,
        seed: int | None = None, progress=None) -> Verdict:
    """Check depths 0..max_bound in order; the first hit is a shortest counterexample."""
    if max_bound < 0:
        raise ValueError("bound must be >= 0")
    m = as_model(model)
    deadline = None if timeout is None else time.monotonic() + timeout
    net, _ = reduce_model(m)
    if not net.bads:
        return BoundReached(max_bound)
    runner = _Bmc(m, net, seed)
    for t in range(max_bound + 1):
        _check_deadline(deadline, runner.depth_done)
        res = runner.check(t, deadline)
        if progress:
            progress(t)
        if res is not None:
            return res
    return BoundReached(max_bound)


def k_induction(model: CheckModel | Netlist, max_k: int, timeout: float | None = None,
                seed: int | None = None, strengthen: bool = True, progress=None) -> Verdict:
    """k-induction with simple-path constraints.

    With ``strengthen`` the induction step additionally assumes invariants
    that were proved inductive beforehand (see :mod:`.invariants`).
    """
    if max_k < 1:
        raise ValueError("k must be >= 1")
    m = as_model(model)
    deadline = None if timeout is None else time.monotonic() + timeout
    net, _ = reduce_model(m)
    if not net.bads:
        return ProvenInductive(0)
    base = _Bmc(m, net, seed)
    invariants: list[NodeRef] = []
    step_net = net
    if strengthen and net.latches:
        try:
            step_net, invariants = find_invariants(net, m.latch_pairs, deadline=deadline, seed=seed)
        except SolverTimeout:
            raise EngineTimeout(-1) from None
    step = Unroller(step_net, init=False)
    ssolver = Solver(seed=seed)
    latches = step_net.latches
    for k in range(1, max_k + 1):
        _check_deadline(deadline, base.depth_done)
        res = base.check(k - 1, deadline)
        if progress:
            progress(k - 1)
        if res is not None:
            return res
        # step frames 0..k; bad excluded from frames < k
        while step.frames <= k:
            t = step.add_frame()
            for inv in invariants:
                step.cnf.clauses.append([step.lit(inv, t)])
            for j in range(t):
                diff = []
                for i in latches:
                    a, b = step.frame_map.vars[(i, j)], step.frame_map.vars[(i, t)]
                    d = step.cnf.new_var()
                    step.cnf.clauses += [[-d, a, b], [-d, -a, -b]]
                    diff.append(d)
                step.cnf.clauses.append(diff)
        prev_bad = step.bad_lit(k - 1)
        step.cnf.clauses.append([-prev_bad])
        b = step.bad_lit(k)
        act = step.cnf.new_var()
        step.cnf.clauses.append([-act, b])
        step.feed(ssolver)
        try:
            sat = ssolver.solve([act], deadline=deadline)
        except SolverTimeout:
            raise EngineTimeout(base.depth_done) from None
        if not sat:
            return ProvenInductive(k, len(invariants))
        step.cnf.clauses.append([-act])
    return BoundReached(max_k)
