"""Inductive invariant discovery for strengthening k-induction.

Candidates are small clauses over latches that hold on every state seen in
random simulation from reset:

* constant latches,
* binary clauses ``a | b`` over latch literals (this includes equivalences
  and one-hot exclusions),
* for declared latch pairs ``(x, y)``, the equality ``x == y`` (even when both
  are constant on the samples) and conditional equalities
  ``g -> (x == y)`` guarded by a single latch literal ``g``.

The surviving set is then pruned to its largest mutually inductive subset:
repeatedly ask the solver for a constraint-respecting transition from a
state satisfying every candidate to a state violating one, and drop the
violated candidates.  What remains holds in the reset state and is
preserved by every transition, so it holds in every reachable state.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import _kernels
from ..netlist import INPUT, Netlist, NodeRef
from ..sim import ParallelSim
from .sat import Solver
from .unroll import Unroller

MAX_CANDIDATES = 30000


def _sample_states(net: Netlist, lanes: int, steps: int, seed: int) -> np.ndarray:
    """Latch vectors visited by random constraint-respecting runs, shape (n, L)."""
    sim = ParallelSim(net, lanes=lanes)
    rng = np.random.default_rng(seed)
    fixed = {}
    other = []
    for c in net.constraints:
        if net.kind[c.index] == INPUT:
            fixed[net.names[c.index]] = 0 if c.negated else 1
        else:
            other.append(c)
    alive = np.full(sim.nw, _kernels.ALL_ONES, dtype=np.uint64)
    samples = []
    f = sim.flat
    for _ in range(steps):
        stim = sim.random_stimulus(rng, 1, fixed)[0]
        samples.append((sim.state.copy(), alive.copy()))
        vals = sim.step(stim)
        for c in other:
            alive &= vals[c.index] ^ (_kernels.ALL_ONES if c.negated else np.uint64(0))
    samples.append((sim.state.copy(), alive.copy()))
    rows = []
    for state, live in samples:
        bits = _kernels.unpack_lanes(state)[:, :lanes]
        mask = _kernels.unpack_lanes(live[None, :])[0, :lanes].astype(bool)
        rows.append(bits[:, mask].T)
    del f
    return np.concatenate(rows, axis=0).astype(np.uint8)


def _candidates(net: Netlist, samples: np.ndarray, pairs: Sequence[tuple[int, int]]):
    """Clauses (as tuples of latch literals ``(position, negated)``) true on all samples."""
    L = samples.shape[1]
    s = samples.astype(np.int32)
    ns = 1 - s
    out: list[tuple[tuple[int, bool], ...]] = []
    const = {}
    for l in range(L):
        if not s[:, l].any():
            out.append(((l, True),))
            const[l] = 0
        elif s[:, l].all():
            out.append(((l, False),))
            const[l] = 1
    var = [l for l in range(L) if l not in const]
    if var:
        sv, nv = s[:, var], ns[:, var]
        # count of samples violating (lit_a | lit_b) for each literal polarity pair
        both0 = nv.T @ nv      # a | b
        a0b1 = nv.T @ sv       # a | ~b
        a1b1 = sv.T @ sv       # ~a | ~b
        n = len(var)
        for ii in range(n):
            for jj in range(ii + 1, n):
                a, b = var[ii], var[jj]
                if both0[ii, jj] == 0:
                    out.append(((a, False), (b, False)))
                if a0b1[ii, jj] == 0:
                    out.append(((a, False), (b, True)))
                if a0b1[jj, ii] == 0:
                    out.append(((a, True), (b, False)))
                if a1b1[ii, jj] == 0:
                    out.append(((a, True), (b, True)))
    if pairs:
        guards = [(l, neg) for l in var for neg in (False, True)]
        gmat = np.stack([ns[:, l] if neg else s[:, l] for l, neg in guards], axis=1)
        for x, y in pairs:
            if x in const or y in const:
                # constants alone may fail to be inductive; the pair equality can still be
                if x in const and y in const and const[x] == const[y]:
                    out.append(((x, False), (y, True)))
                    out.append(((x, True), (y, False)))
                continue
            neq = (s[:, x] != s[:, y]).astype(np.int32)
            if not neq.any():
                continue  # plain equivalence is already a binary candidate
            viol = gmat.T @ neq
            for gi in np.flatnonzero(viol == 0):
                g, neg = guards[gi]
                if g in (x, y):
                    continue
                out.append(((g, not neg), (x, True), (y, False)))
                out.append(((g, not neg), (x, False), (y, True)))
    return out


def find_invariants(net: Netlist, latch_pairs: Sequence[tuple[str, str]] = (),
                    deadline: float | None = None, seed: int | None = None,
                    lanes: int = 512, steps: int = 96) -> tuple[Netlist, list[NodeRef]]:
    """Return a copy of ``net`` extended with invariant nodes, and those nodes."""
    aug, remap = net.finalize()
    latch_refs = [NodeRef(i) for i in aug.latches]
    pos = {aug.names[i]: k for k, i in enumerate(aug.latches)}
    pairs = [(pos[a], pos[b]) for a, b in latch_pairs if a in pos and b in pos]
    samples = _sample_states(aug, lanes, steps, seed or 0)
    cands = _candidates(aug, samples, pairs)
    if len(cands) > MAX_CANDIDATES:
        cands = sorted(cands, key=len)[:MAX_CANDIDATES]
    if not cands:
        return aug, []
    refs = []
    for clause in cands:
        lits = [~latch_refs[l] if neg else latch_refs[l] for l, neg in clause]
        refs.append(aug.add_or_all(lits))
    init = [aug.init[i] for i in aug.latches]

    def holds_at_init(clause):
        return any(init[l] != int(neg) for l, neg in clause)

    live = [k for k, c in enumerate(cands) if holds_at_init(c)]
    u = Unroller(aug, init=False, constraints=False)
    u.extend_to(1)
    for ref in aug.constraints:
        u.cnf.clauses.append([u.lit(ref, 0)])
    solver = Solver(seed=seed)
    while live:
        act = u.cnf.new_var()
        u.cnf.clauses.append([-act] + [-u.lit(refs[k], 1) for k in live])
        u.feed(solver)
        assumptions = [u.lit(refs[k], 0) for k in live] + [act]
        if not solver.solve(assumptions, deadline=deadline):
            break
        model = solver.model
        live = [k for k in live if solver.value(u.lit(refs[k], 1))]
        u.cnf.clauses.append([-act])
        del model
    return aug, [refs[k] for k in live]
