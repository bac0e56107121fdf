"""Incremental CDCL SAT solver.

Two watched literals, first-UIP learning with clause minimization, VSIDS
decision order, phase saving, Luby restarts and LBD-based learnt-clause
reduction.  Clauses may be added between calls to :meth:`Solver.solve`,
which also accepts assumption literals.

Literals are DIMACS-style signed integers at the API boundary; internally
variable ``v`` has literals ``2v`` (positive) and ``2v + 1`` (negative).
"""

from __future__ import annotations

import heapq
import os
import random
import time
from typing import Iterable, Sequence

from .cnf import CnfFormula


class SolverTimeout(Exception):
    pass


class SolverError(Exception):
    """Internal soundness failure (a model that does not satisfy the input)."""


def _luby(i: int) -> int:
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class Solver:
    def __init__(self, seed: int | None = None):
        if seed is None:
            seed = int(os.environ.get("LICHK_SEED", "0"))
        self.rng = random.Random(seed)
        self.num_vars = 0
        self.val: list[int] = [-1, -1]       # per literal: 1 true, 0 false, -1 unassigned
        self.level: list[int] = [0]
        self.reason: list[list[int] | None] = [None]
        self.activity: list[float] = [0.0]
        self.phase: list[int] = [1]          # saved literal offset (1 = negative)
        self.watches: list[list[list[int]]] = [[], []]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.clauses: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self.units: list[int] = []
        self.lbd: dict[int, int] = {}
        self.heap: list[tuple[float, int]] = []
        self.var_inc = 1.0
        self.var_decay = 0.95
        self.ok = True
        self.model: list[bool] = []
        self.conflict_core: list[int] = []
        self.max_learnts = 4000
        self.stats = {"conflicts": 0, "decisions": 0, "propagations": 0, "solves": 0}
        self.deadline: float | None = None

    # -- variables and clauses ------------------------------------------------

    def new_var(self) -> int:
        self.num_vars += 1
        v = self.num_vars
        self.val += [-1, -1]
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(self.rng.random() * 1e-5)
        self.phase.append(1)
        self.watches += [[], []]
        heapq.heappush(self.heap, (-self.activity[v], v))
        return v

    def ensure_vars(self, n: int) -> None:
        while self.num_vars < n:
            self.new_var()

    @staticmethod
    def _lit(x: int) -> int:
        return 2 * x if x > 0 else -2 * x + 1

    def add_clause(self, clause: Iterable[int]) -> bool:
        """Add a clause of DIMACS literals; returns False once the formula is UNSAT."""
        if not self.ok:
            return False
        lits = set()
        for x in clause:
            if x == 0:
                raise ValueError("literal 0 is not allowed inside a clause")
            self.ensure_vars(abs(x))
            lits.add(self._lit(x))
        if self.trail_lim:
            self._cancel_until(0)
        val = self.val
        out = []
        for p in lits:
            if p ^ 1 in lits or val[p] == 1:
                return True
            if val[p] != 0:
                out.append(p)
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            self.units.append(out[0])
            self._enqueue(out[0], None)
            if self._propagate() is not None:
                self.ok = False
            return self.ok
        out.sort()
        self.clauses.append(out)
        self.watches[out[0]].append(out)
        self.watches[out[1]].append(out)
        return True

    def add_cnf(self, cnf: CnfFormula) -> bool:
        self.ensure_vars(cnf.num_vars)
        for c in cnf.clauses:
            if not self.add_clause(c):
                return False
        return True

    # -- core -------------------------------------------------------------------

    def _enqueue(self, p: int, reason) -> None:
        self.val[p] = 1
        self.val[p ^ 1] = 0
        v = p >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(p)

    def _propagate(self):
        val = self.val
        watches = self.watches
        trail = self.trail
        level = self.level
        reason = self.reason
        dl = len(self.trail_lim)
        qhead = self.qhead
        conflict = None
        props = 0
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            props += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if val[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    q = c[k]
                    if val[q] != 0:
                        c[1] = q
                        c[k] = false_lit
                        watches[q].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if val[first] == 0:
                        conflict = c
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                    else:
                        val[first] = 1
                        val[first ^ 1] = 0
                        v = first >> 1
                        level[v] = dl
                        reason[v] = c
                        trail.append(first)
            del ws[j:]
            if conflict is not None:
                break
        self.qhead = len(trail) if conflict is not None else qhead
        self.stats["propagations"] += props
        return conflict

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        val, phase, heap, act = self.val, self.phase, self.heap, self.activity
        for p in self.trail[start:]:
            val[p] = -1
            val[p ^ 1] = -1
            v = p >> 1
            phase[v] = p & 1
            self.reason[v] = None
            heapq.heappush(heap, (-act[v], v))
        if len(heap) > 8 * self.num_vars + 1024:
            self.heap = [(-act[k], k) for k in range(1, self.num_vars + 1) if val[2 * k] == -1]
            heapq.heapify(self.heap)
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _bump(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for k in range(1, self.num_vars + 1):
                act[k] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[k], k) for k in range(1, self.num_vars + 1) if self.val[2 * k] == -1]
            heapq.heapify(self.heap)
        elif self.val[2 * v] == -1:
            heapq.heappush(self.heap, (-act[v], v))

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        level, reason, trail = self.level, self.reason, self.trail
        dl = len(self.trail_lim)
        seen = set()
        learnt = [0]
        counter = 0
        p = -1
        idx = len(trail) - 1
        c = confl
        while True:
            for q in (c if p == -1 else c[1:]):
                v = q >> 1
                if v not in seen and level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if level[v] >= dl:
                        counter += 1
                    else:
                        learnt.append(q)
            while (trail[idx] >> 1) not in seen:
                idx -= 1
            p = trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            c = reason[p >> 1]
            # reason clauses keep the implied literal at position 0
            if c[0] != p:
                k = c.index(p)
                c[0], c[k] = c[k], c[0]
        learnt[0] = p ^ 1
        # minimization: drop literals implied by the rest of the clause
        keep = [learnt[0]]
        in_clause = {q >> 1 for q in learnt}
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None or not all((x >> 1) in in_clause or level[x >> 1] == 0 for x in r if x != q ^ 1):
                keep.append(q)
        learnt = keep
        if len(learnt) == 1:
            back = 0
        else:
            best = 1
            for k in range(2, len(learnt)):
                if level[learnt[k] >> 1] > level[learnt[best] >> 1]:
                    best = k
            learnt[1], learnt[best] = learnt[best], learnt[1]
            back = level[learnt[1] >> 1]
        self.var_inc /= self.var_decay
        return learnt, back

    def _analyze_final(self, a: int) -> list[int]:
        """Assumption literals that together force assumption ``a`` false."""
        core = [a]
        if not self.trail_lim:
            return core
        seen = {a >> 1}
        for q in reversed(self.trail[self.trail_lim[0]:]):
            v = q >> 1
            if v not in seen:
                continue
            r = self.reason[v]
            if r is None:
                if self.level[v] > 0 and q != a ^ 1:
                    core.append(q)
            else:
                for x in r:
                    if self.level[x >> 1] > 0:
                        seen.add(x >> 1)
        return core

    def _pick_branch(self) -> int:
        heap, val = self.heap, self.val
        while heap:
            _, v = heapq.heappop(heap)
            if val[2 * v] == -1:
                return 2 * v + self.phase[v]
        return -1

    def _reduce_db(self) -> None:
        locked = set()
        for p in self.trail:
            r = self.reason[p >> 1]
            if r is not None:
                locked.add(id(r))
        lbd = self.lbd
        cand = sorted(self.learnts, key=lambda c: (lbd.get(id(c), 99), len(c)))
        half = len(cand) // 2
        keep, drop = cand[:half], cand[half:]
        kept_drop = [c for c in drop if id(c) in locked or lbd.get(id(c), 99) <= 2]
        dropped = {id(c) for c in drop} - {id(c) for c in kept_drop}
        self.learnts = keep + kept_drop
        for k in dropped:
            lbd.pop(k, None)
        for ws_lit in range(len(self.watches)):
            ws = self.watches[ws_lit]
            if ws:
                self.watches[ws_lit] = [c for c in ws if id(c) not in dropped]

    def _search(self, assumptions: Sequence[int], conflict_budget: int) -> bool | None:
        conflicts = 0
        stats = self.stats
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                stats["conflicts"] += 1
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self.lbd[id(learnt)] = len({self.level[q >> 1] for q in learnt})
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._enqueue(learnt[0], learnt)
                if stats["conflicts"] % 256 == 0 and self.deadline is not None \
                        and time.monotonic() > self.deadline:
                    raise SolverTimeout()
                continue
            if conflicts >= conflict_budget:
                self._cancel_until(0)
                return None
            if len(self.learnts) - len(self.trail) >= self.max_learnts:
                self._reduce_db()
                self.max_learnts = int(self.max_learnts * 1.1)
            p = -1
            while len(self.trail_lim) < len(assumptions):
                a = assumptions[len(self.trail_lim)]
                if self.val[a] == 1:
                    self.trail_lim.append(len(self.trail))
                elif self.val[a] == 0:
                    self.conflict_core = self._analyze_final(a)
                    return False
                else:
                    p = a
                    break
            if p == -1:
                p = self._pick_branch()
                if p == -1:
                    return True
                stats["decisions"] += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(p, None)

    def solve(self, assumptions: Sequence[int] = (), deadline: float | None = None) -> bool:
        """Return True (SAT, see :attr:`model`) or False (UNSAT under assumptions)."""
        self.stats["solves"] += 1
        self.model = []
        self.conflict_core = []
        if not self.ok:
            return False
        self.deadline = deadline
        for a in assumptions:
            self.ensure_vars(abs(a))
        assume = [self._lit(a) for a in assumptions]
        self._cancel_until(0)
        if self._propagate() is not None:
            self.ok = False
            return False
        restart = 0
        try:
            while True:
                res = self._search(assume, 100 * _luby(restart))
                restart += 1
                if res is not None:
                    break
            if res:
                self.model = [False] + [self.val[2 * v] == 1 for v in range(1, self.num_vars + 1)]
                self._verify_model()
        finally:
            self._cancel_until(0)
        return res

    def _verify_model(self) -> None:
        m = self.model
        for q in self.units:
            if m[q >> 1] == bool(q & 1):
                raise SolverError("model violates a unit clause")
        for c in self.clauses:
            if not any(m[q >> 1] != bool(q & 1) for q in c):
                raise SolverError("model violates an input clause")

    def value(self, x: int) -> bool:
        """Truth value of DIMACS literal ``x`` in the last model."""
        return self.model[x] if x > 0 else not self.model[-x]

    def core(self) -> list[int]:
        """DIMACS assumption literals in the last UNSAT core."""
        return [-(q >> 1) if q & 1 else (q >> 1) for q in self.conflict_core]


def sat_solve(cnf: CnfFormula, seed: int | None = None, deadline: float | None = None):
    """Decide ``cnf``; returns a model list ``[None, x1, ..., xn]`` of bools or None if UNSAT."""
    s = Solver(seed=seed)
    s.ensure_vars(cnf.num_vars)
    if not s.add_cnf(cnf):
        return None
    if not s.solve(deadline=deadline):
        return None
    model = s.model[: cnf.num_vars + 1]
    if not cnf.satisfied_by(model):
        raise SolverError("model does not satisfy the formula")
    return model
