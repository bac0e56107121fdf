"""Time-frame expansion of a netlist into CNF (Tseitin encoding)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TextIO

from ..model import CheckModel, as_model
from ..netlist import AND, Netlist, NodeRef, coi_with_map
from .cnf import CnfFormula

MAX_LITERALS = 10**8


class UnrollLimitError(Exception):
    pass


@dataclass
class FrameMap:
    """``(node index, frame) -> CNF variable`` for the unrolled netlist."""

    net: Netlist
    vars: dict[tuple[int, int], int] = field(default_factory=dict)

    def lit(self, ref: NodeRef, t: int) -> int:
        v = self.vars[(ref.index, t)]
        return -v if ref.negated else v

    def write(self, fh: TextIO) -> None:
        for (idx, t), v in sorted(self.vars.items(), key=lambda kv: kv[1]):
            fh.write(f"{idx} {t} {v}\n")

    @classmethod
    def read(cls, net: Netlist, text: str) -> "FrameMap":
        fm = cls(net)
        for ln in text.splitlines():
            if ln.strip():
                idx, t, v = map(int, ln.split())
                fm.vars[(idx, t)] = v
        return fm


class Unroller:
    """Adds one time frame at a time.

    With ``init=True`` latches start at their reset values in frame 0;
    otherwise frame-0 state is unconstrained (for induction steps).
    Constraints are asserted in every frame.
    """

    def __init__(self, net: Netlist, init: bool = True, constraints: bool = True):
        net.validate()
        self.net = net
        self.init = init
        self.with_constraints = constraints
        self.cnf = CnfFormula()
        self.frame_map = FrameMap(net)
        self.frames = 0
        self._ands = [i for i in net.topo_order() if net.kind[i] == AND]
        self._fed = 0

    def lit(self, ref: NodeRef, t: int) -> int:
        return self.frame_map.lit(ref, t)

    def add_frame(self) -> int:
        t = self.frames
        net, cnf, fm = self.net, self.cnf, self.frame_map.vars
        c = cnf.new_var()
        fm[(0, t)] = c
        cnf.clauses.append([-c])
        for i in net.inputs:
            fm[(i, t)] = cnf.new_var()
        for i in net.latches:
            v = cnf.new_var()
            fm[(i, t)] = v
            if t == 0:
                if self.init:
                    cnf.clauses.append([v if net.init[i] else -v])
            else:
                n = self.lit(net.latch_next(i), t - 1)
                cnf.clauses.append([-v, n])
                cnf.clauses.append([v, -n])
        f0, f1 = net.fan0, net.fan1
        clauses = cnf.clauses
        for i in self._ands:
            v = cnf.new_var()
            fm[(i, t)] = v
            a, b = f0[i], f1[i]
            la = fm[(a >> 1, t)] * (-1 if a & 1 else 1)
            lb = fm[(b >> 1, t)] * (-1 if b & 1 else 1)
            clauses.append([-v, la])
            clauses.append([-v, lb])
            if la == -lb:
                continue
            clauses.append([v, -la, -lb] if la != lb else [v, -la])
        if self.with_constraints:
            for ref in net.constraints:
                clauses.append([self.lit(ref, t)])
        self.frames += 1
        if len(clauses) * 3 > MAX_LITERALS and cnf.num_literals > MAX_LITERALS:
            raise UnrollLimitError(f"unrolling exceeds {MAX_LITERALS} literals")
        return t

    def extend_to(self, k: int) -> None:
        while self.frames <= k:
            self.add_frame()

    def bad_lit(self, t: int) -> int:
        """A literal equivalent to "some bad holds in frame ``t``"."""
        lits = [self.lit(r, t) for _, r in self.net.bads]
        if not lits:
            return self.lit(NodeRef(0), t)
        if len(lits) == 1:
            return lits[0]
        o = self.cnf.new_var()
        self.cnf.clauses.append([-o] + lits)
        for x in lits:
            self.cnf.clauses.append([o, -x])
        return o

    def feed(self, solver) -> None:
        """Stream clauses not yet passed to ``solver``."""
        solver.ensure_vars(self.cnf.num_vars)
        cl = self.cnf.clauses
        for k in range(self._fed, len(cl)):
            solver.add_clause(cl[k])
        self._fed = len(cl)


def reduce_model(model: CheckModel | Netlist) -> tuple[Netlist, dict[int, NodeRef]]:
    """Cone of influence of the bads and constraints."""
    m = as_model(model)
    net = m.netlist
    roots = [r for _, r in net.bads] + list(net.constraints)
    return coi_with_map(net, roots)


def tseitin_unroll(model: CheckModel | Netlist, k: int, coi: bool = True) -> tuple[CnfFormula, FrameMap]:
    """CNF that is satisfiable iff some bad can hold in frame ``k``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    net = reduce_model(model)[0] if coi else as_model(model).netlist
    u = Unroller(net)
    u.extend_to(k)
    u.cnf.clauses.append([u.bad_lit(k)])
    u.cnf.check()
    return u.cnf, u.frame_map
