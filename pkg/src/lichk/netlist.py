"""Bit-level sequential netlist (an and-inverter graph with latches).

Every signal is a :class:`NodeRef`: a node index plus a complement flag.
Node 0 is the constant ``False``; ``~FALSE`` is ``True``.  Latches are built
in two phases (declare, then :meth:`Netlist.set_latch_next`) so that state
can feed back into its own next-state logic.  Builder-only *wires* are
placeholders that are driven later; :meth:`Netlist.finalize` substitutes
them away and reports any combinational cycle they close.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

CONST, INPUT, AND, LATCH, WIRE = 0, 1, 2, 3, 4
KIND_NAMES = {CONST: "ConstFalse", INPUT: "Input", AND: "And", LATCH: "Latch", WIRE: "Wire"}


class NetlistError(Exception):
    """Malformed netlist or misuse of the builder API."""


class DuplicateNameError(NetlistError):
    pass


class DanglingLatchError(NetlistError):
    pass


class CombinationalCycleError(NetlistError):
    def __init__(self, message: str, cycle: Sequence[str] = ()):
        super().__init__(message)
        self.cycle = list(cycle)


class MissingInputError(NetlistError):
    pass


class NodeRef(NamedTuple):
    index: int
    negated: bool = False

    def __invert__(self) -> "NodeRef":
        return NodeRef(self.index, not self.negated)

    @property
    def lit(self) -> int:
        return 2 * self.index + (1 if self.negated else 0)

    @staticmethod
    def from_lit(lit: int) -> "NodeRef":
        return NodeRef(lit >> 1, bool(lit & 1))

    def __repr__(self) -> str:
        return f"{'~' if self.negated else ''}n{self.index}"


FALSE = NodeRef(0, False)
TRUE = NodeRef(0, True)


@dataclass(frozen=True)
class Node:
    kind: int
    a: NodeRef | None = None
    b: NodeRef | None = None
    name: str | None = None
    init: int | None = None

    @property
    def kind_name(self) -> str:
        return KIND_NAMES[self.kind]


@dataclass(frozen=True)
class SimState:
    latch_values: tuple[int, ...]


class Netlist:
    """Mutable builder; treat as read-only once :meth:`validate` has passed.

    With ``strash=True`` (the default) :meth:`add_and` folds constants and
    trivial operand pairs and returns an existing node for a repeated
    ``(a, b)`` pair, in either operand order.
    """

    def __init__(self, strash: bool = True):
        self.strash = strash
        self.kind: list[int] = [CONST]
        self.fan0: list[int] = [0]
        self.fan1: list[int] = [0]
        self.names: dict[int, str] = {}
        self.init: dict[int, int] = {}
        self.inputs: list[int] = []
        self.latches: list[int] = []
        self.constraints: list[NodeRef] = []
        self.bads: list[tuple[str, NodeRef]] = []
        self.buses: dict[str, list[NodeRef]] = {}
        self._by_name: dict[str, int] = {}
        self._strash: dict[tuple[int, int], int] = {}
        self._topo: list[int] | None = None

    # -- construction ---------------------------------------------------

    def __len__(self) -> int:
        return len(self.kind)

    def _new(self, kind: int, a: int = 0, b: int = 0) -> int:
        self.kind.append(kind)
        self.fan0.append(a)
        self.fan1.append(b)
        self._topo = None
        return len(self.kind) - 1

    def _claim(self, name: str, idx: int) -> None:
        if name in self._by_name:
            raise DuplicateNameError(f"name {name!r} already used")
        self._by_name[name] = idx
        self.names[idx] = name

    def _check(self, ref: NodeRef) -> None:
        if not 0 <= ref.index < len(self.kind):
            raise NetlistError(f"reference {ref!r} out of range")

    def add_input(self, name: str) -> NodeRef:
        if name in self._by_name:
            raise DuplicateNameError(f"input name {name!r} already used")
        idx = self._new(INPUT)
        self._claim(name, idx)
        self.inputs.append(idx)
        return NodeRef(idx)

    def add_and(self, a: NodeRef, b: NodeRef) -> NodeRef:
        self._check(a)
        self._check(b)
        if self.strash:
            if a == FALSE or b == FALSE or a == ~b:
                return FALSE
            if a == TRUE or a == b:
                return b
            if b == TRUE:
                return a
            key = (a.lit, b.lit) if a.lit < b.lit else (b.lit, a.lit)
            hit = self._strash.get(key)
            if hit is not None:
                return NodeRef(hit)
            idx = self._new(AND, key[0], key[1])
            self._strash[key] = idx
            return NodeRef(idx)
        return NodeRef(self._new(AND, a.lit, b.lit))

    def add_latch(self, init: int, name: str) -> NodeRef:
        if init not in (0, 1):
            raise NetlistError(f"latch init must be 0 or 1, got {init!r}")
        idx = self._new(LATCH, -1, 0)
        self._claim(name, idx)
        self.init[idx] = init
        self.latches.append(idx)
        return NodeRef(idx)

    def set_latch_next(self, latch: NodeRef, nxt: NodeRef) -> None:
        self._check(latch)
        self._check(nxt)
        if self.kind[latch.index] != LATCH or latch.negated:
            raise NetlistError(f"{latch!r} is not a latch output")
        if self.fan0[latch.index] != -1:
            raise NetlistError(f"next of latch {self.names[latch.index]!r} already set")
        self.fan0[latch.index] = nxt.lit
        self._topo = None

    def add_wire(self, name: str | None = None) -> NodeRef:
        """Placeholder signal, driven later by :meth:`drive_wire`."""
        idx = self._new(WIRE, -1, 0)
        if name is not None:
            self.names[idx] = name
        return NodeRef(idx)

    def drive_wire(self, wire: NodeRef, src: NodeRef) -> None:
        self._check(src)
        if self.kind[wire.index] != WIRE or wire.negated:
            raise NetlistError(f"{wire!r} is not a wire")
        if self.fan0[wire.index] != -1:
            raise NetlistError(f"wire {wire!r} already driven")
        self.fan0[wire.index] = src.lit

    def add_constraint(self, ref: NodeRef) -> None:
        self._check(ref)
        self.constraints.append(ref)

    def add_bad(self, name: str, ref: NodeRef) -> None:
        self._check(ref)
        if any(n == name for n, _ in self.bads):
            raise DuplicateNameError(f"bad {name!r} already defined")
        self.bads.append((name, ref))

    def add_bus(self, name: str, refs_msb_first: Sequence[NodeRef]) -> None:
        for r in refs_msb_first:
            self._check(r)
        self.buses[name] = list(refs_msb_first)

    # -- derived gates ----------------------------------------------------

    def add_or(self, a: NodeRef, b: NodeRef) -> NodeRef:
        return ~self.add_and(~a, ~b)

    def add_xor(self, a: NodeRef, b: NodeRef) -> NodeRef:
        return self.add_or(self.add_and(a, ~b), self.add_and(~a, b))

    def add_mux(self, sel: NodeRef, then: NodeRef, other: NodeRef) -> NodeRef:
        if then == other:
            return then
        return self.add_or(self.add_and(sel, then), self.add_and(~sel, other))

    def add_and_all(self, refs: Iterable[NodeRef]) -> NodeRef:
        acc = TRUE
        for r in refs:
            acc = self.add_and(acc, r)
        return acc

    def add_or_all(self, refs: Iterable[NodeRef]) -> NodeRef:
        return ~self.add_and_all(~r for r in refs)

    # -- queries ----------------------------------------------------------

    def node(self, index: int) -> Node:
        k = self.kind[index]
        if k == AND:
            return Node(AND, NodeRef.from_lit(self.fan0[index]), NodeRef.from_lit(self.fan1[index]))
        if k == LATCH:
            nxt = self.fan0[index]
            return Node(LATCH, None if nxt < 0 else NodeRef.from_lit(nxt),
                        name=self.names[index], init=self.init[index])
        if k == INPUT:
            return Node(INPUT, name=self.names[index])
        if k == WIRE:
            drv = self.fan0[index]
            return Node(WIRE, None if drv < 0 else NodeRef.from_lit(drv), name=self.names.get(index))
        return Node(CONST)

    @property
    def nodes(self) -> list[Node]:
        return [self.node(i) for i in range(len(self.kind))]

    def lookup(self, name: str) -> NodeRef:
        return NodeRef(self._by_name[name])

    def has_name(self, name: str) -> bool:
        return name in self._by_name

    def latch_next(self, latch_index: int) -> NodeRef:
        return NodeRef.from_lit(self.fan0[latch_index])

    @property
    def num_ands(self) -> int:
        return sum(1 for k in self.kind if k == AND)

    def input_names(self) -> list[str]:
        return [self.names[i] for i in self.inputs]

    def latch_names(self) -> list[str]:
        return [self.names[i] for i in self.latches]

    def initial_state(self) -> SimState:
        return SimState(tuple(self.init[i] for i in self.latches))

    def fanins(self, index: int) -> tuple[int, ...]:
        """Combinational fanin node indices (latches are sources)."""
        k = self.kind[index]
        if k == AND:
            return (self.fan0[index] >> 1, self.fan1[index] >> 1)
        if k == WIRE and self.fan0[index] >= 0:
            return (self.fan0[index] >> 1,)
        return ()

    # -- checking -----------------------------------------------------------

    def topo_order(self) -> list[int]:
        """Combinational evaluation order; raises on a combinational cycle."""
        if self._topo is not None:
            return self._topo
        n = len(self.kind)
        color = [0] * n  # 0 new, 1 on stack, 2 done
        order: list[int] = []
        for root in range(n):
            if color[root]:
                continue
            stack = [(root, 0)]
            color[root] = 1
            while stack:
                node, i = stack[-1]
                fins = self.fanins(node)
                if i < len(fins):
                    stack[-1] = (node, i + 1)
                    f = fins[i]
                    if color[f] == 1:
                        path = [s for s, _ in stack]
                        cyc = path[path.index(f):]
                        names = [self.names.get(c, f"n{c}") for c in cyc]
                        raise CombinationalCycleError(
                            "combinational cycle through " + " -> ".join(names), names)
                    if color[f] == 0:
                        color[f] = 1
                        stack.append((f, 0))
                else:
                    color[node] = 2
                    order.append(node)
                    stack.pop()
        self._topo = order
        return order

    def validate(self) -> None:
        n = len(self.kind)
        for i, k in enumerate(self.kind):
            if k == LATCH and self.fan0[i] < 0:
                raise DanglingLatchError(f"latch {self.names[i]!r} has no next-state function")
            if k == WIRE:
                raise NetlistError(f"unresolved wire n{i}; call finalize() first")
            if k == AND:
                for lit in (self.fan0[i], self.fan1[i]):
                    if not 0 <= lit >> 1 < n:
                        raise NetlistError(f"and n{i} has out-of-range operand {lit >> 1}")
            if k == LATCH and not 0 <= self.fan0[i] >> 1 < n:
                raise NetlistError(f"latch n{i} has out-of-range next {self.fan0[i] >> 1}")
        for r in self.constraints:
            self._check(r)
        for _, r in self.bads:
            self._check(r)
        for refs in self.buses.values():
            for r in refs:
                self._check(r)
        self.topo_order()

    # -- rebuilding -----------------------------------------------------------

    def finalize(self) -> tuple["Netlist", "Remap"]:
        """Return an equivalent wire-free netlist in topological order.

        Sources (inputs, then latches) come first and every And operand
        has a smaller index than the And itself.
        """
        order = self.topo_order()
        for i, k in enumerate(self.kind):
            if k == WIRE and self.fan0[i] < 0:
                raise NetlistError(f"wire {self.names.get(i, f'n{i}')!r} is never driven")
            if k == LATCH and self.fan0[i] < 0:
                raise DanglingLatchError(f"latch {self.names[i]!r} has no next-state function")
        out = Netlist(strash=self.strash)
        new_lit = [0] * len(self.kind)
        for i in self.inputs:
            new_lit[i] = out.add_input(self.names[i]).lit
        for i in self.latches:
            new_lit[i] = out.add_latch(self.init[i], self.names[i]).lit
        for i in order:
            k = self.kind[i]
            if k == AND:
                a, b = self.fan0[i], self.fan1[i]
                ra = NodeRef.from_lit(new_lit[a >> 1] ^ (a & 1))
                rb = NodeRef.from_lit(new_lit[b >> 1] ^ (b & 1))
                new_lit[i] = out.add_and(ra, rb).lit
            elif k == WIRE:
                d = self.fan0[i]
                new_lit[i] = new_lit[d >> 1] ^ (d & 1)
        remap = Remap(new_lit)
        for i in self.latches:
            out.set_latch_next(remap(NodeRef(i)), remap(self.latch_next(i)))
        out.constraints = [remap(r) for r in self.constraints]
        out.bads = [(nm, remap(r)) for nm, r in self.bads]
        out.buses = {nm: [remap(r) for r in refs] for nm, refs in self.buses.items()}
        return out, remap

    def copy(self) -> "Netlist":
        out, _ = self.finalize()
        return out

    def import_netlist(self, other: "Netlist", prefix: str,
                       input_map: Mapping[str, NodeRef] | None = None) -> "Remap":
        """Instantiate ``other`` inside this netlist.

        Inputs named in ``input_map`` are bound to the given signals; other
        inputs and all latches become fresh nodes named ``prefix + name``.
        Buses are copied under the same prefix; bads and constraints are not.
        """
        input_map = input_map or {}
        new_lit = [0] * len(other.kind)
        for i in other.inputs:
            nm = other.names[i]
            new_lit[i] = input_map[nm].lit if nm in input_map else self.add_input(prefix + nm).lit
        for i in other.latches:
            new_lit[i] = self.add_latch(other.init[i], prefix + other.names[i]).lit
        for i in other.topo_order():
            if other.kind[i] == AND:
                a, b = other.fan0[i], other.fan1[i]
                ra = NodeRef.from_lit(new_lit[a >> 1] ^ (a & 1))
                rb = NodeRef.from_lit(new_lit[b >> 1] ^ (b & 1))
                new_lit[i] = self.add_and(ra, rb).lit
            elif other.kind[i] == WIRE:
                raise NetlistError("cannot import a netlist with unresolved wires")
        remap = Remap(new_lit)
        for i in other.latches:
            self.set_latch_next(remap(NodeRef(i)), remap(other.latch_next(i)))
        for nm, refs in other.buses.items():
            self.buses[prefix + nm] = [remap(r) for r in refs]
        return remap

    # -- reference simulation ----------------------------------------------

    def evaluate(self, state: SimState, input_values: Mapping[str, int]) -> list[int]:
        """Combinational node values for one cycle (0/1 per node)."""
        if len(state.latch_values) != len(self.latches):
            raise NetlistError("state length does not match the number of latches")
        val = [0] * len(self.kind)
        for i in self.inputs:
            nm = self.names[i]
            if nm not in input_values:
                raise MissingInputError(f"no value supplied for input {nm!r}")
            val[i] = 1 if input_values[nm] else 0
        for i, v in zip(self.latches, state.latch_values):
            val[i] = v
        kind, f0, f1 = self.kind, self.fan0, self.fan1
        for i in self.topo_order():
            k = kind[i]
            if k == AND:
                a, b = f0[i], f1[i]
                val[i] = (val[a >> 1] ^ (a & 1)) & (val[b >> 1] ^ (b & 1))
            elif k == WIRE:
                d = f0[i]
                val[i] = val[d >> 1] ^ (d & 1)
        return val

    def simulate_step(self, state: SimState, input_values: Mapping[str, int]
                      ) -> tuple[SimState, list[int]]:
        val = self.evaluate(state, input_values)
        nxt = tuple(val[self.fan0[i] >> 1] ^ (self.fan0[i] & 1) for i in self.latches)
        return SimState(nxt), val

    # -- reductions -------------------------------------------------------------

    def support(self, roots: Iterable[NodeRef]) -> set[int]:
        """Indices of inputs and latches in the sequential cone of ``roots``."""
        seen = self._sequential_cone(roots)
        return {i for i in seen if self.kind[i] in (INPUT, LATCH)}

    def _sequential_cone(self, roots: Iterable[NodeRef]) -> set[int]:
        seen: set[int] = set()
        stack = [r.index for r in roots]
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            k = self.kind[i]
            if k == AND:
                stack.append(self.fan0[i] >> 1)
                stack.append(self.fan1[i] >> 1)
            elif k in (LATCH, WIRE) and self.fan0[i] >= 0:
                stack.append(self.fan0[i] >> 1)
        return seen

    def cone_of_influence(self, roots: Sequence[NodeRef]) -> "Netlist":
        return coi_with_map(self, roots)[0]

    # -- AIGER --------------------------------------------------------------------

    def to_aag(self, bads_as_outputs: bool = False) -> str:
        """ASCII AIGER dump.  Bads go to the AIGER 1.9 ``B`` section unless
        ``bads_as_outputs`` is set, in which case they are listed as outputs."""
        self.validate()
        var = [0] * len(self.kind)
        nxt = 1
        for i in self.inputs:
            var[i] = nxt
            nxt += 1
        for i in self.latches:
            var[i] = nxt
            nxt += 1
        ands = [i for i in self.topo_order() if self.kind[i] == AND]
        for i in ands:
            var[i] = nxt
            nxt += 1

        def lit(ref_lit: int) -> int:
            return 2 * var[ref_lit >> 1] + (ref_lit & 1)

        bads = [r for _, r in self.bads]
        outs = bads if bads_as_outputs else []
        bsec = [] if bads_as_outputs else bads
        head = [len(self.inputs), len(self.latches), len(outs), len(ands), len(bsec), len(self.constraints)]
        m = nxt - 1
        if bsec or self.constraints:
            lines = ["aag %d %d %d %d %d %d %d" % (m, *head)]
        else:
            lines = ["aag %d %d %d %d %d" % (m, *head[:4])]
        lines += [str(2 * var[i]) for i in self.inputs]
        for i in self.latches:
            lines.append(f"{2 * var[i]} {lit(self.fan0[i])} {self.init[i]}")
        lines += [str(lit(r.lit)) for r in outs]
        lines += [str(lit(r.lit)) for r in bsec]
        lines += [str(lit(r.lit)) for r in self.constraints]
        for i in ands:
            a, b = lit(self.fan0[i]), lit(self.fan1[i])
            if a < b:
                a, b = b, a
            lines.append(f"{2 * var[i]} {a} {b}")
        for k, i in enumerate(self.inputs):
            lines.append(f"i{k} {self.names[i]}")
        for k, i in enumerate(self.latches):
            lines.append(f"l{k} {self.names[i]}")
        named = self.bads
        for k, (nm, _) in enumerate(named):
            lines.append(f"{'o' if bads_as_outputs else 'b'}{k} {nm}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_aag(cls, text: str) -> "Netlist":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        head = rows[0]
        if head[0] != "aag":
            raise NetlistError("not an ASCII AIGER file")
        m, ni, nl, no, na = map(int, head[1:6])
        nb = int(head[6]) if len(head) > 6 else 0
        nc = int(head[7]) if len(head) > 7 else 0
        pos = 1
        in_lits = [int(r[0]) for r in rows[pos:pos + ni]]
        pos += ni
        latch_rows = rows[pos:pos + nl]
        pos += nl
        out_lits = [int(r[0]) for r in rows[pos:pos + no]]
        pos += no
        bad_lits = [int(r[0]) for r in rows[pos:pos + nb]]
        pos += nb
        con_lits = [int(r[0]) for r in rows[pos:pos + nc]]
        pos += nc
        and_rows = rows[pos:pos + na]
        pos += na
        syms: dict[str, str] = {}
        for r in rows[pos:]:
            if r[0] == "c":
                break
            syms[r[0]] = " ".join(r[1:])
        out = cls(strash=False)
        ref_of: dict[int, NodeRef] = {0: FALSE}
        for k, lit_ in enumerate(in_lits):
            ref_of[lit_ >> 1] = out.add_input(syms.get(f"i{k}", f"i{k}"))
        for k, r in enumerate(latch_rows):
            init = int(r[2]) if len(r) > 2 else 0
            ref_of[int(r[0]) >> 1] = out.add_latch(init, syms.get(f"l{k}", f"l{k}"))

        def get(lit_: int) -> NodeRef:
            base = ref_of[lit_ >> 1]
            return ~base if lit_ & 1 else base

        for r in and_rows:
            ref_of[int(r[0]) >> 1] = out.add_and(get(int(r[1])), get(int(r[2])))
        for r in latch_rows:
            out.set_latch_next(ref_of[int(r[0]) >> 1], get(int(r[1])))
        bad_src = bad_lits if nb else out_lits
        tag = "b" if nb else "o"
        for k, lit_ in enumerate(bad_src):
            out.add_bad(syms.get(f"{tag}{k}", f"{tag}{k}"), get(lit_))
        for lit_ in con_lits:
            out.add_constraint(get(lit_))
        return out


class Remap:
    """Maps references of a source netlist to a rebuilt one."""

    def __init__(self, new_lit: list[int]):
        self._new = new_lit

    def __call__(self, ref: NodeRef) -> NodeRef:
        return NodeRef.from_lit(self._new[ref.index] ^ (1 if ref.negated else 0))

    def many(self, refs: Iterable[NodeRef]) -> list[NodeRef]:
        return [self(r) for r in refs]


def coi_with_map(net: Netlist, roots: Sequence[NodeRef]) -> tuple[Netlist, dict[int, NodeRef]]:
    """Cone of influence of ``roots``; also returns old index -> new ref."""
    for r in roots:
        net._check(r)
    keep = net._sequential_cone(roots)
    pending = list(net.constraints)
    changed = True
    while changed:
        changed = False
        sup = {i for i in keep if net.kind[i] in (INPUT, LATCH)}
        rest = []
        for c in pending:
            if c.index in keep or net.support([c]) & sup:
                keep |= net._sequential_cone([c])
                changed = True
            else:
                rest.append(c)
        pending = rest
    out = Netlist(strash=False)
    new_of: dict[int, NodeRef] = {0: FALSE}
    for i in net.inputs:
        if i in keep:
            new_of[i] = out.add_input(net.names[i])
    for i in net.latches:
        if i in keep:
            new_of[i] = out.add_latch(net.init[i], net.names[i])

    def get(lit_: int) -> NodeRef:
        base = new_of[lit_ >> 1]
        return ~base if lit_ & 1 else base

    for i in net.topo_order():
        if i in keep and net.kind[i] == AND:
            new_of[i] = out.add_and(get(net.fan0[i]), get(net.fan1[i]))
        elif i in keep and net.kind[i] == WIRE:
            new_of[i] = get(net.fan0[i])
    for i in net.latches:
        if i in keep:
            out.set_latch_next(new_of[i], get(net.fan0[i]))
    out.constraints = [get(c.lit) for c in net.constraints if c.index in keep]
    out.bads = [(nm, get(r.lit)) for nm, r in net.bads if r.index in keep]
    out.buses = {nm: [get(r.lit) for r in refs] for nm, refs in net.buses.items()
                 if all(r.index in keep for r in refs)}
    return out, new_of
