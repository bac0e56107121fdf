"""Compile a :class:`~lichk.lang.ast.DesignAst` into a sequential netlist.

Every process instance becomes a one-hot FSM with one wait state per
blocking port operation plus an idle top state (all state bits zero, the
reset state).  One cycle of execution works as follows:

* In the top state the body runs from the beginning until it reaches a
  blocking op (which becomes the next state, not attempted yet) or the end
  of the body (stay in the top state).
* In the wait state of a blocking op the op is attempted.  If the handshake
  fails the module stalls and nothing changes.  If it succeeds, the rest of
  the body runs; at the end of the body execution wraps to the top once and
  continues until the next blocking op, or the end again (next state: top).

Non-blocking ops and assignments execute combinationally along the way.
Variables are registers; the values computed along the path that ends the
cycle become their next values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import words as W
from .lang import ast as A
from .lang.check import Scope, validate
from .netlist import FALSE, TRUE, CombinationalCycleError, Netlist, NetlistError, NodeRef

MAX_STATES = 1 << 16
MAX_STALL_CYCLES = (1 << 16) - 1


class ElaborationError(Exception):
    pass


@dataclass(frozen=True)
class ElabOptions:
    nb_stall_cycles: int = 8
    nb_stall_mode: str = "rdy"          # "rdy" | "handshake"


@dataclass
class PortSignals:
    vld: NodeRef
    rdy: NodeRef
    dat: list[NodeRef]                  # MSB first


@dataclass
class ElaboratedModule:
    name: str
    global_stall: NodeRef
    ports: dict[str, PortSignals]
    has_blocking: bool
    states: dict[str, NodeRef] = field(default_factory=dict)


@dataclass
class ElaboratedDesign:
    netlist: Netlist
    modules: list[ElaboratedModule]
    external_ports: dict[str, PortSignals]
    external_dirs: dict[str, str]
    channel_state: dict[str, str]       # channel name -> occupancy bus name
    ast: A.DesignAst
    options: ElabOptions

    def module(self, name: str) -> ElaboratedModule:
        return next(m for m in self.modules if m.name == name)


# -- port-reuse analysis ---------------------------------------------------------

def _blocking_ops(body) -> list[A.Stmt]:
    return [s for s in A.walk(body) if isinstance(s, A.BLOCKING)]


def _contains(stmt: A.Stmt, target: A.Stmt) -> bool:
    if stmt is target:
        return True
    if isinstance(stmt, A.If):
        return any(_contains(s, target) for s in stmt.then + stmt.other)
    return False


def _check_port_reuse(inst: str, proc: A.ProcessDecl, ops: list[A.Stmt]) -> None:
    """Reject bodies where one cycle's execution path touches a port twice."""

    def touch(states, port, span):
        out = set()
        for used in states:
            if port in used:
                line = f" (line {span.line})" if span else ""
                raise ElaborationError(
                    f"{inst}: port {port!r} is used twice within one cycle{line}; "
                    "insert a blocking operation between the two uses")
            out.add(used | {port})
        return out

    def run(stmts, states):
        for s in stmts:
            if not states:
                return states
            if isinstance(s, A.BLOCKING):
                return set()
            if isinstance(s, (A.PopNB, A.PushNB)):
                states = touch(states, s.port, s.span)
            elif isinstance(s, A.If):
                states = run(s.then, states) | run(s.other, states)
        return states

    def resume(stmts, op, states):
        for i, s in enumerate(stmts):
            if s is op:
                return run(stmts[i + 1:], touch(states, s.port, s.span))
            if isinstance(s, A.If) and _contains(s, op):
                branch = s.then if any(_contains(x, op) for x in s.then) else s.other
                return run(stmts[i + 1:], resume(branch, op, states))
        raise AssertionError("blocking op not found")

    run(proc.body, {frozenset()})
    for op in ops:
        run(proc.body, resume(proc.body, op, {frozenset()}))


# -- per-instance builder ---------------------------------------------------------

class _Module:
    def __init__(self, net: Netlist, inst: str, proc: A.ProcessDecl, opts: ElabOptions):
        self.net, self.inst, self.proc, self.opts = net, inst, proc, opts
        self.scope = Scope(proc)
        self.ops = _blocking_ops(proc.body)
        if len(self.ops) + 1 > MAX_STATES:
            raise ElaborationError(f"{inst}: FSM has more than {MAX_STATES} states")
        _check_port_reuse(inst, proc, self.ops)
        # signals driven from outside the module
        self.in_vld: dict[str, NodeRef] = {}
        self.in_dat: dict[str, W.Word] = {}
        self.out_rdy: dict[str, NodeRef] = {}
        for p in proc.ports:
            if p.direction == "in":
                self.in_vld[p.name] = net.add_wire(f"{inst}.{p.name}.vld")
                self.in_dat[p.name] = [net.add_wire(f"{inst}.{p.name}.dat[{i}]") for i in range(p.width)]
            else:
                self.out_rdy[p.name] = net.add_wire(f"{inst}.{p.name}.rdy")
        self.regs = {v.name: W.latches(net, f"{inst}.{v.name}", v.width, v.init or 0) for v in proc.vars}
        self.op_index = {id(op): k for k, op in enumerate(self.ops)}
        self.state = [net.add_latch(0, f"{inst}.__st.{k}_{type(op).__name__.lower()}_{op.port}")
                      for k, op in enumerate(self.ops)]
        # strobes: port -> [(guard, data word or None)]
        self.strobes: dict[str, list] = {p.name: [] for p in proc.ports}
        self.terms: list[tuple[NodeRef, dict, int | None]] = []

    # expressions ------------------------------------------------------------

    def expr(self, e: A.Expr, env: dict, width: int | None) -> W.Word:
        net = self.net
        if isinstance(e, A.Const):
            return W.const(e.value, e.width if e.width is not None else width)
        if isinstance(e, A.Var):
            return env[e.name]
        if isinstance(e, A.Unary):
            return W.bitwise_not(self.expr(e.operand, env, width))
        if isinstance(e, A.Mux):
            w = self.scope.expr_width(e, width)
            c = self.expr(e.cond, env, 1)[0]
            return W.mux(net, c, self.expr(e.then, env, w), self.expr(e.other, env, w))
        if e.op in A.COMPARISONS:
            w = self.scope.expr_width(e.left, None) or self.scope.expr_width(e.right, None)
            a, b = self.expr(e.left, env, w), self.expr(e.right, env, w)
            if e.op == "<":
                return [W.ult(net, a, b)]
            r = W.eq(net, a, b)
            return [r if e.op == "==" else ~r]
        w = self.scope.expr_width(e, width)
        a, b = self.expr(e.left, env, w), self.expr(e.right, env, w)
        fn = {"+": W.add, "-": W.sub, "&": W.bitwise_and, "|": W.bitwise_or, "^": W.bitwise_xor}[e.op]
        return fn(net, a, b)

    # symbolic execution ---------------------------------------------------------

    def _merge(self, c: NodeRef, a: dict, b: dict) -> dict:
        return {v: a[v] if a[v] is b[v] else W.mux(self.net, c, a[v], b[v]) for v in a}

    def run(self, stmts, g: NodeRef, env: dict) -> tuple[NodeRef, dict]:
        net = self.net
        for s in stmts:
            if g == FALSE:
                break
            if isinstance(s, A.Assign):
                env = {**env, s.target: self.expr(s.expr, env, len(env[s.target]))}
            elif isinstance(s, A.BLOCKING):
                self.terms.append((g, env, self.op_index[id(s)]))
                return FALSE, env
            elif isinstance(s, A.PopNB):
                self.strobes[s.port].append((g, None))
                env = {**env, s.target: list(self.in_dat[s.port]), s.status: [self.in_vld[s.port]]}
            elif isinstance(s, A.PushNB):
                width = self.proc.port(s.port).width
                self.strobes[s.port].append((g, self.expr(s.expr, env, width)))
                env = {**env, s.status: [self.out_rdy[s.port]]}
            elif isinstance(s, A.If):
                c = self.expr(s.cond, env, 1)[0]
                gt, et = self.run(s.then, net.add_and(g, c), env)
                ge, ee = self.run(s.other, net.add_and(g, ~c), env)
                g = net.add_or(gt, ge)
                env = self._merge(c, et, ee)
        return g, env

    def resume(self, stmts, op, g: NodeRef, env: dict) -> tuple[NodeRef, dict]:
        for i, s in enumerate(stmts):
            if s is op:
                if isinstance(op, A.Pop):
                    env = {**env, op.target: list(self.in_dat[op.port])}
                return self.run(stmts[i + 1:], g, env)
            if isinstance(s, A.If) and _contains(s, op):
                in_then = any(_contains(x, op) for x in s.then)
                g, env = self.resume(s.then if in_then else s.other, op, g, env)
                return self.run(stmts[i + 1:], g, env)
        raise AssertionError("blocking op not found")

    def build(self) -> tuple[NodeRef, dict[str, tuple]]:
        net, body = self.net, self.proc.body
        cur = dict(self.regs)
        is_top = net.add_and_all(~s for s in self.state)
        g, env = self.run(body, is_top, cur)
        self.terms.append((g, env, None))
        stalls = []
        for k, op in enumerate(self.ops):
            sk = self.state[k]
            if isinstance(op, A.Pop):
                hs = self.in_vld[op.port]
                self.strobes[op.port].append((sk, None))
            else:
                hs = self.out_rdy[op.port]
                self.strobes[op.port].append((sk, self.expr(op.expr, cur, self.proc.port(op.port).width)))
            stalls.append(net.add_and(sk, ~hs))
            g, env = self.resume(body, op, net.add_and(sk, hs), cur)
            g, env = self.run(body, g, env)
            self.terms.append((g, env, None))
        stall = net.add_or_all(stalls)

        for v, regs in self.regs.items():
            nxt = []
            for i, r in enumerate(regs):
                bit = net.add_and(stall, r)
                for tg, tenv, _ in self.terms:
                    bit = net.add_or(bit, net.add_and(tg, tenv[v][i]))
                nxt.append(bit)
            W.set_next(net, regs, nxt)
        for k, sk in enumerate(self.state):
            net.set_latch_next(sk, net.add_or(stalls[k], net.add_or_all(tg for tg, _, t in self.terms if t == k)))

        driven = {}
        for p in self.proc.ports:
            uses = self.strobes[p.name]
            strobe = net.add_or_all(gd for gd, _ in uses)
            if p.direction == "in":
                driven[p.name] = (strobe, None)
            else:
                dat = [net.add_or_all(net.add_and(gd, d[i]) for gd, d in uses) for i in range(p.width)]
                driven[p.name] = (strobe, dat)
        if not self.ops:
            stall = self._counter_stall(driven)
        return stall, driven

    def _counter_stall(self, driven) -> NodeRef:
        net, n = self.net, self.opts.nb_stall_cycles
        rdys = []
        for p in self.proc.ports:
            if p.direction == "in":
                rdy, vld = driven[p.name][0], self.in_vld[p.name]
            else:
                rdy, vld = self.out_rdy[p.name], driven[p.name][0]
            rdys.append(net.add_and(rdy, vld) if self.opts.nb_stall_mode == "handshake" else rdy)
        active = net.add_or_all(rdys)
        cnt = W.latches(net, f"{self.inst}.__cnt", n.bit_length(), 0)
        full = W.eq_const(net, cnt, n)
        inc = W.mux(net, full, cnt, W.increment(net, cnt))
        W.set_next(net, cnt, W.mux(net, active, W.const(0, len(cnt)), inc))
        net.add_bus(f"{self.inst}.__cnt", W.msb_first(cnt))
        return full


# -- channels -------------------------------------------------------------------

def _fifo(net: Netlist, name: str, capacity: int, src_vld: NodeRef, src_dat: W.Word, dst_rdy: NodeRef):
    """Order-preserving FIFO; returns (src_rdy, dst_vld, dst_dat, occupancy)."""
    width = len(src_dat)
    occ = W.latches(net, f"{name}.__occ", capacity.bit_length(), 0)
    slots = [W.latches(net, f"{name}.__slot{j}", width, 0) for j in range(capacity)]
    src_rdy = W.ult(net, occ, W.const(capacity, len(occ)))
    dst_vld = ~W.eq_const(net, occ, 0)
    push = net.add_and(src_vld, src_rdy)
    pop = net.add_and(dst_vld, dst_rdy)
    occ_dec = W.mux(net, pop, W.decrement(net, occ), occ)         # write position
    zero = W.const(0, width)
    for j in range(capacity):
        shifted = W.mux(net, pop, slots[j + 1] if j + 1 < capacity else zero, slots[j])
        here = net.add_and(push, W.eq_const(net, occ_dec, j))
        W.set_next(net, slots[j], W.mux(net, here, src_dat, shifted))
    W.set_next(net, occ, W.mux(net, push, W.increment(net, occ_dec), occ_dec))
    net.add_bus(f"{name}.__occ", W.msb_first(occ))
    return src_rdy, dst_vld, list(slots[0]), occ


def channel_fifo(width: int, capacity: int) -> Netlist:
    """Stand-alone FIFO netlist.

    Inputs ``push.vld``, ``push.dat[i]`` and ``pop.rdy``; buses
    ``push.rdy``, ``pop.vld``, ``pop.dat`` and ``fifo.__occ``.
    """
    if not 1 <= capacity <= 1024:
        raise ElaborationError(f"FIFO capacity {capacity} outside 1..1024")
    if not 1 <= width <= 64:
        raise ElaborationError(f"FIFO width {width} outside 1..64")
    net = Netlist()
    vld = net.add_input("push.vld")
    dat = W.inputs(net, "push.dat", width)
    rdy = net.add_input("pop.rdy")
    src_rdy, dst_vld, dst_dat, _ = _fifo(net, "fifo", capacity, vld, dat, rdy)
    net.add_bus("push.rdy", [src_rdy])
    net.add_bus("pop.vld", [dst_vld])
    net.add_bus("pop.dat", W.msb_first(dst_dat))
    net.validate()
    return net


# -- top level ------------------------------------------------------------------

def elaborate(ast: A.DesignAst, opts: ElabOptions | None = None) -> ElaboratedDesign:
    opts = opts or ElabOptions()
    if not 1 <= opts.nb_stall_cycles <= MAX_STALL_CYCLES:
        raise ElaborationError(f"nb_stall_cycles must be in 1..{MAX_STALL_CYCLES}, got {opts.nb_stall_cycles}")
    if opts.nb_stall_mode not in ("rdy", "handshake"):
        raise ElaborationError(f"unknown nb_stall_mode {opts.nb_stall_mode!r}")
    diags = validate(ast)
    if diags:
        raise ElaborationError("design does not validate:\n" + "\n".join(str(d) for d in diags))
    net = Netlist()
    try:
        return _elaborate(net, ast, opts)
    except CombinationalCycleError as exc:
        raise ElaborationError(f"combinational cycle through capacity-0 channels: {exc}") from None
    except NetlistError as exc:
        raise ElaborationError(str(exc)) from None


def _elaborate(net: Netlist, ast: A.DesignAst, opts: ElabOptions) -> ElaboratedDesign:
    builders: dict[str, _Module] = {}
    built = {}
    for inst in ast.instances:
        m = _Module(net, inst.name, ast.process(inst.process), opts)
        builders[inst.name] = m
    for name, m in builders.items():
        built[name] = m.build()

    def out_side(inst, port):
        strobe, dat = built[inst][1][port]
        return strobe, dat

    channel_state = {}
    for ch in ast.channels:
        src, dst = builders[ch.src_inst], builders[ch.dst_inst]
        s_vld, s_dat = out_side(ch.src_inst, ch.src_port)
        d_rdy = built[ch.dst_inst][1][ch.dst_port][0]
        if ch.capacity == 0:
            s_rdy, d_vld, d_dat = d_rdy, s_vld, s_dat
        else:
            s_rdy, d_vld, d_dat, _ = _fifo(net, ch.name, ch.capacity, s_vld, s_dat, d_rdy)
            channel_state[ch.name] = f"{ch.name}.__occ"
        net.drive_wire(src.out_rdy[ch.src_port], s_rdy)
        net.drive_wire(dst.in_vld[ch.dst_port], d_vld)
        for w, d in zip(dst.in_dat[ch.dst_port], d_dat, strict=True):
            net.drive_wire(w, d)
    ext_dirs = {}
    for ex in ast.externals:
        m = builders[ex.inst]
        ext_dirs[ex.name] = ex.direction
        if ex.direction == "in":
            net.drive_wire(m.in_vld[ex.port], net.add_input(f"{ex.name}.vld"))
            for i, w in enumerate(m.in_dat[ex.port]):
                net.drive_wire(w, net.add_input(f"{ex.name}.dat[{i}]"))
        else:
            net.drive_wire(m.out_rdy[ex.port], net.add_input(f"{ex.name}.rdy"))

    # handles before wire removal
    raw_mods = []
    for name, m in builders.items():
        stall, driven = built[name]
        ports = {}
        for p in m.proc.ports:
            if p.direction == "in":
                ports[p.name] = PortSignals(m.in_vld[p.name], driven[p.name][0], W.msb_first(m.in_dat[p.name]))
            else:
                ports[p.name] = PortSignals(driven[p.name][0], m.out_rdy[p.name], W.msb_first(driven[p.name][1]))
        states = {net.names[s.index]: s for s in m.state}
        raw_mods.append((name, stall, ports, bool(m.ops), states))
        for pn, ps in ports.items():
            net.add_bus(f"{name}.{pn}.vld", [ps.vld])
            net.add_bus(f"{name}.{pn}.rdy", [ps.rdy])
            net.add_bus(f"{name}.{pn}.dat", ps.dat)
        net.add_bus(f"{name}.__stall", [stall])
        for v, regs in m.regs.items():
            net.add_bus(f"{name}.{v}", W.msb_first(regs))
    for ex in ast.externals:
        ps = next(p for n, _, p, _, _ in raw_mods if n == ex.inst)[ex.port]
        net.add_bus(f"{ex.name}.vld", [ps.vld])
        net.add_bus(f"{ex.name}.rdy", [ps.rdy])
        net.add_bus(f"{ex.name}.dat", ps.dat)

    final, remap = net.finalize()
    final.validate()

    def rp(ps: PortSignals) -> PortSignals:
        return PortSignals(remap(ps.vld), remap(ps.rdy), remap.many(ps.dat))

    modules = [ElaboratedModule(n, remap(st), {k: rp(v) for k, v in ports.items()}, hb,
                                {k: remap(v) for k, v in states.items()})
               for n, st, ports, hb, states in raw_mods]
    externals = {}
    for ex in ast.externals:
        mod = next(m for m in modules if m.name == ex.inst)
        externals[ex.name] = mod.ports[ex.port]
    return ElaboratedDesign(final, modules, externals, ext_dirs, channel_state, ast, opts)


def reelaborate(elab: ElaboratedDesign, **changes) -> ElaboratedDesign:
    """Elaborate the same design again with some options changed."""
    return elaborate(elab.ast, replace(elab.options, **changes))
