"""Semantic checks: name resolution, widths, port directions, connectivity."""

from __future__ import annotations

from . import ast as A
from .diagnostics import Diagnostic

MAX_WIDTH = 64
MAX_CAPACITY = 1024


class WidthError(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(str(diag))
        self.diag = diag


class Scope:
    """Names visible inside one process body."""

    def __init__(self, proc: A.ProcessDecl):
        self.proc = proc
        self.ports = {p.name: p for p in proc.ports}
        self.vars = {v.name: v for v in proc.vars}

    def expr_width(self, e: A.Expr, expected: int | None = None) -> int | None:
        """Width of ``e``; ``None`` only for a context-free unsized literal.

        Raises :class:`WidthError` on the first problem found.
        """
        if isinstance(e, A.Const):
            w = e.width if e.width is not None else expected
            if e.width is not None and not 1 <= e.width <= MAX_WIDTH:
                raise WidthError(Diagnostic("range", f"literal width {e.width} outside 1..{MAX_WIDTH}", e.span))
            if w is not None and e.value >= 1 << w:
                raise WidthError(Diagnostic("range", f"constant {e.value} does not fit in {w} bits", e.span))
            return w
        if isinstance(e, A.Var):
            if e.name in self.vars:
                return self.vars[e.name].width
            if e.name in self.ports:
                raise WidthError(Diagnostic(
                    "unknown-name", f"port {e.name!r} cannot be read directly; pop it into a variable", e.span))
            raise WidthError(Diagnostic("unknown-name", f"unknown variable {e.name!r}", e.span))
        if isinstance(e, A.Unary):
            return self.expr_width(e.operand, expected)
        if isinstance(e, A.Binary):
            if e.op in A.COMPARISONS:
                self._operands(e.left, e.right, None, e)
                return 1
            return self._operands(e.left, e.right, expected, e)
        if isinstance(e, A.Mux):
            cw = self.expr_width(e.cond, 1)
            if cw != 1:
                raise WidthError(Diagnostic("width", f"mux select must be 1 bit wide, not {cw}", e.cond.span))
            return self._operands(e.then, e.other, expected, e)
        raise TypeError(e)

    def _operands(self, a: A.Expr, b: A.Expr, expected: int | None, at: A.Expr) -> int | None:
        wa = self.expr_width(a, expected)
        wb = self.expr_width(b, wa if wa is not None else expected)
        if wa is None and wb is not None:
            wa = self.expr_width(a, wb)
        if wa is None and wb is None:
            if expected is None:
                raise WidthError(Diagnostic("width", "cannot infer the width of an expression of literals", at.span))
            return expected
        if wa != wb:
            raise WidthError(Diagnostic("width", f"operand widths differ ({wa} vs {wb})", at.span))
        return wa

    def require(self, e: A.Expr, width: int, what: str) -> None:
        w = self.expr_width(e, width)
        if w != width:
            raise WidthError(Diagnostic("width", f"{what} expects {width} bits, expression has {w}", e.span))


def _reads(e: A.Expr):
    if isinstance(e, A.Var):
        yield e
    elif isinstance(e, A.Unary):
        yield from _reads(e.operand)
    elif isinstance(e, A.Binary):
        yield from _reads(e.left)
        yield from _reads(e.right)
    elif isinstance(e, A.Mux):
        yield from _reads(e.cond)
        yield from _reads(e.then)
        yield from _reads(e.other)


def check_process(proc: A.ProcessDecl) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    seen: dict[str, object] = {}
    for p in proc.ports:
        if p.name in seen:
            diags.append(Diagnostic("duplicate", f"duplicate name {p.name!r} in process {proc.name}", p.span))
        seen[p.name] = p
        if not 1 <= p.width <= MAX_WIDTH:
            diags.append(Diagnostic("range", f"port width {p.width} outside 1..{MAX_WIDTH}", p.span))
    for v in proc.vars:
        if v.name in seen:
            diags.append(Diagnostic("duplicate", f"duplicate name {v.name!r} in process {proc.name}", v.span))
        seen[v.name] = v
        if not 1 <= v.width <= MAX_WIDTH:
            diags.append(Diagnostic("range", f"variable width {v.width} outside 1..{MAX_WIDTH}", v.span))
        elif v.init is not None and v.init >= 1 << v.width:
            diags.append(Diagnostic("range", f"initial value {v.init} does not fit in {v.width} bits", v.span))
    if diags:
        return diags
    scope = Scope(proc)

    def port(name: str, direction: str, op: str, span) -> A.PortDecl | None:
        p = scope.ports.get(name)
        if p is None:
            what = "variable" if name in scope.vars else "name"
            diags.append(Diagnostic("unknown-name", f"{op} on unknown port {name!r} ({what})", span))
            return None
        if p.direction != direction:
            diags.append(Diagnostic(
                "direction", f"{op} on port {name!r}, which is an {p.direction} port", span))
            return None
        return p

    def var(name: str, span, width: int | None = None, what: str = "target") -> None:
        v = scope.vars.get(name)
        if v is None:
            kind = "a port" if name in scope.ports else "not declared"
            diags.append(Diagnostic("unknown-name", f"{what} {name!r} is {kind}; expected a variable", span))
        elif width is not None and v.width != width:
            diags.append(Diagnostic("width", f"{what} {name!r} has {v.width} bits, expected {width}", span))

    def expr(e: A.Expr, width: int, what: str) -> None:
        try:
            scope.require(e, width, what)
        except WidthError as exc:
            diags.append(exc.diag)

    def stmts(body) -> None:
        for s in body:
            if isinstance(s, A.Assign):
                var(s.target, s.span)
                if s.target in scope.vars:
                    expr(s.expr, scope.vars[s.target].width, f"assignment to {s.target!r}")
            elif isinstance(s, A.Pop):
                p = port(s.port, "in", "pop", s.span)
                var(s.target, s.span, p.width if p else None)
            elif isinstance(s, A.PopNB):
                p = port(s.port, "in", "popnb", s.span)
                var(s.target, s.span, p.width if p else None)
                var(s.status, s.span, 1, "status")
                if s.target == s.status:
                    diags.append(Diagnostic("duplicate", "popnb data and status must be different variables", s.span))
            elif isinstance(s, A.Push):
                p = port(s.port, "out", "push", s.span)
                if p:
                    expr(s.expr, p.width, f"push to {s.port!r}")
            elif isinstance(s, A.PushNB):
                p = port(s.port, "out", "pushnb", s.span)
                if p:
                    expr(s.expr, p.width, f"pushnb to {s.port!r}")
                var(s.status, s.span, 1, "status")
            elif isinstance(s, A.If):
                expr(s.cond, 1, "if condition")
                stmts(s.then)
                stmts(s.other)

    stmts(proc.body)
    if not diags:
        diags += _definite_assignment(proc)
    return diags


def _definite_assignment(proc: A.ProcessDecl) -> list[Diagnostic]:
    """Variables without an initial value must be written before they are read."""
    diags: list[Diagnostic] = []
    reported: set[str] = set()

    def use(e: A.Expr, assigned: set[str]) -> None:
        for r in _reads(e):
            if r.name not in assigned and r.name not in reported:
                reported.add(r.name)
                diags.append(Diagnostic("uninitialized", f"variable {r.name!r} may be read before it is assigned; "
                                        "give it an initial value", r.span))

    def run(body, assigned: set[str]) -> set[str]:
        for s in body:
            if isinstance(s, A.Assign):
                use(s.expr, assigned)
                assigned = assigned | {s.target}
            elif isinstance(s, A.Pop):
                assigned = assigned | {s.target}
            elif isinstance(s, A.PopNB):
                assigned = assigned | {s.target, s.status}
            elif isinstance(s, (A.Push, A.PushNB)):
                use(s.expr, assigned)
                if isinstance(s, A.PushNB):
                    assigned = assigned | {s.status}
            elif isinstance(s, A.If):
                use(s.cond, assigned)
                assigned = run(s.then, assigned) & run(s.other, assigned)
        return assigned

    run(proc.body, {v.name for v in proc.vars if v.init is not None})
    return diags


def check_processes(design: A.DesignAst) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    names: set[str] = set()
    for p in design.processes:
        if p.name in names:
            diags.append(Diagnostic("duplicate", f"process {p.name!r} defined twice", p.span))
        names.add(p.name)
        diags += check_process(p)
    return diags


def validate(design: A.DesignAst) -> list[Diagnostic]:
    """All static checks; an empty list means the design can be elaborated."""
    diags = check_processes(design)
    inst_names: set[str] = set()
    for inst in design.instances:
        if inst.name in inst_names:
            diags.append(Diagnostic("duplicate", f"instance {inst.name!r} declared twice", inst.span))
        inst_names.add(inst.name)
        if design.process(inst.process) is None:
            diags.append(Diagnostic("unknown-name", f"instance {inst.name!r} uses unknown process {inst.process!r}",
                                    inst.span))
    if not design.instances:
        diags.append(Diagnostic("unconnected", "design has no instances", A.Span(0, 0, 1, 1)))
    uses: dict[tuple[str, str], list] = {}

    def end(inst: str, port: str, direction: str, role: str, span) -> A.PortDecl | None:
        i = design.instance(inst)
        if i is None:
            diags.append(Diagnostic("unknown-name", f"unknown instance {inst!r}", span))
            return None
        proc = design.process(i.process)
        if proc is None:
            return None
        p = proc.port(port)
        if p is None:
            diags.append(Diagnostic("unknown-name", f"process {proc.name} has no port {port!r}", span))
            return None
        uses.setdefault((inst, port), []).append(span)
        if p.direction != direction:
            diags.append(Diagnostic("direction", f"{role} {inst}.{port} must be an {direction} port, "
                                    f"but it is an {p.direction} port", span))
            return None
        return p

    chan_names: set[str] = set()
    for ch in design.channels:
        if ch.name in chan_names:
            diags.append(Diagnostic("duplicate", f"channel {ch.name!r} declared twice", ch.span))
        chan_names.add(ch.name)
        if not 0 <= ch.capacity <= MAX_CAPACITY:
            diags.append(Diagnostic("range", f"channel capacity {ch.capacity} outside 0..{MAX_CAPACITY}", ch.span))
        src = end(ch.src_inst, ch.src_port, "out", "channel source", ch.span)
        dst = end(ch.dst_inst, ch.dst_port, "in", "channel destination", ch.span)
        if src and dst and src.width != dst.width:
            diags.append(Diagnostic("width", f"channel {ch.name!r} joins a {src.width}-bit port "
                                    f"to a {dst.width}-bit port", ch.span))
    ext_names: set[str] = set()
    for ex in design.externals:
        if ex.name in ext_names:
            diags.append(Diagnostic("duplicate", f"external port {ex.name!r} declared twice", ex.span))
        ext_names.add(ex.name)
        end(ex.inst, ex.port, ex.direction, f"external {ex.direction} port", ex.span)
    for (inst, port), spans in uses.items():
        if len(spans) > 1:
            diags.append(Diagnostic("multiply-connected", f"port {inst}.{port} is connected {len(spans)} times",
                                    spans[1]))
    for inst in design.instances:
        proc = design.process(inst.process)
        if proc is None:
            continue
        for p in proc.ports:
            if (inst.name, p.name) not in uses:
                diags.append(Diagnostic("unconnected", f"port {inst.name}.{p.name} is not connected", inst.span))
    return diags
