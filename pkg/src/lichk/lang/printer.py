"""Canonical text form of a :class:`~lichk.lang.ast.DesignAst`."""

from __future__ import annotations

from . import ast as A

_PREC = {"|": 0, "^": 1, "&": 2, "==": 3, "!=": 3, "<": 4, "+": 5, "-": 5}


def format_expr(e: A.Expr, parent: int = -1, right: bool = False) -> str:
    if isinstance(e, A.Const):
        return str(e.value) if e.width is None else f"{e.width}'d{e.value}"
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Unary):
        return "~" + format_expr(e.operand, 99)
    if isinstance(e, A.Mux):
        return f"mux({format_expr(e.cond)}, {format_expr(e.then)}, {format_expr(e.other)})"
    p = _PREC[e.op]
    s = f"{format_expr(e.left, p)} {e.op} {format_expr(e.right, p, True)}"
    # operators are left-associative: a right operand at equal precedence needs parentheses
    if p < parent or (p == parent and right) or (p == parent and p in (3, 4)):
        return f"({s})"
    return s


def _stmts(body, indent: int) -> list[str]:
    pad = "  " * indent
    out = []
    for s in body:
        if isinstance(s, A.Assign):
            out.append(f"{pad}{s.target} = {format_expr(s.expr)};")
        elif isinstance(s, A.Pop):
            out.append(f"{pad}{s.target} = pop({s.port});")
        elif isinstance(s, A.PopNB):
            out.append(f"{pad}({s.target}, {s.status}) = popnb({s.port});")
        elif isinstance(s, A.Push):
            out.append(f"{pad}push({s.port}, {format_expr(s.expr)});")
        elif isinstance(s, A.PushNB):
            out.append(f"{pad}{s.status} = pushnb({s.port}, {format_expr(s.expr)});")
        elif isinstance(s, A.If):
            out.append(f"{pad}if ({format_expr(s.cond)}) {{")
            out += _stmts(s.then, indent + 1)
            if s.other:
                out.append(f"{pad}}} else {{")
                out += _stmts(s.other, indent + 1)
            out.append(f"{pad}}}")
    return out


def format_process(p: A.ProcessDecl) -> str:
    lines = [f"process {p.name} {{"]
    lines += [f"  {d.direction} {d.name} : {d.width};" for d in p.ports]
    for v in p.vars:
        init = "" if v.init is None else f" = {v.init}"
        lines.append(f"  var {v.name} : {v.width}{init};")
    lines.append("  body {")
    lines += _stmts(p.body, 2)
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines)


def format_design(d: A.DesignAst) -> str:
    parts = [format_process(p) for p in d.processes]
    head = f"design {d.name} {{" if d.name else "design {"
    lines = [head]
    lines += [f"  instance {i.name} : {i.process};" for i in d.instances]
    lines += [f"  channel {c.name} cap {c.capacity} : {c.src_inst}.{c.src_port} -> {c.dst_inst}.{c.dst_port};"
              for c in d.channels]
    lines += [f"  external {e.direction} {e.name} = {e.inst}.{e.port};" for e in d.externals]
    lines.append("}")
    parts.append("\n".join(lines))
    return "\n\n".join(parts) + "\n"
