"""Lexer and recursive-descent parser for ``.li`` design files."""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import ast as A
from .diagnostics import Diagnostic, DiagnosticError

KEYWORDS = {
    "process", "design", "in", "out", "var", "body", "pop", "popnb", "push",
    "pushnb", "if", "else", "channel", "cap", "external", "instance", "mux",
}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<sized>\d+'[bBdDhH][0-9a-fA-F_]+)
  | (?P<int>0[xX][0-9a-fA-F_]+|0[bB][01_]+|\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|==|!=|[{}();:,.=<+\-&|^~])
""", re.VERBOSE)

_BASES = {"b": 2, "d": 10, "h": 16}


@dataclass
class Token:
    kind: str        # ident, kw, int, sized, op, eof
    text: str
    span: A.Span


def _line_starts(text: str) -> list[int]:
    starts = [0]
    for m in re.finditer("\n", text):
        starts.append(m.end())
    return starts


class _Source:
    def __init__(self, text: str):
        self.text = text
        self.starts = _line_starts(text)

    def span(self, start: int, end: int) -> A.Span:
        lo, hi = 0, len(self.starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.starts[mid] <= start:
                lo = mid
            else:
                hi = mid - 1
        return A.Span(start, end, lo + 1, start - self.starts[lo] + 1)


def tokenize(text: str) -> list[Token]:
    src = _Source(text)
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            sp = src.span(pos, pos + 1)
            raise DiagnosticError([Diagnostic("syntax", f"unexpected character {text[pos]!r}", sp)])
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tx = m.group()
            if kind == "ident" and tx in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, tx, src.span(m.start(), m.end())))
        pos = m.end()
    out.append(Token("eof", "", src.span(len(text), len(text))))
    return out


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # -- helpers ------------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def _err(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        got = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise DiagnosticError([Diagnostic("syntax", f"{msg}, found {got}", tok.span)])

    def _is(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "op") and t.text == text

    def _accept(self, text: str) -> Token | None:
        if self._is(text):
            t = self.tok
            self.i += 1
            return t
        return None

    def _expect(self, text: str) -> Token:
        t = self._accept(text)
        if t is None:
            self._err(f"expected {text!r}")
        return t

    def _ident(self) -> Token:
        t = self.tok
        if t.kind != "ident":
            self._err("expected an identifier")
        self.i += 1
        return t

    def _int(self) -> tuple[int, A.Span]:
        t = self.tok
        if t.kind != "int":
            self._err("expected an integer")
        self.i += 1
        return int(t.text.replace("_", ""), 0), t.span

    def _span_from(self, first: Token) -> A.Span:
        last = self.toks[self.i - 1]
        return A.Span(first.span.start, last.span.end, first.span.line, first.span.col)

    # -- top level ----------------------------------------------------------

    def parse_design(self) -> A.DesignAst:
        procs = []
        while self._is("process"):
            procs.append(self._process())
        if not self._is("design"):
            self._err("expected 'process' or 'design'")
        self.i += 1
        name = self._ident().text if self.tok.kind == "ident" else None
        self._expect("{")
        insts, chans, exts = [], [], []
        while not self._accept("}"):
            first = self.tok
            if self._accept("instance"):
                nm = self._ident().text
                self._expect(":")
                pr = self._ident().text
                self._expect(";")
                insts.append(A.Instance(nm, pr, self._span_from(first)))
            elif self._accept("channel"):
                nm = self._ident().text
                self._expect("cap")
                cap, _ = self._int()
                self._expect(":")
                si = self._ident().text
                self._expect(".")
                sp = self._ident().text
                self._expect("->")
                di = self._ident().text
                self._expect(".")
                dp = self._ident().text
                self._expect(";")
                chans.append(A.ChannelDecl(nm, cap, si, sp, di, dp, self._span_from(first)))
            elif self._accept("external"):
                if self._accept("in"):
                    d = "in"
                elif self._accept("out"):
                    d = "out"
                else:
                    self._err("expected 'in' or 'out'")
                nm = self._ident().text
                self._expect("=")
                inst = self._ident().text
                self._expect(".")
                port = self._ident().text
                self._expect(";")
                exts.append(A.External(d, nm, inst, port, self._span_from(first)))
            else:
                self._err("expected 'instance', 'channel', 'external' or '}'")
        if self.tok.kind != "eof":
            self._err("expected end of input after the design block")
        return A.DesignAst(tuple(procs), tuple(insts), tuple(chans), tuple(exts), name)

    def _process(self) -> A.ProcessDecl:
        first = self._expect("process")
        name = self._ident().text
        self._expect("{")
        ports, vars_ = [], []
        while self._is("in") or self._is("out"):
            pf = self.tok
            d = self.tok.text
            self.i += 1
            pn = self._ident().text
            self._expect(":")
            w, _ = self._int()
            self._expect(";")
            ports.append(A.PortDecl(pn, d, w, self._span_from(pf)))
        while self._is("var"):
            vf = self.tok
            self.i += 1
            vn = self._ident().text
            self._expect(":")
            w, _ = self._int()
            init = None
            if self._accept("="):
                init = self._const_value()
            self._expect(";")
            vars_.append(A.VarDecl(vn, w, init, self._span_from(vf)))
        self._expect("body")
        body = self._block()
        self._expect("}")
        return A.ProcessDecl(name, tuple(ports), tuple(vars_), body, self._span_from(first))

    def _const_value(self) -> int:
        t = self.tok
        if t.kind == "int":
            return self._int()[0]
        if t.kind == "sized":
            self.i += 1
            return _sized(t)[0]
        self._err("expected a constant")

    def _block(self) -> tuple[A.Stmt, ...]:
        self._expect("{")
        out = []
        while not self._accept("}"):
            out.append(self._stmt())
        return tuple(out)

    def _stmt(self) -> A.Stmt:
        first = self.tok
        if self._accept("if"):
            self._expect("(")
            cond = self._expr()
            self._expect(")")
            then = self._block()
            other = self._block() if self._accept("else") else ()
            return A.If(cond, then, other, self._span_from(first))
        if self._accept("push"):
            self._expect("(")
            port = self._ident().text
            self._expect(",")
            e = self._expr()
            self._expect(")")
            self._expect(";")
            return A.Push(port, e, self._span_from(first))
        if self._accept("("):
            tgt = self._ident().text
            self._expect(",")
            st = self._ident().text
            self._expect(")")
            self._expect("=")
            self._expect("popnb")
            self._expect("(")
            port = self._ident().text
            self._expect(")")
            self._expect(";")
            return A.PopNB(port, tgt, st, self._span_from(first))
        if self.tok.kind == "ident":
            tgt = self._ident().text
            self._expect("=")
            if self._accept("pop"):
                self._expect("(")
                port = self._ident().text
                self._expect(")")
                self._expect(";")
                return A.Pop(port, tgt, self._span_from(first))
            if self._accept("pushnb"):
                self._expect("(")
                port = self._ident().text
                self._expect(",")
                e = self._expr()
                self._expect(")")
                self._expect(";")
                return A.PushNB(port, e, tgt, self._span_from(first))
            e = self._expr()
            self._expect(";")
            return A.Assign(tgt, e, self._span_from(first))
        self._err("expected a statement")

    # -- expressions (loosest binding first) ----------------------------------

    _LEVELS = (("|",), ("^",), ("&",), ("==", "!="), ("<",), ("+", "-"))

    def _expr(self, level: int = 0) -> A.Expr:
        if level == len(self._LEVELS):
            return self._unary()
        first = self.tok
        left = self._expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in self._LEVELS[level]:
            op = self.tok.text
            self.i += 1
            right = self._expr(level + 1)
            left = A.Binary(op, left, right, self._span_from(first))
            if op in A.COMPARISONS and self.tok.kind == "op" and self.tok.text in self._LEVELS[level]:
                self._err("comparison operators do not chain")
        return left

    def _unary(self) -> A.Expr:
        first = self.tok
        if self._accept("~"):
            return A.Unary("~", self._unary(), self._span_from(first))
        return self._primary()

    def _primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "int":
            v, sp = self._int()
            return A.Const(v, None, sp)
        if t.kind == "sized":
            self.i += 1
            v, w = _sized(t)
            return A.Const(v, w, t.span)
        if t.kind == "ident":
            self.i += 1
            return A.Var(t.text, t.span)
        if self._accept("mux"):
            self._expect("(")
            c = self._expr()
            self._expect(",")
            a = self._expr()
            self._expect(",")
            b = self._expr()
            self._expect(")")
            return A.Mux(c, a, b, self._span_from(t))
        if self._accept("("):
            e = self._expr()
            self._expect(")")
            return e
        self._err("expected an expression")


def _sized(tok: Token) -> tuple[int, int]:
    w, rest = tok.text.split("'")
    base = _BASES[rest[0].lower()]
    digits = rest[1:].replace("_", "")
    try:
        return int(digits, base), int(w)
    except ValueError:
        raise DiagnosticError([Diagnostic("syntax", f"malformed literal {tok.text!r}", tok.span)]) from None


def parse(text: str, check: bool = True) -> A.DesignAst:
    """Parse design text.

    Raises :class:`DiagnosticError` on syntax errors and, with ``check``,
    on per-process errors (unknown names, widths, port directions).
    Design-level connectivity is left to :func:`lichk.lang.validate`.
    """
    if text.startswith("\ufeff"):
        text = text[1:]
    design = Parser(text).parse_design()
    if check:
        from .check import check_processes
        diags = check_processes(design)
        if diags:
            raise DiagnosticError(diags)
    return design
