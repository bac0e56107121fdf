"""Syntax tree for LI design descriptions.

Nodes are frozen dataclasses; source spans are carried along but excluded
from equality so that re-parsed pretty-printed text compares equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    col: int


def _span():
    return field(default=None, compare=False, repr=False)


# -- expressions --------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: int
    width: int | None = None     # None: takes the width required by its context
    span: Span | None = _span()


@dataclass(frozen=True)
class Var:
    name: str
    span: Span | None = _span()


@dataclass(frozen=True)
class Unary:
    op: str                      # "~"
    operand: "Expr"
    span: Span | None = _span()


@dataclass(frozen=True)
class Binary:
    op: str                      # + - & | ^ == != <
    left: "Expr"
    right: "Expr"
    span: Span | None = _span()


@dataclass(frozen=True)
class Mux:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    span: Span | None = _span()


Expr = Union[Const, Var, Unary, Binary, Mux]
COMPARISONS = ("==", "!=", "<")


# -- statements ---------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class Pop:
    port: str
    target: str
    span: Span | None = _span()


@dataclass(frozen=True)
class PopNB:
    port: str
    target: str
    status: str
    span: Span | None = _span()


@dataclass(frozen=True)
class Push:
    port: str
    expr: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class PushNB:
    port: str
    expr: Expr
    status: str
    span: Span | None = _span()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    other: tuple["Stmt", ...] = ()
    span: Span | None = _span()


Stmt = Union[Assign, Pop, PopNB, Push, PushNB, If]
BLOCKING = (Pop, Push)
PORT_OPS = (Pop, PopNB, Push, PushNB)


# -- declarations -------------------------------------------------------------

@dataclass(frozen=True)
class PortDecl:
    name: str
    direction: str               # "in" | "out"
    width: int
    span: Span | None = _span()


@dataclass(frozen=True)
class VarDecl:
    name: str
    width: int
    init: int | None = None
    span: Span | None = _span()


@dataclass(frozen=True)
class ProcessDecl:
    name: str
    ports: tuple[PortDecl, ...]
    vars: tuple[VarDecl, ...]
    body: tuple[Stmt, ...]
    span: Span | None = _span()

    def port(self, name: str) -> PortDecl | None:
        return next((p for p in self.ports if p.name == name), None)

    def var(self, name: str) -> VarDecl | None:
        return next((v for v in self.vars if v.name == name), None)


@dataclass(frozen=True)
class Instance:
    name: str
    process: str
    span: Span | None = _span()


@dataclass(frozen=True)
class ChannelDecl:
    name: str
    capacity: int
    src_inst: str
    src_port: str
    dst_inst: str
    dst_port: str
    span: Span | None = _span()


@dataclass(frozen=True)
class External:
    direction: str               # "in" | "out"
    name: str
    inst: str
    port: str
    span: Span | None = _span()


@dataclass(frozen=True)
class DesignAst:
    processes: tuple[ProcessDecl, ...]
    instances: tuple[Instance, ...]
    channels: tuple[ChannelDecl, ...]
    externals: tuple[External, ...]
    name: str | None = None

    def process(self, name: str) -> ProcessDecl | None:
        return next((p for p in self.processes if p.name == name), None)

    def instance(self, name: str) -> Instance | None:
        return next((i for i in self.instances if i.name == name), None)


def walk(stmts):
    """Yield every statement, depth first, including nested branches."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk(s.then)
            yield from walk(s.other)
