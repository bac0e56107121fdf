from __future__ import annotations

from dataclasses import dataclass

from .ast import Span


@dataclass(frozen=True)
class Diagnostic:
    """A located problem report.  ``code`` is a stable machine-readable tag:
    syntax, unknown-name, width, direction, duplicate, unconnected,
    multiply-connected, range, uninitialized."""

    code: str
    message: str
    span: Span | None = None

    def __str__(self) -> str:
        where = f"{self.span.line}:{self.span.col}: " if self.span else ""
        return f"{where}error[{self.code}]: {self.message}"


class DiagnosticError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("\n".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics
