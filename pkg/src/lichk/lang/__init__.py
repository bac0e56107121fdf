from .ast import DesignAst, ProcessDecl
from .check import validate
from .diagnostics import Diagnostic, DiagnosticError
from .parser import parse
from .printer import format_design

__all__ = ["DesignAst", "ProcessDecl", "Diagnostic", "DiagnosticError", "parse", "validate", "format_design"]
