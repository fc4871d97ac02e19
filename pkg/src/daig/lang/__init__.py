"""The analyzed language: syntax, flow graphs, parsing, loops, and edits."""

from .cfg import Cfg, CfgError, Edge, Loc, Proc, Program
from .edits import (
    EditDelta,
    EditError,
    InsertIf,
    InsertStmtAfter,
    InsertWhile,
    ProgramEdit,
    RelabelEdge,
    apply_edit,
)
from .inline import inline_program, is_inline_var
from .loops import IrreducibleError, LoopInfo, analyze_loops
from .parser import ParseError, parse_expr_text, parse_program, parse_stmt_text

__all__ = [
    "Cfg",
    "CfgError",
    "Edge",
    "Loc",
    "Proc",
    "Program",
    "EditDelta",
    "EditError",
    "InsertIf",
    "InsertStmtAfter",
    "InsertWhile",
    "ProgramEdit",
    "RelabelEdge",
    "apply_edit",
    "inline_program",
    "is_inline_var",
    "IrreducibleError",
    "LoopInfo",
    "analyze_loops",
    "ParseError",
    "parse_expr_text",
    "parse_program",
    "parse_stmt_text",
]
