"""Static memory-access counting rules.

Every array-element read or write is one access ("mems"); scalar traffic
counts nothing. A statement like ``arr[i+1] = arr[i];`` is therefore two
accesses (one read, one write), and a compound assignment to an element is
read-plus-write. Nested subscripts count every level: ``arr[brr[i]]`` in
read position is two reads.

These rules are the single source of truth shared by the instrumenter
(which inserts ``mems = mems + k`` statements) and by the dynamic and
symbolic executors, so their totals agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .minic import (
    ArrayIndex,
    Assign,
    Binary,
    Block,
    Call,
    CompoundAssign,
    Decl,
    ExprStmt,
    For,
    If,
    IntLiteral,
    Return,
    Span,
    StrLiteral,
    Unary,
    VarRef,
    While,
)


@dataclass(frozen=True)
class MemsDelta:
    reads: int
    writes: int
    span: Span = Span(0, 0)

    @property
    def total(self):
        return self.reads + self.writes

    def __add__(self, other):
        return MemsDelta(self.reads + other.reads, self.writes + other.writes, self.span)


ZERO = MemsDelta(0, 0)


def expr_reads(expr) -> int:
    """Array-element reads in an expression evaluated in read position."""
    if expr is None or isinstance(expr, (IntLiteral, StrLiteral, VarRef)):
        return 0
    if isinstance(expr, ArrayIndex):
        return 1 + expr_reads(expr.index)
    if isinstance(expr, Binary):
        # Full-evaluation count; the dynamic side refines short circuits.
        return expr_reads(expr.lhs) + expr_reads(expr.rhs)
    if isinstance(expr, Unary):
        return expr_reads(expr.operand)
    if isinstance(expr, Call):
        return sum(expr_reads(a) for a in expr.args)
    raise TypeError(f"unhandled expression {type(expr).__name__}")


def count_expr(expr) -> MemsDelta:
    """MemsDelta of an expression in read position (writes are always 0)."""
    span = getattr(expr, "span", Span(0, 0))
    return MemsDelta(expr_reads(expr), 0, span)


def count_stmt(stmt) -> MemsDelta:
    """MemsDelta charged to one statement.

    Branch statements (if/while/for) are charged their condition's reads,
    once per evaluation of that condition; their bodies are separate
    statements. Blocks carry nothing themselves.
    """
    span = getattr(stmt, "span", Span(0, 0))
    if isinstance(stmt, Assign):
        reads = expr_reads(stmt.value)
        writes = 0
        if isinstance(stmt.target, ArrayIndex):
            writes = 1
            reads += expr_reads(stmt.target.index)
        return MemsDelta(reads, writes, span)
    if isinstance(stmt, CompoundAssign):
        reads = expr_reads(stmt.value)
        writes = 0
        if isinstance(stmt.target, ArrayIndex):
            reads += 1 + expr_reads(stmt.target.index)
            writes = 1
        return MemsDelta(reads, writes, span)
    if isinstance(stmt, Decl):
        reads = 0
        for d in stmt.declarators:
            reads += expr_reads(d.array_size) + expr_reads(d.init)
        return MemsDelta(reads, 0, span)
    if isinstance(stmt, ExprStmt):
        return MemsDelta(expr_reads(stmt.expr), 0, span)
    if isinstance(stmt, Return):
        return MemsDelta(expr_reads(stmt.value), 0, span)
    if isinstance(stmt, (If, While)):
        return MemsDelta(expr_reads(stmt.cond), 0, span)
    if isinstance(stmt, For):
        return MemsDelta(expr_reads(stmt.cond), 0, span)
    if isinstance(stmt, Block):
        return MemsDelta(0, 0, span)
    raise TypeError(f"unhandled statement {type(stmt).__name__}")
