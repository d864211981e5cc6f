"""Register bytecode for the MiniC interpreter.

The tree is compiled once into flat three-address code; the step loop that
executes it lives in the fast-kernel backends (``_core`` when compiled,
``_pure`` otherwise). The compiler also lays down the bookkeeping
instructions that make a run observable:

* ``STEP``    executed-statement counter (deterministic time proxy)
* ``PLEN``    logged-branch counter (taken loop tests, both if outcomes)
* ``EMIT``    trace event -- exactly the lines an instrumented build of the
              same program would print, in the same order
* ``AGET``/``ASET`` carry the dynamic mems counts (1 read / 1 write)

Semantics are 64-bit two's-complement with wraparound; division truncates
toward zero and raising on zero divisors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import minic
from .errors import MemspathError
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
    StrLiteral,
    Unary,
    VarRef,
    While,
    expr_text,
)

OP_HALT = 0
OP_LOADC = 1
OP_MOV = 2
OP_ADD = 3
OP_SUB = 4
OP_MUL = 5
OP_DIV = 6
OP_MOD = 7
OP_LT = 8
OP_LE = 9
OP_GT = 10
OP_GE = 11
OP_EQ = 12
OP_NE = 13
OP_NEG = 14
OP_NOT = 15
OP_BOOL = 16
OP_JMP = 17
OP_JZ = 18
OP_JNZ = 19
OP_AGET = 20
OP_ASET = 21
OP_ALLOC = 22
OP_STEP = 23
OP_PLEN = 24
OP_EMIT = 25
OP_CALL = 26
OP_RET = 27
OP_PRINT = 28
OP_AREF = 29

_BINOP_CODE = {
    "+": OP_ADD,
    "-": OP_SUB,
    "*": OP_MUL,
    "/": OP_DIV,
    "%": OP_MOD,
    "<": OP_LT,
    "<=": OP_LE,
    ">": OP_GT,
    ">=": OP_GE,
    "==": OP_EQ,
    "!=": OP_NE,
}

# Run status codes shared with the backends.
STATUS_OK = 0
STATUS_STEP_LIMIT = 1
STATUS_DIV_ZERO = 2
STATUS_OOB = 3
STATUS_BAD_ALLOC = 4
STATUS_DEPTH = 5


@dataclass(frozen=True)
class Event:
    """One trace line the instrumented program would print."""

    kind: str  # 'cond' or 'assign'
    site: int  # branch site id (cond) or statement id (assign)
    taken: bool | None  # branch outcome for 'cond', None for 'assign'
    text: str  # exact stdout line, without newline


@dataclass
class FuncCode:
    name: str
    param_kinds: tuple  # 's' scalar / 'a' array, in signature order
    n_regs: int
    n_slots: int
    code: np.ndarray  # int64, shape (n, 5): op a b c d
    spans: np.ndarray  # int64, source byte offset per instruction
    code_tuples: list | None = None  # lazy pure-backend form

    def tuples(self):
        if self.code_tuples is None:
            self.code_tuples = [tuple(int(v) for v in row) for row in self.code]
        return self.code_tuples


@dataclass
class Program:
    functions: list
    index: dict  # name -> function index
    events: list  # Event table, EMIT operand indexes into it
    formats: list  # printf formats, pre-split: (parts tuple, n_args)
    marker: str

    def func_index(self, name):
        if name not in self.index:
            raise MemspathError(f"unknown function {name!r}")
        return self.index[name]


@dataclass
class RunOutcome:
    status: int
    ret: int
    steps: int
    path_len: int
    reads: int
    writes: int
    events: list  # event ids (ints), empty when tracing was off
    outputs: list  # strings produced by printf, in order
    arrays: dict  # array-param position -> final contents (entry frame)
    err_fn: int = -1
    err_pc: int = -1

    @property
    def mems(self):
        return self.reads + self.writes


def split_format(fmt):
    """Split a printf format into literal parts and int conversion count.

    Supports %d, %i, %lld and %%; anything else is rejected (the subset
    only prints 64-bit ints).
    """
    parts = []
    cur = []
    n_args = 0
    i = 0
    while i < len(fmt):
        ch = fmt[i]
        if ch != "%":
            cur.append(ch)
            i += 1
            continue
        if fmt.startswith("%%", i):
            cur.append("%")
            i += 2
        elif fmt.startswith("%lld", i):
            parts.append("".join(cur))
            cur = []
            n_args += 1
            i += 4
        elif fmt.startswith("%d", i) or fmt.startswith("%i", i):
            parts.append("".join(cur))
            cur = []
            n_args += 1
            i += 2
        else:
            raise MemspathError(f"unsupported printf conversion at {fmt[i:i+4]!r}")
    parts.append("".join(cur))
    return tuple(parts), n_args


def render_format(parts, args):
    out = [parts[0]]
    for value, part in zip(args, parts[1:]):
        out.append(str(value))
        out.append(part)
    return "".join(out)


class _FnCompiler:
    def __init__(self, program_builder, fn):
        self.pb = program_builder
        self.fn = fn
        self.code = []
        self.spans = []
        self.scopes = [{}]  # name -> ('reg'|'slot', index)
        self.n_regs = 0
        self.n_slots = 0
        self.cur_span = fn.span.start
        scalar = 0
        arrays = 0
        kinds = []
        for p in fn.params:
            if p.is_array:
                self.scopes[0][p.name] = ("slot", arrays)
                arrays += 1
                kinds.append("a")
            else:
                self.scopes[0][p.name] = ("reg", scalar)
                scalar += 1
                kinds.append("s")
        self.param_kinds = tuple(kinds)
        self.n_regs = scalar
        self.n_slots = arrays

    # -- emission helpers

    def emit(self, op, a=0, b=0, c=0, d=0):
        self.code.append([op, a, b, c, d])
        self.spans.append(self.cur_span)
        return len(self.code) - 1

    def patch(self, at, target):
        row = self.code[at]
        if row[0] == OP_JMP:
            row[1] = target
        else:
            row[2] = target

    def here(self):
        return len(self.code)

    def tmp(self):
        r = self.n_regs
        self.n_regs += 1
        return r

    # -- scope helpers

    def push_scope(self):
        self.scopes.append({})

    def pop_scope(self):
        self.scopes.pop()

    def lookup(self, name):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise MemspathError(f"compiler: unbound name {name!r}")

    def bind_scalar(self, name):
        r = self.tmp()
        self.scopes[-1][name] = ("reg", r)
        return r

    def bind_array(self, name):
        s = self.n_slots
        self.n_slots += 1
        self.scopes[-1][name] = ("slot", s)
        return s

    # -- expressions

    def compile_expr(self, expr):
        """Emit code leaving the value in the returned register."""
        if isinstance(expr, IntLiteral):
            r = self.tmp()
            self.emit(OP_LOADC, r, _wrap64(expr.value))
            return r
        if isinstance(expr, VarRef):
            kind, idx = self.lookup(expr.name)
            if kind != "reg":
                raise MemspathError(f"array {expr.name!r} used as a value")
            return idx
        if isinstance(expr, ArrayIndex):
            kind, slot = self.lookup(expr.base.name)
            if kind != "slot":
                raise MemspathError(f"{expr.base.name!r} is not an array")
            ri = self.compile_expr(expr.index)
            r = self.tmp()
            self.emit(OP_AGET, r, slot, ri)
            return r
        if isinstance(expr, Unary):
            src = self.compile_expr(expr.operand)
            r = self.tmp()
            self.emit(OP_NEG if expr.op == "-" else OP_NOT, r, src)
            return r
        if isinstance(expr, Binary):
            if expr.op in ("&&", "||"):
                return self.compile_shortcircuit(expr)
            ra = self.compile_expr(expr.lhs)
            rb = self.compile_expr(expr.rhs)
            r = self.tmp()
            self.emit(_BINOP_CODE[expr.op], r, ra, rb)
            return r
        if isinstance(expr, Call):
            return self.compile_call(expr)
        if isinstance(expr, StrLiteral):
            raise MemspathError("string literal outside a printf call")
        raise TypeError(f"unhandled expression {type(expr).__name__}")

    def compile_shortcircuit(self, expr):
        r = self.tmp()
        ra = self.compile_expr(expr.lhs)
        self.emit(OP_BOOL, r, ra)
        jump = self.emit(OP_JZ if expr.op == "&&" else OP_JNZ, r, 0)
        rb = self.compile_expr(expr.rhs)
        self.emit(OP_BOOL, r, rb)
        self.patch(jump, self.here())
        return r

    def compile_call(self, expr):
        if expr.callee == "printf":
            return self.compile_printf(expr)
        fidx = self.pb.fn_index[expr.callee]
        target = self.pb.ast.function(expr.callee)
        regs = []
        for arg, param in zip(expr.args, target.params):
            if param.is_array:
                kind, slot = self.lookup(arg.name)
                r = self.tmp()
                self.emit(OP_AREF, r, slot)
            else:
                r = self.compile_expr(arg)
            regs.append(r)
        # Arguments must sit in consecutive registers for the call frame copy.
        argbase = self.n_regs
        for i, r in enumerate(regs):
            self.emit(OP_MOV, self.tmp(), r)
        dst = self.tmp()
        self.emit(OP_CALL, fidx, argbase, len(regs), dst)
        return dst

    def compile_printf(self, expr):
        if not expr.args or not isinstance(expr.args[0], StrLiteral):
            raise MemspathError("printf needs a literal format string")
        parts, n_args = split_format(expr.args[0].value)
        if n_args != len(expr.args) - 1:
            raise MemspathError(
                f"printf format takes {n_args} values, got {len(expr.args) - 1}"
            )
        regs = [self.compile_expr(a) for a in expr.args[1:]]
        argbase = self.n_regs
        for r in regs:
            self.emit(OP_MOV, self.tmp(), r)
        fmt_id = self.pb.add_format(parts, n_args)
        self.emit(OP_PRINT, fmt_id, argbase, n_args)
        r = self.tmp()
        self.emit(OP_LOADC, r, 0)
        return r

    # -- statements

    def compile_stmt(self, stmt, logged=True):
        self.cur_span = getattr(stmt, "span", minic.NO_SPAN).start
        if isinstance(stmt, Decl):
            self.emit(OP_STEP)
            for d in stmt.declarators:
                if d.is_array:
                    rs = self.compile_expr(d.array_size)
                    slot = self.bind_array(d.name)
                    self.emit(OP_ALLOC, slot, rs)
                else:
                    if d.init is not None:
                        r = self.compile_expr(d.init)
                        home = self.bind_scalar(d.name)
                        self.emit(OP_MOV, home, r)
                    else:
                        home = self.bind_scalar(d.name)
                        self.emit(OP_LOADC, home, 0)
        elif isinstance(stmt, Assign):
            if logged:
                self.emit_event("assign", None, stmt_line(stmt))
            self.emit(OP_STEP)
            self.compile_store(stmt.target, lambda: self.compile_expr(stmt.value))
        elif isinstance(stmt, CompoundAssign):
            if logged:
                self.emit_event("assign", None, stmt_line(stmt))
            self.emit(OP_STEP)
            op = _BINOP_CODE[stmt.op]
            if isinstance(stmt.target, VarRef):
                kind, home = self.lookup(stmt.target.name)
                rv = self.compile_expr(stmt.value)
                self.emit(op, home, home, rv)
            else:
                kind, slot = self.lookup(stmt.target.base.name)
                ri = self.compile_expr(stmt.target.index)
                cur = self.tmp()
                self.emit(OP_AGET, cur, slot, ri)
                rv = self.compile_expr(stmt.value)
                self.emit(op, cur, cur, rv)
                self.emit(OP_ASET, slot, ri, cur)
        elif isinstance(stmt, ExprStmt):
            self.emit(OP_STEP)
            self.compile_expr(stmt.expr)
        elif isinstance(stmt, Return):
            self.emit(OP_STEP)
            if stmt.value is None:
                self.emit(OP_RET, -1)
            else:
                r = self.compile_expr(stmt.value)
                self.emit(OP_RET, r)
        elif isinstance(stmt, Block):
            self.push_scope()
            for s in stmt.stmts:
                self.compile_stmt(s)
            self.pop_scope()
        elif isinstance(stmt, If):
            self.compile_if(stmt)
        elif isinstance(stmt, While):
            self.compile_while(stmt)
        elif isinstance(stmt, For):
            self.compile_for(stmt)
        else:
            raise TypeError(f"unhandled statement {type(stmt).__name__}")

    def compile_store(self, target, value_thunk):
        if isinstance(target, VarRef):
            kind, home = self.lookup(target.name)
            rv = value_thunk()
            self.emit(OP_MOV, home, rv)
        else:
            kind, slot = self.lookup(target.base.name)
            ri = self.compile_expr(target.index)
            rv = value_thunk()
            self.emit(OP_ASET, slot, ri, rv)

    def emit_event(self, kind, taken, text, site=-1):
        eid = self.pb.add_event(Event(kind, site, taken, text))
        self.emit(OP_EMIT, eid)

    def compile_if(self, stmt):
        site = self.pb.new_site()
        text = expr_text(stmt.cond)
        self.cur_span = stmt.span.start
        self.emit(OP_STEP)
        rc = self.compile_expr(stmt.cond)
        jfalse = self.emit(OP_JZ, rc, 0)
        self.emit(OP_PLEN)
        self.emit_event("cond", True, f"{self.pb.marker}({text})", site=site)
        self.push_scope()
        for s in stmt.then.stmts:
            self.compile_stmt(s)
        self.pop_scope()
        jend = self.emit(OP_JMP, 0)
        self.patch(jfalse, self.here())
        self.emit(OP_PLEN)
        self.emit_event("cond", False, f"{self.pb.marker}(!({text}))", site=site)
        if stmt.orelse is not None:
            self.push_scope()
            for s in stmt.orelse.stmts:
                self.compile_stmt(s)
            self.pop_scope()
        self.patch(jend, self.here())

    def compile_while(self, stmt):
        site = self.pb.new_site()
        text = expr_text(stmt.cond)
        top = self.here()
        self.cur_span = stmt.span.start
        self.emit(OP_STEP)
        rc = self.compile_expr(stmt.cond)
        jexit = self.emit(OP_JZ, rc, 0)
        self.emit(OP_PLEN)
        self.emit_event("cond", True, f"{self.pb.marker}({text})", site=site)
        self.push_scope()
        for s in stmt.body.stmts:
            self.compile_stmt(s)
        self.pop_scope()
        self.emit(OP_JMP, top)
        self.patch(jexit, self.here())

    def compile_for(self, stmt):
        site = self.pb.new_site()
        self.push_scope()
        if stmt.init is not None:
            self.compile_stmt(stmt.init, logged=False)
        text = expr_text(stmt.cond) if stmt.cond is not None else "1"
        top = self.here()
        self.cur_span = stmt.span.start
        self.emit(OP_STEP)
        if stmt.cond is not None:
            rc = self.compile_expr(stmt.cond)
        else:
            rc = self.tmp()
            self.emit(OP_LOADC, rc, 1)
        jexit = self.emit(OP_JZ, rc, 0)
        self.emit(OP_PLEN)
        self.emit_event("cond", True, f"{self.pb.marker}({text})", site=site)
        self.push_scope()
        for s in stmt.body.stmts:
            self.compile_stmt(s)
        self.pop_scope()
        if stmt.step is not None:
            self.compile_stmt(stmt.step, logged=False)
        self.emit(OP_JMP, top)
        self.patch(jexit, self.here())
        self.pop_scope()

    def finish(self):
        self.cur_span = self.fn.span.end
        self.emit(OP_RET, -1)
        code = np.asarray(self.code, dtype=np.int64).reshape(len(self.code), 5)
        spans = np.asarray(self.spans, dtype=np.int64)
        return FuncCode(self.fn.name, self.param_kinds, self.n_regs, self.n_slots, code, spans)


def stmt_line(stmt):
    """Canonical single-line text of an assignment, as its trace line."""
    lines = []
    minic._stmt_lines(stmt, 0, lines)
    assert len(lines) == 1
    return lines[0]


def _wrap64(v):
    return ((v + (1 << 63)) & ((1 << 64) - 1)) - (1 << 63)


class _ProgramBuilder:
    def __init__(self, ast, marker):
        self.ast = ast
        self.marker = marker
        self.fn_index = {f.name: i for i, f in enumerate(ast.functions)}
        self.events = []
        self._event_ids = {}
        self.formats = []
        self._format_ids = {}
        self.next_site = 0

    def new_site(self):
        s = self.next_site
        self.next_site += 1
        return s

    def add_event(self, event):
        key = (event.kind, event.site, event.taken, event.text)
        if key not in self._event_ids:
            self._event_ids[key] = len(self.events)
            self.events.append(event)
        return self._event_ids[key]

    def add_format(self, parts, n_args):
        key = (parts, n_args)
        if key not in self._format_ids:
            self._format_ids[key] = len(self.formats)
            self.formats.append((parts, n_args))
        return self._format_ids[key]


def compile_program(ast, marker="#"):
    """Compile a resolved Ast into a VM Program.

    ``marker`` selects the branch-trace prefix so that the interpreter's
    trace matches instrumented output produced with the same setting.
    """
    pb = _ProgramBuilder(ast, marker)
    functions = []
    for fn in ast.functions:
        fc = _FnCompiler(pb, fn)
        for s in fn.body.stmts:
            fc.compile_stmt(s)
        functions.append(fc.finish())
    return Program(functions, dict(pb.fn_index), pb.events, pb.formats, marker)
