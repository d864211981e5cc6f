"""Source-to-source instrumentation.

Rewrites a program so that each target function reports, on stdout:

    Path:
    <trace lines: branch decisions and assignment texts>
    Total path length: <int>
    Total memory accesses: <int>
    Execution time: <float> ms        (only with the monotonic timer)

Branch logging goes at the head of each taken branch body (loop exits are
not logged); an else-less ``if`` gets a synthesized else so both outcomes
are always logged. Every statement touching k > 0 array elements gets a
``mems = mems + k;`` companion. Every inserted line ends with a marker
comment so ``strip`` can remove the whole pass again; stripping yields the
canonical pretty-printed original.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import mems
from .bytecode import stmt_line
from .errors import (
    MemspathError,
    NotInstrumentedByUs,
    OutputFormatMismatch,
    TargetNotFound,
)
from .minic import (
    Assign,
    Block,
    CompoundAssign,
    Decl,
    ExprStmt,
    For,
    If,
    Return,
    While,
    _inline_stmt,
    _stmt_lines,
    expr_text,
    parse,
)

TAG = "/*+*/"

COUNTER_NAMES = ("mems", "path_len", "_mp_t0", "_mp_t1")


@dataclass
class InstrumentConfig:
    cond_marker: str = "#"
    timer: str = "none"  # 'monotonic' | 'none'
    trace: str = "full"  # 'full' | 'counts'
    # None means every user function except main.
    target_functions: list | None = None

    def __post_init__(self):
        if self.cond_marker not in ("#", "@"):
            raise MemspathError(f"cond_marker must be '#' or '@', not {self.cond_marker!r}")
        if self.timer not in ("monotonic", "none"):
            raise MemspathError(f"unknown timer {self.timer!r}")
        if self.trace not in ("full", "counts"):
            raise MemspathError(f"unknown trace mode {self.trace!r}")


def _targets(ast, cfg):
    names = [f.name for f in ast.functions]
    if cfg.target_functions is None:
        return [n for n in names if n != "main"]
    for t in cfg.target_functions:
        if t not in names:
            raise TargetNotFound(f"no function named {t!r} to instrument")
    return [t for t in cfg.target_functions if t != "main"]


def _fmt_escape(text):
    return text.replace("%", "%%")


class _Emitter:
    def __init__(self, cfg):
        self.cfg = cfg
        self.lines = []

    def orig(self, indent, text):
        self.lines.append("    " * indent + text)

    def ins(self, indent, text):
        self.lines.append("    " * indent + text + " " + TAG)

    def log(self, indent, stdout_line):
        if self.cfg.trace == "full":
            self.ins(indent, f'printf("{_fmt_escape(stdout_line)}\\n");')

    def cond_log(self, indent, text, taken):
        marker = self.cfg.cond_marker
        line = f"{marker}({text})" if taken else f"{marker}(!({text}))"
        if self.cfg.trace == "full":
            self.ins(indent, f'printf("{_fmt_escape(line)}\\n");')
        self.ins(indent, "path_len = path_len + 1;")

    def mems_add(self, indent, k):
        if k > 0:
            self.ins(indent, f"mems = mems + {k};")

    def entry_block(self, indent):
        self.ins(indent, "long long mems = 0;")
        self.ins(indent, "long long path_len = 0;")
        if self.cfg.timer == "monotonic":
            self.ins(indent, "struct timespec _mp_t0, _mp_t1;")
            self.ins(indent, "clock_gettime(CLOCK_MONOTONIC, &_mp_t0);")
        self.ins(indent, 'printf("Path:\\n");')

    def summary_block(self, indent):
        self.ins(indent, 'printf("Total path length: %lld\\n", path_len);')
        self.ins(indent, 'printf("Total memory accesses: %lld\\n", mems);')
        if self.cfg.timer == "monotonic":
            self.ins(indent, "clock_gettime(CLOCK_MONOTONIC, &_mp_t1);")
            self.ins(
                indent,
                'printf("Execution time: %.6f ms\\n", '
                "(double)(_mp_t1.tv_sec - _mp_t0.tv_sec) * 1000.0 + "
                "(double)(_mp_t1.tv_nsec - _mp_t0.tv_nsec) / 1000000.0);",
            )

    # -- statement emission

    def stmt(self, s, indent):
        if isinstance(s, Decl):
            self.orig(indent, _decl_text(s))
            self.mems_add(indent, mems.count_stmt(s).total)
        elif isinstance(s, (Assign, CompoundAssign)):
            text = stmt_line(s)
            self.log(indent, text)
            self.orig(indent, text)
            self.mems_add(indent, mems.count_stmt(s).total)
        elif isinstance(s, ExprStmt):
            self.orig(indent, stmt_line(s))
            self.mems_add(indent, mems.count_stmt(s).total)
        elif isinstance(s, Return):
            self.mems_add(indent, mems.count_stmt(s).total)
            self.summary_block(indent)
            self.orig(indent, stmt_line(s))
        elif isinstance(s, Block):
            self.orig(indent, "{")
            for sub in s.stmts:
                self.stmt(sub, indent + 1)
            self.orig(indent, "}")
        elif isinstance(s, If):
            self.if_stmt(s, indent)
        elif isinstance(s, While):
            self.while_stmt(s, indent)
        elif isinstance(s, For):
            self.for_stmt(s, indent)
        else:
            raise TypeError(f"unhandled statement {type(s).__name__}")

    def if_stmt(self, s, indent):
        text = expr_text(s.cond)
        self.mems_add(indent, mems.count_expr(s.cond).total)
        self.orig(indent, f"if ({text}) {{")
        self.cond_log(indent + 1, text, True)
        for sub in s.then.stmts:
            self.stmt(sub, indent + 1)
        if s.orelse is not None:
            self.orig(indent, "} else {")
            self.cond_log(indent + 1, text, False)
            for sub in s.orelse.stmts:
                self.stmt(sub, indent + 1)
            self.orig(indent, "}")
        else:
            self.orig(indent, "}")
            # Synthesized else: logs the false outcome without changing
            # what strip() recovers (the whole line is tagged).
            false_log = ""
            if self.cfg.trace == "full":
                marker = self.cfg.cond_marker
                false_log = f'printf("{_fmt_escape(f"{marker}(!({text}))")}\\n"); '
            self.ins(indent, "else { " + false_log + "path_len = path_len + 1; }")

    def while_stmt(self, s, indent):
        text = expr_text(s.cond)
        cond_cost = mems.count_expr(s.cond).total
        self.mems_add(indent, cond_cost)
        self.orig(indent, f"while ({text}) {{")
        self.cond_log(indent + 1, text, True)
        for sub in s.body.stmts:
            self.stmt(sub, indent + 1)
        self.mems_add(indent + 1, cond_cost)
        self.orig(indent, "}")

    def for_stmt(self, s, indent):
        init = _inline_stmt(s.init)
        text = expr_text(s.cond) if s.cond is not None else ""
        step = _inline_stmt(s.step)
        cond_cost = mems.count_expr(s.cond).total if s.cond is not None else 0
        init_cost = mems.count_stmt(s.init).total if s.init is not None else 0
        step_cost = mems.count_stmt(s.step).total if s.step is not None else 0
        self.mems_add(indent, init_cost + cond_cost)
        self.orig(indent, f"for ({init}; {text}; {step}) {{")
        self.cond_log(indent + 1, text if s.cond is not None else "1", True)
        for sub in s.body.stmts:
            self.stmt(sub, indent + 1)
        self.mems_add(indent + 1, step_cost + cond_cost)
        self.orig(indent, "}")


def _decl_text(stmt):
    lines = []
    _stmt_lines(stmt, 0, lines)
    assert len(lines) == 1
    return lines[0]


def _collects_names(fn):
    names = set(p.name for p in fn.params)

    def walk_stmt(s):
        if isinstance(s, Decl):
            for d in s.declarators:
                names.add(d.name)
        elif isinstance(s, Block):
            for sub in s.stmts:
                walk_stmt(sub)
        elif isinstance(s, If):
            for sub in s.then.stmts:
                walk_stmt(sub)
            if s.orelse is not None:
                for sub in s.orelse.stmts:
                    walk_stmt(sub)
        elif isinstance(s, While):
            for sub in s.body.stmts:
                walk_stmt(sub)
        elif isinstance(s, For):
            if s.init is not None:
                walk_stmt(s.init)
            for sub in s.body.stmts:
                walk_stmt(sub)

    for s in fn.body.stmts:
        walk_stmt(s)
    return names


def instrument(ast, cfg=None):
    """Emit instrumented C text for the target functions of ``ast``."""
    cfg = cfg or InstrumentConfig()
    targets = set(_targets(ast, cfg))
    for name in targets:
        used = _collects_names(ast.function(name))
        clash = used.intersection(COUNTER_NAMES)
        if clash:
            raise MemspathError(
                f"function {name!r} already uses reserved name(s) {sorted(clash)}"
            )

    lines = []
    for inc in ast.includes:
        lines.append(f"#include <{inc}>")
    needed = ["stdio.h"]
    if cfg.timer == "monotonic":
        needed.append("time.h")
    for inc in needed:
        if inc not in ast.includes:
            lines.append(f"#include <{inc}> {TAG}")
    lines.append("")

    for i, fn in enumerate(ast.functions):
        if i:
            lines.append("")
        params = ", ".join(_param_text(p) for p in fn.params)
        lines.append(f"{fn.ret} {fn.name}({params}) {{")
        em = _Emitter(cfg)
        if fn.name in targets:
            em.entry_block(1)
            for s in fn.body.stmts:
                em.stmt(s, 1)
            if not (fn.body.stmts and isinstance(fn.body.stmts[-1], Return)):
                em.summary_block(1)
        else:
            for s in fn.body.stmts:
                _stmt_lines(s, 1, em.lines)
        lines.extend(em.lines)
        lines.append("}")
    return "\n".join(lines) + "\n"


def _param_text(p):
    if p.is_array:
        size = expr_text(p.array_size) if p.array_size is not None else ""
        return f"int {p.name}[{size}]"
    return f"int {p.name}"


def strip(instrumented):
    """Remove every inserted line; the result is the canonical original."""
    kept = []
    removed = 0
    for line in instrumented.split("\n"):
        if line.rstrip().endswith(TAG):
            removed += 1
        else:
            kept.append(line)
    if removed == 0:
        raise NotInstrumentedByUs("no instrumentation marker comments found")
    text = "\n".join(kept)
    # collapse the blank line runs the removals may leave behind
    while "\n\n\n" in text:
        text = text.replace("\n\n\n", "\n\n")
    return text.strip("\n") + "\n"


# ---------------------------------------------------------------------------
# Instrumented stdout parsing (shared by native runs and interpreter runs
# of instrumented source).


@dataclass
class ReportBlock:
    trace: list = field(default_factory=list)
    path_len: int = 0
    mems: int = 0
    time_ms: float | None = None


_PLEN_PREFIX = "Total path length: "
_MEMS_PREFIX = "Total memory accesses: "
_TIME_PREFIX = "Execution time: "


def parse_run_output(text):
    """Parse instrumented stdout into ReportBlocks (one per summary)."""
    blocks = []
    lines = text.split("\n")
    i = 0
    n = len(lines)
    while i < n and lines[i] != "Path:":
        if lines[i].strip():
            raise OutputFormatMismatch(
                "unexpected line before 'Path:' header", line=lines[i], expected="Path:"
            )
        i += 1
    while i < n:
        if lines[i] != "Path:":
            break
        i += 1
        block = ReportBlock()
        while i < n and not lines[i].startswith(_PLEN_PREFIX):
            block.trace.append(lines[i])
            i += 1
        if i >= n:
            raise OutputFormatMismatch(
                "missing total path length line", expected=_PLEN_PREFIX + "<int>"
            )
        block.path_len = _parse_int(lines[i], _PLEN_PREFIX)
        i += 1
        if i >= n or not lines[i].startswith(_MEMS_PREFIX):
            raise OutputFormatMismatch(
                "missing total memory accesses line",
                line=lines[i] if i < n else None,
                expected=_MEMS_PREFIX + "<int>",
            )
        block.mems = _parse_int(lines[i], _MEMS_PREFIX)
        i += 1
        if i < n and lines[i].startswith(_TIME_PREFIX):
            body = lines[i][len(_TIME_PREFIX):]
            if not body.endswith(" ms"):
                raise OutputFormatMismatch(
                    "malformed execution time line", line=lines[i],
                    expected=_TIME_PREFIX + "<float> ms",
                )
            block.time_ms = float(body[:-3])
            i += 1
        blocks.append(block)
        while i < n and not lines[i].strip():
            i += 1
    if not blocks:
        raise OutputFormatMismatch("no 'Path:' header found", expected="Path:")
    return blocks


def _parse_int(line, prefix):
    body = line[len(prefix):]
    try:
        return int(body)
    except ValueError:
        raise OutputFormatMismatch(
            "malformed counter line", line=line, expected=prefix + "<int>"
        ) from None


def instrument_source(source, cfg=None, filename="<input>"):
    """Parse then instrument in one step."""
    return instrument(parse(source, filename), cfg)
