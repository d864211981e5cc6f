"""Dynamic execution front end: the deterministic MiniC interpreter.

This is the oracle side of the toolchain: it executes a program on concrete
inputs and reports exactly what an instrumented build would report --
path length, mems, and the trace lines -- plus a deterministic statement
count (``steps``) that stands in for wall time in analyses.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from . import kernels
from .bytecode import (
    STATUS_BAD_ALLOC,
    STATUS_DEPTH,
    STATUS_DIV_ZERO,
    STATUS_OK,
    STATUS_OOB,
    STATUS_STEP_LIMIT,
    compile_program,
)
from .errors import (
    CallDepthExceeded,
    DivisionByZero,
    IndexOutOfBounds,
    InvalidArraySize,
    MemspathError,
    StepLimitExceeded,
)

DEFAULT_MAX_STEPS = 200_000_000


@dataclass
class ArraySpec:
    """Initial contents for an array parameter.

    kind: 'explicit', 'sorted', 'reversed', 'constant' or 'random'.
    'random' is a seeded LCG so runs are reproducible; the seed is part
    of the run record's input description.
    """

    kind: str
    length: int = 0
    value: int = 0  # constant fill value, or the random seed
    contents: list | None = None

    @classmethod
    def explicit(cls, contents):
        return cls("explicit", len(contents), 0, list(contents))

    @classmethod
    def parse(cls, text):
        """Parse 'sorted:8', 'constant:8:7', 'random:8:42' or '1,5,2'."""
        if ":" in text or text in ("sorted", "reversed", "constant", "random"):
            parts = text.split(":")
            kind = parts[0]
            if kind not in ("sorted", "reversed", "constant", "random"):
                raise MemspathError(f"unknown array generator {kind!r}")
            if len(parts) < 2:
                raise MemspathError(f"array generator {text!r} needs a length")
            length = int(parts[1])
            value = int(parts[2]) if len(parts) > 2 else (1 if kind == "random" else 0)
            return cls(kind, length, value)
        return cls.explicit([int(v) for v in text.split(",") if v.strip()])

    def materialize(self):
        if self.kind == "explicit":
            return list(self.contents)
        n = self.length
        if n < 0:
            raise InvalidArraySize(f"array length {n} is negative")
        if self.kind == "sorted":
            return list(range(n))
        if self.kind == "reversed":
            return list(range(n - 1, -1, -1))
        if self.kind == "constant":
            return [self.value] * n
        if self.kind == "random":
            out = []
            state = self.value & 0x7FFFFFFF
            for _ in range(n):
                state = (1103515245 * state + 12345) % (1 << 31)
                out.append(state % 10000)
            return out
        raise MemspathError(f"unknown array generator {self.kind!r}")

    def describe(self):
        if self.kind == "explicit":
            return "[" + ",".join(str(v) for v in self.contents) + "]"
        if self.kind in ("constant", "random"):
            return f"{self.kind}:{self.length}:{self.value}"
        return f"{self.kind}:{self.length}"


@dataclass
class RunRecord:
    """One dynamic execution of one function on one input."""

    program: str
    input: str
    source: str  # 'interpreter' or 'native'
    path_len: int
    mems: int
    time_ms: float | None = None
    steps: int | None = None
    trace: list | None = None  # stdout trace lines, in order
    decisions: list | None = None  # (site, taken) pairs, in order
    ret: int | None = None
    reads: int | None = None
    writes: int | None = None
    outputs: list = field(default_factory=list)  # program printf output
    arrays: dict = field(default_factory=dict)  # array-param pos -> final contents


CSV_HEADER = ["program", "input", "source", "path_len", "mems", "time_ms", "steps"]


def write_records_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow(
                [
                    r.program,
                    r.input,
                    r.source,
                    r.path_len,
                    r.mems,
                    "" if r.time_ms is None else f"{r.time_ms:.6f}",
                    "" if r.steps is None else r.steps,
                ]
            )


def describe_input(scalars, array_specs):
    parts = [str(v) for v in scalars]
    parts += [s.describe() for s in array_specs]
    return " ".join(parts)


class Interpreter:
    """Compiles a program once and runs its functions on concrete inputs."""

    def __init__(self, ast, marker="#", program_name="<program>"):
        self.ast = ast
        self.marker = marker
        self.program_name = program_name
        self.program = compile_program(ast, marker)

    def run(
        self,
        fn,
        args,
        *,
        max_steps=DEFAULT_MAX_STEPS,
        trace=False,
        max_depth=256,
    ):
        fn_def = self.ast.function(fn)
        if fn_def is None:
            raise MemspathError(f"unknown function {fn!r}")
        if len(args) != len(fn_def.params):
            raise MemspathError(
                f"{fn!r} takes {len(fn_def.params)} arguments, got {len(args)}"
            )
        scalars = []
        specs = []
        for p, a in zip(fn_def.params, args):
            if p.is_array:
                if isinstance(a, ArraySpec):
                    specs.append(a)
                elif isinstance(a, str):
                    specs.append(ArraySpec.parse(a))
                else:
                    specs.append(ArraySpec.explicit(a))
            else:
                scalars.append(int(a))

        arrays = [s.materialize() for s in specs]
        outcome = kernels.run_vm(
            self.program,
            self.program.func_index(fn),
            scalars,
            arrays,
            max_steps,
            trace,
            max_depth,
        )

        events = [self.program.events[i] for i in outcome.events]
        record = RunRecord(
            program=self.program_name,
            input=describe_input(scalars, specs),
            source="interpreter",
            path_len=outcome.path_len,
            mems=outcome.mems,
            steps=outcome.steps,
            trace=[e.text for e in events] if trace else None,
            decisions=[(e.site, e.taken) for e in events if e.kind == "cond"]
            if trace
            else None,
            ret=outcome.ret,
            reads=outcome.reads,
            writes=outcome.writes,
            outputs=outcome.outputs,
            arrays=outcome.arrays,
        )
        if outcome.status != STATUS_OK:
            where = f"in {fn!r}"
            if outcome.err_fn >= 0:
                fc = self.program.functions[outcome.err_fn]
                where = f"in {fc.name!r} (byte {int(fc.spans[outcome.err_pc])})"
            if outcome.status == STATUS_STEP_LIMIT:
                raise StepLimitExceeded(f"step limit {max_steps} exceeded {where}", record)
            if outcome.status == STATUS_DIV_ZERO:
                raise DivisionByZero(f"division by zero {where}", record)
            if outcome.status == STATUS_OOB:
                raise IndexOutOfBounds(f"array index out of bounds {where}", record)
            if outcome.status == STATUS_BAD_ALLOC:
                raise InvalidArraySize(f"bad array allocation {where}", record)
            if outcome.status == STATUS_DEPTH:
                raise CallDepthExceeded(f"call depth exceeded {where}", record)
            raise MemspathError(f"interpreter failure ({outcome.status}) {where}")
        return record


def interpret(ast, fn, args, *, max_steps=DEFAULT_MAX_STEPS, trace=False,
              marker="#", program_name="<program>", max_depth=256):
    """One-shot convenience wrapper around Interpreter."""
    return Interpreter(ast, marker, program_name).run(
        fn, args, max_steps=max_steps, trace=trace, max_depth=max_depth
    )
