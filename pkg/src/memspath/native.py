"""Compile-and-run side: executes instrumented programs with a real C
compiler and parses their stdout into run records.

The compile command is a user template with {src} and {bin} placeholders.
A binary is built once per source and rerun for repeated timing; counters
must be identical across repeats (they are deterministic) or the whole
batch is rejected.
"""

from __future__ import annotations

import shlex
import shutil
import subprocess
import tempfile
from pathlib import Path

from .errors import CompileFailed, MemspathError, NonDeterministicCounts
from .instrument import TAG, InstrumentConfig, instrument, parse_run_output
from .interp import RunRecord

DEFAULT_REPEAT = 5


def find_compiler():
    """A working C compiler template, or None."""
    for cc in ("cc", "gcc", "clang"):
        if shutil.which(cc):
            return f"{cc} -O0 -fwrapv -o {{bin}} {{src}}"
    return None


def synthesize_main(fn_def):
    """A tagged main() that forwards argv integers to the target function.

    Tagged lines are instrumentation from strip()'s point of view, so the
    harness disappears along with the rest of the pass.
    """
    if any(p.is_array for p in fn_def.params):
        raise MemspathError(
            f"cannot synthesize a native harness for {fn_def.name!r}: "
            "array parameters are interpreter-only"
        )
    n = len(fn_def.params)
    args = ", ".join(f"atoi(argv[{i + 1}])" for i in range(n))
    lines = [
        f"int main(int argc, char **argv) {{ {TAG}",
        f"    if (argc != {n + 1}) {{ return 2; }} {TAG}",
        f"    {fn_def.name}({args}); {TAG}",
        f"    return 0; {TAG}",
        f"}} {TAG}",
    ]
    return "\n".join(lines) + "\n"


def prepare_native_source(ast, fn, cfg=None):
    """Instrumented source plus includes and a main harness, ready to compile."""
    cfg = cfg or InstrumentConfig(timer="monotonic")
    fn_def = ast.function(fn)
    if fn_def is None:
        raise MemspathError(f"unknown function {fn!r}")
    text = instrument(ast, cfg)
    if "stdlib.h" not in ast.includes:
        text = f"#include <stdlib.h> {TAG}\n" + text
    if ast.function("main") is None:
        text = text + "\n" + synthesize_main(fn_def)
    return text


def compile_source(source_text, compile_cmd, workdir):
    src = Path(workdir) / "program.c"
    binary = Path(workdir) / "program"
    src.write_text(source_text)
    cmd = shlex.split(compile_cmd.format(src=str(src), bin=str(binary)))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise CompileFailed(
            f"compiler exited with {proc.returncode}: {' '.join(cmd)}",
            stderr=proc.stderr,
        )
    return binary


def run_native(
    source_text,
    compile_cmd,
    args,
    repeat=DEFAULT_REPEAT,
    program_name="<program>",
    workdir=None,
    timeout=120,
):
    """Compile once, execute ``repeat`` times, parse each stdout.

    Returns one RunRecord per execution; path_len/mems are identical across
    them (enforced), time_ms varies. The record's counters come from the
    last report block printed, which belongs to the target function when
    callees are instrumented too.
    """
    if repeat < 1:
        raise MemspathError("repeat must be >= 1")

    own_dir = None
    if workdir is None:
        own_dir = tempfile.TemporaryDirectory(prefix="memspath-")
        workdir = own_dir.name
    try:
        binary = compile_source(source_text, compile_cmd, workdir)
        records = []
        argv = [str(binary)] + [str(int(a)) for a in args]
        for _ in range(repeat):
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
            if proc.returncode != 0:
                raise MemspathError(
                    f"instrumented binary exited with {proc.returncode}"
                )
            block = parse_run_output(proc.stdout)[-1]
            records.append(
                RunRecord(
                    program=program_name,
                    input=" ".join(str(int(a)) for a in args),
                    source="native",
                    path_len=block.path_len,
                    mems=block.mems,
                    time_ms=block.time_ms,
                    steps=None,
                    trace=block.trace,
                )
            )
        counts = {(r.path_len, r.mems, tuple(r.trace)) for r in records}
        if len(counts) > 1:
            raise NonDeterministicCounts(
                f"counters differ across {repeat} runs of {program_name}"
            )
        return records
    finally:
        if own_dir is not None:
            own_dir.cleanup()


def run_function_native(
    ast,
    fn,
    args,
    compile_cmd,
    cfg=None,
    repeat=DEFAULT_REPEAT,
    program_name="<program>",
):
    """Instrument ``fn``, build the harness, compile and run."""
    source = prepare_native_source(ast, fn, cfg)
    return run_native(
        source, compile_cmd, args, repeat=repeat, program_name=program_name
    )
