"""Command-line front end.

Subcommands cover the whole pipeline: instrument / strip source, interpret
and natively run programs, enumerate paths, model-count path conditions,
estimate weighted performance, sweep input grids and analyze/report the
results.

Exit codes: 0 success, 1 usage error, 2 analysis error (parse failures,
limits, infeasibility, degenerate statistics), 3 external tool failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
import tomllib
from fractions import Fraction
from pathlib import Path

from . import analysis, corpus, counting, kernels, symexec
from .constraints import parse_condition_text
from .counting import estimate_performance, model_count
from .errors import (
    CompileFailed,
    MemspathError,
    NonDeterministicCounts,
    OutputFormatMismatch,
    ParseError,
)
from .instrument import InstrumentConfig, instrument, strip
from .interp import ArraySpec, Interpreter, write_records_csv
from .minic import parse, parse_file, pretty_print
from .native import find_compiler, run_function_native


def _load_ast(path):
    return parse_file(path)


def _pick_fn(ast, requested):
    if requested:
        if ast.function(requested) is None:
            raise MemspathError(f"no function named {requested!r} in this file")
        return requested
    candidates = [f.name for f in ast.functions if f.name != "main"]
    if len(candidates) != 1:
        raise MemspathError(
            f"specify --fn: file defines {', '.join(candidates) or 'no functions'}"
        )
    return candidates[0]


def _parse_domains(pairs):
    domains = {}
    for text in pairs or []:
        name, _, rng = text.partition("=")
        lo, _, hi = rng.partition("..")
        if not name or not lo or not hi:
            raise MemspathError(f"bad domain {text!r}; expected var=lo..hi")
        domains[name] = (int(lo), int(hi))
    return domains


def _write_or_print(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommand handlers


def cmd_instrument(args):
    cfg = InstrumentConfig(
        cond_marker=args.marker, timer=args.timer,
        trace="full" if args.trace == "full" else "counts",
        target_functions=args.fn or None,
    )
    _write_or_print(instrument(_load_ast(args.file), cfg), args.output)
    return 0


def cmd_strip(args):
    _write_or_print(strip(Path(args.file).read_text()), args.output)
    return 0


def cmd_paths(args):
    ast = _load_ast(args.file)
    fn = _pick_fn(ast, args.fn)
    domains = _parse_domains(args.domain)
    enum = symexec.enumerate_paths(
        ast,
        fn,
        domains,
        max_paths=args.max_paths,
        max_loop_unroll=args.unroll,
        assume=args.assume or None,
    )
    inputs = enum.paths[0].inputs if enum.paths else sorted(domains)
    symexec.write_paths(enum, fn, inputs, args.output)
    print(f"{len(enum.paths)} feasible paths -> {args.output}"
          + (f" (truncated: {enum.truncated})" if enum.truncated else ""))
    return 0 if enum.truncated is None else 2


def cmd_count(args):
    records, _meta = symexec.read_paths(args.paths)
    domains = _parse_domains(args.domain)
    rows = []
    for rec in records:
        cond = parse_condition_text(rec.condition_text)
        delta = model_count(cond, domains, budget=args.budget)
        rows.append((rec.path_id, delta, rec.pind))
    with open(args.output, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path_id", "delta", "pind"])
        for pid, delta, pind in rows:
            w.writerow([pid, delta, pind])
    print(f"{len(rows)} conditions counted -> {args.output}")
    return 0


def cmd_estimate(args):
    records, _meta = symexec.read_paths(args.paths)
    pinds = {r.path_id: r.pind for r in records}
    entries = []
    with open(args.counts, newline="") as fh:
        for rec in csv.DictReader(fh):
            pid = rec["path_id"]
            if pid == "weighted_value":
                continue
            if pid not in pinds:
                raise MemspathError(f"counts file names unknown path {pid!r}")
            entries.append((pid, int(rec["delta"]), pinds[pid]))
    est = estimate_performance(entries)
    num = est.numerator()
    print(f"Performance = {num}/{est.total_weight} = {est.render()}")
    if args.output:
        counting.write_estimate_csv(est, args.output)
    return 0


def cmd_interp(args):
    ast = _load_ast(args.file)
    fn = _pick_fn(ast, args.fn)
    fn_def = ast.function(fn)
    array_specs = {}
    for text in args.array or []:
        name, _, spec = text.partition("=")
        array_specs[name] = ArraySpec.parse(spec)
    call_args = []
    scalars = list(args.args or [])
    for p in fn_def.params:
        if p.is_array:
            if p.name not in array_specs:
                raise MemspathError(f"array parameter {p.name!r} needs --array {p.name}=<spec>")
            call_args.append(array_specs[p.name])
        else:
            if not scalars:
                raise MemspathError(f"missing value for parameter {p.name!r}")
            call_args.append(int(scalars.pop(0)))
    it = Interpreter(ast, marker=args.marker, program_name=Path(args.file).stem)
    rec = it.run(fn, call_args, trace=args.trace, max_steps=args.max_steps)
    if args.trace:
        print("Path:")
        for line in rec.trace:
            print(line)
    print(f"Total path length: {rec.path_len}")
    print(f"Total memory accesses: {rec.mems}")
    print(f"Steps: {rec.steps}")
    print(f"Return: {rec.ret}")
    if args.output:
        write_records_csv([rec], args.output)
    return 0


def cmd_run(args):
    ast = _load_ast(args.file)
    fn = _pick_fn(ast, args.fn)
    cc = args.cc or find_compiler()
    if not cc:
        raise CompileFailed("no C compiler found; pass --cc '<template>'")
    cfg = InstrumentConfig(
        cond_marker=args.marker,
        timer=args.timer,
        trace="full" if args.trace == "full" else "counts",
    )
    records = run_function_native(
        ast, fn, [int(a) for a in args.args or []], cc,
        cfg=cfg, repeat=args.repeat, program_name=Path(args.file).stem,
    )
    times = [r.time_ms for r in records if r.time_ms is not None]
    print(f"runs: {len(records)}  path_len: {records[0].path_len}  mems: {records[0].mems}")
    if times:
        print(f"time_ms: mean {sum(times) / len(times):.6f}  "
              f"min {min(times):.6f}  max {max(times):.6f}")
    if args.output:
        write_records_csv(records, args.output)
    return 0


def _sweep_spec_from_config(path):
    with open(path, "rb") as fh:
        cfg = tomllib.load(fh)
    programs = []
    for entry in cfg.get("program", []):
        if "corpus" in entry:
            name = entry["corpus"]
            source = corpus.load(name)
            fn = entry.get("fn", corpus.entry(name))
        else:
            file = entry["file"]
            name = entry.get("name", Path(file).stem)
            source = Path(file).read_text()
            fn = entry.get("fn") or _pick_fn(parse(source), None)
        if "inputs" in entry:
            inputs = [tuple(v) for v in entry["inputs"]]
            ps = analysis.ProgramSweep(name, source, fn, inputs)
        else:
            ps = analysis.ProgramSweep.from_grid(
                name, source, fn, entry["n"], entry.get("mode_fracs")
            )
        programs.append(ps)
    if not programs:
        raise MemspathError("sweep config defines no [[program]] entries")
    return analysis.SweepSpec(
        programs=programs,
        repeat=int(cfg.get("repeat", 1)),
        executor=cfg.get("executor", "interpreter"),
        compile_cmd=cfg.get("compile_cmd") or (find_compiler() if cfg.get("executor") == "native" else None),
    )


def cmd_sweep(args):
    spec = _sweep_spec_from_config(args.config)
    rows = analysis.sweep(spec)
    out = args.output or "sweep_rows.csv"
    analysis.write_rows_csv(rows, out)
    print(f"{len(rows)} rows -> {out}")
    return 0


def cmd_analyze(args):
    rows = analysis.read_rows_csv(args.csv)
    if args.group_by == "bucket":
        print("bucket,rows,mean_mems,mean_time")
        for label, count, mean_mems, mean_time in analysis.bucket_table(rows):
            print(f"{label},{count},{mean_mems:.6f},{mean_time:.6f}")
    else:
        print("program,r,interpretation,rows")
        for p in sorted({r.program for r in rows}):
            r = analysis.correlate_within_program(rows, p)
            n = sum(1 for x in rows if x.program == p)
            print(f"{p},{r:.6f},{analysis.interpretation(r)},{n}")
    return 0


def cmd_report(args):
    rows = []
    for path in args.csv:
        rows.extend(analysis.read_rows_csv(path))
    text = analysis.report(rows, args.output)
    sys.stdout.write(text)
    return 0


def cmd_backend(args):
    print(f"active kernel backend: {kernels.BACKEND}")
    print(f"available: {', '.join(sorted(kernels.backends()))}")
    return 0


# -- parser


def build_parser():
    p = argparse.ArgumentParser(
        prog="memspath",
        description="Static performance estimation via memory-access counting.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("instrument", help="rewrite a program with tracing and counters")
    sp.add_argument("file")
    sp.add_argument("--marker", choices=["#", "@"], default="#")
    sp.add_argument("--timer", choices=["monotonic", "none"], default="none")
    sp.add_argument("--trace", choices=["full", "counts"], default="full")
    sp.add_argument("--fn", action="append", help="instrument only these functions")
    sp.add_argument("-o", "--output")
    sp.set_defaults(handler=cmd_instrument)

    sp = sub.add_parser("strip", help="remove instrumentation again")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")
    sp.set_defaults(handler=cmd_strip)

    sp = sub.add_parser("paths", help="enumerate feasible paths symbolically")
    sp.add_argument("file")
    sp.add_argument("--fn")
    sp.add_argument("--domain", action="append", metavar="VAR=LO..HI")
    sp.add_argument("--max-paths", type=int, default=symexec.DEFAULT_MAX_PATHS)
    sp.add_argument("--unroll", type=int, default=symexec.DEFAULT_MAX_UNROLL)
    sp.add_argument("--assume", action="append", metavar="EXPR",
                    help="extra path-condition conjuncts, e.g. '(x > 20) && (x <= 100)'")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(handler=cmd_paths)

    sp = sub.add_parser("count", help="model-count exported path conditions")
    sp.add_argument("--paths", required=True)
    sp.add_argument("--domain", action="append", metavar="VAR=LO..HI")
    sp.add_argument("--budget", type=int, default=counting.DEFAULT_BUDGET)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(handler=cmd_count)

    sp = sub.add_parser("estimate", help="weighted-average performance from paths + counts")
    sp.add_argument("--paths", required=True)
    sp.add_argument("--counts", required=True)
    sp.add_argument("-o", "--output")
    sp.set_defaults(handler=cmd_estimate)

    sp = sub.add_parser("interp", help="run a function in the interpreter")
    sp.add_argument("file")
    sp.add_argument("--fn")
    sp.add_argument("--args", nargs="*", type=int)
    sp.add_argument("--array", action="append", metavar="NAME=SPEC",
                    help="array input: sorted:N, reversed:N, constant:N:V, random:N:SEED or 1,2,3")
    sp.add_argument("--trace", action="store_true")
    sp.add_argument("--marker", choices=["#", "@"], default="#")
    sp.add_argument("--max-steps", type=int, default=200_000_000)
    sp.add_argument("-o", "--output", help="write the run record CSV here")
    sp.set_defaults(handler=cmd_interp)

    sp = sub.add_parser("run", help="compile and execute an instrumented build")
    sp.add_argument("file")
    sp.add_argument("--fn")
    sp.add_argument("--cc", help="compile template with {src} and {bin}")
    sp.add_argument("--args", nargs="*", type=int)
    sp.add_argument("--repeat", type=int, default=5)
    sp.add_argument("--marker", choices=["#", "@"], default="#")
    sp.add_argument("--timer", choices=["monotonic", "none"], default="monotonic")
    sp.add_argument("--trace", choices=["full", "counts"], default="counts")
    sp.add_argument("-o", "--output", help="write run record CSV here")
    sp.set_defaults(handler=cmd_run)

    sp = sub.add_parser("sweep", help="run an input grid from a TOML config")
    sp.add_argument("config")
    sp.add_argument("-o", "--output")
    sp.set_defaults(handler=cmd_sweep)

    sp = sub.add_parser("analyze", help="statistics over a sweep CSV")
    sp.add_argument("csv")
    sp.add_argument("--group-by", choices=["program", "bucket"], default="program")
    sp.set_defaults(handler=cmd_analyze)

    sp = sub.add_parser("report", help="write the CSV/series report bundle")
    sp.add_argument("csv", nargs="+")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(handler=cmd_report)

    sp = sub.add_parser("backend", help="show which kernel backend is active")
    sp.set_defaults(handler=cmd_backend)

    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.handler(args) or 0
    except ParseError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return 2
    except (CompileFailed, NonDeterministicCounts, OutputFormatMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except MemspathError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
