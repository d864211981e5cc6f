"""Experiment harness: input sweeps, correlation statistics, bucket tables
and the report bundle.

Interpreter sweeps use the deterministic statement count as the time
proxy, so every number here is reproducible bit for bit; native sweeps
average wall time over repeats while the counters stay fixed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DegenerateInput, MemspathError, NoOverlappingBuckets
from .interp import Interpreter
from .minic import parse
from .native import DEFAULT_REPEAT, run_function_native

BUCKETS = (
    ("<1K", 0, 1_000),
    ("1K-10K", 1_000, 10_000),
    ("10K-100K", 10_000, 100_000),
    ("100K-1M", 100_000, 1_000_000),
    ("1M-10M", 1_000_000, 10_000_000),
    (">10M", 10_000_000, None),
)


def bucket_label(mems):
    """The unique half-open [lo, hi) interval containing ``mems``."""
    if mems < 0:
        raise MemspathError("mems cannot be negative")
    for label, lo, hi in BUCKETS:
        if hi is None or mems < hi:
            return label
    raise AssertionError


@dataclass
class ProgramSweep:
    name: str
    source: str  # MiniC text
    fn: str
    inputs: list  # list of argument tuples

    @classmethod
    def from_grid(cls, name, source, fn, n_values, mode_fracs=None):
        """Grid in the paper's style: sizes crossed with fractions of n."""
        inputs = []
        for n in n_values:
            if mode_fracs is None:
                inputs.append((n,))
            else:
                for frac in mode_fracs:
                    inputs.append((n, int(math.floor(frac * n))))
        return cls(name, source, fn, inputs)


@dataclass
class SweepSpec:
    programs: list
    repeat: int = 1
    executor: str = "interpreter"  # or 'native'
    compile_cmd: str | None = None


@dataclass
class AnalysisRow:
    program: str
    n: int
    path_len: int
    mems: int
    time: float  # steps (interpreter) or mean ms (native)
    bucket: str = ""

    def __post_init__(self):
        if not self.bucket:
            self.bucket = bucket_label(self.mems)


def sweep(spec):
    """One AnalysisRow per (program, input) cell."""
    if spec.executor not in ("interpreter", "native"):
        raise MemspathError(f"unknown executor {spec.executor!r}")
    if spec.executor == "native" and not spec.compile_cmd:
        raise MemspathError("native sweeps need a compile_cmd template")
    rows = []
    for ps in spec.programs:
        ast = parse(ps.source, filename=ps.name)
        interp = Interpreter(ast, program_name=ps.name)
        for args in ps.inputs:
            try:
                if spec.executor == "interpreter":
                    rec = interp.run(ps.fn, list(args))
                    t = float(rec.steps)
                else:
                    recs = run_function_native(
                        ast,
                        ps.fn,
                        list(args),
                        spec.compile_cmd,
                        repeat=spec.repeat,
                        program_name=ps.name,
                    )
                    rec = recs[0]
                    times = [r.time_ms for r in recs if r.time_ms is not None]
                    t = sum(times) / len(times) if times else float("nan")
            except MemspathError as exc:
                raise MemspathError(
                    f"sweep cell {ps.name}{tuple(args)} failed: {exc}"
                ) from exc
            rows.append(
                AnalysisRow(
                    program=ps.name,
                    n=int(args[0]) if args else 0,
                    path_len=rec.path_len,
                    mems=rec.mems,
                    time=t,
                )
            )
    return rows


ROWS_HEADER = ["program", "n", "path_len", "mems", "time", "bucket"]


def write_rows_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ROWS_HEADER)
        for r in rows:
            w.writerow([r.program, r.n, r.path_len, r.mems, f"{r.time:.6f}", r.bucket])


def read_rows_csv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append(
                AnalysisRow(
                    program=rec["program"],
                    n=int(rec["n"]),
                    path_len=int(rec["path_len"]),
                    mems=int(rec["mems"]),
                    time=float(rec["time"]),
                    bucket=rec.get("bucket", ""),
                )
            )
    return rows


def pearson(xs, ys):
    """Sample Pearson correlation coefficient."""
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    if len(xs) != len(ys):
        raise DegenerateInput("series lengths differ")
    n = len(xs)
    if n < 2:
        raise DegenerateInput("need at least two points")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("constant series has no defined correlation")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def correlate_within_program(rows, program):
    """Pearson r between mems and time over one program's rows."""
    mine = [r for r in rows if r.program == program]
    if len(mine) < 2:
        raise DegenerateInput(f"fewer than two rows for {program!r}")
    return pearson([r.mems for r in mine], [r.time for r in mine])


def interpretation(r):
    a = abs(r)
    if a > 0.99:
        return "very strong"
    if a >= 0.9:
        return "strong"
    if a >= 0.7:
        return "moderate"
    return "weak"


def bucket_speedup(rows_a, rows_b):
    """Per-bucket mean-time ratio between two row sets.

    A bucket contributes only when both sets populate it; the ratio is
    mean(A)/mean(B).
    """
    out = {}
    for label, _, _ in BUCKETS:
        a = [r.time for r in rows_a if r.bucket == label]
        b = [r.time for r in rows_b if r.bucket == label]
        if a and b:
            mean_a = math.fsum(a) / len(a)
            mean_b = math.fsum(b) / len(b)
            out[label] = (mean_a, mean_b, mean_a / mean_b if mean_b else float("inf"))
    if not out:
        raise NoOverlappingBuckets("the two row sets share no populated bucket")
    return out


def bucket_table(rows):
    out = []
    for label, _, _ in BUCKETS:
        mine = [r for r in rows if r.bucket == label]
        if mine:
            out.append(
                (
                    label,
                    len(mine),
                    math.fsum(r.mems for r in mine) / len(mine),
                    math.fsum(r.time for r in mine) / len(mine),
                )
            )
    return out


def report(rows, outdir, estimates=None):
    """Write the CSV bundle; returns the summary text.

    Byte-stable: fixed orders, fixed float formats. Produces rows.csv,
    correlations.csv, buckets.csv and a per-program (mems, time) series
    directory for external plotting.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = sorted(rows, key=lambda r: (r.program, r.n, r.mems, r.time))
    write_rows_csv(rows, outdir / "rows.csv")

    programs = sorted({r.program for r in rows})
    lines = ["program,r,interpretation,rows"]
    for p in programs:
        try:
            r = correlate_within_program(rows, p)
            lines.append(f"{p},{r:.6f},{interpretation(r)},{sum(1 for x in rows if x.program == p)}")
        except DegenerateInput:
            lines.append(f"{p},,degenerate,{sum(1 for x in rows if x.program == p)}")
    (outdir / "correlations.csv").write_text("\n".join(lines) + "\n")

    blines = ["bucket,rows,mean_mems,mean_time"]
    for label, count, mean_mems, mean_time in bucket_table(rows):
        blines.append(f"{label},{count},{mean_mems:.6f},{mean_time:.6f}")
    (outdir / "buckets.csv").write_text("\n".join(blines) + "\n")

    series_dir = outdir / "series"
    series_dir.mkdir(exist_ok=True)
    for p in programs:
        slines = ["mems,time"]
        for r in rows:
            if r.program == p:
                slines.append(f"{r.mems},{r.time:.6f}")
        (series_dir / f"{p}.csv").write_text("\n".join(slines) + "\n")

    if estimates:
        elines = ["path_id,delta,pind"]
        for pid, d, pi in estimates.per_path:
            elines.append(f"{pid},{d},{pi}")
        elines.append(f"weighted_value,{estimates.total_weight},{estimates.render()}")
        (outdir / "estimates.csv").write_text("\n".join(elines) + "\n")

    summary = [
        f"programs: {len(programs)}",
        f"rows: {len(rows)}",
        "within-program correlations:",
    ]
    summary.extend("  " + line for line in lines[1:])
    text = "\n".join(summary) + "\n"
    (outdir / "summary.txt").write_text(text)
    return text
