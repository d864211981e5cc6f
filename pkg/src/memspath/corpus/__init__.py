"""Bundled benchmark programs: classical sorting, searching and
array-manipulation algorithms, plus the two-branch loop example used in
the path-length/mems law tests.

Each file holds exactly one self-contained function (arrays are filled
with a fixed arithmetic pattern inside the function), so an interpreted
run, an instrumented run and a native run all see the same workload.
"""

from importlib import resources

from ..minic import parse

# file stem -> entry function
ENTRY = {
    "example": "test",
    "array": "array_ops",
    "bubble": "bubble",
    "insertsort": "insertsort",
    "shell": "shell",
    "sieve": "sieve",
    "change": "change",
    "binsearch": "binsearch",
    "fft": "fft_passes",
    "topo": "topo",
}

# The ten classical benchmarks (the example program is on top of these).
BENCHMARKS = (
    "array",
    "binsearch",
    "bubble",
    "change",
    "fft",
    "insertsort",
    "shell",
    "sieve",
    "topo",
    "example",
)

# Small deterministic input sets used by the oracle-equivalence suite.
INPUTS = {
    "example": [(10, 5), (50, 25), (100, 100), (0, 0)],
    "array": [(50,), (200,), (400,)],
    "bubble": [(30,), (60,), (120,)],
    "insertsort": [(30,), (60,), (120,)],
    "shell": [(30,), (64,), (128,)],
    "sieve": [(100,), (500,), (2000,)],
    "change": [(100,), (300,), (600,)],
    "binsearch": [(50,), (200,), (500,)],
    "fft": [(16,), (64,), (256,)],
    "topo": [(50,), (200,), (1000,)],
}


def names():
    return sorted(ENTRY)


def load(name):
    """Source text of a bundled program."""
    if name not in ENTRY:
        raise KeyError(f"no bundled program named {name!r}")
    return resources.files("memspath.corpus").joinpath(f"{name}.c").read_text()


def load_ast(name):
    return parse(load(name), filename=f"{name}.c")


def entry(name):
    return ENTRY[name]
