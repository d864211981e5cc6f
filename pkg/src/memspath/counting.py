"""Exact model counting over bounded integer boxes, and the estimator.

Counting strategy, in order of preference:

1. Single-variable affine constraints are folded into per-variable
   intervals (plus per-variable != exclusions) in closed form; if nothing
   else remains, the count is a product of interval sizes -- exact at any
   scale, no enumeration.
2. Coupled affine constraints: variables not appearing in any coupled
   constraint factor out; for the rest, enumerate the smallest-domain
   variable and reduce, handing the final one or two variables to the
   box-count kernel. Total enumeration work is capped by the budget.
3. Conditions containing non-affine constraints fall back to concrete
   evaluation over every point of the (tightened) box, within budget.

The estimator is exact rational arithmetic; its decimal rendering never
rounds a terminating expansion.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from . import kernels
from .constraints import Affine, Constraint, PathCondition, REL_CODE, _rel_holds
from .errors import BudgetExceeded, EmptyOrZeroWeight, MemspathError, UnboundedDomain

DEFAULT_BUDGET = 10_000_000

# Rows whose accumulated magnitude can approach int64 go to the big-int path.
_KERNEL_SAFE = 1 << 62


@dataclass
class _Box:
    """Per-variable tightened intervals and != exclusions."""

    names: list
    lo: dict
    hi: dict
    excl: dict  # name -> set of excluded values

    def size(self, name):
        width = self.hi[name] - self.lo[name] + 1
        if width <= 0:
            return 0
        dropped = sum(1 for v in self.excl.get(name, ()) if self.lo[name] <= v <= self.hi[name])
        return width - dropped

    def values(self, name):
        ex = self.excl.get(name, ())
        for v in range(self.lo[name], self.hi[name] + 1):
            if v not in ex:
                yield v


def _tighten(box, name, rel, a, c):
    """Apply single-variable constraint a*name + c rel 0 to the box."""
    t = Fraction(-c, a)
    if a < 0 and rel in ("<", "<=", ">", ">="):
        rel = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}[rel]
    if rel == "<":
        box.hi[name] = min(box.hi[name], math.ceil(t) - 1)
    elif rel == "<=":
        box.hi[name] = min(box.hi[name], math.floor(t))
    elif rel == ">":
        box.lo[name] = max(box.lo[name], math.floor(t) + 1)
    elif rel == ">=":
        box.lo[name] = max(box.lo[name], math.ceil(t))
    elif rel == "==":
        if t.denominator != 1:
            box.hi[name] = box.lo[name] - 1  # empty
        else:
            v = int(t)
            box.lo[name] = max(box.lo[name], v)
            box.hi[name] = min(box.hi[name], v)
    else:  # '!='
        if t.denominator == 1:
            box.excl.setdefault(name, set()).add(int(t))


def _split_constraints(constraints, box):
    """Tighten single-variable affine rows; return (coupled, nonaffine, feasible)."""
    coupled = []
    nonaffine = []
    for c in constraints:
        if not c.is_affine:
            nonaffine.append(c)
            continue
        coeffs = c.sym.coeffs
        if len(coeffs) == 0:
            if not _rel_holds(c.rel, c.sym.const):
                return [], [], False
        elif len(coeffs) == 1:
            (name, a), = coeffs
            _tighten(box, name, c.rel, a, c.sym.const)
        else:
            coupled.append(c)
    return coupled, nonaffine, True


def _box_of(domains, names):
    lo = {}
    hi = {}
    for n in names:
        if n not in domains:
            raise UnboundedDomain(f"variable {n!r} has no declared domain")
        a, b = domains[n]
        lo[n], hi[n] = int(a), int(b)
    return _Box(list(names), lo, hi, {})


def model_count(cond, domains, budget=DEFAULT_BUDGET):
    """Exact number of integer points in the domain box satisfying ``cond``.

    ``cond`` is a PathCondition or list of Constraints; ``domains`` maps each
    variable to an inclusive (lo, hi) pair. Variables in ``domains`` that the
    condition never mentions multiply the count by their domain size.
    """
    constraints = cond.constraints if isinstance(cond, PathCondition) else list(cond)
    for c in constraints:
        for v in c.variables():
            if v not in domains:
                raise UnboundedDomain(f"variable {v!r} has no declared domain")

    box = _box_of(domains, list(domains.keys()))
    coupled, nonaffine, feasible = _split_constraints(constraints, box)
    if not feasible:
        return 0

    if nonaffine:
        return _count_concrete(constraints, box, budget)

    state = _CountState(budget)
    return _count_affine(coupled, box, state)


class _CountState:
    def __init__(self, budget):
        self.budget = budget
        self.work = 0

    def charge(self, amount):
        self.work += amount
        if self.work > self.budget:
            raise BudgetExceeded(
                f"counting needs more than the {self.budget} point budget"
            )


def _count_affine(coupled, box, state):
    # Empty intervals kill the whole conjunction.
    for n in box.names:
        if box.size(n) == 0:
            return 0
    if not coupled:
        total = 1
        for n in box.names:
            total *= box.size(n)
        return total

    involved = []
    seen = set()
    for c in coupled:
        for v in c.variables():
            if v not in seen:
                seen.add(v)
                involved.append(v)

    if len(involved) <= 2:
        # Variables outside the coupled constraints factor out.
        factor = 1
        for n in box.names:
            if n not in seen:
                factor *= box.size(n)
        if factor == 0:
            return 0
        return factor * _count_kernel(coupled, box, involved, state)

    # Reduce: enumerate the smallest-domain involved variable; the
    # recursion handles the uninvolved variables via its closed form.
    pivot = min(involved, key=lambda n: (box.size(n), n))
    state.charge(box.size(pivot))
    total = 0
    for v in box.values(pivot):
        sub_box = _Box(
            [n for n in box.names if n != pivot],
            dict(box.lo),
            dict(box.hi),
            {k: set(s) for k, s in box.excl.items()},
        )
        sub_constraints = []
        ok = True
        for c in coupled:
            d = c.sym.coeff_dict()
            a = d.pop(pivot, 0)
            sym = Affine.make(c.sym.const + a * v, d)
            if sym.is_const:
                if not _rel_holds(c.rel, sym.const):
                    ok = False
                    break
            elif len(sym.coeffs) == 1:
                (name, coef), = sym.coeffs
                _tighten(sub_box, name, c.rel, coef, sym.const)
            else:
                sub_constraints.append(Constraint(sym, c.rel, c.display))
        if not ok:
            continue
        total += _count_affine(sub_constraints, sub_box, state)
    return total


def _count_kernel(coupled, box, names, state):
    """Brute-force count over the tightened box of ``names`` via the kernels."""
    size = 1
    for n in names:
        size *= box.size(n)
        if box.hi[n] < box.lo[n]:
            return 0
    state.charge(max(size, 1))

    rows = []
    consts = []
    rels = []
    for c in coupled:
        d = c.sym.coeff_dict()
        rows.append([d.get(n, 0) for n in names])
        consts.append(c.sym.const)
        rels.append(REL_CODE[c.rel])
    # Exclusions ride along as != rows so the kernel sees one conjunction.
    for j, n in enumerate(names):
        for v in box.excl.get(n, ()):
            if box.lo[n] <= v <= box.hi[n]:
                row = [0] * len(names)
                row[j] = 1
                rows.append(row)
                consts.append(-v)
                rels.append(REL_CODE["!="])

    lo = [box.lo[n] for n in names]
    hi = [box.hi[n] for n in names]

    bound = 0
    for row, cst in zip(rows, consts):
        mag = abs(cst) + sum(
            abs(a) * max(abs(l), abs(h)) for a, l, h in zip(row, lo, hi)
        )
        bound = max(bound, mag)
    if bound >= _KERNEL_SAFE:
        return _count_bigint(rows, consts, rels, lo, hi)

    A = np.asarray(rows, dtype=np.int64).reshape(len(rows), len(names))
    return int(
        kernels.count_box(
            A,
            np.asarray(consts, dtype=np.int64),
            np.asarray(rels, dtype=np.int64),
            np.asarray(lo, dtype=np.int64),
            np.asarray(hi, dtype=np.int64),
        )
    )


def _count_bigint(rows, consts, rels, lo, hi):
    rel_names = {v: k for k, v in REL_CODE.items()}
    total = 0
    for point in product(*[range(l, h + 1) for l, h in zip(lo, hi)]):
        ok = True
        for row, cst, rc in zip(rows, consts, rels):
            v = cst + sum(a * x for a, x in zip(row, point))
            if not _rel_holds(rel_names[rc], v):
                ok = False
                break
        if ok:
            total += 1
    return total


def _count_concrete(constraints, box, budget):
    size = 1
    for n in box.names:
        s = box.size(n)
        if s == 0:
            return 0
        size *= s
    if size > budget:
        raise BudgetExceeded(
            f"non-affine condition needs {size} evaluations, budget is {budget}"
        )
    total = 0
    names = box.names
    for values in product(*[list(box.values(n)) for n in names]):
        point = dict(zip(names, values))
        if all(c.holds(point) for c in constraints):
            total += 1
    return total


def enumerate_models(cond, domains, budget=DEFAULT_BUDGET):
    """Yield every satisfying point as a dict (brute force; test-sized only)."""
    constraints = cond.constraints if isinstance(cond, PathCondition) else list(cond)
    box = _box_of(domains, list(domains.keys()))
    size = 1
    for n in box.names:
        size *= box.size(n)
    if size > budget:
        raise BudgetExceeded(f"enumerating {size} points exceeds budget {budget}")
    for values in product(*[list(box.values(n)) for n in box.names]):
        point = dict(zip(box.names, values))
        if all(c.holds(point) for c in constraints):
            yield point


# ---------------------------------------------------------------------------
# Weighted-average performance estimate


@dataclass
class Estimate:
    per_path: list  # (path_id, delta, pind)
    total_weight: int
    value: Fraction

    def numerator(self):
        return sum(d * p for _, d, p in self.per_path)

    def render(self, places=6):
        return render_fraction(self.value, places)


def render_fraction(value, places=6):
    """Exact decimal text; terminating expansions are never rounded."""
    sign = "-" if value < 0 else ""
    value = abs(value)
    whole, rem = divmod(value.numerator, value.denominator)
    if rem == 0:
        return f"{sign}{whole}"
    scaled = rem * 10**places
    digits, tail = divmod(scaled, value.denominator)
    if tail != 0:
        # round half to even on the last kept digit
        double = tail * 2
        if double > value.denominator or (double == value.denominator and digits % 2 == 1):
            digits += 1
            if digits >= 10**places:
                whole += 1
                digits = 0
    text = f"{digits:0{places}d}".rstrip("0")
    if not text:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{text}"


def estimate_performance(paths):
    """Weighted average of per-path costs: sum(delta*pind) / sum(delta).

    ``paths`` holds (delta, pind) or (path_id, delta, pind) entries.
    """
    normalized = []
    for i, entry in enumerate(paths):
        if len(entry) == 2:
            normalized.append((str(i), int(entry[0]), int(entry[1])))
        else:
            normalized.append((str(entry[0]), int(entry[1]), int(entry[2])))
    total = sum(d for _, d, _ in normalized)
    if total <= 0:
        raise EmptyOrZeroWeight("need at least one path with positive frequency")
    for _, d, p in normalized:
        if d < 0 or p < 0:
            raise MemspathError("path frequencies and costs must be non-negative")
    num = sum(d * p for _, d, p in normalized)
    return Estimate(normalized, total, Fraction(num, total))


def write_estimate_csv(estimate, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path_id", "delta", "pind"])
        for pid, d, p in estimate.per_path:
            w.writerow([pid, d, p])
        w.writerow(["weighted_value", estimate.total_weight, estimate.render()])
