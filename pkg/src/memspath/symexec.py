"""Bounded symbolic path enumeration over scalar integer inputs.

Executes a function with its scalar parameters held symbolic, forking at
every branch whose outcome the accumulated path condition does not decide.
Loops unroll against the condition (each test contributes a constraint;
the failing exit test is recorded in the condition but never logged in the
path length, matching the instrumenter). Feasibility checking is exact
model counting over the declared input domains, so a returned path always
has at least one witness and distinct paths never share one.

Array contents are never tracked: writes are only counted, reads produce a
taint that may flow through scalars, and a tainted branch condition raises
DataDependentBranch. Branch conditions that leave the affine fragment
(division, modulo, variable products) stay enumerable -- their constraints
fall back to pointwise evaluation inside the model counter.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import counting, mems
from .constraints import (
    Affine,
    Constraint,
    NonAffine,
    PathCondition,
    _rel_holds,
    eval_concrete,
    make_constraint,
    parse_condition_text,
)
from .errors import DataDependentBranch, MemspathError, UnboundedDomain
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

DEFAULT_MAX_PATHS = 512
DEFAULT_MAX_UNROLL = 4096


class _TaintedType:
    """Value derived from array contents; must not reach a branch."""

    def __repr__(self):
        return "TAINTED"


TAINTED = _TaintedType()

_MISSING = object()


@dataclass(frozen=True)
class _State:
    env: dict
    constraints: tuple
    decisions: tuple  # (site, text, taken)
    path_len: int
    pind: int
    unrolls: tuple  # ((site, taken_count), ...)
    returned: bool = False

    def with_env(self, name, value):
        env = dict(self.env)
        env[name] = value
        return replace(self, env=env)

    def with_constraint(self, c):
        return replace(self, constraints=self.constraints + (c,))

    def with_decision(self, site, text, taken):
        return replace(
            self,
            decisions=self.decisions + ((site, text, taken),),
            path_len=self.path_len + 1,
        )

    def add_pind(self, k):
        return replace(self, pind=self.pind + k) if k else self

    def bump_unroll(self, site):
        d = dict(self.unrolls)
        d[site] = d.get(site, 0) + 1
        return replace(self, unrolls=tuple(sorted(d.items()))), d[site]


@dataclass
class PathTrace:
    """One feasible execution path of a function."""

    function: str
    decisions: list  # (site, condition text, taken)
    path_len: int
    pind_mems: int
    condition: PathCondition
    inputs: list = field(default_factory=list)  # scalar parameter names

    def decision_string(self):
        return "".join("T" if t else "F" for _, _, t in self.decisions) or "-"

    def sort_key(self):
        return (
            tuple(0 if t else 1 for _, _, t in self.decisions),
            self.condition.text(),
        )


@dataclass
class PathEnumeration:
    paths: list
    truncated: str | None = None  # 'max_paths' | 'max_loop_unroll' | None

    def __iter__(self):
        return iter(self.paths)

    def __len__(self):
        return len(self.paths)


def path_pind(trace):
    """The path's cost: its statically summed mems total."""
    return trace.pind_mems


class _SymExec:
    def __init__(self, ast, fn_name, domains, max_paths, max_unroll, count_budget):
        self.ast = ast
        self.fn = ast.function(fn_name)
        if self.fn is None:
            raise MemspathError(f"unknown function {fn_name!r}")
        self.domains = {k: (int(lo), int(hi)) for k, (lo, hi) in domains.items()}
        self.max_paths = max_paths
        self.max_unroll = max_unroll
        self.count_budget = count_budget
        self.state_cap = max(4 * max_paths, 4096)
        self.truncated = None
        self.arrays = set()
        self.sites = {}
        self.next_site = 0
        self._assign_sites(self.fn.body)

    def _assign_sites(self, block):
        for s in block.stmts:
            if isinstance(s, If):
                self.sites[id(s)] = self.next_site
                self.next_site += 1
                self._assign_sites(s.then)
                if s.orelse is not None:
                    self._assign_sites(s.orelse)
            elif isinstance(s, (While, For)):
                self.sites[id(s)] = self.next_site
                self.next_site += 1
                self._assign_sites(s.body)
            elif isinstance(s, Block):
                self._assign_sites(s)

    # -- symbolic expression evaluation

    def sym_eval(self, expr, st):
        if isinstance(expr, IntLiteral):
            return Affine.of_const(expr.value)
        if isinstance(expr, VarRef):
            if expr.name in self.arrays:
                raise MemspathError(f"array {expr.name!r} used as a value")
            if expr.name not in st.env:
                raise MemspathError(f"unbound variable {expr.name!r}")
            return st.env[expr.name]
        if isinstance(expr, ArrayIndex):
            return TAINTED
        if isinstance(expr, Unary):
            v = self.sym_eval(expr.operand, st)
            if v is TAINTED:
                return TAINTED
            if expr.op == "-":
                if isinstance(v, Affine):
                    return v.neg()
                return NonAffine(Unary("-", v.to_expr()))
            if isinstance(v, Affine) and v.is_const:
                return Affine.of_const(1 if v.const == 0 else 0)
            return NonAffine(Unary("!", v.to_expr()))
        if isinstance(expr, Binary):
            a = self.sym_eval(expr.lhs, st)
            b = self.sym_eval(expr.rhs, st)
            if a is TAINTED or b is TAINTED:
                return TAINTED
            if expr.op in ("+", "-", "*") and isinstance(a, Affine) and isinstance(b, Affine):
                if expr.op == "+":
                    return a.add(b)
                if expr.op == "-":
                    return a.sub(b)
                prod = a.mul(b)
                if prod is not None:
                    return prod
            if (
                isinstance(a, Affine)
                and isinstance(b, Affine)
                and a.is_const
                and b.is_const
            ):
                return Affine.of_const(
                    eval_concrete(Binary(expr.op, IntLiteral(a.const), IntLiteral(b.const)), {})
                )
            return NonAffine(Binary(expr.op, a.to_expr(), b.to_expr()))
        if isinstance(expr, Call):
            if expr.callee == "printf":
                return Affine.of_const(0)
            raise MemspathError(
                f"call to {expr.callee!r}: calls are not supported in path enumeration"
            )
        if isinstance(expr, StrLiteral):
            return Affine.of_const(0)
        raise TypeError(f"unhandled expression {type(expr).__name__}")

    # -- branching

    def feasible(self, st):
        return counting.model_count(
            PathCondition(list(st.constraints)), self.domains, self.count_budget
        ) > 0

    def cond_worlds(self, expr, st):
        """All (state, outcome) worlds of one condition evaluation."""
        if isinstance(expr, Unary) and expr.op == "!":
            return [(s, not out) for s, out in self.cond_worlds(expr.operand, st)]
        if isinstance(expr, Binary) and expr.op == "&&":
            worlds = []
            for s, out in self.cond_worlds(expr.lhs, st):
                if out:
                    worlds.extend(self.cond_worlds(expr.rhs, s))
                else:
                    worlds.append((s, False))
            return worlds
        if isinstance(expr, Binary) and expr.op == "||":
            worlds = []
            for s, out in self.cond_worlds(expr.lhs, st):
                if out:
                    worlds.append((s, True))
                else:
                    worlds.extend(self.cond_worlds(expr.rhs, s))
            return worlds
        if isinstance(expr, Binary) and expr.op in ("<", "<=", ">", ">=", "==", "!="):
            lhs = self.sym_eval(expr.lhs, st)
            rhs = self.sym_eval(expr.rhs, st)
            if lhs is TAINTED or rhs is TAINTED:
                raise DataDependentBranch(
                    f"branch condition {expr_text(expr)!r} depends on array contents"
                )
            if (
                isinstance(lhs, Affine)
                and isinstance(rhs, Affine)
                and lhs.is_const
                and rhs.is_const
            ):
                return [(st, _rel_holds(expr.op, lhs.const - rhs.const))]
            c = make_constraint(lhs, expr.op, rhs)
            return self._split(st, c)
        # truthiness of a non-comparison expression
        v = self.sym_eval(expr, st)
        if v is TAINTED:
            raise DataDependentBranch(
                f"branch condition {expr_text(expr)!r} depends on array contents"
            )
        if isinstance(v, Affine) and v.is_const:
            return [(st, v.const != 0)]
        c = Constraint(v, "!=", f"{v.render()} != 0")
        return self._split(st, c)

    def _split(self, st, c):
        worlds = []
        t = st.with_constraint(c)
        if self.feasible(t):
            worlds.append((t, True))
        f = st.with_constraint(c.negated())
        if self.feasible(f):
            worlds.append((f, False))
        return worlds

    # -- statement execution

    def exec_block(self, stmts, st):
        # Names declared at this level shadow outer ones only inside it.
        local = [
            d.name
            for s in stmts
            if isinstance(s, Decl)
            for d in s.declarators
            if not d.is_array
        ]
        saved = {n: st.env.get(n, _MISSING) for n in local}

        states = [st]
        for s in stmts:
            nxt = []
            for cur in states:
                if cur.returned:
                    nxt.append(cur)
                else:
                    nxt.extend(self.exec_stmt(s, cur))
            states = nxt
            if len(states) > self.state_cap:
                self.truncated = "max_paths"
                states = states[: self.state_cap]
        if not local:
            return states
        out = []
        for cur in states:
            env = dict(cur.env)
            for n, v in saved.items():
                if v is _MISSING:
                    env.pop(n, None)
                else:
                    env[n] = v
            out.append(replace(cur, env=env))
        return out

    def exec_stmt(self, stmt, st):
        if isinstance(stmt, Decl):
            st = st.add_pind(mems.count_stmt(stmt).total)
            for d in stmt.declarators:
                if d.is_array:
                    self.arrays.add(d.name)
                elif d.init is not None:
                    st = st.with_env(d.name, self.sym_eval(d.init, st))
                else:
                    st = st.with_env(d.name, Affine.of_const(0))
            return [st]
        if isinstance(stmt, Assign):
            st = st.add_pind(mems.count_stmt(stmt).total)
            if isinstance(stmt.target, VarRef):
                return [st.with_env(stmt.target.name, self.sym_eval(stmt.value, st))]
            return [st]  # array stores: counted, contents untracked
        if isinstance(stmt, CompoundAssign):
            st = st.add_pind(mems.count_stmt(stmt).total)
            if isinstance(stmt.target, VarRef):
                combined = Binary(stmt.op, stmt.target, stmt.value, stmt.span)
                return [st.with_env(stmt.target.name, self.sym_eval(combined, st))]
            return [st]
        if isinstance(stmt, ExprStmt):
            self.sym_eval(stmt.expr, st)  # surfaces unsupported calls
            return [st.add_pind(mems.count_stmt(stmt).total)]
        if isinstance(stmt, Return):
            st = st.add_pind(mems.count_stmt(stmt).total)
            return [replace(st, returned=True)]
        if isinstance(stmt, Block):
            return self.exec_block(stmt.stmts, st)
        if isinstance(stmt, If):
            return self.exec_if(stmt, st)
        if isinstance(stmt, While):
            return self.exec_loop(stmt, st, init=None, step=None, cond=stmt.cond)
        if isinstance(stmt, For):
            return self.exec_loop(
                stmt, st, init=stmt.init, step=stmt.step, cond=stmt.cond
            )
        raise TypeError(f"unhandled statement {type(stmt).__name__}")

    def exec_if(self, stmt, st):
        site = self.sites[id(stmt)]
        text = expr_text(stmt.cond)
        st = st.add_pind(mems.count_expr(stmt.cond).total)
        out = []
        for world, taken in self.cond_worlds(stmt.cond, st):
            world = world.with_decision(site, text, taken)
            if taken:
                out.extend(self.exec_block(stmt.then.stmts, world))
            elif stmt.orelse is not None:
                out.extend(self.exec_block(stmt.orelse.stmts, world))
            else:
                out.append(world)
        return out

    def exec_loop(self, stmt, st, init, step, cond):
        site = self.sites[id(stmt)]
        text = expr_text(cond) if cond is not None else "1"
        init_names = []
        saved = {}
        if isinstance(init, Decl):
            init_names = [d.name for d in init.declarators if not d.is_array]
            saved = {n: st.env.get(n, _MISSING) for n in init_names}
        exits = []
        starts = self.exec_stmt(init, st) if init is not None else [st]
        active = [s for s in starts if not s.returned]
        exits.extend(s for s in starts if s.returned)
        while active:
            cur = active.pop()
            cur = cur.add_pind(mems.count_expr(cond).total if cond is not None else 0)
            if cond is None:
                worlds = [(cur, True)]
            else:
                worlds = self.cond_worlds(cond, cur)
            for world, taken in worlds:
                if not taken:
                    # loop exit: constrained but not logged
                    exits.append(world)
                    continue
                world, n = world.bump_unroll(site)
                if n > self.max_unroll:
                    self.truncated = "max_loop_unroll"
                    continue
                world = world.with_decision(site, text, True)
                after = self.exec_block(stmt.body.stmts, world)
                for s in after:
                    if s.returned:
                        exits.append(s)
                    elif step is not None:
                        for s2 in self.exec_stmt(step, s):
                            active.append(s2)
                    else:
                        active.append(s)
        if not init_names:
            return exits
        out = []
        for cur in exits:
            env = dict(cur.env)
            for n, v in saved.items():
                if v is _MISSING:
                    env.pop(n, None)
                else:
                    env[n] = v
            out.append(replace(cur, env=env))
        return out

    def run(self, assume=None):
        env = {}
        inputs = []
        for p in self.fn.params:
            if p.is_array:
                self.arrays.add(p.name)
            else:
                if p.name not in self.domains:
                    raise UnboundedDomain(
                        f"parameter {p.name!r} has no declared domain"
                    )
                env[p.name] = Affine.of_var(p.name)
                inputs.append(p.name)

        st = _State(env, (), (), 0, 0, ())
        if assume:
            for text in assume:
                for c in parse_condition_text(text).constraints:
                    st = st.with_constraint(c)
        if not self.feasible(st):
            return PathEnumeration([], None)

        terminals = self.exec_block(self.fn.body.stmts, st)
        paths = [
            PathTrace(
                function=self.fn.name,
                decisions=list(s.decisions),
                path_len=s.path_len,
                pind_mems=s.pind,
                condition=PathCondition(list(s.constraints)),
                inputs=list(inputs),
            )
            for s in terminals
        ]
        paths.sort(key=PathTrace.sort_key)
        if len(paths) > self.max_paths:
            paths = paths[: self.max_paths]
            self.truncated = "max_paths"
        return PathEnumeration(paths, self.truncated)


def enumerate_paths(
    ast,
    fn,
    domains,
    max_paths=DEFAULT_MAX_PATHS,
    max_loop_unroll=DEFAULT_MAX_UNROLL,
    count_budget=counting.DEFAULT_BUDGET,
    assume=None,
):
    """Enumerate the feasible paths of ``fn`` over bounded input domains.

    Returns a PathEnumeration whose ``truncated`` flag is set when a limit
    cut the search short ('max_paths' or 'max_loop_unroll'); the paths list
    then holds the part that was fully explored.
    """
    engine = _SymExec(ast, fn, domains, max_paths, max_loop_unroll, count_budget)
    return engine.run(assume=assume)


# ---------------------------------------------------------------------------
# Line-oriented path export


def write_paths(enum, fn, inputs, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"# memspath paths fn={fn} inputs={','.join(inputs)} "
            f"truncated={enum.truncated or 'none'}\n"
        )
        for i, p in enumerate(enum.paths):
            fh.write(
                f"{i}\t{p.decision_string()}\t{p.path_len}\t{p.pind_mems}\t{p.condition.text()}\n"
            )


@dataclass
class PathRecord:
    path_id: str
    decisions: str
    path_len: int
    pind: int
    condition_text: str


def read_paths(path):
    records = []
    meta = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                for part in line[1:].split():
                    if "=" in part:
                        k, _, v = part.partition("=")
                        meta[k] = v
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise MemspathError(f"malformed path record: {line!r}")
            records.append(
                PathRecord(fields[0], fields[1], int(fields[2]), int(fields[3]), fields[4])
            )
    return records, meta
