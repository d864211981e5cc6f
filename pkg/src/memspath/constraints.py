"""Symbolic values and path conditions over integer inputs.

A symbolic value is either an affine form (integer constant plus integer
coefficients over input variables) or, when an operation leaves that
fragment (division, modulo, products of two variables, logical operators
as values), a concrete expression tree over the inputs that can still be
evaluated point by point. Path conditions are conjunctions of relational
constraints against zero; the original orientation (``x - 10 > 30``) is
kept as display text so exported conditions read like the source.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DivisionByZero, MemspathError
from .minic import (
    ArrayIndex,
    Binary,
    Call,
    IntLiteral,
    StrLiteral,
    Unary,
    VarRef,
    expr_text,
    parse_expr_text,
)

RELATIONS = ("<", "<=", ">", ">=", "==", "!=")

NEGATE = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}

REL_CODE = {"<": 0, "<=": 1, ">": 2, ">=": 3, "==": 4, "!=": 5}


@dataclass(frozen=True)
class Affine:
    """const + sum(coeffs[v] * v); coeffs never store zeros."""

    const: int
    coeffs: tuple = ()  # sorted ((name, coeff), ...)

    @classmethod
    def make(cls, const, coeffs=None):
        items = tuple(sorted((n, c) for n, c in (coeffs or {}).items() if c != 0))
        return cls(int(const), items)

    @classmethod
    def of_var(cls, name):
        return cls(0, ((name, 1),))

    @classmethod
    def of_const(cls, value):
        return cls(int(value), ())

    def coeff_dict(self):
        return dict(self.coeffs)

    @property
    def is_const(self):
        return not self.coeffs

    def add(self, other):
        d = self.coeff_dict()
        for n, c in other.coeffs:
            d[n] = d.get(n, 0) + c
        return Affine.make(self.const + other.const, d)

    def sub(self, other):
        d = self.coeff_dict()
        for n, c in other.coeffs:
            d[n] = d.get(n, 0) - c
        return Affine.make(self.const - other.const, d)

    def neg(self):
        return Affine.make(-self.const, {n: -c for n, c in self.coeffs})

    def scale(self, k):
        return Affine.make(self.const * k, {n: c * k for n, c in self.coeffs})

    def mul(self, other):
        if other.is_const:
            return self.scale(other.const)
        if self.is_const:
            return other.scale(self.const)
        return None

    def variables(self):
        return [n for n, _ in self.coeffs]

    def eval(self, point):
        return self.const + sum(c * point[n] for n, c in self.coeffs)

    def to_expr(self):
        """Equivalent expression tree (canonical term order)."""
        node = None
        for n, c in self.coeffs:
            mag = abs(c)
            term = VarRef(n) if mag == 1 else Binary("*", IntLiteral(mag), VarRef(n))
            if node is None:
                node = Unary("-", term) if c < 0 else term
            else:
                node = Binary("+" if c > 0 else "-", node, term)
        if node is None:
            return IntLiteral(self.const)
        if self.const > 0:
            node = Binary("+", node, IntLiteral(self.const))
        elif self.const < 0:
            node = Binary("-", node, IntLiteral(-self.const))
        return node

    def render(self):
        return expr_text(self.to_expr())


@dataclass(frozen=True)
class NonAffine:
    """Concrete fallback: an expression tree over input variables only."""

    expr: object  # minic expression node

    def variables(self):
        return sorted(free_vars(self.expr))

    def eval(self, point):
        return eval_concrete(self.expr, point)

    def to_expr(self):
        return self.expr

    def render(self):
        return expr_text(self.expr)


@dataclass(frozen=True)
class Constraint:
    """One conjunct: ``sym rel 0``, displayed in its source orientation."""

    sym: object  # Affine | NonAffine
    rel: str
    display: str

    @property
    def is_affine(self):
        return isinstance(self.sym, Affine)

    def variables(self):
        return self.sym.variables()

    def holds(self, point):
        v = self.sym.eval(point)
        return _rel_holds(self.rel, v)

    def negated(self):
        return Constraint(self.sym, NEGATE[self.rel], _negate_display(self.display, self.rel))


def _negate_display(display, rel):
    # The display keeps the source orientation: 'a REL b' becomes 'a NEG b'.
    marker = f" {rel} "
    if marker in display:
        left, _, right = display.partition(marker)
        return f"{left} {NEGATE[rel]} {right}"
    return f"!({display})"


def _rel_holds(rel, v):
    if rel == "<":
        return v < 0
    if rel == "<=":
        return v <= 0
    if rel == ">":
        return v > 0
    if rel == ">=":
        return v >= 0
    if rel == "==":
        return v == 0
    return v != 0


def make_constraint(lhs_sym, rel, rhs_sym, display=None):
    """Normalize ``lhs rel rhs`` into ``lhs - rhs rel 0``."""
    if isinstance(lhs_sym, Affine) and isinstance(rhs_sym, Affine):
        sym = lhs_sym.sub(rhs_sym)
    else:
        sym = NonAffine(Binary("-", _sym_expr(lhs_sym), _sym_expr(rhs_sym)))
    if display is None:
        display = f"{lhs_sym.render()} {rel} {rhs_sym.render()}"
    return Constraint(sym, rel, display)


def _sym_expr(sym):
    return sym.to_expr()


@dataclass
class PathCondition:
    constraints: list = field(default_factory=list)

    def text(self):
        if not self.constraints:
            return "true"
        return " && ".join(f"({c.display})" for c in self.constraints)

    def variables(self):
        out = []
        seen = set()
        for c in self.constraints:
            for v in c.variables():
                if v not in seen:
                    seen.add(v)
                    out.append(v)
        return out

    def holds(self, point):
        return all(c.holds(point) for c in self.constraints)

    def extended(self, constraint):
        return PathCondition(self.constraints + [constraint])


# ---------------------------------------------------------------------------
# Concrete evaluation of closed expressions (64-bit wrap, C division)

_MASK = (1 << 64) - 1
_SIGN = 1 << 63


def _wrap(v):
    return ((v + _SIGN) & _MASK) - _SIGN


def eval_concrete(expr, point):
    """Evaluate an input-only expression at an integer point."""
    if isinstance(expr, IntLiteral):
        return _wrap(expr.value)
    if isinstance(expr, VarRef):
        return _wrap(point[expr.name])
    if isinstance(expr, Unary):
        v = eval_concrete(expr.operand, point)
        return _wrap(-v) if expr.op == "-" else (1 if v == 0 else 0)
    if isinstance(expr, Binary):
        op = expr.op
        if op == "&&":
            if eval_concrete(expr.lhs, point) == 0:
                return 0
            return 0 if eval_concrete(expr.rhs, point) == 0 else 1
        if op == "||":
            if eval_concrete(expr.lhs, point) != 0:
                return 1
            return 0 if eval_concrete(expr.rhs, point) == 0 else 1
        a = eval_concrete(expr.lhs, point)
        b = eval_concrete(expr.rhs, point)
        if op == "+":
            return _wrap(a + b)
        if op == "-":
            return _wrap(a - b)
        if op == "*":
            return _wrap(a * b)
        if op == "/":
            if b == 0:
                raise DivisionByZero("division by zero while evaluating a condition")
            q = abs(a) // abs(b)
            return _wrap(-q if (a < 0) != (b < 0) else q)
        if op == "%":
            if b == 0:
                raise DivisionByZero("modulo by zero while evaluating a condition")
            r = abs(a) % abs(b)
            return -r if a < 0 else r
        if op == "<":
            return 1 if a < b else 0
        if op == "<=":
            return 1 if a <= b else 0
        if op == ">":
            return 1 if a > b else 0
        if op == ">=":
            return 1 if a >= b else 0
        if op == "==":
            return 1 if a == b else 0
        if op == "!=":
            return 1 if a != b else 0
    raise MemspathError(f"cannot evaluate {type(expr).__name__} concretely")


def free_vars(expr):
    out = set()

    def walk(e):
        if isinstance(e, VarRef):
            out.add(e.name)
        elif isinstance(e, Binary):
            walk(e.lhs)
            walk(e.rhs)
        elif isinstance(e, Unary):
            walk(e.operand)
        elif isinstance(e, ArrayIndex):
            walk(e.base)
            walk(e.index)
        elif isinstance(e, Call):
            for a in e.args:
                walk(a)

    walk(expr)
    return out


def affine_from_expr(expr):
    """Extract an Affine form, or None if the expression leaves the fragment."""
    if isinstance(expr, IntLiteral):
        return Affine.of_const(expr.value)
    if isinstance(expr, VarRef):
        return Affine.of_var(expr.name)
    if isinstance(expr, Unary) and expr.op == "-":
        inner = affine_from_expr(expr.operand)
        return inner.neg() if inner is not None else None
    if isinstance(expr, Binary):
        if expr.op in ("+", "-", "*"):
            a = affine_from_expr(expr.lhs)
            b = affine_from_expr(expr.rhs)
            if a is None or b is None:
                return None
            if expr.op == "+":
                return a.add(b)
            if expr.op == "-":
                return a.sub(b)
            return a.mul(b)
    return None


def sym_from_expr(expr):
    aff = affine_from_expr(expr)
    if aff is not None:
        return aff
    _check_condition_expr(expr)
    return NonAffine(expr)


def _check_condition_expr(expr):
    if isinstance(expr, (ArrayIndex, Call, StrLiteral)):
        raise MemspathError(f"{expr_text(expr)!r} cannot appear in a path condition")
    if isinstance(expr, Binary):
        _check_condition_expr(expr.lhs)
        _check_condition_expr(expr.rhs)
    elif isinstance(expr, Unary):
        _check_condition_expr(expr.operand)


def constraints_from_expr(expr):
    """Turn a conjunction expression into constraints.

    Top-level ``&&`` splits into conjuncts; each conjunct is a comparison
    (normalized to zero) or a bare expression treated as ``expr != 0``.
    Disjunctions inside a conjunct make it NonAffine as a whole.
    """
    out = []

    def conjunct(e):
        if isinstance(e, Binary) and e.op == "&&":
            conjunct(e.lhs)
            conjunct(e.rhs)
            return
        if isinstance(e, Binary) and e.op in RELATIONS:
            lhs = sym_from_expr(e.lhs)
            rhs = sym_from_expr(e.rhs)
            out.append(make_constraint(lhs, e.op, rhs, display=expr_text(e)))
            return
        sym = sym_from_expr(e)
        out.append(Constraint(sym, "!=", f"{expr_text(e)} != 0"))

    conjunct(expr)
    return out


def parse_condition_text(text):
    """Inverse of PathCondition.text()."""
    text = text.strip()
    if text in ("", "true"):
        return PathCondition([])
    return PathCondition(constraints_from_expr(parse_expr_text(text)))
