"""Front end for the MiniC subset of C.

MiniC is what the rest of the toolchain consumes and emits: 64-bit int
scalars, one-dimensional int arrays (including variable-length ``int a[n]``),
structured control flow (if/else, for, while), assignments (plain, compound,
``++``/``--`` which are canonicalized to plain assignments), calls to other
MiniC functions and to an allowlist of externs (printf family, opaque).
String literals are accepted only as extern-call arguments so that
instrumented output (which prints trace lines) re-parses. Anything else --
pointers, structs, casts, floats -- is rejected with a diagnostic.

Integer semantics are 64-bit two's complement with wraparound; division
truncates toward zero. ``long long`` is accepted as an alias for ``int``
(both are 64-bit here) so instrumented counter declarations re-parse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import Diagnostic, ParseError

KEYWORDS = {"int", "long", "void", "if", "else", "for", "while", "return"}

# C constructs we refuse on sight, with a better message than "syntax error".
UNSUPPORTED_KEYWORDS = {
    "struct", "union", "enum", "typedef", "char", "short", "float", "double",
    "unsigned", "signed", "static", "extern", "const", "switch", "case",
    "default", "do", "break", "continue", "goto", "sizeof", "register",
    "volatile", "auto",
}

EXTERN_FUNCTIONS = {"printf"}

ALLOWED_INCLUDES = {"stdio.h", "stdlib.h", "time.h"}

BINARY_OPS = {"+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=", "&&", "||"}
COMPOUND_OPS = {"+=", "-=", "*=", "/=", "%="}


@dataclass(frozen=True)
class Span:
    start: int
    end: int


NO_SPAN = Span(0, 0)


# ---------------------------------------------------------------------------
# Syntax tree


class Node:
    pass


class Expr(Node):
    pass


class Stmt(Node):
    pass


@dataclass
class IntLiteral(Expr):
    value: int
    span: Span = NO_SPAN


@dataclass
class StrLiteral(Expr):
    # Decoded value (escape sequences resolved); extern-call args only.
    value: str
    span: Span = NO_SPAN


@dataclass
class VarRef(Expr):
    name: str
    span: Span = NO_SPAN


@dataclass
class ArrayIndex(Expr):
    base: Expr
    index: Expr
    span: Span = NO_SPAN


@dataclass
class Binary(Expr):
    op: str
    lhs: Expr
    rhs: Expr
    span: Span = NO_SPAN


@dataclass
class Unary(Expr):
    op: str  # '-' or '!'
    operand: Expr
    span: Span = NO_SPAN


@dataclass
class Call(Expr):
    callee: str
    args: list = field(default_factory=list)
    span: Span = NO_SPAN


@dataclass
class Declarator:
    name: str
    array_size: Expr | None = None  # None for scalars
    is_array: bool = False  # True also for unsized 'int a[]' params
    init: Expr | None = None
    span: Span = NO_SPAN


@dataclass
class Decl(Stmt):
    declarators: list = field(default_factory=list)
    span: Span = NO_SPAN


@dataclass
class Assign(Stmt):
    target: Expr  # VarRef or ArrayIndex
    value: Expr
    span: Span = NO_SPAN


@dataclass
class CompoundAssign(Stmt):
    target: Expr
    op: str  # '+', '-', '*', '/', '%'
    value: Expr
    span: Span = NO_SPAN


@dataclass
class ExprStmt(Stmt):
    expr: Expr
    span: Span = NO_SPAN


@dataclass
class Block(Stmt):
    stmts: list = field(default_factory=list)
    span: Span = NO_SPAN


@dataclass
class If(Stmt):
    cond: Expr
    then: Block
    orelse: Block | None = None  # 'else if' is canonicalized to a nested block
    span: Span = NO_SPAN


@dataclass
class For(Stmt):
    init: Stmt | None  # Decl, Assign, CompoundAssign or ExprStmt
    cond: Expr | None
    step: Stmt | None
    body: Block = field(default_factory=Block)
    span: Span = NO_SPAN


@dataclass
class While(Stmt):
    cond: Expr
    body: Block = field(default_factory=Block)
    span: Span = NO_SPAN


@dataclass
class Return(Stmt):
    value: Expr | None = None
    span: Span = NO_SPAN


@dataclass
class Param:
    name: str
    is_array: bool = False
    array_size: Expr | None = None
    span: Span = NO_SPAN


@dataclass
class FunctionDef:
    name: str
    ret: str  # 'int' or 'void'
    params: list = field(default_factory=list)
    body: Block = field(default_factory=Block)
    span: Span = NO_SPAN


@dataclass
class Ast:
    includes: list = field(default_factory=list)  # header names, e.g. 'stdio.h'
    functions: list = field(default_factory=list)

    def function(self, name):
        for f in self.functions:
            if f.name == name:
                return f
        return None


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<num>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"(?:\\.|[^"\\])*")
  | (?P<punct>\+\+|--|\+=|-=|\*=|/=|%=|&&|\|\||==|!=|<=|>=|[-+*/%<>=!;,(){}\[\]&|~^.?:])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # 'num', 'id', 'str', 'punct', 'eof'
    text: str
    pos: int


class _LineIndex:
    def __init__(self, source):
        self.starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                self.starts.append(i + 1)

    def linecol(self, pos):
        lo, hi = 0, len(self.starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.starts[mid] <= pos:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, pos - self.starts[lo] + 1


_INCLUDE_RE = re.compile(r'^\s*#\s*include\s*[<"]([^">]+)[">]')


def _preprocess(source, filename, diagnostics, lineindex):
    """Blank out comments and preprocessor lines, preserving byte offsets.

    Allowlisted #include headers are collected; other preprocessor lines are
    dropped. Returns (masked_source, includes).
    """
    out = list(source)
    includes = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            j = i
            while j < n and source[j] != "\n":
                out[j] = " "
                j += 1
            i = j
        elif ch == "/" and i + 1 < n and source[i + 1] == "*":
            j = source.find("*/", i + 2)
            if j < 0:
                line, col = lineindex.linecol(i)
                diagnostics.append(
                    Diagnostic(line, col, "unterminated comment", "syntax", filename)
                )
                j = n
            else:
                j += 2
            for k in range(i, j):
                if out[k] != "\n":
                    out[k] = " "
            i = j
        elif ch == '"':
            j = i + 1
            while j < n and source[j] != '"':
                j += 2 if source[j] == "\\" else 1
            i = min(j + 1, n)
        elif ch == "#" and (i == 0 or source[: i].rstrip(" \t").endswith("\n") or source[:i].strip(" \t") == ""):
            j = source.find("\n", i)
            if j < 0:
                j = n
            line_text = source[i:j]
            m = _INCLUDE_RE.match(line_text)
            if m:
                includes.append(m.group(1))
            for k in range(i, j):
                out[k] = " "
            i = j
        else:
            i += 1
    return "".join(out), includes


def _lex(masked, filename, diagnostics, lineindex):
    tokens = []
    pos = 0
    n = len(masked)
    while pos < n:
        ch = masked[pos]
        if ch in " \t\r\n":
            pos += 1
            continue
        m = _TOKEN_RE.match(masked, pos)
        if not m:
            line, col = lineindex.linecol(pos)
            diagnostics.append(
                Diagnostic(line, col, f"unexpected character {ch!r}", "syntax", filename)
            )
            pos += 1
            continue
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", n))
    return tokens


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"', "0": "\0", "%": "%"}


def _decode_string(text):
    body = text[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def encode_string(value):
    """Inverse of the lexer's string decoding, for the pretty printer."""
    out = []
    for ch in value:
        if ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


# ---------------------------------------------------------------------------
# Parser

_PRECEDENCE = [
    {"||"},
    {"&&"},
    {"==", "!="},
    {"<", "<=", ">", ">="},
    {"+", "-"},
    {"*", "/", "%"},
]


class _Parser:
    def __init__(self, tokens, filename, lineindex):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename
        self.lineindex = lineindex

    # -- token plumbing

    def peek(self, ahead=0):
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self):
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text):
        return self.peek().text == text and self.peek().kind == "punct"

    def at_keyword(self, word):
        return self.peek().kind == "id" and self.peek().text == word

    def accept(self, text):
        if self.at(text):
            return self.next()
        return None

    def expect(self, text, what=None):
        tok = self.peek()
        if tok.kind == "punct" and tok.text == text:
            return self.next()
        self.fail(f"expected {text!r}" + (f" {what}" if what else "") + f", found {self._show(tok)}")

    def _show(self, tok):
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def fail(self, message, kind="syntax", pos=None):
        tok = self.peek()
        line, col = self.lineindex.linecol(pos if pos is not None else tok.pos)
        raise ParseError([Diagnostic(line, col, message, kind, self.filename)])

    def check_supported(self, tok):
        if tok.kind == "id" and tok.text in UNSUPPORTED_KEYWORDS:
            self.fail(f"{tok.text!r} is outside the supported C subset", "unsupported", tok.pos)

    # -- types

    def at_type(self):
        tok = self.peek()
        return tok.kind == "id" and tok.text in ("int", "long", "void")

    def parse_type(self):
        tok = self.next()
        if tok.text == "void":
            return "void"
        if tok.text == "int":
            return "int"
        if tok.text == "long":
            # 'long long' or plain 'long' both mean the 64-bit int type.
            if self.at_keyword("long"):
                self.next()
            if self.at_keyword("int"):
                self.next()
            return "int"
        self.fail(f"expected a type, found {self._show(tok)}", pos=tok.pos)

    # -- top level

    def parse_translation_unit(self, includes):
        functions = []
        while self.peek().kind != "eof":
            tok = self.peek()
            self.check_supported(tok)
            if not self.at_type():
                self.fail(f"expected a function definition, found {self._show(tok)}")
            functions.append(self.parse_function())
        return Ast(includes=includes, functions=functions)

    def parse_function(self):
        start = self.peek().pos
        ret = self.parse_type()
        name_tok = self.next()
        if name_tok.kind != "id" or name_tok.text in KEYWORDS:
            self.fail(f"expected function name, found {self._show(name_tok)}", pos=name_tok.pos)
        self.expect("(")
        params = []
        if not self.at(")"):
            if self.at_keyword("void") and self.peek(1).text == ")":
                self.next()
            else:
                while True:
                    params.append(self.parse_param())
                    if not self.accept(","):
                        break
        self.expect(")")
        body = self.parse_block()
        return FunctionDef(name_tok.text, ret, params, body, Span(start, body.span.end))

    def parse_param(self):
        tok = self.peek()
        self.check_supported(tok)
        ty = self.parse_type()
        if ty == "void":
            self.fail("parameters must be int scalars or int arrays", "unsupported", tok.pos)
        if self.at("*"):
            self.fail("pointer parameters are outside the supported C subset", "unsupported")
        name_tok = self.next()
        if name_tok.kind != "id":
            self.fail(f"expected parameter name, found {self._show(name_tok)}", pos=name_tok.pos)
        is_array = False
        size = None
        if self.accept("["):
            is_array = True
            if not self.at("]"):
                size = self.parse_expr()
            self.expect("]")
        return Param(name_tok.text, is_array, size, Span(tok.pos, self.peek().pos))

    # -- statements

    def parse_block(self):
        start = self.expect("{").pos
        stmts = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                self.fail("expected '}' before end of input")
            stmts.append(self.parse_stmt())
        end = self.expect("}").pos + 1
        return Block(stmts, Span(start, end))

    def parse_stmt(self):
        tok = self.peek()
        self.check_supported(tok)
        if self.at("{"):
            return self.parse_block()
        if self.at_type():
            stmt = self.parse_decl()
            self.expect(";")
            return stmt
        if self.at_keyword("if"):
            return self.parse_if()
        if self.at_keyword("for"):
            return self.parse_for()
        if self.at_keyword("while"):
            return self.parse_while()
        if self.at_keyword("return"):
            self.next()
            value = None if self.at(";") else self.parse_expr()
            end = self.expect(";").pos + 1
            return Return(value, Span(tok.pos, end))
        if self.at(";"):
            self.next()
            return Block([], Span(tok.pos, tok.pos + 1))
        stmt = self.parse_simple_stmt()
        end = self.expect(";").pos + 1
        stmt.span = Span(tok.pos, end)
        return stmt

    def parse_decl(self):
        start = self.peek().pos
        ty = self.parse_type()
        if ty == "void":
            self.fail("cannot declare variables of type void", "syntax")
        declarators = []
        while True:
            if self.at("*"):
                self.fail("pointer declarations are outside the supported C subset", "unsupported")
            name_tok = self.next()
            if name_tok.kind != "id" or name_tok.text in KEYWORDS:
                self.fail(f"expected variable name, found {self._show(name_tok)}", pos=name_tok.pos)
            d = Declarator(name_tok.text, span=Span(name_tok.pos, name_tok.pos + len(name_tok.text)))
            if self.accept("["):
                d.is_array = True
                d.array_size = self.parse_expr()
                self.expect("]")
            if self.accept("="):
                if d.is_array:
                    self.fail("array initializers are outside the supported C subset", "unsupported")
                d.init = self.parse_expr()
            declarators.append(d)
            if not self.accept(","):
                break
        return Decl(declarators, Span(start, self.peek().pos))

    def parse_if(self):
        start = self.next().pos  # 'if'
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self.parse_stmt_as_block()
        orelse = None
        if self.at_keyword("else"):
            self.next()
            orelse = self.parse_stmt_as_block()
        end = (orelse.span.end if orelse is not None else then.span.end)
        return If(cond, then, orelse, Span(start, end))

    def parse_stmt_as_block(self):
        # Braceless bodies are wrapped so downstream passes see one shape.
        if self.at("{"):
            return self.parse_block()
        stmt = self.parse_stmt()
        return Block([stmt], stmt.span)

    def parse_for(self):
        start = self.next().pos  # 'for'
        self.expect("(")
        init = None
        if not self.at(";"):
            init = self.parse_decl() if self.at_type() else self.parse_simple_stmt()
        self.expect(";")
        cond = None if self.at(";") else self.parse_expr()
        self.expect(";")
        step = None if self.at(")") else self.parse_simple_stmt()
        self.expect(")")
        body = self.parse_stmt_as_block()
        return For(init, cond, step, body, Span(start, body.span.end))

    def parse_while(self):
        start = self.next().pos
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        body = self.parse_stmt_as_block()
        return While(cond, body, Span(start, body.span.end))

    def parse_simple_stmt(self):
        """Assignment, compound assignment, ++/-- (canonicalized), or call."""
        start = self.peek().pos
        if self.at("++") or self.at("--"):
            op = self.next().text
            target = self.parse_unary()
            self._require_lvalue(target)
            return self._incdec(target, op, start)
        expr = self.parse_expr()
        if self.at("++") or self.at("--"):
            op = self.next().text
            self._require_lvalue(expr)
            return self._incdec(expr, op, start)
        if self.accept("="):
            self._require_lvalue(expr)
            value = self.parse_expr()
            return Assign(expr, value, Span(start, self.peek().pos))
        for text in COMPOUND_OPS:
            if self.at(text):
                self.next()
                self._require_lvalue(expr)
                value = self.parse_expr()
                return CompoundAssign(expr, text[0], value, Span(start, self.peek().pos))
        return ExprStmt(expr, Span(start, self.peek().pos))

    def _incdec(self, target, op, start):
        one = IntLiteral(1, target.span)
        binop = "+" if op == "++" else "-"
        value = Binary(binop, _clone_expr(target), one, target.span)
        return Assign(target, value, Span(start, self.peek().pos))

    def _require_lvalue(self, expr):
        if not isinstance(expr, (VarRef, ArrayIndex)):
            self.fail("assignment target must be a variable or array element", pos=expr.span.start)

    # -- expressions

    def parse_expr(self):
        return self.parse_binary(0)

    def parse_binary(self, level):
        if level >= len(_PRECEDENCE):
            return self.parse_unary()
        lhs = self.parse_binary(level + 1)
        while self.peek().kind == "punct" and self.peek().text in _PRECEDENCE[level]:
            op = self.next().text
            rhs = self.parse_binary(level + 1)
            lhs = Binary(op, lhs, rhs, Span(lhs.span.start, rhs.span.end))
        return lhs

    def parse_unary(self):
        tok = self.peek()
        if self.at("-") or self.at("!"):
            self.next()
            operand = self.parse_unary()
            return Unary(tok.text, operand, Span(tok.pos, operand.span.end))
        if self.at("+"):
            self.next()
            return self.parse_unary()
        if self.at("*"):
            self.fail("pointer dereference is outside the supported C subset", "unsupported", tok.pos)
        if self.at("&"):
            self.fail("address-of is outside the supported C subset", "unsupported", tok.pos)
        if self.at("~") or self.at("^") or self.at("|"):
            self.fail(f"operator {tok.text!r} is outside the supported C subset", "unsupported", tok.pos)
        if self.at("++") or self.at("--"):
            self.fail("++/-- are only supported as statements", "unsupported", tok.pos)
        return self.parse_postfix()

    def parse_postfix(self):
        expr = self.parse_primary()
        while True:
            if self.at("["):
                self.next()
                index = self.parse_expr()
                end = self.expect("]").pos + 1
                expr = ArrayIndex(expr, index, Span(expr.span.start, end))
            else:
                return expr

    def parse_primary(self):
        tok = self.peek()
        self.check_supported(tok)
        if tok.kind == "num":
            self.next()
            return IntLiteral(int(tok.text), Span(tok.pos, tok.pos + len(tok.text)))
        if tok.kind == "str":
            self.next()
            return StrLiteral(_decode_string(tok.text), Span(tok.pos, tok.pos + len(tok.text)))
        if tok.kind == "id":
            if tok.text in KEYWORDS:
                self.fail(f"unexpected keyword {tok.text!r} in expression", pos=tok.pos)
            self.next()
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.accept(","):
                            break
                end = self.expect(")").pos + 1
                return Call(tok.text, args, Span(tok.pos, end))
            return VarRef(tok.text, Span(tok.pos, tok.pos + len(tok.text)))
        if self.at("("):
            self.next()
            if self.at_type():
                self.fail("casts are outside the supported C subset", "unsupported", tok.pos)
            expr = self.parse_expr()
            self.expect(")")
            return expr
        self.fail(f"expected an expression, found {self._show(tok)}", pos=tok.pos)


def _clone_expr(expr):
    if isinstance(expr, VarRef):
        return VarRef(expr.name, expr.span)
    if isinstance(expr, ArrayIndex):
        return ArrayIndex(_clone_expr(expr.base), _clone_expr(expr.index), expr.span)
    raise TypeError(f"cannot clone {type(expr).__name__}")


# ---------------------------------------------------------------------------
# Name resolution


class _Scope:
    def __init__(self, parent=None):
        self.parent = parent
        self.names = {}  # name -> 'scalar' | 'array'

    def lookup(self, name):
        scope = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None


class _Resolver:
    def __init__(self, ast, filename, lineindex):
        self.ast = ast
        self.filename = filename
        self.lineindex = lineindex
        self.diagnostics = []
        self.functions = {}

    def error(self, span, message, kind="unresolved"):
        line, col = self.lineindex.linecol(span.start)
        self.diagnostics.append(Diagnostic(line, col, message, kind, self.filename))

    def run(self):
        for fn in self.ast.functions:
            if fn.name in self.functions:
                self.error(fn.span, f"function {fn.name!r} redefined")
            self.functions[fn.name] = fn
        for fn in self.ast.functions:
            self.resolve_function(fn)
        if self.diagnostics:
            raise ParseError(self.diagnostics)

    def resolve_function(self, fn):
        scope = _Scope()
        for p in fn.params:
            if p.name in scope.names:
                self.error(p.span, f"duplicate parameter {p.name!r}")
            scope.names[p.name] = "array" if p.is_array else "scalar"
            if p.array_size is not None:
                self.resolve_expr(p.array_size, scope, fn)
        self.resolve_block(fn.body, _Scope(scope), fn)

    def resolve_block(self, block, scope, fn):
        for stmt in block.stmts:
            self.resolve_stmt(stmt, scope, fn)

    def resolve_stmt(self, stmt, scope, fn):
        if isinstance(stmt, Decl):
            for d in stmt.declarators:
                if d.array_size is not None:
                    self.resolve_expr(d.array_size, scope, fn)
                if d.init is not None:
                    self.resolve_expr(d.init, scope, fn)
                if d.name in scope.names:
                    self.error(d.span, f"{d.name!r} redeclared in the same scope")
                scope.names[d.name] = "array" if d.is_array else "scalar"
        elif isinstance(stmt, (Assign, CompoundAssign)):
            self.resolve_expr(stmt.target, scope, fn, assign_target=True)
            self.resolve_expr(stmt.value, scope, fn)
        elif isinstance(stmt, ExprStmt):
            self.resolve_expr(stmt.expr, scope, fn)
        elif isinstance(stmt, Block):
            self.resolve_block(stmt, _Scope(scope), fn)
        elif isinstance(stmt, If):
            self.resolve_expr(stmt.cond, scope, fn)
            self.resolve_block(stmt.then, _Scope(scope), fn)
            if stmt.orelse is not None:
                self.resolve_block(stmt.orelse, _Scope(scope), fn)
        elif isinstance(stmt, For):
            inner = _Scope(scope)
            if stmt.init is not None:
                self.resolve_stmt(stmt.init, inner, fn)
            if stmt.cond is not None:
                self.resolve_expr(stmt.cond, inner, fn)
            if stmt.step is not None:
                self.resolve_stmt(stmt.step, inner, fn)
            self.resolve_block(stmt.body, _Scope(inner), fn)
        elif isinstance(stmt, While):
            self.resolve_expr(stmt.cond, scope, fn)
            self.resolve_block(stmt.body, _Scope(scope), fn)
        elif isinstance(stmt, Return):
            if stmt.value is not None:
                if fn.ret == "void":
                    self.error(stmt.span, f"void function {fn.name!r} returns a value")
                self.resolve_expr(stmt.value, scope, fn)

    def resolve_expr(self, expr, scope, fn, assign_target=False, as_call_arg=False):
        if isinstance(expr, (IntLiteral,)):
            return
        if isinstance(expr, StrLiteral):
            if not as_call_arg:
                self.error(expr.span, "string literals may only appear as extern call arguments", "unsupported")
            return
        if isinstance(expr, VarRef):
            kind = scope.lookup(expr.name)
            if kind is None:
                self.error(expr.span, f"use of undeclared variable {expr.name!r}")
            elif kind == "array" and not as_call_arg:
                self.error(expr.span, f"array {expr.name!r} used without a subscript", "unsupported")
            return
        if isinstance(expr, ArrayIndex):
            if not isinstance(expr.base, VarRef):
                self.error(expr.span, "only named arrays can be subscripted", "unsupported")
            else:
                kind = scope.lookup(expr.base.name)
                if kind is None:
                    self.error(expr.base.span, f"use of undeclared variable {expr.base.name!r}")
                elif kind != "array":
                    self.error(expr.base.span, f"{expr.base.name!r} is not an array")
            self.resolve_expr(expr.index, scope, fn)
            return
        if isinstance(expr, Binary):
            self.resolve_expr(expr.lhs, scope, fn)
            self.resolve_expr(expr.rhs, scope, fn)
            return
        if isinstance(expr, Unary):
            self.resolve_expr(expr.operand, scope, fn)
            return
        if isinstance(expr, Call):
            is_extern = expr.callee in EXTERN_FUNCTIONS
            target = self.functions.get(expr.callee)
            if target is None and not is_extern:
                self.error(expr.span, f"call to unknown function {expr.callee!r}")
            if target is not None:
                if len(expr.args) != len(target.params):
                    self.error(
                        expr.span,
                        f"{expr.callee!r} expects {len(target.params)} arguments, got {len(expr.args)}",
                    )
                else:
                    for arg, param in zip(expr.args, target.params):
                        if param.is_array:
                            if not (isinstance(arg, VarRef) and scope.lookup(arg.name) == "array"):
                                self.error(arg.span, f"argument for array parameter {param.name!r} must be an array name")
                            continue
                        self.resolve_expr(arg, scope, fn)
                    return
            for arg in expr.args:
                self.resolve_expr(arg, scope, fn, as_call_arg=is_extern)
            return
        raise TypeError(f"unhandled expression node {type(expr).__name__}")


# ---------------------------------------------------------------------------
# Public API


def parse(source, filename="<input>"):
    """Parse MiniC text into a resolved Ast; raise ParseError with diagnostics."""
    lineindex = _LineIndex(source)
    diagnostics = []
    masked, includes = _preprocess(source, filename, diagnostics, lineindex)
    tokens = _lex(masked, filename, diagnostics, lineindex)
    if diagnostics:
        raise ParseError(diagnostics)
    ast = _Parser(tokens, filename, lineindex).parse_translation_unit(includes)
    _Resolver(ast, filename, lineindex).run()
    return ast


def parse_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), filename=str(path))


def parse_expr_text(text, filename="<expr>"):
    """Parse a single expression (used for condition round-trips); unresolved."""
    lineindex = _LineIndex(text)
    diagnostics = []
    masked, _ = _preprocess(text, filename, diagnostics, lineindex)
    tokens = _lex(masked, filename, diagnostics, lineindex)
    if diagnostics:
        raise ParseError(diagnostics)
    parser = _Parser(tokens, filename, lineindex)
    expr = parser.parse_expr()
    if parser.peek().kind != "eof":
        parser.fail(f"trailing input after expression: {parser._show(parser.peek())}")
    return expr


# ---------------------------------------------------------------------------
# Pretty printer

_OP_LEVEL = {}
for _lvl, _ops in enumerate(_PRECEDENCE):
    for _op in _ops:
        _OP_LEVEL[_op] = _lvl
_UNARY_LEVEL = len(_PRECEDENCE)


def expr_text(expr, parent_level=-1):
    """Canonical text of an expression; minimal parentheses."""
    if isinstance(expr, IntLiteral):
        return str(expr.value)
    if isinstance(expr, StrLiteral):
        return encode_string(expr.value)
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, ArrayIndex):
        return f"{expr_text(expr.base, _UNARY_LEVEL)}[{expr_text(expr.index)}]"
    if isinstance(expr, Call):
        return f"{expr.callee}({', '.join(expr_text(a) for a in expr.args)})"
    if isinstance(expr, Unary):
        inner = expr_text(expr.operand, _UNARY_LEVEL)
        # guard '- -x' from reading as '--x'
        sep = " " if expr.op == "-" and inner.startswith("-") else ""
        return f"{expr.op}{sep}{inner}"
    if isinstance(expr, Binary):
        level = _OP_LEVEL[expr.op]
        lhs = expr_text(expr.lhs, level - 1)  # left assoc: same level ok on the left
        rhs = expr_text(expr.rhs, level)
        text = f"{lhs} {expr.op} {rhs}"
        if level <= parent_level:
            return f"({text})"
        return text
    raise TypeError(f"unhandled expression node {type(expr).__name__}")


def _stmt_lines(stmt, indent, lines):
    pad = "    " * indent
    if isinstance(stmt, Decl):
        parts = []
        for d in stmt.declarators:
            text = d.name
            if d.is_array:
                text += f"[{expr_text(d.array_size)}]" if d.array_size is not None else "[]"
            if d.init is not None:
                text += f" = {expr_text(d.init)}"
            parts.append(text)
        lines.append(f"{pad}int {', '.join(parts)};")
    elif isinstance(stmt, Assign):
        lines.append(f"{pad}{expr_text(stmt.target)} = {expr_text(stmt.value)};")
    elif isinstance(stmt, CompoundAssign):
        lines.append(f"{pad}{expr_text(stmt.target)} {stmt.op}= {expr_text(stmt.value)};")
    elif isinstance(stmt, ExprStmt):
        lines.append(f"{pad}{expr_text(stmt.expr)};")
    elif isinstance(stmt, Return):
        if stmt.value is None:
            lines.append(f"{pad}return;")
        else:
            lines.append(f"{pad}return {expr_text(stmt.value)};")
    elif isinstance(stmt, Block):
        lines.append(f"{pad}{{")
        for s in stmt.stmts:
            _stmt_lines(s, indent + 1, lines)
        lines.append(f"{pad}}}")
    elif isinstance(stmt, If):
        lines.append(f"{pad}if ({expr_text(stmt.cond)}) {{")
        for s in stmt.then.stmts:
            _stmt_lines(s, indent + 1, lines)
        if stmt.orelse is None:
            lines.append(f"{pad}}}")
        else:
            lines.append(f"{pad}}} else {{")
            for s in stmt.orelse.stmts:
                _stmt_lines(s, indent + 1, lines)
            lines.append(f"{pad}}}")
    elif isinstance(stmt, While):
        lines.append(f"{pad}while ({expr_text(stmt.cond)}) {{")
        for s in stmt.body.stmts:
            _stmt_lines(s, indent + 1, lines)
        lines.append(f"{pad}}}")
    elif isinstance(stmt, For):
        init = _inline_stmt(stmt.init)
        cond = expr_text(stmt.cond) if stmt.cond is not None else ""
        step = _inline_stmt(stmt.step)
        lines.append(f"{pad}for ({init}; {cond}; {step}) {{")
        for s in stmt.body.stmts:
            _stmt_lines(s, indent + 1, lines)
        lines.append(f"{pad}}}")
    else:
        raise TypeError(f"unhandled statement node {type(stmt).__name__}")


def _inline_stmt(stmt):
    if stmt is None:
        return ""
    lines = []
    _stmt_lines(stmt, 0, lines)
    assert len(lines) == 1, "for-header statements must be single-line"
    return lines[0].rstrip(";")


def _param_text(p):
    if p.is_array:
        size = expr_text(p.array_size) if p.array_size is not None else ""
        return f"int {p.name}[{size}]"
    return f"int {p.name}"


def pretty_print(ast):
    """Render an Ast back to canonical MiniC text; re-parses to an equal tree."""
    lines = []
    for inc in ast.includes:
        lines.append(f"#include <{inc}>")
    if ast.includes:
        lines.append("")
    for i, fn in enumerate(ast.functions):
        if i:
            lines.append("")
        params = ", ".join(_param_text(p) for p in fn.params)
        lines.append(f"{fn.ret} {fn.name}({params}) {{")
        for s in fn.body.stmts:
            _stmt_lines(s, 1, lines)
        lines.append("}")
    return "\n".join(lines) + "\n"


def ast_equal(a, b):
    """Structural equality ignoring spans."""
    return _strip_key(a) == _strip_key(b)


def _strip_key(node):
    if isinstance(node, (Ast,)):
        return ("ast", tuple(node.includes), tuple(_strip_key(f) for f in node.functions))
    if isinstance(node, FunctionDef):
        return (
            "fn",
            node.name,
            node.ret,
            tuple(_strip_key(p) for p in node.params),
            _strip_key(node.body),
        )
    if isinstance(node, Param):
        return ("param", node.name, node.is_array, _strip_key(node.array_size))
    if isinstance(node, Declarator):
        return ("dtor", node.name, node.is_array, _strip_key(node.array_size), _strip_key(node.init))
    if isinstance(node, Decl):
        return ("decl", tuple(_strip_key(d) for d in node.declarators))
    if isinstance(node, Assign):
        return ("assign", _strip_key(node.target), _strip_key(node.value))
    if isinstance(node, CompoundAssign):
        return ("cassign", node.op, _strip_key(node.target), _strip_key(node.value))
    if isinstance(node, ExprStmt):
        return ("exprstmt", _strip_key(node.expr))
    if isinstance(node, Block):
        return ("block", tuple(_strip_key(s) for s in node.stmts))
    if isinstance(node, If):
        return ("if", _strip_key(node.cond), _strip_key(node.then), _strip_key(node.orelse))
    if isinstance(node, For):
        return ("for", _strip_key(node.init), _strip_key(node.cond), _strip_key(node.step), _strip_key(node.body))
    if isinstance(node, While):
        return ("while", _strip_key(node.cond), _strip_key(node.body))
    if isinstance(node, Return):
        return ("return", _strip_key(node.value))
    if isinstance(node, IntLiteral):
        return ("int", node.value)
    if isinstance(node, StrLiteral):
        return ("str", node.value)
    if isinstance(node, VarRef):
        return ("var", node.name)
    if isinstance(node, ArrayIndex):
        return ("index", _strip_key(node.base), _strip_key(node.index))
    if isinstance(node, Binary):
        return ("bin", node.op, _strip_key(node.lhs), _strip_key(node.rhs))
    if isinstance(node, Unary):
        return ("un", node.op, _strip_key(node.operand))
    if isinstance(node, Call):
        return ("call", node.callee, tuple(_strip_key(a) for a in node.args))
    if node is None:
        return None
    raise TypeError(f"unhandled node {type(node).__name__}")
