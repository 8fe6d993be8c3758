"""Lexer and recursive-descent parser for Feather source text.

The surface grammar::

    module   := (spec | function)*
    spec     := "spec" name "(" types ")" "->" type "."
    function := clause (";" clause)* "."
    clause   := name "(" patterns ")" ["when" guard] "->" expr ("," expr)*

``instrumented=True`` additionally accepts the forms produced by the
instrumenter: ``@trace(e)``, ``@probe(g)``, ``case@function``/``case@lambda``
and fresh variables such as ``_FV@3``.
"""
from __future__ import annotations

import re
from typing import NamedTuple

from . import ftypes as ft
from .syntax import (
    CASE, FUNCTION, LAMBDA, BinOp, Call, Case, Clause, Cons, Expr,
    FunctionDef, Generator, GuardProbe, If, Lambda, ListComp, Literal, Match,
    Module, Nil, PCons, PLit, PNil, PTuple, PVar, PWild, Seq, SpecDecl,
    TraceEmit, Tuple, UnOp, Var, walk,
)
from .values import Atom, Tup, Value, wrap_int

BUILTINS = {
    ("length", 1), ("reverse", 1), ("sort", 1), ("integer_to_list", 1),
    ("member", 2), ("map", 2), ("foldl", 3), ("sum", 1),
}
GUARD_BUILTINS = {("length", 1)}

KEYWORDS = {
    "case", "of", "end", "if", "when", "fun", "begin", "not", "andalso",
    "orelse", "div", "rem", "spec",
}
COMPARISONS = {"==", "/=", "=:=", "=/=", "<", ">", "=<", ">="}


class FeatherSyntaxError(SyntaxError):
    def __init__(self, line: int, col: int, expected, got: str = ""):
        self.line = line
        self.col = col
        self.expected = frozenset([expected] if isinstance(expected, str) else expected)
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"{line}:{col}: expected {exp}" + (f", got {got!r}" if got else ""))


class Token(NamedTuple):
    kind: str  # int, atom, var, kw, op, eof
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*(?:@\d+)?)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<op>=:=|=/=|==|/=|=<|>=|->|<-|\|\||\+\+|\.\.|[<>=+\-*/,;.(){}\[\]|@])
""", re.VERBOSE)


def tokenize(source: str, instrumented: bool = False) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise FeatherSyntaxError(line, col, "token", source[pos])
        kind = m.lastgroup
        text = m.group()
        if kind == "ws":
            nl = text.count("\n")
            if nl:
                line += nl
                line_start = pos + text.rindex("\n") + 1
        else:
            if kind == "var" and "@" in text and not instrumented:
                raise FeatherSyntaxError(line, col, "variable", text)
            if kind == "atom" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class Parser:
    def __init__(self, source: str, instrumented: bool = False):
        self.toks = tokenize(source, instrumented)
        self.i = 0
        self.instrumented = instrumented

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "kw")

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(text)
        return self.advance()

    def expect_kind(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.fail(kind)
        return self.advance()

    def fail(self, expected):
        t = self.tok
        raise FeatherSyntaxError(t.line, t.col, expected, t.text or "end of input")

    # -- module level
    def module(self, name: str) -> Module:
        specs, functions = [], []
        while self.tok.kind != "eof":
            if self.at("spec") or (self.at("-") and self.peek().text == "spec"):
                specs.append(self.spec())
            elif self.tok.kind == "atom":
                functions.append(self.function())
            else:
                self.fail({"spec", "function"})
        seen = set()
        for f in functions:
            key = (f.name, f.arity)
            if key in seen:
                raise FeatherSyntaxError(f.line, f.col, "unique function", f"{f.name}/{f.arity}")
            if key in BUILTINS:
                raise FeatherSyntaxError(f.line, f.col, "non-builtin name", f"{f.name}/{f.arity}")
            seen.add(key)
        mod = Module(name, tuple(specs), tuple(functions), line=1, col=1)
        _check_expressions(mod)
        return mod

    def spec(self) -> SpecDecl:
        if self.at("-"):
            self.advance()
        start = self.expect("spec")
        name = self.expect_kind("atom").text
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.type_())
            while self.at(","):
                self.advance()
                args.append(self.type_())
        self.expect(")")
        self.expect("->")
        ret = self.type_()
        self.expect(".")
        return SpecDecl(name, tuple(args), ret, line=start.line, col=start.col)

    def function(self) -> FunctionDef:
        first = self.tok
        clauses = [self.function_clause(first.text)]
        while self.at(";"):
            self.advance()
            clauses.append(self.function_clause(first.text))
        self.expect(".")
        arity = len(clauses[0].patterns)
        for c in clauses:
            if len(c.patterns) != arity:
                raise FeatherSyntaxError(c.line, c.col, f"{arity} parameters")
        return FunctionDef(first.text, arity, tuple(clauses), line=first.line, col=first.col)

    def function_clause(self, name: str) -> Clause:
        t = self.tok
        if t.kind != "atom" or t.text != name:
            self.fail(name)
        self.advance()
        patterns = self.paren_patterns()
        return self.clause_rest(patterns, t)

    def paren_patterns(self) -> tuple:
        self.expect("(")
        pats = []
        if not self.at(")"):
            pats.append(self.pattern())
            while self.at(","):
                self.advance()
                pats.append(self.pattern())
        self.expect(")")
        return tuple(pats)

    def clause_rest(self, patterns, start: Token) -> Clause:
        guard = None
        if self.at("when"):
            self.advance()
            guard = self.guard()
        self.expect("->")
        body = self.body()
        return Clause(patterns, guard, body, line=start.line, col=start.col)

    def body(self) -> tuple:
        exprs = [self.expr()]
        while self.at(","):
            self.advance()
            exprs.append(self.expr())
        return tuple(exprs)

    def guard(self) -> Expr:
        parts = [self.expr()]
        while self.at(","):
            self.advance()
            parts.append(self.expr())
        g = parts[-1]
        for p in reversed(parts[:-1]):
            g = BinOp("andalso", p, g, line=p.line, col=p.col)
        _check_guard(g)
        return g

    def pattern(self):
        return to_pattern(self.expr())

    # -- expressions
    def expr(self) -> Expr:
        left = self.orelse()
        if self.at("="):
            self.advance()
            right = self.expr()
            return Match(to_pattern(left), right, line=left.line, col=left.col)
        return left

    def _right_assoc(self, op: str, sub):
        left = sub()
        if self.at(op):
            self.advance()
            right = self._right_assoc(op, sub)
            return BinOp(op, left, right, line=left.line, col=left.col)
        return left

    def orelse(self) -> Expr:
        return self._right_assoc("orelse", self.andalso)

    def andalso(self) -> Expr:
        return self._right_assoc("andalso", self.comparison)

    def comparison(self) -> Expr:
        left = self.listop()
        if self.tok.kind == "op" and self.tok.text in COMPARISONS:
            op = self.advance().text
            right = self.listop()
            return BinOp(op, left, right, line=left.line, col=left.col)
        return left

    def listop(self) -> Expr:
        return self._right_assoc("++", self.additive)

    def additive(self) -> Expr:
        left = self.multiplicative()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            right = self.multiplicative()
            left = BinOp(op, left, right, line=left.line, col=left.col)
        return left

    def multiplicative(self) -> Expr:
        left = self.unary()
        while self.at("*") or self.at("/") or self.at("div") or self.at("rem"):
            op = self.advance().text
            right = self.unary()
            left = BinOp(op, left, right, line=left.line, col=left.col)
        return left

    def unary(self) -> Expr:
        t = self.tok
        if self.at("-"):
            self.advance()
            if self.tok.kind == "int":
                n = int(self.advance().text)
                return Literal(wrap_int(-n), line=t.line, col=t.col)
            return UnOp("-", self.unary(), line=t.line, col=t.col)
        if self.at("not"):
            self.advance()
            return UnOp("not", self.unary(), line=t.line, col=t.col)
        return self.primary()

    def primary(self) -> Expr:
        t = self.tok
        pos = dict(line=t.line, col=t.col)
        if t.kind == "int":
            self.advance()
            return Literal(wrap_int(int(t.text)), **pos)
        if t.kind == "var":
            self.advance()
            return Var(t.text, **pos)
        if t.kind == "atom":
            self.advance()
            if self.at("("):
                return Call(t.text, self.args(), **pos)
            return Literal(Atom(t.text), **pos)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("{"):
            self.advance()
            elems = []
            if not self.at("}"):
                elems = list(self.body())
            self.expect("}")
            return Tuple(tuple(elems), **pos)
        if self.at("["):
            return self.list_expr()
        if self.at("case"):
            return self.case_expr()
        if self.at("if"):
            self.advance()
            clauses = [self.if_clause()]
            while self.at(";"):
                self.advance()
                clauses.append(self.if_clause())
            self.expect("end")
            return If(tuple(clauses), **pos)
        if self.at("fun"):
            self.advance()
            clauses = [self.fun_clause()]
            while self.at(";"):
                self.advance()
                clauses.append(self.fun_clause())
            self.expect("end")
            arity = len(clauses[0].patterns)
            if any(len(c.patterns) != arity for c in clauses):
                raise FeatherSyntaxError(t.line, t.col, f"{arity} parameters")
            return Lambda(tuple(clauses), **pos)
        if self.at("begin"):
            self.advance()
            exprs = self.body()
            self.expect("end")
            return Seq(exprs, **pos)
        if self.instrumented and self.at("@"):
            self.advance()
            which = self.expect_kind("atom").text
            self.expect("(")
            if which == "trace":
                node = TraceEmit(self.expr(), **pos)
            elif which == "probe":
                node = GuardProbe(self.guard(), **pos)
            else:
                raise FeatherSyntaxError(t.line, t.col, {"trace", "probe"}, which)
            self.expect(")")
            return node
        self.fail("expression")

    def args(self) -> tuple:
        self.expect("(")
        args = []
        if not self.at(")"):
            args = list(self.body())
        self.expect(")")
        return tuple(args)

    def list_expr(self) -> Expr:
        t = self.expect("[")
        pos = dict(line=t.line, col=t.col)
        if self.at("]"):
            self.advance()
            return Nil(**pos)
        first = self.expr()
        if self.at("||"):
            self.advance()
            quals = [self.qualifier()]
            while self.at(","):
                self.advance()
                quals.append(self.qualifier())
            self.expect("]")
            return ListComp(first, tuple(quals), **pos)
        elems = [first]
        while self.at(","):
            self.advance()
            elems.append(self.expr())
        tail: Expr
        if self.at("|"):
            self.advance()
            tail = self.expr()
        else:
            tail = Nil(line=self.tok.line, col=self.tok.col)
        self.expect("]")
        for e in reversed(elems):
            tail = Cons(e, tail, line=e.line, col=e.col)
        return tail

    def qualifier(self):
        e = self.expr()
        if self.at("<-"):
            self.advance()
            src = self.expr()
            return Generator(to_pattern(e), src, line=e.line, col=e.col)
        return e

    def case_expr(self) -> Case:
        t = self.expect("case")
        origin = CASE
        if self.instrumented and self.at("@"):
            self.advance()
            origin = self.expect_kind("atom").text
            if origin not in (FUNCTION, LAMBDA):
                raise FeatherSyntaxError(t.line, t.col, {FUNCTION, LAMBDA}, origin)
        scrutinee = self.expr()
        self.expect("of")
        clauses = [self.case_clause()]
        while self.at(";"):
            self.advance()
            clauses.append(self.case_clause())
        self.expect("end")
        return Case(scrutinee, tuple(clauses), origin, line=t.line, col=t.col)

    def fun_clause(self) -> Clause:
        start = self.tok
        return self.clause_rest(self.paren_patterns(), start)

    def case_clause(self) -> Clause:
        start = self.tok
        return self.clause_rest((self.pattern(),), start)

    def if_clause(self) -> Clause:
        start = self.tok
        g = self.guard()
        self.expect("->")
        return Clause((), g, self.body(), line=start.line, col=start.col)

    # -- types
    def type_(self) -> ft.FType:
        members = [self.type_primary()]
        while self.at("|"):
            self.advance()
            members.append(self.type_primary())
        return members[0] if len(members) == 1 else ft.make_union(members)

    def type_primary(self) -> ft.FType:
        t = self.tok
        if self.at(".."):
            self.advance()
            return ft.int_range(None, self.type_int())
        if t.kind == "int" or self.at("-"):
            lo = self.type_int()
            if self.at(".."):
                self.advance()
                if self.tok.kind != "int" and not self.at("-"):
                    return ft.int_range(lo, None)
                return ft.int_range(lo, self.type_int())
            return ft.literals([lo])
        if self.at("{"):
            self.advance()
            elems = []
            if not self.at("}"):
                elems.append(self.type_())
                while self.at(","):
                    self.advance()
                    elems.append(self.type_())
            self.expect("}")
            return ft.TupleOf(tuple(elems))
        if self.at("["):
            self.advance()
            if self.at("]"):
                self.advance()
                return ft.FixedList(())
            elem = self.type_()
            self.expect("]")
            return ft.ListOf(elem)
        if t.kind == "atom":
            self.advance()
            if not self.at("("):
                return ft.atoms([t.text])
            self.advance()
            args = []
            if not self.at(")"):
                args.append(self.type_())
                while self.at(","):
                    self.advance()
                    args.append(self.type_arg() if t.text == "list" else self.type_())
            self.expect(")")
            return _named_type(t, args)
        self.fail("type")

    def type_arg(self):
        if self.tok.kind == "int" and self.peek().text in (")", ","):
            return int(self.advance().text)
        return self.type_()

    def type_int(self) -> int:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        n = int(self.expect_kind("int").text)
        return -n if neg else n


def _named_type(t: Token, args) -> ft.FType:
    name, n = t.text, len(args)
    simple = {
        "integer": ft.ANY_INT, "pos_integer": ft.POS_INT,
        "non_neg_integer": ft.int_range(0, None), "neg_integer": ft.int_range(None, -1),
        "atom": ft.ANY_ATOM, "any": ft.ANY, "term": ft.ANY,
        "boolean": ft.atoms(["true", "false"]), "none": ft.EMPTY,
    }
    if name in simple and n == 0:
        return simple[name]
    if name == "list" and n == 0:
        return ft.ListOf(ft.ANY)
    if name == "list" and n == 1 and isinstance(args[0], ft.FType):
        return ft.ListOf(args[0])
    if name == "list" and n == 2 and isinstance(args[0], ft.FType) and isinstance(args[1], int):
        return ft.FixedList((args[0],) * args[1])
    if name == "fixed_list" and all(isinstance(a, ft.FType) for a in args):
        return ft.FixedList(tuple(args))
    raise FeatherSyntaxError(t.line, t.col, "known type", f"{name}/{n}")


def to_pattern(e: Expr):
    t = type(e)
    pos = dict(line=e.line, col=e.col)
    if t is Var:
        return PWild(**pos) if e.name == "_" else PVar(e.name, **pos)
    if t is Literal:
        return PLit(e.value, **pos)
    if t is Tuple:
        return PTuple(tuple(to_pattern(x) for x in e.elems), **pos)
    if t is Cons:
        return PCons(to_pattern(e.head), to_pattern(e.tail), **pos)
    if t is Nil:
        return PNil(**pos)
    raise FeatherSyntaxError(e.line, e.col, "pattern", type(e).__name__)


_GUARD_NODES = (Literal, Var, Tuple, Cons, Nil, BinOp, UnOp, Call, TraceEmit)


def _check_guard(g: Expr) -> None:
    for _, node in walk(g):
        if not isinstance(node, _GUARD_NODES):
            raise FeatherSyntaxError(node.line, node.col, "guard expression", type(node).__name__)
        if isinstance(node, Call) and (node.name, len(node.args)) not in GUARD_BUILTINS:
            raise FeatherSyntaxError(node.line, node.col, "guard builtin", node.name)


def _check_expressions(mod: Module) -> None:
    for _, node in walk(mod):
        if type(node) is Var and node.name == "_":
            raise FeatherSyntaxError(node.line, node.col, "variable", "_")


def parse(source: str, name: str = "module", instrumented: bool = False) -> Module:
    """Parse Feather source text into a :class:`Module`."""
    return Parser(source, instrumented).module(name)


def parse_expr(source: str, instrumented: bool = False) -> Expr:
    p = Parser(source, instrumented)
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail("end of input")
    return e


def parse_value(text: str) -> Value:
    """Parse a serialized value (``{1,[a,b]}``)."""
    return expr_value(parse_expr(text))


def parse_values(text: str) -> tuple:
    """Parse a comma-separated list of values (call arguments)."""
    if not text.strip():
        return ()
    p = Parser(text)
    vals = [expr_value(e) for e in p.body()]
    if p.tok.kind != "eof":
        p.fail("end of input")
    return tuple(vals)


def expr_value(e: Expr) -> Value:
    t = type(e)
    if t is Literal:
        return e.value
    if t is Tuple:
        return Tup(tuple(expr_value(x) for x in e.elems))
    if t is Nil:
        return ()
    if t is Cons:
        tail = expr_value(e.tail)
        if type(tail) is not tuple:
            raise FeatherSyntaxError(e.line, e.col, "proper list")
        return (expr_value(e.head),) + tail
    raise FeatherSyntaxError(e.line, e.col, "value literal", type(e).__name__)


def parse_file(path) -> Module:
    from pathlib import Path
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), name=path.stem)
