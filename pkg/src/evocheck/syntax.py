"""Feather abstract syntax, generic child access and path-based surgery.

Every node exposes an ordered list of children (1-based when addressed by
paths).  Children are enumerated left to right as they appear in the
source, e.g. ``Match`` children are ``[pattern, expr]`` and ``Clause``
children are ``[*patterns, guard?, *body]``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional

from .ftypes import FType


def _meta(default=None):
    return field(default=default, compare=False, kw_only=True, repr=False)


@dataclass(frozen=True)
class Node:
    line: int = _meta(0)
    col: int = _meta(0)
    # Filled in by instrument.annotate_bindings.
    bound_here: Optional[frozenset] = _meta()
    bound_before: Optional[frozenset] = _meta()


# ---------------------------------------------------------------- patterns

class Pattern(Node):
    pass


@dataclass(frozen=True)
class PWild(Pattern):
    pass


@dataclass(frozen=True)
class PVar(Pattern):
    name: str


@dataclass(frozen=True)
class PLit(Pattern):
    value: object


@dataclass(frozen=True)
class PTuple(Pattern):
    elems: tuple


@dataclass(frozen=True)
class PCons(Pattern):
    head: Pattern
    tail: Pattern


@dataclass(frozen=True)
class PNil(Pattern):
    pass


# ------------------------------------------------------------- expressions

class Expr(Node):
    pass


@dataclass(frozen=True)
class Literal(Expr):
    value: object


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Tuple(Expr):
    elems: tuple


@dataclass(frozen=True)
class Cons(Expr):
    head: Expr
    tail: Expr


@dataclass(frozen=True)
class Nil(Expr):
    pass


@dataclass(frozen=True)
class Match(Expr):
    pattern: Pattern
    expr: Expr


@dataclass(frozen=True)
class Clause(Node):
    patterns: tuple
    guard: Optional[Expr]
    body: tuple


# Origins of a case expression.  Instrumentation rewrites function and
# lambda clause dispatch into case expressions; the origin keeps the
# original failure kind and pattern scoping.
CASE = "case"
FUNCTION = "function"
LAMBDA = "lambda"


@dataclass(frozen=True)
class Case(Expr):
    scrutinee: Expr
    clauses: tuple
    origin: str = CASE


@dataclass(frozen=True)
class If(Expr):
    clauses: tuple


@dataclass(frozen=True)
class Generator(Node):
    pattern: Pattern
    expr: Expr


@dataclass(frozen=True)
class ListComp(Expr):
    template: Expr
    qualifiers: tuple  # Generator or filter Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple


@dataclass(frozen=True)
class Lambda(Expr):
    clauses: tuple


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class UnOp(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True)
class Seq(Expr):
    """``begin e1, ..., en end``"""

    exprs: tuple


@dataclass(frozen=True)
class TraceEmit(Expr):
    """Instrumentation only: send the value of ``expr`` to the trace sink."""

    expr: Expr


@dataclass(frozen=True)
class GuardProbe(Expr):
    """Instrumentation only: evaluate ``guard`` with guard semantics for its
    trace side effects; evaluates to ``true``."""

    guard: Expr


# ----------------------------------------------------------------- toplevel

@dataclass(frozen=True)
class FunctionDef(Node):
    name: str
    arity: int
    clauses: tuple


@dataclass(frozen=True)
class SpecDecl(Node):
    name: str
    args: tuple  # of FType
    ret: FType


@dataclass(frozen=True)
class Module(Node):
    name: str
    specs: tuple
    functions: tuple

    def function(self, name: str, arity: int) -> Optional[FunctionDef]:
        for f in self.functions:
            if f.name == name and f.arity == arity:
                return f
        return None

    def spec(self, name: str, arity: int) -> Optional[SpecDecl]:
        for s in self.specs:
            if s.name == name and len(s.args) == arity:
                return s
        return None


TARGETS = (Match, ListComp, Case, If, Lambda, FunctionDef)


# ------------------------------------------------------------ child access

def children(node: Node) -> tuple:
    t = type(node)
    if t is Clause:
        guard = (node.guard,) if node.guard is not None else ()
        return node.patterns + guard + node.body
    if t in (PTuple, Tuple):
        return node.elems
    if t in (PCons, Cons):
        return (node.head, node.tail)
    if t in (Match,):
        return (node.pattern, node.expr)
    if t is Generator:
        return (node.pattern, node.expr)
    if t is Case:
        return (node.scrutinee,) + node.clauses
    if t in (If, Lambda, FunctionDef):
        return node.clauses
    if t is ListComp:
        return (node.template,) + node.qualifiers
    if t is Call:
        return node.args
    if t is BinOp:
        return (node.left, node.right)
    if t is UnOp:
        return (node.operand,)
    if t is Seq:
        return node.exprs
    if t is TraceEmit:
        return (node.expr,)
    if t is GuardProbe:
        return (node.guard,)
    if t is Module:
        return node.functions
    return ()


def rebuild(node: Node, kids) -> Node:
    """Return a copy of ``node`` with its children replaced by ``kids``."""
    kids = tuple(kids)
    t = type(node)
    r = dataclasses.replace
    if t is Clause:
        n = len(node.patterns)
        g = 1 if node.guard is not None else 0
        return r(node, patterns=kids[:n], guard=kids[n] if g else None,
                 body=kids[n + g:])
    if t in (PTuple, Tuple):
        return r(node, elems=kids)
    if t in (PCons, Cons):
        return r(node, head=kids[0], tail=kids[1])
    if t in (Match, Generator):
        return r(node, pattern=kids[0], expr=kids[1])
    if t is Case:
        return r(node, scrutinee=kids[0], clauses=kids[1:])
    if t in (If, Lambda, FunctionDef):
        return r(node, clauses=kids)
    if t is ListComp:
        return r(node, template=kids[0], qualifiers=kids[1:])
    if t is Call:
        return r(node, args=kids)
    if t is BinOp:
        return r(node, left=kids[0], right=kids[1])
    if t is UnOp:
        return r(node, operand=kids[0])
    if t is Seq:
        return r(node, exprs=kids)
    if t is TraceEmit:
        return r(node, expr=kids[0])
    if t is GuardProbe:
        return r(node, guard=kids[0])
    if t is Module:
        return r(node, functions=kids)
    if kids:
        raise InvalidPath(f"{t.__name__} has no children")
    return node


# -------------------------------------------------------------------- paths

class Step(NamedTuple):
    node: Node  # the parent
    index: int  # 1-based child index


AstPath = tuple  # of Step


class InvalidPath(Exception):
    pass


def node_at(root: Node, path) -> Node:
    node = root
    for step in path:
        kids = children(node)
        if not 1 <= step.index <= len(kids):
            raise InvalidPath(f"child {step.index} of {type(node).__name__}")
        node = kids[step.index - 1]
    return node


def replace_at(root: Node, path, new: Node) -> Node:
    if not path:
        return new
    index = path[0].index
    kids = list(children(root))
    if not 1 <= index <= len(kids):
        raise InvalidPath(f"child {index} of {type(root).__name__}")
    kids[index - 1] = replace_at(kids[index - 1], path[1:], new)
    return rebuild(root, kids)


def walk(root: Node, path=()) -> Iterator[tuple]:
    """Pre-order traversal yielding ``(path, node)`` pairs."""
    yield path, root
    for i, kid in enumerate(children(root), 1):
        yield from walk(kid, path + (Step(root, i),))


def pattern_to_expr(p: Pattern) -> Expr:
    """Rebuild the value a wildcard-free pattern matched."""
    t = type(p)
    if t is PVar:
        return Var(p.name)
    if t is PLit:
        return Literal(p.value)
    if t is PTuple:
        return Tuple(tuple(pattern_to_expr(e) for e in p.elems))
    if t is PCons:
        return Cons(pattern_to_expr(p.head), pattern_to_expr(p.tail))
    if t is PNil:
        return Nil()
    raise ValueError("wildcards cannot be turned into expressions")


def pattern_vars(p: Pattern) -> list:
    """Variable names of ``p`` in left-to-right order (with repeats)."""
    out = []
    stack = [p]
    while stack:
        q = stack.pop()
        if type(q) is PVar:
            out.append(q.name)
        else:
            stack.extend(reversed(children(q)))
    return out
