"""Pretty printer producing re-parseable Feather text."""
from __future__ import annotations

from .ftypes import format_type
from .syntax import (
    CASE, BinOp, Call, Case, Clause, Cons, FunctionDef, Generator,
    GuardProbe, If, Lambda, ListComp, Literal, Match, Module, Nil, PCons,
    PLit, PNil, PTuple, PVar, PWild, Seq, SpecDecl, TraceEmit, Tuple, UnOp,
    Var,
)
from .values import Atom

INDENT = "    "

# precedence, associativity
_BINOPS = {
    "orelse": (2, "right"), "andalso": (3, "right"),
    "==": (4, None), "/=": (4, None), "=:=": (4, None), "=/=": (4, None),
    "<": (4, None), ">": (4, None), "=<": (4, None), ">=": (4, None),
    "++": (5, "right"),
    "+": (6, "left"), "-": (6, "left"),
    "*": (7, "left"), "/": (7, "left"), "div": (7, "left"), "rem": (7, "left"),
}
_MATCH, _UNARY, _PRIMARY = 1, 8, 9


def pretty(node) -> str:
    """Render a module, function, expression or pattern as source text."""
    if isinstance(node, Module):
        return _module(node)
    if isinstance(node, FunctionDef):
        return _function(node, 0)
    if isinstance(node, SpecDecl):
        return _spec(node)
    return _expr(node, 0, 0)


def _module(m: Module) -> str:
    out = []
    placed = set()
    for f in m.functions:
        spec = m.spec(f.name, f.arity)
        if spec is not None:
            out.append(_spec(spec))
            placed.add(id(spec))
        out.append(_function(f, 0) + "\n")
    lead = [_spec(s) for s in m.specs if id(s) not in placed]
    return "\n".join(lead + out)


def _spec(s: SpecDecl) -> str:
    args = ", ".join(format_type(a) for a in s.args)
    return f"spec {s.name}({args}) -> {format_type(s.ret)}."


def _function(f: FunctionDef, ind: int) -> str:
    parts = [_clause(c, ind, head=f.name) for c in f.clauses]
    return ";\n".join(parts) + "."


def _clause(c: Clause, ind: int, head: str = None) -> str:
    pad = INDENT * ind
    if head is not None:
        lhs = f"{head}(" + ", ".join(_pattern(p) for p in c.patterns) + ")"
    elif c.patterns:  # case clause
        lhs = _pattern(c.patterns[0])
    else:  # if clause
        lhs = ""
    if c.guard is not None:
        g = _expr(c.guard, _MATCH + 1, ind + 1)
        lhs = f"{lhs} when {g}" if lhs else g
    body = (",\n").join(INDENT * (ind + 1) + _expr(e, _MATCH, ind + 1) for e in c.body)
    return f"{pad}{lhs} ->\n{body}"


def _fun_clause(c: Clause, ind: int) -> str:
    pad = INDENT * ind
    lhs = "(" + ", ".join(_pattern(p) for p in c.patterns) + ")"
    if c.guard is not None:
        lhs += " when " + _expr(c.guard, _MATCH + 1, ind + 1)
    body = (",\n").join(INDENT * (ind + 1) + _expr(e, _MATCH, ind + 1) for e in c.body)
    return f"{pad}{lhs} ->\n{body}"


def _atom(a: Atom) -> str:
    return a.name


def _lit(v) -> str:
    if isinstance(v, Atom):
        return _atom(v)
    return str(v)


def _pattern(p) -> str:
    t = type(p)
    if t is PWild:
        return "_"
    if t is PVar:
        return p.name
    if t is PLit:
        return _lit(p.value)
    if t is PTuple:
        return "{" + ", ".join(_pattern(e) for e in p.elems) + "}"
    if t is PNil:
        return "[]"
    if t is PCons:
        elems = []
        while type(p) is PCons:
            elems.append(_pattern(p.head))
            p = p.tail
        inner = ", ".join(elems)
        if type(p) is PNil:
            return f"[{inner}]"
        return f"[{inner} | {_pattern(p)}]"
    raise TypeError(f"not a pattern: {p!r}")


def _prec(e) -> int:
    t = type(e)
    if t is Match:
        return _MATCH
    if t is BinOp:
        return _BINOPS[e.op][0]
    if t is UnOp:
        return _UNARY
    if t is Literal and isinstance(e.value, int) and e.value < 0:
        return _UNARY
    return _PRIMARY


def _expr(e, ctx: int, ind: int) -> str:
    s = _expr_raw(e, ind)
    if _prec(e) < ctx:
        return f"({s})"
    return s


def _expr_raw(e, ind: int) -> str:
    t = type(e)
    pad = INDENT * ind
    if t is Literal:
        return _lit(e.value)
    if t is Var:
        return e.name
    if t is Tuple:
        return "{" + ", ".join(_expr(x, _MATCH, ind) for x in e.elems) + "}"
    if t is Nil:
        return "[]"
    if t is Cons:
        elems = []
        while type(e) is Cons:
            elems.append(_expr(e.head, _MATCH, ind))
            e = e.tail
        inner = ", ".join(elems)
        if type(e) is Nil:
            return f"[{inner}]"
        return f"[{inner} | {_expr(e, _MATCH, ind)}]"
    if t is Match:
        return f"{_pattern(e.pattern)} = {_expr(e.expr, _MATCH, ind)}"
    if t is BinOp:
        p, assoc = _BINOPS[e.op]
        lctx = p if assoc == "left" else p + 1
        rctx = p if assoc == "right" else p + 1
        return f"{_expr(e.left, lctx, ind)} {e.op} {_expr(e.right, rctx, ind)}"
    if t is UnOp:
        operand = e.operand
        if type(operand) is Literal and isinstance(operand.value, int) and operand.value >= 0:
            inner = f"({_lit(operand.value)})"
        else:
            inner = _expr(operand, _UNARY, ind)
        if e.op == "not":
            return f"not {inner}"
        return f"- {inner}" if inner.startswith("-") else f"-{inner}"
    if t is Call:
        return f"{e.name}(" + ", ".join(_expr(a, _MATCH, ind) for a in e.args) + ")"
    if t is Case:
        head = "case" if e.origin == CASE else f"case@{e.origin}"
        clauses = ";\n".join(_clause(c, ind + 1) for c in e.clauses)
        return f"{head} {_expr(e.scrutinee, _MATCH, ind)} of\n{clauses}\n{pad}end"
    if t is If:
        clauses = ";\n".join(_clause(c, ind + 1) for c in e.clauses)
        return f"if\n{clauses}\n{pad}end"
    if t is Lambda:
        clauses = ";\n".join(_fun_clause(c, ind + 1) for c in e.clauses)
        return f"fun\n{clauses}\n{pad}end"
    if t is Seq:
        body = ",\n".join(INDENT * (ind + 1) + _expr(x, _MATCH, ind + 1) for x in e.exprs)
        return f"begin\n{body}\n{pad}end"
    if t is ListComp:
        quals = ", ".join(_qualifier(q, ind) for q in e.qualifiers)
        return f"[{_expr(e.template, _MATCH, ind)} || {quals}]"
    if t is TraceEmit:
        return f"@trace({_expr(e.expr, _MATCH, ind)})"
    if t is GuardProbe:
        return f"@probe({_expr(e.guard, _MATCH + 1, ind)})"
    if t in (PWild, PVar, PLit, PTuple, PCons, PNil):
        return _pattern(e)
    raise TypeError(f"cannot print {t.__name__}")


def _qualifier(q, ind: int) -> str:
    if type(q) is Generator:
        return f"{_pattern(q.pattern)} <- {_expr(q.expr, _MATCH, ind)}"
    return _expr(q, _MATCH, ind)
