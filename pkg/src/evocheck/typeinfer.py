"""Per-clause argument types.

Each clause starts from its function's spec (or ``any()`` per argument)
and is narrowed by its pattern shapes, by repeated variables (the types at
all positions of a variable are intersected) and by simple guard
comparisons against literals.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from . import ftypes as ft
from .ftypes import (
    ANY, ANY_INT, EMPTY, AnyAtom, AnyInt, AnyType, AtomUnion, Empty, FixedList,
    FType, IntRange, ListOf, LiteralUnion, PosInt, TupleOf, Union, format_type,
    int_range, literal_type, make_union,
)
from .syntax import (
    BinOp, Call, Clause, FunctionDef, Literal, Module, PCons, PLit, PNil,
    PTuple, PVar, PWild, Var, children, rebuild,
)
from .values import Atom

WILD_PREFIX = "_@"


class EmptyType(Exception):
    def __init__(self, function: str, clause: int, detail: str = ""):
        super().__init__(f"{function} clause {clause} is uninhabited{': ' + detail if detail else ''}")
        self.function, self.clause, self.detail = function, clause, detail


@dataclass(frozen=True)
class ClauseType:
    function: str  # "name/arity"
    clause_index: int
    arg_types: tuple
    var_types: dict = field(hash=False)
    # Clause patterns with wildcards renamed to internal variables, so that
    # generation can walk the exact pattern shape.
    patterns: tuple = field(default=(), hash=False, repr=False)

    @property
    def user_vars(self) -> dict:
        return {k: v for k, v in self.var_types.items() if not k.startswith(WILD_PREFIX)}


# ------------------------------------------------------------ intersection

def _int_bounds(t: FType):
    if isinstance(t, AnyInt):
        return None, None
    if isinstance(t, PosInt):
        return 1, None
    return t.lo, t.hi


def _in_bounds(v: int, lo, hi) -> bool:
    return (lo is None or v >= lo) and (hi is None or v <= hi)


_INTS = (AnyInt, PosInt, IntRange)


def intersect(a: FType, b: FType) -> FType:
    """Set intersection; exact on every fragment of the type language
    (an empty result is the ``Empty`` value)."""
    if isinstance(a, Empty) or isinstance(b, Empty):
        return EMPTY
    if isinstance(a, AnyType):
        return b
    if isinstance(b, AnyType):
        return a
    if isinstance(a, Union):
        return make_union(intersect(m, b) for m in a.members)
    if isinstance(b, Union):
        return make_union(intersect(a, m) for m in b.members)
    if isinstance(a, _INTS) and isinstance(b, _INTS):
        (lo1, hi1), (lo2, hi2) = _int_bounds(a), _int_bounds(b)
        lo = lo2 if lo1 is None else lo1 if lo2 is None else max(lo1, lo2)
        hi = hi2 if hi1 is None else hi1 if hi2 is None else min(hi1, hi2)
        return int_range(lo, hi)
    if isinstance(a, LiteralUnion) and isinstance(b, _INTS):
        a, b = b, a
    if isinstance(a, _INTS) and isinstance(b, LiteralUnion):
        lo, hi = _int_bounds(a)
        return ft.literals(v for v in b.values if _in_bounds(v, lo, hi))
    if isinstance(a, LiteralUnion) and isinstance(b, LiteralUnion):
        return ft.literals(a.values & b.values)
    if isinstance(a, AnyAtom) and isinstance(b, (AnyAtom, AtomUnion)):
        return b
    if isinstance(b, AnyAtom) and isinstance(a, AtomUnion):
        return a
    if isinstance(a, AtomUnion) and isinstance(b, AtomUnion):
        return ft.atoms(a.names & b.names)
    if isinstance(a, TupleOf) and isinstance(b, TupleOf):
        if len(a.elems) != len(b.elems):
            return EMPTY
        return _tuple_of(intersect(x, y) for x, y in zip(a.elems, b.elems))
    if isinstance(a, ListOf) and isinstance(b, ListOf):
        # ListOf(Empty) still holds the empty list
        return ListOf(intersect(a.elem, b.elem))
    if isinstance(a, FixedList) and isinstance(b, ListOf):
        a, b = b, a
    if isinstance(a, ListOf) and isinstance(b, FixedList):
        return _fixed_list(intersect(a.elem, e) for e in b.elems)
    if isinstance(a, FixedList) and isinstance(b, FixedList):
        if len(a.elems) != len(b.elems):
            return EMPTY
        return _fixed_list(intersect(x, y) for x, y in zip(a.elems, b.elems))
    return EMPTY


def _tuple_of(elems) -> FType:
    elems = tuple(elems)
    return EMPTY if any(isinstance(e, Empty) for e in elems) else TupleOf(elems)


def _fixed_list(elems) -> FType:
    elems = tuple(elems)
    return EMPTY if any(isinstance(e, Empty) for e in elems) else FixedList(elems)


def _members(t: FType):
    return t.members if isinstance(t, Union) else (t,)


# ------------------------------------------------------- pattern walking

def _tuple_parts(t: FType, n: int):
    """Element types of the arity-``n`` tuples in ``t`` (None if none)."""
    cols = [[] for _ in range(n)]
    found = False
    for m in _members(t):
        if isinstance(m, AnyType):
            return [ANY] * n
        if isinstance(m, TupleOf) and len(m.elems) == n:
            found = True
            for col, e in zip(cols, m.elems):
                col.append(e)
    return [make_union(c) for c in cols] if found else None


def _cons_parts(t: FType):
    """(head type, tail type) of the non-empty lists in ``t``."""
    heads, tails = [], []
    for m in _members(t):
        if isinstance(m, AnyType):
            return ANY, ListOf(ANY)
        if isinstance(m, ListOf):
            heads.append(m.elem)
            tails.append(m)
        elif isinstance(m, FixedList) and m.elems:
            heads.append(m.elems[0])
            tails.append(FixedList(m.elems[1:]))
    if not heads:
        return None
    return make_union(heads), make_union(tails)


def _admits_nil(t: FType) -> bool:
    return any(isinstance(m, (AnyType, ListOf)) or (isinstance(m, FixedList) and not m.elems)
               for m in _members(t))


class _Walker:
    def __init__(self):
        self.var_types: dict = {}
        self.empty: Optional[str] = None

    def fail(self, why: str):
        if self.empty is None:
            self.empty = why

    def visit(self, p, t: FType) -> None:
        kind = type(p)
        if kind is PVar:
            if p.name in self.var_types:
                t = intersect(self.var_types[p.name], t)
            self.var_types[p.name] = t
            if isinstance(t, Empty):
                self.fail(f"variable {p.name}")
        elif kind is PLit:
            if isinstance(intersect(t, literal_type(p.value)), Empty):
                self.fail(f"literal {p.value}")
        elif kind is PTuple:
            parts = _tuple_parts(t, len(p.elems))
            if parts is None:
                self.fail(f"{len(p.elems)}-tuple pattern")
                parts = [EMPTY] * len(p.elems)
            for sub, st in zip(p.elems, parts):
                self.visit(sub, st)
        elif kind is PCons:
            parts = _cons_parts(t)
            if parts is None:
                self.fail("non-empty list pattern")
                parts = (EMPTY, EMPTY)
            self.visit(p.head, parts[0])
            self.visit(p.tail, parts[1])
        elif kind is PNil:
            if not _admits_nil(t):
                self.fail("empty list pattern")
        else:
            raise TypeError(f"unexpected pattern {p!r}")


def _name_wildcards(patterns) -> tuple:
    counter = itertools.count(1)

    def go(p):
        if type(p) is PWild:
            return PVar(f"{WILD_PREFIX}{next(counter)}")
        kids = children(p)
        return rebuild(p, [go(k) for k in kids]) if kids else p
    return tuple(go(p) for p in patterns)


def refine_repeated_vars(clause: Clause, arg_types) -> dict:
    """Variable types after walking the parameters left to right; each
    repeat of a variable intersects its accumulated type with the type at
    the new position."""
    w = _Walker()
    for p, t in zip(clause.patterns, arg_types):
        w.visit(p, t)
    if w.empty is not None:
        raise EmptyType("?", 0, w.empty)
    return w.var_types


# ------------------------------------------------------------------ guards

_FLIP = {"<": ">", ">": "<", "=<": ">=", ">=": "=<", "==": "==", "=:=": "=:=",
         "/=": "/=", "=/=": "=/="}


def _conjuncts(g):
    if type(g) is BinOp and g.op == "andalso":
        yield from _conjuncts(g.left)
        yield from _conjuncts(g.right)
    else:
        yield g


def _int_only(t: FType) -> bool:
    return not isinstance(t, Empty) and intersect(t, ANY_INT) == t


def _guard_fact(g, var_types: dict):
    """A (variable, type) restriction implied by conjunct ``g``, or None."""
    if type(g) is not BinOp or g.op not in _FLIP:
        return None
    op, left, right = g.op, g.left, g.right
    if type(left) is Literal and type(right) in (Var, Call):
        op, left, right = _FLIP[op], right, left
    if type(right) is not Literal:
        return None
    k = right.value
    if type(left) is Call and left.name == "length" and len(left.args) == 1:
        arg = left.args[0]
        if type(arg) is Var and arg.name in var_types and op in ("==", "=:=") and type(k) is int:
            if k < 0:
                return arg.name, EMPTY
            return arg.name, FixedList((ANY,) * k)
        return None
    if type(left) is not Var or left.name not in var_types:
        return None
    name, cur = left.name, var_types[left.name]
    if op in ("==", "=:="):
        return name, literal_type(k) if type(k) in (int, Atom) else None
    if op in ("/=", "=/="):
        if isinstance(cur, LiteralUnion) and type(k) is int:
            return name, ft.literals(cur.values - {k})
        if isinstance(cur, AtomUnion) and type(k) is Atom:
            return name, ft.atoms(cur.names - {k.name})
        return None
    if type(k) is not int:
        return None
    # Integers sort before every other term, so V < k / V =< k force an
    # integer; V > k / V >= k only say something for integer-only V.
    if op == "<":
        return name, int_range(None, k - 1)
    if op == "=<":
        return name, int_range(None, k)
    if not _int_only(cur):
        return None
    return name, int_range(k + 1, None) if op == ">" else int_range(k, None)


def apply_guard(guard, var_types: dict) -> dict:
    out = dict(var_types)
    if guard is None:
        return out
    for g in _conjuncts(guard):
        fact = _guard_fact(g, out)
        if fact is not None and fact[1] is not None:
            name, t = fact
            out[name] = intersect(out[name], t)
    return out


# ----------------------------------------------------------------- rebuild

def _pattern_type(p, var_types: dict) -> FType:
    kind = type(p)
    if kind is PVar:
        return var_types[p.name]
    if kind is PLit:
        return literal_type(p.value)
    if kind is PTuple:
        return _tuple_of(_pattern_type(e, var_types) for e in p.elems)
    if kind is PNil:
        return FixedList(())
    if kind is PCons:
        heads = []
        while type(p) is PCons:
            heads.append(_pattern_type(p.head, var_types))
            p = p.tail
        tail = _pattern_type(p, var_types)
        if isinstance(tail, FixedList):
            return _fixed_list(heads + list(tail.elems))
        # Open spine: summarized as a plain list type; generation walks the
        # pattern itself and keeps the exact prefix.
        elems = [m.elem for m in _members(tail) if isinstance(m, ListOf)]
        if isinstance(tail, AnyType):
            return ListOf(ANY)
        return ListOf(make_union(heads + elems))
    raise TypeError(f"unexpected pattern {p!r}")


def clause_type(fun: FunctionDef, index: int, spec_args=None) -> ClauseType:
    """Type of clause ``index`` (1-based); raises :class:`EmptyType`."""
    label = f"{fun.name}/{fun.arity}"
    clause = fun.clauses[index - 1]
    patterns = _name_wildcards(clause.patterns)
    arg_types = tuple(spec_args) if spec_args is not None else (ANY,) * fun.arity
    w = _Walker()
    for p, t in zip(patterns, arg_types):
        w.visit(p, t)
    if w.empty is not None:
        raise EmptyType(label, index, w.empty)
    var_types = apply_guard(clause.guard, w.var_types)
    for name, t in var_types.items():
        if isinstance(t, Empty):
            raise EmptyType(label, index, f"guard on {name}")
    args = tuple(_pattern_type(p, var_types) for p in patterns)
    return ClauseType(label, index, args, var_types, patterns)


def infer_clause_types(module: Module, name: str, arity: int, strict: bool = True):
    """One :class:`ClauseType` per clause of ``name/arity``.

    With ``strict`` an uninhabited clause raises :class:`EmptyType`;
    otherwise it is returned as the exception object in its slot.
    """
    fun = module.function(name, arity)
    if fun is None:
        raise KeyError(f"{name}/{arity} is not defined")
    spec = module.spec(name, arity)
    spec_args = spec.args if spec is not None else None
    out = []
    for i in range(1, len(fun.clauses) + 1):
        try:
            out.append(clause_type(fun, i, spec_args))
        except EmptyType as err:
            if strict:
                raise
            out.append(err)
    return out


def format_clause_types(cts) -> str:
    """Text dump used by ``--dump-types``."""
    lines = []
    for ct in cts:
        if isinstance(ct, EmptyType):
            lines.append(f"{ct.function} clause {ct.clause}: none()  % {ct.detail}")
            continue
        args = ", ".join(format_type(t) for t in ct.arg_types)
        lines.append(f"{ct.function} clause {ct.clause_index}: ({args})")
        for var, t in ct.user_vars.items():
            lines.append(f"    {var} :: {format_type(t)}")
    return "\n".join(lines)
