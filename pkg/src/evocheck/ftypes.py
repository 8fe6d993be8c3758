"""Type language shared by spec annotations, inference and generation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .values import Atom, Tup, Value, format_value


class FType:
    __slots__ = ()


@dataclass(frozen=True)
class AnyType(FType):
    pass


@dataclass(frozen=True)
class AnyInt(FType):
    pass


@dataclass(frozen=True)
class PosInt(FType):
    pass


@dataclass(frozen=True)
class IntRange(FType):
    lo: Optional[int]
    hi: Optional[int]


@dataclass(frozen=True)
class LiteralUnion(FType):
    """Finite set of integers."""

    values: frozenset


@dataclass(frozen=True)
class AnyAtom(FType):
    pass


@dataclass(frozen=True)
class AtomUnion(FType):
    names: frozenset


@dataclass(frozen=True)
class TupleOf(FType):
    elems: tuple


@dataclass(frozen=True)
class ListOf(FType):
    elem: FType


@dataclass(frozen=True)
class FixedList(FType):
    elems: tuple


@dataclass(frozen=True)
class Union(FType):
    members: tuple


@dataclass(frozen=True)
class Empty(FType):
    pass


ANY = AnyType()
EMPTY = Empty()
ANY_INT = AnyInt()
POS_INT = PosInt()
ANY_ATOM = AnyAtom()


def int_range(lo: Optional[int], hi: Optional[int]) -> FType:
    """Canonical integer interval (collapses to the named forms)."""
    if lo is not None and hi is not None and lo > hi:
        return EMPTY
    if lo is None and hi is None:
        return ANY_INT
    if lo == 1 and hi is None:
        return POS_INT
    return IntRange(lo, hi)


def literals(values) -> FType:
    values = frozenset(values)
    return LiteralUnion(values) if values else EMPTY


def atoms(names) -> FType:
    names = frozenset(names)
    return AtomUnion(names) if names else EMPTY


def _sort_key(t: FType) -> str:
    return format_type(t)


def make_union(types) -> FType:
    """Flatten, merge literal sets, drop empties, deduplicate."""
    flat: list[FType] = []
    ints: set = set()
    names: set = set()
    for t in types:
        stack = [t]
        while stack:
            u = stack.pop()
            if isinstance(u, Union):
                stack.extend(u.members)
            elif isinstance(u, Empty):
                continue
            elif isinstance(u, AnyType):
                return ANY
            elif isinstance(u, LiteralUnion):
                ints |= u.values
            elif isinstance(u, AtomUnion):
                names |= u.names
            elif u not in flat:
                flat.append(u)
    if ints:
        flat.append(LiteralUnion(frozenset(ints)))
    if names:
        flat.append(AtomUnion(frozenset(names)))
    if not flat:
        return EMPTY
    if len(flat) == 1:
        return flat[0]
    return Union(tuple(sorted(flat, key=_sort_key)))


def is_empty(t: FType) -> bool:
    return isinstance(t, Empty)


def format_type(t: FType) -> str:
    if isinstance(t, AnyType):
        return "any()"
    if isinstance(t, AnyInt):
        return "integer()"
    if isinstance(t, PosInt):
        return "pos_integer()"
    if isinstance(t, IntRange):
        lo = "" if t.lo is None else str(t.lo)
        hi = "" if t.hi is None else str(t.hi)
        return f"{lo}..{hi}"
    if isinstance(t, LiteralUnion):
        return " | ".join(str(v) for v in sorted(t.values))
    if isinstance(t, AnyAtom):
        return "atom()"
    if isinstance(t, AtomUnion):
        return " | ".join(sorted(t.names))
    if isinstance(t, TupleOf):
        return "{" + ", ".join(format_type(e) for e in t.elems) + "}"
    if isinstance(t, ListOf):
        return f"list({format_type(t.elem)})"
    if isinstance(t, FixedList):
        if not t.elems:
            return "[]"
        if all(e == t.elems[0] for e in t.elems):
            return f"list({format_type(t.elems[0])}, {len(t.elems)})"
        return "fixed_list(" + ", ".join(format_type(e) for e in t.elems) + ")"
    if isinstance(t, Union):
        return " | ".join(format_type(m) for m in t.members)
    if isinstance(t, Empty):
        return "none()"
    raise TypeError(t)


def contains(t: FType, v: Value) -> bool:
    """Membership test: does value ``v`` inhabit type ``t``?"""
    if isinstance(t, AnyType):
        return True
    if isinstance(t, Empty):
        return False
    vt = type(v)
    if isinstance(t, (AnyInt, PosInt, IntRange, LiteralUnion)):
        if vt is not int:
            return False
        if isinstance(t, AnyInt):
            return True
        if isinstance(t, PosInt):
            return v >= 1
        if isinstance(t, IntRange):
            return (t.lo is None or v >= t.lo) and (t.hi is None or v <= t.hi)
        return v in t.values
    if isinstance(t, AnyAtom):
        return vt is Atom
    if isinstance(t, AtomUnion):
        return vt is Atom and v.name in t.names
    if isinstance(t, TupleOf):
        return (vt is Tup and len(v.items) == len(t.elems)
                and all(contains(e, x) for e, x in zip(t.elems, v.items)))
    if isinstance(t, ListOf):
        return vt is tuple and all(contains(t.elem, x) for x in v)
    if isinstance(t, FixedList):
        return (vt is tuple and len(v) == len(t.elems)
                and all(contains(e, x) for e, x in zip(t.elems, v)))
    if isinstance(t, Union):
        return any(contains(m, v) for m in t.members)
    raise TypeError(t)


def literal_type(v: Value) -> FType:
    """Singleton type of an integer or atom literal."""
    if type(v) is int:
        return LiteralUnion(frozenset([v]))
    if type(v) is Atom:
        return AtomUnion(frozenset([v.name]))
    raise TypeError(f"no literal type for {format_value(v)}")
