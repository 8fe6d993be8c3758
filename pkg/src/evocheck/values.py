"""Runtime values of Feather programs.

Representation:

* integers are Python ``int`` wrapped to 64-bit signed arithmetic,
* atoms are interned :class:`Atom` instances,
* Feather tuples are :class:`Tup` (a thin wrapper so they never compare
  equal to lists),
* Feather lists are plain Python ``tuple`` objects,
* closures are :class:`Closure`.

All non-closure values are hashable and compare structurally.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union

INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1


def wrap_int(n: int) -> int:
    return ((n - INT_MIN) & 0xFFFFFFFFFFFFFFFF) + INT_MIN


class Atom:
    __slots__ = ("name",)
    _table: dict[str, "Atom"] = {}

    def __new__(cls, name: str) -> "Atom":
        atom = cls._table.get(name)
        if atom is None:
            atom = object.__new__(cls)
            object.__setattr__(atom, "name", name)
            cls._table[name] = atom
        return atom

    def __setattr__(self, key, value):
        raise AttributeError("atoms are immutable")

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"

    def __reduce__(self):
        return (Atom, (self.name,))


TRUE = Atom("true")
FALSE = Atom("false")


def boolean(flag: bool) -> Atom:
    return TRUE if flag else FALSE


@dataclass(frozen=True, slots=True)
class Tup:
    items: tuple

    def __len__(self) -> int:
        return len(self.items)


class Closure:
    """A lambda together with the environment captured at creation."""

    __slots__ = ("clauses", "env", "arity", "code")

    def __init__(self, clauses, env: dict, arity: int, code=None):
        self.clauses = clauses
        self.env = env
        self.arity = arity
        self.code = code  # compiled clauses, when built by the compiling engine

    def __repr__(self) -> str:
        return f"<closure/{self.arity}>"


Value = Union[int, Atom, Tup, tuple, Closure]


def is_list(v: Any) -> bool:
    return type(v) is tuple


def contains_closure(v: Value) -> bool:
    if isinstance(v, Closure):
        return True
    if isinstance(v, Tup):
        return any(contains_closure(x) for x in v.items)
    if type(v) is tuple:
        return any(contains_closure(x) for x in v)
    return False


# Term order: integer < atom < closure < tuple < list.
_RANK = {int: 0, Atom: 1, Closure: 2, Tup: 3, tuple: 4}


def compare_terms(a: Value, b: Value) -> int:
    ta, tb = type(a), type(b)
    if ta is bool or tb is bool:
        raise TypeError("python bools are not Feather values")
    ra, rb = _RANK[ta], _RANK[tb]
    if ra != rb:
        return -1 if ra < rb else 1
    if ta is int:
        return (a > b) - (a < b)
    if ta is Atom:
        return (a.name > b.name) - (a.name < b.name)
    if ta is Closure:
        return (id(a) > id(b)) - (id(a) < id(b))
    if ta is Tup:
        if len(a.items) != len(b.items):
            return -1 if len(a.items) < len(b.items) else 1
        return _compare_seq(a.items, b.items)
    return _compare_seq(a, b)


def _compare_seq(xs, ys) -> int:
    for x, y in zip(xs, ys):
        c = compare_terms(x, y)
        if c:
            return c
    return (len(xs) > len(ys)) - (len(xs) < len(ys))


class TermKey:
    """Sort key wrapper implementing the term order."""

    __slots__ = ("value",)

    def __init__(self, value: Value):
        self.value = value

    def __lt__(self, other: "TermKey") -> bool:
        return compare_terms(self.value, other.value) < 0


def format_value(v: Value) -> str:
    """Serialize a value as Feather literal text (bit-exact, no spaces)."""
    t = type(v)
    if t is int:
        return str(v)
    if t is Atom:
        return v.name
    if t is Tup:
        return "{" + ",".join(format_value(x) for x in v.items) + "}"
    if t is tuple:
        return "[" + ",".join(format_value(x) for x in v) + "]"
    if t is Closure:
        return f"#Fun<{v.arity}>"
    raise TypeError(f"not a Feather value: {v!r}")


def format_trace(trace) -> str:
    return "[" + ",".join(format_value(x) for x in trace) + "]"


def format_call(name: str, args) -> str:
    return f"{name}(" + ",".join(format_value(a) for a in args) + ")"


def value_depth(v: Value) -> int:
    if isinstance(v, Tup):
        return 1 + max((value_depth(x) for x in v.items), default=0)
    if type(v) is tuple:
        return 1 + max((value_depth(x) for x in v), default=0)
    return 1
