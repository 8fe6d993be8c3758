"""Random values from types, per-clause argument construction and
mutation of test inputs.

Integers are drawn with a magnitude bias toward small values: a bit width
``k`` in ``0..min(size, 16)`` is chosen with ``P(k) = 2**-(k+1)`` (the
leftover mass goes to the largest width), then the value is uniform within
``2**k``.  Every draw stays within ``bound(size) = 2**min(size, 16)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from .ftypes import (
    AnyAtom, AnyInt, AnyType, AtomUnion, Empty, FixedList, FType, IntRange,
    ListOf, LiteralUnion, PosInt, TupleOf, Union, contains, format_type,
)
from .interp import FeatherError, Interpreter, StepLimit
from .syntax import (
    BinOp, Clause, FunctionDef, Literal, Module, PCons, PLit, PNil, PTuple,
    PVar, Var, walk,
)
from .typeinfer import ClauseType, EmptyType
from .values import Atom, Tup, format_call

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
DEFAULT_SIZE = 10
MAX_BITS = 16
ATOM_POOL = tuple(Atom(n) for n in ("a", "b", "c", "true", "false"))


def bound(size: int) -> int:
    return 1 << min(size, MAX_BITS)


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


class Rng:
    """SplitMix64 generator.  ``Rng(seed, stream)`` gives independent,
    platform-stable streams for one seed."""

    def __init__(self, seed: int = 0, stream: int = 0):
        self.seed = seed & MASK64
        self.stream = stream
        self.state = (self.seed ^ _mix((stream * GOLDEN + 1) & MASK64)) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return _mix(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` (rejection sampling, no bias)."""
        if n <= 0:
            raise ValueError("empty range")
        bits = n.bit_length()
        while True:
            r = 0
            for _ in range((bits + 63) // 64):
                r = (r << 64) | self.next_u64()
            r >>= (-bits) % 64
            if r < n:
                return r

    def randint(self, lo: int, hi: int) -> int:
        return lo + self.below(hi - lo + 1)

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def fork(self, stream: int) -> "Rng":
        return Rng(self.next_u64(), stream)


@dataclass(frozen=True)
class Itc:
    """A concrete call: function name plus argument values."""

    function: str
    args: tuple

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        return format_call(self.function, self.args)


# -------------------------------------------------------------- generation

def _bits(size: int, rng: Rng) -> int:
    top = min(size, MAX_BITS)
    k = 0
    while k < top and rng.below(2) == 0:
        k += 1
    return k


def _gen_int(t: FType, size: int, rng: Rng) -> int:
    k = _bits(size, rng)
    span = 1 << k
    if isinstance(t, PosInt):
        return rng.randint(1, span)
    if isinstance(t, AnyInt):
        return rng.randint(-span, span)
    lo, hi = t.lo, t.hi
    if lo is not None and hi is not None:
        if hi - lo < bound(size):
            return rng.randint(lo, hi)
        return lo + rng.below(span) if rng.below(2) else hi - rng.below(span)
    if lo is not None:
        return lo + rng.below(span)
    return hi - rng.below(span)


def _inhabited(t: FType) -> bool:
    if isinstance(t, Empty):
        return False
    if isinstance(t, (TupleOf, FixedList)):
        return all(_inhabited(e) for e in t.elems)
    if isinstance(t, Union):
        return any(_inhabited(m) for m in t.members)
    return True


def generate_value(t: FType, size: int, rng: Rng):
    """A random value inhabiting ``t``."""
    if isinstance(t, (AnyInt, PosInt, IntRange)):
        return _gen_int(t, size, rng)
    if isinstance(t, LiteralUnion):
        return rng.choice(sorted(t.values))
    if isinstance(t, AtomUnion):
        return Atom(rng.choice(sorted(t.names)))
    if isinstance(t, AnyAtom):
        return rng.choice(ATOM_POOL)
    if isinstance(t, TupleOf):
        return Tup(tuple(generate_value(e, size, rng) for e in t.elems))
    if isinstance(t, FixedList):
        return tuple(generate_value(e, size, rng) for e in t.elems)
    if isinstance(t, ListOf):
        if isinstance(t.elem, Empty):
            return ()
        n = rng.randint(0, max(size, 0))
        return tuple(generate_value(t.elem, size, rng) for _ in range(n))
    if isinstance(t, Union):
        live = [m for m in t.members if _inhabited(m)]
        if not live:
            raise EmptyType("?", 0, format_type(t))
        return generate_value(rng.choice(live), size, rng)
    if isinstance(t, AnyType):
        return _gen_any(size, rng)
    raise EmptyType("?", 0, format_type(t))


def _gen_any(size: int, rng: Rng):
    kinds = 4 if size > 1 else 2
    kind = rng.below(kinds)
    if kind == 0:
        return _gen_int(AnyInt(), size, rng)
    if kind == 1:
        return rng.choice(ATOM_POOL)
    half = size // 2
    if kind == 2:
        return Tup(tuple(_gen_any(half, rng) for _ in range(rng.randint(0, 3))))
    return tuple(_gen_any(half, rng) for _ in range(rng.randint(0, half)))


def _gen_pattern(p, ct: ClauseType, size: int, rng: Rng, env: dict):
    kind = type(p)
    if kind is PVar:
        if p.name not in env:
            env[p.name] = generate_value(ct.var_types[p.name], size, rng)
        return env[p.name]
    if kind is PLit:
        return p.value
    if kind is PTuple:
        return Tup(tuple(_gen_pattern(e, ct, size, rng, env) for e in p.elems))
    if kind is PNil:
        return ()
    if kind is PCons:
        head = _gen_pattern(p.head, ct, size, rng, env)
        tail = _gen_pattern(p.tail, ct, size, rng, env)
        return (head,) + tail
    raise TypeError(f"unexpected pattern {p!r}")


def generate_args(ct: ClauseType, size: int, rng: Rng, env: Optional[dict] = None) -> tuple:
    """Arguments shaped by the clause patterns.  ``env`` maps variables to
    values already fixed; a repeated variable reuses its first value."""
    env = {} if env is None else env
    return tuple(_gen_pattern(p, ct, size, rng, env) for p in ct.patterns)


# ------------------------------------------------------ initial test inputs

def _conjuncts(g):
    if type(g) is BinOp and g.op == "andalso":
        yield from _conjuncts(g.left)
        yield from _conjuncts(g.right)
    else:
        yield g


def _mentions(e, name: str) -> bool:
    return any(type(n) is Var and n.name == name for _, n in walk(e))


def _solve_equalities(guard, ct: ClauseType, env: dict, interp: Interpreter) -> bool:
    """Assign ``V`` from ``V =:= E`` conjuncts whose ``E`` is computable."""
    changed = False
    for g in _conjuncts(guard):
        if type(g) is not BinOp or g.op not in ("==", "=:="):
            continue
        for lhs, rhs in ((g.left, g.right), (g.right, g.left)):
            if type(lhs) is Var and lhs.name in ct.var_types and not _mentions(rhs, lhs.name):
                try:
                    v = interp.eval(rhs, dict(env))
                except (FeatherError, StepLimit):
                    continue
                if contains(ct.var_types[lhs.name], v) and env.get(lhs.name) != v:
                    env[lhs.name] = v
                    changed = True
                break
    return changed


def _boundaries(fun: FunctionDef):
    """(variable, k) for every ``V op k`` integer comparison in any guard of
    the function, nested ``if``/``case`` guards included."""
    out = []
    for _, node in walk(fun):
        if type(node) is not Clause or node.guard is None:
            continue
        for g in _conjuncts(node.guard):
            if type(g) is not BinOp or g.op not in ("<", ">", "=<", ">=", "==", "=:=", "/=", "=/="):
                continue
            for a, b in ((g.left, g.right), (g.right, g.left)):
                if type(a) is Var and type(b) is Literal and type(b.value) is int:
                    if (a.name, b.value) not in out:
                        out.append((a.name, b.value))
    return out


def _dispatch(interp: Interpreter, fun: FunctionDef, args) -> Optional[int]:
    interp.steps = 0
    try:
        return interp.clause_index(fun, args)
    except StepLimit:
        return None


def _satisfies(interp: Interpreter, clause: Clause, args) -> bool:
    interp.steps = 0
    try:
        interp.select((clause,), list(args), {}, "function_clause")
        return True
    except (FeatherError, StepLimit):
        return False


def initial_itcs(module: Module, name: str, arity: int, clause_types, budget: int,
                 rng: Rng, size: int = DEFAULT_SIZE, attempts: int = 200) -> list:
    """Seed inputs: one constructed input per reachable clause, guard
    boundary probes, then random fill round-robin across clauses."""
    fun = module.function(name, arity)
    interp = Interpreter(module, max_steps=10_000)
    live = []
    for ct in clause_types:
        if isinstance(ct, EmptyType):
            log.warning("skipping %s", ct)
        else:
            live.append(ct)
    out: list = []
    seen: set = set()

    def add(args) -> bool:
        itc = Itc(name, tuple(args))
        if itc in seen:
            return False
        seen.add(itc)
        out.append(itc)
        return True

    # one input per clause, dispatching into it when we can find one
    bases = {}
    for ct in live:
        clause = fun.clauses[ct.clause_index - 1]
        fallback = None
        for _ in range(attempts):
            env: dict = {}
            args = generate_args(ct, size, rng, env)
            if clause.guard is not None and _solve_equalities(clause.guard, ct, env, interp):
                args = generate_args(ct, size, rng, env)
            if _dispatch(interp, fun, args) == ct.clause_index:
                bases[ct.clause_index] = env
                add(args)
                break
            if fallback is None and _satisfies(interp, clause, args):
                fallback = (args, env)
        else:
            if fallback is not None:
                bases[ct.clause_index] = fallback[1]
                add(fallback[0])
            else:
                log.warning("no input found for %s/%d clause %d", name, arity, ct.clause_index)

    # boundary probes k-1, k, k+1 for integer guard comparisons
    limit = max(budget, len(out))
    for var, k in _boundaries(fun):
        for ct in live:
            if var not in ct.var_types:
                continue
            for probe in (k - 1, k, k + 1):
                if len(out) >= limit:
                    break
                if not contains(ct.var_types[var], probe):
                    continue
                env = dict(bases.get(ct.clause_index, {}))
                env[var] = probe
                add(generate_args(ct, size, rng, env))

    # random fill
    if live:
        i = 0
        stale = 0
        while len(out) < limit and stale < 50 * limit:
            ct = live[i % len(live)]
            i += 1
            if add(generate_args(ct, size, rng)):
                stale = 0
            else:
                stale += 1
    return out


def mut(itc: Itc, clause_types, rng: Rng, size: int = DEFAULT_SIZE) -> list:
    """``arity`` inputs; the i-th has argument i replaced by a fresh value
    drawn from a random inhabited clause type."""
    live = [ct for ct in clause_types if not isinstance(ct, EmptyType)]
    out = []
    for i in range(itc.arity):
        if not live:
            break
        ct = rng.choice(live)
        fresh = generate_args(ct, size, rng)[i]
        out.append(Itc(itc.function, itc.args[:i] + (fresh,) + itc.args[i + 1:]))
    return out
