"""Tree-walking evaluator for Feather.

Evaluation is strict, left to right.  Tail positions (last expression of a
body, the chosen clause of ``case``/``if``, the right operand of
``andalso``/``orelse``) are evaluated in a loop so self-recursive loops do
not grow the Python stack.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Optional

from .syntax import (
    CASE, LAMBDA, BinOp, Call, Case, Cons, FunctionDef, Generator,
    GuardProbe, If, Lambda, ListComp, Literal, Match, Module, Nil, PCons,
    PLit, PNil, PTuple, PVar, PWild, Seq, TraceEmit, Tuple, UnOp, Var,
)
from .values import (
    FALSE, TRUE, Closure, TermKey, Tup, Value, boolean, compare_terms,
    contains_closure, format_value, wrap_int,
)

DEFAULT_MAX_STEPS = 10 ** 6
RECURSION_LIMIT = 8000

ERROR_KINDS = (
    "badmatch", "case_clause", "function_clause", "if_clause", "badarith",
    "undef", "badarg", "badarity", "unbound", "step_limit", "stack_limit",
)


class FeatherError(Exception):
    """A Feather runtime error.  Guards coerce these to ``false``."""

    def __init__(self, kind: str, detail: str = ""):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind
        self.detail = detail


class StepLimit(Exception):
    pass


class ClosureInTrace(Exception):
    """A closure reached the trace sink; traces must be comparable."""


class TraceSink:
    """Append-only collector of values emitted by ``@trace``."""

    __slots__ = ("values",)

    def __init__(self):
        self.values: list = []

    def emit(self, v: Value) -> None:
        if contains_closure(v):
            raise ClosureInTrace(f"closure value traced: {format_value(v)}")
        self.values.append(v)

    def trace(self) -> tuple:
        return tuple(self.values)


@dataclass(frozen=True)
class Outcome:
    value: Optional[Value]
    error: Optional[str]
    trace: tuple
    steps: int = 0

    @property
    def ok(self) -> bool:
        return self.error is None

    def summary(self) -> str:
        if self.error is None:
            return f"value {format_value(self.value)}"
        return f"error {self.error}"

    def same_result(self, other: "Outcome") -> bool:
        return self.summary() == other.summary()


_EMPTY: dict = {}


class Interpreter:
    def __init__(self, module: Module, sink: Optional[TraceSink] = None,
                 max_steps: int = DEFAULT_MAX_STEPS, observe=None):
        self.module = module
        self.functions = {(f.name, f.arity): f for f in module.functions}
        self.sink = sink if sink is not None else TraceSink()
        self.max_steps = max_steps
        self.steps = 0
        # Reference mode: record the value of this exact node (by identity)
        # every time it is evaluated or reached during matching.
        self.observe = observe

    # ----------------------------------------------------------- matching
    def bind(self, p, v, env: dict, new: dict) -> bool:
        """Match ``p`` against ``v`` left to right, depth first, adding
        fresh bindings to ``new``.  Names bound in ``env`` or earlier in
        ``new`` act as equality constraints."""
        t = type(p)
        if t is PVar:
            if p is self.observe:
                self.sink.emit(v)
            name = p.name
            if name in new:
                return new[name] == v
            if name in env:
                return env[name] == v
            new[name] = v
            return True
        if t is PWild:
            return True
        if t is PLit:
            return type(v) is type(p.value) and v == p.value
        if t is PTuple:
            if type(v) is not Tup or len(v.items) != len(p.elems):
                return False
            for sp, sv in zip(p.elems, v.items):
                if not self.bind(sp, sv, env, new):
                    return False
            return True
        if t is PCons:
            if type(v) is not tuple or not v:
                return False
            return self.bind(p.head, v[0], env, new) and self.bind(p.tail, v[1:], env, new)
        if t is PNil:
            return type(v) is tuple and not v
        raise TypeError(f"not a pattern: {p!r}")

    def match(self, p, v, env: dict) -> Optional[dict]:
        new: dict = {}
        if not self.bind(p, v, env, new):
            return None
        out = dict(env)
        out.update(new)
        return out

    # -------------------------------------------------------------- guards
    def guard(self, g, env: dict) -> bool:
        try:
            return self.eval(g, env) is TRUE
        except FeatherError:
            return False

    # ---------------------------------------------------------------- calls
    def call(self, name: str, args) -> Value:
        args = list(args)
        f = self.functions.get((name, len(args)))
        if f is None:
            return self.builtin(name, args)
        clause, env = self.select(f.clauses, args, _EMPTY, "function_clause")
        return self.eval_body(clause.body, env)

    def select(self, clauses, args, outer: dict, fail_kind: str):
        for clause in clauses:
            new: dict = {}
            ok = True
            for p, a in zip(clause.patterns, args):
                if not self.bind(p, a, _EMPTY, new):
                    ok = False
                    break
            if not ok:
                continue
            env = dict(outer)
            env.update(new)
            if clause.guard is None or self.guard(clause.guard, env):
                return clause, env
        raise FeatherError(fail_kind)

    def clause_index(self, f: FunctionDef, args) -> Optional[int]:
        """1-based index of the clause ``args`` dispatch to, or None."""
        try:
            clause, _ = self.select(f.clauses, list(args), _EMPTY, "function_clause")
        except FeatherError:
            return None
        return f.clauses.index(clause) + 1

    def apply(self, fun: Value, args) -> Value:
        if type(fun) is not Closure:
            raise FeatherError("badarg", "not a function")
        if fun.arity != len(args):
            raise FeatherError("badarity")
        clause, env = self.select(fun.clauses, args, fun.env, "function_clause")
        return self.eval_body(clause.body, env)

    def eval_body(self, body, env: dict) -> Value:
        for e in body[:-1]:
            self.eval(e, env)
        return self.eval(body[-1], env)

    # ----------------------------------------------------------- evaluation
    def eval(self, e, env: dict) -> Value:
        while True:
            self.steps += 1
            if self.steps > self.max_steps:
                raise StepLimit()
            t = type(e)
            if t is Var:
                try:
                    v = env[e.name]
                except KeyError:
                    raise FeatherError("unbound", e.name) from None
                if e is self.observe:
                    self.sink.emit(v)
                return v
            if t is Literal:
                return e.value
            if t is Call:
                args = [self.eval(a, env) for a in e.args]
                f = self.functions.get((e.name, len(args)))
                if f is None:
                    return self.builtin(e.name, args)
                clause, env = self.select(f.clauses, args, _EMPTY, "function_clause")
                body = clause.body
                for x in body[:-1]:
                    self.eval(x, env)
                e = body[-1]
                continue
            if t is BinOp:
                op = e.op
                if op == "andalso" or op == "orelse":
                    left = self.eval(e.left, env)
                    if left is not TRUE and left is not FALSE:
                        raise FeatherError("badarg", op)
                    if (left is FALSE) if op == "andalso" else (left is TRUE):
                        return left
                    e = e.right
                    continue
                return self.binop(op, self.eval(e.left, env), self.eval(e.right, env))
            if t is Match:
                v = self.eval(e.expr, env)
                new: dict = {}
                if not self.bind(e.pattern, v, env, new):
                    raise FeatherError("badmatch", format_value(v))
                env.update(new)
                return v
            if t is Tuple:
                return Tup(tuple([self.eval(x, env) for x in e.elems]))
            if t is Cons:
                head = self.eval(e.head, env)
                tail = self.eval(e.tail, env)
                if type(tail) is not tuple:
                    raise FeatherError("badarg", "improper list")
                return (head,) + tail
            if t is Nil:
                return ()
            if t is Case:
                v = self.eval(e.scrutinee, env)
                scope = _EMPTY if e.origin == LAMBDA else env
                for clause in e.clauses:
                    new = {}
                    if not self.bind(clause.patterns[0], v, scope, new):
                        continue
                    inner = dict(env)
                    inner.update(new)
                    if clause.guard is None or self.guard(clause.guard, inner):
                        body = clause.body
                        for x in body[:-1]:
                            self.eval(x, inner)
                        e, env = body[-1], inner
                        break
                else:
                    raise FeatherError("case_clause" if e.origin == CASE else "function_clause",
                                       format_value(v))
                continue
            if t is If:
                for clause in e.clauses:
                    if self.guard(clause.guard, env):
                        inner = dict(env)
                        body = clause.body
                        for x in body[:-1]:
                            self.eval(x, inner)
                        e, env = body[-1], inner
                        break
                else:
                    raise FeatherError("if_clause")
                continue
            if t is Seq:
                body = e.exprs
                for x in body[:-1]:
                    self.eval(x, env)
                e = body[-1]
                continue
            if t is UnOp:
                v = self.eval(e.operand, env)
                if e.op == "-":
                    if type(v) is not int:
                        raise FeatherError("badarith", "-")
                    return wrap_int(-v)
                if v is TRUE:
                    return FALSE
                if v is FALSE:
                    return TRUE
                raise FeatherError("badarg", "not")
            if t is Lambda:
                return Closure(e.clauses, dict(env), len(e.clauses[0].patterns))
            if t is ListComp:
                out: list = []
                self.comprehend(e, 0, env, out)
                return tuple(out)
            if t is TraceEmit:
                v = self.eval(e.expr, env)
                self.sink.emit(v)
                return v
            if t is GuardProbe:
                self.guard(e.guard, env)
                return TRUE
            raise TypeError(f"cannot evaluate {t.__name__}")

    def comprehend(self, lc: ListComp, i: int, env: dict, out: list) -> None:
        if i == len(lc.qualifiers):
            out.append(self.eval(lc.template, dict(env)))
            return
        q = lc.qualifiers[i]
        if type(q) is Generator:
            src = self.eval(q.expr, dict(env))
            if type(src) is not tuple:
                raise FeatherError("badarg", "generator over non-list")
            for v in src:
                new: dict = {}
                # generator patterns bind fresh names; non-matching elements are skipped
                if self.bind(q.pattern, v, _EMPTY, new):
                    inner = dict(env)
                    inner.update(new)
                    self.comprehend(lc, i + 1, inner, out)
            return
        r = self.eval(q, dict(env))
        if r is TRUE:
            self.comprehend(lc, i + 1, env, out)
        elif r is not FALSE:
            raise FeatherError("badarg", "non-boolean filter")

    def binop(self, op: str, a: Value, b: Value) -> Value:
        return binop(op, a, b)

    def builtin(self, name: str, args: list) -> Value:
        return builtin(name, args, self.apply)


def _list_arg(v: Value) -> tuple:
    if type(v) is not tuple:
        raise FeatherError("badarg", "expected a list")
    return v


def _arith(op: str):
    def fn(a, b):
        if type(a) is not int or type(b) is not int:
            raise FeatherError("badarith", op)
        if op == "+":
            return wrap_int(a + b)
        if op == "-":
            return wrap_int(a - b)
        if op == "*":
            return wrap_int(a * b)
        if b == 0:
            raise FeatherError("badarith", "division by zero")
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        return wrap_int(q) if op != "rem" else wrap_int(a - b * q)
    return fn


def _append(a, b):
    if type(a) is not tuple or type(b) is not tuple:
        raise FeatherError("badarg", "++")
    return a + b


BINOPS = {op: _arith(op) for op in ("+", "-", "*", "/", "div", "rem")}
BINOPS.update({
    "==": lambda a, b: TRUE if a == b else FALSE,
    "=:=": lambda a, b: TRUE if a == b else FALSE,
    "/=": lambda a, b: FALSE if a == b else TRUE,
    "=/=": lambda a, b: FALSE if a == b else TRUE,
    "<": lambda a, b: boolean(compare_terms(a, b) < 0),
    ">": lambda a, b: boolean(compare_terms(a, b) > 0),
    "=<": lambda a, b: boolean(compare_terms(a, b) <= 0),
    ">=": lambda a, b: boolean(compare_terms(a, b) >= 0),
    "++": _append,
})


def binop(op: str, a: Value, b: Value) -> Value:
    fn = BINOPS.get(op)
    if fn is None:
        raise FeatherError("badarg", op)
    return fn(a, b)


def _integer_to_list(args, apply):
    if type(args[0]) is not int:
        raise FeatherError("badarg", "integer_to_list")
    return tuple(ord(c) for c in str(args[0]))


def _foldl(args, apply):
    fun, acc = args[0], args[1]
    for x in _list_arg(args[2]):
        acc = apply(fun, [x, acc])
    return acc


def _sum(args, apply):
    total = 0
    for x in _list_arg(args[0]):
        if type(x) is not int:
            raise FeatherError("badarith", "sum")
        total += x
    return wrap_int(total)


# (name, arity) -> fn(args, apply); ``apply(closure, args)`` runs closures
BUILTIN_IMPLS = {
    ("length", 1): lambda args, apply: len(_list_arg(args[0])),
    ("reverse", 1): lambda args, apply: _list_arg(args[0])[::-1],
    ("sort", 1): lambda args, apply: tuple(sorted(_list_arg(args[0]), key=TermKey)),
    ("integer_to_list", 1): _integer_to_list,
    ("member", 2): lambda args, apply: boolean(args[0] in _list_arg(args[1])),
    ("map", 2): lambda args, apply: tuple([apply(args[0], [x]) for x in _list_arg(args[1])]),
    ("foldl", 3): _foldl,
    ("sum", 1): _sum,
}


def builtin(name: str, args: list, apply) -> Value:
    fn = BUILTIN_IMPLS.get((name, len(args)))
    if fn is None:
        raise FeatherError("undef", f"{name}/{len(args)}")
    return fn(args, apply)


def match(pattern, value: Value, env: dict) -> Optional[dict]:
    """Pure pattern match: a new extended env, or None on failure."""
    return Interpreter(Module("match", (), ())).match(pattern, value, env)


def eval_guard(guard, env: dict) -> bool:
    return Interpreter(Module("guard", (), ())).guard(guard, env)


def eval_call(module: Module, fname: str, args, sink: Optional[TraceSink] = None,
              max_steps: int = DEFAULT_MAX_STEPS, observe=None,
              engine: str = "compiled") -> Outcome:
    """Run ``fname(*args)`` and collect the trace.

    The trace holds every value emitted before termination, including when
    the call ends in a runtime error.  A closure reaching the sink raises
    :class:`ClosureInTrace`.  ``engine`` is ``"compiled"`` (fast) or
    ``"reference"`` (the tree walker above); both count steps identically.
    """
    if sys.getrecursionlimit() < RECURSION_LIMIT:
        sys.setrecursionlimit(RECURSION_LIMIT)
    sink = sink if sink is not None else TraceSink()
    if engine == "compiled":
        from .compiled import program_for
        runner = program_for(module, observe)
        run = lambda: runner.run(fname, args, sink, max_steps)  # noqa: E731
    elif engine == "reference":
        runner = Interpreter(module, sink, max_steps, observe)
        run = lambda: runner.call(fname, args)  # noqa: E731
    else:
        raise ValueError(f"unknown engine {engine!r}")
    value, error = None, None
    try:
        value = run()
    except FeatherError as err:
        error = err.kind
    except StepLimit:
        error = "step_limit"
    except RecursionError:
        error = "stack_limit"
    return Outcome(value, error, sink.trace(), runner.steps)


def format_outcome(o: Outcome) -> str:
    return f"{o.summary()} trace {'[' + ','.join(format_value(v) for v in o.trace) + ']'}"
