"""Closure-compiling evaluator.

Every AST node is turned once into a Python closure ``run(env)``; running
a program then avoids per-node type dispatch.  Semantics and step
accounting are the same as the tree-walking :class:`interp.Interpreter`
(one step per evaluated expression node), which serves as the reference
for this engine.

Calls in tail position return a :class:`_Bounce` instead of recursing;
the nearest non-tail call site runs the bounce loop, so tail-recursive
Feather loops use constant Python stack.
"""
from __future__ import annotations

from .interp import BINOPS, BUILTIN_IMPLS, FeatherError, StepLimit, TraceSink
from .syntax import (
    CASE, LAMBDA, BinOp, Call, Case, Cons, Generator, GuardProbe, If,
    Lambda, ListComp, Literal, Match, Module, Nil, PCons, PLit, PNil, PTuple,
    PVar, PWild, Seq, TraceEmit, Tuple, UnOp, Var,
)
from .values import FALSE, TRUE, Closure, Tup, format_value, wrap_int

_EMPTY: dict = {}


class _Bounce:
    __slots__ = ("fn", "env")

    def __init__(self, fn, env):
        self.fn = fn
        self.env = env


def _settle(r):
    while type(r) is _Bounce:
        r = r.fn(r.env)
    return r


class _CClause:
    __slots__ = ("node", "patterns", "guard", "prefix", "last")

    def __init__(self, node, patterns, guard, prefix, last):
        self.node = node
        self.patterns = patterns
        self.guard = guard
        self.prefix = prefix
        self.last = last


class Program:
    """A module compiled against one mutable run state (steps, sink)."""

    def __init__(self, module: Module, observe=None):
        self.module = module
        self.observe = observe
        self.steps = 0
        self.max_steps = 0
        self.sink = TraceSink()
        self.funcs: dict = {}
        for f in module.functions:
            self.funcs[(f.name, f.arity)] = None
        for f in module.functions:
            self.funcs[(f.name, f.arity)] = [self._clause(c, tail=True) for c in f.clauses]

    # ---------------------------------------------------------------- run
    def run(self, fname: str, args, sink: TraceSink, max_steps: int):
        self.steps = 0
        self.max_steps = max_steps
        self.sink = sink
        return self.call(fname, list(args))

    def call(self, name: str, args: list):
        clauses = self.funcs.get((name, len(args)))
        if clauses is None:
            impl = BUILTIN_IMPLS.get((name, len(args)))
            if impl is None:
                raise FeatherError("undef", f"{name}/{len(args)}")
            return impl(args, self.apply)
        clause, env = self.select(clauses, args, _EMPTY, "function_clause")
        for b in clause.prefix:
            b(env)
        return _settle(clause.last(env))

    def apply(self, fun, args):
        if type(fun) is not Closure:
            raise FeatherError("badarg", "not a function")
        if fun.arity != len(args):
            raise FeatherError("badarity")
        code = fun.code
        if code is None:
            code = fun.code = [self._clause(c, tail=True) for c in fun.clauses]
        clause, env = self.select(code, args, fun.env, "function_clause")
        for b in clause.prefix:
            b(env)
        return _settle(clause.last(env))

    def select(self, clauses, args, outer: dict, fail_kind: str):
        for clause in clauses:
            new: dict = {}
            ok = True
            for pm, a in zip(clause.patterns, args):
                if not pm(a, _EMPTY, new):
                    ok = False
                    break
            if not ok:
                continue
            env = dict(outer)
            env.update(new)
            if clause.guard is None or self.guard_ok(clause.guard, env):
                return clause, env
        raise FeatherError(fail_kind)

    @staticmethod
    def guard_ok(g, env) -> bool:
        try:
            return g(env) is TRUE
        except FeatherError:
            return False

    # ------------------------------------------------------------ patterns
    def _pattern(self, p):
        t = type(p)
        sink_owner = self
        if t is PVar:
            name = p.name
            observed = p is self.observe

            def pm(v, env, new):
                if observed:
                    sink_owner.sink.emit(v)
                if name in new:
                    return new[name] == v
                if name in env:
                    return env[name] == v
                new[name] = v
                return True
            return pm
        if t is PWild:
            return lambda v, env, new: True
        if t is PLit:
            val, typ = p.value, type(p.value)
            return lambda v, env, new: type(v) is typ and v == val
        if t is PNil:
            return lambda v, env, new: type(v) is tuple and not v
        if t is PTuple:
            subs = [self._pattern(e) for e in p.elems]
            n = len(subs)

            def pm(v, env, new):
                if type(v) is not Tup or len(v.items) != n:
                    return False
                for sp, sv in zip(subs, v.items):
                    if not sp(sv, env, new):
                        return False
                return True
            return pm
        if t is PCons:
            head, tail = self._pattern(p.head), self._pattern(p.tail)

            def pm(v, env, new):
                if type(v) is not tuple or not v:
                    return False
                return head(v[0], env, new) and tail(v[1:], env, new)
            return pm
        raise TypeError(f"not a pattern: {p!r}")

    # ------------------------------------------------------------- clauses
    def _clause(self, c, tail: bool) -> _CClause:
        pats = [self._pattern(p) for p in c.patterns]
        guard = self._expr(c.guard, False) if c.guard is not None else None
        prefix = [self._expr(e, False) for e in c.body[:-1]]
        last = self._expr(c.body[-1], tail)
        return _CClause(c, pats, guard, prefix, last)

    # --------------------------------------------------------- expressions
    def _leaf(self, e):
        t = type(e)
        if t is Literal:
            return False, e.value
        if t is Var and e is not self.observe:
            return True, e.name
        return None

    def _fused_binop(self, e):
        """Operator over two variable/literal leaves as a single closure.
        Step counts match the unfused form except at the budget edge."""
        a_leaf, b_leaf = self._leaf(e.left), self._leaf(e.right)
        if a_leaf is None or b_leaf is None:
            return None
        op = e.op
        if op in ("+", "-", "*"):
            raw = {"+": int.__add__, "-": int.__sub__, "*": int.__mul__}[op]

            def fn(a, b):
                if type(a) is not int or type(b) is not int:
                    raise FeatherError("badarith", op)
                return wrap_int(raw(a, b))
        else:
            fn = BINOPS.get(op)
            if fn is None:
                return None
        st = self
        (a_var, a), (b_var, b) = a_leaf, b_leaf

        if a_var and b_var:
            def run(env):
                st.steps += 3
                if st.steps > st.max_steps:
                    raise StepLimit()
                try:
                    x = env[a]
                except KeyError:
                    raise FeatherError("unbound", a) from None
                try:
                    y = env[b]
                except KeyError:
                    raise FeatherError("unbound", b) from None
                return fn(x, y)
        elif a_var:
            def run(env):
                st.steps += 3
                if st.steps > st.max_steps:
                    raise StepLimit()
                try:
                    x = env[a]
                except KeyError:
                    raise FeatherError("unbound", a) from None
                return fn(x, b)
        elif b_var:
            def run(env):
                st.steps += 3
                if st.steps > st.max_steps:
                    raise StepLimit()
                try:
                    y = env[b]
                except KeyError:
                    raise FeatherError("unbound", b) from None
                return fn(a, y)
        else:
            return None
        return run

    def _expr(self, e, tail: bool):
        """Compile ``e``; in tail mode the closure may return a bounce."""
        st = self
        t = type(e)

        if t is Var:
            name = e.name
            if e is self.observe:
                def run(env):
                    st.steps += 1
                    if st.steps > st.max_steps:
                        raise StepLimit()
                    try:
                        v = env[name]
                    except KeyError:
                        raise FeatherError("unbound", name) from None
                    st.sink.emit(v)
                    return v
                return run

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                try:
                    return env[name]
                except KeyError:
                    raise FeatherError("unbound", name) from None
            return run

        if t is Literal:
            val = e.value

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                return val
            return run

        if t is Call:
            fargs = [self._expr(a, False) for a in e.args]
            key = (e.name, len(fargs))
            fname, funcs = e.name, self.funcs
            if key not in funcs:
                apply = self.apply
                impl = BUILTIN_IMPLS.get(key)

                def run(env):
                    st.steps += 1
                    if st.steps > st.max_steps:
                        raise StepLimit()
                    args = [f(env) for f in fargs]
                    if impl is None:
                        raise FeatherError("undef", f"{fname}/{len(args)}")
                    return impl(args, apply)
                return run
            select = self.select

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                args = [f(env) for f in fargs]
                clause, env2 = select(funcs[key], args, _EMPTY, "function_clause")
                for b in clause.prefix:
                    b(env2)
                if tail:
                    return _Bounce(clause.last, env2)
                return _settle(clause.last(env2))
            return run

        if t is BinOp:
            op = e.op
            left = self._expr(e.left, False)
            if op in ("andalso", "orelse"):
                right = self._expr(e.right, tail)
                stop = FALSE if op == "andalso" else TRUE

                def run(env):
                    st.steps += 1
                    if st.steps > st.max_steps:
                        raise StepLimit()
                    v = left(env)
                    if v is not TRUE and v is not FALSE:
                        raise FeatherError("badarg", op)
                    if v is stop:
                        return v
                    return right(env)
                return run
            fused = self._fused_binop(e)
            if fused is not None:
                return fused
            right = self._expr(e.right, False)
            if op in ("+", "-", "*"):
                fn = {"+": int.__add__, "-": int.__sub__, "*": int.__mul__}[op]

                def run(env):
                    st.steps += 1
                    if st.steps > st.max_steps:
                        raise StepLimit()
                    a = left(env)
                    b = right(env)
                    if type(a) is not int or type(b) is not int:
                        raise FeatherError("badarith", op)
                    return wrap_int(fn(a, b))
                return run

            fn = BINOPS.get(op)
            if fn is None:
                raise FeatherError("badarg", op)

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                a = left(env)
                return fn(a, right(env))
            return run

        if t is Match:
            pm = self._pattern(e.pattern)
            rhs = self._expr(e.expr, False)

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                v = rhs(env)
                new: dict = {}
                if not pm(v, env, new):
                    raise FeatherError("badmatch", format_value(v))
                env.update(new)
                return v
            return run

        if t is Tuple:
            elems = [self._expr(x, False) for x in e.elems]

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                return Tup(tuple([f(env) for f in elems]))
            return run

        if t is Cons:
            head, rest = self._expr(e.head, False), self._expr(e.tail, False)

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                h = head(env)
                tl = rest(env)
                if type(tl) is not tuple:
                    raise FeatherError("badarg", "improper list")
                return (h,) + tl
            return run

        if t is Nil:
            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                return ()
            return run

        if t is Case:
            scrut = self._expr(e.scrutinee, False)
            clauses = [self._clause(c, tail) for c in e.clauses]
            shadow = e.origin == LAMBDA
            kind = "case_clause" if e.origin == CASE else "function_clause"
            guard_ok = self.guard_ok

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                v = scrut(env)
                scope = _EMPTY if shadow else env
                for c in clauses:
                    new: dict = {}
                    if not c.patterns[0](v, scope, new):
                        continue
                    inner = dict(env)
                    inner.update(new)
                    if c.guard is None or guard_ok(c.guard, inner):
                        for b in c.prefix:
                            b(inner)
                        return c.last(inner)
                raise FeatherError(kind, format_value(v))
            return run

        if t is If:
            clauses = [self._clause(c, tail) for c in e.clauses]
            guard_ok = self.guard_ok

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                for c in clauses:
                    if guard_ok(c.guard, env):
                        inner = dict(env)
                        for b in c.prefix:
                            b(inner)
                        return c.last(inner)
                raise FeatherError("if_clause")
            return run

        if t is Seq:
            prefix = [self._expr(x, False) for x in e.exprs[:-1]]
            last = self._expr(e.exprs[-1], tail)

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                for b in prefix:
                    b(env)
                return last(env)
            return run

        if t is UnOp:
            operand = self._expr(e.operand, False)
            neg = e.op == "-"

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                v = operand(env)
                if neg:
                    if type(v) is not int:
                        raise FeatherError("badarith", "-")
                    return wrap_int(-v)
                if v is TRUE:
                    return FALSE
                if v is FALSE:
                    return TRUE
                raise FeatherError("badarg", "not")
            return run

        if t is Lambda:
            code = [self._clause(c, tail=True) for c in e.clauses]
            clauses = e.clauses
            arity = len(e.clauses[0].patterns)

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                return Closure(clauses, dict(env), arity, code)
            return run

        if t is ListComp:
            template = self._expr(e.template, False)
            quals = []
            for q in e.qualifiers:
                if type(q) is Generator:
                    quals.append((True, self._pattern(q.pattern), self._expr(q.expr, False)))
                else:
                    quals.append((False, None, self._expr(q, False)))
            n = len(quals)

            def comprehend(i, env, out):
                if i == n:
                    out.append(template(dict(env)))
                    return
                is_gen, pm, f = quals[i]
                if is_gen:
                    src = f(dict(env))
                    if type(src) is not tuple:
                        raise FeatherError("badarg", "generator over non-list")
                    for v in src:
                        new: dict = {}
                        if pm(v, _EMPTY, new):
                            inner = dict(env)
                            inner.update(new)
                            comprehend(i + 1, inner, out)
                    return
                r = f(dict(env))
                if r is TRUE:
                    comprehend(i + 1, env, out)
                elif r is not FALSE:
                    raise FeatherError("badarg", "non-boolean filter")

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                out: list = []
                comprehend(0, env, out)
                return tuple(out)
            return run

        if t is TraceEmit:
            inner = self._expr(e.expr, False)

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                v = inner(env)
                st.sink.emit(v)
                return v
            return run

        if t is GuardProbe:
            g = self._expr(e.guard, False)
            guard_ok = self.guard_ok

            def run(env):
                st.steps += 1
                if st.steps > st.max_steps:
                    raise StepLimit()
                guard_ok(g, env)
                return TRUE
            return run

        raise TypeError(f"cannot compile {t.__name__}")


_CACHE: dict = {}
_CACHE_SIZE = 64


def program_for(module: Module, observe=None) -> Program:
    """Compiled program for ``module``, reused across calls."""
    key = (id(module), id(observe))
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is module and hit[1] is observe:
        return hit[2]
    prog = Program(module, observe)
    if len(_CACHE) >= _CACHE_SIZE:
        _CACHE.pop(next(iter(_CACHE)))
    _CACHE[key] = (module, observe, prog)
    return prog
