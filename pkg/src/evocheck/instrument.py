"""Source-to-source instrumentation that reports the values of a point of
interest (POI) to the trace sink.

Pipeline: :func:`annotate_bindings` -> :func:`locate_poi` ->
:func:`split_path` -> one rewrite rule at the split point -> rebuild the
tree along the path back to the root.

Rules, by the construct that owns the POI position:

``LEFT_PM``     ``p = e``  =>  ``p = begin np = e, @trace(npoi), np end``
``PAT_GEN_LC``  ``p <- e`` =>  ``np <- e, p <- begin @trace(npoi), [np] end``
``CLAUSE_PAT``  clause ``p when g -> b`` replaced by
                ``np when true -> begin @trace(npoi), case np of <clauses> end end``
``CLAUSE_GUARD`` clause replaced by
                ``np when true -> begin @probe(g'), case np of <clauses> end end``
``EXPR``        ``x`` => ``begin F = x, @trace(F), F end``

``np`` is the pattern loosened by :func:`pfv`: everything to the right of
the POI becomes a fresh variable so matching reaches the POI exactly when
the original pattern would.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .syntax import (
    CASE, FUNCTION, LAMBDA, BinOp, Case, Clause, FunctionDef, Generator,
    GuardProbe, If, Lambda, ListComp, Literal, Match, Module, Nil,
    PTuple, PVar, PWild, Seq, Step, TraceEmit, Tuple, Var, Cons,
    children, node_at, pattern_to_expr, rebuild, replace_at, walk,
)
from .values import TRUE

FRESH_PREFIX = "_FV@"


class UnboundVariable(Exception):
    def __init__(self, name: str, line: int, col: int):
        super().__init__(f"{line}:{col}: variable {name} is unbound")
        self.name, self.line, self.col = name, line, col


class PoiNotFound(Exception):
    pass


class UnsupportedPoiPosition(Exception):
    pass


@dataclass(frozen=True)
class Poi:
    file: str
    line: int
    var: str
    occurrence: int = 1

    def label(self) -> str:
        return f"({self.line},{self.var},{self.occurrence})"


class FreshNamer:
    """Generates ``_FV@1``, ``_FV@2``, ...; the ``@`` keeps them out of
    the surface syntax so they cannot collide with source variables."""

    def __init__(self, prefix: str = FRESH_PREFIX):
        self.prefix = prefix
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        return f"{self.prefix}{self.counter}"


# ------------------------------------------------------------ annotation

def annotate_bindings(module: Module) -> Module:
    """Attach ``bound_before``/``bound_here`` variable sets to every node.

    Scoping mirrors the interpreter: clause bodies, lambda bodies,
    comprehensions and the right operand of ``andalso``/``orelse`` do not
    export bindings; lambda heads and generator patterns bind fresh names.
    """
    funs = tuple(_ann_clause_owner(f, frozenset(), shadow=True) for f in module.functions)
    return dataclasses.replace(module, functions=funs, bound_before=frozenset(),
                               bound_here=frozenset())


def _mark(node, kids, before: frozenset, after: frozenset):
    new = rebuild(node, kids) if kids is not None else node
    return dataclasses.replace(new, bound_before=before, bound_here=after - before)


def _ann_pattern(p, scope: frozenset, seen: set):
    """Annotate a pattern; ``seen`` collects names bound so far in the same
    pattern sequence (repeats act as constraints)."""
    t = type(p)
    before = scope | frozenset(seen)
    if t is PVar:
        fresh = p.name not in before
        seen.add(p.name)
        return dataclasses.replace(p, bound_before=before,
                                   bound_here=frozenset([p.name]) if fresh else frozenset())
    kids = [_ann_pattern(k, scope, seen) for k in children(p)]
    return _mark(p, kids, before, scope | frozenset(seen))


def _ann_clause(c: Clause, bound: frozenset, shadow: bool) -> Clause:
    scope = frozenset() if shadow else bound
    seen: set = set()
    pats = [_ann_pattern(p, scope, seen) for p in c.patterns]
    inner = bound | frozenset(seen)
    kids = list(pats)
    if c.guard is not None:
        g, _ = _ann(c.guard, inner)
        kids.append(g)
    cur = inner
    for e in c.body:
        e2, cur = _ann(e, cur)
        kids.append(e2)
    return _mark(c, kids, bound, cur)


def _ann_clause_owner(node, bound: frozenset, shadow: bool):
    clauses = [_ann_clause(c, bound, shadow) for c in node.clauses]
    return _mark(node, clauses, bound, bound)


def _ann(e, bound: frozenset):
    """Annotate expression ``e``; returns (node, bound-after)."""
    t = type(e)
    if t is Var:
        if e.name not in bound:
            raise UnboundVariable(e.name, e.line, e.col)
        return _mark(e, None, bound, bound), bound
    if t in (Literal, Nil):
        return _mark(e, None, bound, bound), bound
    if t is Match:
        rhs, after = _ann(e.expr, bound)
        seen: set = set()
        pat = _ann_pattern(e.pattern, after, seen)
        out = after | frozenset(seen)
        return _mark(e, [pat, rhs], bound, out), out
    if t is BinOp and e.op in ("andalso", "orelse"):
        left, after = _ann(e.left, bound)
        right, _ = _ann(e.right, after)
        return _mark(e, [left, right], bound, after), after
    if t is Case:
        scrut, after = _ann(e.scrutinee, bound)
        clauses = [_ann_clause(c, after, shadow=(e.origin == LAMBDA)) for c in e.clauses]
        return _mark(e, [scrut] + clauses, bound, after), after
    if t is If:
        return _ann_clause_owner(e, bound, shadow=False), bound
    if t is Lambda:
        return _ann_clause_owner(e, bound, shadow=True), bound
    if t is ListComp:
        cur = bound
        quals = []
        for q in e.qualifiers:
            if type(q) is Generator:
                src, _ = _ann(q.expr, cur)
                seen = set()
                pat = _ann_pattern(q.pattern, frozenset(), seen)
                nxt = cur | frozenset(seen)
                quals.append(_mark(q, [pat, src], cur, nxt))
                cur = nxt
            else:
                f, _ = _ann(q, cur)
                quals.append(f)
        tmpl, _ = _ann(e.template, cur)
        return _mark(e, [tmpl] + quals, bound, bound), bound
    if t is GuardProbe:
        g, _ = _ann(e.guard, bound)
        return _mark(e, [g], bound, bound), bound
    # Tuple, Cons, Call, BinOp, UnOp, Seq, TraceEmit: thread left to right
    cur = bound
    kids = []
    for k in children(e):
        k2, cur = _ann(k, cur)
        kids.append(k2)
    return _mark(e, kids, bound, cur), cur


def is_bound(p: PVar) -> bool:
    return p.bound_before is not None and p.name in p.bound_before


# ---------------------------------------------------------------- location

def locate_poi(module: Module, poi: Poi) -> tuple:
    """Path to the ``occurrence``-th textual occurrence of ``poi.var`` on
    ``poi.line`` (pattern and expression occurrences alike)."""
    hits = [(node.col, path + (), node) for path, node in walk(module)
            if type(node) in (Var, PVar) and node.line == poi.line and node.name == poi.var]
    hits.sort(key=lambda h: h[0])
    if not 1 <= poi.occurrence <= len(hits):
        raise PoiNotFound(f"{poi.var} occurrence {poi.occurrence} not found on line {poi.line}"
                          f" ({len(hits)} found)")
    return hits[poi.occurrence - 1][1]


class SplitPath(NamedTuple):
    before: tuple
    after: tuple
    rule: str


LEFT_PM, PAT_GEN_LC, CLAUSE_PAT, CLAUSE_GUARD, EXPR = (
    "LEFT_PM", "PAT_GEN_LC", "CLAUSE_PAT", "CLAUSE_GUARD", "EXPR")


def _rule_at(path: tuple, j: int) -> Optional[str]:
    step = path[j]
    node, idx = step.node, step.index
    nxt = path[j + 1] if j + 1 < len(path) else None
    t = type(node)
    if t is Match:
        return LEFT_PM if idx == 1 else None
    if t is ListComp:
        if idx >= 2 and type(node.qualifiers[idx - 2]) is Generator and nxt and nxt.index == 1:
            return PAT_GEN_LC
        return None
    if t in (Case, If, Lambda, FunctionDef):
        first = 2 if t is Case else 1
        if idx < first or nxt is None:
            return None
        clause = nxt.node
        npat = len(clause.patterns)
        if nxt.index <= npat:
            return CLAUSE_PAT
        if clause.guard is not None and nxt.index == npat + 1:
            return CLAUSE_GUARD
    return None


def split_path(path: tuple) -> SplitPath:
    """Split at the deepest target expression whose pattern or guard holds
    the POI; otherwise the EXPR rule applies to the last step."""
    for j in range(len(path) - 1, -1, -1):
        rule = _rule_at(path, j)
        if rule is not None:
            return SplitPath(path[:j], path[j:], rule)
    return SplitPath(path[:-1], path[-1:], EXPR)


# ------------------------------------------------------------- pfv & co

def _cv1(p, rename: dict, namer: FreshNamer):
    t = type(p)
    if t is PVar:
        if p.name in rename:
            return PVar(rename[p.name])
        if is_bound(p):
            return p
        fresh = namer.fresh()
        rename[p.name] = fresh
        return PVar(fresh)
    if t is PWild:
        return PVar(namer.fresh())
    kids = children(p)
    if not kids:
        return p
    return rebuild(p, [_cv1(k, rename, namer) for k in kids])


def cv(patterns, rename: dict, namer: FreshNamer):
    """Replace unbound variables by fresh ones, threading the rename map so
    repeated names share one fresh name.  Bound variables are kept."""
    rename = dict(rename)
    out = [_cv1(p, rename, namer) for p in patterns]
    return out, rename


def fv_from(pos: int, p, namer: FreshNamer, rename: Optional[dict] = None):
    """Keep children ``1..pos`` of ``p`` (after :func:`cv`) and replace the
    rest with fresh variables."""
    kids = children(p)
    kept, _ = cv(kids[:pos], rename or {}, namer)
    rest = [PVar(namer.fresh()) for _ in kids[pos:]]
    return rebuild(p, list(kept) + rest)


def pfv(p, steps, namer: FreshNamer, rename: Optional[dict] = None):
    """Loosen pattern ``p`` around the POI reached by ``steps`` (child
    steps inside ``p``; empty when ``p`` is the POI).

    Returns ``(poi, npoi, np)``: the POI node, the fresh variable standing
    for it, and the loosened pattern.
    """
    rename = {} if rename is None else rename
    if not steps:
        npoi = namer.fresh()
        return p, npoi, PVar(npoi)
    k = steps[0].index
    kids = children(p)
    if not 1 <= k <= len(kids):
        from .syntax import InvalidPath
        raise InvalidPath(f"child {k} of {type(p).__name__}")
    left = [_cv1(kid, rename, namer) for kid in kids[:k - 1]]
    poi, npoi, mid = pfv(kids[k - 1], steps[1:], namer, rename)
    right = [PVar(namer.fresh()) for _ in kids[k:]]
    return poi, npoi, rebuild(p, left + [mid] + right)


def _rename_vars(e, rename: dict):
    if type(e) is Var:
        return Var(rename[e.name]) if e.name in rename else e
    kids = children(e)
    if not kids:
        return e
    return rebuild(e, [_rename_vars(k, rename) for k in kids])


# ------------------------------------------------------------------- rules

def _true():
    return Literal(TRUE)


def _clause_rule(clauses, ci: int, after_clause: tuple, rule: str, origin: str,
                 namer: FreshNamer, redispatch):
    """Rewrite clause ``ci`` (1-based) of a clause list.

    ``after_clause`` starts with the step into the clause (its index picks
    the pattern or guard).  ``redispatch(scrutinee)`` builds the inner
    expression that re-runs the original clauses.
    """
    clause = clauses[ci - 1]
    if rule == CLAUSE_PAT:
        (pattern,) = clause.patterns
        _, npoi, np = pfv(pattern, after_clause[1:], namer)
        first = TraceEmit(Var(npoi))
    else:
        guard_steps = after_clause[1:]
        if clause.patterns:
            (pattern,) = clause.patterns
            (np,), rename = cv([pattern], {}, namer)
        else:
            np, rename = None, {}
        poi = node_at(clause.guard, guard_steps)
        wrapped = replace_at(clause.guard, guard_steps, TraceEmit(poi))
        first = GuardProbe(_rename_vars(wrapped, rename))
    scrutinee = pattern_to_expr(np) if np is not None else None
    body = Seq((first, redispatch(scrutinee)))
    ncl = Clause((np,) if np is not None else (), _true(), (body,))
    return clauses[:ci - 1] + (ncl,) + clauses[ci:]


def _tupled(owner, namer: FreshNamer, origin: str):
    """Turn function/lambda clause dispatch into a case over a tuple of the
    parameters.  Returns (fresh param names, case)."""
    arity = len(owner.clauses[0].patterns)
    params = [namer.fresh() for _ in range(arity)]
    clauses = tuple(
        dataclasses.replace(c, patterns=(PTuple(c.patterns),)) for c in owner.clauses)
    case = Case(Tuple(tuple(Var(v) for v in params)), clauses, origin)
    return params, case


def apply_rule(target, split: SplitPath, namer: FreshNamer):
    """Rewrite the target node (the node reached by ``split.before``)."""
    after, rule = split.after, split.rule
    if rule == EXPR:
        parent = target
        poi = children(parent)[after[0].index - 1]
        if type(poi) is not Var:
            raise UnsupportedPoiPosition(f"{type(poi).__name__} outside any pattern rule")
        fresh = namer.fresh()
        seq = Seq((Match(PVar(fresh), poi), TraceEmit(Var(fresh)), Var(fresh)))
        return replace_at(parent, after, seq)
    if rule == LEFT_PM:
        _, npoi, np = pfv(target.pattern, after[1:], namer)
        ne = Seq((Match(np, target.expr), TraceEmit(Var(npoi)), pattern_to_expr(np)))
        return dataclasses.replace(target, expr=ne)
    if rule == PAT_GEN_LC:
        qi = after[0].index - 1
        gen = target.qualifiers[qi - 1]
        _, npoi, np = pfv(gen.pattern, after[2:], namer)
        loose = Generator(np, gen.expr)
        again = Generator(gen.pattern, Seq((TraceEmit(Var(npoi)),
                                            Cons(pattern_to_expr(np), Nil()))))
        quals = target.qualifiers[:qi - 1] + (loose, again) + target.qualifiers[qi:]
        return dataclasses.replace(target, qualifiers=quals)
    # clause rules
    t = type(target)
    ci = after[0].index - (1 if t is Case else 0)
    if t is If:
        clauses = _clause_rule(target.clauses, ci, after[1:], rule, CASE, namer,
                               lambda _: If(target.clauses))
        return dataclasses.replace(target, clauses=clauses)
    if t is Case:
        origin = target.origin
        clauses = _clause_rule(target.clauses, ci, after[1:], rule, origin, namer,
                               lambda s: Case(s, target.clauses, origin))
        return dataclasses.replace(target, clauses=clauses)
    origin = FUNCTION if t is FunctionDef else LAMBDA
    params, case = _tupled(target, namer, origin)
    # Step into the tuple pattern: clause child k becomes tuple element k.
    step = after[1]
    inner = after[1:]
    if rule == CLAUSE_PAT:
        tup = case.clauses[ci - 1].patterns[0]
        inner = (Step(case.clauses[ci - 1], 1), Step(tup, step.index)) + after[2:]
    else:
        inner = (Step(case.clauses[ci - 1], 2),) + after[2:]
    clauses = _clause_rule(case.clauses, ci, inner, rule, origin, namer,
                           lambda s: Case(s, case.clauses, origin))
    new_case = dataclasses.replace(case, clauses=clauses)
    head = Clause(tuple(PVar(v) for v in params), None, (new_case,))
    return dataclasses.replace(target, clauses=(head,))


def instrument(module: Module, poi: Poi) -> Module:
    """Return a copy of ``module`` that emits the POI value to the trace
    sink every time the POI is evaluated."""
    ann = annotate_bindings(module)
    path = locate_poi(ann, poi)
    for step in path:
        if type(step.node) in (TraceEmit, GuardProbe):
            raise UnsupportedPoiPosition("POI inside instrumentation code")
    split = split_path(path)
    namer = FreshNamer()
    target = node_at(ann, split.before)
    new_target = apply_rule(target, split, namer)
    return replace_at(ann, split.before, new_target)


def strip_traces(node):
    """Erase instrumentation: ``@trace(e)`` becomes ``e`` and ``@probe(g)``
    becomes ``true``.  The result is trace-free and should behave like the
    source program."""
    t = type(node)
    if t is TraceEmit:
        return strip_traces(node.expr)
    if t is GuardProbe:
        return _true()
    kids = children(node)
    if not kids:
        return node
    return rebuild(node, [strip_traces(k) for k in kids])
