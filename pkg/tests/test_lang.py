import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS_FILES, load
from evocheck.parser import FeatherSyntaxError, parse, parse_file, parse_value
from evocheck.pretty import pretty
from evocheck.syntax import (
    Clause, InvalidPath, Literal, PVar, TraceEmit, Var, node_at, replace_at, walk,
)
from evocheck.values import Atom, Tup, format_value
from strategies import exprs, modules


def test_parse_minimal():
    m = parse("main() -> 1.")
    (f,) = m.functions
    assert (f.name, f.arity) == ("main", 0)
    assert f.clauses[0].body == (Literal(1),)


def test_parse_happy0():
    m = load("happy0")
    assert [(f.name, f.arity) for f in m.functions] == [("main", 2), ("happy_list", 3), ("is_happy", 1)]
    assert len(m.specs) == 1
    guard = m.function("happy_list", 3).clauses[0].guard
    assert pretty(guard) == "length(L) =:= N"


def test_syntax_error_position():
    with pytest.raises(FeatherSyntaxError) as exc:
        parse("main( ->")
    assert exc.value.line == 1 and exc.value.col > 0


@pytest.mark.parametrize("src", [
    "f() -> _.",                        # wildcard as expression
    "f(X) when foo(X) -> 1.",           # user call in guard
    "f(X) when X = 1 -> 1.",            # match in guard
    "f() -> @trace(1).",                # instrumented forms need instrumented mode
    "f() -> _FV@1.",
])
def test_rejected(src):
    with pytest.raises(FeatherSyntaxError):
        parse(src)


def test_comments_and_atoms():
    m = parse("% header\nf() -> {ok, [a, b]}. % trailing\n")
    assert pretty(m.functions[0].clauses[0].body[0]) == "{ok, [a, b]}"


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_corpus_round_trip(path):
    m = parse_file(path)
    assert parse(pretty(m), m.name) == m


def test_surface_never_yields_trace_nodes():
    for path in CORPUS_FILES:
        m = parse_file(path)
        assert not any(type(n) is TraceEmit for _, n in walk(m))


def test_trace_emit_pretty():
    assert pretty(TraceEmit(Var("X"))) == "@trace(X)"


def test_nested_clause_order_preserved():
    src = ("f(X) -> case X of 1 -> if X > 0 -> a; true -> b end; "
           "2 -> c; _ -> case X of {Y} -> Y; _ -> d end end.")
    m = parse(src)
    again = parse(pretty(m))
    assert again == m


@settings(max_examples=1000)
@given(modules())
def test_random_module_round_trip(m):
    assert parse(pretty(m), "m") == m


@settings(max_examples=300)
@given(exprs(3))
def test_random_expr_round_trip(e):
    from evocheck.parser import parse_expr
    assert parse_expr(pretty(e)) == e


# ------------------------------------------------------------------ paths

def test_replace_root_body():
    m = parse("main() -> 1.")
    path = next(p for p, n in walk(m) if type(n) is Literal)
    m2 = replace_at(m, path, Literal(2))
    assert pretty(m2).strip() == "main() ->\n    2."


def test_node_at_empty_path_is_root():
    m = load("happy0")
    assert node_at(m, ()) is m


def test_invalid_path():
    m = parse("main() -> 1.")
    (path,) = [p for p, n in walk(m) if type(n) is Literal]
    bogus = path[:-1] + (path[-1]._replace(index=7),)
    with pytest.raises(InvalidPath):
        node_at(m, bogus)


def test_paths_reach_every_node():
    for path in CORPUS_FILES:
        m = parse_file(path)
        for p, node in walk(m):
            assert node_at(m, p) is node


@settings(max_examples=500)
@given(modules(), st.data())
def test_replace_then_read(m, data):
    paths = [p for p, _ in walk(m) if p]
    path = data.draw(st.sampled_from(paths))
    old = node_at(m, path)
    new = Var("Zz") if not isinstance(old, (PVar, Clause)) else old
    m2 = replace_at(m, path, new)
    assert node_at(m2, path) == new
    # everything off the path is untouched
    where = [s.index for s in path]
    for p, n in walk(m):
        idx = [s.index for s in p]
        if idx[:len(where)] != where and where[:len(idx)] != idx:
            assert node_at(m2, p) == n


# ----------------------------------------------------------------- values

@pytest.mark.parametrize("text,value", [
    ("42", 42), ("-7", -7), ("ok", Atom("ok")), ("[]", ()),
    ("{1,[a,b]}", Tup((1, (Atom("a"), Atom("b"))))), ("[[1],{}]", ((1,), Tup(()))),
])
def test_value_serialization(text, value):
    assert parse_value(text) == value
    assert format_value(value) == text
