import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load, sample_calls
from evocheck.instrument import Poi, instrument
from evocheck.interp import Interpreter, TraceSink, eval_call
from evocheck.parser import parse, parse_expr
from evocheck.syntax import Clause, FunctionDef, Module, PVar
from evocheck.values import Atom, Tup, format_value
from strategies import VARS, exprs

TRUE, FALSE = Atom("true"), Atom("false")


def pat(src):
    return parse(f"f({src}) -> ok.").functions[0].clauses[0].patterns[0]


def test_match_binds():
    it = Interpreter(parse("f() -> 1."))
    assert it.match(pat("{1,X,3}"), Tup((1, 2, 3)), {}) == {"X": 2}


def test_match_fails_before_inspecting_x():
    it = Interpreter(parse("f() -> 1."))
    assert it.match(pat("{1,X,3}"), Tup((2, 2, 3)), {}) is None


def test_bound_variable_constrains():
    it = Interpreter(parse("f() -> 1."))
    env = {"X": 4}
    assert it.match(pat("X"), 5, env) is None
    assert env == {"X": 4}
    assert it.match(pat("X"), 4, env) == {"X": 4}


def test_repeated_variable_in_pattern():
    it = Interpreter(parse("f() -> 1."))
    assert it.match(pat("{A,[A,B]}"), Tup((1, (1, 5))), {}) == {"A": 1, "B": 5}
    assert it.match(pat("{A,[A,B]}"), Tup((1, (2, 5))), {}) is None


@pytest.mark.parametrize("guard,env,expected", [
    ("length(L) =:= N", {"L": (), "N": 0}, True),
    ("X < 1", {"X": 4}, False),
    ("1 div 0 > 0", {}, False),
    ("length(X) > 0", {"X": 3}, False),
    ("X > 0 andalso X < 10", {"X": 3}, True),
])
def test_guards(guard, env, expected):
    it = Interpreter(parse("f() -> 1."))
    assert it.guard(parse_expr(guard), env) is expected


def test_plain_call():
    o = eval_call(parse("main() -> 1 + 2."), "main", ())
    assert (o.value, o.error, o.trace) == (3, None, ())


def test_instrumented_happy0():
    m = load("happy0")
    o = eval_call(instrument(m, Poi("happy0", 9, "Happy")), "main", (4, 1))
    assert o.value == (7,)
    assert o.trace == (FALSE, FALSE, FALSE, TRUE)


def test_badmatch_keeps_trace():
    m = parse("main() -> {1,B,3} = {1,2,4}.")
    o = eval_call(instrument(m, Poi("x", 1, "B")), "main", ())
    assert o.error == "badmatch" and o.trace == (2,)


@pytest.mark.parametrize("src,kind", [
    ("main() -> f(1).\nf(0) -> a.", "function_clause"),
    ("main() -> case 3 of 1 -> a end.", "case_clause"),
    ("main() -> if 1 > 2 -> a end.", "if_clause"),
    ("main() -> 1 + a.", "badarith"),
    ("main() -> 1 div 0.", "badarith"),
    ("main() -> nope(1).", "undef"),
    ("main() -> {A, A} = {1, 2}.", "badmatch"),
    ("main() -> main().", "step_limit"),
])
def test_error_kinds(src, kind):
    o = eval_call(parse(src), "main", (), max_steps=5000)
    assert o.error == kind


def test_generator_skips_non_matching():
    m = parse("main() -> [X || {ok, X} <- [{ok, 1}, err, {ok, 2}, {no, 3}]].")
    assert eval_call(m, "main", ()).value == (1, 2)


def test_builtins():
    m = parse("main() -> {length([1,2]), reverse([1,2]), sort([3,1,2]), integer_to_list(42),"
              " member(2, [1,2]), map(fun(X) -> X * 2 end, [1,2]),"
              " foldl(fun(X, A) -> X + A end, 0, [1,2,3]), sum([4,5])}.")
    v = eval_call(m, "main", ()).value
    assert format_value(v) == "{2,[2,1],[1,2,3],[52,50],true,[2,4],6,9}"


def test_integer_wraparound():
    m = parse("main() -> 9223372036854775807 + 1.")
    assert eval_call(m, "main", ()).value == -(1 << 63)


def test_closure_in_trace_aborts():
    from evocheck.interp import ClosureInTrace
    m = parse("main() -> F = fun(X) -> X end, F.")
    with pytest.raises(ClosureInTrace):
        eval_call(instrument(m, Poi("x", 1, "F", 2)), "main", ())


def test_sink_collects_in_order():
    sink = TraceSink()
    m = parse("main() -> [X || X <- [3,1,2]].")
    eval_call(instrument(m, Poi("x", 1, "X", 1)), "main", (), sink=sink)
    assert sink.trace() == (3, 1, 2)


# ------------------------------------------------------------ two engines

def _corpus_calls():
    out = []
    for name in ("happy0", "happy1", "lookup", "pairs", "strict"):
        m = load(name)
        out += [(name, m, f, args) for f, args in sample_calls(m, 15, seed=3)]
    return out


@pytest.mark.parametrize("name,module,fname,args",
                         _corpus_calls(), ids=lambda x: x if isinstance(x, str) else None)
def test_engines_agree_on_corpus(name, module, fname, args):
    a = eval_call(module, fname, args, max_steps=200_000)
    b = eval_call(module, fname, args, max_steps=200_000, engine="reference")
    assert (a.value, a.error, a.trace) == (b.value, b.error, b.trace)
    if a.error != "step_limit":
        assert a.steps == b.steps


def _wrap(e):
    params = tuple(PVar(v) for v in VARS)
    return Module("m", (), (FunctionDef("f", len(VARS), (Clause(params, None, (e,)),)),))


@settings(max_examples=300)
@given(exprs(3), st.lists(st.integers(-5, 5), min_size=len(VARS), max_size=len(VARS)))
def test_engines_agree_on_random_programs(e, args):
    m = _wrap(e)
    a = eval_call(m, "f", tuple(args), max_steps=5_000)
    b = eval_call(m, "f", tuple(args), max_steps=5_000, engine="reference")
    assert (a.summary(), a.error) == (b.summary(), b.error)
    if a.error != "step_limit":
        assert a.steps == b.steps


def test_determinism():
    m = load("lookup")
    runs = {format_value(eval_call(m, "classify", (3, (1, 2, 3))).value) for _ in range(3)}
    assert runs == {"{found_at,3}"}
