import pytest

from conftest import load
from evocheck.gen import Itc, Rng
from evocheck.instrument import Poi, instrument
from evocheck.parser import parse
from evocheck.tgen import (
    Exhausted, Suite, TgenStats, TraceMap, build_suite, load_suite, save_suite, tgen,
    trace_of,
)
from evocheck.typeinfer import infer_clause_types
from evocheck.values import Atom, Tup

HAPPY_POI = Poi("happy0", 9, "Happy")


@pytest.fixture(scope="module")
def happy0():
    m = load("happy0")
    return m, instrument(m, HAPPY_POI), infer_clause_types(m, "main", 2)


def test_trace_map_bookkeeping():
    tm = TraceMap()
    assert tm.add((1,), Itc("f", (1,)))
    assert not tm.add((1,), Itc("f", (1,)))
    tm.add((), Itc("f", (2,)))
    tm.add((1,), Itc("f", (3,)))
    assert tm.size == 3 and len(tm) == 2
    assert tm.traces() == [(1,), ()]
    with pytest.raises(ValueError):
        tm.add((9,), Itc("f", (1,)))


def test_single_step_stops_at_top(happy0):
    m, im, cts = happy0
    tm = TraceMap()
    stats = TgenStats()
    tgen(1, [Itc("main", (4, 1))], tm, im, cts, Rng(0), stats=stats)
    assert tm.size == 1 and stats.iterations == 1 and stats.novel == 1
    assert tm.trace_for(Itc("main", (4, 1))) == (Atom("false"),) * 3 + (Atom("true"),)


def test_stall_files_pending_and_injects_fresh():
    m = parse("spec f(integer()) -> any().\nf(X) -> Y = 0, Y.")
    im = instrument(m, Poi("x", 2, "Y"))
    cts = infer_clause_types(m, "f", 1)
    injected = []

    def fresh():
        itc = Itc("f", (100 + len(injected),))
        injected.append(itc)
        return itc

    tm = TraceMap()
    stats = TgenStats()
    # every input yields trace [0]; the first is novel, the rest stall
    tgen(3, [Itc("f", (1,)), Itc("f", (2,))], tm, im, cts, Rng(1), fresh=fresh, stats=stats)
    assert tm.traces() == [(0,)]
    assert stats.stalls >= 1 and len(injected) >= 1
    assert Itc("f", (2,)) in tm.itcs()


def test_novel_input_is_first_in_queue_order():
    m = parse("spec f(integer()) -> any().\nf(X) -> Y = X rem 3, Y.")
    im = instrument(m, Poi("x", 2, "Y"))
    cts = infer_clause_types(m, "f", 1)
    tm = TraceMap()
    tm.add((1,), Itc("f", (1,)))
    tgen(2, [Itc("f", (4,)), Itc("f", (5,)), Itc("f", (6,))], tm, im, cts, Rng(2))
    # 4 repeats trace [1]; 5 is the first queued input with a new trace
    assert tm.itcs() == [Itc("f", (1,)), Itc("f", (5,))]


def test_consistency_and_monotonicity(happy0):
    m, im, cts = happy0
    suite = build_suite(m, HAPPY_POI, "main", 2, tests=50, seed=42, instrumented=im)
    assert suite.trace_map.size >= 50
    for trace, itcs in suite.trace_map.items():
        for itc in itcs:
            assert trace_of(itc, im) == trace
    # growing with a larger top keeps every earlier entry
    bigger = build_suite(m, HAPPY_POI, "main", 2, tests=80, seed=42, instrumented=im)
    before = {itc: t for t, xs in suite.trace_map.items() for itc in xs}
    after = {itc: t for t, xs in bigger.trace_map.items() for itc in xs}
    assert all(after.get(itc) == t for itc, t in before.items())


def test_deterministic_for_a_seed(happy0):
    m, im, _ = happy0
    a = build_suite(m, HAPPY_POI, "main", 2, tests=30, seed=7, instrumented=im)
    b = build_suite(m, HAPPY_POI, "main", 2, tests=30, seed=7, instrumented=im)
    assert list(a.trace_map.items()) == list(b.trace_map.items())


def test_exhausted():
    m = parse("main() -> X = 1, X.")
    im = instrument(m, Poi("x", 1, "X"))
    cts = infer_clause_types(m, "main", 0)
    with pytest.raises(Exhausted) as exc:
        tgen(5, [Itc("main", ())], TraceMap(), im, cts, Rng(0))
    assert exc.value.trace_map.size == 1
    stats = TgenStats()
    suite = build_suite(m, Poi("x", 1, "X"), "main", 0, tests=5, stats=stats)
    assert stats.exhausted and suite.trace_map.size == 1


def test_timeout_with_fake_clock(happy0):
    m, im, cts = happy0
    ticks = iter(range(1000))
    stats = TgenStats()
    tm = tgen(None, [Itc("main", (4, 1))], TraceMap(), im, cts, Rng(3), timeout=5,
              clock=lambda: next(ticks), stats=stats)
    assert stats.timed_out and 1 <= tm.size <= 5


def test_needs_a_stopping_rule(happy0):
    _, im, cts = happy0
    with pytest.raises(ValueError):
        tgen(None, [], TraceMap(), im, cts, Rng(0))


def test_reached_count():
    tm = TraceMap()
    tm.add((), Itc("f", (0,)))
    tm.add((1,), Itc("f", (1,)))
    tm.add((1, 1), Itc("f", (2,)))
    assert Suite(HAPPY_POI, "f/1", tm).reached_count == 2


def test_save_load_round_trip(tmp_path, happy0):
    m, im, _ = happy0
    suite = build_suite(m, HAPPY_POI, "main", 2, tests=20, seed=1, instrumented=im)
    suite.trace_map.add((Tup((Atom("a"), ())), -3), Itc("main", (Tup((1,)), (2, 3))))
    path = save_suite(suite, str(tmp_path))
    back = load_suite(path)
    assert back.poi == suite.poi and back.function == "main/2" and back.seed == 1
    assert list(back.trace_map.items()) == list(suite.trace_map.items())


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "bad.suite"
    p.write_text("% function: f/1\nnonsense\n")
    with pytest.raises(ValueError):
        load_suite(str(p))
