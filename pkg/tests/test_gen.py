import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load
from evocheck import ftypes as ft
from evocheck.gen import (
    ATOM_POOL, Itc, Rng, bound, generate_args, generate_value, initial_itcs, mut,
)
from evocheck.interp import Interpreter
from evocheck.parser import parse
from evocheck.typeinfer import EmptyType, infer_clause_types
from evocheck.values import Tup, contains_closure
from strategies import ftypes


def test_rng_reference_stream():
    # splitmix64 from state 0: first outputs of the published algorithm
    r = Rng(0)
    r.state = 0
    assert r.next_u64() == 0xE220A8397B1DCDAF
    assert r.next_u64() == 0x6E789E6AA1B965F4


def test_rng_streams_differ_and_repeat():
    a, b = Rng(42, 0), Rng(42, 1)
    xs = [a.next_u64() for _ in range(5)]
    assert xs != [b.next_u64() for _ in range(5)]
    again = Rng(42, 0)
    assert xs == [again.next_u64() for _ in range(5)]


@settings(max_examples=200)
@given(st.integers(0, 2 ** 64 - 1), st.integers(1, 10 ** 6))
def test_below_in_range(seed, n):
    assert 0 <= Rng(seed).below(n) < n


def test_literal_union():
    rng = Rng(1)
    assert {generate_value(ft.literals([1, 2]), 10, rng) for _ in range(50)} == {1, 2}


def test_fixed_list_of_pos_ints():
    rng = Rng(2)
    v = generate_value(ft.FixedList((ft.POS_INT, ft.POS_INT)), 10, rng)
    assert type(v) is tuple and len(v) == 2 and all(x >= 1 for x in v)


@pytest.mark.parametrize("size", [0, 1, 5, 10, 20])
def test_pos_int_bound(size):
    rng = Rng(size)
    for _ in range(500):
        assert 1 <= generate_value(ft.POS_INT, size, rng) <= bound(size)
        assert abs(generate_value(ft.ANY_INT, size, rng)) <= bound(size)


def test_list_lengths_within_size():
    rng = Rng(3)
    lens = {len(generate_value(ft.ListOf(ft.ANY_ATOM), 4, rng)) for _ in range(300)}
    assert lens == {0, 1, 2, 3, 4}


def test_any_atom_pool():
    rng = Rng(4)
    assert {generate_value(ft.ANY_ATOM, 10, rng) for _ in range(200)} == set(ATOM_POOL)


@settings(max_examples=300)
@given(ftypes(2), st.integers(0, 12), st.integers(0, 2 ** 32))
def test_type_soundness(t, size, seed):
    v = generate_value(t, size, Rng(seed))
    assert ft.contains(t, v)
    assert not contains_closure(v)


def test_empty_type_refused():
    with pytest.raises(EmptyType):
        generate_value(ft.TupleOf((ft.ANY_INT, ft.EMPTY)), 10, Rng(0))


def test_repeated_variable_reuses_value():
    m = parse("spec f(1 | 2, [1 | 2 | 5 | 6]) -> any().\nf(A, [A, B]) -> B.")
    (ct,) = infer_clause_types(m, "f", 2)
    rng = Rng(7)
    for _ in range(200):
        a, lst = generate_args(ct, 10, rng)
        assert len(lst) == 2 and lst[0] == a and a in (1, 2) and lst[1] in (1, 2, 5, 6)


def test_zero_arity():
    m = parse("main() -> ok.")
    (ct,) = infer_clause_types(m, "main", 0)
    assert generate_args(ct, 10, Rng(0)) == ()


def test_happy0_args_are_pos_ints():
    (ct,) = infer_clause_types(load("happy0"), "main", 2)
    rng = Rng(8)
    for _ in range(1000):
        n, m = generate_args(ct, 10, rng)
        assert n >= 1 and m >= 1


def test_reproducible():
    m = load("lookup")
    cts = infer_clause_types(m, "classify", 2, strict=False)
    a = initial_itcs(m, "classify", 2, cts, 32, Rng(9))
    b = initial_itcs(m, "classify", 2, cts, 32, Rng(9))
    assert a == b and len(a) >= 32


def _fired(module, fname, arity, itcs):
    fun = module.function(fname, arity)
    it = Interpreter(module, max_steps=10_000)
    return {it.clause_index(fun, itc.args) for itc in itcs}


@pytest.mark.parametrize("name", ["happy0", "happy1", "lookup", "pairs", "strict"])
def test_coverage_floor(name):
    m = load(name)
    for f in m.functions:
        cts = infer_clause_types(m, f.name, f.arity, strict=False)
        itcs = initial_itcs(m, f.name, f.arity, cts, 32, Rng(10))
        fired = _fired(m, f.name, f.arity, itcs)
        # a clause is reachable when random search with a large budget hits it
        many = initial_itcs(m, f.name, f.arity, cts, 400, Rng(11))
        reachable = _fired(m, f.name, f.arity, many) - {None}
        assert reachable <= fired, (f.name, reachable - fired)


def test_boundary_probes_happy1():
    m = load("happy1")
    cts = infer_clause_types(m, "is_happy", 2, strict=False)
    itcs = initial_itcs(m, "is_happy", 2, cts, 32, Rng(12))
    assert {0, 1, 2} <= {itc.args[0] for itc in itcs}


def test_unguarded_single_clause_fills_budget():
    m = parse("spec f(integer()) -> any().\nf(X) -> X.")
    cts = infer_clause_types(m, "f", 1)
    assert len(initial_itcs(m, "f", 1, cts, 20, Rng(13))) == 20


def test_unreachable_clause_warns(caplog):
    m = parse("spec g(2 | 3) -> any().\ng(1) -> x;\ng(_) -> y.")
    cts = infer_clause_types(m, "g", 1, strict=False)
    with caplog.at_level(logging.WARNING):
        itcs = initial_itcs(m, "g", 1, cts, 5, Rng(14))
    assert "skipping" in caplog.text
    assert all(itc.args[0] in (2, 3) for itc in itcs)


def test_mut_replaces_one_argument_each():
    (ct,) = infer_clause_types(load("happy0"), "main", 2)
    rng = Rng(15)
    for _ in range(1000):
        a, b = mut(Itc("main", (4, 1)), [ct], rng)
        assert a.args[1] == 1 and b.args[0] == 4
        assert all(x >= 1 for x in a.args + b.args)


def test_mut_zero_arity():
    (ct,) = infer_clause_types(parse("main() -> ok."), "main", 0)
    assert mut(Itc("main", ()), [ct], Rng(0)) == []


def test_itc_str():
    assert str(Itc("f", (1, Tup((2,)), ()))) == "f(1,{2},[])"
