"""Trace-directed test suite growth.

``tgen`` follows a three-branch recursion (written here as a loop):

1. the map already holds ``top`` inputs: stop;
2. some pending input produces a trace not yet in the map: file it under
   that trace and queue its mutants;
3. otherwise: file every pending input under its (known) trace and restart
   the queue with one freshly generated input.

Inputs are executed on the instrumented original program; each input's
trace is computed once and cached.
"""
from __future__ import annotations

import logging
import os
import re
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .gen import DEFAULT_SIZE, Itc, Rng, generate_args, initial_itcs, mut
from .instrument import Poi, instrument
from .interp import DEFAULT_MAX_STEPS, Outcome, eval_call
from .parser import parse_values, parse_value
from .typeinfer import EmptyType, infer_clause_types
from .values import format_call, format_trace

log = logging.getLogger(__name__)


class Exhausted(Exception):
    """Iteration cap reached before ``top`` inputs were collected."""

    def __init__(self, iterations: int, trace_map: "TraceMap"):
        super().__init__(f"gave up after {iterations} iterations with {trace_map.size} inputs")
        self.iterations = iterations
        self.trace_map = trace_map


class TraceMap:
    """Ordered map from trace to an insertion-ordered set of inputs."""

    def __init__(self):
        self._entries: dict = {}
        self._where: dict = {}

    def __contains__(self, trace) -> bool:
        return trace in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def size(self) -> int:
        """Total number of inputs across all traces."""
        return len(self._where)

    def add(self, trace: tuple, itc: Itc) -> bool:
        if itc in self._where:
            if self._where[itc] != trace:
                raise ValueError(f"{itc} already filed under another trace")
            return False
        self._entries.setdefault(trace, {})[itc] = None
        self._where[itc] = trace
        return True

    def trace_for(self, itc: Itc):
        return self._where.get(itc)

    def items(self):
        for trace, itcs in self._entries.items():
            yield trace, list(itcs)

    def itcs(self) -> list:
        return list(self._where)

    def traces(self) -> list:
        return list(self._entries)


@dataclass
class Suite:
    poi: Poi
    function: str  # "name/arity"
    trace_map: TraceMap
    seed: int = 0
    # Outcomes of the original program, when known (not persisted).
    outcomes: dict = field(default_factory=dict, repr=False)

    @property
    def reached_count(self) -> int:
        return self.trace_map.size - len(dict(self.trace_map.items()).get((), []))

    @property
    def name(self) -> str:
        return self.function.split("/")[0]

    @property
    def arity(self) -> int:
        return int(self.function.split("/")[1])


def run_itc(itc: Itc, instrumented, max_steps: int = DEFAULT_MAX_STEPS) -> Outcome:
    return eval_call(instrumented, itc.function, itc.args, max_steps=max_steps)


def trace_of(itc: Itc, instrumented, max_steps: int = DEFAULT_MAX_STEPS) -> tuple:
    return run_itc(itc, instrumented, max_steps).trace


@dataclass
class TgenStats:
    iterations: int = 0
    novel: int = 0
    stalls: int = 0
    timed_out: bool = False
    exhausted: bool = False


def tgen(top: Optional[int], pending, trace_map: TraceMap, instrumented, clause_types,
         rng: Rng, *, size: int = DEFAULT_SIZE, max_steps: int = DEFAULT_MAX_STEPS,
         max_iterations: Optional[int] = None, timeout: Optional[float] = None,
         fresh: Optional[Callable[[], Itc]] = None, outcomes: Optional[dict] = None,
         stats: Optional[TgenStats] = None, clock=time.monotonic) -> TraceMap:
    """Grow ``trace_map`` until it holds ``top`` inputs or ``timeout``
    seconds pass (either may be None, not both).

    ``fresh`` produces the input injected on a stall; by default a random
    clause type is sampled.  Raises :class:`Exhausted` after
    ``max_iterations`` (default ``100 * top``).
    """
    if top is None and timeout is None:
        raise ValueError("need a test count or a timeout")
    if max_iterations is None and top is not None:
        max_iterations = 100 * top
    stats = stats if stats is not None else TgenStats()
    outcomes = outcomes if outcomes is not None else {}
    live = [ct for ct in clause_types if not isinstance(ct, EmptyType)]
    if fresh is None:
        def fresh():
            if not live:
                return None
            ct = rng.choice(live)
            return Itc(ct.function.split("/")[0], generate_args(ct, size, rng))
    deadline = None if timeout is None else clock() + timeout
    queue = dict.fromkeys(pending)

    def trace(itc: Itc):
        if itc not in outcomes:
            outcomes[itc] = run_itc(itc, instrumented, max_steps)
        return outcomes[itc].trace

    while True:
        if top is not None and trace_map.size >= top:
            return trace_map
        if deadline is not None and clock() >= deadline:
            stats.timed_out = True
            return trace_map
        if max_iterations is not None and stats.iterations >= max_iterations:
            raise Exhausted(stats.iterations, trace_map)
        stats.iterations += 1
        novel = None
        for itc in queue:
            if trace(itc) not in trace_map and trace_map.trace_for(itc) is None:
                novel = itc
                break
        if novel is not None:
            stats.novel += 1
            del queue[novel]
            trace_map.add(trace(novel), novel)
            for m in mut(novel, clause_types, rng, size):
                queue.setdefault(m, None)
            continue
        stats.stalls += 1
        for itc in queue:
            if trace_map.trace_for(itc) is None:
                trace_map.add(trace(itc), itc)
        queue = {}
        new = fresh()
        if new is None:
            raise Exhausted(stats.iterations, trace_map)
        queue[new] = None


def build_suite(module, poi: Poi, name: str, arity: int, *, tests: Optional[int] = None,
                timeout: Optional[float] = None, seed: int = 0, size: int = DEFAULT_SIZE,
                initial_budget: int = 32, max_steps: int = DEFAULT_MAX_STEPS,
                instrumented=None, stats: Optional[TgenStats] = None) -> Suite:
    """Seed inputs for ``name/arity`` and grow them into a suite at ``poi``.

    Hitting the iteration cap is not fatal here: the partial suite is kept
    and ``stats.exhausted`` is set.
    """
    instrumented = instrumented if instrumented is not None else instrument(module, poi)
    stats = stats if stats is not None else TgenStats()
    cts = infer_clause_types(module, name, arity, strict=False)
    rng = Rng(seed)
    pending = initial_itcs(module, name, arity, cts, initial_budget, rng, size=size)
    outcomes: dict = {}
    tm = TraceMap()
    try:
        tgen(tests, pending, tm, instrumented, cts, rng, size=size, max_steps=max_steps,
             timeout=timeout, outcomes=outcomes, stats=stats)
    except Exhausted as exc:
        log.warning("%s/%d: %s", name, arity, exc)
        stats.exhausted = True
    return Suite(poi, f"{name}/{arity}", tm, seed, outcomes)


# ------------------------------------------------------------- persistence

_LINE = re.compile(r"^itc: (\w+)\((.*)\) -> trace: (\[.*\])$")


def suite_path(directory: str, function: str) -> str:
    name, arity = function.split("/")
    return os.path.join(directory, f"{name}_{arity}.suite")


def save_suite(suite: Suite, directory: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = suite_path(directory, suite.function)
    p = suite.poi
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"% poi: {p.file} {p.label()}\n")
        fh.write(f"% function: {suite.function}\n")
        fh.write(f"% seed: {suite.seed}\n")
        fh.write(f"% tests: {suite.trace_map.size} reached: {suite.reached_count}\n")
        for trace, itcs in suite.trace_map.items():
            for itc in itcs:
                fh.write(f"itc: {format_call(itc.function, itc.args)} -> trace: {format_trace(trace)}\n")
    return path


_POI = re.compile(r"^% poi: (.*) \((\d+),(\w+),(\d+)\)$")


def load_suite(path: str) -> Suite:
    poi, function, seed = None, None, 0
    tm = TraceMap()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("%"):
                m = _POI.match(line)
                if m:
                    poi = Poi(m.group(1), int(m.group(2)), m.group(3), int(m.group(4)))
                elif line.startswith("% function: "):
                    function = line.split(": ", 1)[1]
                elif line.startswith("% seed: "):
                    seed = int(line.split(": ", 1)[1])
                continue
            m = _LINE.match(line)
            if not m:
                raise ValueError(f"{path}:{lineno}: malformed suite line")
            args = parse_values(m.group(2))
            trace = parse_value(m.group(3))
            tm.add(trace, Itc(m.group(1), tuple(args)))
    if function is None:
        raise ValueError(f"{path}: missing function header")
    return Suite(poi, function, tm, seed)
