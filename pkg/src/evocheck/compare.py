"""Replay a suite on a new program version and report trace differences."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

from .instrument import Poi, instrument
from .interp import DEFAULT_MAX_STEPS, Outcome, eval_call
from .tgen import Suite
from .values import format_call, format_trace

MATCH = "Match"
LENGTH_DIFF = "LengthDiff"
VALUE_DIFF = "ValueDiff"
MISSING = "MissingFunction"
RULE = "-" * 28
BANNER = "Both versions of the program generate identical traces for the point of interest"


def compare_traces(old: tuple, new: tuple) -> str:
    if len(old) != len(new):
        return LENGTH_DIFF
    return MATCH if tuple(old) == tuple(new) else VALUE_DIFF


@dataclass
class Mismatch:
    itc: object
    old_trace: tuple
    new_trace: tuple
    kind: str
    old_outcome: str = ""
    new_outcome: str = ""
    diagnostic: Optional[str] = None


@dataclass
class Report:
    function: str
    generated: int
    mismatches: list
    results_path: Optional[str]
    old_label: str
    new_label: str
    warnings: list = field(default_factory=list)

    @property
    def mismatching(self) -> int:
        return len(self.mismatches)

    @property
    def first_error(self) -> Optional[Mismatch]:
        return self.mismatches[0] if self.mismatches else None

    @property
    def percentage(self) -> str:
        """``100 * mismatching / generated`` truncated to two decimals."""
        if self.generated == 0:
            return "0.00"
        hundredths = 10000 * self.mismatching // self.generated
        return f"{hundredths // 100}.{hundredths % 100:02d}"


def trace_label(module_name: str, poi: Poi) -> str:
    return f"{module_name} trace {poi.label()}"


def _outcome(o: Optional[Outcome]) -> str:
    return o.summary() if o is not None else "unknown"


def run_comparison(old_ast, new_ast, poi_old: Poi, poi_new: Poi, suite: Suite,
                   results_dir: Optional[str] = "results",
                   max_steps: int = DEFAULT_MAX_STEPS, old_instrumented=None) -> Report:
    """Replay ``suite`` on ``new_ast`` instrumented at ``poi_new``.

    Traces cut short by the step budget on either side are compared on
    their common prefix; agreement there is a match with a warning.
    """
    new_inst = instrument(new_ast, poi_new)
    old_label = trace_label(old_ast.name, poi_old)
    new_label = trace_label(new_ast.name, poi_new)
    name, arity = suite.name, suite.arity
    present = new_ast.function(name, arity) is not None
    mismatches, warnings = [], []
    generated = 0
    for old_trace, itcs in suite.trace_map.items():
        for itc in itcs:
            generated += 1
            old_o = suite.outcomes.get(itc)
            if old_o is None and old_instrumented is not None:
                old_o = eval_call(old_instrumented, itc.function, itc.args, max_steps=max_steps)
            if not present:
                mismatches.append(Mismatch(itc, old_trace, (), MISSING, _outcome(old_o), "error undef",
                                           f"{name}/{arity} is not defined in {new_ast.name}"))
                continue
            new_o = eval_call(new_inst, itc.function, itc.args, max_steps=max_steps)
            new_trace = new_o.trace
            kind = compare_traces(old_trace, new_trace)
            cut = new_o.error == "step_limit" or (old_o is not None and old_o.error == "step_limit")
            if kind != MATCH and cut:
                n = min(len(old_trace), len(new_trace))
                if tuple(old_trace[:n]) == tuple(new_trace[:n]):
                    warnings.append(f"WARN {format_call(itc.function, itc.args)}: step budget "
                                    f"exhausted, traces agree on the first {n} values")
                    continue
            if kind == MATCH:
                if old_o is not None and not old_o.same_result(new_o):
                    warnings.append(f"WARN {format_call(itc.function, itc.args)}: same trace, "
                                    f"outcome {old_o.summary()} became {new_o.summary()}")
                continue
            mismatches.append(Mismatch(itc, old_trace, new_trace, kind,
                                       _outcome(old_o), new_o.summary()))
    path = None
    if results_dir is not None and mismatches:
        path = os.path.join(results_dir, f"{name}_{arity}.txt")
        write_results(mismatches, path, poi_old, poi_new)
    return Report(suite.function, generated, mismatches, path, old_label, new_label, warnings)


def render_report(report: Report) -> str:
    lines = [f"Function: {report.function}", RULE,
             f"Generated test cases: {report.generated}"]
    if not report.mismatches:
        lines += [BANNER, RULE]
    else:
        lines.append(f"Mismatching test cases: {report.mismatching} ({report.percentage}%)")
        if report.results_path:
            shown = report.results_path
            if not os.path.isabs(shown) and not shown.startswith("."):
                shown = "./" + shown
            lines.append(f"All mismatching results were saved at: {shown}")
        first = report.first_error
        lines.append("--- First error detected ---")
        lines.append(f"Call: {format_call(first.itc.function, first.itc.args)}")
        if first.diagnostic:
            lines.append(f"Error: {first.diagnostic}")
        lines.append(f"{report.old_label}: {format_trace(first.old_trace)}")
        lines.append("")
        lines.append(f"{report.new_label}: {format_trace(first.new_trace)}")
    lines += report.warnings
    return "\n".join(lines)


def write_results(mismatches, path: str, poi_old: Poi, poi_new: Poi) -> None:
    """One block per mismatch, in suite order."""
    old_label = f"old trace {poi_old.label()}"
    new_label = f"new trace {poi_new.label()}"
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for m in mismatches:
            fh.write(f"Call: {format_call(m.itc.function, m.itc.args)}\n\n")
            if m.diagnostic:
                fh.write(f"Error: {m.diagnostic}\n\n")
            fh.write(f"{old_label}: {format_trace(m.old_trace)}\n\n")
            fh.write(f"{new_label}: {format_trace(m.new_trace)}\n")
            fh.write(RULE + "\n")
