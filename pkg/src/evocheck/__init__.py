"""Trace-based regression checking for Feather, a small Erlang-like
language: pick a variable occurrence in two versions of a program, generate
inputs on the old one, and report inputs whose value sequences differ."""

from .compare import Report, render_report, run_comparison
from .gen import Itc, Rng
from .instrument import Poi, instrument
from .interp import Outcome, eval_call
from .parser import parse, parse_file
from .tgen import Suite, TraceMap, build_suite, load_suite, save_suite, tgen

__all__ = [
    "Itc", "Outcome", "Poi", "Report", "Rng", "Suite", "TraceMap", "build_suite",
    "eval_call", "instrument", "load_suite", "parse", "parse_file", "render_report",
    "run_comparison", "save_suite", "tgen",
]
