"""Command-line front end.

Two modes, chosen by how many ``-f`` groups are given:

* one program: generate a suite per input function and save it under
  ``suite/<fun>_<arity>.suite``;
* two programs: generate the suite on the first, replay it on the second
  and print a report per function.

Exit status: 0 when no function shows a mismatch, 1 otherwise, 2 on usage
or input errors.
"""
from __future__ import annotations

import argparse
import logging
import shlex
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

from .compare import render_report, run_comparison
from .instrument import Poi, PoiNotFound, UnboundVariable, UnsupportedPoiPosition, instrument
from .interp import ClosureInTrace
from .parser import FeatherSyntaxError, parse_file
from .tgen import TgenStats, build_suite, save_suite
from .typeinfer import format_clause_types, infer_clause_types

log = logging.getLogger("evocheck")

SUITE_DIR = "suite"


@dataclass
class CliConfig:
    old: Poi
    new: Optional[Poi] = None
    funs: list = field(default_factory=list)  # "name/arity"; empty = default set
    tests: Optional[int] = None
    timeout: Optional[float] = None
    seed: int = 0
    size: int = 10
    initial_budget: int = 32
    results_dir: str = "./results"
    dump_types: bool = False
    dump_config: bool = False


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ parsing

class _Group(argparse.Action):
    """``-f`` opens a program group; ``-li``/``-var``/``-oc`` fill the
    most recent one."""

    def __call__(self, parser, namespace, value, option_string=None):
        groups = getattr(namespace, "groups", None)
        if groups is None:
            groups = []
            namespace.groups = groups
        if self.dest == "file":
            if len(groups) == 2:
                parser.error("at most two -f groups are allowed")
            groups.append({"file": value})
            return
        if not groups:
            parser.error(f"{option_string} must follow -f")
        if self.dest in groups[-1]:
            parser.error(f"{option_string} given twice for {groups[-1]['file']}")
        groups[-1][self.dest] = value


def _function_list(text: str) -> list:
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, sep, arity = part.partition("/")
        if not sep or not name or not arity.isdigit():
            raise argparse.ArgumentTypeError(f"expected name/arity, got {part!r}")
        out.append(f"{name}/{int(arity)}")
    return out


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _non_negative(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def _seconds(text: str) -> float:
    s = float(text)
    if not s > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return s


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="evocheck", allow_abbrev=False,
        usage="evocheck -f FILE -li LINE -var NAME [-oc K] [-f FILE -li LINE -var NAME [-oc K]]\n"
              "                [-funs f/a[,g/b...]] (-to SECONDS | --tests N) [options]",
        description="Trace-based regression checking between two versions of a Feather program.")
    g = p.add_argument_group("point of interest (give once or twice)")
    g.add_argument("-f", dest="file", action=_Group, metavar="FILE", help="source file")
    g.add_argument("-li", dest="line", action=_Group, type=_positive, metavar="LINE")
    g.add_argument("-var", dest="var", action=_Group, metavar="NAME")
    g.add_argument("-oc", dest="occurrence", action=_Group, type=_positive, metavar="K",
                   help="occurrence of NAME on LINE (default 1)")
    p.add_argument("-funs", "-fun", dest="funs", type=_function_list, metavar="f/a[,g/b...]",
                   help="input functions (default: functions with a spec, else all)")
    p.add_argument("-to", dest="timeout", type=_seconds, metavar="SECONDS",
                   help="stop generation after this many seconds")
    p.add_argument("--tests", type=_positive, metavar="N", help="stop generation at N test cases")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=_non_negative, default=10)
    p.add_argument("--initial-budget", type=_positive, default=32, dest="initial_budget")
    p.add_argument("--results", default="./results", dest="results_dir", metavar="DIR")
    p.add_argument("--dump-types", action="store_true", dest="dump_types",
                   help="print inferred clause types and exit")
    p.add_argument("--dump-config", action="store_true", dest="dump_config",
                   help="print the parsed configuration as flags and exit")
    return p


def parse_args(argv) -> CliConfig:
    parser = build_parser()
    ns = parser.parse_args(list(argv))
    groups = getattr(ns, "groups", None) or []
    if not groups:
        parser.error("at least one -f FILE -li LINE -var NAME group is required")
    pois = []
    for grp in groups:
        missing = [flag for flag, key in (("-li", "line"), ("-var", "var")) if key not in grp]
        if missing:
            parser.error(f"{' and '.join(missing)} missing for {grp['file']}")
        pois.append(Poi(grp["file"], grp["line"], grp["var"], grp.get("occurrence", 1)))
    if ns.tests is None and ns.timeout is None and not (ns.dump_types or ns.dump_config):
        parser.error("one of --tests or -to is required")
    return CliConfig(
        old=pois[0], new=pois[1] if len(pois) > 1 else None, funs=ns.funs or [],
        tests=ns.tests, timeout=ns.timeout, seed=ns.seed, size=ns.size,
        initial_budget=ns.initial_budget, results_dir=ns.results_dir,
        dump_types=ns.dump_types, dump_config=ns.dump_config)


def to_argv(cfg: CliConfig) -> list:
    """Flags that :func:`parse_args` turns back into ``cfg``."""
    out = []
    for poi in (cfg.old, cfg.new):
        if poi is not None:
            out += ["-f", poi.file, "-li", str(poi.line), "-var", poi.var, "-oc", str(poi.occurrence)]
    if cfg.funs:
        out += ["-funs", ",".join(cfg.funs)]
    if cfg.timeout is not None:
        out += ["-to", repr(cfg.timeout)]
    if cfg.tests is not None:
        out += ["--tests", str(cfg.tests)]
    out += ["--seed", str(cfg.seed), "--size", str(cfg.size),
            "--initial-budget", str(cfg.initial_budget), "--results", cfg.results_dir]
    if cfg.dump_types:
        out.append("--dump-types")
    if cfg.dump_config:
        out.append("--dump-config")
    return out


# ------------------------------------------------------------------ running

def default_functions(module) -> list:
    specced = [f"{f.name}/{f.arity}" for f in module.functions if module.spec(f.name, f.arity)]
    return specced or [f"{f.name}/{f.arity}" for f in module.functions]


def _load(path: str):
    try:
        return parse_file(path)
    except FeatherSyntaxError as exc:
        raise UsageError(f"{path}:{exc}") from None


def _selected(cfg: CliConfig, module) -> list:
    funs = cfg.funs or default_functions(module)
    for fa in funs:
        name, arity = fa.split("/")
        if module.function(name, int(arity)) is None:
            raise UsageError(f"{fa} is not defined in {cfg.old.file}")
    return funs


def run(cfg: CliConfig, out=None) -> int:
    out = out if out is not None else sys.stdout
    if cfg.dump_config:
        print(shlex.join(to_argv(cfg)), file=out)
        return 0
    old = _load(cfg.old.file)
    funs = _selected(cfg, old)
    if cfg.dump_types:
        for fa in funs:
            name, arity = fa.split("/")
            print(format_clause_types(infer_clause_types(old, name, int(arity), strict=False)), file=out)
        return 0
    new = _load(cfg.new.file) if cfg.new is not None else None
    old_inst = instrument(old, cfg.old)
    if new is not None:
        instrument(new, cfg.new)  # surface POI errors before generating anything
    mismatching = 0
    for fa in funs:
        name, arity = fa.split("/")
        stats = TgenStats()
        t0 = time.monotonic()
        suite = build_suite(old, cfg.old, name, int(arity), tests=cfg.tests, timeout=cfg.timeout,
                            seed=cfg.seed, size=cfg.size, initial_budget=cfg.initial_budget,
                            instrumented=old_inst, stats=stats)
        log.info("%s: %d test cases, %d traces, %d iterations in %.1fs", fa, suite.trace_map.size,
                 len(suite.trace_map), stats.iterations, time.monotonic() - t0)
        if new is None:
            path = save_suite(suite, SUITE_DIR)
            print(f"Function: {fa}", file=out)
            print(f"Generated test cases: {suite.trace_map.size} "
                  f"(reaching the point of interest: {suite.reached_count})", file=out)
            print(f"Suite saved at: {path}", file=out)
            continue
        report = run_comparison(old, new, cfg.old, cfg.new, suite, results_dir=cfg.results_dir,
                                old_instrumented=old_inst)
        print(render_report(report), file=out)
        mismatching += report.mismatching
    return 1 if mismatching else 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return run(cfg)
    except (OSError, PoiNotFound, UnsupportedPoiPosition,
            UnboundVariable, ClosureInTrace, UsageError) as exc:
        print(f"evocheck: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
