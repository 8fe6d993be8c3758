"""Happy-numbers use case: one suite on happy0, replayed on the faithful
rewrite and on the two seeded bugs.

    python scripts/happy_numbers.py --tests 300 --seed 42
"""
import argparse
import time
from dataclasses import dataclass
from pathlib import Path

from evocheck.compare import render_report, run_comparison
from evocheck.instrument import Poi, instrument
from evocheck.parser import parse_file
from evocheck.tgen import TgenStats, build_suite

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@dataclass
class Config:
    tests: int = 300
    seed: int = 42
    size: int = 10
    initial_budget: int = 32
    results: str = "results/happy"
    old_line: int = 9
    new_line: int = 18
    versions: tuple = ("happy1", "happy1_bug_a", "happy1_bug_b")


def run(cfg: Config) -> None:
    t0 = time.monotonic()
    old = parse_file(CORPUS / "happy0.fth")
    poi = Poi("happy0.fth", cfg.old_line, "Happy")
    inst = instrument(old, poi)
    stats = TgenStats()
    suite = build_suite(old, poi, "main", 2, tests=cfg.tests, seed=cfg.seed, size=cfg.size,
                        initial_budget=cfg.initial_budget, instrumented=inst, stats=stats)
    print(f"# suite: {suite.trace_map.size} tests, {len(suite.trace_map)} distinct traces, "
          f"{stats.novel} novel / {stats.stalls} stalls, {time.monotonic() - t0:.1f}s")
    for name in cfg.versions:
        new = parse_file(CORPUS / f"{name}.fth")
        report = run_comparison(old, new, poi, Poi(f"{name}.fth", cfg.new_line, "Happy"), suite,
                                results_dir=f"{cfg.results}/{name}", old_instrumented=inst)
        print(f"\n## {name}")
        print(render_report(report))
        print(f"# {time.monotonic() - t0:.1f}s elapsed")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    defaults = Config()
    ap.add_argument("--tests", type=int, default=defaults.tests)
    ap.add_argument("--seed", type=int, default=defaults.seed)
    ap.add_argument("--size", type=int, default=defaults.size)
    ap.add_argument("--results", default=defaults.results)
    args = ap.parse_args()
    run(Config(tests=args.tests, seed=args.seed, size=args.size, results=args.results))


if __name__ == "__main__":
    main()
