import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS
from evocheck.cli import CliConfig, main, parse_args, run, to_argv
from evocheck.instrument import Poi
from evocheck.tgen import load_suite

HAPPY0 = str(CORPUS / "happy0.fth")
HAPPY1 = str(CORPUS / "happy1.fth")
BUG_A = str(CORPUS / "happy1_bug_a.fth")


def test_two_groups():
    cfg = parse_args(["-f", "a.fth", "-li", "9", "-var", "Happy", "-oc", "1",
                      "-f", "b.fth", "-li", "18", "-var", "Happy", "-funs", "main/2", "-to", "15"])
    assert cfg.old == Poi("a.fth", 9, "Happy", 1)
    assert cfg.new == Poi("b.fth", 18, "Happy", 1)
    assert cfg.funs == ["main/2"] and cfg.timeout == 15.0 and cfg.tests is None


def test_bracketed_function_list():
    cfg = parse_args(["-f", "a", "-li", "1", "-var", "X", "-fun", "[main/2, f/0]", "--tests", "3"])
    assert cfg.funs == ["main/2", "f/0"] and cfg.new is None


@pytest.mark.parametrize("argv", [
    ["-f", "a", "-li", "9", "--tests", "5"],                  # no -var
    ["-f", "a", "-var", "X", "--tests", "5"],                 # no -li
    ["-li", "9", "-var", "X", "--tests", "5"],                # no -f
    ["-f", "a", "-li", "9", "-var", "X"],                     # no stopping rule
    ["-f", "a", "-li", "0", "-var", "X", "--tests", "5"],
    ["-f", "a", "-li", "9", "-var", "X", "--tests", "0"],
    ["-f", "a", "-li", "9", "-var", "X", "-to", "-1"],
    ["-f", "a", "-li", "9", "-var", "X", "-funs", "main", "--tests", "5"],
    ["-f", "a", "-li", "1", "-var", "X", "-f", "b", "-li", "1", "-var", "X",
     "-f", "c", "-li", "1", "-var", "X", "--tests", "5"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "usage: evocheck" in capsys.readouterr().err


names = st.from_regex(r"[a-z][a-z0-9_]{0,6}(\.fth)?", fullmatch=True)
variables = st.from_regex(r"[A-Z][A-Za-z0-9_]{0,5}", fullmatch=True)
pois = st.builds(Poi, names, st.integers(1, 500), variables, st.integers(1, 4))
configs = st.builds(
    CliConfig, old=pois, new=st.none() | pois,
    funs=st.lists(st.from_regex(r"[a-z][a-z_]{0,5}/[0-4]", fullmatch=True), max_size=3),
    tests=st.none() | st.integers(1, 10 ** 4),
    timeout=st.none() | st.floats(0.001, 1e4),
    seed=st.integers(-10, 10 ** 9), size=st.integers(0, 50), initial_budget=st.integers(1, 99),
    results_dir=names, dump_types=st.booleans(), dump_config=st.booleans(),
).filter(lambda c: c.tests is not None or c.timeout is not None)


@settings(max_examples=200)
@given(configs)
def test_config_round_trip(cfg):
    assert parse_args(to_argv(cfg)) == cfg


def test_dump_config(capsys):
    assert main(["-f", "a.fth", "-li", "3", "-var", "X", "--tests", "7", "--dump-config"]) == 0
    out = capsys.readouterr().out.strip()
    assert out.startswith("-f a.fth -li 3 -var X -oc 1") and "--tests 7" in out


def test_dump_types(capsys):
    assert main(["-f", HAPPY0, "-li", "9", "-var", "Happy", "--dump-types"]) == 0
    assert "main/2 clause 1: (pos_integer(), pos_integer())" in capsys.readouterr().out


def test_generation_only(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["-f", HAPPY0, "-li", "9", "-var", "Happy", "--tests", "15"]) == 0
    out = capsys.readouterr().out
    assert "Function: main/2" in out and "Suite saved at: suite/main_2.suite" in out
    suite = load_suite(str(tmp_path / "suite" / "main_2.suite"))
    assert suite.poi.label() == "(9,Happy,1)" and suite.trace_map.size >= 15


def test_comparison_exit_codes(tmp_path, capsys):
    base = ["-f", HAPPY0, "-li", "9", "-var", "Happy", "-f"]
    tail = ["-li", "18", "-var", "Happy", "--tests", "40", "--results", str(tmp_path)]
    assert main(base + [HAPPY1] + tail) == 0
    assert "identical traces" in capsys.readouterr().out
    assert main(base + [BUG_A] + tail) == 1
    out = capsys.readouterr().out
    assert "--- First error detected ---" in out
    assert (tmp_path / "main_2.txt").exists()


@pytest.mark.parametrize("argv", [
    ["-f", "/nonexistent.fth", "-li", "1", "-var", "X", "--tests", "3"],
    ["-f", HAPPY0, "-li", "9", "-var", "Nope", "--tests", "3"],
    ["-f", HAPPY0, "-li", "9", "-var", "Happy", "-funs", "nope/3", "--tests", "3"],
])
def test_input_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("evocheck: error:")


def test_syntax_error_reports_path(tmp_path, capsys):
    bad = tmp_path / "bad.fth"
    bad.write_text("main( -> 1.\n")
    assert main(["-f", str(bad), "-li", "1", "-var", "X", "--tests", "3"]) == 2
    assert str(bad) in capsys.readouterr().err


def test_run_writes_to_given_stream(tmp_path, monkeypatch):
    import io
    monkeypatch.chdir(tmp_path)
    buf = io.StringIO()
    cfg = parse_args(["-f", HAPPY0, "-li", "9", "-var", "Happy", "--tests", "5"])
    assert run(cfg, buf) == 0 and "Generated test cases:" in buf.getvalue()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "evocheck", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "-var NAME" in r.stdout
