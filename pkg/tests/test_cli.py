import json

import pytest

from parkopt.cli import build_parser, main
from parkopt.scenarios import builtin_scenario, save_scenario


def test_single_cell_succeeds(tmp_path, capsys):
    code = main(["--scenario", "vertical", "--formulation", "eq17", "--guess", "hybrid-astar",
                 "--out", str(tmp_path)])
    assert code == 0
    assert "1/1 cells optimal and verified" in capsys.readouterr().out
    assert (tmp_path / "matrix.csv").exists() and (tmp_path / "vertical.svg").exists()
    assert (tmp_path / "vertical_eq17_hybrid-astar.json").exists()


def test_unverified_cell_exits_one(tmp_path):
    opts = tmp_path / "opts.json"
    opts.write_text(json.dumps({"max_iter": 1}))
    code = main(["--scenario", "vertical", "--formulation", "eq17", "--guess", "hybrid-astar",
                 "--out", str(tmp_path / "out"), "--solver-opts", str(opts)])
    assert code == 1
    assert "MaxIter" in (tmp_path / "out" / "matrix.csv").read_text()


def test_scenario_file(tmp_path):
    path = tmp_path / "sc.json"
    save_scenario(builtin_scenario("oblique"), path)
    assert main(["--scenario", str(path), "--formulation", "eq16", "--guess", "hybrid-astar",
                 "--out", str(tmp_path / "o")]) == 0


@pytest.mark.parametrize("argv", [
    ["--scenario", "garage"],
    ["--scenario", "vertical", "--formulation", "eq15"],
    ["--scenario", "vertical", "--guess", "rrt"],
    ["--scenario", "vertical", "--kf", "1"],
    ["--scenario", "vertical", "--solver-opts", "/nonexistent/opts.toml"],
])
def test_bad_input_exits_two(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 2
    assert "plan: error" in capsys.readouterr().err


def test_parser_defaults():
    args = build_parser().parse_args(["--scenario", "all", "--out", "x"])
    assert (args.formulation, args.guess, args.kf, args.refine, args.workers) == ("all", "all", 20, 10, 1)
