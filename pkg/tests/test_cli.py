"""Tests for the qubo-anneal command line (qubo_annealer/cli.py).

Coverage:
  * numpart: file and generated inputs, recomputable report fields,
    --expect-optimal exit code, byte-identical deterministic blocks;
  * graphpart / sweepk: assignments whose modularity recomputes to the
    reported value, best K selection, infeasible exit code, sweep reports
    written as both JSON and CSV;
  * configuration resolution: presets, flag overrides, --config files;
  * output formats and error handling (exit code 1 with a message on stderr).
"""

import io
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from qubo_annealer.cli import (
    CSV_COLUMNS,
    EXIT_EXPECTATION,
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_USAGE,
    build_parser,
    companion_path,
    main,
    resolve_run_config,
)
from qubo_annealer.graph_io import load_builtin, load_edge_list
from qubo_annealer.problems.graph_partition import PartitionAssignment, modularity
from qubo_annealer.problems.number_partition import generate_number_set
from qubo_annealer.solver_config import SolverConfig

FAST = ["--restarts", "2", "--steps", "300"]


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _json(capsys, argv):
    code, out, _ = _run(capsys, argv)
    return code, json.loads(out)


@pytest.fixture
def numbers_file(tmp_path):
    path = tmp_path / "numbers.txt"
    path.write_text("2\n3\n5\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def pair_edges(tmp_path):
    path = tmp_path / "pair.edges"
    path.write_text("0 1\n", encoding="utf-8")
    return str(path)


# ─────────────────────────── numpart ───────────────────────────


def test_numpart_file(capsys, numbers_file):
    code, report = _json(capsys, ["numpart", numbers_file, *FAST])
    assert code == EXIT_OK
    result = report["number_partition"]
    assert (result["n"], result["total"], result["d"], result["energy"]) == (3, 10, 0, 0.0)
    assert report["schema_version"] == "1.0"
    assert report["config"]["source"] == numbers_file
    assert report["graph"] is None


def test_numpart_fields_recompute_from_bits(capsys):
    code, report = _json(capsys, ["numpart", "--generate", "40", "--max-value", "1000", "--seed", "3", *FAST])
    assert code == EXIT_OK
    result = report["number_partition"]
    values = generate_number_set(40, 1000, seed=3).values
    bits = np.asarray(result["bits"])
    assert result["sum_a"] == int(values @ bits)
    assert result["sum_b"] == int(values.sum()) - result["sum_a"]
    assert result["d"] == abs(result["sum_b"] - result["sum_a"])
    assert result["energy"] == result["d"] ** 2
    assert result["karmarkar_karp_d"] % 2 == int(values.sum()) % 2


def test_numpart_expect_optimal_unmet(capsys, tmp_path):
    path = tmp_path / "lopsided.txt"
    path.write_text("1\n1000\n", encoding="utf-8")
    code, report = _json(capsys, ["numpart", str(path), "--expect-optimal", *FAST])
    assert code == EXIT_EXPECTATION
    assert report["number_partition"]["d"] == 999


def test_numpart_expect_optimal_met(capsys, numbers_file):
    code, _ = _json(capsys, ["numpart", numbers_file, "--expect-optimal", *FAST])
    assert code == EXIT_OK


def test_numpart_deterministic_report(capsys):
    argv = ["numpart", "--generate", "30", "--seed", "8", "--trace-every", "50", *FAST]
    _, first = _json(capsys, argv)
    _, second = _json(capsys, argv)
    first.pop("timing")
    second.pop("timing")
    assert json.dumps(first) == json.dumps(second)
    assert first["number_partition"]["trace"]


def test_numpart_needs_input(capsys):
    code, out, err = _run(capsys, ["numpart", *FAST])
    assert code == EXIT_USAGE
    assert out == ""
    assert "qubo-anneal: error:" in err


def test_numpart_missing_file(capsys, tmp_path):
    code, _, err = _run(capsys, ["numpart", str(tmp_path / "absent.txt")])
    assert code == EXIT_USAGE
    assert "absent.txt" in err


def test_numpart_bad_value_line(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("4\nfour\n", encoding="utf-8")
    code, _, err = _run(capsys, ["numpart", str(path)])
    assert code == EXIT_USAGE
    assert "line 2" in err


def test_numpart_csv(capsys, numbers_file):
    code, out, _ = _run(capsys, ["numpart", numbers_file, "--format", "csv", *FAST])
    assert code == EXIT_OK
    table = pd.read_csv(io.StringIO(out))
    assert list(table.columns) == CSV_COLUMNS["numpart"]
    assert table.loc[0, "d"] == 0


# ─────────────────────────── graphpart / sweepk ───────────────────────────


def test_graphpart_builtin_modularity_recomputes(capsys):
    code, report = _json(capsys, ["graphpart", "--builtin", "karate", "--k", "2", *FAST])
    assert code == EXIT_OK
    (row,) = report["partitions"]
    graph = load_builtin("karate")
    groups = [row["assignment"][str(label)] for label in graph.labels]
    assert modularity(graph, PartitionAssignment.of(groups, 2)) == pytest.approx(row["modularity"], abs=1e-9)
    assert sum(row["group_sizes"]) == 34
    assert report["graph"]["n"] == 34
    assert report["best_k"] == 2
    assert report["config"]["lambda"] == 1.0


def test_graphpart_electrical_labels(capsys, tmp_path):
    path = tmp_path / "lines.csv"
    path.write_text("from_bus,to_bus,r_ohm,x_ohm\n7,9,1,1\n9,12,1,1\n12,7,2,2\n", encoding="utf-8")
    code, report = _json(capsys, ["graphpart", "--electrical", str(path), "--k", "1", *FAST])
    assert code == EXIT_OK
    row = report["partitions"][0]
    assert set(row["assignment"]) == {"7", "9", "12"}
    assert row["modularity"] == pytest.approx(0.0, abs=1e-12)
    assert row["boundary"]["boundary_count"] == 0


def test_graphpart_infeasible_exit(capsys, pair_edges):
    # with a large resolution every set bit costs energy, so the empty state wins
    argv = [
        "graphpart", "--edges", pair_edges, "--k", "2", "--onehot", "penalty",
        "--one-hot-penalty", "0", "--lambda", "0", "--gamma", "10", *FAST,
    ]
    code, report = _json(capsys, argv)
    assert code == EXIT_INFEASIBLE
    row = report["partitions"][0]
    assert row["feasible"] is False
    assert row["modularity"] is None
    assert row["infeasible"]["zero_hot"] == ["0", "1"]
    assert report["best_k"] is None


def test_sweepk_rows_and_best_k(capsys, tmp_path):
    path = tmp_path / "two_triangles.edges"
    path.write_text("0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n2 3\n", encoding="utf-8")
    code, report = _json(capsys, ["sweepk", "--edges", str(path), "--k-min", "1", "--k-max", "3", *FAST])
    assert code == EXIT_OK
    assert [row["k"] for row in report["partitions"]] == [1, 2, 3]
    graph = load_edge_list(str(path))
    for row in report["partitions"]:
        groups = [row["assignment"][str(label)] for label in graph.labels]
        assert modularity(graph, PartitionAssignment.of(groups, row["k"])) == pytest.approx(row["modularity"], abs=1e-9)
    best = max(report["partitions"], key=lambda row: (row["modularity"], -row["k"]))
    assert report["best_k"] == best["k"]
    assert set(report["timing"]["solve_seconds"]) == {"1", "2", "3"}


def test_sweepk_csv(capsys, pair_edges):
    code, out, _ = _run(capsys, ["sweepk", "--edges", pair_edges, "--k-min", "1", "--k-max", "2", "--format", "csv", *FAST])
    assert code == EXIT_OK
    table = pd.read_csv(io.StringIO(out))
    assert list(table.columns) == CSV_COLUMNS["graph"]
    assert table["k"].tolist() == [1, 2]


def test_sweepk_out_writes_json_and_csv(capsys, tmp_path, pair_edges):
    out = tmp_path / "sweep.json"
    code, printed, _ = _run(capsys, ["sweepk", "--edges", pair_edges, "--k-min", "1", "--k-max", "2", "--out", str(out), *FAST])
    assert code == EXIT_OK
    assert printed == ""
    report = json.loads(out.read_text(encoding="utf-8"))
    table = pd.read_csv(tmp_path / "sweep.csv")
    assert list(table.columns) == CSV_COLUMNS["graph"]
    assert table["k"].tolist() == [row["k"] for row in report["partitions"]]
    assert table["modularity"].tolist() == pytest.approx([row["modularity"] for row in report["partitions"]])


def test_companion_path():
    assert companion_path("runs/sweep.json", "json") == Path("runs/sweep.csv")
    assert companion_path("runs/sweep.csv", "csv") == Path("runs/sweep.json")
    assert companion_path("runs/sweep.csv", "json") == Path("runs/sweep.csv.csv")
    assert companion_path("sweep", "csv") == Path("sweep.json")


def test_sweepk_inverted_range(capsys, pair_edges):
    code, _, err = _run(capsys, ["sweepk", "--edges", pair_edges, "--k-min", "3", "--k-max", "2"])
    assert code == EXIT_USAGE
    assert "k-min" in err


def test_graphpart_deterministic_report(capsys):
    argv = ["graphpart", "--builtin", "ieee33", "--k", "3", "--seed", "4", *FAST]
    _, first = _json(capsys, argv)
    _, second = _json(capsys, argv)
    first.pop("timing")
    second.pop("timing")
    assert first == second


def test_baseline_sa_uses_penalty_mode(capsys, pair_edges):
    code, report = _json(capsys, ["graphpart", "--edges", pair_edges, "--k", "2", "--baseline-sa", *FAST])
    assert code in (EXIT_OK, EXIT_INFEASIBLE)
    assert report["solver"]["engine"] == "sequential-sa"
    assert report["solver"]["onehot"] == "penalty"


def test_baseline_sa_with_moves_is_rejected(capsys, pair_edges):
    code, _, err = _run(capsys, ["graphpart", "--edges", pair_edges, "--k", "2", "--baseline-sa", "--onehot", "moves"])
    assert code == EXIT_USAGE
    assert "penalty" in err


def test_graph_sources_are_exclusive():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["graphpart", "--builtin", "karate", "--edges", "x", "--k", "2"])
    assert info.value.code == EXIT_USAGE


def test_graphpart_requires_k():
    with pytest.raises(SystemExit) as info:
        main(["graphpart", "--builtin", "karate"])
    assert info.value.code == EXIT_USAGE


# ─────────────────────────── configuration ───────────────────────────


def _args(argv):
    return build_parser().parse_args(argv)


def test_preset_scales_steps_with_problem_size():
    config = resolve_run_config(_args(["graphpart", "--builtin", "karate", "--k", "4"]), SolverConfig(), units=34)
    assert config.restarts == 4
    assert config.steps == 200 * 34
    assert config.preset == "quick"
    paper = resolve_run_config(
        _args(["graphpart", "--builtin", "karate", "--k", "4", "--preset", "paper"]), SolverConfig(), units=34
    )
    assert (paper.restarts, paper.steps) == (20, 34000)


def test_flags_override_preset():
    args = _args(["numpart", "--generate", "10", "--restarts", "7", "--steps", "99", "--time-limit-sec", "2"])
    config = resolve_run_config(args, SolverConfig(), units=10)
    assert (config.restarts, config.steps, config.time_limit_sec) == (7, 99, 2.0)


def test_paper_numpart_preset_has_time_limit():
    args = _args(["numpart", "--generate", "10", "--preset", "paper"])
    assert resolve_run_config(args, SolverConfig(), units=10).time_limit_sec == 30


def test_paper_preset_runs(capsys, numbers_file):
    code, report = _json(capsys, ["numpart", numbers_file, "--preset", "paper", "--steps", "300"])
    assert code == EXIT_OK
    assert report["config"]["preset"] == "paper"
    assert report["config"]["restarts"] == 10


def test_unknown_preset(capsys, numbers_file):
    code, _, err = _run(capsys, ["numpart", numbers_file, "--preset", "marathon"])
    assert code == EXIT_USAGE
    assert "marathon" in err


def test_config_file_presets(capsys, tmp_path, numbers_file):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"presets": {"numpart": {"tiny": {"restarts": 1, "sweeps": 5}}}}), encoding="utf-8")
    code, report = _json(capsys, ["numpart", numbers_file, "--config", str(path), "--preset", "tiny"])
    assert code == EXIT_OK
    assert (report["config"]["restarts"], report["config"]["steps"]) == (1, 15)


def test_missing_config_file(capsys, tmp_path, numbers_file):
    code, _, err = _run(capsys, ["numpart", numbers_file, "--config", str(tmp_path / "none.json")])
    assert code == EXIT_USAGE
    assert "config file not found" in err


def test_out_file(capsys, tmp_path, numbers_file):
    destination = tmp_path / "report.json"
    code, out, _ = _run(capsys, ["numpart", numbers_file, "--out", str(destination), *FAST])
    assert code == EXIT_OK
    assert out == ""
    assert json.loads(destination.read_text(encoding="utf-8"))["command"] == "numpart"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
