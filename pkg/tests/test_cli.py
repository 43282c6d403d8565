import json

import pytest

from clawpack import EXIT_FAILED, EXIT_INPUT, EXIT_OK, main
from data import read_instance, save_instance
from generators import gen_random_packing


@pytest.fixture
def berman(tmp_path):
    inst, start = tmp_path / "berman4.txt", tmp_path / "a.json"
    assert main(["gen", "berman", "--d", "4", "--out", str(inst), "--start-out", str(start)]) == EXIT_OK
    return inst, start


def run_json(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, json.loads(out.read_text())


def test_gen_writes_instance_and_start(berman):
    inst, start = berman
    assert read_instance(inst).n == 9
    assert json.loads(start.read_text()) == {"members": [0, 1, 2]}


def test_solve_from_fixed_point_makes_no_moves(berman, tmp_path):
    inst, start = berman
    code, trace = run_json(["solve", "--in", str(inst), "--algo", "squareimp", "--start", str(start)], tmp_path)
    assert code == EXIT_OK
    assert trace["iterations"] == 0
    assert trace["final_weight"] == "3/1"


def test_logimp_escapes_the_fixed_point(berman, tmp_path):
    inst, start = berman
    code, trace = run_json(["solve", "--in", str(inst), "--algo", "logimp", "--start", str(start)], tmp_path)
    assert code == EXIT_OK
    assert trace["final_weight"] == "6/1"
    assert trace["improvements"][0]["kind"] == "circular"


def test_exact_oracle(berman, tmp_path):
    inst, _ = berman
    code, result = run_json(["solve", "--in", str(inst), "--exact"], tmp_path)
    assert code == EXIT_OK
    assert result["optimum"] == "6/1"
    assert result["members"] == [3, 4, 5, 6, 7, 8]
    assert result["optimal"] is True


def test_repeated_solves_are_identical(tmp_path):
    inst = save_instance(gen_random_packing(16, 3, 12, seed=9), tmp_path / "r.json")
    outs = []
    for name in ("one.json", "two.json"):
        assert main(["solve", "--in", str(inst), "--algo", "logimp", "--seed", "3", "--out", str(tmp_path / name)]) == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]


def test_verify_passes_at_the_fixed_point(berman, tmp_path):
    inst, start = berman
    code, report = run_json(["verify", "--in", str(inst), "--solution", str(start)], tmp_path)
    assert code == EXIT_OK
    assert report["passed"] is True
    assert report["optimum_members"] == [3, 4, 5, 6, 7, 8]


def test_constants(tmp_path):
    code, doc = run_json(["constants", "--delta", "1/2"], tmp_path)
    assert code == EXIT_OK
    assert all(c["holds"] for c in doc["conditions"])
    code, _ = run_json(["constants", "--delta", "0.999", "--eps-prime", "0.2"], tmp_path, "bad.json")
    assert code == EXIT_FAILED


@pytest.mark.parametrize(
    "args",
    [
        ["solve", "--in", "does-not-exist.txt"],
        ["constants", "--delta", "2"],
        ["gen", "cycle", "--d", "4", "--pairs", "1", "--out", "x.txt"],
    ],
)
def test_input_errors_exit_2(args, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(args) == EXIT_INPUT


def test_malformed_instance_exits_2(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("p ksp 2 1\ns 1 0\n")
    assert main(["solve", "--in", str(bad)]) == EXIT_INPUT


def test_bench_command(tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(
        json.dumps(
            {
                "instances": [{"gen": "berman-packing", "d": 4, "id": "b4"}],
                "algorithms": [{"algo": "squareimp", "start": "A"}, {"algo": "greedy"}],
            }
        )
    )
    out = tmp_path / "report.csv"
    assert main(["--verbose", "bench", "--suite", str(suite), "--out", str(out), "--no-timing"]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0].split(",")[:3] == ["instance", "algo", "seed"]
    assert len(lines) == 3


def test_scaled_solve_on_an_empty_instance(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("p ksp 0 3 5\n")
    code, trace = run_json(["solve", "--in", str(empty), "--scale-n", "2"], tmp_path)
    assert code == EXIT_OK
    assert trace["final_members"] == [] and trace["scaled"] is True
