import json
from fractions import Fraction

import pytest

from bench import COLUMNS, BenchReport, Suite, emit_report, load_suite, report_from_json, run_bench
from data import save_instance
from errors import InputError
from generators import gen_random_packing

BERMAN_SUITE = {
    "instances": [{"gen": "berman", "d": d, "id": f"berman-{d}"} for d in (4, 5, 6)],
    "algorithms": [{"algo": "squareimp", "start": "A"}, {"algo": "logimp", "start": "A"}],
}


@pytest.fixture(scope="module")
def berman_report():
    return run_bench(load_suite(BERMAN_SUITE))


def test_empty_suite():
    report = run_bench(Suite(instances=[], algorithms=[]))
    assert report.rows == [] and report.ok
    assert emit_report(report).splitlines() == [",".join(COLUMNS)]


def test_berman_rows(berman_report):
    rows = {(r.instance, r.algo): r for r in berman_report.rows}
    for d, ratio in [(4, "2/1"), (5, "5/2"), (6, "3/1")]:
        square = rows[(f"berman-{d}", "squareimp,start=A")]
        assert square.ratio == ratio
        assert square.iters == 0
        assert square.cert == "pass"
        log = rows[(f"berman-{d}", "logimp,start=A")]
        assert Fraction(log.ratio) < Fraction(square.ratio)
    assert berman_report.ok


def test_csv_columns(berman_report):
    lines = emit_report(berman_report, "csv").splitlines()
    assert lines[0] == ",".join(COLUMNS)
    assert len(lines) == 1 + 6
    assert lines[1].startswith('berman-4,"squareimp,start=A",0,3/1,6/1,2/1,0,')


def test_json_report_round_trip(berman_report, tmp_path):
    path = tmp_path / "report.json"
    text = emit_report(berman_report, "json", path)
    assert path.read_text() == text
    assert report_from_json(text).rows == berman_report.rows


def test_report_without_timing_is_reproducible():
    suite = load_suite(
        {
            "instances": [{"gen": "random", "sets": 14, "k": 3, "universe": 12, "seed": 2}],
            "algorithms": [{"algo": "greedy"}, {"algo": "logimp"}, {"algo": "param", "alpha": "1"}],
            "seeds": [0, 1],
        }
    )
    first = emit_report(run_bench(suite), include_timing=False)
    second = emit_report(run_bench(suite), include_timing=False)
    assert first == second
    assert json.loads(emit_report(run_bench(suite), "json", include_timing=False))["rows"][0]["time_ms"] is None


def test_instance_file_rows(tmp_path):
    path = save_instance(gen_random_packing(10, 3, 9, seed=4), tmp_path / "r.txt")
    suite = load_suite({"instances": [{"path": str(path)}], "algorithms": [{"algo": "squareimp"}]})
    (row,) = run_bench(suite).rows
    assert row.instance == "r.txt"
    assert row.error is None
    assert Fraction(row.ratio) >= 1
    assert row.cert == "pass"


def test_missing_file_is_reported_not_raised(tmp_path):
    suite = load_suite(
        {"instances": [{"path": str(tmp_path / "missing.txt")}], "algorithms": [{"algo": "greedy"}]}
    )
    report = run_bench(suite)
    assert report.rows[0].error.startswith("InputError")
    assert report.rows[0].cert == "error"
    assert not report.ok


def test_parallel_rows_keep_suite_order():
    suite = load_suite(
        {
            "instances": [{"gen": "random", "sets": 10, "k": 3, "universe": 9, "seed": s} for s in range(3)],
            "algorithms": [{"algo": "greedy"}, {"algo": "squareimp"}],
            "seeds": [0, 1],
        }
    )
    serial = run_bench(suite)
    parallel = run_bench(suite, jobs=2)
    key = lambda r: (r.instance, r.algo, r.seed, r.final_w, r.cert)
    assert [key(r) for r in parallel.rows] == [key(r) for r in serial.rows]


def test_scaled_rows_skip_the_certificate():
    suite = load_suite(
        {"instances": [{"gen": "berman", "d": 4}], "algorithms": [{"algo": "squareimp", "scale_n": "4"}]}
    )
    (row,) = run_bench(suite).rows
    assert row.algo == "squareimp,N=4"
    assert row.cert == "n/a"


@pytest.mark.parametrize(
    "doc",
    [
        {"instances": [{"gen": "bogus"}], "algorithms": []},
        {"instances": [], "algorithms": [{"algo": "simplex"}]},
        {"algorithms": []},
    ],
)
def test_invalid_suites(doc):
    with pytest.raises(InputError):
        load_suite(doc)


def test_suite_file_errors(tmp_path):
    with pytest.raises(InputError):
        load_suite(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        load_suite(bad)


def test_unknown_report_format():
    with pytest.raises(InputError):
        emit_report(BenchReport(), "xml")
