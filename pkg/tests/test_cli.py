import json

import numpy as np
import pytest

from sharpcorr.cli import main


@pytest.fixture
def table(tmp_path):
    x = np.linspace(0.1, 2, 40).tolist()
    lines = ["x,y,lin,label"] + [f"{a!r},{a**3!r},{2 * a + 1!r},p{i}" for i, a in enumerate(x)]
    path = tmp_path / "data.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_compute_cubic(capsys, table):
    code, out, _ = run(capsys, "compute", table, "--x", "x", "--y", "y", "--measures", "rearrangement,pearson", "--format", "json")
    assert code == 0
    scores = {s["measure"]: s["value"] for s in json.loads(out)["scores"]}
    assert scores["rearrangement"] == 1.0 and scores["pearson"] < 1.0


def test_compute_linear_all(capsys, table):
    code, out, _ = run(capsys, "compute", table, "--x", "x", "--y", "lin", "--format", "csv")
    assert code == 0
    got = dict(line.split(",") for line in out.splitlines()[1:])
    assert len(got) == 9
    for m in ("pearson", "rearrangement", "spearman", "kendall"):
        assert float(got[m]) == pytest.approx(1.0, abs=1e-12)


def test_compute_tab_input(capsys, tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("a\tb\n1\t2\n2\t5\n3\t7\n")
    code, out, _ = run(capsys, "compute", p, "--x", "a", "--y", "b", "--measures", "kendall")
    assert code == 0 and out.split() == ["kendall", "1"]


def test_compute_missing_column(capsys, table):
    code, _, err = run(capsys, "compute", table, "--x", "x", "--y", "nope")
    assert code == 2
    assert "available columns: x, y, lin, label" in err


def test_compute_missing_policy(capsys, tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("x,y\n1,2\n2,\n3,NA\n4,9\n5,11\n")
    code, out, err = run(capsys, "compute", p, "--x", "x", "--y", "y", "--measures", "pearson", "--format", "json")
    assert code == 0 and json.loads(out)["n"] == 3 and "dropped 2" in err
    code, _, err = run(capsys, "compute", p, "--x", "x", "--y", "y", "--missing", "error")
    assert code == 2 and "m.csv:3: column 'y'" in err


def test_compute_bad_measure_and_file(capsys, table, tmp_path):
    assert run(capsys, "compute", table, "--x", "x", "--y", "y", "--measures", "foo")[0] == 2
    assert run(capsys, "compute", tmp_path / "absent.csv", "--x", "x", "--y", "y")[0] == 3
    assert run(capsys, "compute", table, "--x", "x", "--y", "label")[0] == 3


def test_bench_outputs_and_determinism(capsys, tmp_path):
    args = ["bench", "--family", "non_monotone", "--n", "48", "--reps", "2", "--r-grid", "0.2:1:0.4"]
    code, out, _ = run(capsys, *args, "--out", tmp_path / "a")
    assert code == 0 and out.splitlines()[0].startswith("rank")
    assert "hsic" in out and "(not ranked)" in out
    run(capsys, *args, "--out", tmp_path / "b", "--threads", "3")
    for name in ("scores.csv", "scores.json", "report.csv", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    meta = json.loads((tmp_path / "a" / "scores.json").read_text())
    assert meta["rng"]["bit_generator"].startswith("numpy.random.Philox")
    assert meta["config"]["seed"] == 42 and meta["config"]["n"] == 48
    rows = (tmp_path / "a" / "scores.csv").read_text().splitlines()
    assert len(rows) == 1 + 16 * 9 * 3 * 2


def test_bench_include_hsic(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", "--n", "20", "--reps", "1", "--r-grid", "1:1:1", "--measures",
                       "hsic,rearrangement", "--include-hsic", "--out", tmp_path)
    assert code == 0 and "not ranked" not in out
    assert json.loads((tmp_path / "report.json").read_text())["ranking"][0] == "rearrangement"


def test_bench_usage_errors(capsys, tmp_path):
    assert run(capsys, "bench", "--r-grid", "0:2:0.1", "--out", tmp_path)[0] == 2
    assert run(capsys, "bench", "--n", "2", "--out", tmp_path)[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("a | monotone | 0 | 1 | q(x)\n")
    code, _, err = run(capsys, "bench", "--scenario-file", bad, "--out", tmp_path)
    assert code == 3 and "unknown function" in err
    with pytest.raises(SystemExit) as info:
        main(["bench", "--family", "sideways"])
    assert info.value.code == 2


def test_bench_scenario_file(capsys, tmp_path):
    spec = tmp_path / "s.txt"
    spec.write_text("line | monotone | 0 | 1 | 3*x\n")
    code, _, _ = run(capsys, "bench", "--scenario-file", spec, "--n", "30", "--reps", "1", "--r-grid", "0.5:1:0.5",
                     "--out", tmp_path / "o")
    assert code == 0
    assert json.loads((tmp_path / "o" / "scores.json").read_text())["scenarios"] == str(spec)


def test_nist_default(capsys, tmp_path):
    code, out, _ = run(capsys, "nist", "--out", tmp_path)
    assert code == 0
    report = json.loads((tmp_path / "nist_report.json").read_text())
    assert report["ranking"][0] == "rearrangement"
    assert len(report["references"]) == 5
    assert len((tmp_path / "nist_scores.csv").read_text().splitlines()) == 1 + 5 * 9


def test_nist_pearson_only(capsys, tmp_path):
    run(capsys, "nist", "--measures", "pearson", "--out", tmp_path)
    rows = (tmp_path / "nist_scores.csv").read_text().splitlines()[1:]
    assert len(rows) == 5 and all(",pearson," in r for r in rows)


def test_nist_empty_and_partial_dirs(capsys, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    code, _, err = run(capsys, "nist", "--dir", empty, "--out", tmp_path / "o")
    assert code == 3 and "no datasets found" in err
    from importlib import resources

    partial = tmp_path / "partial"
    partial.mkdir()
    src = resources.files("sharpcorr.data").joinpath("nist/Thurber.dat").read_text()
    (partial / "Thurber.dat").write_text(src)
    code, _, err = run(capsys, "nist", "--dir", partial, "--out", tmp_path / "p")
    assert code == 0 and "Rat43: dataset file not found" in err
    report = json.loads((tmp_path / "p" / "nist_report.json").read_text())
    assert sorted(report["missing"]) == ["Chwirut1", "Hahn1", "Rat43", "Roszman1"]


@pytest.mark.parametrize("family, count", [("monotone", 50), ("non_monotone", 16)])
def test_scenarios_listing(capsys, family, count):
    code, out, _ = run(capsys, "scenarios", "--family", family)
    assert code == 0 and len(out.splitlines()) == count
    _, out, _ = run(capsys, "scenarios", "--family", family, "--format", "csv")
    assert len(out.splitlines()) == count + 1


def test_scenarios_json_round_trips(capsys, tmp_path):
    from sharpcorr.scenarios import load_scenarios, scenario_registry

    _, out, _ = run(capsys, "scenarios", "--family", "monotone", "--format", "json")
    p = tmp_path / "s.json"
    p.write_text(out)
    assert [s.as_dict() for s in load_scenarios(p)] == [s.as_dict() for s in scenario_registry("monotone")]
