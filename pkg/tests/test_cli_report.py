import csv
import io
import json

import pytest

from hdx.analysis import Options, run_analyze
from hdx.cli import main, parse_generator
from hdx.complex import generate_complete_complex
from hdx.report import VerificationReport, emit_report, render_json, strip_timing

FAST = ["--restarts", "2", "--n-functions", "20", "--jobs", "1"]


@pytest.fixture(scope="module")
def small_report():
    cx = generate_complete_complex(4, 3)
    return run_analyze(cx, "complete:n=4,d=3",
                       Options(seed=1, restarts=2, n_functions=20, suites=("structure", "walks",
                                                                              "bounds")))


def test_report_json_round_trip(small_report):
    data = json.loads(render_json(small_report))
    assert data["schema"] == 1
    back = VerificationReport.from_dict(data)
    assert render_json(back) == render_json(small_report)


def test_csv_rows(small_report):
    rows = list(csv.reader(io.StringIO(emit_report(small_report, "csv"))))
    assert rows[0] == ["id", "measured", "bound", "margin", "status"]
    assert len(rows) == len(small_report.checks) + 1
    assert {r[4] for r in rows[1:]} <= {"pass", "fail", "skipped"}


def test_emit_to_file(tmp_path, small_report):
    out = tmp_path / "r.json"
    emit_report(small_report, "json", out)
    assert json.loads(out.read_text())["summary"] == small_report.counts()
    with pytest.raises(OSError):
        emit_report(small_report, "json", tmp_path / "missing" / "r.json")


def test_generator_specs():
    assert parse_generator("complete:n=5,d=2").d == 2
    assert parse_generator("matroid:edges=0-1;1-2;0-2").face_counts() == [1, 3, 3]
    assert parse_generator("random:n=6,d=3,seed=4").d == 3


def test_analyze_exit_zero_and_json(capsys):
    code = main(["analyze", "--generate", "complete:n=4,d=3", "--checks", "structure,walks",
                 "--format", "json", *FAST])
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert data["summary"]["fail"] == 0
    assert data["metadata"]["seed"] == 42


def test_purity_error_gives_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"d": 2, "ground_set_size": 3,
                               "top_faces": [{"elements": [0, 1], "weight": 1},
                                             {"elements": [0, 1, 2], "weight": 1}]}))
    assert main(["analyze", "--input", str(bad)]) == 2
    assert "PurityError" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["analyze"],
    ["analyze", "--generate", "nonsense:n=1"],
    ["analyze", "--generate", "complete:n=4,d=3", "--checks", "bogus"],
    ["bounds", "--profile", "[0, 0"],
    ["bounds", "--profile", "[0.2, -1.5]"],
])
def test_usage_errors_exit_two(argv, capsys):
    assert main(argv) == 2
    assert "hdx: error" in capsys.readouterr().err


def test_failure_gives_exit_one(capsys):
    # a negative margin tolerance demands a margin of at least 1, which the
    # tight k = 2 entropy comparison cannot meet
    code = main(["entropy", "--generate", "complete:n=4,d=3", "--opt-margin", "-1",
                 "--format", "json", *FAST])
    data = json.loads(capsys.readouterr().out)
    assert data["summary"]["fail"] > 0
    assert code == 1


def test_bounds_zero_profile(capsys):
    assert main(["bounds", "--profile", "[0,0,0]", "--k-max", "5"]) == 0
    table = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert table["truncated_at_d"]
    for row in table["rows"]:
        assert row["ours"] == pytest.approx(1 - 1 / row["k"], abs=1e-12)
        assert row["al"] == pytest.approx(1 - 1 / row["k"], abs=1e-12)


def test_export_operators(tmp_path, capsys):
    assert main(["export-operators", "--generate", "complete:n=4,d=2",
                 "--out-dir", str(tmp_path)]) == 0
    with open(tmp_path / "RW_down_2.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "face" and rows[0][1] == "{0,1}"
    assert len(rows) == 7 and all(abs(sum(map(float, r[1:])) - 1) < 1e-12 for r in rows[1:])
    assert json.loads((tmp_path / "profile.json").read_text()) == pytest.approx([-1 / 3])


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("HDX_SEED", "7")
    main(["analyze", "--generate", "complete:n=4,d=2", "--checks", "structure",
          "--format", "json", *FAST])
    assert json.loads(capsys.readouterr().out)["metadata"]["seed"] == 7


def test_identical_runs_are_identical_modulo_timing(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        main(["analyze", "--generate", "random:n=6,d=3,seed=3", "--output", str(path),
              "--format", "json", *FAST, "--max-iter", "300"])
        outs.append(strip_timing(json.loads(path.read_text())))
    assert json.dumps(outs[0], sort_keys=True) == json.dumps(outs[1], sort_keys=True)
