from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from aplab.cli import main, preset_names
from aplab.periods import Verdict
from aplab.runner import csv_body

EXPECTED_OVERALL = {
    "asymptotic-stepanov": Verdict.PASS,
    "asymptotic-weyl": Verdict.PASS,
    "classify-corpus": Verdict.FAIL,
    "lemma1-sweep": Verdict.PASS,
    "remark1-probe": Verdict.INCONCLUSIVE,
    "seminorm-oracles": Verdict.PASS,
    "stepanov-composition-trig": Verdict.PASS,
    "weyl-composition": Verdict.PASS,
    "weyl-vanishing-indicator": Verdict.PASS,
    "weyl-variant": Verdict.PASS,
}


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    names = [line.split()[0] for line in out.splitlines()]
    assert len(names) >= 8
    assert {"lemma1-sweep", "remark1-probe", "stepanov-composition-trig"} <= set(names)


@pytest.mark.parametrize(
    "argv",
    [[], ["frobnicate"], ["run"], ["run", "--preset", "no-such-preset"], ["run", "--preset", "x", "--config", "y"],
     ["run", "--preset", "lemma1-sweep", "--jobs", "0"], ["run", "--preset", "lemma1-sweep", "--tolerance", "-1"]],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == 64


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "absent.yaml")]) == 74


@pytest.mark.parametrize(
    "text",
    ["tasks: [\n  {name: a\n", "tasks:\n  - {name: a, type: classify, function: nope, class: AP}\n", "- just a list\n"],
)
def test_invalid_config_exit_code(tmp_path, text, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    assert main(["run", "--config", str(path)]) == 65


def test_empty_config_writes_outputs(tmp_path, capsys):
    path = tmp_path / "empty.yaml"
    path.write_text("name: empty\ntasks: []\n")
    out = tmp_path / "out"
    assert main(["run", "--config", str(path), "--out", str(out), "--quiet"]) == 0
    assert {p.name for p in out.iterdir()} == {"manifest.json", "report.txt", "summary.csv"}
    assert capsys.readouterr().out == ""


def test_subcommand_filters_task_types(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["seminorm", "--preset", "weyl-vanishing-indicator", "--out", str(out), "--quiet"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["verdicts"] == {}


def test_stepanov_preset_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["verify", "--preset", "stepanov-composition-trig", "--out", str(out)])
    assert code == 0
    assert "overall: PassAtTolerance" in capsys.readouterr().out
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest) >= {"config_hash", "tool_version", "timestamp", "timings", "verdicts"}
    (csv_path,) = [p for p in out.glob("*.csv") if p.name != "summary.csv"]
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("# aplab-csv v1 verify task=")
    rows = list(csv.DictReader(lines[1:]))
    assert len({r["epsilon"] for r in rows}) >= 4


def test_tolerance_sets_single_epsilon(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["verify", "--preset", "stepanov-composition-trig", "--tolerance", "0.2", "--out", str(out),
                 "--quiet"]) == 0
    (csv_path,) = [p for p in out.glob("*.csv") if p.name != "summary.csv"]
    rows = list(csv.DictReader(csv_path.read_text().splitlines()[1:]))
    assert {float(r["epsilon"]) for r in rows} == {0.2}


def test_seminorm_tolerance_is_comparison_tolerance(capsys):
    # a loose tolerance cannot turn the exact oracles into failures
    assert main(["seminorm", "--preset", "seminorm-oracles", "--tolerance", "0.5", "--quiet"]) == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "aplab", "presets"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "lemma1-sweep" in proc.stdout


@pytest.mark.parametrize("name", preset_names())
def test_preset_overall_verdict(name, preset_runs):
    pr = preset_runs[name, 1]
    assert pr.manifest.overall == EXPECTED_OVERALL[name]
    assert pr.manifest.exit_code == EXPECTED_OVERALL[name].exit_code


@pytest.mark.parametrize("name", preset_names())
def test_preset_matches_golden(name, preset_runs, golden_check):
    golden_check(name, preset_runs[name, 1])


@pytest.mark.parametrize("name", preset_names())
def test_csv_bodies_have_no_volatile_fields(name, preset_runs):
    pr = preset_runs[name, 1]
    for r in pr.results:
        body = csv_body((pr.out / f"{r.name}.csv").read_text())
        assert body == csv_body(r.csv_text())
        assert pr.manifest.timestamp not in body
