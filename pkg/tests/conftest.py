from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from aplab.cli import preset_names, preset_text
from aplab.config import parse_config
from aplab.runner import RunManifest, TaskResult, run

GOLDEN_DIR = Path(__file__).parent / "golden"

_criteria: dict[int, dict] = {}


def pytest_addoption(parser):
    parser.addoption("--update-golden", action="store_true", help="rewrite tests/golden from the current run")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, desc): acceptance criterion covered by the test")


@dataclass
class PresetRun:
    manifest: RunManifest
    results: list[TaskResult]
    out: Path
    seconds: float

    def result(self, name: str) -> TaskResult:
        return next(r for r in self.results if r.name == name)


@pytest.fixture(scope="session")
def preset_runs(tmp_path_factory):
    """Every preset run once per worker count; keyed by (name, jobs)."""
    runs = {}
    for jobs in (1, 8):
        for name in preset_names():
            cfg = parse_config(preset_text(name))
            out = tmp_path_factory.mktemp(f"{name}-j{jobs}")
            start = time.perf_counter()
            manifest, results = run(cfg, out, jobs=jobs)
            runs[name, jobs] = PresetRun(manifest, results, out, time.perf_counter() - start)
    return runs


def plain(obj):
    """JSON-friendly copy with numpy scalars unwrapped and non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def golden_record(pr: PresetRun) -> dict:
    return plain({
        "overall": pr.manifest.overall,
        "verdicts": pr.manifest.verdicts,
        "summaries": {r.name: r.summary for r in pr.results},
    })


def golden_path(name: str) -> Path:
    return GOLDEN_DIR / f"{name}.json"


@pytest.fixture(scope="session")
def update_golden(request):
    return request.config.getoption("--update-golden")


def write_golden(name: str, record: dict) -> None:
    GOLDEN_DIR.mkdir(exist_ok=True)
    golden_path(name).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_golden(name: str) -> dict:
    return json.loads(golden_path(name).read_text(encoding="utf-8"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, desc = marker.args
    entry = _criteria.setdefault(n, {"desc": desc, "ok": True, "seen": False})
    if rep.when == "call" or rep.failed:
        entry["seen"] = True
        if rep.failed or rep.skipped:
            entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        status = "PASS" if e["ok"] and e["seen"] else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {e['desc']}")


def _close(got, want, path, rel):
    if isinstance(want, dict):
        assert isinstance(got, dict) and set(got) == set(want), f"{path}: keys differ"
        for k in want:
            _close(got[k], want[k], f"{path}.{k}", rel)
    elif isinstance(want, list):
        assert isinstance(got, list) and len(got) == len(want), f"{path}: length differs"
        for i, (g, w) in enumerate(zip(got, want)):
            _close(g, w, f"{path}[{i}]", rel)
    elif isinstance(want, float) and not isinstance(got, bool):
        assert got == pytest.approx(want, rel=rel, abs=1e-12), f"{path}: {got!r} != {want!r}"
    else:
        assert got == want, f"{path}: {got!r} != {want!r}"


@pytest.fixture(scope="session")
def golden_check(update_golden):
    """Compare a preset run against its golden file: verdicts exactly, numbers to 1e-6 relative."""

    def check(name: str, pr: PresetRun) -> None:
        record = golden_record(pr)
        if update_golden:
            write_golden(name, record)
        want = load_golden(name)
        assert record["verdicts"] == want["verdicts"]
        assert record["overall"] == want["overall"]
        _close(record["summaries"], want["summaries"], name, 1e-6)

    return check
