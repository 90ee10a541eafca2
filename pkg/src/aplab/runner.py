"""Task execution, report and CSV emission, and the run manifest.

Tasks run in canonical order (sorted by name).  Each produces a
:class:`TaskResult` holding its verdict, a CSV table and a text block.  CSV
floats are written with ``repr`` so identical computations give identical
bytes; the only volatile data (timestamp and timings) lives in the
manifest.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, _parallel
from .composition import (
    CompositionReport,
    Flavor,
    analytic_envelope,
    verify_prop_asymptotic,
    verify_theorem_asymptotic_weyl,
    verify_theorem_stepanov,
    verify_theorem_weyl,
    verify_theorem_weyl_variant,
)
from .config import ExperimentConfig, TaskConfig
from .corpus import random_scalar_spec
from .exponents import exponents_for
from .functions import TwoParamSpec, build, sample_field
from .periods import (
    ClassMembership,
    ClassTag,
    VanishingOrder,
    Verdict,
    classify_ap,
    classify_equi_weyl,
    classify_sp_ap,
    classify_weyl,
    verify_aap,
    verify_aaps,
    weyl_vanishing_check,
    worst,
)
from .seminorms import (
    CSV_VERSION,
    QuadratureConfig,
    lp_window_mean,
    power_mean_check,
    stepanov_metric,
    weyl_norm,
)

DEFAULT_VALUE_TOL = 1e-6
DEFAULT_EXPONENT_TOL = 0.02


@dataclass
class TaskResult:
    name: str
    type: str
    verdict: Verdict
    csv_kind: str
    columns: list[str]
    rows: list[dict]
    text: list[str]
    summary: dict = field(default_factory=dict)
    seconds: float = 0.0
    payload: Any = None

    def csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {CSV_VERSION} {self.csv_kind} task={self.name}\n")
        writer = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _cell(row.get(k, "")) for k in self.columns})
        return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    if v is None:
        return ""
    if isinstance(v, Verdict):
        return v.value
    return str(v)


def csv_body(text: str) -> str:
    """CSV text without comment lines."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------

_CLASSIFY_COLUMNS = [
    "class_tag", "verdict", "epsilon", "epsilon_verdict", "inclusion_length", "witness_l", "periods_found",
    "outer_axis", "outer_value", "p", "truncation_radius", "step",
]


def _membership_rows(m: ClassMembership, p, grid) -> list[dict]:
    base = {
        "class_tag": m.class_tag.value,
        "verdict": m.verdict.value,
        "p": float(p) if p is not None else None,
        "truncation_radius": grid.interval.truncation_radius,
        "step": grid.step,
    }
    rows = []
    for e in m.per_epsilon:
        if "epsilon" not in e:
            continue
        rows.append({
            **base,
            "epsilon": e["epsilon"],
            "epsilon_verdict": e["verdict"],
            "inclusion_length": e["inclusion_length"],
            "witness_l": e.get("l"),
            "periods_found": e["periods_found"],
        })
    seq = m.witnesses.get("outer_sequence")
    if seq is not None:
        axis = m.witnesses["outer_axis"]
        sched = m.parameters["t_schedule"] if axis == "t" else m.parameters["l_schedule"]
        for s, v in zip(sched, seq):
            rows.append({**base, "outer_axis": f"{axis}={s!r}", "outer_value": v})
    if not rows:
        rows.append({**base, **{k: v for k, v in m.witnesses.items() if k in ("residual",)}})
    return rows


def _membership_summary(m: ClassMembership) -> dict:
    out: dict[str, Any] = {"class": m.class_tag.value}
    lengths = {str(e["epsilon"]): e["inclusion_length"] for e in m.per_epsilon if "epsilon" in e}
    if lengths:
        out["inclusion_length"] = lengths
    ls = {str(e["epsilon"]): e["l"] for e in m.per_epsilon if e.get("l") is not None}
    if ls:
        out["witness_l"] = ls
    if "final" in m.witnesses:
        out["final"] = m.witnesses["final"]
    return out


def _membership_text(m: ClassMembership) -> list[str]:
    lines = [f"  class {m.class_tag.value}: {m.verdict.value}"]
    for e in m.per_epsilon:
        if "epsilon" in e:
            extra = f", l={e['l']}" if e.get("l") else ""
            lines.append(
                f"    eps={e['epsilon']}: {e['verdict']} (inclusion length {e['inclusion_length']:.6g}, "
                f"{e['periods_found']} periods{extra})"
            )
    if "outer_sequence" in m.witnesses:
        seq = ", ".join(f"{v:.3e}" for v in m.witnesses["outer_sequence"])
        lines.append(f"    outer sequence over {m.witnesses['outer_axis']}: {seq}")
    for k in ("residual", "phi_tail_max"):
        if k in m.witnesses:
            lines.append(f"    {k}: {m.witnesses[k]:.3e}")
    lines += [f"    note: {n}" for n in m.notes]
    return lines


def _run_classify(cfg: ExperimentConfig, task: TaskConfig) -> TaskResult:
    prm, grid, budget = task.params, task.grid, task.budget
    spec = cfg.functions[prm["function"]]
    if isinstance(spec, TwoParamSpec):
        f = sample_field(spec, cfg.compacts[prm["compact"]], grid.interval, grid.step, grid.norm)
    else:
        f = build(spec, grid.interval, grid.step, grid.norm)
    tag = ClassTag(prm["class"])
    p = float(prm["p"])
    if tag is ClassTag.AP:
        m = classify_ap(f, budget)
        p = None
    elif tag is ClassTag.APSP:
        m = classify_sp_ap(f, p, budget)
    elif tag is ClassTag.EQUI_WEYL_AP:
        m = classify_equi_weyl(f, p, budget)
    elif tag is ClassTag.WEYL_AP:
        m = classify_weyl(f, p, budget)
    elif tag in (ClassTag.WEYL_VANISHING, ClassTag.EQUI_WEYL_VANISHING):
        order = VanishingOrder.WEYL if tag is ClassTag.WEYL_VANISHING else VanishingOrder.EQUI
        m = weyl_vanishing_check(f, p, order, budget)
    else:
        dec = prm["decomposition"]
        g = build(cfg.functions[dec["g"]], grid.interval, grid.step, grid.norm)
        phi = build(cfg.functions[dec["phi"]], grid.interval, grid.step, grid.norm)
        eps = prm.get("epsilon") or min(budget.epsilons)
        if tag is ClassTag.AAP:
            m = verify_aap(f, g, phi, eps, budget)
            p = None
        else:
            m = verify_aaps(f, g, phi, p, eps, budget)
    text = [f"classify {prm['function']} as {tag.value}"] + _membership_text(m)
    return TaskResult(task.name, "classify", m.verdict, "classify", _CLASSIFY_COLUMNS,
                      _membership_rows(m, p, grid), text, _membership_summary(m), payload=m)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

_VERIFY_COLUMNS = ["epsilon", "tau", "l", "displacement", "bound"]


def _report_text(rep: CompositionReport) -> list[str]:
    lines = [f"  verdict: {rep.verdict.value}", f"  exponents: {rep.exponents}"]
    for h in rep.hypothesis_checks:
        lines.append(f"  hypothesis {h.name}: {h.verdict.value} ({h.detail})")
    for name, c in rep.conclusion_checks.items():
        lines.append(f"  conclusion {name}:")
        lines += ["  " + s for s in _membership_text(c)]
    for d in rep.diagnostics:
        lines.append(f"  diagnostic {d.name}: {d.verdict.value} ({d.detail})")
    if rep.bound_fit is not None:
        lines.append(f"  bound_fit M: {rep.bound_fit!r}")
    if rep.counterexample:
        lines.append("  COUNTEREXAMPLE CANDIDATE: hypotheses pass but the conclusion fails")
    lines += [f"  note: {n}" for n in rep.notes]
    return lines


def _run_verify(cfg: ExperimentConfig, task: TaskConfig) -> TaskResult:
    prm, grid, budget = task.params, task.grid, task.budget
    theorem = prm["theorem"]
    exps, asym = exponents_for(theorem, prm["exponents"])

    def one(role):
        return build(cfg.functions[prm[role]], grid.interval, grid.step, grid.norm)

    K = cfg.compacts[prm["K"]]
    if theorem in ("stepanov", "weyl", "weyl-variant"):
        F, x = cfg.functions[prm["F"]], one("x")
        env = analytic_envelope(cfg.functions[prm["envelope"]], x) if prm.get("envelope") else None
        if theorem == "stepanov":
            rep = verify_theorem_stepanov(F, x, exps, K, budget, env)
        elif theorem == "weyl":
            rep = verify_theorem_weyl(F, x, exps, K, budget, Flavor(prm["flavor"]), env)
        else:
            rep = verify_theorem_weyl_variant(F, x, exps, K, budget, env)
    else:
        G, Q = cfg.functions[prm["G"]], cfg.functions[prm["Q"]]
        y, z = one("y"), one("z")
        K2 = cfg.compacts[prm["K2"]]
        if theorem == "asymptotic-stepanov":
            rep = verify_prop_asymptotic(G, y, Q, z, exps, K, K2, budget, prm["tail_tolerance"])
        else:
            rep = verify_theorem_asymptotic_weyl(G, y, Q, z, exps, asym, K, K2, budget, Flavor(prm["flavor"]))
    rows = sorted(rep.rows, key=lambda r: (-r["epsilon"], r.get("l") or 0.0, r["tau"]))
    text = [f"verify {theorem}"] + _report_text(rep)
    return TaskResult(task.name, "verify", rep.verdict, "verify", _VERIFY_COLUMNS, rows, text,
                      _report_summary(theorem, rep), payload=rep)


def _report_summary(theorem: str, rep: CompositionReport) -> dict:
    checks = {h.name: h.verdict.value for h in rep.hypothesis_checks + rep.diagnostics}
    checks.update({f"conclusion:{k}": c.verdict.value for k, c in rep.conclusion_checks.items()})
    return {"theorem": theorem, "bound_fit": rep.bound_fit, "checks": checks}


# ---------------------------------------------------------------------------
# seminorm
# ---------------------------------------------------------------------------


def power_law_exponent(ls, values) -> float:
    """Least-squares slope of ``log value`` against ``log l``."""
    x = np.log(np.asarray(ls, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def _compare(value: float, expect: float | None, tol: float) -> Verdict:
    if expect is None:
        return Verdict.PASS
    return Verdict.PASS if abs(value - expect) <= tol else Verdict.FAIL


def _run_seminorm(cfg: ExperimentConfig, task: TaskConfig, tolerance: float | None) -> TaskResult:
    prm, grid, budget = task.params, task.grid, task.budget
    quad = QuadratureConfig(budget.quadrature)
    kind = prm["kind"]
    tol = tolerance if tolerance is not None else prm.get("tolerance")
    f = build(cfg.functions[prm["function"]], grid.interval, grid.step, grid.norm) if "function" in prm else None
    if kind == "stepanov":
        p, l = float(prm["p"]), prm["l"]
        res = stepanov_metric(f, None, l, p, quad)
        v = _compare(res.value, prm.get("expect_value"), tol or DEFAULT_VALUE_TOL)
        rows = [{"l": res.l, "p": p, "value": res.value, "witness": res.sup_witness}]
        text = [f"stepanov norm of {prm['function']} (l={res.l!r}, p={p!r}): {res.value!r} at x={res.sup_witness!r}"]
        return TaskResult(task.name, "seminorm", v, "stepanov", ["l", "p", "value", "witness"], rows, text,
                          {"value": res.value})
    if kind == "lp_mean":
        p, l, a = float(prm["p"]), prm["l"], prm["a"]
        value = lp_window_mean(f, a, l, p, quad)
        v = _compare(value, prm.get("expect_value"), tol or DEFAULT_VALUE_TOL)
        rows = [{"a": a, "l": l, "p": p, "value": value}]
        return TaskResult(task.name, "seminorm", v, "lp-mean", ["a", "l", "p", "value"], rows,
                          [f"L^{p!r} window mean of {prm['function']} on [{a!r}, {a + l!r}]: {value!r}"],
                          {"value": value})
    if kind == "weyl":
        p = float(prm["p"])
        est = weyl_norm(f, p, budget.l_schedule, quad)
        text = [f"weyl sweep of {prm['function']} (p={p!r}): estimate {est.estimate!r}, "
                f"cauchy gap {est.cauchy_gap:.3e}, converged={est.converged}"]
        summary: dict[str, Any] = {"estimate": est.estimate, "converged": est.converged}
        if prm.get("expect_exponent") is not None:
            slope = power_law_exponent(est.l_schedule, est.values)
            expect = prm["expect_exponent"]
            err = abs(slope - expect) / abs(expect) if expect else abs(slope)
            v = Verdict.PASS if err < (tol or DEFAULT_EXPONENT_TOL) else Verdict.FAIL
            text.append(f"  fitted power-law exponent {slope!r} vs {expect!r} (relative error {err:.3e})")
            summary["fitted_exponent"] = slope
        elif prm.get("expect_value") is not None:
            v = _compare(est.estimate, prm["expect_value"], tol or DEFAULT_VALUE_TOL)
        else:
            v = Verdict.PASS if est.converged else Verdict.INCONCLUSIVE
        return TaskResult(task.name, "seminorm", v, "weyl-sweep", ["l", "value", "witness", "converged"],
                          est.rows(), text, summary, payload=est)
    if kind == "power_mean":
        chk = power_mean_check(f, prm["a"], prm["b"], float(prm["p_low"]), float(prm["p_high"]), quad)
        rows = [{"p_low": float(prm["p_low"]), "p_high": float(prm["p_high"]), "lhs": chk.lhs, "rhs": chk.rhs,
                 "holds": chk.holds}]
        return TaskResult(task.name, "seminorm", Verdict.PASS if chk.holds else Verdict.FAIL, "power-mean",
                          ["p_low", "p_high", "lhs", "rhs", "holds"], rows,
                          [f"power means of {prm['function']}: {chk.lhs!r} <= {chk.rhs!r}: {chk.holds}"],
                          {"lhs": chk.lhs, "rhs": chk.rhs})
    # power_mean_sweep
    rows = power_mean_sweep(grid, prm["count"], prm["seed"], prm["p_max"], quad)
    ok = all(r["holds"] for r in rows)
    worst_gap = max(r["lhs"] - r["rhs"] for r in rows)
    text = [f"power-mean sweep over {len(rows)} random specs: {'all hold' if ok else 'VIOLATION'} "
            f"(max lhs - rhs = {worst_gap:.3e})"]
    return TaskResult(task.name, "seminorm", Verdict.PASS if ok else Verdict.FAIL, "power-mean-sweep",
                      ["index", "spec", "a", "b", "p_low", "p_high", "lhs", "rhs", "holds"], rows, text,
                      {"count": len(rows), "max_gap": worst_gap})


def power_mean_sweep(grid, count: int, seed: int, p_max: float, quad: QuadratureConfig) -> list[dict]:
    """Random specs, windows and exponent pairs for the power-mean inequality."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(count):
        spec = random_scalar_spec(rng)
        f = build(spec, grid.interval, grid.step, grid.norm)
        i0 = int(rng.integers(0, (f.n - 1) // 2))
        m = int(rng.integers(10, f.n - 1 - i0 + 1))
        a, b = f.origin + i0 * f.step, f.origin + (i0 + m) * f.step
        p_low, p_high = sorted(rng.uniform(1, p_max, 2))
        if p_high - p_low < 1e-6:
            p_high = min(p_max, p_low + 0.5)
        chk = power_mean_check(f, a, b, float(p_low), float(p_high), quad)
        rows.append({"index": i, "spec": spec.kind, "a": a, "b": b, "p_low": float(p_low), "p_high": float(p_high),
                     "lhs": chk.lhs, "rhs": chk.rhs, "holds": chk.holds})
    return rows


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


@dataclass
class RunManifest:
    config_name: str
    config_hash: str
    tool_version: str
    timestamp: str
    jobs: int
    timings: dict[str, float]
    verdicts: dict[str, str]
    overall: str

    @property
    def exit_code(self) -> int:
        return Verdict(self.overall).exit_code

    def to_dict(self) -> dict:
        return {
            "config_name": self.config_name,
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
            "jobs": self.jobs,
            "timings": self.timings,
            "verdicts": self.verdicts,
            "overall": self.overall,
        }


def run_task(cfg: ExperimentConfig, task: TaskConfig, tolerance: float | None = None) -> TaskResult:
    start = time.perf_counter()
    if task.type == "classify":
        res = _run_classify(cfg, task)
    elif task.type == "verify":
        res = _run_verify(cfg, task)
    else:
        res = _run_seminorm(cfg, task, tolerance)
    res.seconds = time.perf_counter() - start
    return res


def select_tasks(cfg: ExperimentConfig, types: tuple[str, ...] | None) -> list[TaskConfig]:
    tasks = [t for t in cfg.tasks if types is None or t.type in types]
    return sorted(tasks, key=lambda t: t.name)


def run(cfg: ExperimentConfig, out_dir: str | Path | None = None, types: tuple[str, ...] | None = None,
        tolerance: float | None = None, jobs: int = 1) -> tuple[RunManifest, list[TaskResult]]:
    """Run the selected tasks; write reports and CSVs when *out_dir* is given."""
    if tolerance is not None and types != ("seminorm",):
        cfg = cfg.with_epsilons((tolerance,))
    results = []
    with _parallel.jobs(jobs):
        for task in select_tasks(cfg, types):
            results.append(run_task(cfg, task, tolerance))
    verdicts = {r.name: r.verdict.value for r in results}
    manifest = RunManifest(
        config_name=cfg.name,
        config_hash=cfg.config_hash,
        tool_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        jobs=jobs,
        timings={r.name: round(r.seconds, 4) for r in results},
        verdicts=verdicts,
        overall=worst([r.verdict for r in results]).value,
    )
    if out_dir is not None:
        write_outputs(Path(out_dir), cfg, manifest, results)
    return manifest, results


def text_report(cfg: ExperimentConfig, manifest: RunManifest, results: list[TaskResult]) -> str:
    lines = [f"aplab report: {cfg.name}", f"config hash: {manifest.config_hash}", f"overall: {manifest.overall}", ""]
    for r in results:
        lines.append(f"[{r.name}] {r.type}: {r.verdict.value}")
        lines += r.text
        lines.append("")
    return "\n".join(lines)


def summary_csv(results: list[TaskResult]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION} summary\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["task", "type", "verdict"])
    for r in results:
        w.writerow([r.name, r.type, r.verdict.value])
    return buf.getvalue()


def write_outputs(out: Path, cfg: ExperimentConfig, manifest: RunManifest, results: list[TaskResult]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for r in results:
        (out / f"{r.name}.csv").write_text(r.csv_text(), encoding="utf-8")
    (out / "summary.csv").write_text(summary_csv(results), encoding="utf-8")
    (out / "report.txt").write_text(text_report(cfg, manifest, results), encoding="utf-8")
    (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")


__all__ = [
    "RunManifest",
    "TaskResult",
    "csv_body",
    "power_law_exponent",
    "power_mean_sweep",
    "run",
    "run_task",
    "text_report",
]
