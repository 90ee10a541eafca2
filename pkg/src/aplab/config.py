"""Experiment configuration: YAML text in, validated :class:`ExperimentConfig` out.

A config names its functions and compact sets once and then lists tasks
that refer to them by name.  Grid and search-budget settings are given at
the top level and may be overridden per task.  Numbers may be written as
arithmetic strings (``"2*pi/600"``).  Validation collects every problem
before raising, so one run reports all of them.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Any

import yaml

from ._numbers import parse_exponent, parse_number
from .errors import ParseError, SpecFormatError, ValidationError
from .exponents import exponents_for
from .functions import NORMS, CompactSet, IntervalKind, Kind, Node, TwoParamSpec, spec_from_dict
from .periods import ClassTag, SearchBudget
from .seminorms import Rule

THEOREMS = ("stepanov", "asymptotic-stepanov", "weyl", "weyl-variant", "asymptotic-weyl")
SEMINORM_KINDS = ("stepanov", "weyl", "lp_mean", "power_mean", "power_mean_sweep")
TASK_TYPES = ("classify", "verify", "seminorm")
FLAVORS = ("EquiWeyl", "Weyl")

GRID_KEYS = ("interval", "step", "norm")
BUDGET_KEYS = (
    "epsilons",
    "tau_range",
    "tau_step",
    "l_schedule",
    "t_schedule",
    "density_fraction",
    "continuity_tolerance",
    "vanishing_tolerance",
    "quadrature",
)
TOP_KEYS = ("name", "description", "functions", "compacts", "tasks", "outputs") + GRID_KEYS + BUDGET_KEYS

_ROLES = {
    "stepanov": ("F", "x", "K"),
    "weyl": ("F", "x", "K"),
    "weyl-variant": ("F", "x", "K"),
    "asymptotic-stepanov": ("G", "y", "Q", "z", "K", "K2"),
    "asymptotic-weyl": ("G", "y", "Q", "z", "K", "K2"),
}
_FIELD_ROLES = {"F", "G", "Q"}
_COMPACT_ROLES = {"K", "K2"}
_EXPONENT_KEYS = {
    "stepanov": ("p", "r"),
    "asymptotic-stepanov": ("p", "r"),
    "weyl": ("p", "r"),
    "weyl-variant": ("p", "r"),
    "asymptotic-weyl": ("p", "r", "q1", "q2"),
}


@dataclass(frozen=True)
class GridSettings:
    interval: IntervalKind
    step: float
    norm: str = "sup"

    def to_dict(self) -> dict:
        return {
            "interval": {"kind": self.interval.kind.value, "truncation_radius": self.interval.truncation_radius},
            "step": self.step,
            "norm": self.norm,
        }


@dataclass
class TaskConfig:
    name: str
    type: str
    params: dict
    grid: GridSettings
    budget: SearchBudget


@dataclass
class ExperimentConfig:
    name: str
    description: str
    functions: dict[str, Node | TwoParamSpec]
    compacts: dict[str, CompactSet]
    grid: GridSettings
    budget: SearchBudget
    tasks: list[TaskConfig]
    outputs: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def with_epsilons(self, epsilons) -> ExperimentConfig:
        tasks = [replace(t, budget=t.budget.with_epsilons(epsilons)) for t in self.tasks]
        raw = dict(self.raw)
        raw["_epsilons_override"] = list(epsilons) if not isinstance(epsilons, (int, float)) else [epsilons]
        return replace(self, budget=self.budget.with_epsilons(epsilons), tasks=tasks, raw=raw)


class _Collector:
    def __init__(self):
        self.problems: list[str] = []

    def add(self, msg: str) -> None:
        self.problems.append(msg)

    def number(self, where: str, value: Any, positive: bool = False, default=None) -> float | None:
        if value is None:
            return default
        try:
            v = parse_number(value)
        except ValueError as exc:
            self.add(f"{where}: {exc}")
            return default
        if positive and not v > 0:
            self.add(f"{where}: must be positive, got {v}")
            return default
        return v

    def exponent(self, where: str, value: Any, allow_inf: bool = False):
        try:
            v = parse_exponent(value)
        except ValueError as exc:
            self.add(f"{where}: {exc}")
            return None
        if float(v) < 1:
            self.add(f"{where}: exponent below 1 (got {value})")
            return None
        if math.isinf(float(v)) and not allow_inf:
            self.add(f"{where}: exponent must be finite")
            return None
        return v


def _load_yaml(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark is not None else None
        raise ParseError(str(exc.problem or exc), line=line) from None
    except yaml.YAMLError as exc:
        raise ParseError(str(exc)) from None


def _grid(c: _Collector, where: str, data: dict, base: GridSettings | None,
          required: bool = True) -> GridSettings | None:
    interval = base.interval if base else None
    step = base.step if base else None
    norm = base.norm if base else "sup"
    if "interval" in data:
        iv = data["interval"]
        if not isinstance(iv, dict) or set(iv) - {"kind", "truncation_radius"}:
            c.add(f"{where}.interval: expected {{kind, truncation_radius}}")
        else:
            kind = iv.get("kind", "HalfLine")
            if kind not in [k.value for k in Kind]:
                c.add(f"{where}.interval.kind: unknown kind {kind!r}")
            radius = c.number(f"{where}.interval.truncation_radius", iv.get("truncation_radius"), positive=True)
            if radius is None and iv.get("truncation_radius") is None:
                c.add(f"{where}.interval.truncation_radius: missing")
            if radius is not None and kind in [k.value for k in Kind]:
                interval = IntervalKind(Kind(kind), radius)
    if "step" in data:
        step = c.number(f"{where}.step", data["step"], positive=True)
    if "norm" in data:
        norm = data["norm"]
        if norm not in NORMS:
            c.add(f"{where}.norm: unknown norm {norm!r}, expected one of {list(NORMS)}")
            norm = "sup"
    if interval is None or step is None:
        if base is None and required and (interval is not None or step is not None):
            c.add(f"{where}: interval and step must be given together")
        return None
    return GridSettings(interval, step, norm)


def _schedule(c: _Collector, where: str, value: Any) -> tuple[float, ...] | None:
    if value is None:
        return None
    if not isinstance(value, list) or not value:
        c.add(f"{where}: expected a non-empty list")
        return None
    vals = [c.number(f"{where}[{i}]", v) for i, v in enumerate(value)]
    if any(v is None for v in vals):
        return None
    if any(b <= a for a, b in zip(vals, vals[1:])):
        c.add(f"{where}: must be strictly increasing")
        return None
    return tuple(vals)


def _budget(c: _Collector, where: str, data: dict, base: SearchBudget) -> SearchBudget:
    kw: dict[str, Any] = {}
    if "epsilons" in data:
        eps = data["epsilons"]
        if not isinstance(eps, list) or not eps:
            c.add(f"{where}.epsilons: expected a non-empty list")
        else:
            vals = [c.number(f"{where}.epsilons[{i}]", e, positive=True) for i, e in enumerate(eps)]
            if all(v is not None for v in vals):
                kw["epsilons"] = tuple(vals)
    if "tau_range" in data:
        tr = data["tau_range"]
        if not isinstance(tr, list) or len(tr) != 2:
            c.add(f"{where}.tau_range: expected [tau_min, tau_max]")
        else:
            lo, hi = c.number(f"{where}.tau_range[0]", tr[0]), c.number(f"{where}.tau_range[1]", tr[1])
            if lo is not None and hi is not None:
                if hi < lo:
                    c.add(f"{where}.tau_range: tau_max < tau_min")
                kw["tau_min"], kw["tau_max"] = lo, hi
    if "tau_step" in data:
        kw["tau_step"] = c.number(f"{where}.tau_step", data["tau_step"], positive=True)
    for key in ("l_schedule", "t_schedule"):
        if key in data:
            sched = _schedule(c, f"{where}.{key}", data[key])
            if sched is not None:
                if key == "l_schedule" and sched[0] <= 0:
                    c.add(f"{where}.l_schedule: window lengths must be positive")
                elif key == "t_schedule" and sched[0] < 0:
                    c.add(f"{where}.t_schedule: times must be non-negative")
                else:
                    kw[key] = sched
    if "density_fraction" in data:
        v = c.number(f"{where}.density_fraction", data["density_fraction"])
        if v is not None and not 0 < v < 0.5:
            c.add(f"{where}.density_fraction: must lie in (0, 1/2)")
        elif v is not None:
            kw["density_fraction"] = v
    for key in ("continuity_tolerance", "vanishing_tolerance"):
        if key in data:
            v = c.number(f"{where}.{key}", data[key], positive=True)
            if v is not None:
                kw[key] = v
    if "quadrature" in data:
        q = data["quadrature"]
        if q not in [r.value for r in Rule]:
            c.add(f"{where}.quadrature: unknown rule {q!r}")
        else:
            kw["quadrature"] = Rule(q)
    return replace(base, **kw) if kw else base


def _check_keys(c: _Collector, where: str, data: dict, allowed) -> None:
    extra = sorted(set(data) - set(allowed))
    if extra:
        c.add(f"{where}: unknown keys {extra}")


def _classify_params(c, where, t, functions, compacts) -> dict:
    allowed = {"name", "type", "function", "class", "p", "compact", "decomposition", "epsilon"}
    _check_keys(c, where, t, set(allowed) | set(GRID_KEYS) | set(BUDGET_KEYS))
    params: dict[str, Any] = {}
    fname = t.get("function")
    if fname is None:
        c.add(f"{where}: missing 'function'")
    elif fname not in functions:
        c.add(f"{where}: undefined function {fname!r}")
    params["function"] = fname
    tag = t.get("class")
    if tag not in [x.value for x in ClassTag]:
        c.add(f"{where}.class: unknown class {tag!r}, expected one of {[x.value for x in ClassTag]}")
    params["class"] = tag
    params["p"] = c.exponent(f"{where}.p", t.get("p", 1))
    comp = t.get("compact")
    if comp is not None and comp not in compacts:
        c.add(f"{where}: undefined compact set {comp!r}")
    params["compact"] = comp
    if fname in functions and isinstance(functions[fname], TwoParamSpec) and comp is None:
        c.add(f"{where}: function {fname!r} is two-parameter and needs a 'compact'")
    if tag in ("AAP", "AAPSp"):
        dec = t.get("decomposition")
        if not isinstance(dec, dict) or set(dec) != {"g", "phi"}:
            c.add(f"{where}.decomposition: expected {{g, phi}}")
        else:
            for role in ("g", "phi"):
                if dec[role] not in functions:
                    c.add(f"{where}.decomposition.{role}: undefined function {dec[role]!r}")
            params["decomposition"] = dict(dec)
        params["epsilon"] = c.number(f"{where}.epsilon", t.get("epsilon"), positive=True)
    return params


def _verify_params(c, where, t, functions, compacts) -> dict:
    theorem = t.get("theorem")
    if theorem not in THEOREMS:
        c.add(f"{where}.theorem: unknown theorem tag {theorem!r}, expected one of {list(THEOREMS)}")
        return {"theorem": theorem}
    roles = _ROLES[theorem]
    allowed = {"name", "type", "theorem", "exponents", "flavor", "tail_tolerance", "envelope"} | set(roles)
    _check_keys(c, where, t, allowed | set(GRID_KEYS) | set(BUDGET_KEYS))
    params: dict[str, Any] = {"theorem": theorem}
    for role in roles:
        ref = t.get(role)
        if ref is None:
            c.add(f"{where}: missing role {role!r}")
        elif role in _COMPACT_ROLES:
            if ref not in compacts:
                c.add(f"{where}.{role}: undefined compact set {ref!r}")
        elif ref not in functions:
            c.add(f"{where}.{role}: undefined function {ref!r}")
        elif role in _FIELD_ROLES and not isinstance(functions[ref], TwoParamSpec):
            c.add(f"{where}.{role}: {ref!r} must be a two-parameter function")
        elif role not in _FIELD_ROLES and isinstance(functions[ref], TwoParamSpec):
            c.add(f"{where}.{role}: {ref!r} must be a one-parameter function")
        params[role] = ref
    exps = t.get("exponents")
    if not isinstance(exps, dict):
        c.add(f"{where}.exponents: expected a mapping")
        exps = {}
    need = _EXPONENT_KEYS[theorem]
    _check_keys(c, f"{where}.exponents", exps, need)
    params["exponents"] = {}
    for key in need:
        if key not in exps:
            c.add(f"{where}.exponents: missing {key!r}")
            continue
        v = c.exponent(f"{where}.exponents.{key}", exps[key], allow_inf=(key == "r"))
        params["exponents"][key] = v
    if len(params["exponents"]) == len(need) and all(v is not None for v in params["exponents"].values()):
        try:
            exponents_for(theorem, params["exponents"])
        except ValueError as exc:
            c.add(f"{where}.exponents: {exc}")
    flavor = t.get("flavor", "EquiWeyl")
    if theorem in ("weyl", "asymptotic-weyl") and flavor not in FLAVORS:
        c.add(f"{where}.flavor: expected one of {list(FLAVORS)}")
    params["flavor"] = flavor
    params["tail_tolerance"] = c.number(f"{where}.tail_tolerance", t.get("tail_tolerance"), positive=True, default=1e-6)
    env = t.get("envelope")
    if env is not None and env not in functions:
        c.add(f"{where}.envelope: undefined function {env!r}")
    params["envelope"] = env
    return params


def _seminorm_params(c, where, t, functions) -> dict:
    allowed = {
        "name", "type", "kind", "function", "p", "l", "a", "b", "p_low", "p_high", "expect_value",
        "expect_exponent", "tolerance", "count", "seed", "p_max",
    }
    _check_keys(c, where, t, allowed | set(GRID_KEYS) | set(BUDGET_KEYS))
    kind = t.get("kind")
    params: dict[str, Any] = {"kind": kind}
    if kind not in SEMINORM_KINDS:
        c.add(f"{where}.kind: unknown seminorm kind {kind!r}, expected one of {list(SEMINORM_KINDS)}")
        return params
    if kind != "power_mean_sweep":
        fname = t.get("function")
        if fname not in functions:
            c.add(f"{where}: undefined function {fname!r}")
        elif isinstance(functions[fname], TwoParamSpec):
            c.add(f"{where}: seminorms take one-parameter functions")
        params["function"] = fname
    if kind in ("stepanov", "weyl", "lp_mean"):
        params["p"] = c.exponent(f"{where}.p", t.get("p", 1))
    if kind in ("stepanov", "lp_mean"):
        params["l"] = c.number(f"{where}.l", t.get("l", 1), positive=True)
    if kind == "lp_mean":
        params["a"] = c.number(f"{where}.a", t.get("a", 0))
    if kind == "power_mean":
        params["a"] = c.number(f"{where}.a", t.get("a", 0))
        params["b"] = c.number(f"{where}.b", t.get("b"))
        params["p_low"] = c.exponent(f"{where}.p_low", t.get("p_low", 1))
        params["p_high"] = c.exponent(f"{where}.p_high", t.get("p_high", 2))
        if params["b"] is None:
            c.add(f"{where}: missing 'b'")
        if params["p_low"] is not None and params["p_high"] is not None and not params["p_low"] < params["p_high"]:
            c.add(f"{where}: need p_low < p_high")
    if kind == "power_mean_sweep":
        count = t.get("count", 200)
        if not isinstance(count, int) or count < 1:
            c.add(f"{where}.count: expected a positive integer")
        params["count"] = count
        seed = t.get("seed", 0)
        if not isinstance(seed, int):
            c.add(f"{where}.seed: expected an integer")
        params["seed"] = seed
        params["p_max"] = c.number(f"{where}.p_max", t.get("p_max", 6), positive=True)
        if params["p_max"] is not None and params["p_max"] <= 1:
            c.add(f"{where}.p_max: must exceed 1")
    params["expect_value"] = c.number(f"{where}.expect_value", t.get("expect_value"))
    params["expect_exponent"] = c.number(f"{where}.expect_exponent", t.get("expect_exponent"))
    params["tolerance"] = c.number(f"{where}.tolerance", t.get("tolerance"), positive=True)
    return params


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a YAML experiment config.

    Raises :class:`ParseError` for malformed text and :class:`ValidationError`
    carrying every problem found otherwise.
    """
    data = _load_yaml(text)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ParseError("top level must be a mapping")
    c = _Collector()
    _check_keys(c, "config", data, TOP_KEYS)

    functions: dict[str, Node | TwoParamSpec] = {}
    fdata = data.get("functions") or {}
    if not isinstance(fdata, dict):
        c.add("functions: expected a mapping of name -> spec")
        fdata = {}
    for name, spec in fdata.items():
        try:
            functions[str(name)] = spec_from_dict(spec)
        except (SpecFormatError, ValueError) as exc:
            c.add(f"functions.{name}: {exc}")

    compacts: dict[str, CompactSet] = {}
    cdata = data.get("compacts") or {}
    if not isinstance(cdata, dict):
        c.add("compacts: expected a mapping of name -> box")
        cdata = {}
    for name, box in cdata.items():
        where = f"compacts.{name}"
        if not isinstance(box, dict):
            c.add(f"{where}: expected {{lower, upper, points_per_axis}}")
            continue
        _check_keys(c, where, box, ("lower", "upper", "points_per_axis", "exclude_zero"))
        try:
            lo = [parse_number(v) for v in box.get("lower", [])]
            hi = [parse_number(v) for v in box.get("upper", [])]
            ppa = int(box.get("points_per_axis", 21))
            compacts[str(name)] = CompactSet.box(lo, hi, ppa, bool(box.get("exclude_zero", False)))
        except (ValueError, TypeError) as exc:
            c.add(f"{where}: {exc}")

    grid = _grid(c, "config", data, None, required=True)
    budget = _budget(c, "config", data, SearchBudget())

    tasks: list[TaskConfig] = []
    tdata = data.get("tasks") or []
    if not isinstance(tdata, list):
        c.add("tasks: expected a list")
        tdata = []
    seen = set()
    for i, t in enumerate(tdata):
        where = f"tasks[{i}]"
        if not isinstance(t, dict):
            c.add(f"{where}: expected a mapping")
            continue
        name = t.get("name")
        if not isinstance(name, str) or not name:
            c.add(f"{where}: missing 'name'")
            name = f"task{i}"
        elif name in seen:
            c.add(f"{where}: duplicate task name {name!r}")
        seen.add(name)
        where = f"tasks.{name}"
        ttype = t.get("type")
        if ttype == "classify":
            params = _classify_params(c, where, t, functions, compacts)
        elif ttype == "verify":
            params = _verify_params(c, where, t, functions, compacts)
        elif ttype == "seminorm":
            params = _seminorm_params(c, where, t, functions)
        else:
            c.add(f"{where}.type: expected one of {list(TASK_TYPES)}, got {ttype!r}")
            continue
        tgrid = _grid(c, where, t, grid) if grid is not None or any(k in t for k in GRID_KEYS) else None
        if tgrid is None:
            if grid is None and not any(k in t for k in GRID_KEYS):
                c.add(f"{where}: no interval/step given at top level or in the task")
            continue
        tbudget = _budget(c, where, t, budget)
        tasks.append(TaskConfig(name, ttype, params, tgrid, tbudget))

    outputs = data.get("outputs") or {}
    if not isinstance(outputs, dict):
        c.add("outputs: expected a mapping")
        outputs = {}

    if c.problems:
        raise ValidationError(c.problems)
    default_grid = grid or (tasks[0].grid if tasks else GridSettings(IntervalKind.half_line(1.0), 0.01))
    return ExperimentConfig(
        name=str(data.get("name", "experiment")),
        description=str(data.get("description", "")),
        functions=functions,
        compacts=compacts,
        grid=default_grid,
        budget=budget,
        tasks=tasks,
        outputs=dict(outputs),
        raw=data,
    )


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
