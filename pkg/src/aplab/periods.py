"""epsilon-period search, relative density and class-membership checks.

All classifiers share one engine: a *displacement profile* ``D(tau)`` (or
``D_l(tau)`` for a whole window schedule) computed over the overlap of the
truncated window with its translate.  Fields ``F(t, u)`` are handled as
stacks of sampled functions, one per point of the compact sample grid, and
every displacement is the max over the stack.

Verdicts are "at tolerance": the quantifier over all epsilon is replaced by a
finite epsilon-grid and relative density is only ever certified on a finite
tau-range.  For a range of length ``R`` and density fraction ``c`` (default
1/3) the found set passes when its largest gap is at most ``c*R``, fails when
the largest gap is at least ``(1-c)*R`` and is inconclusive in between.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from . import _parallel
from .errors import (
    EmptySearchRange,
    GridMismatch,
    IntervalKindError,
    ScheduleExceedsDomain,
    ShiftExceedsWindow,
)
from .functions import (
    GRID_SLACK,
    CompactSet,
    Kind,
    SampledField,
    SampledFunction,
    TwoParamSpec,
    as_stack,
    pointwise_norm,
    sample_field,
    snap,
)
from .seminorms import Rule, WindowIntegrator, check_exponent, geometric_schedule, p_mean, window_weights

DEFAULT_EPSILONS = (0.5, 0.1, 0.05, 0.01)
_CHUNK = 64
_MAX_STRIDE = 128


class Mode(str, Enum):
    UNIFORM = "Uniform"
    STEPANOV = "StepanovWindow"
    WEYL = "WeylWindow"


class Verdict(str, Enum):
    PASS = "PassAtTolerance"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"

    @property
    def exit_code(self) -> int:
        return {Verdict.PASS: 0, Verdict.FAIL: 1, Verdict.INCONCLUSIVE: 2}[self]


def worst(verdicts: Sequence[Verdict]) -> Verdict:
    """Fail beats Inconclusive beats Pass; an empty list passes."""
    vs = set(verdicts)
    if Verdict.FAIL in vs:
        return Verdict.FAIL
    if Verdict.INCONCLUSIVE in vs:
        return Verdict.INCONCLUSIVE
    return Verdict.PASS


class ClassTag(str, Enum):
    AP = "AP"
    AAP = "AAP"
    APSP = "APSp"
    AAPSP = "AAPSp"
    EQUI_WEYL_AP = "EquiWeylAP"
    WEYL_AP = "WeylAP"
    WEYL_VANISHING = "WeylVanishing"
    EQUI_WEYL_VANISHING = "EquiWeylVanishing"


@dataclass
class ClassMembership:
    class_tag: ClassTag
    verdict: Verdict
    witnesses: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    per_epsilon: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


# ---------------------------------------------------------------------------
# Search configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodSearchConfig:
    """One epsilon-period scan: ``tau`` runs over ``tau_min..tau_max``."""

    epsilon: float
    tau_min: float = 0.0
    tau_max: float = 50.0
    tau_step: float | None = None
    mode: Mode = Mode.UNIFORM
    l: float = 1.0
    p: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class SearchBudget:
    """Finite surrogates for the quantifiers of the class definitions."""

    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    tau_min: float = 0.0
    tau_max: float = 50.0
    tau_step: float | None = None
    l_schedule: tuple[float, ...] | None = None
    t_schedule: tuple[float, ...] | None = None
    density_fraction: float = 1.0 / 3.0
    continuity_tolerance: float = 0.1
    vanishing_tolerance: float = 1e-3
    quadrature: Rule = Rule.TRAPEZOID

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "quadrature", Rule(self.quadrature))
        if self.l_schedule is not None:
            object.__setattr__(self, "l_schedule", tuple(float(l) for l in self.l_schedule))
        if self.t_schedule is not None:
            object.__setattr__(self, "t_schedule", tuple(float(t) for t in self.t_schedule))
        if not 0 < self.density_fraction < 0.5:
            raise ValueError("density_fraction must lie in (0, 1/2)")

    def with_epsilons(self, epsilons) -> SearchBudget:
        if isinstance(epsilons, (int, float)):
            epsilons = (float(epsilons),)
        return replace(self, epsilons=tuple(epsilons))

    def describe(self) -> dict:
        return {
            "epsilons": list(self.epsilons),
            "tau_range": [self.tau_min, self.tau_max],
            "tau_step": self.tau_step,
            "l_schedule": list(self.l_schedule) if self.l_schedule else None,
            "t_schedule": list(self.t_schedule) if self.t_schedule else None,
            "density_fraction": self.density_fraction,
            "quadrature": self.quadrature.value,
        }


# ---------------------------------------------------------------------------
# Displacement engine
# ---------------------------------------------------------------------------

Sampled = SampledFunction | SampledField


def _interval(f: Sampled):
    return f.interval


def shift_grid(f: Sampled, tau_min: float, tau_max: float, tau_step: float | None) -> np.ndarray:
    """Integer grid offsets for the scanned shifts (tau snapped to ``k*h``)."""
    h = f.step
    k_step = 1 if tau_step is None else max(1, snap(tau_step, h))
    if tau_max < tau_min:
        raise EmptySearchRange(f"tau range [{tau_min}, {tau_max}] is empty")
    if f.interval.kind is Kind.HALF_LINE and tau_min < -GRID_SLACK * h:
        raise ShiftExceedsWindow("negative shifts are not available on the half line")
    k0 = snap(tau_min, h)
    k1 = int(math.floor(tau_max / h + GRID_SLACK))
    ks = np.arange(k0, k1 + 1, k_step)
    if ks.size == 0:
        raise EmptySearchRange(f"no grid shift in [{tau_min}, {tau_max}]")
    return ks


def _shift_views(stack: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """``(f(t + k h), f(t))`` over the overlap."""
    n = stack.shape[1]
    if k >= 0:
        return stack[:, k:], stack[:, : n - k]
    return stack[:, : n + k], stack[:, -k:]


def _window_steps(schedule: Sequence[float], h: float) -> list[int]:
    return [max(1, snap(l, h)) for l in schedule]


def _profile_exact(stack, h, norm, shifts, mode, ms, p, rule, common=None) -> np.ndarray:
    """Displacements for every shift.

    With ``common = (a0, a1)`` only times ``t`` in samples ``a0..a1-1`` are
    compared, the same set for every shift.
    """

    def one(k: int) -> np.ndarray:
        k = int(k)
        if common is None:
            a, b = _shift_views(stack, k)
        else:
            a, b = stack[:, common[0] + k : common[1] + k], stack[:, common[0] : common[1]]
        d = pointwise_norm(a - b, norm)
        if mode is Mode.UNIFORM:
            return np.array([d.max()])
        integ = WindowIntegrator(d**p, h, rule)
        return np.array([float(p_mean(integ.means(m).max(), p)) for m in ms])

    def run(idx: range) -> np.ndarray:
        return np.stack([one(shifts[i]) for i in idx], axis=1)

    parts = _parallel.pmap(run, _parallel.chunks(len(shifts), _CHUNK))
    return np.concatenate(parts, axis=1)


def displacement_profile(
    f: Sampled,
    shifts: np.ndarray,
    mode: Mode,
    schedule: Sequence[float] = (1.0,),
    p: float = 1.0,
    rule: Rule = Rule.TRAPEZOID,
    threshold: float | None = None,
) -> np.ndarray:
    """Displacements of *f* under every shift in *shifts* (grid offsets).

    Uniform mode returns shape ``(1, len(shifts))`` holding
    ``sup_t |f(t+tau) - f(t)|``; window modes return ``(len(schedule),
    len(shifts))`` holding ``D_{S_l}^p[f(.+tau), f]`` for each window length.
    The sup runs over the overlap of the window with its translate and, for
    fields, over the compact sample grid too.

    With a ``threshold`` only shifts that can possibly reach it are computed
    exactly.  On a fixed common overlap, moving the shift by ``d`` samples
    changes the displacement by at most the self-displacement of *f* at
    ``d`` (triangle inequality for the sup or the window p-mean), so a
    coarse scan gives rigorous lower bounds.  Entries whose bound already
    exceeds ``threshold`` hold that bound instead of the exact value.
    """
    mode = Mode(mode)
    stack = as_stack(f)
    n = stack.shape[1]
    ms = [0] if mode is Mode.UNIFORM else _window_steps(schedule, f.step)
    if mode is not Mode.UNIFORM:
        p = check_exponent(p)
    shifts = np.asarray(shifts, dtype=int)
    kmax = int(np.max(np.abs(shifts)))
    if kmax + max(ms) > n - 1:
        raise ShiftExceedsWindow(
            f"shift {kmax * f.step:g} plus window {max(ms) * f.step:g} "
            f"exceeds the sampled length {f.length:g}"
        )
    args = (f.step, f.norm)
    if threshold is None or len(shifts) < 4 * _CHUNK:
        return _profile_exact(stack, *args, shifts, mode, ms, p, rule)

    # self-displacement at small offsets bounds how fast D can change with the shift
    probe = np.arange(0, min(_MAX_STRIDE // 2, n - 1 - max(ms)) + 1)
    wobble = _profile_exact(stack, *args, probe, mode, ms, p, rule)
    ok = np.all(wobble <= threshold / 2, axis=0)
    half = int(np.argmin(ok)) - 1 if not ok.all() else probe[-1]
    stride = 2 * half + 1
    if stride < 3:
        return _profile_exact(stack, *args, shifts, mode, ms, p, rule)
    coarse = np.arange(int(shifts.min()) + half, int(shifts.max()) + half + 1, stride)
    everything = np.concatenate([coarse, shifts])
    a0, a1 = max(0, -int(everything.min())), min(n, n - int(everything.max()))
    if a1 - a0 < max(ms) + 1:
        return _profile_exact(stack, *args, shifts, mode, ms, p, rule)
    coarse_D = _profile_exact(stack, *args, coarse, mode, ms, p, rule, common=(a0, a1))
    nearest = np.clip(np.rint((shifts - coarse[0]) / stride).astype(int), 0, len(coarse) - 1)
    dist = np.abs(shifts - coarse[nearest])
    bound = np.full((len(ms), len(shifts)), 0.0)
    inside = dist <= half
    bound[:, inside] = np.maximum(coarse_D[:, nearest[inside]] - wobble[:, dist[inside]], 0.0)
    need = np.any(bound <= threshold, axis=0)
    out = bound
    if need.any():
        out[:, need] = _profile_exact(stack, *args, shifts[need], mode, ms, p, rule)
    return out


# ---------------------------------------------------------------------------
# Relative density
# ---------------------------------------------------------------------------


def max_gap(periods: Sequence[float], lo: float, hi: float) -> float:
    pts = np.concatenate([[lo], np.sort(np.asarray(periods, dtype=float)), [hi]])
    return float(np.max(np.diff(pts))) if pts.size > 1 else 0.0


def relative_density(periods: Sequence[float], L: float, range_: tuple[float, float]) -> bool:
    """True iff every length-``L`` subinterval of ``range_`` meets *periods*."""
    lo, hi = range_
    inside = [t for t in periods if lo - GRID_SLACK <= t <= hi + GRID_SLACK]
    return max_gap(inside, lo, hi) <= L + GRID_SLACK * max(1.0, L)


def density_verdict(gap: float, span: float, fraction: float) -> Verdict:
    slack = GRID_SLACK * max(1.0, span)
    if gap <= fraction * span + slack:
        return Verdict.PASS
    if gap >= (1 - fraction) * span - slack:
        return Verdict.FAIL
    return Verdict.INCONCLUSIVE


@dataclass
class PeriodReport:
    epsilon: float
    taus: np.ndarray
    displacements: np.ndarray
    periods: list
    max_gap: float
    inclusion_length: float
    relatively_dense: bool
    tau_range: tuple
    mode: Mode
    l: float
    p: float
    truncation_radius: float

    @property
    def epsilons_found(self) -> list:
        return self.periods

    def rows(self) -> list[dict]:
        return [
            {"tau": float(t), "displacement": float(d), "period": bool(d <= self.epsilon)}
            for t, d in zip(self.taus, self.displacements)
        ]


def find_epsilon_periods(f: Sampled, cfg: PeriodSearchConfig, inclusion_length: float | None = None,
                         rule: Rule = Rule.TRAPEZOID) -> PeriodReport:
    """Scan ``cfg``'s tau-grid and keep shifts whose displacement is <= epsilon.

    ``inclusion_length`` defaults to the length of the scanned range, the
    weakest length the scan can certify.
    """
    ks = shift_grid(f, cfg.tau_min, cfg.tau_max, cfg.tau_step)
    D = displacement_profile(f, ks, cfg.mode, (cfg.l,), cfg.p, rule, threshold=cfg.epsilon)[0]
    taus = ks * f.step
    found = [float(t) for t, d in zip(taus, D) if d <= cfg.epsilon]
    lo, hi = float(taus[0]), float(taus[-1])
    gap = max_gap(found, lo, hi)
    L = (hi - lo) if inclusion_length is None else float(inclusion_length)
    return PeriodReport(
        epsilon=cfg.epsilon,
        taus=taus,
        displacements=D,
        periods=found,
        max_gap=gap,
        inclusion_length=L,
        relatively_dense=bool(found) and gap <= L + GRID_SLACK * max(1.0, L) or (not found and hi - lo <= L),
        tau_range=(lo, hi),
        mode=cfg.mode,
        l=cfg.l,
        p=cfg.p,
        truncation_radius=f.interval.truncation_radius,
    )


# ---------------------------------------------------------------------------
# Helpers shared by the classifiers
# ---------------------------------------------------------------------------


def continuity_check(f: Sampled, tolerance: float) -> tuple[bool, float, float | None]:
    """Grid surrogate for continuity.

    Each adjacent-sample jump ``|f_{i+1} - f_i|`` must stay below
    ``tolerance * (1 + L_i)``, where ``L_i`` is the slope seen two steps away
    on either side.  Returns ``(ok, modulus, first offending time)``.
    """
    stack = as_stack(f)
    d = pointwise_norm(np.diff(stack, axis=1), f.norm)
    if d.shape[1] == 0:
        return True, 0.0, None
    padded = np.pad(d, ((0, 0), (2, 2)))
    neigh = np.maximum(padded[:, :-4], padded[:, 4:]) / f.step
    bad = d > tolerance * (1 + neigh)
    modulus = float(d.max())
    if not bad.any():
        return True, modulus, None
    i = int(np.argmax(bad.any(axis=0)))
    return False, modulus, f.origin + i * f.step


def _parameters(f: Sampled, budget: SearchBudget, **extra) -> dict:
    params = {
        "interval": f.interval.kind.value,
        "truncation_radius": f.interval.truncation_radius,
        "step": f.step,
        "norm": f.norm,
    }
    params.update(budget.describe())
    params.update(extra)
    return params


def _scan(f: Sampled, budget: SearchBudget) -> tuple[np.ndarray, np.ndarray]:
    ks = shift_grid(f, budget.tau_min, budget.tau_max, budget.tau_step)
    return ks, ks * f.step


def _combine(per_eps: list[dict]) -> Verdict:
    return worst([Verdict(e["verdict"]) for e in per_eps])


def _periodic_classes(f: Sampled, budget: SearchBudget, D: np.ndarray, taus: np.ndarray) -> list[dict]:
    lo, hi = float(taus[0]), float(taus[-1])
    out = []
    for eps in budget.epsilons:
        found = taus[D <= eps]
        gap = max_gap(found, lo, hi)
        v = density_verdict(gap, hi - lo, budget.density_fraction)
        out.append(
            {
                "epsilon": eps,
                "verdict": v.value,
                "inclusion_length": gap,
                "periods_found": int(found.size),
                "first_periods": [float(t) for t in found[:8]],
            }
        )
    return out


# ---------------------------------------------------------------------------
# Uniform (Bohr) and Stepanov classes
# ---------------------------------------------------------------------------


def classify_ap(f: Sampled, budget: SearchBudget = SearchBudget(),
                continuity_tolerance: float | None = None) -> ClassMembership:
    """Bohr almost periodicity at tolerance: continuity plus dense epsilon-periods."""
    tol = budget.continuity_tolerance if continuity_tolerance is None else continuity_tolerance
    tag = ClassTag.AP
    params = _parameters(f, budget, continuity_tolerance=tol)
    ok, modulus, where = continuity_check(f, tol)
    if not ok:
        return ClassMembership(
            tag,
            Verdict.FAIL,
            {"continuity_modulus": modulus, "jump_at": where},
            params,
            notes=[f"adjacent-sample jump at t={where:g} exceeds the continuity tolerance"],
        )
    ks, taus = _scan(f, budget)
    D = displacement_profile(f, ks, Mode.UNIFORM, threshold=max(budget.epsilons))[0]
    per_eps = _periodic_classes(f, budget, D, taus)
    return ClassMembership(
        tag,
        _combine(per_eps),
        {"continuity_modulus": modulus, "inclusion_lengths": {e["epsilon"]: e["inclusion_length"] for e in per_eps}},
        params,
        per_eps,
    )


def classify_sp_ap(f: Sampled, p: float, budget: SearchBudget = SearchBudget()) -> ClassMembership:
    """Stepanov p-almost periodicity: unit-window displacements of the Bochner transform."""
    p = check_exponent(p)
    ks, taus = _scan(f, budget)
    D = displacement_profile(f, ks, Mode.STEPANOV, (1.0,), p, budget.quadrature, threshold=max(budget.epsilons))[0]
    per_eps = _periodic_classes(f, budget, D, taus)
    return ClassMembership(
        ClassTag.APSP,
        _combine(per_eps),
        {"window": 1.0, "inclusion_lengths": {e["epsilon"]: e["inclusion_length"] for e in per_eps}},
        _parameters(f, budget, p=p),
        per_eps,
    )


# ---------------------------------------------------------------------------
# Weyl classes
# ---------------------------------------------------------------------------


def weyl_schedule(f: Sampled, budget: SearchBudget) -> tuple[float, ...]:
    """The l-schedule of *budget*, defaulting to doublings that fit the window."""
    room = f.length - max(abs(budget.tau_min), abs(budget.tau_max))
    if budget.l_schedule is not None:
        sched = budget.l_schedule
        if sched[-1] > room * (1 + GRID_SLACK):
            raise ScheduleExceedsDomain(
                f"l={sched[-1]} plus tau_max={budget.tau_max} exceeds the sampled length {f.length}"
            )
        return sched
    sched = geometric_schedule(room / 2)
    if not sched:
        raise ScheduleExceedsDomain("window too short for any l >= 1 after the tau-range")
    return sched


@dataclass
class WeylProfile:
    """Windowed displacements ``D[l_index, tau_index]`` for one function."""

    schedule: tuple[float, ...]
    taus: np.ndarray
    D: np.ndarray
    p: float


def weyl_profile(f: Sampled, p: float, budget: SearchBudget) -> WeylProfile:
    p = check_exponent(p)
    sched = weyl_schedule(f, budget)
    ks, taus = _scan(f, budget)
    # undecided shifts are those with D < 2 eps, so prune only above that
    D = displacement_profile(f, ks, Mode.WEYL, sched, p, budget.quadrature, threshold=2 * max(budget.epsilons))
    return WeylProfile(sched, taus, D, p)


def equi_weyl_per_epsilon(prof: WeylProfile, budget: SearchBudget, ok: np.ndarray | None = None) -> list[dict]:
    """Per-epsilon equi-Weyl search over the l-schedule.

    ``ok`` optionally masks the displacement test (used for joint searches):
    it must be a callable-free boolean array ``(eps, l, tau)``; when omitted
    the mask is ``D <= eps``.  Among passing window lengths the witness with
    the smallest inclusion length wins, ties going to the smaller l.
    """
    taus = prof.taus
    lo, hi = float(taus[0]), float(taus[-1])
    out = []
    for e_idx, eps in enumerate(budget.epsilons):
        rows = []
        for j, l in enumerate(prof.schedule):
            mask = (prof.D[j] <= eps) if ok is None else ok[e_idx, j]
            found = taus[mask]
            gap = max_gap(found, lo, hi)
            rows.append((density_verdict(gap, hi - lo, budget.density_fraction), gap, l, found))
        passing = [r for r in rows if r[0] is Verdict.PASS]
        if passing:
            v, gap, l, found = min(passing, key=lambda r: (r[1], r[2]))
        elif all(r[0] is Verdict.FAIL for r in rows):
            v, gap, l, found = Verdict.FAIL, min(r[1] for r in rows), None, np.array([])
        else:
            v, gap, l, found = Verdict.INCONCLUSIVE, min(r[1] for r in rows), None, np.array([])
        out.append(
            {
                "epsilon": eps,
                "verdict": v.value,
                "l": l,
                "inclusion_length": gap,
                "periods_found": int(found.size),
                "first_periods": [float(t) for t in found[:8]],
                "gaps_by_l": {float(r[2]): r[1] for r in rows},
                "periods_by_l": {float(r[2]): [float(t) for t in r[3][:8]] for r in passing},
            }
        )
    return out


def _tail_thresholds(D: np.ndarray, schedule: Sequence[float], eps: float) -> np.ndarray:
    """Per tau, the smallest l from which every scanned l keeps ``D <= eps``.

    ``nan`` where even the largest l fails.
    """
    ok = D <= eps
    # suffix-all along the schedule axis
    tail_ok = np.flip(np.logical_and.accumulate(np.flip(ok, axis=0), axis=0), axis=0)
    first = np.argmax(tail_ok, axis=0)
    sched = np.asarray(schedule, dtype=float)
    return np.where(tail_ok[-1], sched[first], np.nan)


def _undecided(D: np.ndarray, eps: float) -> np.ndarray:
    """Taus still decreasing towards epsilon at the end of the schedule."""
    if D.shape[0] < 3:
        return np.zeros(D.shape[1], dtype=bool)
    dec = (D[-3] > D[-2]) & (D[-2] > D[-1])
    return (D[-1] > eps) & (D[-1] < 2 * eps) & dec


def weyl_per_epsilon(prof: WeylProfile, budget: SearchBudget, thresholds: list[np.ndarray] | None = None,
                     undecided: list[np.ndarray] | None = None) -> list[dict]:
    """Per-epsilon Weyl (limit form) search: tau qualifies when the tail of the schedule stays below eps."""
    taus = prof.taus
    lo, hi = float(taus[0]), float(taus[-1])
    out = []
    for e_idx, eps in enumerate(budget.epsilons):
        thr = _tail_thresholds(prof.D, prof.schedule, eps) if thresholds is None else thresholds[e_idx]
        und = _undecided(prof.D, eps) if undecided is None else undecided[e_idx]
        qualifies = ~np.isnan(thr)
        found = taus[qualifies]
        gap = max_gap(found, lo, hi)
        v = density_verdict(gap, hi - lo, budget.density_fraction)
        if v is not Verdict.PASS and und.any():
            relaxed = density_verdict(max_gap(taus[qualifies | und], lo, hi), hi - lo, budget.density_fraction)
            if relaxed is Verdict.PASS:
                v = Verdict.INCONCLUSIVE
        sample = [(float(t), float(l)) for t, l in zip(found[:8], thr[qualifies][:8])]
        out.append(
            {
                "epsilon": eps,
                "verdict": v.value,
                "inclusion_length": gap,
                "periods_found": int(found.size),
                "undecided": int(und.sum()),
                "first_periods_with_l": sample,
            }
        )
    return out


def classify_equi_weyl(f: Sampled, p: float, budget: SearchBudget = SearchBudget(),
                       profile: WeylProfile | None = None) -> ClassMembership:
    """Equi-Weyl p-almost periodicity: one (l, L) pair per epsilon."""
    prof = profile or weyl_profile(f, p, budget)
    per_eps = equi_weyl_per_epsilon(prof, budget)
    return ClassMembership(
        ClassTag.EQUI_WEYL_AP,
        _combine(per_eps),
        {str(e["epsilon"]): {"l": e["l"], "L": e["inclusion_length"], "periods": e["first_periods"]} for e in per_eps},
        _parameters(f, budget, p=prof.p, l_schedule=list(prof.schedule)),
        per_eps,
    )


def classify_weyl(f: Sampled, p: float, budget: SearchBudget = SearchBudget(),
                  profile: WeylProfile | None = None) -> ClassMembership:
    """Weyl p-almost periodicity in the limit form (tail of the l-schedule)."""
    prof = profile or weyl_profile(f, p, budget)
    per_eps = weyl_per_epsilon(prof, budget)
    return ClassMembership(
        ClassTag.WEYL_AP,
        _combine(per_eps),
        {str(e["epsilon"]): {"L": e["inclusion_length"], "tau_l": e["first_periods_with_l"]} for e in per_eps},
        _parameters(f, budget, p=prof.p, l_schedule=list(prof.schedule)),
        per_eps,
        notes=["Weyl condition checked in limit form: D_l(tau) <= eps for every scanned l >= l(eps, tau)"],
    )


# ---------------------------------------------------------------------------
# Weyl vanishing
# ---------------------------------------------------------------------------


class VanishingOrder(str, Enum):
    WEYL = "WeylVanishing"
    EQUI = "EquiWeylVanishing"


def vanishing_schedules(f: Sampled, budget: SearchBudget) -> tuple[tuple[float, ...], tuple[float, ...]]:
    L = f.length
    l_sched = budget.l_schedule or geometric_schedule(L / 4)
    if budget.t_schedule is not None:
        t_sched = budget.t_schedule
    else:
        t_sched = (0.0,) + geometric_schedule(L - l_sched[-1])
    if t_sched[-1] + l_sched[-1] > L * (1 + GRID_SLACK):
        raise ScheduleExceedsDomain(f"t={t_sched[-1]} plus l={l_sched[-1]} exceeds the sampled length {L}")
    return tuple(t_sched), tuple(l_sched)


def tail_window_table(f: Sampled, p: float, t_schedule: Sequence[float], l_schedule: Sequence[float],
                      rule: Rule = Rule.TRAPEZOID) -> np.ndarray:
    """``V[i, j] = sup_{x >= 0} ((1/l_j) int_x^{x+l_j} |q(t_i + s)|^p ds)^(1/p)``."""
    p = check_exponent(p)
    stack = as_stack(f)
    y = pointwise_norm(stack, f.norm) ** p
    integ = WindowIntegrator(y, f.step, rule)
    V = np.empty((len(t_schedule), len(l_schedule)))
    t_idx = [snap(t - f.origin, f.step) for t in t_schedule]
    for j, l in enumerate(l_schedule):
        means = integ.means(max(1, snap(l, f.step))).max(axis=0)
        suffix = np.maximum.accumulate(means[::-1])[::-1]
        for i, ti in enumerate(t_idx):
            if ti >= suffix.size or ti < 0:
                raise ScheduleExceedsDomain(f"t={t_schedule[i]} with l={l} leaves the window")
            V[i, j] = p_mean(suffix[ti], p)
    return V


def _vanishing_verdict(seq: np.ndarray, tol: float) -> Verdict:
    tail = seq[-2:] if seq.size >= 2 else seq
    if np.all(tail <= tol):
        return Verdict.PASS
    mid = seq[seq.size // 2]
    if seq[-1] >= 0.5 * mid:
        return Verdict.FAIL
    return Verdict.INCONCLUSIVE


def weyl_vanishing_check(q: Sampled, p: float, order: VanishingOrder = VanishingOrder.WEYL,
                         budget: SearchBudget = SearchBudget()) -> ClassMembership:
    """Iterated-limit test of Weyl p-vanishing on the half line.

    The inner limit is read off the last schedule entry of the inner variable
    and the outer sequence must reach the vanishing tolerance.
    """
    order = VanishingOrder(order)
    if q.interval.kind is not Kind.HALF_LINE:
        raise IntervalKindError("Weyl vanishing is defined on [0, oo)")
    t_sched, l_sched = vanishing_schedules(q, budget)
    V = tail_window_table(q, p, t_sched, l_sched, budget.quadrature)
    tol = budget.vanishing_tolerance
    if order is VanishingOrder.WEYL:
        inner = V[:, -1]
        gaps = [float(np.max(np.abs(np.diff(row[-3:])))) if row.size > 1 else math.inf for row in V]
        outer_axis = "t"
    else:
        inner = V[-1, :]
        gaps = [float(np.max(np.abs(np.diff(col[-3:])))) if col.size > 1 else math.inf for col in V.T]
        outer_axis = "l"
    v = _vanishing_verdict(inner, tol)
    notes = []
    if v is Verdict.PASS and gaps[-1] >= tol:
        notes.append("inner limit estimate at the end of the outer schedule is not converged")
    tag = ClassTag.WEYL_VANISHING if order is VanishingOrder.WEYL else ClassTag.EQUI_WEYL_VANISHING
    return ClassMembership(
        tag,
        v,
        {"outer_axis": outer_axis, "outer_sequence": [float(x) for x in inner], "final": float(inner[-1])},
        _parameters(q, budget, p=float(p), t_schedule=list(t_sched), l_schedule=list(l_sched),
                    vanishing_tolerance=tol),
        [{"inner_cauchy_gaps": gaps}],
        notes,
    )


def stepanov_tail_means(f: Sampled, p: float, t_schedule: Sequence[float], rule: Rule = Rule.TRAPEZOID) -> np.ndarray:
    """``sup_{u in K^} (int_t^{t+1} |f(s, u)|^p ds)^(1/p)`` along *t_schedule*.

    The unit-window surrogate for membership of the Bochner transform in C_0.
    """
    p = check_exponent(p)
    y = pointwise_norm(as_stack(f), f.norm) ** p
    m = max(1, snap(1.0, f.step))
    w = window_weights(m, f.step, rule) / (m * f.step)
    # direct sums rather than prefix differences: tails can sit far below round-off of the running total
    out = []
    for t in t_schedule:
        i = snap(t - f.origin, f.step)
        if i < 0 or i + m > y.shape[-1] - 1:
            raise ScheduleExceedsDomain(f"unit window at t={t} leaves the sampled window")
        out.append(float(p_mean(np.max(y[..., i : i + m + 1] @ w), p)))
    return np.array(out)


# ---------------------------------------------------------------------------
# Asymptotic classes (verification against a supplied decomposition)
# ---------------------------------------------------------------------------


def _tail_start(f: Sampled) -> int:
    return int(math.ceil((0.9 * (f.origin + f.length) - f.origin) / f.step - GRID_SLACK))


def verify_aap(f: SampledFunction, g: SampledFunction, phi: SampledFunction, epsilon: float,
               budget: SearchBudget = SearchBudget()) -> ClassMembership:
    """Check ``f = g + phi`` with ``g`` almost periodic and ``phi`` small on the last tenth."""
    if f.interval.kind is not Kind.HALF_LINE:
        raise IntervalKindError("asymptotic almost periodicity is treated on [0, oo) only")
    f.check_same_grid(g)
    f.check_same_grid(phi)
    residual = float(np.max((f - (g + phi)).norms()))
    ap = classify_ap(g, budget)
    tail = float(np.max(phi.norms()[_tail_start(phi):]))
    checks = {
        "decomposition_residual": residual <= epsilon,
        "g_almost_periodic": ap.verdict.value,
        "phi_tail_small": tail <= epsilon,
    }
    if residual > epsilon or tail > epsilon or ap.verdict is Verdict.FAIL:
        v = Verdict.FAIL
    else:
        v = ap.verdict
    return ClassMembership(
        ClassTag.AAP,
        v,
        {"residual": residual, "phi_tail_max": tail, "g_inclusion_lengths": ap.witnesses.get("inclusion_lengths")},
        _parameters(f, budget, epsilon=epsilon, tail_from=0.9 * f.end),
        notes=[f"{k}: {val}" for k, val in checks.items()],
    )


def verify_aaps(f: SampledFunction, g: SampledFunction, phi: SampledFunction, p: float, epsilon: float,
                budget: SearchBudget = SearchBudget()) -> ClassMembership:
    """Stepanov analogue of :func:`verify_aap` with unit-window L^p quantities."""
    if f.interval.kind is not Kind.HALF_LINE:
        raise IntervalKindError("asymptotic Stepanov almost periodicity is treated on [0, oo) only")
    f.check_same_grid(g)
    f.check_same_grid(phi)
    p = check_exponent(p)
    diff = f - (g + phi)
    y = diff.norms() ** p
    residual = float(p_mean(WindowIntegrator(y, f.step, budget.quadrature).means(snap(1.0, f.step)).max(), p))
    ap = classify_sp_ap(g, p, budget)
    t0 = 0.9 * f.end
    tail_ts = np.arange(t0, f.end - 1 + GRID_SLACK, f.step * max(1, snap(0.25, f.step)))
    tail = float(np.max(stepanov_tail_means(phi, p, tail_ts, budget.quadrature))) if tail_ts.size else math.nan
    if residual > epsilon or not tail <= epsilon or ap.verdict is Verdict.FAIL:
        v = Verdict.FAIL
    else:
        v = ap.verdict
    return ClassMembership(
        ClassTag.AAPSP,
        v,
        {"residual": residual, "phi_tail_max": tail, "g_verdict": ap.verdict.value},
        _parameters(f, budget, p=p, epsilon=epsilon, tail_from=t0),
    )


# ---------------------------------------------------------------------------
# Two-parameter variants
# ---------------------------------------------------------------------------


def _field(F: TwoParamSpec | SampledField, K: CompactSet | None, like) -> SampledField:
    if isinstance(F, SampledField):
        return F
    if K is None or like is None:
        raise GridMismatch("sampling a field needs a compact set and a time grid")
    if isinstance(like, tuple):
        return sample_field(F, K, like[0], like[1])
    return sample_field(F, K, like)


def _uniform_note(m: ClassMembership, field_: SampledField) -> ClassMembership:
    m.parameters["compact_points"] = int(field_.compact.size)
    m.parameters["compact_box"] = [list(field_.compact.lower), list(field_.compact.upper)]
    m.notes.append("displacements are maxima over the compact sample grid")
    return m


def classify_ap_uniform(F, K: CompactSet | None = None, like=None, budget: SearchBudget = SearchBudget()):
    fld = _field(F, K, like)
    return _uniform_note(classify_ap(fld, budget), fld)


def classify_sp_ap_uniform(F, K: CompactSet | None = None, like=None, p: float = 1.0,
                           budget: SearchBudget = SearchBudget()):
    fld = _field(F, K, like)
    return _uniform_note(classify_sp_ap(fld, p, budget), fld)


def classify_equi_weyl_uniform(F, K: CompactSet | None = None, like=None, p: float = 1.0,
                               budget: SearchBudget = SearchBudget()):
    fld = _field(F, K, like)
    return _uniform_note(classify_equi_weyl(fld, p, budget), fld)


def classify_weyl_uniform(F, K: CompactSet | None = None, like=None, p: float = 1.0,
                          budget: SearchBudget = SearchBudget()):
    fld = _field(F, K, like)
    return _uniform_note(classify_weyl(fld, p, budget), fld)


def weyl_vanishing_uniform(F, K: CompactSet | None = None, like=None, p: float = 1.0,
                           order: VanishingOrder = VanishingOrder.WEYL, budget: SearchBudget = SearchBudget()):
    fld = _field(F, K, like)
    return _uniform_note(weyl_vanishing_check(fld, p, order, budget), fld)


def n_fold_witness_check(f: Sampled, p: float, l: float, taus: Sequence[float], eps: float,
                         factors: Sequence[int] = (2, 4, 8), rule: Rule = Rule.TRAPEZOID) -> dict:
    """If ``D_l(tau) <= eps`` then ``D_{n l}(tau) <= eps``; evaluate both sides."""
    ks = np.array([snap(t, f.step) for t in taus], dtype=int)
    sched = [l] + [n * l for n in factors]
    D = displacement_profile(f, ks, Mode.WEYL, sched, p, rule)
    base_ok = D[0] <= eps
    result = {}
    for i, n in enumerate(factors, start=1):
        result[n] = bool(np.all(D[i][base_ok] <= eps)) and bool(np.all(D[i] <= D[0] + 1e-12))
    return result


__all__ = [name for name in dir() if not name.startswith("_")]
