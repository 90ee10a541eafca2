"""Hypothesis-and-conclusion checks for composition principles.

Each verifier takes a field ``F(t, u)`` and an inner function ``x(t)``,
checks the hypotheses of a composition principle at tolerance, classifies
the composed function ``t -> F(t, x(t))`` and collects numerical diagnostics
from the corresponding proof estimates (a fitted bound constant, a
termwise Hölder chain and the n-fold window property).

Verifier tags:

``stepanov``              Stepanov exponents ``1/p = 1/q + 1/r``
``asymptotic-stepanov``   the same plus decaying perturbations of ``F`` and ``x``
``weyl``                  (equi-)Weyl, ``x`` and ``F`` at ``p``, conclusion at ``q = pr/(p+r)``
``weyl-variant``          Weyl, ``x`` at ``q``, conclusion at ``p``
``asymptotic-weyl``       ``weyl`` plus Weyl-vanishing perturbations
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import _parallel
from .errors import DegenerateK, DimensionMismatch, IntervalKindError
from .exponents import AsymptoticExponents, ExponentTriple, WeylExponentPair, identity_holds, show
from .functions import (
    GRID_SLACK,
    CompactSet,
    Kind,
    Node,
    SampledField,
    SampledFunction,
    Sum,
    TwoParamSpec,
    build,
    compose_two_param,
    pointwise_norm,
    sample_field,
    snap,
)
from .periods import (
    ClassMembership,
    Mode,
    SearchBudget,
    VanishingOrder,
    Verdict,
    WeylProfile,
    classify_equi_weyl,
    classify_sp_ap,
    classify_weyl,
    displacement_profile,
    equi_weyl_per_epsilon,
    n_fold_witness_check,
    shift_grid,
    stepanov_tail_means,
    verify_aaps,
    weyl_per_epsilon,
    weyl_profile,
    weyl_vanishing_check,
    worst,
)
from .seminorms import (
    QuadratureConfig,
    Rule,
    SeminormResult,
    WindowIntegrator,
    p_mean,
    stepanov_metric,
)

CHAIN_TOL = 1e-9
ENVELOPE_TOL = 1e-9
GROWTH_TOL = 0.01
STABILITY_BAND = 0.2


class Flavor(str, Enum):
    EQUI = "EquiWeyl"
    WEYL = "Weyl"

    @property
    def vanishing_order(self) -> VanishingOrder:
        return VanishingOrder.EQUI if self is Flavor.EQUI else VanishingOrder.WEYL


# ---------------------------------------------------------------------------
# Lipschitz envelopes
# ---------------------------------------------------------------------------


class EnvelopeMethod(str, Enum):
    ANALYTIC = "Analytic"
    PAIR_SAMPLED = "PairSampled"


@dataclass(frozen=True, eq=False)
class LipschitzEnvelope:
    """Samples of ``L_F(t)`` on a time grid."""

    samples: SampledFunction
    method: EnvelopeMethod

    @property
    def values(self) -> np.ndarray:
        return self.samples.values[:, 0]


def _pair_ratios(field_: SampledField, i: int) -> np.ndarray:
    pts = field_.compact.points
    vals = field_.values
    du = pointwise_norm(pts[i + 1 :] - pts[i], field_.norm)
    keep = du > 0
    if not keep.any():
        return np.zeros(field_.n)
    dv = pointwise_norm(vals[i + 1 :][keep] - vals[i], field_.norm)
    return (dv / du[keep][:, None]).max(axis=0)


def estimate_lipschitz_envelope(F: TwoParamSpec, K: CompactSet, like, h: float | None = None) -> LipschitzEnvelope:
    """``L(t_i) = max_{u != v in K^} |F(t_i,u) - F(t_i,v)| / |u - v|``."""
    if K.size < 2:
        raise DegenerateK("a Lipschitz envelope needs at least two sample points in K")
    fld = sample_field(F, K, like, h)
    rows = _parallel.pmap(lambda i: _pair_ratios(fld, i), range(K.size - 1))
    L = np.max(np.stack(rows), axis=0)
    samples = SampledFunction(fld.interval, fld.step, L, fld.origin, fld.norm)
    return LipschitzEnvelope(samples, EnvelopeMethod.PAIR_SAMPLED)


def analytic_envelope(spec: Node, like: SampledFunction) -> LipschitzEnvelope:
    """Envelope given in closed form as a one-parameter spec."""
    samples = build(spec, like.interval, like.step, like.norm)
    if samples.value_dimension != 1:
        raise DimensionMismatch("an envelope must be scalar")
    return LipschitzEnvelope(samples.with_values(np.abs(samples.values)), EnvelopeMethod.ANALYTIC)


def envelope_violation(env: LipschitzEnvelope, F: TwoParamSpec, us: np.ndarray, vs: np.ndarray) -> float:
    """Largest ``|F(t,u) - F(t,v)| - L(t) |u - v|`` over the given pairs and the grid."""
    t = env.samples.times()
    norm = env.samples.norm
    worst_excess = -math.inf
    for u, v in zip(np.atleast_2d(us), np.atleast_2d(vs)):
        fu = F.evaluate(t, np.broadcast_to(u, (t.size, u.size)))
        fv = F.evaluate(t, np.broadcast_to(v, (t.size, v.size)))
        excess = pointwise_norm(fu - fv, norm) - env.values * float(pointwise_norm(u - v, norm))
        worst_excess = max(worst_excess, float(excess.max()))
    return worst_excess


def check_envelope_bounded(env: LipschitzEnvelope, r, quad: QuadratureConfig = QuadratureConfig()
                           ) -> tuple[SeminormResult, Verdict]:
    """Unit-window ``S^r`` norm of the envelope and whether it looks bounded.

    The norm over the whole window is compared with the norm over its first
    half; growth beyond 1% means the value depends on the truncation and
    boundedness cannot be certified.
    """
    L = env.samples
    if math.isinf(float(r)):
        value = float(np.max(np.abs(L.values)))
        half = float(np.max(np.abs(L.values[: L.n // 2 + 1])))
        res = SeminormResult(value, 0.0, math.inf, L.interval.truncation_radius, L.origin)
    else:
        res = stepanov_metric(L, None, 1.0, float(r), quad)
        half_fn = L.restrict(0, L.n // 2 + 1)
        half = stepanov_metric(half_fn, None, 1.0, float(r), quad).value if half_fn.length >= 1 else res.value
    if not math.isfinite(res.value):
        return res, Verdict.FAIL
    if res.value > (1 + GROWTH_TOL) * half + 1e-12:
        return res, Verdict.INCONCLUSIVE
    return res, Verdict.PASS


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class HypothesisCheck:
    name: str
    verdict: Verdict
    detail: str = ""
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "verdict": self.verdict.value, "detail": self.detail, "data": self.data}


@dataclass
class CompositionReport:
    theorem_tag: str
    hypothesis_checks: list[HypothesisCheck]
    conclusion_checks: dict[str, ClassMembership]
    bound_fit: float | None
    exponents: dict
    rows: list[dict] = field(default_factory=list)
    diagnostics: list[HypothesisCheck] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def hypotheses_verdict(self) -> Verdict:
        return worst([h.verdict for h in self.hypothesis_checks])

    @property
    def conclusion_verdict(self) -> Verdict:
        return worst([c.verdict for c in self.conclusion_checks.values()])

    @property
    def conclusion_meaningful(self) -> bool:
        return self.hypotheses_verdict is Verdict.PASS

    @property
    def counterexample(self) -> bool:
        """Hypotheses pass but the conclusion fails."""
        return self.conclusion_meaningful and self.conclusion_verdict is Verdict.FAIL

    @property
    def verdict(self) -> Verdict:
        return worst(
            [self.hypotheses_verdict, self.conclusion_verdict] + [d.verdict for d in self.diagnostics]
        )

    def check(self, name: str) -> HypothesisCheck:
        for h in self.hypothesis_checks + self.diagnostics:
            if h.name == name:
                return h
        raise KeyError(name)

    def failing(self) -> list[str]:
        return [h.name for h in self.hypothesis_checks if h.verdict is not Verdict.PASS]


def _membership_check(name: str, m: ClassMembership) -> HypothesisCheck:
    if "final" in m.witnesses:
        detail = f"outer sequence over {m.witnesses['outer_axis']} ends at {m.witnesses['final']:.3e}"
    else:
        detail = "; ".join(f"eps={e['epsilon']}: {e['verdict']}" for e in m.per_epsilon) or "; ".join(m.notes)
    return HypothesisCheck(name, m.verdict, detail, {"class": m.class_tag.value})


def _range_check(name: str, x: SampledFunction, K: CompactSet) -> HypothesisCheck:
    lo = x.values.min(axis=0)
    hi = x.values.max(axis=0)
    if x.value_dimension != K.dimension:
        return HypothesisCheck(name, Verdict.FAIL, f"x is R^{x.value_dimension}-valued, K lives in R^{K.dimension}")
    ok = bool(np.all(np.isfinite(x.values))) and K.contains(x.values, 1e-9)
    detail = f"sampled range [{', '.join(f'{v:.6g}' for v in lo)}] .. [{', '.join(f'{v:.6g}' for v in hi)}]"
    return HypothesisCheck(name, Verdict.PASS if ok else Verdict.FAIL, detail,
                           {"lower": lo.tolist(), "upper": hi.tolist()})


def _envelope_check(name: str, env: LipschitzEnvelope, r, quad) -> tuple[HypothesisCheck, float]:
    res, v = check_envelope_bounded(env, r, quad)
    detail = f"||L||_S^{show(r)} = {res.value:.6g} ({env.method.value})"
    if v is Verdict.INCONCLUSIVE:
        detail += "; grows with the truncation window"
    return HypothesisCheck(name, v, detail, {"norm": res.value}), res.value


# ---------------------------------------------------------------------------
# Bound fit
# ---------------------------------------------------------------------------


def fit_bound(taus: np.ndarray, D_comp: np.ndarray, D_f: np.ndarray, D_x: np.ndarray,
              epsilons: Sequence[float], envelope_norm: float, max_fit_tau: float = math.inf
              ) -> tuple[float | None, list[dict], HypothesisCheck]:
    """Fit ``M`` in ``D_comp(tau) <= M (1 + ||L||) eps`` over common eps-periods.

    For each eps the constant is fitted against the eps actually realized by
    each common period, ``max(D_f, D_x) <= eps``, so that grid-snapped shifts
    at tiny eps do not distort the ratio.  The overall ``M`` is the maximum
    over the grid and the check reports whether the per-eps values stay
    within +-20% of their median.  Only shifts up to ``max_fit_tau`` enter
    the fit: beyond it the overlap left by the truncation is too short for
    the sup over window starts to be representative.  Every row is still
    checked against the fitted bound.
    """
    scale = 1 + envelope_norm
    realized = np.maximum(D_f, D_x)
    per_eps: dict[float, float] = {}
    stray = []
    for eps in epsilons:
        common = realized <= eps
        usable = common & (realized > 1e-9) & (taus <= max_fit_tau + GRID_SLACK)
        if usable.any():
            per_eps[eps] = float(np.max(D_comp[usable] / (scale * realized[usable])))
        exact = common & (realized <= 1e-9)
        if exact.any() and float(D_comp[exact].max()) > 1e-9:
            stray.append(eps)
    if not per_eps:
        return None, [], HypothesisCheck("bound_fit", Verdict.INCONCLUSIVE, "no common eps-periods with positive displacement")
    M = max(per_eps.values())
    rows = []
    for eps in epsilons:
        common = realized <= eps
        bound = M * scale * eps
        for t, d in zip(taus[common], D_comp[common]):
            rows.append({"epsilon": eps, "tau": float(t), "displacement": float(d), "bound": bound})
    dominated = all(r["displacement"] <= r["bound"] + 1e-12 for r in rows)
    med = float(np.median(list(per_eps.values())))
    stable = all(abs(m - med) <= STABILITY_BAND * med for m in per_eps.values())
    v = Verdict.PASS if dominated and stable and not stray else Verdict.FAIL if not dominated or stray else Verdict.INCONCLUSIVE
    detail = f"M = {M:.6g}; per eps " + ", ".join(f"{e}: {m:.4g}" for e, m in per_eps.items())
    if not stable:
        detail += "; per-eps constants spread beyond +-20%"
    if stray:
        detail += f"; nonzero composed displacement at exact common periods for eps {stray}"
    return M, rows, HypothesisCheck("bound_fit", v, detail, {"M": M, "per_epsilon": {str(k): v for k, v in per_eps.items()}})


# ---------------------------------------------------------------------------
# Hölder chain
# ---------------------------------------------------------------------------


def _window_means(y: np.ndarray, h: float, m: int, rule: Rule) -> np.ndarray:
    return WindowIntegrator(y, h, rule).means(m)


def holder_chain(F: TwoParamSpec, fld: SampledField, x: SampledFunction, env: LipschitzEnvelope,
                 tau: float, l: float, conclusion_exp: float, x_exp: float, r: float,
                 rule: Rule = Rule.TRAPEZOID) -> dict:
    """Termwise check of the window estimate behind the Weyl composition.

    For every window start ``t`` with window ``l`` compares

    ``M_c[F(.+tau, x(.+tau)) - F(., x(.))]``  against
    ``M_r[L(.+tau)] * M_x[x(.+tau) - x(.)] + M_c[sup_u |F(.+tau,u) - F(.,u)|]``

    where ``M_a`` is the ``a``-power mean over the window and ``u`` runs over
    ``K^`` together with ``x(s)`` itself.  Requires ``1/c = 1/r + 1/x_exp``.
    """
    h = x.step
    k = snap(tau, h)
    m = max(1, snap(l, h))
    n = x.n - k
    t = x.times()
    xs, xs_tau = x.values[:n], x.values[k:]
    comp = F.evaluate(t, x.values)
    lhs_y = pointwise_norm(comp[k:] - comp[:n], x.norm)
    dx = pointwise_norm(xs_tau - xs, x.norm)
    L_tau = env.values[k:]
    # sup over K^ and the point x(s) itself
    sup_K = pointwise_norm(fld.values[:, k:] - fld.values[:, :n], x.norm).max(axis=0)
    at_x = pointwise_norm(F.evaluate(t[k:], xs) - comp[:n], x.norm)
    sup_u = np.maximum(sup_K, at_x)
    c = conclusion_exp
    lhs = p_mean(_window_means(lhs_y**c, h, m, rule), c)
    if math.isinf(r):
        a_env = np.lib.stride_tricks.sliding_window_view(L_tau, m + 1).max(axis=-1)
    else:
        a_env = p_mean(_window_means(L_tau**r, h, m, rule), r)
    a = a_env * p_mean(_window_means(dx**x_exp, h, m, rule), x_exp)
    b = p_mean(_window_means(sup_u**c, h, m, rule), c)
    slack = lhs - (a + b)
    return {
        "tau": tau,
        "l": m * h,
        "max_excess": float(slack.max()),
        "lhs_max": float(lhs.max()),
        "envelope_term_max": float(a.max()),
        "field_term_max": float(b.max()),
    }


def _chain_check(rows: list[dict]) -> HypothesisCheck:
    if not rows:
        return HypothesisCheck("holder_chain", Verdict.INCONCLUSIVE, "no joint witness to evaluate")
    excess = max(r["max_excess"] for r in rows)
    v = Verdict.PASS if excess <= CHAIN_TOL else Verdict.FAIL
    return HypothesisCheck("holder_chain", v, f"max(lhs - terms) = {excess:.3e} over {len(rows)} (tau, l) pairs",
                           {"rows": rows, "max_excess": excess})


# ---------------------------------------------------------------------------
# Stepanov composition
# ---------------------------------------------------------------------------


def _displacements(f, ks, p, quad, threshold=None) -> np.ndarray:
    return displacement_profile(f, ks, Mode.STEPANOV, (1.0,), p, quad, threshold=threshold)[0]


def verify_theorem_stepanov(F: TwoParamSpec, x: SampledFunction, triple: ExponentTriple, K: CompactSet,
                            budget: SearchBudget = SearchBudget(), envelope: LipschitzEnvelope | None = None
                            ) -> CompositionReport:
    """Stepanov composition: ``F`` uniformly ``S^p``-AP with ``S^r`` envelope, ``x`` in ``S^q``-AP."""
    p, q, r = float(triple.p), float(triple.q), float(triple.r)
    quad = QuadratureConfig(budget.quadrature)
    fld = sample_field(F, K, x)
    env = envelope or estimate_lipschitz_envelope(F, K, x)
    checks = []
    m_F = classify_sp_ap(fld, p, budget)
    checks.append(_membership_check("F_stepanov_ap_uniform", m_F))
    env_check, env_norm = _envelope_check("envelope_bounded", env, r, quad)
    checks.append(env_check)
    checks.append(_membership_check("x_stepanov_ap", classify_sp_ap(x, q, budget)))
    checks.append(_range_check("x_range_in_K", x, K))

    composed = compose_two_param(F, x)
    conclusion = classify_sp_ap(composed, p, budget)

    ks = shift_grid(x, budget.tau_min, budget.tau_max, budget.tau_step)
    eps_max = max(budget.epsilons)
    D_f = _displacements(fld, ks, p, budget.quadrature, threshold=eps_max)
    D_x = _displacements(x, ks, q, budget.quadrature, threshold=eps_max)
    cand = np.maximum(D_f, D_x) <= eps_max
    D_c = np.full(ks.shape, np.nan)
    if cand.any():
        D_c[cand] = _displacements(composed, ks[cand], p, budget.quadrature)
    M, rows, fit = fit_bound(ks[cand] * x.step, D_c[cand], D_f[cand], D_x[cand], budget.epsilons, env_norm,
                             x.length / 2)
    report = CompositionReport(
        "stepanov",
        checks,
        {"composed": conclusion},
        M,
        triple.to_dict(),
        rows,
        [fit],
    )
    if not report.conclusion_meaningful:
        report.notes.append("hypotheses not all passed; the conclusion check is diagnostic only")
    return report


# ---------------------------------------------------------------------------
# Asymptotic Stepanov composition
# ---------------------------------------------------------------------------


def _unit_tail(y: np.ndarray, h: float, p: float, t_index: int, rule: Rule) -> float:
    m = max(1, snap(1.0, h))
    return float(p_mean(WindowIntegrator(y[t_index : t_index + m + 1] ** p, h, rule).means(m)[0], p))


def verify_prop_asymptotic(G: TwoParamSpec, y: SampledFunction, Q: TwoParamSpec, z: SampledFunction,
                           triple: ExponentTriple, K: CompactSet, K2: CompactSet,
                           budget: SearchBudget = SearchBudget(), tail_tolerance: float = 1e-6
                           ) -> CompositionReport:
    """Asymptotic Stepanov composition for ``f = G + Q`` and ``x = y + z``.

    ``Q`` and ``z`` must decay in the unit-window ``L^p`` (resp. ``L^q``)
    sense; the decay is read at ``t = 0.9 T`` on the truncated half line.
    """
    if y.interval.kind is not Kind.HALF_LINE:
        raise IntervalKindError("asymptotic composition is treated on [0, oo) only")
    y.check_same_grid(z)
    p, q = float(triple.p), float(triple.q)
    rule = budget.quadrature
    base = verify_theorem_stepanov(G, y, triple, K, budget)
    checks = [HypothesisCheck(f"base:{h.name}", h.verdict, h.detail, h.data) for h in base.hypothesis_checks]

    x = y + z
    t_end = 0.9 * y.end
    i_end = y.index_of(t_end)
    t_sched = [float(t) for t in np.arange(0.0, t_end + GRID_SLACK, 1.0)]
    if abs(t_sched[-1] - t_end) > GRID_SLACK:
        t_sched.append(t_end)

    Q_field = sample_field(Q, K2, y)
    q_tail = stepanov_tail_means(Q_field, p, t_sched, rule)
    checks.append(HypothesisCheck(
        "Q_vanishing", Verdict.PASS if q_tail[-1] <= tail_tolerance else Verdict.FAIL,
        f"sup_K' unit-window L^{show(triple.p)} mean at t={t_end:g}: {q_tail[-1]:.3e}",
        {"t_schedule": t_sched, "values": q_tail.tolist()},
    ))
    z_tail = stepanov_tail_means(z, q, t_sched, rule)
    checks.append(HypothesisCheck(
        "z_vanishing", Verdict.PASS if z_tail[-1] <= tail_tolerance else Verdict.FAIL,
        f"unit-window L^{show(triple.q)} mean of z at t={t_end:g}: {z_tail[-1]:.3e}",
        {"t_schedule": t_sched, "values": z_tail.tolist()},
    ))
    checks.append(_range_check("x_range_in_K2", x, K2))

    f_spec = TwoParamSpec(Sum((G.expr, Q.expr)), G.domain_dimension)
    composed = compose_two_param(f_spec, x)
    g_y = compose_two_param(G, y)
    g_x = compose_two_param(G, x)
    q_x = compose_two_param(Q, x)
    diff_tail = _unit_tail(pointwise_norm((g_x - g_y).values, x.norm), x.step, p, i_end, rule)
    pert_tail = _unit_tail(q_x.norms(), x.step, p, i_end, rule)
    tails = [
        HypothesisCheck("difference_tail", Verdict.PASS if diff_tail <= tail_tolerance else Verdict.FAIL,
                        f"(int_t^t+1 |G(s,x)-G(s,y)|^p)^(1/p) at t={t_end:g}: {diff_tail:.3e}", {"value": diff_tail}),
        HypothesisCheck("perturbation_tail", Verdict.PASS if pert_tail <= tail_tolerance else Verdict.FAIL,
                        f"(int_t^t+1 |Q(s,x)|^p)^(1/p) at t={t_end:g}: {pert_tail:.3e}", {"value": pert_tail}),
    ]
    phi = composed - g_y
    aaps = verify_aaps(composed, g_y, phi, p, tail_tolerance, budget)
    report = CompositionReport(
        "asymptotic-stepanov",
        checks,
        {"composed": aaps},
        base.bound_fit,
        triple.to_dict(),
        base.rows,
        tails + base.diagnostics,
    )
    if not report.conclusion_meaningful:
        report.notes.append("hypotheses not all passed; the conclusion check is diagnostic only")
    return report


# ---------------------------------------------------------------------------
# Weyl compositions
# ---------------------------------------------------------------------------


def _weyl_membership(f, p, budget, flavor: Flavor, profile=None) -> ClassMembership:
    if flavor is Flavor.EQUI:
        return classify_equi_weyl(f, p, budget, profile)
    return classify_weyl(f, p, budget, profile)


def _joint_check(prof_F: WeylProfile, prof_x: WeylProfile, budget: SearchBudget, flavor: Flavor
                 ) -> tuple[HypothesisCheck, list[dict], WeylProfile]:
    joint = WeylProfile(prof_F.schedule, prof_F.taus, np.maximum(prof_F.D, prof_x.D), prof_F.p)
    per_eps = (equi_weyl_per_epsilon if flavor is Flavor.EQUI else weyl_per_epsilon)(joint, budget)
    v = worst([Verdict(e["verdict"]) for e in per_eps])
    detail = "; ".join(f"eps={e['epsilon']}: {e['verdict']} (L={e['inclusion_length']:.4g})" for e in per_eps)
    if v is not Verdict.PASS:
        # the joint condition is an independent hypothesis; not finding it is not a refutation
        v = Verdict.INCONCLUSIVE
        detail += "; joint period search exhausted within the budget"
    return HypothesisCheck("joint_periods", v, detail, {"per_epsilon": per_eps}), per_eps, joint


def _chain_samples(joint: WeylProfile, per_eps: list[dict], flavor: Flavor) -> list[tuple[float, float]]:
    """A few (tau, l) pairs taken from the joint witnesses."""
    pairs = []
    for e in per_eps:
        if flavor is Flavor.EQUI and e.get("l"):
            taus = e["first_periods"]
            ls = [e["l"]]
        else:
            taus = [t for t, _ in e.get("first_periods_with_l", [])]
            ls = [joint.schedule[0], joint.schedule[-1]]
        nonzero = [t for t in taus if t > 0][:2] or taus[:1]
        for t in nonzero:
            for l in ls:
                if (t, l) not in pairs:
                    pairs.append((t, l))
    return pairs


def _weyl_family(tag: str, F: TwoParamSpec, x: SampledFunction, K: CompactSet, p_F: float, p_x: float,
                 p_c: float, r: float, flavor: Flavor, budget: SearchBudget, exponents: dict,
                 envelope: LipschitzEnvelope | None) -> tuple[CompositionReport, SampledFunction]:
    quad = QuadratureConfig(budget.quadrature)
    fld = sample_field(F, K, x)
    env = envelope or estimate_lipschitz_envelope(F, K, x)
    prof_F = weyl_profile(fld, p_F, budget)
    prof_x = weyl_profile(x, p_x, budget)
    checks = [_membership_check("F_weyl_ap_uniform", _weyl_membership(fld, p_F, budget, flavor, prof_F))]
    env_check, env_norm = _envelope_check("envelope_bounded", env, r, quad)
    checks.append(env_check)
    checks.append(_membership_check("x_weyl_ap", _weyl_membership(x, p_x, budget, flavor, prof_x)))
    checks.append(_range_check("x_range_in_K", x, K))
    joint_check, joint_eps, joint = _joint_check(prof_F, prof_x, budget, flavor)
    checks.append(joint_check)

    composed = compose_two_param(F, x)
    prof_c = weyl_profile(composed, p_c, budget)
    conclusion = _weyl_membership(composed, p_c, budget, flavor, prof_c)

    # bound fit on the witness window (equi) or the largest window (Weyl)
    diagnostics = []
    rows_by_l = {}
    for e in joint_eps:
        j = joint.schedule.index(e["l"]) if flavor is Flavor.EQUI and e.get("l") else len(joint.schedule) - 1
        rows_by_l.setdefault(j, []).append(e["epsilon"])
    M, rows = None, []
    fits = []
    for j, eps_list in sorted(rows_by_l.items()):
        cand = joint.D[j] <= max(eps_list)
        ks = np.array([snap(t, x.step) for t in joint.taus[cand]], dtype=int)
        D_c = (displacement_profile(composed, ks, Mode.WEYL, (joint.schedule[j],), p_c, budget.quadrature)[0]
               if ks.size else np.array([]))
        m_j, rows_j, fit_j = fit_bound(joint.taus[cand], D_c, prof_F.D[j][cand], prof_x.D[j][cand], eps_list,
                                       env_norm, x.length / 2)
        for row in rows_j:
            row["l"] = joint.schedule[j]
        rows += rows_j
        fits.append(fit_j)
        if m_j is not None:
            M = m_j if M is None else max(M, m_j)
    fit_v = worst([f.verdict for f in fits]) if fits else Verdict.INCONCLUSIVE
    diagnostics.append(HypothesisCheck("bound_fit", fit_v, "; ".join(f.detail for f in fits), {"M": M}))

    chain_rows = [
        holder_chain(F, fld, x, env, t, l, p_c, p_x, r, budget.quadrature)
        for t, l in _chain_samples(joint, joint_eps, flavor)
    ]
    diagnostics.append(_chain_check(chain_rows))

    nfold = {}
    for e in joint_eps:
        if flavor is not Flavor.EQUI or not e.get("periods_by_l"):
            continue
        # any passing window length is a witness; the shortest leaves the most room for n*l
        l = min(e["periods_by_l"])
        taus = e["periods_by_l"][l]
        if not taus:
            continue
        room = x.length - max(taus)
        factors = tuple(n for n in (2, 4, 8) if n * l <= room)
        if not factors:
            continue
        res_F = n_fold_witness_check(fld, p_F, l, taus, e["epsilon"], factors, budget.quadrature)
        res_x = n_fold_witness_check(x, p_x, l, taus, e["epsilon"], factors, budget.quadrature)
        nfold[str(e["epsilon"])] = {str(n): res_F[n] and res_x[n] for n in factors}
    if nfold:
        ok = all(all(v.values()) for v in nfold.values())
        diagnostics.append(HypothesisCheck("n_fold_windows", Verdict.PASS if ok else Verdict.FAIL,
                                           f"witness windows l scaled by n: {nfold}", {"results": nfold}))

    report = CompositionReport(tag, checks, {"composed": conclusion}, M, exponents, rows, diagnostics)
    report.notes.append("Weyl condition checked in limit form (tail of the l-schedule)")
    if not report.conclusion_meaningful:
        report.notes.append("hypotheses not all passed; the conclusion check is diagnostic only")
    return report, composed


def verify_theorem_weyl(F: TwoParamSpec, x: SampledFunction, pair: WeylExponentPair, K: CompactSet,
                        budget: SearchBudget = SearchBudget(), flavor: Flavor = Flavor.EQUI,
                        envelope: LipschitzEnvelope | None = None) -> CompositionReport:
    """(equi-)Weyl composition: ``F`` and ``x`` at ``p``, conclusion at ``q = pr/(p+r)``."""
    flavor = Flavor(flavor)
    report, _ = _weyl_family("weyl", F, x, K, float(pair.p), float(pair.p), float(pair.q), float(pair.r),
                             flavor, budget, {**pair.to_dict(), "flavor": flavor.value}, envelope)
    return report


def verify_theorem_weyl_variant(F: TwoParamSpec, x: SampledFunction, triple: ExponentTriple, K: CompactSet,
                                budget: SearchBudget = SearchBudget(),
                                envelope: LipschitzEnvelope | None = None) -> CompositionReport:
    """Weyl composition with ``x`` measured at ``q`` and the conclusion at ``p``."""
    report, _ = _weyl_family("weyl-variant", F, x, K, float(triple.p), float(triple.q), float(triple.p),
                             float(triple.r), Flavor.WEYL, budget, {**triple.to_dict(), "flavor": "Weyl"}, envelope)
    return report


def verify_theorem_asymptotic_weyl(G: TwoParamSpec, y: SampledFunction, Q: TwoParamSpec, z: SampledFunction,
                                   pair: WeylExponentPair, asym: AsymptoticExponents, K: CompactSet,
                                   K2: CompactSet, budget: SearchBudget = SearchBudget(),
                                   flavor: Flavor = Flavor.EQUI) -> CompositionReport:
    """(equi-)Weyl composition with Weyl-vanishing perturbations ``Q`` and ``z``.

    The composed function splits as ``G(., y) + Q(., x) + [G(., x) - G(., y)]``
    and each summand is classified on its own.
    """
    flavor = Flavor(flavor)
    if y.interval.kind is not Kind.HALF_LINE:
        raise IntervalKindError("asymptotic composition is treated on [0, oo) only")
    y.check_same_grid(z)
    exps = {**pair.to_dict(), **asym.to_dict(), "flavor": flavor.value}
    base, g_y = _weyl_family("asymptotic-weyl", G, y, K, float(pair.p), float(pair.p), float(pair.q),
                             float(pair.r), flavor, budget, exps, None)
    checks = [HypothesisCheck(f"base:{h.name}", h.verdict, h.detail, h.data) for h in base.hypothesis_checks]
    same_r = identity_holds(pair.r, asym.r)
    checks.append(HypothesisCheck(
        "exponent_identity", Verdict.PASS if asym.holds() and same_r else Verdict.FAIL,
        f"1/r + 1/q'' = 1/q''' with {asym.describe()}; r shared with {pair.describe()}: {same_r}",
        {"exact": asym.exact},
    ))
    order = flavor.vanishing_order
    q_field = sample_field(Q, K2, y)
    m_Q = weyl_vanishing_check(q_field, float(asym.q1), order, budget)
    checks.append(_membership_check("Q_weyl_vanishing_uniform", m_Q))
    checks.append(_membership_check("z_weyl_vanishing", weyl_vanishing_check(z, float(asym.q2), order, budget)))
    x = y + z
    checks.append(_range_check("x_range_in_K2", x, K2))

    q_x = compose_two_param(Q, x)
    diff = compose_two_param(G, x) - g_y
    conclusions = {
        "ap_part": base.conclusion_checks["composed"],
        "perturbation_part": weyl_vanishing_check(q_x, float(asym.q1), order, budget),
        "difference_part": weyl_vanishing_check(diff, float(asym.q3), order, budget),
    }
    report = CompositionReport("asymptotic-weyl", checks, conclusions, base.bound_fit, exps, base.rows,
                               base.diagnostics, list(base.notes))
    return report
