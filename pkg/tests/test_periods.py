from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aplab.corpus import random_scalar_spec
from aplab.errors import EmptySearchRange, GridMismatch, ShiftExceedsWindow
from aplab.functions import (
    Argument,
    Characteristic,
    CompactSet,
    Constant,
    ExpDecay,
    IntervalKind,
    Product,
    ScalarScale,
    SignOfTrig,
    Sum,
    Time,
    TrigSum,
    TwoParamSpec,
    build,
    sin,
)
from aplab.periods import (
    ClassTag,
    Mode,
    PeriodSearchConfig,
    SearchBudget,
    VanishingOrder,
    Verdict,
    classify_ap,
    classify_ap_uniform,
    classify_equi_weyl,
    classify_sp_ap,
    classify_weyl,
    density_verdict,
    displacement_profile,
    find_epsilon_periods,
    max_gap,
    n_fold_witness_check,
    relative_density,
    shift_grid,
    verify_aap,
    verify_aaps,
    weyl_vanishing_check,
    worst,
)

TWO_FREQ = TrigSum((1.0, 1.0), (1.0, math.sqrt(2.0)))


def oracle_profile(values, h, k, m, p):
    """Direct loop: sup over windows of the shifted difference."""
    n = values.shape[0]
    lo, hi = max(0, -k), n - 1 - max(0, k)
    diff = np.abs(values[lo + k : hi + k + 1] - values[lo : hi + 1]).max(axis=1)
    if m == 0:
        return diff.max()
    best = 0.0
    for i in range(diff.size - m):
        seg = diff[i : i + m + 1] ** p
        integral = h * (seg.sum() - 0.5 * (seg[0] + seg[-1]))
        best = max(best, (integral / (m * h)) ** (1 / p))
    return best


@pytest.mark.parametrize("kind", ["half", "full"])
@pytest.mark.parametrize("mode,l", [(Mode.UNIFORM, 1.0), (Mode.STEPANOV, 1.0), (Mode.STEPANOV, 2.5)])
def test_profile_matches_loop_oracle(kind, mode, l):
    h = 0.05
    iv = IntervalKind.half_line(12) if kind == "half" else IntervalKind.full_line(6)
    f = build(Sum((TWO_FREQ, Characteristic(1, 2))), iv, h)
    ks = np.arange(0, 80, 7) if kind == "half" else np.arange(-60, 61, 11)
    D = displacement_profile(f, ks, mode, (l,), 2.0)[0]
    m = 0 if mode is Mode.UNIFORM else int(round(l / h))
    expect = [oracle_profile(f.values, h, int(k), m, 2.0) for k in ks]
    assert np.allclose(D, expect, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(list(Mode)), st.floats(0.05, 1.5))
def test_pruned_profile_is_exact_below_threshold(seed, mode, thr):
    f = build(random_scalar_spec(np.random.default_rng(seed)), IntervalKind.half_line(30), 0.05)
    ks = np.arange(0, 300)
    sched = (1.0, 2.0)
    exact = displacement_profile(f, ks, mode, sched, 1.5)
    pruned = displacement_profile(f, ks, mode, sched, 1.5, threshold=thr)
    below = exact <= thr
    assert np.allclose(pruned[below], exact[below], atol=1e-12)
    # pruned entries are rigorous lower bounds that already exceed the threshold
    assert np.all(pruned <= exact + 1e-9)
    assert np.all(pruned[~below] > thr - 1e-12)


def test_sin_exact_period_found():
    h = 2 * math.pi / 600
    f = build(sin(), IntervalKind.half_line(40), h)
    rep = find_epsilon_periods(f, PeriodSearchConfig(1e-6, 6.0, 6.6))
    assert any(abs(t - 2 * math.pi) < 1e-9 for t in rep.periods)
    i = int(np.argmin(np.abs(rep.taus - 2 * math.pi)))
    assert rep.displacements[i] <= 1e-9


def test_two_frequency_periods_relatively_dense():
    f = build(TWO_FREQ, IntervalKind.half_line(400), 2 * math.pi / 300)
    rep = find_epsilon_periods(f, PeriodSearchConfig(0.1, 0.0, 200.0))
    assert rep.periods
    assert rep.relatively_dense and rep.max_gap <= 200


def test_huge_epsilon_accepts_everything():
    f = build(TWO_FREQ, IntervalKind.half_line(40), 0.1)
    rep = find_epsilon_periods(f, PeriodSearchConfig(10.0, 0.0, 10.0, tau_step=0.5))
    assert len(rep.periods) == rep.taus.size
    assert rep.max_gap == pytest.approx(0.5)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_period_sets_shrink_with_epsilon(seed):
    f = build(random_scalar_spec(np.random.default_rng(seed)), IntervalKind.half_line(20), 0.05)
    sets = []
    for eps in (1.0, 0.5, 0.1, 0.01):
        rep = find_epsilon_periods(f, PeriodSearchConfig(eps, 0.0, 8.0, mode=Mode.STEPANOV))
        sets.append(set(np.round(rep.periods, 9)))
    for big, small in zip(sets, sets[1:]):
        assert small <= big


def test_relative_density_examples():
    taus = [2 * math.pi * k for k in range(32)]
    assert relative_density(taus, 7, (0, 195))
    assert not relative_density(taus, 6, (0, 195))
    assert relative_density([5.0], 5.0, (0, 10))
    assert not relative_density([3.0], 5.0, (0, 10))
    assert not relative_density([], 5.0, (0, 10))
    assert relative_density([], 5.0, (0, 4))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 100), max_size=30), st.floats(0.1, 120))
def test_relative_density_matches_max_gap(taus, L):
    gap = max_gap(taus, 0, 100)
    assert relative_density(taus, L, (0, 100)) == (gap <= L + 1e-9 * max(1.0, L))


def test_density_verdict_bands():
    assert density_verdict(10, 60, 1 / 3) is Verdict.PASS
    assert density_verdict(30, 60, 1 / 3) is Verdict.INCONCLUSIVE
    assert density_verdict(45, 60, 1 / 3) is Verdict.FAIL


def test_worst_ordering():
    assert worst([Verdict.PASS, Verdict.INCONCLUSIVE]) is Verdict.INCONCLUSIVE
    assert worst([Verdict.INCONCLUSIVE, Verdict.FAIL, Verdict.PASS]) is Verdict.FAIL
    assert worst([]) is Verdict.PASS
    assert [v.exit_code for v in Verdict] == [0, 1, 2]


def test_shift_grid_errors():
    f = build(sin(), IntervalKind.half_line(10), 0.1)
    with pytest.raises(EmptySearchRange):
        shift_grid(f, 5, 4, None)
    with pytest.raises(ShiftExceedsWindow):
        shift_grid(f, -1, 4, None)


def budget(**kw):
    return SearchBudget(**kw)


def test_ap_two_frequency_passes():
    f = build(TWO_FREQ, IntervalKind.half_line(1200), 2 * math.pi / 600)
    m = classify_ap(f, budget(epsilons=(0.5, 0.1), tau_max=600))
    assert m.verdict is Verdict.PASS
    assert m.class_tag is ClassTag.AP
    assert all(e["periods_found"] > 0 for e in m.per_epsilon)


def test_sign_sin_fails_ap_passes_stepanov():
    f = build(SignOfTrig(1.0), IntervalKind.half_line(200), 2 * math.pi / 600)
    b = budget(epsilons=(0.5, 0.1))
    assert classify_ap(f, b).verdict is Verdict.FAIL
    assert classify_sp_ap(f, 1, b).verdict is Verdict.PASS


def test_decay_and_growth_fail_ap():
    half = IntervalKind.half_line(200)
    b = budget(epsilons=(0.5, 0.1))
    assert classify_ap(build(ExpDecay(1.0), half, 0.01), b).verdict is Verdict.FAIL
    assert classify_ap(build(Time(), half, 0.01), b).verdict is Verdict.FAIL
    assert classify_sp_ap(build(Time(), half, 0.01), 1, b).verdict is Verdict.FAIL


def test_indicator_not_stepanov_ap():
    f = build(Characteristic(0, 1), IntervalKind.half_line(200), 0.01)
    assert classify_sp_ap(f, 1, budget(epsilons=(0.05,))).verdict is Verdict.FAIL


def test_indicator_stepanov_displacement_is_mass_moved():
    # the unit window over [0, 1] loses min(tau, 1) of mass and gains nothing on the half line
    f = build(Characteristic(0, 1), IntervalKind.half_line(50), 0.01)
    ks = np.array([10, 50, 100, 300])
    D = displacement_profile(f, ks, Mode.STEPANOV, (1.0,), 1.0)[0]
    assert np.allclose(D, np.minimum(ks * 0.01, 1.0), atol=0.011)


def test_indicator_equi_weyl_and_weyl():
    f = build(Characteristic(0, 1), IntervalKind.full_line(200), 0.01)
    b = budget(epsilons=(0.1,))
    m = classify_equi_weyl(f, 1, b)
    assert m.verdict is Verdict.PASS
    assert m.per_epsilon[0]["l"] >= 20
    assert classify_weyl(f, 1, b).verdict is Verdict.PASS


def test_linear_fails_weyl_classes():
    f = build(Time(), IntervalKind.half_line(200), 0.01)
    b = budget(epsilons=(0.5, 0.1))
    assert classify_equi_weyl(f, 1, b).verdict is Verdict.FAIL
    assert classify_weyl(f, 1, b).verdict is Verdict.FAIL


@pytest.mark.parametrize("order", list(VanishingOrder))
def test_vanishing_examples(order):
    half = IntervalKind.half_line(200)
    b = SearchBudget()
    assert weyl_vanishing_check(build(Characteristic(0, 1), half, 0.01), 1, order, b).verdict is Verdict.PASS
    assert weyl_vanishing_check(build(ExpDecay(1.0), half, 0.01), 1, order, b).verdict is Verdict.PASS
    assert weyl_vanishing_check(build(Constant(1.0), half, 0.01), 1, order, b).verdict is Verdict.FAIL


def test_verify_aap_examples():
    half = IntervalKind.half_line(20)
    h = 2 * math.pi / 300
    b = budget(epsilons=(0.1,), tau_max=18.5)
    g = build(sin(), half, h)
    phi = build(ExpDecay(1.0), half, h)
    f = build(Sum((sin(), ExpDecay(1.0))), half, h)
    assert verify_aap(f, g, phi, 1e-3, b).verdict is Verdict.PASS
    assert verify_aap(g, g, g.zeros_like(), 1e-3, b).verdict is Verdict.PASS
    osc = build(ScalarScale(0.5, SignOfTrig(1.0)), half, h)
    f2 = build(Sum((sin(), ScalarScale(0.5, SignOfTrig(1.0)))), half, h)
    assert verify_aap(f2, g, osc, 1e-3, b).verdict is Verdict.FAIL
    assert verify_aaps(f, g, phi, 1, 1e-3, b).verdict is Verdict.PASS


def test_verify_aap_grid_mismatch():
    half = IntervalKind.half_line(20)
    f = build(sin(), half, 0.1)
    g = build(sin(), half, 0.05)
    with pytest.raises(GridMismatch):
        verify_aap(f, g, g, 0.1)


def test_uniform_field_classes():
    like = build(sin(), IntervalKind.half_line(100), 2 * math.pi / 300)
    b = budget(epsilons=(0.5, 0.1))
    K = CompactSet.box([-1], [1], 11)
    assert classify_ap_uniform(TwoParamSpec(Product((sin(), Argument())), 1), K, like, b).verdict is Verdict.PASS
    assert classify_ap_uniform(TwoParamSpec(Argument(), 1), K, like, b).verdict is Verdict.PASS
    K0 = CompactSet.box([-1], [1], 11, exclude_zero=True)
    assert classify_ap_uniform(TwoParamSpec(Product((Time(), Argument())), 1), K0, like, b).verdict is Verdict.FAIL


def test_n_fold_windows_keep_witness_periods():
    f = build(TWO_FREQ, IntervalKind.half_line(200), 2 * math.pi / 300)
    taus = [2 * math.pi * k for k in range(1, 6)]
    res = n_fold_witness_check(f, 2, 4.0, taus, 0.5)
    assert set(res) == {2, 4, 8}
