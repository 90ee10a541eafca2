"""End-to-end acceptance checks, one group per criterion.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from aplab.cli import preset_names, preset_text
from aplab.composition import CHAIN_TOL
from aplab.config import parse_config
from aplab.exponents import asymptotic_exponents, weyl_composition_exponent, weyl_threshold
from aplab.periods import Verdict
from aplab.runner import csv_body, run

PASS, FAIL = Verdict.PASS, Verdict.FAIL


def criterion(n, desc):
    return pytest.mark.criterion(n, desc)


# -- 1 -----------------------------------------------------------------------

C1 = criterion(1, "power-mean monotonicity on 200 random specs, runtime < 10 s")


@C1
def test_power_mean_sweep_holds(preset_runs):
    pr = preset_runs["lemma1-sweep", 1]
    (res,) = pr.results
    assert res.verdict is PASS
    assert len(res.rows) == 200
    for row in res.rows:
        assert 1 <= row["p_low"] < row["p_high"] <= 6
        assert row["lhs"] <= row["rhs"] + 1e-9
    assert pr.seconds < 10


# -- 2 -----------------------------------------------------------------------

C2 = criterion(2, "closed-form Stepanov and Weyl seminorm oracles, runtime < 30 s")


@C2
def test_stepanov_sin_oracle(preset_runs):
    pr = preset_runs["seminorm-oracles", 1]
    res = pr.result("sin-stepanov-l2pi-p2")
    cfg = parse_config(preset_text("seminorm-oracles"))
    grid = next(t.grid for t in cfg.tasks if t.name == res.name)
    assert grid.step <= 1e-3
    assert res.summary["value"] == pytest.approx(math.sqrt(0.5), abs=1e-6)
    assert res.verdict is PASS


@C2
@pytest.mark.parametrize("p", [1, 2])
def test_weyl_indicator_power_law(preset_runs, p):
    res = preset_runs["seminorm-oracles", 1].result(f"indicator-weyl-p{p}")
    assert max(row["l"] for row in res.rows) == 1024
    assert min(row["l"] for row in res.rows) == 1
    assert abs(res.summary["fitted_exponent"] + 1 / p) / (1 / p) < 0.02
    assert res.verdict is PASS


@C2
def test_seminorm_oracles_runtime(preset_runs):
    assert preset_runs["seminorm-oracles", 1].seconds < 30


# -- 3 -----------------------------------------------------------------------

C3 = criterion(3, "classifier corpus matrix and golden verdicts")

CORPUS_MATRIX = {
    "two-frequency-ap": PASS,
    "sign-sin-ap": FAIL,
    "sign-sin-aps1": PASS,
    "indicator-aps1": FAIL,
    "indicator-equi-weyl1": PASS,
    "indicator-weyl1": PASS,
    "indicator-weyl-vanishing": PASS,
    "indicator-equi-weyl-vanishing": PASS,
    "exp-decay-ap": FAIL,
    "exp-decay-weyl-vanishing": PASS,
    "exp-decay-equi-weyl-vanishing": PASS,
    "linear-ap": FAIL,
    "linear-aps1": FAIL,
    "linear-equi-weyl1": FAIL,
    "linear-weyl1": FAIL,
}


@C3
def test_corpus_matrix(preset_runs):
    pr = preset_runs["classify-corpus", 1]
    got = {r.name: r.verdict for r in pr.results}
    assert got == CORPUS_MATRIX


@C3
def test_corpus_epsilons_and_witness(preset_runs):
    pr = preset_runs["classify-corpus", 1]
    aps = pr.result("indicator-aps1").payload
    assert [e["epsilon"] for e in aps.per_epsilon] == [0.05]
    ew = pr.result("indicator-equi-weyl1").payload
    (e,) = ew.per_epsilon
    assert e["epsilon"] == 0.1
    assert e["l"] >= 20


@C3
def test_corpus_golden(preset_runs, golden_check):
    golden_check("classify-corpus", preset_runs["classify-corpus", 1])


# -- 4 -----------------------------------------------------------------------

C4 = criterion(4, "exact exponent arithmetic")


def random_valid_pair(rng):
    p = Fraction(rng.randint(101, 2000), rng.randint(1, 100))
    while p <= 1:
        p = Fraction(rng.randint(101, 2000), rng.randint(1, 100))
    r = weyl_threshold(p) + Fraction(rng.randint(0, 5000), rng.randint(1, 100))
    return p, r


@C4
def test_random_weyl_pairs():
    rng = random.Random(20240101)
    for _ in range(1000):
        p, r = random_valid_pair(rng)
        pair = weyl_composition_exponent(p, r)
        assert pair.exact
        assert pair.q == p * r / (p + r)
        assert 1 <= pair.q < p
        assert 1 / pair.q == 1 / p + 1 / r


@C4
@pytest.mark.parametrize(
    "p, r, q2, q, q3",
    [
        (2, 4, 2, Fraction(4, 3), Fraction(4, 3)),
        (3, 3, 3, Fraction(3, 2), Fraction(3, 2)),
        (2, 2, 2, Fraction(1), Fraction(1)),
    ],
)
def test_asymptotic_identities(p, r, q2, q, q3):
    pair = weyl_composition_exponent(p, r)
    asym = asymptotic_exponents(1, q2, r)
    assert pair.q == q
    assert asym.q3 == q3
    assert asym.exact
    assert Fraction(1, r) + 1 / Fraction(q2) == 1 / asym.q3


# -- 5 -----------------------------------------------------------------------

C5 = criterion(5, "Stepanov composition end-to-end, runtime < 60 s")


@C5
def test_stepanov_composition_passes(preset_runs):
    pr = preset_runs["stepanov-composition-trig", 1]
    (res,) = pr.results
    rep = res.payload
    assert rep.hypotheses_verdict is PASS
    assert rep.conclusion_verdict is PASS
    assert rep.verdict is PASS
    assert pr.seconds < 60


@C5
def test_stepanov_exact_periods(preset_runs):
    rep = preset_runs["stepanov-composition-trig", 1].results[0].payload
    exact = [r for r in rep.rows
             if r["tau"] > 0 and abs(r["tau"] / (2 * math.pi) - round(r["tau"] / (2 * math.pi))) < 1e-9]
    assert exact
    assert max(r["displacement"] for r in exact) <= 1e-6


@C5
def test_stepanov_bound_dominates(preset_runs):
    rep = preset_runs["stepanov-composition-trig", 1].results[0].payload
    assert rep.bound_fit is not None
    assert {r["epsilon"] for r in rep.rows} == {0.5, 0.1, 0.05, 0.01}
    for r in rep.rows:
        assert r["displacement"] <= r["bound"]


# -- 6 -----------------------------------------------------------------------

C6 = criterion(6, "asymptotic Stepanov composition end-to-end")


@C6
def test_asymptotic_stepanov_tails(preset_runs):
    pr = preset_runs["asymptotic-stepanov", 1]
    cfg = parse_config(preset_text("asymptotic-stepanov"))
    assert cfg.tasks[0].grid.interval.truncation_radius == 20
    rep = pr.results[0].payload
    assert rep.verdict is PASS
    assert rep.check("difference_tail").data["value"] <= 1e-6
    assert rep.check("perturbation_tail").data["value"] <= 1e-6


@C6
def test_non_decaying_z_fails_vanishing_hypothesis():
    text = preset_text("asymptotic-stepanov").replace(
        "z: {kind: ExpDecay, rate: 2}",
        "z: {kind: ScalarScale, factor: 0.3, child: {kind: SignOfTrig, frequency: 1}}",
    )
    assert "ScalarScale" in text
    _, (res,) = run(parse_config(text))
    rep = res.payload
    assert rep.check("z_vanishing").verdict is FAIL
    assert rep.verdict is FAIL


# -- 7 -----------------------------------------------------------------------

C7 = criterion(7, "Weyl composition end-to-end with Hoelder chain and n-fold windows")


@C7
def test_weyl_composition(preset_runs):
    rep = preset_runs["weyl-composition", 1].results[0].payload
    assert rep.verdict is PASS
    assert rep.exponents["q"] == "4/3"
    chain = rep.check("holder_chain")
    assert chain.verdict is PASS
    assert CHAIN_TOL <= 1e-9
    assert chain.data["max_excess"] <= 1e-9
    assert all(row["max_excess"] <= 1e-9 for row in chain.data["rows"])


@C7
def test_weyl_n_fold_windows(preset_runs):
    rep = preset_runs["weyl-composition", 1].results[0].payload
    nfold = rep.check("n_fold_windows")
    assert nfold.verdict is PASS
    results = nfold.data["results"]
    assert results
    for per_n in results.values():
        assert per_n == {"2": True, "4": True, "8": True}


# -- 8 -----------------------------------------------------------------------

C8 = criterion(8, "asymptotic Weyl composition: all three summands and the exponent identity")


@C8
def test_asymptotic_weyl_summands(preset_runs):
    rep = preset_runs["asymptotic-weyl", 1].results[0].payload
    assert set(rep.conclusion_checks) == {"ap_part", "perturbation_part", "difference_part"}
    for name, m in rep.conclusion_checks.items():
        assert m.verdict is PASS, name
    assert rep.verdict is PASS


@C8
def test_asymptotic_weyl_identity_exact(preset_runs):
    rep = preset_runs["asymptotic-weyl", 1].results[0].payload
    ident = rep.check("exponent_identity")
    assert ident.verdict is PASS
    assert ident.data["exact"] is True
    r, q2, q3 = (Fraction(rep.exponents[k]) for k in ("r", "q2", "q3"))
    assert 1 / r + 1 / q2 == 1 / q3


# -- 9 -----------------------------------------------------------------------

C9 = criterion(9, "identical verdicts and CSV bodies for 1 and 8 workers")


@C9
@pytest.mark.parametrize("name", preset_names())
def test_jobs_determinism(preset_runs, name):
    one, eight = preset_runs[name, 1], preset_runs[name, 8]
    assert one.manifest.verdicts == eight.manifest.verdicts
    assert one.manifest.overall == eight.manifest.overall
    files = sorted(p.name for p in one.out.glob("*.csv"))
    assert files == sorted(p.name for p in eight.out.glob("*.csv"))
    for f in files:
        assert csv_body((one.out / f).read_text()) == csv_body((eight.out / f).read_text()), f
