from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aplab.errors import ConstraintViolation, InvalidExponent, NoValidQ
from aplab.exponents import (
    ExponentTriple,
    asymptotic_exponents,
    exponents_for,
    holder_exponents,
    weyl_composition_exponent,
    weyl_threshold,
)

rationals = st.fractions(min_value=Fraction(1), max_value=Fraction(50), max_denominator=40)


def test_holder_examples():
    t = holder_exponents(1, 2)
    assert t.q == 2 and t.exact
    assert holder_exponents(3, math.inf).q == 3
    with pytest.raises(NoValidQ):
        holder_exponents(2, 2)
    with pytest.raises(NoValidQ):
        holder_exponents(2, 1)


def test_triple_validation():
    ExponentTriple(1, 2, 2)
    with pytest.raises(NoValidQ):
        ExponentTriple(1, 2, 3)
    with pytest.raises(InvalidExponent):
        ExponentTriple(Fraction(1, 2), 1, 1)


def test_weyl_examples():
    assert weyl_composition_exponent(2, 2).q == 1
    assert weyl_composition_exponent(2, 4).q == Fraction(4, 3)
    assert weyl_composition_exponent(3, 3).q == Fraction(3, 2)
    with pytest.raises(ConstraintViolation):
        weyl_composition_exponent(2, 1.5)
    with pytest.raises(ConstraintViolation):
        weyl_composition_exponent(1, 4)


def test_ratio_strings_stay_exact():
    pair = weyl_composition_exponent("3/2", 3)
    assert pair.exact and pair.q == 1


@given(rationals.filter(lambda p: p > 1), rationals)
def test_weyl_pair_properties(p, extra):
    r = weyl_threshold(p) + extra - 1
    pair = weyl_composition_exponent(p, r)
    assert pair.exact
    assert 1 <= pair.q < p
    assert 1 / pair.q == 1 / p + 1 / r
    assert pair.holds()


@given(rationals, rationals)
def test_holder_identity_exact(p, r):
    if 1 / p - 1 / r <= 0:
        with pytest.raises(NoValidQ):
            holder_exponents(p, r)
        return
    t = holder_exponents(p, r)
    assert 1 / t.p == 1 / t.q + 1 / t.r
    assert t.q >= p


def test_float_inputs_use_tolerance():
    t = holder_exponents(1.5, 4.0)
    assert not t.exact
    assert t.holds()


def test_asymptotic_examples():
    a = asymptotic_exponents(1, 2, 4)
    assert a.q3 == Fraction(4, 3) and a.exact
    with pytest.raises(ConstraintViolation):
        asymptotic_exponents(1, 1, 2)


def test_exponents_for_dispatch():
    main, asym = exponents_for("asymptotic-weyl", {"p": 2, "r": 4, "q1": 1, "q2": 2})
    assert main.q == Fraction(4, 3) and asym.q3 == Fraction(4, 3)
    main, asym = exponents_for("stepanov", {"p": 1, "r": 2})
    assert main.q == 2 and asym is None
