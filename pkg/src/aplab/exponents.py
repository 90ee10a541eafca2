"""Exponent bookkeeping for the composition checks.

Integer, ratio-string and ``Fraction`` inputs are kept exact, so identities
such as ``1/p = 1/q + 1/r`` can be compared with ``==``.  Float inputs fall
back to float arithmetic and are compared to 1e-12.  ``r = inf`` is
``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from ._numbers import parse_exponent
from .errors import ConstraintViolation, InvalidExponent, NoValidQ

Exponent = Union[Fraction, float]
IDENTITY_TOL = 1e-12


def _exp(value) -> Exponent:
    v = parse_exponent(value)
    if isinstance(v, float) and math.isnan(v):
        raise InvalidExponent("exponent is NaN")
    return v


def inverse(x: Exponent) -> Exponent:
    """``1/x`` with ``1/inf = 0``; exact for fractions."""
    if isinstance(x, float) and math.isinf(x):
        return Fraction(0)
    if isinstance(x, Fraction):
        return 1 / x
    return 1.0 / x


def is_exact(*xs: Exponent) -> bool:
    return all(isinstance(x, Fraction) or (isinstance(x, float) and math.isinf(x)) for x in xs)


def _mixed(a: Exponent, b: Exponent) -> tuple[Exponent, Exponent]:
    """Coerce a pair to a common arithmetic (exact only if both are)."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a, b
    return float(a), float(b)


def identity_holds(lhs: Exponent, rhs: Exponent) -> bool:
    lhs, rhs = _mixed(lhs, rhs)
    if isinstance(lhs, Fraction):
        return lhs == rhs
    return abs(lhs - rhs) <= IDENTITY_TOL


def as_float(x: Exponent) -> float:
    return float(x)


def show(x: Exponent) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return "inf" if math.isinf(x) else repr(x)


@dataclass(frozen=True)
class ExponentTriple:
    """``p, q, r`` with ``1/p = 1/q + 1/r``."""

    p: Exponent
    q: Exponent
    r: Exponent

    def __post_init__(self):
        for name in ("p", "q", "r"):
            object.__setattr__(self, name, _exp(getattr(self, name)))
        if not (self.p >= 1 and self.q >= 1 and self.r >= 1):
            raise InvalidExponent(f"exponents must be >= 1, got {self.describe()}")
        if math.isinf(self.p) or math.isinf(self.q):
            raise InvalidExponent("p and q must be finite")
        if not self.holds():
            raise NoValidQ(f"1/p != 1/q + 1/r for {self.describe()}")

    def holds(self) -> bool:
        q_inv, r_inv = _mixed(inverse(self.q), inverse(self.r))
        return identity_holds(inverse(self.p), q_inv + r_inv)

    @property
    def exact(self) -> bool:
        return is_exact(self.p, self.q, self.r)

    def describe(self) -> str:
        return f"(p={show(self.p)}, q={show(self.q)}, r={show(self.r)})"

    def to_dict(self) -> dict:
        return {"p": show(self.p), "q": show(self.q), "r": show(self.r)}


def holder_exponents(p, r) -> ExponentTriple:
    """Solve ``1/p = 1/q + 1/r`` for ``q``."""
    p, r = _exp(p), _exp(r)
    if not p >= 1 or math.isinf(p):
        raise InvalidExponent(f"p must lie in [1, oo), got {show(p)}")
    if not r >= 1:
        raise InvalidExponent(f"r must lie in [1, oo], got {show(r)}")
    pi, ri = _mixed(inverse(p), inverse(r))
    diff = pi - ri
    if diff <= 0:
        raise NoValidQ(f"1/p - 1/r = {diff} <= 0 for p={show(p)}, r={show(r)}: no finite q")
    q = 1 / diff
    if isinstance(q, float) and math.isinf(r):
        q = float(p)
    return ExponentTriple(p, q, r)


@dataclass(frozen=True)
class WeylExponentPair:
    """``p > 1``, ``r >= max(p, p/(p-1))`` and ``q = p r / (p + r)``.

    The conclusion exponent is read with the usual grouping ``pr/(p+r)``;
    read left to right the expression would leave ``[1, p)``.
    """

    p: Exponent
    r: Exponent
    q: Exponent

    @property
    def exact(self) -> bool:
        return is_exact(self.p, self.r, self.q)

    def holds(self) -> bool:
        pi, ri = _mixed(inverse(self.p), inverse(self.r))
        return identity_holds(inverse(self.q), pi + ri)

    def describe(self) -> str:
        return f"(p={show(self.p)}, r={show(self.r)}, q={show(self.q)})"

    def to_dict(self) -> dict:
        return {"p": show(self.p), "r": show(self.r), "q": show(self.q)}


def weyl_threshold(p: Exponent) -> Exponent:
    """``max(p, p/(p-1))``, the smallest admissible ``r``."""
    conj = p / (p - 1)
    return max(p, conj)


def weyl_composition_exponent(p, r) -> WeylExponentPair:
    p, r = _exp(p), _exp(r)
    if not p > 1 or math.isinf(p):
        raise ConstraintViolation(f"need 1 < p < oo, got p={show(p)}")
    if math.isinf(r):
        raise ConstraintViolation("r must be finite here (q = p r / (p + r))")
    p, r = _mixed(p, r)
    threshold = weyl_threshold(p)
    if r < threshold:
        raise ConstraintViolation(f"need r >= max(p, p/(p-1)) = {show(threshold)}, got r={show(r)}")
    q = p * r / (p + r)
    if not (1 <= q < p) and not math.isclose(float(q), 1.0, abs_tol=IDENTITY_TOL):
        raise ConstraintViolation(f"q = {show(q)} falls outside [1, p)")
    return WeylExponentPair(p, r, q)


@dataclass(frozen=True)
class AsymptoticExponents:
    """Exponents of the vanishing parts: ``1/r + 1/q'' = 1/q'''``."""

    q1: Exponent
    q2: Exponent
    q3: Exponent
    r: Exponent

    def __post_init__(self):
        for name in ("q1", "q2", "q3", "r"):
            object.__setattr__(self, name, _exp(getattr(self, name)))
        for name in ("q1", "q2", "q3"):
            v = getattr(self, name)
            if not v >= 1 or math.isinf(v):
                raise InvalidExponent(f"{name} must lie in [1, oo), got {show(v)}")
        if not self.holds():
            raise ConstraintViolation(f"1/r + 1/q'' != 1/q''' for {self.describe()}")

    def holds(self) -> bool:
        ri, q2i = _mixed(inverse(self.r), inverse(self.q2))
        return identity_holds(inverse(self.q3), ri + q2i)

    @property
    def exact(self) -> bool:
        return is_exact(self.q1, self.q2, self.q3, self.r)

    def describe(self) -> str:
        return f"(q'={show(self.q1)}, q''={show(self.q2)}, q'''={show(self.q3)}, r={show(self.r)})"

    def to_dict(self) -> dict:
        return {"q1": show(self.q1), "q2": show(self.q2), "q3": show(self.q3), "r": show(self.r)}


def asymptotic_exponents(q1, q2, r) -> AsymptoticExponents:
    """Derive ``q'''`` from ``1/q''' = 1/r + 1/q''``."""
    q1, q2, r = _exp(q1), _exp(q2), _exp(r)
    ri, q2i = _mixed(inverse(r), inverse(q2))
    s = ri + q2i
    if s > 1:
        raise ConstraintViolation(f"1/r + 1/q'' = {s} > 1 gives q''' < 1")
    return AsymptoticExponents(q1, q2, 1 / s, r)


def exponents_for(check: str, exps: dict):
    """Exponent objects for a named composition check.

    Returns ``(main, asymptotic)``; ``asymptotic`` is ``None`` except for
    ``asymptotic-weyl``.
    """
    if check in ("stepanov", "asymptotic-stepanov", "weyl-variant"):
        return holder_exponents(exps["p"], exps["r"]), None
    pair = weyl_composition_exponent(exps["p"], exps["r"])
    if check == "asymptotic-weyl":
        return pair, asymptotic_exponents(exps["q1"], exps["q2"], exps["r"])
    return pair, None
