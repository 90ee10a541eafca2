"""Windowed L^p means, Stepanov metrics/norms and Weyl-norm limit estimates.

Every windowed integral is computed with a composite rule on the sampling
grid itself, so window endpoints are always grid nodes.  Sliding windows use
prefix sums, which makes a full sup-scan over window starts O(n).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    GridMismatch,
    InvalidExponent,
    InvalidExponentOrder,
    ScheduleExceedsDomain,
    WindowOutOfDomain,
)
from .functions import GRID_SLACK, SampledFunction, snap

CSV_VERSION = "aplab-csv v1"
DEFAULT_CONVERGENCE_TOL = 1e-3


class Rule(str, Enum):
    MIDPOINT = "midpoint"
    TRAPEZOID = "trapezoid"
    SIMPSON = "simpson"


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite rule used for every windowed integral.

    ``step`` is optional; when given it must match the grid of the sampled
    function being integrated.  Midpoint uses the odd nodes of each pair of
    subintervals as midpoints, so it and Simpson need an even number of
    subintervals per window.
    """

    rule: Rule = Rule.TRAPEZOID
    step: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule(self.rule))

    def check_step(self, h: float) -> None:
        if self.step is not None and not math.isclose(self.step, h, rel_tol=1e-12):
            raise GridMismatch(f"quadrature step {self.step} does not match grid step {h}")


TRAPEZOID = QuadratureConfig()


def check_exponent(p: float) -> float:
    p = float(p)
    if not (p >= 1 and math.isfinite(p)):
        raise InvalidExponent(f"exponent must lie in [1, oo), got {p}")
    return p


def window_weights(m: int, h: float, rule: Rule) -> np.ndarray:
    """Quadrature weights for a window of *m* subintervals (``m + 1`` nodes)."""
    if m < 1:
        raise WindowOutOfDomain("window must contain at least one subinterval")
    if rule is Rule.TRAPEZOID:
        w = np.full(m + 1, h)
        w[0] = w[-1] = h / 2
        return w
    if m % 2:
        raise WindowOutOfDomain(f"{rule.value} rule needs an even number of subintervals, got {m}")
    if rule is Rule.SIMPSON:
        w = np.full(m + 1, 2 * h / 3)
        w[1::2] = 4 * h / 3
        w[0] = w[-1] = h / 3
        return w
    w = np.zeros(m + 1)
    w[1::2] = 2 * h
    return w


class WindowIntegrator:
    """Integrals of sampled data over every grid-aligned window.

    ``y`` may be 1-D (``(n,)``) or stacked (``(k, n)``); windows slide along the
    last axis.
    """

    def __init__(self, y: np.ndarray, h: float, rule: Rule = Rule.TRAPEZOID):
        self.y = np.asarray(y, dtype=float)
        self.h = float(h)
        self.rule = Rule(rule)
        y = self.y
        lead = y.shape[:-1]
        zero = np.zeros(lead + (1,))
        if self.rule is Rule.TRAPEZOID:
            cells = (y[..., :-1] + y[..., 1:]) * (self.h / 2)
            self._prefix = np.concatenate([zero, np.cumsum(cells, axis=-1)], axis=-1)
        else:
            if self.rule is Rule.SIMPSON:
                pairs = (y[..., :-2] + 4 * y[..., 1:-1] + y[..., 2:]) * (self.h / 3)
            else:
                pairs = y[..., 1:-1] * (2 * self.h)
            # pair j covers nodes j..j+2; windows starting at i use pairs i, i+2, ...
            self._pair_prefix = [
                np.concatenate([zero, np.cumsum(pairs[..., par::2], axis=-1)], axis=-1) for par in (0, 1)
            ]

    @property
    def n(self) -> int:
        return self.y.shape[-1]

    def integrals(self, m: int) -> np.ndarray:
        """Integral over ``[i, i+m]`` for every start ``i = 0..n-1-m``."""
        if m < 1 or m > self.n - 1:
            raise WindowOutOfDomain(f"window of {m} steps does not fit in {self.n} samples")
        if self.rule is Rule.TRAPEZOID:
            return self._prefix[..., m:] - self._prefix[..., :-m]
        if m % 2:
            raise WindowOutOfDomain(f"{self.rule.value} rule needs an even number of subintervals, got {m}")
        k = m // 2
        count = self.n - m
        out = np.empty(self.y.shape[:-1] + (count,))
        for par in (0, 1):
            starts = np.arange(par, count, 2)
            if starts.size == 0:
                continue
            a = starts // 2
            pref = self._pair_prefix[par]
            out[..., starts] = pref[..., a + k] - pref[..., a]
        return out

    def means(self, m: int) -> np.ndarray:
        return np.maximum(self.integrals(m), 0.0) / (m * self.h)


def p_mean(integrand_mean: np.ndarray | float, p: float):
    """``mean ** (1/p)`` with round-off negatives clipped to zero."""
    return np.maximum(integrand_mean, 0.0) ** (1.0 / p)


def window_steps(l: float, h: float) -> int:
    m = snap(l, h)
    if m < 1:
        raise WindowOutOfDomain(f"window length {l} is shorter than the grid step {h}")
    return m


@dataclass(frozen=True)
class SeminormResult:
    value: float
    l: float
    p: float
    truncation_radius: float
    sup_witness: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("seminorm value must be non-negative")


@dataclass(frozen=True)
class LimitEstimate:
    l_schedule: tuple[float, ...]
    values: tuple[float, ...]
    witnesses: tuple[float, ...]
    estimate: float
    cauchy_gap: float
    converged: bool
    tolerance: float = DEFAULT_CONVERGENCE_TOL
    p: float = 1.0

    def rows(self) -> list[dict]:
        return [
            {"l": l, "value": v, "witness": w, "converged": self.converged}
            for l, v, w in zip(self.l_schedule, self.values, self.witnesses)
        ]


def lp_window_mean(f: SampledFunction, a: float, l: float, p: float, quad: QuadratureConfig = TRAPEZOID) -> float:
    """``((1/l) * int_a^{a+l} |f|^p)^(1/p)`` over one grid-aligned window."""
    p = check_exponent(p)
    quad.check_step(f.step)
    i0 = f.index_of(a)
    m = window_steps(l, f.step)
    if i0 < 0 or i0 + m > f.n - 1:
        raise WindowOutOfDomain(f"window [{a}, {a + l}] is outside [{f.origin}, {f.end}]")
    y = f.norms()[i0 : i0 + m + 1] ** p
    w = window_weights(m, f.step, quad.rule)
    return float(p_mean(np.dot(w, y) / (m * f.step), p))


def _difference_norms(f: SampledFunction, g: SampledFunction | None) -> np.ndarray:
    if g is None:
        return f.norms()
    f.check_same_grid(g)
    if f.value_dimension != g.value_dimension:
        raise GridMismatch("functions have different value dimensions")
    return (f - g).norms()


def stepanov_metric(
    f: SampledFunction,
    g: SampledFunction | None,
    l: float,
    p: float,
    quad: QuadratureConfig = TRAPEZOID,
) -> SeminormResult:
    """``sup_x ((1/l) int_x^{x+l} |f - g|^p)^(1/p)`` over grid-aligned ``x``.

    ``g=None`` measures *f* against zero.  The first maximizing window start
    is returned as the witness.
    """
    p = check_exponent(p)
    quad.check_step(f.step)
    m = window_steps(l, f.step)
    if m > f.n - 1:
        raise WindowOutOfDomain(f"window length {l} exceeds the sampled length {f.length}")
    y = _difference_norms(f, g) ** p
    means = WindowIntegrator(y, f.step, quad.rule).means(m)
    i = int(np.argmax(means))
    return SeminormResult(
        float(p_mean(means[i], p)), m * f.step, p, f.interval.truncation_radius, f.origin + i * f.step
    )


def stepanov_norm(f: SampledFunction, p: float, quad: QuadratureConfig = TRAPEZOID) -> SeminormResult:
    """Unit-window Stepanov norm ``sup_t (int_t^{t+1} |f|^p)^(1/p)``."""
    if f.length < 1 - GRID_SLACK:
        raise WindowOutOfDomain(f"domain length {f.length} is shorter than 1")
    return stepanov_metric(f, None, 1.0, p, quad)


def geometric_schedule(max_length: float, start: float = 1.0) -> tuple[float, ...]:
    """``start, 2*start, 4*start, ...`` not exceeding *max_length*."""
    out = []
    l = float(start)
    while l <= max_length * (1 + GRID_SLACK):
        out.append(l)
        l *= 2
    return tuple(out)


def cauchy_gap(values: Sequence[float], tail: int = 3) -> float:
    vals = list(values)[-tail:]
    if len(vals) < 2:
        return math.inf
    return max(abs(b - a) for a, b in zip(vals, vals[1:]))


def weyl_norm(
    f: SampledFunction,
    p: float,
    l_schedule: Sequence[float] | None = None,
    quad: QuadratureConfig = TRAPEZOID,
    tol: float = DEFAULT_CONVERGENCE_TOL,
) -> LimitEstimate:
    """Estimate ``lim_{l->oo} D_{S_l}^p[f, 0]`` along an increasing schedule."""
    p = check_exponent(p)
    if l_schedule is None:
        l_schedule = geometric_schedule(f.length)
    sched = tuple(float(l) for l in l_schedule)
    if not sched:
        raise ScheduleExceedsDomain("empty l-schedule")
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise ValueError("l-schedule must be strictly increasing")
    if sched[-1] > f.length * (1 + GRID_SLACK):
        raise ScheduleExceedsDomain(f"l={sched[-1]} exceeds the sampled length {f.length}")
    quad.check_step(f.step)
    integ = WindowIntegrator(f.norms() ** p, f.step, quad.rule)
    values, witnesses = [], []
    for l in sched:
        means = integ.means(window_steps(l, f.step))
        i = int(np.argmax(means))
        values.append(float(p_mean(means[i], p)))
        witnesses.append(f.origin + i * f.step)
    gap = cauchy_gap(values)
    return LimitEstimate(sched, tuple(values), tuple(witnesses), values[-1], gap, gap < tol, tol, p)


@dataclass(frozen=True)
class PowerMeanCheck:
    lhs: float
    rhs: float
    holds: bool


def power_mean_check(
    f: SampledFunction,
    a: float,
    b: float,
    p_low: float,
    p_high: float,
    quad: QuadratureConfig = TRAPEZOID,
    tol: float = 1e-9,
) -> PowerMeanCheck:
    """Compare the ``p_low`` and ``p_high`` power means of ``|f|`` on ``[a, b]``."""
    p_low, p_high = check_exponent(p_low), check_exponent(p_high)
    if not p_low < p_high:
        raise InvalidExponentOrder(f"need p' < p'', got {p_low} >= {p_high}")
    if not a < b:
        raise WindowOutOfDomain(f"need a < b, got [{a}, {b}]")
    lhs = lp_window_mean(f, a, b - a, p_low, quad)
    rhs = lp_window_mean(f, a, b - a, p_high, quad)
    return PowerMeanCheck(lhs, rhs, lhs <= rhs + tol)


def write_sweep_csv(path: str | Path, estimate: LimitEstimate) -> None:
    """Write a Weyl sweep as ``l,value,witness,converged`` rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {CSV_VERSION} weyl-sweep p={estimate.p!r}\n")
        writer = csv.DictWriter(fh, fieldnames=["l", "value", "witness", "converged"])
        writer.writeheader()
        for row in estimate.rows():
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
