"""Closed-form function descriptions and their sampled realizations.

A spec is a small expression tree.  Scalar leaves (``TrigSum``,
``Characteristic``, ...) produce one value component; ``VectorBundle`` stacks
scalar specs into an ``R^d`` valued function and ``Argument`` reads a
coordinate of the second variable ``u`` of a two-parameter field ``F(t, u)``.

Sampling follows one convention everywhere: sample ``i`` sits at
``origin + i*h`` and values are stored as an ``(n, d)`` array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, ClassVar, Iterator, Sequence

import numpy as np
import yaml

from ._numbers import parse_number
from .errors import (
    DimensionMismatch,
    GridMismatch,
    NonPositiveStep,
    ShiftExceedsWindow,
    SpecFormatError,
    WindowExceedsDomain,
)

# Snapping slack, in units of the grid step.
GRID_SLACK = 1e-9
# |sin| below this counts as an exact zero of the sign function.
SIGN_ZERO = 1e-12

NORMS = ("sup", "euclidean", "l1")


def pointwise_norm(values: np.ndarray, norm: str = "sup") -> np.ndarray:
    """Norm of the vectors stored along the last axis."""
    if norm == "sup":
        return np.max(np.abs(values), axis=-1)
    if norm == "euclidean":
        return np.sqrt(np.sum(values * values, axis=-1))
    if norm == "l1":
        return np.sum(np.abs(values), axis=-1)
    raise ValueError(f"unknown norm {norm!r}, expected one of {NORMS}")


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------


class Kind(str, Enum):
    HALF_LINE = "HalfLine"
    FULL_LINE = "FullLine"


@dataclass(frozen=True)
class IntervalKind:
    """``[0, oo)`` scanned over ``[0, T]`` or ``R`` scanned over ``[-T, T]``."""

    kind: Kind
    truncation_radius: float

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not self.truncation_radius > 0:
            raise ValueError(f"truncation_radius must be positive, got {self.truncation_radius}")

    @classmethod
    def half_line(cls, radius: float) -> IntervalKind:
        return cls(Kind.HALF_LINE, float(radius))

    @classmethod
    def full_line(cls, radius: float) -> IntervalKind:
        return cls(Kind.FULL_LINE, float(radius))

    @property
    def start(self) -> float:
        return 0.0 if self.kind is Kind.HALF_LINE else -self.truncation_radius

    @property
    def length(self) -> float:
        if self.kind is Kind.HALF_LINE:
            return self.truncation_radius
        return 2.0 * self.truncation_radius


# ---------------------------------------------------------------------------
# Expression nodes
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, type[Node]] = {}


def _floats(xs: Sequence[Any]) -> tuple[float, ...]:
    return tuple(parse_number(x) for x in xs)


class Node:
    """Base class of spec expression nodes."""

    kind: ClassVar[str] = ""

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.kind:
            _REGISTRY[cls.kind] = cls

    @property
    def value_dimension(self) -> int:
        return 1

    def children(self) -> tuple[Node, ...]:
        return ()

    def walk(self) -> Iterator[Node]:
        yield self
        for c in self.children():
            yield from c.walk()

    def uses_argument(self) -> bool:
        return any(isinstance(n, Argument) for n in self.walk())

    def argument_dimension(self) -> int:
        """Smallest ``m`` such that every ``Argument`` index is valid."""
        idx = [n.index for n in self.walk() if isinstance(n, Argument)]
        return max(idx) + 1 if idx else 0

    def evaluate(self, t: np.ndarray, u: np.ndarray | None = None) -> np.ndarray:
        """Values at times ``t`` (shape ``(n,)``) and points ``u`` (``(n, m)``).

        Returns an ``(n, d)`` array.
        """
        raise NotImplementedError

    def __call__(self, t, u=None) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if u is not None:
            u = np.asarray(u, dtype=float)
            if u.ndim == 1:
                u = np.broadcast_to(u, (t.shape[0], u.shape[0]))
        return self.evaluate(t, u)

    def to_dict(self) -> dict:
        raise NotImplementedError

    # Arithmetic sugar for building corpora in code.
    def __add__(self, other: Node) -> Sum:
        return Sum((self, other))

    def __mul__(self, other: Node) -> Product:
        return Product((self, other))

    def __rmul__(self, c: float) -> ScalarScale:
        return ScalarScale(float(c), self)

    def __neg__(self) -> ScalarScale:
        return ScalarScale(-1.0, self)

    def __sub__(self, other: Node) -> Sum:
        return Sum((self, ScalarScale(-1.0, other)))


def _column(x: np.ndarray) -> np.ndarray:
    return x.reshape(-1, 1)


@dataclass(frozen=True)
class TrigSum(Node):
    """``sum_k a_k sin(w_k t + phi_k)``."""

    kind: ClassVar[str] = "TrigSum"
    amplitudes: tuple[float, ...]
    frequencies: tuple[float, ...]
    phases: tuple[float, ...] = ()

    def __post_init__(self):
        amps = _floats(self.amplitudes)
        freqs = _floats(self.frequencies)
        phases = _floats(self.phases) if self.phases else (0.0,) * len(amps)
        if not (len(amps) == len(freqs) == len(phases)):
            raise DimensionMismatch("TrigSum needs equally many amplitudes, frequencies and phases")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "phases", phases)

    def evaluate(self, t, u=None):
        out = np.zeros_like(t, dtype=float)
        for a, w, ph in zip(self.amplitudes, self.frequencies, self.phases):
            out = out + a * np.sin(w * t + ph)
        return _column(out)

    def to_dict(self):
        return {
            "kind": self.kind,
            "amplitudes": list(self.amplitudes),
            "frequencies": list(self.frequencies),
            "phases": list(self.phases),
        }


def sin(frequency: float = 1.0, amplitude: float = 1.0) -> TrigSum:
    return TrigSum((amplitude,), (frequency,), (0.0,))


def cos(frequency: float = 1.0, amplitude: float = 1.0) -> TrigSum:
    return TrigSum((amplitude,), (frequency,), (math.pi / 2,))


@dataclass(frozen=True)
class Characteristic(Node):
    """Indicator of the closed interval ``[a, b]``."""

    kind: ClassVar[str] = "Characteristic"
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", parse_number(self.a))
        object.__setattr__(self, "b", parse_number(self.b))
        if self.b < self.a:
            raise ValueError(f"Characteristic needs a <= b, got [{self.a}, {self.b}]")

    def evaluate(self, t, u=None):
        return _column(((t >= self.a) & (t <= self.b)).astype(float))

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class SignOfTrig(Node):
    """``sign(sin(w t + phi))`` with ``sign(0) = 0``."""

    kind: ClassVar[str] = "SignOfTrig"
    frequency: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "frequency", parse_number(self.frequency))
        object.__setattr__(self, "phase", parse_number(self.phase))

    def evaluate(self, t, u=None):
        s = np.sin(self.frequency * t + self.phase)
        return _column(np.where(np.abs(s) < SIGN_ZERO, 0.0, np.sign(s)))

    def to_dict(self):
        return {"kind": self.kind, "frequency": self.frequency, "phase": self.phase}


@dataclass(frozen=True)
class ExpDecay(Node):
    """``exp(-rate * t)``."""

    kind: ClassVar[str] = "ExpDecay"
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "rate", parse_number(self.rate))

    def evaluate(self, t, u=None):
        return _column(np.exp(-self.rate * t))

    def to_dict(self):
        return {"kind": self.kind, "rate": self.rate}


@dataclass(frozen=True)
class PiecewiseConstant(Node):
    """``values[i]`` on ``[breakpoints[i-1], breakpoints[i])``."""

    kind: ClassVar[str] = "PiecewiseConstant"
    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bps = _floats(self.breakpoints)
        vals = _floats(self.values)
        if len(vals) != len(bps) + 1:
            raise DimensionMismatch("PiecewiseConstant needs len(values) == len(breakpoints) + 1")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("PiecewiseConstant breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    def evaluate(self, t, u=None):
        idx = np.searchsorted(np.asarray(self.breakpoints), t, side="right")
        return _column(np.asarray(self.values)[idx])

    def to_dict(self):
        return {"kind": self.kind, "breakpoints": list(self.breakpoints), "values": list(self.values)}


@dataclass(frozen=True)
class Constant(Node):
    kind: ClassVar[str] = "Constant"
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", parse_number(self.value))

    def evaluate(self, t, u=None):
        return np.full((t.shape[0], 1), self.value)

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class Time(Node):
    """The identity ``t -> t``."""

    kind: ClassVar[str] = "Time"

    def evaluate(self, t, u=None):
        return _column(t.astype(float))

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Argument(Node):
    """Coordinate ``u[index]`` of the second variable of a field."""

    kind: ClassVar[str] = "Argument"
    index: int = 0

    def __post_init__(self):
        if int(self.index) != self.index or self.index < 0:
            raise ValueError(f"Argument index must be a non-negative integer, got {self.index}")
        object.__setattr__(self, "index", int(self.index))

    def evaluate(self, t, u=None):
        if u is None:
            raise DimensionMismatch("Argument node evaluated without a u-argument")
        if u.shape[-1] <= self.index:
            raise DimensionMismatch(f"Argument({self.index}) needs u of dimension > {self.index}")
        return _column(np.asarray(u[:, self.index], dtype=float))

    def to_dict(self):
        return {"kind": self.kind, "index": self.index}


def _check_same_dims(nodes: Sequence[Node], what: str) -> int:
    dims = {n.value_dimension for n in nodes}
    if len(dims) != 1:
        raise DimensionMismatch(f"{what} children have value dimensions {sorted(dims)}")
    return dims.pop()


@dataclass(frozen=True)
class Sum(Node):
    kind: ClassVar[str] = "Sum"
    terms: tuple[Node, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("Sum needs at least one term")
        _check_same_dims(self.terms, "Sum")

    @property
    def value_dimension(self):
        return self.terms[0].value_dimension

    def children(self):
        return self.terms

    def evaluate(self, t, u=None):
        out = self.terms[0].evaluate(t, u)
        for term in self.terms[1:]:
            out = out + term.evaluate(t, u)
        return out

    def to_dict(self):
        return {"kind": self.kind, "terms": [c.to_dict() for c in self.terms]}


@dataclass(frozen=True)
class Product(Node):
    """Pointwise product; scalar factors broadcast against vector ones."""

    kind: ClassVar[str] = "Product"
    factors: tuple[Node, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("Product needs at least one factor")
        dims = {f.value_dimension for f in self.factors} - {1}
        if len(dims) > 1:
            raise DimensionMismatch(f"Product factors have value dimensions {sorted(dims)}")

    @property
    def value_dimension(self):
        return max(f.value_dimension for f in self.factors)

    def children(self):
        return self.factors

    def evaluate(self, t, u=None):
        out = self.factors[0].evaluate(t, u)
        for f in self.factors[1:]:
            out = out * f.evaluate(t, u)
        return out

    def to_dict(self):
        return {"kind": self.kind, "factors": [c.to_dict() for c in self.factors]}


@dataclass(frozen=True)
class ScalarScale(Node):
    kind: ClassVar[str] = "ScalarScale"
    factor: float
    child: Node

    def __post_init__(self):
        object.__setattr__(self, "factor", parse_number(self.factor))

    @property
    def value_dimension(self):
        return self.child.value_dimension

    def children(self):
        return (self.child,)

    def evaluate(self, t, u=None):
        return self.factor * self.child.evaluate(t, u)

    def to_dict(self):
        return {"kind": self.kind, "factor": self.factor, "child": self.child.to_dict()}


@dataclass(frozen=True)
class Clamp(Node):
    kind: ClassVar[str] = "Clamp"
    lo: float
    hi: float
    child: Node

    def __post_init__(self):
        object.__setattr__(self, "lo", parse_number(self.lo))
        object.__setattr__(self, "hi", parse_number(self.hi))
        if self.hi < self.lo:
            raise ValueError(f"Clamp needs lo <= hi, got ({self.lo}, {self.hi})")

    @property
    def value_dimension(self):
        return self.child.value_dimension

    def children(self):
        return (self.child,)

    def evaluate(self, t, u=None):
        return np.clip(self.child.evaluate(t, u), self.lo, self.hi)

    def to_dict(self):
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi, "child": self.child.to_dict()}


@dataclass(frozen=True)
class VectorBundle(Node):
    kind: ClassVar[str] = "VectorBundle"
    components: tuple[Node, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("VectorBundle needs at least one component")
        bad = [c.kind for c in self.components if c.value_dimension != 1]
        if bad:
            raise DimensionMismatch(f"VectorBundle components must be scalar, got {bad}")

    @property
    def value_dimension(self):
        return len(self.components)

    def children(self):
        return self.components

    def evaluate(self, t, u=None):
        return np.hstack([c.evaluate(t, u) for c in self.components])

    def to_dict(self):
        return {"kind": self.kind, "components": [c.to_dict() for c in self.components]}


@dataclass(frozen=True)
class TwoParamSpec:
    """A field ``F : I x R^m -> R^d`` given by an expression over ``(t, u)``."""

    expr: Node
    domain_dimension: int = 1

    def __post_init__(self):
        need = self.expr.argument_dimension()
        if need > self.domain_dimension:
            raise DimensionMismatch(
                f"expression reads u[{need - 1}] but domain_dimension is {self.domain_dimension}"
            )

    @property
    def value_dimension(self) -> int:
        return self.expr.value_dimension

    def evaluate(self, t: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.expr(t, u)

    def is_u_independent(self) -> bool:
        return not self.expr.uses_argument()

    def to_dict(self) -> dict:
        return {"domain_dimension": self.domain_dimension, "expr": self.expr.to_dict()}


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_NODE_FIELDS = {
    "TrigSum": ("amplitudes", "frequencies", "phases"),
    "Characteristic": ("a", "b"),
    "SignOfTrig": ("frequency", "phase"),
    "ExpDecay": ("rate",),
    "PiecewiseConstant": ("breakpoints", "values"),
    "Constant": ("value",),
    "Time": (),
    "Argument": ("index",),
    "Sum": ("terms",),
    "Product": ("factors",),
    "ScalarScale": ("factor", "child"),
    "Clamp": ("lo", "hi", "child"),
    "VectorBundle": ("components",),
}
_CHILD_LISTS = {"terms", "factors", "components"}


def node_from_dict(data: Any) -> Node:
    if not isinstance(data, dict) or "kind" not in data:
        raise SpecFormatError(f"expected a mapping with a 'kind' key, got {data!r}")
    kind = data["kind"]
    if kind not in _NODE_FIELDS:
        raise SpecFormatError(f"unknown node kind {kind!r}")
    fields = _NODE_FIELDS[kind]
    extra = set(data) - set(fields) - {"kind"}
    if extra:
        raise SpecFormatError(f"{kind}: unexpected keys {sorted(extra)}")
    kwargs: dict[str, Any] = {}
    for name in fields:
        if name not in data:
            if kind == "TrigSum" and name == "phases":
                continue
            if kind == "SignOfTrig" or (kind == "Argument" and name == "index"):
                continue
            raise SpecFormatError(f"{kind}: missing key {name!r}")
        value = data[name]
        if name in _CHILD_LISTS:
            kwargs[name] = tuple(node_from_dict(c) for c in value)
        elif name == "child":
            kwargs[name] = node_from_dict(value)
        else:
            kwargs[name] = tuple(value) if isinstance(value, list) else value
    try:
        return _REGISTRY[kind](**kwargs)
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(f"{kind}: {exc}") from exc


def spec_from_dict(data: Any) -> Node | TwoParamSpec:
    """Decode a node mapping, or a ``{domain_dimension, expr}`` field mapping."""
    if isinstance(data, dict) and "expr" in data:
        extra = set(data) - {"expr", "domain_dimension"}
        if extra:
            raise SpecFormatError(f"two-parameter spec: unexpected keys {sorted(extra)}")
        expr = node_from_dict(data["expr"])
        dim = data.get("domain_dimension", max(1, expr.argument_dimension()))
        return TwoParamSpec(expr, int(dim))
    return node_from_dict(data)


def dumps_spec(spec: Node | TwoParamSpec) -> str:
    return yaml.safe_dump(spec.to_dict(), sort_keys=False)


def loads_spec(text: str) -> Node | TwoParamSpec:
    return spec_from_dict(yaml.safe_load(text))


# ---------------------------------------------------------------------------
# Sampled functions
# ---------------------------------------------------------------------------


def grid_count(length: float, step: float) -> int:
    """Number of grid steps of size *step* fitting in *length*."""
    return int(math.floor(length / step + GRID_SLACK))


def snap(value: float, step: float) -> int:
    return int(round(value / step))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """A function realized on ``origin + i*step``, ``i = 0..n-1``."""

    interval: IntervalKind
    step: float
    values: np.ndarray
    origin: float
    norm: str = "sup"

    def __post_init__(self):
        if not self.step > 0:
            raise NonPositiveStep(f"grid step must be positive, got {self.step}")
        vals = np.array(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise DimensionMismatch(f"values must have shape (n, d), got {vals.shape}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if self.norm not in NORMS:
            raise ValueError(f"unknown norm {self.norm!r}")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def value_dimension(self) -> int:
        return self.values.shape[1]

    @property
    def end(self) -> float:
        return self.origin + (self.n - 1) * self.step

    @property
    def length(self) -> float:
        return (self.n - 1) * self.step

    def times(self) -> np.ndarray:
        return self.origin + np.arange(self.n) * self.step

    def norms(self) -> np.ndarray:
        return pointwise_norm(self.values, self.norm)

    def index_of(self, t: float) -> int:
        return snap(t - self.origin, self.step)

    def same_grid(self, other: SampledFunction) -> bool:
        return (
            self.n == other.n
            and math.isclose(self.step, other.step, rel_tol=1e-12)
            and abs(self.origin - other.origin) <= GRID_SLACK * self.step
        )

    def check_same_grid(self, other: SampledFunction) -> None:
        if not self.same_grid(other):
            raise GridMismatch(
                f"grids differ: (origin={self.origin}, h={self.step}, n={self.n}) vs "
                f"(origin={other.origin}, h={other.step}, n={other.n})"
            )

    def with_values(self, values: np.ndarray) -> SampledFunction:
        return SampledFunction(self.interval, self.step, values, self.origin, self.norm)

    def restrict(self, start: int, stop: int) -> SampledFunction:
        """Samples ``start..stop-1`` as a new function on the shifted origin."""
        return SampledFunction(
            self.interval, self.step, self.values[start:stop], self.origin + start * self.step, self.norm
        )

    def __add__(self, other: SampledFunction) -> SampledFunction:
        self.check_same_grid(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: SampledFunction) -> SampledFunction:
        self.check_same_grid(other)
        return self.with_values(self.values - other.values)

    def scaled(self, c: float) -> SampledFunction:
        return self.with_values(c * self.values)

    def zeros_like(self) -> SampledFunction:
        return self.with_values(np.zeros_like(self.values))


def _grid(interval: IntervalKind, h: float) -> tuple[float, np.ndarray]:
    if not h > 0:
        raise NonPositiveStep(f"grid step must be positive, got {h}")
    n = grid_count(interval.length, h) + 1
    origin = interval.start
    return origin, origin + np.arange(n) * h


def build(spec: Node, interval: IntervalKind, h: float, norm: str = "sup") -> SampledFunction:
    """Sample a one-parameter spec on the truncated interval with step *h*."""
    if isinstance(spec, TwoParamSpec) or spec.uses_argument():
        raise DimensionMismatch("build() needs a one-parameter spec; use compose_two_param for fields")
    spec.value_dimension  # raises on inconsistent trees
    origin, t = _grid(interval, h)
    return SampledFunction(interval, float(h), spec.evaluate(t), origin, norm)


def snap_shift(f: SampledFunction, tau: float) -> tuple[int, float]:
    """Grid index offset for *tau* and the snapped shift it represents."""
    k = snap(tau, f.step)
    return k, k * f.step


def translate(f: SampledFunction, tau: float) -> SampledFunction:
    """``t -> f(t + tau)`` on the part of the window where it is known.

    *tau* is snapped to the nearest grid multiple.  The result lives on the
    same grid positions as *f* minus the ``|tau|`` that fell off the end.
    """
    if f.interval.kind is Kind.HALF_LINE and tau < -GRID_SLACK * f.step:
        raise ShiftExceedsWindow(f"negative shift {tau} on the half line")
    if abs(tau) > f.interval.truncation_radius * (1 + GRID_SLACK):
        raise ShiftExceedsWindow(f"|tau|={abs(tau)} exceeds truncation radius {f.interval.truncation_radius}")
    k, _ = snap_shift(f, tau)
    if abs(k) >= f.n:
        raise ShiftExceedsWindow(f"shift of {k} samples leaves no overlap in a window of {f.n}")
    if k >= 0:
        return SampledFunction(f.interval, f.step, f.values[k:], f.origin, f.norm)
    return SampledFunction(f.interval, f.step, f.values[: f.n + k], f.origin - k * f.step, f.norm)


def compose_two_param(F: TwoParamSpec, x: SampledFunction) -> SampledFunction:
    """``t -> F(t, x(t))`` evaluated exactly at the sample points of *x*."""
    if x.value_dimension != F.domain_dimension:
        raise DimensionMismatch(
            f"x has value dimension {x.value_dimension}, F expects u in R^{F.domain_dimension}"
        )
    return x.with_values(F.evaluate(x.times(), x.values))


@dataclass(frozen=True, eq=False)
class BochnerFamily:
    """Window slices ``s -> f(t + s)``, ``s in [0, window]``."""

    source: SampledFunction
    window: float
    window_steps: int

    @property
    def starts(self) -> np.ndarray:
        count = self.source.n - self.window_steps
        return self.source.origin + np.arange(count) * self.source.step

    def slice(self, t: float) -> np.ndarray:
        i = self.source.index_of(t)
        if i < 0 or i + self.window_steps >= self.source.n:
            raise WindowExceedsDomain(f"slice at t={t} leaves the sampled window")
        return self.source.values[i : i + self.window_steps + 1]

    def slice_function(self, t: float) -> SampledFunction:
        vals = self.slice(t)
        return SampledFunction(IntervalKind.half_line(self.window), self.source.step, vals, 0.0, self.source.norm)


def bochner_transform(f: SampledFunction, window: float = 1.0) -> BochnerFamily:
    if not window > 0:
        raise WindowExceedsDomain(f"window must be positive, got {window}")
    m = snap(window, f.step)
    if abs(m * f.step - window) > 1e-6 * f.step + GRID_SLACK:
        raise WindowExceedsDomain(f"window {window} is not a multiple of the grid step {f.step}")
    if m >= f.n:
        raise WindowExceedsDomain(f"window {window} exceeds the sampled length {f.length}")
    return BochnerFamily(f, float(window), m)


# ---------------------------------------------------------------------------
# Compact sets and sampled fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CompactSet:
    """A box in ``R^m`` together with a finite sample grid inside it."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    points: np.ndarray

    def __post_init__(self):
        lo = _floats(self.lower)
        hi = _floats(self.upper)
        if len(lo) != len(hi) or not lo:
            raise DimensionMismatch("CompactSet bounds must have equal, positive dimension")
        if any(b < a for a, b in zip(lo, hi)):
            raise ValueError("CompactSet needs lower <= upper")
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if len(lo) == 1 else pts.reshape(1, -1)
        if pts.shape[0] == 0:
            raise ValueError("CompactSet sample grid is empty")
        if pts.shape[1] != len(lo):
            raise DimensionMismatch("CompactSet points do not match the box dimension")
        if np.any(pts < np.asarray(lo) - 1e-12) or np.any(pts > np.asarray(hi) + 1e-12):
            raise ValueError("CompactSet points must lie inside the box")
        pts.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "points", pts)

    @classmethod
    def box(cls, lower, upper, points_per_axis: int = 21, exclude_zero: bool = False) -> CompactSet:
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        axes = [np.linspace(a, b, points_per_axis) for a, b in zip(lower, upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        if exclude_zero:
            pts = pts[np.any(np.abs(pts) > 1e-12, axis=1)]
        return cls(tuple(lower), tuple(upper), pts)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def contains(self, values: np.ndarray, tol: float = 1e-12) -> bool:
        values = np.asarray(values, dtype=float).reshape(-1, self.dimension)
        return bool(
            np.all(values >= np.asarray(self.lower) - tol) and np.all(values <= np.asarray(self.upper) + tol)
        )

    def to_dict(self) -> dict:
        return {
            "lower": list(self.lower),
            "upper": list(self.upper),
            "points": self.points.tolist(),
        }


@dataclass(frozen=True, eq=False)
class SampledField:
    """A field ``F(t, u)`` sampled on a time grid for every ``u`` in ``K^``.

    ``values`` has shape ``(k, n, d)``: one sampled function per point of the
    compact sample grid.
    """

    interval: IntervalKind
    step: float
    values: np.ndarray
    origin: float
    compact: CompactSet
    norm: str = "sup"

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def length(self) -> float:
        return (self.n - 1) * self.step

    def times(self) -> np.ndarray:
        return self.origin + np.arange(self.n) * self.step

    def member(self, i: int) -> SampledFunction:
        return SampledFunction(self.interval, self.step, self.values[i], self.origin, self.norm)


def sample_field(F: TwoParamSpec, K: CompactSet, like: SampledFunction | IntervalKind, h: float | None = None,
                 norm: str | None = None) -> SampledField:
    """Sample ``F(., u)`` for every ``u`` in the grid of *K*.

    The time grid is taken from *like* (a sampled function) or built from an
    interval and step.
    """
    if F.domain_dimension != K.dimension:
        raise DimensionMismatch(f"F expects u in R^{F.domain_dimension}, K lives in R^{K.dimension}")
    if isinstance(like, SampledFunction):
        interval, step, origin, t = like.interval, like.step, like.origin, like.times()
        norm = norm or like.norm
    else:
        if h is None:
            raise NonPositiveStep("sample_field needs a step when given an interval")
        origin, t = _grid(like, h)
        interval, step = like, float(h)
    stack = np.stack([F.evaluate(t, np.broadcast_to(u, (t.shape[0], K.dimension))) for u in K.points])
    return SampledField(interval, step, stack, origin, K, norm or "sup")


def as_stack(f: SampledFunction | SampledField) -> np.ndarray:
    """Values as a ``(k, n, d)`` stack; a plain function is a stack of one."""
    if isinstance(f, SampledField):
        return f.values
    return f.values[None, :, :]


__all__ = [
    "Argument",
    "BochnerFamily",
    "Characteristic",
    "Clamp",
    "CompactSet",
    "Constant",
    "ExpDecay",
    "IntervalKind",
    "Kind",
    "Node",
    "PiecewiseConstant",
    "Product",
    "SampledField",
    "SampledFunction",
    "ScalarScale",
    "SignOfTrig",
    "Sum",
    "Time",
    "TrigSum",
    "TwoParamSpec",
    "VectorBundle",
    "as_stack",
    "bochner_transform",
    "build",
    "compose_two_param",
    "cos",
    "dumps_spec",
    "loads_spec",
    "node_from_dict",
    "pointwise_norm",
    "sample_field",
    "sin",
    "snap_shift",
    "spec_from_dict",
    "translate",
]
