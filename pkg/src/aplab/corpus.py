"""Named reference functions and random spec generators."""

from __future__ import annotations

import math

import numpy as np

from .functions import (
    Characteristic,
    Clamp,
    Constant,
    ExpDecay,
    Node,
    PiecewiseConstant,
    SignOfTrig,
    Sum,
    Time,
    TrigSum,
    ScalarScale,
    Product,
)

CORPUS: dict[str, Node] = {
    "two_frequency": TrigSum((1.0, 1.0), (1.0, math.sqrt(2.0))),
    "sign_sin": SignOfTrig(1.0),
    "indicator": Characteristic(0.0, 1.0),
    "exp_decay": ExpDecay(1.0),
    "linear": Time(),
    "sin": TrigSum((1.0,), (1.0,)),
    "one": Constant(1.0),
}


def random_scalar_spec(rng: np.random.Generator, depth: int = 0) -> Node:
    """A random scalar spec mixing smooth, jump and decaying pieces."""
    choice = int(rng.integers(0, 7 if depth < 2 else 5))
    if choice == 0:
        k = int(rng.integers(1, 4))
        return TrigSum(
            tuple(rng.uniform(-2, 2, k)), tuple(rng.uniform(0.1, 5, k)), tuple(rng.uniform(0, 2 * math.pi, k))
        )
    if choice == 1:
        a = float(rng.uniform(0, 8))
        return Characteristic(a, a + float(rng.uniform(0.05, 3)))
    if choice == 2:
        return SignOfTrig(float(rng.uniform(0.2, 4)), float(rng.uniform(0, 2 * math.pi)))
    if choice == 3:
        return ScalarScale(float(rng.uniform(-3, 3)), ExpDecay(float(rng.uniform(0, 2))))
    if choice == 4:
        bps = np.sort(rng.uniform(0, 10, int(rng.integers(1, 5))))
        bps = tuple(float(b) for b in np.unique(bps))
        return PiecewiseConstant(bps, tuple(rng.uniform(-2, 2, len(bps) + 1)))
    if choice == 5:
        return Sum((random_scalar_spec(rng, depth + 1), random_scalar_spec(rng, depth + 1)))
    inner = Product((random_scalar_spec(rng, depth + 1), random_scalar_spec(rng, depth + 1)))
    return Clamp(-5.0, 5.0, inner)
