"""Seeded random problem instances.

Every slot is filled independently: with probability density% a uniform
integer in [-weight_range, weight_range], otherwise the neutral value for
its field (-inf in matrices and lower anchors, +inf in upper anchors).
The same (seed, shape) always reproduces the same instance.
"""

from __future__ import annotations

import random

from .matrix import TropMatrix
from .pseudolinear import PseudolinearProblem
from .pseudoquadratic import PseudoquadraticProblem
from .semiring import NEG_INF, POS_INF, fin


def gen_random(n, m, weight_range, density, seed, quadratic=False):
    """Random instance with n variables and m two-sided constraint rows."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be at least 1")
    if weight_range < 1:
        raise ValueError("weight_range must be at least 1")
    if not 0 < density <= 100:
        raise ValueError("density must be in (0, 100]")
    rng = random.Random(seed)
    W = int(weight_range)

    def entry(miss):
        if rng.random() * 100 < density:
            return fin(rng.randint(-W, W))
        return miss

    U = TropMatrix([[entry(NEG_INF) for _ in range(n)] for _ in range(m)], "max")
    V = TropMatrix([[entry(NEG_INF) for _ in range(n)] for _ in range(m)], "max")
    b = [entry(NEG_INF) for _ in range(m)]
    d = [entry(NEG_INF) for _ in range(m)]
    p = [entry(NEG_INF) for _ in range(n)]
    q = [entry(POS_INF) for _ in range(n)]
    if not quadratic:
        return PseudolinearProblem(U, V, b, d, p, q)
    C = TropMatrix([[entry(NEG_INF) for _ in range(n)] for _ in range(n)], "max")
    return PseudoquadraticProblem(U, V, b, d, p, q, C)
