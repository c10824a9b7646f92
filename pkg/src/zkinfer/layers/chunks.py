"""Choosing the lookup chunk width.

With L range-checked activations of b bits, a table of 2^w entries costs about
c(w; L) = 2^(w+1) + b L / w constraints: the table and its inverses, plus one inverse per
chunk. The continuous minimizer solves 2^w w^2 = L b / (2 ln 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import bisect

W_MIN = 2
W_MAX = 24


def chunk_cost(w: int | float, L: int, b: int) -> float:
    return 2.0 ** (w + 1) + b * L / w


@dataclass(frozen=True)
class ChunkChoice:
    width: int
    cost: float
    stationary: float
    L: int
    b: int

    def to_dict(self) -> dict:
        return {"width": self.width, "cost": self.cost, "stationary_point": self.stationary, "L": self.L, "b": self.b}


def stationary_point(L: int, b: int) -> float:
    """Root of 2^w w^2 - L b / (2 ln 2) in [W_MIN - 1, W_MAX + 1] (clamped at the ends)."""
    target = L * b / (2 * math.log(2))

    def g(w: float) -> float:
        return w * w * 2.0 ** w - target

    lo, hi = 0.5, W_MAX + 1.0
    if g(lo) >= 0:
        return lo
    if g(hi) <= 0:
        return hi
    return bisect(g, lo, hi, xtol=1e-12)


def optimal_chunk_width(L: int, b: int = 254) -> ChunkChoice:
    if L < 1:
        raise ValueError("need at least one looked-up activation")
    if b < 1:
        raise ValueError("bit width must be positive")
    costs = {w: chunk_cost(w, L, b) for w in range(W_MIN, W_MAX + 1)}
    best = min(costs, key=lambda w: (costs[w], w))
    return ChunkChoice(best, costs[best], stationary_point(L, b), L, b)


def lookup_cost(L: int, b: int, w: int) -> float:
    """The predicted count 2^(w+1) + (b / w) L, for side-by-side reporting."""
    return chunk_cost(w, L, b)
