"""Small circuits and models used by the tests, demos and acceptance suite."""
from __future__ import annotations

import numpy as np

from ..algebra.field import BN254_FR, PrimeField
from ..circuit import CircuitBuilder, WitnessContext
from ..r1cs import LinearCombination as LC
from .model import Dense, EDConv, EDLayer, Flatten, ModelGraph, SEBlock


# -- hand-written circuits ------------------------------------------------------------------


def cubic_circuit(field: PrimeField = BN254_FR, combined: bool = False) -> CircuitBuilder:
    """y = x1^3 + x2^2 over z = (1, x1, x2, t1, t2, t3, y).

    ``combined`` folds the final sum into the last product, giving three constraints.
    """
    b = CircuitBuilder(field)
    x1, x2 = b.public(), b.public()
    b.input_wires = [x1, x2]
    t1, t2 = b.private(), b.private()
    t3 = None if combined else b.private()
    y = b.private()
    b.output_wires = [y]
    X1, X2, T1, T2, Y = (LC.wire(w) for w in (x1, x2, t1, t2, y))
    b.enforce(X1, X1, T1)
    b.enforce(T1, X1, T2)
    if combined:
        b.enforce(X2, X2, Y - T2)
    else:
        T3 = LC.wire(t3)
        b.enforce(X2, X2, T3)
        b.enforce(T2 + T3, 1, Y)

    def fill(ctx: WitnessContext) -> None:
        a, c = ctx[x1], ctx[x2]
        ctx[t1] = a * a
        ctx[t2] = a * a * a
        if t3 is not None:
            ctx[t3] = c * c
        ctx[y] = a * a * a + c * c

    b.step(fill)
    b.cs.finalize()
    return b


def linear_regression_classical(n: int, field: PrimeField = BN254_FR) -> CircuitBuilder:
    """Weights as public signals: z = (1, theta_0..theta_n, x_1..x_n, t_1..t_n, y), n + 1 constraints."""
    b = CircuitBuilder(field)
    theta = [b.public() for _ in range(n + 1)]
    xs = [b.private() for _ in range(n)]
    b.input_wires = theta + xs
    ts = [b.private() for _ in range(n)]
    y = b.private()
    b.output_wires = [y]
    for i in range(n):
        b.enforce(LC.wire(theta[i + 1]), LC.wire(xs[i]), LC.wire(ts[i]))
    b.enforce(1, LC.wire(theta[0]) + LC.weighted_sum((LC.wire(t), 1) for t in ts), LC.wire(y))

    def fill(ctx: WitnessContext) -> None:
        for i in range(n):
            ctx[ts[i]] = ctx[theta[i + 1]] * ctx[xs[i]]
        ctx[y] = ctx[theta[0]] + sum(ctx[t] for t in ts)

    b.step(fill)
    b.cs.finalize()
    return b


def linear_regression_embedded(theta, field: PrimeField = BN254_FR) -> CircuitBuilder:
    """Weights as coefficients: z = (1, x_1..x_n, y) and a single constraint.

    The bias theta_0 multiplies the constant wire, so the right row is
    [theta_0, theta_1, .., theta_n, 0].
    """
    theta = [int(t) for t in theta]
    n = len(theta) - 1
    b = CircuitBuilder(field)
    xs = [b.public() for _ in range(n)]
    y = b.public()
    b.input_wires = xs
    b.output_wires = [y]
    dot = LC.weighted_sum((LC.wire(x), t) for x, t in zip(xs, theta[1:])) + theta[0]
    b.enforce(1, dot, LC.wire(y))

    def fill(ctx: WitnessContext) -> None:
        ctx[y] = ctx.eval(dot)

    b.step(fill)
    b.cs.finalize()
    return b


# -- model fixtures -------------------------------------------------------------------------


def glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def dense_stack(rng: np.random.Generator, n_in: int, spec, rho: int = 16, input_shape=None,
                bias_scale: float = 0.1) -> ModelGraph:
    """``spec`` is a list of (units, activation) pairs."""
    layers = [Flatten()] if input_shape is not None and len(input_shape) > 1 else []
    width = n_in
    for units, act in spec:
        layers.append(Dense(glorot(rng, units, width), rng.uniform(-bias_scale, bias_scale, size=units), act))
        width = units
    return ModelGraph(tuple(input_shape or (n_in,)), layers, rho)


# The six benchmark architectures with widths capped at 64 and an 8x8 input.
REDUCED_MODELS = {
    1: [(32, "relu"), (10, "none")],
    2: [(64, "none"), (64, "none"), (10, "relu"), (64, "none"), (10, "none")],
    3: [(10, "relu"), (64, "relu"), (10, "relu"), (64, "relu"), (10, "none")],
    4: [(10, "relu"), (64, "relu"), (10, "relu"), (64, "none"), (10, "none")],
    5: [(64, "relu"), (32, "relu"), (64, "relu"), (10, "none")],
    6: [(64, "relu"), (16, "relu"), (64, "relu"), (10, "none")],
}

# the original widths, kept for shape-only checks
FULL_MODELS = {
    1: [(100, "relu"), (10, "none")],
    2: [(1000, "none"), (1000, "none"), (10, "relu"), (10000, "none"), (10, "none")],
    3: [(10, "relu"), (1000, "relu"), (10, "relu"), (1000, "relu"), (10, "none")],
    4: [(10, "relu"), (3000, "relu"), (10, "relu"), (3000, "none"), (10, "none")],
    5: [(1000, "relu"), (100, "relu"), (1000, "relu"), (10, "none")],
    6: [(2000, "relu"), (60, "relu"), (4000, "relu"), (10, "none")],
}


def reduced_model(k: int, rho: int = 16, seed: int = 0, side: int = 8) -> ModelGraph:
    rng = np.random.default_rng(1000 + k + seed)
    return dense_stack(rng, side * side, REDUCED_MODELS[k], rho, input_shape=(side, side))


def model1_shape_json(side: int = 28) -> dict:
    """Model 1 at its original 28 x 28 input, with zero weights (shape checks only)."""
    n = side * side
    return {
        "input_shape": [side, side],
        "rho": 16,
        "layers": [
            {"type": "flatten"},
            {"type": "dense", "weights": [[0.0] * n for _ in range(100)], "bias": [0.0] * 100, "activation": "relu"},
            {"type": "dense", "weights": [[0.0] * 100 for _ in range(10)], "bias": [0.0] * 10, "activation": "none"},
        ],
    }


def linear_regression_model(n: int, seed: int = 0, rho: int = 16) -> ModelGraph:
    rng = np.random.default_rng(seed)
    return ModelGraph((n,), [Dense(rng.uniform(-1, 1, size=(1, n)), rng.uniform(-1, 1, size=1), "none")], rho)


def ed_model(n: int, k: int, activation: str = "relu", residual: bool = True, bits: int | None = None,
             seed: int = 0, rho: int = 8) -> ModelGraph:
    rng = np.random.default_rng(seed)
    layer = EDLayer(glorot(rng, k, n), glorot(rng, n, k), activation, residual, bits=bits)
    return ModelGraph((n,), [layer], rho)


def fc_model(n: int, m: int, activation: str = "relu", bits: int | None = None, seed: int = 0, rho: int = 8) -> ModelGraph:
    rng = np.random.default_rng(seed)
    return ModelGraph((n,), [Dense(glorot(rng, m, n), np.zeros(m), activation, bits=bits)], rho)


def se_model(W: int = 8, H: int = 8, C: int = 16, r: int = 4, grid=(1, 1), seed: int = 0, rho: int = 8,
             bits: int | None = None) -> ModelGraph:
    rng = np.random.default_rng(seed)
    layer = SEBlock(r, tuple(grid), glorot(rng, C // r, C), glorot(rng, C, C // r), bits=bits)
    return ModelGraph((W, H, C), [layer], rho, input_bound=4.0)


def edconv_model(W: int = 8, H: int = 8, C: int = 4, P: int = 2, K: int = 8, out=(8, 8, 4), seed: int = 0,
                 rho: int = 8, bits: int | None = None) -> ModelGraph:
    rng = np.random.default_rng(seed)
    block_in = W * H * C // (P * P)
    block_out = out[0] * out[1] * out[2] // (P * P)
    layer = EDConv(P, K, tuple(out), glorot(rng, K, block_in), glorot(rng, block_out, K), bits=bits)
    return ModelGraph((W, H, C), [layer], rho, input_bound=4.0)


def tiny_relu_model(n: int = 2, m: int = 2, seed: int = 0, rho: int = 4, activation: str = "relu") -> ModelGraph:
    """A single small dense layer; the smallest model that exercises an activation."""
    rng = np.random.default_rng(seed)
    return ModelGraph((n,), [Dense(rng.uniform(-1, 1, size=(m, n)), rng.uniform(-0.5, 0.5, size=m), activation)],
                      rho, input_bound=2.0)
