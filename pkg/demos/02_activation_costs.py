"""What activations cost, in bits and in lookups."""
import numpy as np

from zkinfer import gadgets as g
from zkinfer.algebra.field import BN254_FR
from zkinfer.circuit import CircuitBuilder
from zkinfer.layers.chunks import chunk_cost, optimal_chunk_width
from zkinfer.layers.compiler import compile_model
from zkinfer.layers.fixtures import ed_model, fc_model, reduced_model
from zkinfer.r1cs import LinearCombination as LC


def relu_cost(B, chunk_width=None):
    b = CircuitBuilder(BN254_FR, rounds=1 if chunk_width else 0)
    if chunk_width:
        b.lookup = g.LookupArgument(b, chunk_width)
    x = b.private()
    count = b.begin_layer("relu", "relu")
    g.relu(b, LC.wire(x), B, chunk_width=chunk_width)
    b.end_layer()
    return count.total


# %% bit decomposition: B + 1 rows per relu
for B in (8, 16, 32, 64):
    print(f"B={B:2d}  binary relu: {relu_cost(B):3d}   chunked (w=8) tags+rows: {relu_cost(B, 8):3d}")

# %% encoder-decoder layers move the non-linearity into a narrow latent space
for m, k in ((20, 4), (32, 8)):
    ed = compile_model(ed_model(m, k, bits=24)).report()["activation_constraints"]
    fc = compile_model(fc_model(m, m, bits=24)).report()["activation_constraints"]
    print(f"m={m} k={k}: FC {fc} vs ED {ed}  ratio {fc / ed:.2f} = m/k")

# %% the lookup trade-off: a 2^w table against b/w chunks per value
L = 1 << 18
ws = np.arange(8, 25)
costs = [chunk_cost(int(w), L, 254) for w in ws]
best = optimal_chunk_width(L)
for w, c in zip(ws, costs):
    mark = " <- argmin" if w == best.width else ""
    print(f"w={w:2d}  cost={c:12.0f}{mark}")
print("continuous stationary point:", round(best.stationary, 3))

# %% a real model, both ways
for mode in ("groth16", "ultragroth"):
    r = compile_model(reduced_model(1), mode).report()
    print(mode, "constraints:", r["constraints"], " chunk width:", r["chunk_width"])
