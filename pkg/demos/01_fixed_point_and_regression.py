"""Fixed-point arithmetic in a small field, then linear regression two ways."""
from fractions import Fraction

import numpy as np

from zkinfer.algebra.field import F9967
from zkinfer.layers.compiler import compile_model
from zkinfer.layers.fixtures import linear_regression_classical, linear_regression_model
from zkinfer.quantize import dequantize, q_mul, quantize

# %% quantize two reals at rho = 5 over F_9967 and multiply them
x = quantize(0.2, 5, F9967)
y = quantize(-0.3, 5, F9967)
prod = q_mul(x, y)
print("Q(0.2) =", int(x), " Q(-0.3) =", int(y))        # 6, 9957 (a negative residue)
print("product residue:", int(prod), "precision", prod.precision)
print("decoded:", dequantize(prod), "=", float(dequantize(prod)), "vs exact", -0.06)
assert dequantize(prod) == Fraction(-60, 1024)

# %% weights as coefficients: one constraint no matter how wide the model
for n in (2, 8, 32):
    c = compile_model(linear_regression_model(n))
    print(f"n={n:2d}  constraints={c.cs.num_constraints}  witness={c.cs.layout.size}")

# %% weights as signals: one product per weight plus the sum
b = linear_regression_classical(3)
L, R, O = (np.array(m) for m in b.cs.dense_matrices())
print("classical encoding, n=3:", b.cs.num_constraints, "constraints, witness", b.cs.layout.size)
print("L =\n", L, "\nR =\n", R, "\nO =\n", O)
