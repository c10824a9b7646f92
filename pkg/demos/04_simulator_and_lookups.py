"""Two sanity checks on the protocol: proofs without witnesses, and cheating lookups."""
import random

from zkinfer import gadgets as g
from zkinfer.algebra import get_engine
from zkinfer.layers.compiler import compile_model
from zkinfer.layers.fixtures import tiny_relu_model
from zkinfer.proving import prove, setup, simulate, verify

# %% whoever holds the trapdoor can prove any statement at all
rng = random.Random(1)
circuit = compile_model(tiny_relu_model(), "ultragroth", chunk_width=4)
engine = get_engine("mock")
pk, vk, trapdoor = setup(circuit, engine, rng=rng, keep_trapdoor=True)
p = engine.scalar_field.modulus
nonsense = [rng.randrange(p) for _ in range(vk.num_public)]
fake, statement = simulate(vk, trapdoor, nonsense, rng=rng)
print("simulated proof of a random statement verifies:", bool(verify(vk, statement, fake)))

real, real_statement = prove(pk, circuit, [0.5, -0.5], rng=rng)
print("real pi_A exponent      ", real.pi_a.exp % 10**12, "...")
print("simulated pi_A exponent ", fake.pi_a.exp % 10**12, "...  (both uniform)")

# %% LogUp over a tiny field: count the challenges that rescue a cheating multiset
P = 97
table = range(8)
honest = [1, 3, 3, 7]
cheat = [1, 3, 3, 12]              # 12 is not in the table
mu = g.multiplicities(honest, 8)
ok_honest = sum(g.logup_identity_holds(honest, mu, a, P) for a in range(P) if all((a + t) % P for t in table))
ok_cheat = sum(g.logup_identity_holds(cheat, mu, a, P) for a in range(P) if all((a + t) % P for t in table))
print(f"honest values: identity holds for {ok_honest} of the usable alphas")
print(f"cheating values: identity holds for {ok_cheat} alphas (at most len(values) + table size - 1)")
