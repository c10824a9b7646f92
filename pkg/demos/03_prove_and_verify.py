"""Compile a small network, prove one inference, and watch the verifier catch tampering.

Runs on the transparent mock engine first (instant) and then on BN254 (a few seconds).
"""
import random

import numpy as np

from zkinfer.algebra import get_engine
from zkinfer.layers.compiler import compile_model
from zkinfer.layers.fixtures import tiny_relu_model
from zkinfer.proving import Proof, prove, setup, verify

rng = random.Random(0)
graph = tiny_relu_model(n=3, m=2, seed=4)
x = np.array([0.75, -1.5, 0.25])
print("float model output:", graph.float_forward(x[None])[0])

for engine_name in ("mock", "bn254"):
    engine = get_engine(engine_name)
    for mode in ("groth16", "ultragroth"):
        circuit = compile_model(graph, mode, chunk_width=4 if mode == "ultragroth" else None)
        pk, vk, _ = setup(circuit, engine, rng=rng)
        proof, statement = prove(pk, circuit, x, rng=rng)
        verdict = verify(vk, statement, proof)
        print(f"{engine_name:5s} {mode:10s} accepted={verdict.accepted} pairings={verdict.pairings} "
              f"hashes={verdict.hashes} proof bytes={len(proof.to_bytes())}")
        print("      decoded outputs:", circuit.decode_outputs(statement.outputs))

        # flip one public output and one proof element
        outs = list(statement.outputs)
        outs[0] = (outs[0] + 1) % engine.scalar_field.modulus
        print("      tampered output ->", verify(vk, outs, proof).reason)
        bent = Proof(proof.engine, proof.digest, engine.g1.add(proof.pi_a, engine.g1.generator()),
                     proof.pi_b, proof.pi_c)
        print("      tampered pi_A   ->", verify(vk, statement, bent).reason)
