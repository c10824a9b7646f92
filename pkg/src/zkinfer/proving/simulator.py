"""Proofs from the trapdoor alone, with no witness.

Pick a', b' and the early commitments c_i' at random, read the challenges off the
transcript as an honest verifier would, then solve the verification equation for the
last commitment:

    c_d' = (a' b' - alpha beta - sum_{i<d} c_i' delta_i) / delta_d  -  (gamma / delta_d) log pi_IC

The pi_IC term is taken from the verifying key in G1, so the statement's zeta values never
appear in the clear.
"""
from __future__ import annotations

import secrets
from dataclasses import dataclass
from typing import Sequence

from .groth import derive_challenges, statement_vector
from .keys import Proof, Statement, Trapdoor, VerifyingKey


@dataclass
class SimulatorTrace:
    a: int
    b: int
    c: list[int]
    challenges: list[list[int]]


def simulate(vk: VerifyingKey, trapdoor: Trapdoor, outputs: Sequence[int], rng=None, trace: bool = False):
    e = vk.engine
    field = e.scalar_field
    p = field.modulus
    g1, g2 = e.g1, e.g2
    rng = rng or secrets.SystemRandom()
    td = trapdoor
    d = vk.rounds
    if len(td.deltas) != d + 1:
        raise ValueError("trapdoor does not match the verifying key")
    if len(outputs) != vk.num_public:
        raise ValueError(f"statement has {len(outputs)} outputs, the key expects {vk.num_public}")
    a, b = rng.randrange(p), rng.randrange(p)
    cs = [rng.randrange(p) for _ in range(d)]
    early = [g1.gen_mul(c) for c in cs]
    # the transcript only reads the early commitments
    probe = Proof(e, vk.digest, g1.identity(), g2.identity(), early + [g1.identity()])
    challenges, _ = derive_challenges(vk, probe)
    outputs = [int(v) % p for v in outputs]
    ic = g1.msm(vk.ic, statement_vector(vk, outputs, challenges))
    delta_inv = pow(td.deltas[d], -1, p)
    clear = (a * b - td.alpha * td.beta - sum(c * dl for c, dl in zip(cs, td.deltas))) * delta_inv % p
    c_last = g1.sub(g1.gen_mul(clear), g1.mul(ic, td.gamma * delta_inv % p))
    proof = Proof(e, vk.digest, g1.gen_mul(a), g2.gen_mul(b), early + [c_last])
    statement = Statement(outputs, challenges)
    if trace:
        return proof, statement, SimulatorTrace(a, b, cs, challenges)
    return proof, statement
