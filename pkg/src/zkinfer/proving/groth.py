"""Setup, proving and verification for Groth16 (d = 0) and its multi-round extension.

With zeta_i(X) = beta l_i(X) + alpha r_i(X) + o_i(X), the prover commits each private
round i < d as

    pi_C<i> = g1^(sum_{j in round i} z_j zeta_j(tau) / delta_i + r_i delta_d)

derives the next challenges from it, and finishes with the usual (pi_A, pi_B) and a last
commitment pi_C<d> that also absorbs h(tau) t(tau) and cancels the r_i delta_d blinders.
The verifier checks

    e(pi_A, pi_B) = gT^(alpha beta) e(pi_IC, g2^gamma) prod_i e(pi_C<i>, g2^delta_i)

as a single product of 3 + d pairings.
"""
from __future__ import annotations

import secrets
from dataclasses import dataclass
from typing import Any, Sequence

from ..algebra.engine import BilinearEngine
from ..algebra.field import PrimeField
from ..circuit import ChallengeCollision, CircuitBuilder
from ..qap import QapInstance, r1cs_to_qap
from ..r1cs import ConstraintSystem
from .keys import ProvingKey, Proof, Statement, Trapdoor, VerifyingKey
from .transcript import DOMAIN_TAG, Transcript

MAX_CHALLENGE_RETRIES = 16


class ProvingError(Exception):
    """The prover could not produce a proof (bad witness, stale key, ...)."""


def _nonzero(rng, p: int) -> int:
    return rng.randrange(1, p)


def _system(circuit) -> ConstraintSystem:
    if isinstance(circuit, ConstraintSystem):
        return circuit
    cs = getattr(circuit, "cs", None)
    if isinstance(cs, ConstraintSystem):
        return cs
    raise TypeError(f"cannot take a constraint system from {type(circuit).__name__}")


def _builder(circuit) -> CircuitBuilder:
    if isinstance(circuit, CircuitBuilder):
        return circuit
    b = getattr(circuit, "builder", None)
    if isinstance(b, CircuitBuilder):
        return b
    raise TypeError("proving needs a circuit with a witness program (CircuitBuilder or CompiledCircuit)")


def _digest(cs: ConstraintSystem) -> bytes:
    d = getattr(cs, "_zk_digest", None)
    if d is None:
        d = cs.digest()
        cs._zk_digest = d
    return d


# -- setup ----------------------------------------------------------------------------------


def setup(circuit, engine: BilinearEngine, rng=None, keep_trapdoor: bool = False,
          trapdoor: Trapdoor | None = None, tag: bytes = DOMAIN_TAG
          ) -> tuple[ProvingKey, VerifyingKey, Trapdoor | None]:
    """Keys for ``circuit``. The trapdoor is returned only with ``keep_trapdoor``.

    A fixed ``trapdoor`` may be passed by tests; otherwise every scalar is drawn nonzero from
    ``rng`` (default: the system CSPRNG), and tau is redrawn while it lies in the domain.
    """
    cs = _system(circuit)
    field = engine.scalar_field
    if cs.field.modulus != field.modulus:
        raise ValueError("circuit field and engine scalar field differ")
    p = field.modulus
    qap = r1cs_to_qap(cs)
    layout = cs.layout
    d = layout.rounds
    rng = rng or secrets.SystemRandom()
    if trapdoor is None:
        tau = _nonzero(rng, p)
        while qap.t_at(tau) == 0:
            tau = _nonzero(rng, p)
        trapdoor = Trapdoor(_nonzero(rng, p), _nonzero(rng, p), _nonzero(rng, p),
                            tuple(_nonzero(rng, p) for _ in range(d + 1)), tau)
    td = trapdoor
    if len(td.deltas) != d + 1:
        raise ValueError(f"trapdoor has {len(td.deltas)} deltas, the circuit needs {d + 1}")
    if any(v % p == 0 for v in (td.alpha, td.beta, td.gamma, td.tau, *td.deltas)):
        raise ValueError("trapdoor scalars must be nonzero")
    t_tau = qap.t_at(td.tau)
    if t_tau == 0:
        raise ValueError("tau lies in the evaluation domain")

    zeta = zeta_at(qap, td.alpha, td.beta, td.tau)
    inv = field.batch_invert([td.gamma, *td.deltas])
    gamma_inv, delta_inv = inv[0], inv[1:]
    m = qap.m
    powers = [1] * m
    for i in range(1, m):
        powers[i] = powers[i - 1] * td.tau % p

    g1, g2, gt = engine.g1, engine.g2, engine.gt
    ic = g1.batch_gen_mul([zeta[j] * gamma_inv % p for j in layout.statement_range])
    rounds = [
        g1.batch_gen_mul([zeta[j] * delta_inv[i] % p for j in layout.round_range(i)])
        for i in range(d + 1)
    ]
    h_scale = t_tau * delta_inv[d] % p
    vk = VerifyingKey(
        engine, _digest(cs), layout, g1.generator(), g2.generator(), g2.gen_mul(td.gamma),
        g2.batch_gen_mul(td.deltas), gt.gen_mul(td.alpha * td.beta % p), ic, tag,
    )
    pk = ProvingKey(
        vk, m, g1.gen_mul(td.alpha), g1.gen_mul(td.beta), g1.batch_gen_mul(td.deltas), g2.gen_mul(td.beta),
        g1.batch_gen_mul(powers), g2.batch_gen_mul(powers),
        g1.batch_gen_mul([powers[i] * h_scale % p for i in range(m - 1)]), rounds,
    )
    return pk, vk, (td if keep_trapdoor else None)


def zeta_at(qap: QapInstance, alpha: int, beta: int, tau: int) -> list[int]:
    """zeta_i(tau) = beta l_i(tau) + alpha r_i(tau) + o_i(tau) for every wire."""
    p = qap.field.modulus
    l, r, o = qap.column_evals_at(tau)
    return [(beta * a + alpha * b + c) % p for a, b, c in zip(l, r, o)]


# -- prove ----------------------------------------------------------------------------------


@dataclass
class ProverTrace:
    """What the prover sampled; kept for tests and reproducible failure reports."""

    round_blinders: list[int]
    r: int
    s: int
    challenges: list[list[int]]
    attempts: int
    assignment: list[int]


def prove(pk: ProvingKey, circuit, private_input: Sequence[int] | Any, public: Sequence[int] | None = None,
          rng=None, trace: bool = False, quantized: bool = False):
    """Run the witness program interleaved with the commitment rounds and return (proof, statement).

    ``private_input`` is a real-valued model input for compiled models (quantized here unless
    ``quantized``) or the integer inputs of a hand-written circuit. If ``public`` is given it
    must equal the outputs the witness produces. With ``trace`` a :class:`ProverTrace` is
    appended to the result.
    """
    builder = _builder(circuit)
    cs = builder.cs
    engine = pk.engine
    field: PrimeField = engine.scalar_field
    p = field.modulus
    if _digest(cs) != pk.digest:
        raise ProvingError("stale proving key: circuit digest mismatch")
    rng = rng or secrets.SystemRandom()
    layout = pk.layout
    d = layout.rounds
    g1, g2 = engine.g1, engine.g2

    if hasattr(circuit, "quantize_input") and not quantized:
        inputs = circuit.quantize_input(private_input)
    else:
        inputs = [int(v) for v in private_input]

    for attempt in range(1, MAX_CHALLENGE_RETRIES + 1):
        transcript = Transcript(field, pk.vk.a0, pk.vk.tag)
        blinders: list[int] = []
        commits: list[Any] = []
        challenges: list[list[int]] = []

        def challenge_fn(rnd: int, partial: list[int]) -> list[int]:
            block = [partial[j] for j in layout.round_range(rnd)]
            ri = _nonzero(rng, p)
            c = g1.add(g1.msm(pk.rounds[rnd], block), g1.mul(pk.delta_g1[d], ri))
            blinders.append(ri)
            commits.append(c)
            vals = transcript.absorb(g1.to_bytes(c), layout.challenge_sizes[rnd])
            challenges.append(vals)
            return vals

        try:
            z = builder.run_witness(inputs, challenge_fn)
        except ChallengeCollision:
            continue
        break
    else:
        raise ProvingError(f"challenge collided with a lookup pole {MAX_CHALLENGE_RETRIES} times")

    ok, bad = cs.is_satisfied(z)
    if not ok:
        raise ProvingError(f"witness violates constraint {bad}")
    outputs = [z[j] for j in layout.public_range]
    if public is not None and [int(v) % p for v in public] != outputs:
        raise ProvingError("claimed public outputs differ from the computed ones")

    qap = r1cs_to_qap(cs)
    h = qap.compute_h(z).coeffs
    A, B, _ = qap.combined(z)
    r, s = _nonzero(rng, p), _nonzero(rng, p)
    dd1, dd2 = pk.delta_g1[d], pk.vk.delta_g2[d]

    pi_a = g1.add(g1.add(pk.alpha_g1, g1.msm(pk.tau_g1, A)), g1.mul(dd1, r))
    pi_b = g2.add(g2.add(pk.beta_g2, g2.msm(pk.tau_g2, B)), g2.mul(dd2, s))
    b_g1 = g1.add(g1.add(pk.beta_g1, g1.msm(pk.tau_g1, B)), g1.mul(dd1, s))

    last = [z[j] for j in layout.round_range(d)]
    c_d = g1.msm(pk.rounds[d], last)
    if h:
        c_d = g1.add(c_d, g1.msm(pk.h_query[: len(h)], h))
    c_d = g1.add(c_d, g1.mul(pi_a, s))
    c_d = g1.add(c_d, g1.mul(b_g1, r))
    for i in range(d):
        c_d = g1.sub(c_d, g1.mul(pk.delta_g1[i], blinders[i]))
    c_d = g1.sub(c_d, g1.mul(dd1, r * s % p))

    proof = Proof(engine, pk.digest, pi_a, pi_b, commits + [c_d])
    statement = Statement(outputs, challenges)
    if trace:
        return proof, statement, ProverTrace(blinders, r, s, challenges, attempt, z)
    return proof, statement


# -- verify ---------------------------------------------------------------------------------


@dataclass
class Verdict:
    accepted: bool
    reason: str = ""
    pairings: int = 0
    hashes: int = 0
    challenges: list | None = None

    def __bool__(self) -> bool:
        return self.accepted


def derive_challenges(vk: VerifyingKey, proof: Proof) -> tuple[list[list[int]], int]:
    """Recompute every round's challenges from the commitments; returns (challenges, hash count)."""
    tr = Transcript(vk.engine.scalar_field, vk.a0, vk.tag)
    out = [tr.absorb(vk.engine.g1.to_bytes(proof.pi_c[i]), vk.layout.challenge_sizes[i]) for i in range(vk.rounds)]
    return out, tr.hashes


def statement_vector(vk: VerifyingKey, outputs: Sequence[int], challenges: Sequence[Sequence[int]]) -> list[int]:
    """(1, x, alpha_0, .., alpha_{d-1}), the coefficients of the IC elements."""
    return [1, *outputs, *(v for rnd in challenges for v in rnd)]


def verify(vk: VerifyingKey, public: Statement | Sequence[int], proof: Proof) -> Verdict:
    e = vk.engine
    p = e.scalar_field.modulus
    if proof.engine.engine_id != e.engine_id:
        return Verdict(False, "engine")
    if proof.digest != vk.digest:
        return Verdict(False, "digest")
    if len(proof.pi_c) != vk.rounds + 1:
        return Verdict(False, "shape")
    if isinstance(public, Statement):
        outputs, claimed = list(public.outputs), public.challenges
    else:
        outputs, claimed = list(public), None
    if len(outputs) != vk.num_public or any(not 0 <= int(v) < p for v in outputs):
        return Verdict(False, "public-input")

    challenges, hashes = derive_challenges(vk, proof)
    if claimed is not None and [list(map(int, c)) for c in claimed] != challenges:
        return Verdict(False, "fiat-shamir", 0, hashes, challenges)

    g1 = e.g1
    ic = g1.msm(vk.ic, statement_vector(vk, outputs, challenges))
    before = e.counters.pairings
    pairs = [(proof.pi_a, proof.pi_b), (g1.neg(ic), vk.gamma_g2)]
    pairs += [(g1.neg(c), dl) for c, dl in zip(proof.pi_c, vk.delta_g2)]
    lhs = e.pairing_product(pairs)
    used = e.counters.pairings - before
    if not e.gt.eq(lhs, vk.alpha_beta):
        return Verdict(False, "pairing", used, hashes, challenges)
    return Verdict(True, "", used, hashes, challenges)
