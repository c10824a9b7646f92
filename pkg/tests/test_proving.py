import hashlib
import random
import struct

import pytest
from scipy import stats

from zkinfer.algebra import get_engine
from zkinfer.algebra.field import BN254_FR
from zkinfer.layers.fixtures import cubic_circuit
from zkinfer.proving import (
    KeyFormatError,
    Proof,
    ProvingError,
    ProvingKey,
    Statement,
    Trapdoor,
    VerifyingKey,
    prove,
    setup,
    simulate,
    verify,
)
from zkinfer.proving import groth
from zkinfer.proving.transcript import (
    DOMAIN_TAG,
    Transcript,
    expand_challenges,
    fiat_shamir,
    initial_accumulator,
)
from zkinfer.qap import r1cs_to_qap

from protocol_helpers import cubic, mock_check, random_input, tiny


# -- transcript ----------------------------------------------------------------------------

# frozen from a stand-alone hashlib computation (see test_transcript_matches_hashlib_oracle)
A0 = 0xF89E098F3A6F7AA16E50721D7BA02C1F33323D73A890D851000489754246C86
A1 = 0x10DFCF3A9C3F44CE971EFCED1DFDE02E356A1D05E30B665D767BC27460E8EDE
E1 = 0x153E154818C3B08540E1A69C83C648DAF52D5486BC5C3EA3F1268D22A33E97A0


def test_transcript_frozen_vector():
    a0 = initial_accumulator(BN254_FR, b"example vk")
    a1 = fiat_shamir(BN254_FR, a0, bytes(range(32)))
    assert (a0, a1) == (A0, A1)
    assert expand_challenges(BN254_FR, a1, 2) == [A1, E1]


def test_transcript_matches_hashlib_oracle():
    p = BN254_FR.modulus
    pre = DOMAIN_TAG + struct.pack("<H", 1)
    acc = 12345
    elem = b"\xaa" * 32
    want = int.from_bytes(hashlib.sha256(pre + acc.to_bytes(32, "little") + elem).digest(), "little") % p
    assert fiat_shamir(BN254_FR, acc, elem) == want


def test_domain_separation():
    a = fiat_shamir(BN254_FR, 1, b"x")
    assert fiat_shamir(BN254_FR, 1, b"x", tag=b"other") != a
    assert initial_accumulator(BN254_FR, b"vk", tag=b"other") != initial_accumulator(BN254_FR, b"vk")
    assert expand_challenges(BN254_FR, 5, 3)[1:] != expand_challenges(BN254_FR, 5, 3, tag=b"other")[1:]


def test_transcript_counts_hashes():
    t = Transcript(BN254_FR, 9)
    t.absorb(b"a", 1)
    t.absorb(b"b", 3)
    assert t.hashes == 2


def test_vk_tag_changes_challenges(mock):
    circ = tiny()
    rnd = random.Random(1)
    _, vk1, td = setup(circ, mock, rng=rnd, keep_trapdoor=True)
    _, vk2, _ = setup(circ, mock, trapdoor=td, tag=b"another/tag")
    assert vk1.a0 != vk2.a0


# -- completeness ----------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["cubic", "tiny16", "tiny"])
def test_completeness_mock(mock, name):
    circ = {"cubic": cubic, "tiny16": lambda: tiny("groth16"), "tiny": tiny}[name]()
    rnd = random.Random(7)
    pk, vk, _ = setup(circ, mock, rng=rnd)
    for _ in range(5):
        proof, st = prove(pk, circ, random_input(circ, rnd), rng=rnd)
        v = verify(vk, st, proof)
        assert v, v.reason
        assert v.pairings == 3 + vk.rounds
        assert v.hashes == vk.rounds
        assert verify(vk, st.outputs, proof)


@pytest.mark.parametrize("name", ["cubic", "tiny"])
def test_completeness_bn254(bn254, name):
    circ = {"cubic": cubic, "tiny": tiny}[name]()
    rnd = random.Random(3)
    pk, vk, _ = setup(circ, bn254, rng=rnd)
    proof, st = prove(pk, circ, random_input(circ, rnd), rng=rnd)
    v = verify(vk, st, proof)
    assert v and v.pairings == 3 + vk.rounds
    assert proof.shape() == {"G1": 2 + vk.rounds, "G2": 1}


def test_classic_verifier_on_bn254(bn254):
    # d = 0: check e(A, B) = e(alpha, beta) e(IC, gamma) e(C, delta) with separate py_ecc pairings
    from py_ecc import optimized_bn128 as bn

    circ = cubic()
    rnd = random.Random(5)
    pk, vk, _ = setup(circ, bn254, rng=rnd)
    proof, st = prove(pk, circ, [4, 6], rng=rnd)
    ic = bn.Z1
    for coeff, g in zip([1, *st.outputs], vk.ic):
        ic = bn.add(ic, bn.multiply(g, coeff))
    lhs = bn.pairing(proof.pi_b, proof.pi_a)
    rhs = vk.alpha_beta * bn.pairing(vk.gamma_g2, ic) * bn.pairing(vk.delta_g2[0], proof.pi_c[0])
    assert lhs == rhs
    bad = bn.add(proof.pi_c[0], bn.G1)
    assert bn.pairing(proof.pi_b, proof.pi_a) != vk.alpha_beta * bn.pairing(vk.gamma_g2, ic) * bn.pairing(
        vk.delta_g2[0], bad)


# -- key material against independent oracles ---------------------------------------------


def _trapdoor(d, seed=11):
    r = random.Random(seed)
    p = BN254_FR.modulus
    return Trapdoor(r.randrange(1, p), r.randrange(1, p), r.randrange(1, p),
                    tuple(r.randrange(1, p) for _ in range(d + 1)), r.randrange(1, p))


@pytest.mark.parametrize("mode", ["groth16", "ultragroth"])
def test_key_exponents_match_column_polynomials(mock, mode):
    circ = tiny(mode)
    cs = circ.cs
    td = _trapdoor(cs.layout.rounds)
    pk, vk, _ = setup(circ, mock, trapdoor=td)
    p = BN254_FR.modulus
    qap = r1cs_to_qap(cs)
    # zeta from interpolated column polynomials, not from the Lagrange-basis shortcut
    zeta = [
        (td.beta * qap.column_polynomial("l", i)(td.tau) + td.alpha * qap.column_polynomial("r", i)(td.tau)
         + qap.column_polynomial("o", i)(td.tau)) % p
        for i in range(qap.num_variables)
    ]
    lay = cs.layout
    g_inv = pow(td.gamma, -1, p)
    assert [g.exp for g in vk.ic] == [zeta[j] * g_inv % p for j in lay.statement_range]
    for i in range(lay.rounds + 1):
        d_inv = pow(td.deltas[i], -1, p)
        assert [g.exp for g in pk.rounds[i]] == [zeta[j] * d_inv % p for j in lay.round_range(i)]
    t = qap.vanishing()(td.tau)
    d_inv = pow(td.deltas[-1], -1, p)
    assert [g.exp for g in pk.h_query] == [pow(td.tau, k, p) * t * d_inv % p for k in range(qap.m - 1)]
    assert vk.alpha_beta.exp == td.alpha * td.beta % p


@pytest.mark.parametrize("mode", ["groth16", "ultragroth"])
def test_key_sizes(mock, mode):
    circ = tiny(mode)
    lay = circ.cs.layout
    pk, vk, _ = setup(circ, mock, rng=random.Random(2))
    ell = lay.num_public + sum(lay.challenge_sizes)
    assert len(vk.ic) == ell + 1
    assert [len(b) for b in pk.rounds] == list(lay.round_sizes)
    assert len(vk.delta_g2) == len(pk.delta_g1) == lay.rounds + 1
    m = r1cs_to_qap(circ.cs).m
    assert len(pk.tau_g1) == len(pk.tau_g2) == m
    assert len(pk.h_query) == m - 1


def test_prover_exponents_cancel(mock):
    circ = tiny()
    d = circ.cs.layout.rounds
    td = _trapdoor(d, 4)
    pk, vk, _ = setup(circ, mock, trapdoor=td)
    rnd = random.Random(8)
    proof, st, tr = prove(pk, circ, [0.3, -1.2], rng=rnd, trace=True)
    p = BN254_FR.modulus
    qap = r1cs_to_qap(circ.cs)
    l, r, _ = qap.column_evals_at(td.tau)
    z = tr.assignment
    a_tau = sum(x * y for x, y in zip(l, z)) % p
    b_tau = sum(x * y for x, y in zip(r, z)) % p
    assert proof.pi_a.exp == (td.alpha + a_tau + tr.r * td.deltas[d]) % p
    assert proof.pi_b.exp == (td.beta + b_tau + tr.s * td.deltas[d]) % p
    zeta = groth.zeta_at(qap, td.alpha, td.beta, td.tau)
    for i in range(d):
        block = sum(zeta[j] * z[j] for j in circ.cs.layout.round_range(i))
        want = (block * pow(td.deltas[i], -1, p) + tr.round_blinders[i] * td.deltas[d]) % p
        assert proof.pi_c[i].exp == want
    assert mock_check(vk, td, st.outputs, st.challenges, proof)


def test_simulator_formula_and_acceptance(mock):
    circ = tiny()
    d = circ.cs.layout.rounds
    td = _trapdoor(d, 6)
    _, vk, _ = setup(circ, mock, trapdoor=td)
    p = BN254_FR.modulus
    outs = [5, p - 3]
    proof, st, tr = simulate(vk, td, outs, rng=random.Random(1), trace=True)
    assert verify(vk, st, proof)
    coeffs = [1, *outs, *(v for rnd in tr.challenges for v in rnd)]
    ic = sum(c * g.exp for c, g in zip(coeffs, vk.ic)) % p
    num = tr.a * tr.b - td.alpha * td.beta - sum(c * dl for c, dl in zip(tr.c, td.deltas)) - td.gamma * ic
    assert proof.pi_c[-1].exp == num * pow(td.deltas[d], -1, p) % p


def test_simulated_and_real_proofs_look_alike(mock):
    circ = tiny()
    rnd = random.Random(2024)
    pk, vk, td = setup(circ, mock, rng=rnd, keep_trapdoor=True)
    p = BN254_FR.modulus
    real, fake = {"a": [], "c0": []}, {"a": [], "c0": []}
    for _ in range(150):
        proof, st = prove(pk, circ, random_input(circ, rnd), rng=rnd)
        real["a"].append(proof.pi_a.exp / p)
        real["c0"].append(proof.pi_c[0].exp / p)
        sp, _ = simulate(vk, td, st.outputs, rng=rnd)
        fake["a"].append(sp.pi_a.exp / p)
        fake["c0"].append(sp.pi_c[0].exp / p)
    for key in ("a", "c0"):
        assert stats.ks_2samp(real[key], fake[key]).pvalue > 1e-3
        assert stats.kstest(real[key], "uniform").pvalue > 1e-3


def test_two_proofs_differ(mock):
    circ = tiny()
    rnd = random.Random(3)
    pk, vk, _ = setup(circ, mock, rng=rnd)
    a, _ = prove(pk, circ, [0.1, 0.2], rng=rnd)
    b, _ = prove(pk, circ, [0.1, 0.2], rng=rnd)
    assert a.to_bytes() != b.to_bytes()


# -- soundness-side rejections ------------------------------------------------------------


def _perturbed(proof, engine, what, k=0):
    g1, g2 = engine.g1, engine.g2
    cs = list(proof.pi_c)
    a, b = proof.pi_a, proof.pi_b
    if what == "a":
        a = g1.add(a, g1.generator())
    elif what == "b":
        b = g2.add(b, g2.generator())
    else:
        cs[k] = g1.add(cs[k], g1.generator())
    return Proof(proof.engine, proof.digest, a, b, cs)


@pytest.mark.parametrize("engine_name", ["mock", "bn254"])
def test_single_perturbations_rejected(engine_name):
    engine = get_engine(engine_name)
    circ = tiny()
    rnd = random.Random(12)
    pk, vk, _ = setup(circ, engine, rng=rnd)
    proof, st = prove(pk, circ, [1.0, -0.5], rng=rnd)
    assert verify(vk, st, proof)
    targets = [("a", 0), ("b", 0)] + [("c", i) for i in range(len(proof.pi_c))]
    if engine_name == "bn254":
        targets = targets[:1] + targets[-1:]
    p = engine.scalar_field.modulus
    for what, k in targets:
        v = verify(vk, st.outputs, _perturbed(proof, engine, what, k))
        assert not v and v.reason == "pairing", (what, k)
    for j in range(len(st.outputs)):
        outs = list(st.outputs)
        outs[j] = (outs[j] + 1) % p
        v = verify(vk, outs, proof)
        assert not v and v.reason == "pairing"


def test_fiat_shamir_rejection(mock):
    circ = tiny()
    rnd = random.Random(13)
    pk, vk, _ = setup(circ, mock, rng=rnd)
    proof, st = prove(pk, circ, [1.0, -0.5], rng=rnd)
    bad = _perturbed(proof, mock, "c", 0)
    v = verify(vk, st, bad)
    assert not v and v.reason == "fiat-shamir"


def test_structural_rejections(mock):
    circ = tiny()
    rnd = random.Random(14)
    pk, vk, _ = setup(circ, mock, rng=rnd)
    proof, st = prove(pk, circ, [0.0, 0.5], rng=rnd)
    other = Proof(proof.engine, b"\x00" * 32, proof.pi_a, proof.pi_b, proof.pi_c)
    assert verify(vk, st, other).reason == "digest"
    short = Proof(proof.engine, proof.digest, proof.pi_a, proof.pi_b, proof.pi_c[:-1])
    assert verify(vk, st, short).reason == "shape"
    assert verify(vk, st.outputs[:-1], proof).reason == "public-input"
    assert verify(vk, [BN254_FR.modulus] + st.outputs[1:], proof).reason == "public-input"
    foreign = get_engine("bn254")
    fp = Proof(foreign, proof.digest, foreign.g1.generator(), foreign.g2.generator(), [foreign.g1.generator()] * 2)
    assert verify(vk, st, fp).reason == "engine"


def test_wrong_vk_digest_rejected(mock):
    circ = tiny()
    rnd = random.Random(15)
    pk, vk, _ = setup(circ, mock, rng=rnd)
    proof, st = prove(pk, circ, [0.0, 0.5], rng=rnd)
    vk.__dict__.pop("a0", None)
    forged = VerifyingKey.from_bytes(vk.to_bytes())
    forged.digest = bytes(32)
    assert verify(forged, st, proof).reason == "digest"


def test_stale_key_and_bad_public(mock):
    rnd = random.Random(16)
    pk, _, _ = setup(cubic(), mock, rng=rnd)
    with pytest.raises(ProvingError, match="stale"):
        prove(pk, tiny(), [0.1, 0.1], rng=rnd)
    with pytest.raises(ProvingError, match="public"):
        prove(pk, cubic(), [2, 3], public=[1], rng=rnd)


def test_challenge_collision_retries(mock, monkeypatch):
    circ = tiny()
    rnd = random.Random(17)
    pk, vk, _ = setup(circ, mock, rng=rnd)
    first = {"hit": False}
    real = groth.Transcript

    class PoleOnce(real):
        def absorb(self, element, count):
            vals = super().absorb(element, count)
            if not first["hit"]:
                first["hit"] = True
                return [0] * count  # alpha = 0 is the pole of table entry 0
            return vals

    monkeypatch.setattr(groth, "Transcript", PoleOnce)
    proof, st, tr = prove(pk, circ, [0.4, 0.4], rng=rnd, trace=True)
    assert tr.attempts == 2
    monkeypatch.setattr(groth, "Transcript", real)
    assert verify(vk, st, proof)


# -- serialization ----------------------------------------------------------------------------


@pytest.mark.parametrize("engine_name", ["mock", "bn254"])
def test_serialization_roundtrip(engine_name):
    engine = get_engine(engine_name)
    circ = tiny()
    rnd = random.Random(18)
    pk, vk, td = setup(circ, engine, rng=rnd, keep_trapdoor=True)
    proof, st = prove(pk, circ, [0.2, 0.9], rng=rnd)
    pk2 = ProvingKey.from_bytes(pk.to_bytes())
    vk2 = VerifyingKey.from_bytes(vk.to_bytes())
    pr2 = Proof.from_bytes(proof.to_bytes())
    assert pk2.to_bytes() == pk.to_bytes()
    assert vk2.to_bytes() == vk.to_bytes()
    assert pr2.to_bytes() == proof.to_bytes()
    assert Proof.from_json(proof.to_json()).to_bytes() == proof.to_bytes()
    st2 = Statement.from_json(st.to_json())
    assert st2.outputs == st.outputs
    assert verify(vk2, st2, pr2)
    assert Trapdoor.from_json(td.to_json()) == td
    if engine_name == "bn254":
        assert len(proof.to_bytes()) == 4 + 2 + 1 + 5 + 32 + 32 + 64 + 4 + 32 * len(proof.pi_c)


def test_bad_bytes(mock):
    circ = cubic()
    pk, vk, _ = setup(circ, mock, rng=random.Random(19))
    proof, _ = prove(pk, circ, [1, 2], rng=random.Random(20))
    raw = proof.to_bytes()
    for bad in (raw[:-1], raw + b"\x00", b"XXXX" + raw[4:], raw[:4] + b"\x09\x00" + raw[6:]):
        with pytest.raises(KeyFormatError):
            Proof.from_bytes(bad)
    with pytest.raises(KeyFormatError):
        VerifyingKey.from_bytes(pk.to_bytes())
    with pytest.raises(KeyFormatError):
        ProvingKey.from_bytes(vk.to_bytes())
    with pytest.raises(KeyFormatError):
        Proof.from_json("{}")
    with pytest.raises(KeyFormatError):
        Statement.from_json('{"outputs": [1]}')


def test_bn254_rejects_off_curve_encoding(bn254):
    circ = cubic_circuit()
    pk, vk, _ = setup(circ, bn254, rng=random.Random(21))
    proof, _ = prove(pk, circ, [1, 2], rng=random.Random(22))
    raw = bytearray(proof.to_bytes())
    start = 4 + 2 + 1 + len("bn254") + 32
    for x in range(256):
        raw[start] = x
        try:
            Proof.from_bytes(bytes(raw))
        except KeyFormatError:
            return
    pytest.fail("no off-curve x found")
