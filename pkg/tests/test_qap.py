import random

import pytest
from hypothesis import given, settings, strategies as st

from zkinfer.algebra.field import BN254_FR, F9967, TEST_FIELD
from zkinfer.algebra.poly import Polynomial
from zkinfer.circuit import CircuitBuilder
from zkinfer.layers.fixtures import cubic_circuit
from zkinfer.qap import QapError, r1cs_to_qap
from zkinfer.r1cs import LinearCombination as LC


# z = (1, x1, x2, t1, t2, t3, y)
CUBIC_L = [[0, 1, 0, 0, 0, 0, 0], [0, 0, 0, 1, 0, 0, 0], [0, 0, 1, 0, 0, 0, 0], [0, 0, 0, 0, 1, 1, 0]]
CUBIC_R = [[0, 1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0, 0], [1, 0, 0, 0, 0, 0, 0]]
CUBIC_O = [[0, 0, 0, 1, 0, 0, 0], [0, 0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 0, 1, 0], [0, 0, 0, 0, 0, 0, 1]]


def _long_division_h(field, qap, z):
    # schoolbook oracle built from the dense matrices and Lagrange interpolation over the domain
    p = field.modulus
    L, R, O = qap.cs.dense_matrices()
    pts = qap.domain.elements()
    from zkinfer.algebra.poly import lagrange_interpolate

    def poly(mat):
        vals = [sum(c * v for c, v in zip(row, z)) % p for row in mat] + [0] * (qap.m - len(mat))
        return lagrange_interpolate(field, pts, vals)

    num = poly(L) * poly(R) - poly(O)
    # divide by X^m - 1 by hand
    coeffs = list(num.coeffs) + [0] * (2 * qap.m)
    m = qap.m
    q = [0] * max(len(num.coeffs) - m, 0)
    for k in range(len(num.coeffs) - 1, m - 1, -1):
        c = coeffs[k] % p
        if c:
            q[k - m] = c
            coeffs[k] = 0
            coeffs[k - m] = (coeffs[k - m] + c) % p
    assert all(c % p == 0 for c in coeffs[:m])
    return Polynomial(field, q)


def _random_chain(field, n, seed):
    """A chain of n products with random linear mixing; returns (builder, inputs)."""
    rnd = random.Random(seed)
    b = CircuitBuilder(field)
    x = b.public()
    b.input_wires = [x]
    prev = [x]
    wires = []
    for _ in range(n):
        a, c = rnd.choice(prev), rnd.choice(prev)
        k = rnd.randrange(1, 50)
        out = b.private()
        b.enforce(LC.wire(a) * k + 1, LC.wire(c), LC.wire(out))
        wires.append((a, c, k, out))
        prev.append(out)

    def fill(ctx):
        for a, c, k, out in wires:
            ctx[out] = (ctx[a] * k + 1) * ctx[c]

    b.step(fill)
    b.cs.finalize()
    return b, [rnd.randrange(field.modulus)]


def test_cubic_matrices_frozen():
    b = cubic_circuit()
    assert b.cs.dense_matrices() == (CUBIC_L, CUBIC_R, CUBIC_O)


@pytest.mark.parametrize("field", [BN254_FR, TEST_FIELD, F9967], ids=lambda f: f.name)
def test_columns_reproduce_rows(field):
    b = cubic_circuit(field)
    qap = r1cs_to_qap(b.cs)
    for name, mat in zip("lro", (CUBIC_L, CUBIC_R, CUBIC_O)):
        for i in range(qap.num_variables):
            poly = qap.column_polynomial(name, i)
            for j in range(qap.m):
                want = mat[j][i] if j < len(mat) else 0
                assert poly(qap.domain.element(j)) == want


def test_vanishing_is_zero_on_domain():
    qap = r1cs_to_qap(cubic_circuit().cs)
    for w in qap.domain.elements():
        assert qap.vanishing()(w) == 0
        assert qap.t_at(w) == 0
    assert qap.t_at(3) != 0


def test_column_evals_match_polynomials():
    qap = r1cs_to_qap(cubic_circuit().cs)
    x = 123456789
    l, r, o = qap.column_evals_at(x)
    for i in range(qap.num_variables):
        assert l[i] == qap.column_polynomial("l", i)(x)
        assert r[i] == qap.column_polynomial("r", i)(x)
        assert o[i] == qap.column_polynomial("o", i)(x)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 16), st.integers(0, 10**6))
def test_h_matches_long_division(n, seed):
    b, inputs = _random_chain(TEST_FIELD, n, seed)
    z = b.run_witness(inputs)
    qap = r1cs_to_qap(b.cs)
    assert qap.m <= 16
    assert qap.compute_h(z) == _long_division_h(TEST_FIELD, qap, z)


@pytest.mark.parametrize("field", [BN254_FR, TEST_FIELD], ids=lambda f: f.name)
def test_divisibility_identity_at_random_points(field):
    b, inputs = _random_chain(field, 11, 7)
    z = b.run_witness(inputs)
    qap = r1cs_to_qap(b.cs)
    h = qap.compute_h(z)
    p = field.modulus
    rnd = random.Random(99)
    for _ in range(100):
        tau = rnd.randrange(p)
        l, r, o = qap.column_evals_at(tau)
        A = sum(a * v for a, v in zip(l, z)) % p
        B = sum(a * v for a, v in zip(r, z)) % p
        C = sum(a * v for a, v in zip(o, z)) % p
        assert (A * B - C) % p == h(tau) * qap.t_at(tau) % p


def test_corrupted_assignment_raises():
    b = cubic_circuit()
    z = b.run_witness([3, 5])
    qap = r1cs_to_qap(b.cs)
    qap.compute_h(z)
    z[-1] += 1
    with pytest.raises(QapError):
        qap.compute_h(z)


def test_linear_circuit_has_zero_h():
    # every left row is the constant wire and m equals the row count, so A = 1 and B = C
    b = CircuitBuilder(BN254_FR)
    x = b.public()
    y = b.private()
    b.input_wires = [x]
    b.enforce(1, LC.wire(x) * 3 + 4, LC.wire(y))
    b.enforce(1, LC.wire(y) - 4, LC.wire(x) * 3)
    b.step(lambda ctx: ctx.__setitem__(y, 3 * ctx[x] + 4))
    b.cs.finalize()
    z = b.run_witness([11])
    assert r1cs_to_qap(b.cs).compute_h(z).is_zero()


def test_unused_column_is_zero_polynomial():
    b = CircuitBuilder(BN254_FR)
    x, spare = b.public(), b.public()
    b.input_wires = [x, spare]
    b.enforce(LC.wire(x), LC.wire(x), LC.wire(x))
    b.cs.finalize()
    qap = r1cs_to_qap(b.cs)
    col = b.cs.index(spare)
    for name in "lro":
        assert qap.column_polynomial(name, col).is_zero()


def test_small_field_uses_subgroup_domain():
    b = cubic_circuit(F9967, combined=True)
    qap = r1cs_to_qap(b.cs)
    assert qap.m == 3 and not qap.domain.radix2
    z = b.run_witness([4, 9])
    h = qap.compute_h(z)
    assert h == _long_division_h(F9967, qap, z)
    four = r1cs_to_qap(cubic_circuit(F9967).cs)
    assert four.m == 6


def test_unfinalized_system_rejected():
    b = CircuitBuilder(BN254_FR)
    x = b.public()
    b.enforce(LC.wire(x), 1, LC.wire(x))
    with pytest.raises(QapError):
        r1cs_to_qap(b.cs)
