import numpy as np
import pytest
from hypothesis import given, strategies as st

from zkinfer.algebra.field import (
    BN254_FR,
    BN254_SCALAR_MODULUS,
    F9967,
    TEST_FIELD,
    FieldElement,
    PrimeField,
    batch_invert,
    signed_decode,
    signed_encode,
)

FIELDS = [TEST_FIELD, BN254_FR, F9967]


def elems(field):
    return st.integers(min_value=0, max_value=field.modulus - 1).map(field)


@pytest.mark.parametrize("field", FIELDS, ids=lambda f: f.name)
def test_axioms(field):
    @given(elems(field), elems(field), elems(field))
    def check(a, b, c):
        assert a + b == b + a
        assert a * b == b * a
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a + field(0) == a
        assert a * field(1) == a
        assert a - a == field(0)
        if int(a):
            assert a * a.inverse() == field(1)
            assert (b / a) * a == b

    check()


def test_bn254_constants():
    assert BN254_FR.modulus == BN254_SCALAR_MODULUS
    assert BN254_FR.bit_size == 254
    assert BN254_FR.two_adicity == 28
    assert BN254_FR.multiplicative_generator == 5
    assert TEST_FIELD.modulus == 3 * 2**18 + 1 and TEST_FIELD.two_adicity == 18


def test_rejects_composite():
    with pytest.raises(ValueError):
        PrimeField(9965)


@given(st.lists(st.integers(min_value=1, max_value=TEST_FIELD.modulus - 1), max_size=40))
def test_batch_invert_matches_pow(vals):
    p = TEST_FIELD.modulus
    assert TEST_FIELD.batch_invert(vals) == [pow(v, -1, p) for v in vals]


def test_batch_invert_zero_names_index():
    with pytest.raises(ZeroDivisionError, match="2"):
        TEST_FIELD.batch_invert([3, 4, 0, 5])


def test_batch_invert_elements():
    xs = [TEST_FIELD(v) for v in (2, 3, 7)]
    assert [x * y for x, y in zip(xs, batch_invert(xs))] == [TEST_FIELD(1)] * 3


def test_signed_roundtrip_exhaustive_test_field():
    # every integer in the representable range, vectorized
    f = TEST_FIELD
    xs = np.arange(f.signed_min, f.signed_max + 1, dtype=np.int64)
    assert len(xs) == f.modulus
    enc = xs % f.modulus
    dec = np.where(enc < f.sign_threshold, enc, enc - f.modulus)
    assert np.array_equal(dec, xs)
    for x in (f.signed_min, -1, 0, 1, f.signed_max):
        assert f.signed_decode(f.signed_encode(x)) == x


@pytest.mark.parametrize("field", FIELDS, ids=lambda f: f.name)
def test_signed_range_edges(field):
    with pytest.raises(OverflowError):
        field.signed_encode(field.signed_max + 1)
    with pytest.raises(OverflowError):
        field.signed_encode(field.signed_min - 1)
    k = field.safe_signed_bits
    for x in (-(2**k) + 1, 2**k - 1):
        assert field.signed_decode(field.signed_encode(x)) == x


def test_signed_module_helpers():
    v = signed_encode(F9967, -60)
    assert isinstance(v, FieldElement) and int(v) == 9907
    assert signed_decode(v) == -60 and v.signed == -60


@pytest.mark.parametrize("field", [TEST_FIELD, BN254_FR], ids=lambda f: f.name)
def test_roots_of_unity(field):
    for k in (1, 2, 8, 1 << min(field.two_adicity, 12)):
        w = field.root_of_unity(k)
        assert pow(w, k, field.modulus) == 1
        if k > 1:
            assert pow(w, k // 2, field.modulus) != 1
    with pytest.raises(ValueError):
        field.root_of_unity(1 << (field.two_adicity + 1))


@given(st.integers(min_value=0, max_value=BN254_FR.modulus - 1))
def test_bytes_roundtrip(a):
    b = BN254_FR.to_bytes(a)
    assert len(b) == 32 and BN254_FR.from_bytes(b) == a


def test_from_bytes_rejects_noncanonical():
    with pytest.raises(ValueError):
        BN254_FR.from_bytes(BN254_FR.modulus.to_bytes(32, "little"))
