import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zkinfer.algebra.field import BN254_FR, F9967, TEST_FIELD
from zkinfer.quantize import (
    QuantizationError,
    QuantizedTensor,
    addition_error_bound,
    dequantize,
    from_signed,
    multiplication_error_bound,
    precision_cut,
    q_add,
    q_mul,
    quantize,
    quantize_array,
    quantize_int,
    round_half_away,
)


def test_golden_vector_f9967():
    x = quantize(0.2, 5, F9967)
    y = quantize(-0.3, 5, F9967)
    assert int(x) == 6 and int(y) == 9957
    z = q_mul(x, y)
    assert int(z) == 9907 and z.precision == 10
    assert dequantize(z) == Fraction(-60, 1024)


def test_round_half_away():
    assert round_half_away(Fraction(13, 2)) == 7
    assert round_half_away(Fraction(-19, 2)) == -10
    assert round_half_away(Fraction(-1, 3)) == 0
    assert quantize_int(0.5, 0) == 1 and quantize_int(-0.5, 0) == -1


def test_non_finite_rejected():
    for bad in (float("nan"), float("inf"), -float("inf")):
        with pytest.raises(QuantizationError):
            quantize(bad, 8, BN254_FR)


def test_overflow_and_budget():
    with pytest.raises(QuantizationError):
        quantize(1e6, 8, F9967)
    with pytest.raises(QuantizationError):
        quantize(0.1, 13, F9967)
    a = quantize(0.5, 6, F9967)
    with pytest.raises(QuantizationError):
        q_mul(a, q_mul(a, a))


def test_add_requires_equal_precision():
    a, b = quantize(0.5, 8, BN254_FR), quantize(0.25, 9, BN254_FR)
    with pytest.raises(QuantizationError):
        q_add(a, b)
    with pytest.raises(QuantizationError):
        q_add(quantize(1, 4, TEST_FIELD), quantize(1, 4, F9967))


@given(st.integers(-(2**40), 2**40), st.integers(1, 20), st.integers(21, 40))
def test_precision_cut_is_floor(z, bits, precision):
    v = from_signed(z, precision, BN254_FR)
    c = precision_cut(v, bits)
    assert c.signed == z // 2**bits and c.precision == precision - bits
    # the cut value never exceeds the original and is within one new ulp
    assert Fraction(0) <= dequantize(v) - dequantize(c) < Fraction(1, 2 ** c.precision)


def test_precision_cut_bounds():
    v = from_signed(100, 8, BN254_FR)
    for bad in (0, 8, 9, -1):
        with pytest.raises(QuantizationError):
            precision_cut(v, bad)


@pytest.mark.parametrize("rho", [8, 16, 24])
def test_error_bounds_random(rho):
    r = random.Random(rho)
    for _ in range(500):
        x, y = r.uniform(-100, 100), r.uniform(-100, 100)
        X, Y = quantize(x, rho, BN254_FR), quantize(y, rho, BN254_FR)
        fx, fy = Fraction(x), Fraction(y)
        assert abs(dequantize(q_mul(X, Y)) - fx * fy) <= multiplication_error_bound(x, y, rho)
        assert abs(dequantize(q_add(X, Y)) - (fx + fy)) <= addition_error_bound(rho)


@given(st.floats(-1e3, 1e3), st.integers(1, 40))
def test_quantization_error_half_ulp(x, rho):
    v = quantize(x, rho, BN254_FR)
    assert abs(dequantize(v) - Fraction(x)) <= Fraction(1, 2 ** (rho + 1))


def test_quantize_array_matches_scalar():
    arr = np.array([[0.5, -0.5], [1.26, -3.999]])
    q = quantize_array(arr, 4)
    assert q.dtype == object
    assert q.tolist() == [[quantize_int(v, 4) for v in row] for row in arr]


def test_tensor():
    t = QuantizedTensor.from_array(np.array([[0.25, -1.0]]), 8, TEST_FIELD)
    assert t.shape == (1, 2) and t.precision == 8
    assert t.signed().tolist() == [[64, -256]]
    assert t.dequantize().tolist() == [[0.25, -1.0]]
    with pytest.raises(QuantizationError):
        QuantizedTensor((3,), [quantize(1, 8, TEST_FIELD)])
    with pytest.raises(QuantizationError):
        QuantizedTensor((2,), [quantize(1, 8, TEST_FIELD), quantize(1, 9, TEST_FIELD)])
