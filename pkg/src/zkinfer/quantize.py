"""Fixed-point encoding of reals into a prime field.

A real x at precision rho is stored as the signed integer round(2^rho * x) mapped into
F_p. Products add precisions, sums require equal precisions, and a precision cut is a
floor shift of the signed representative. Reference values are exact rationals.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor, prod
from numbers import Real
from typing import Iterable, Sequence

import numpy as np

from .algebra.field import FieldElement, PrimeField


class QuantizationError(ValueError):
    pass


def round_half_away(q: Fraction) -> int:
    """Nearest integer, ties away from zero: [6.5] = 7, [-9.5] = -10."""
    if q >= 0:
        return floor(q + Fraction(1, 2))
    return -floor(-q + Fraction(1, 2))


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    xf = float(x)
    if xf != xf or xf in (float("inf"), float("-inf")):
        raise QuantizationError(f"cannot quantize non-finite value {x!r}")
    return Fraction(xf)


def quantize_int(x, rho: int) -> int:
    """round(2^rho * x) as a plain integer (no field reduction)."""
    return round_half_away(to_fraction(x) * (1 << rho))


def floor_shift(z: int, bits: int) -> int:
    return z >> bits


@dataclass(frozen=True)
class QuantParams:
    rho: int
    field: PrimeField

    def __post_init__(self):
        if self.rho < 1:
            raise QuantizationError("precision must be at least 1 bit")
        if self.rho >= self.field.bit_size - 1:
            raise QuantizationError(
                f"precision {self.rho} leaves no room in a {self.field.bit_size}-bit field"
            )


@dataclass(frozen=True)
class QuantizedValue:
    value: FieldElement
    precision: int

    def __post_init__(self):
        if self.precision < 1:
            raise QuantizationError("effective precision must be at least 1")

    @property
    def field(self) -> PrimeField:
        return self.value.field

    @property
    def signed(self) -> int:
        return self.value.signed

    def __int__(self) -> int:
        return self.value.value

    def exact(self) -> Fraction:
        return dequantize(self)

    def __float__(self) -> float:
        return float(dequantize(self))


def _encode(field: PrimeField, z: int, what: str) -> FieldElement:
    try:
        return FieldElement(field.signed_encode(z), field)
    except OverflowError as exc:
        raise QuantizationError(f"{what} overflows the signed range of {field.name}: {exc}") from None


def quantize(x, rho: int, field: PrimeField) -> QuantizedValue:
    QuantParams(rho, field)
    return QuantizedValue(_encode(field, quantize_int(x, rho), f"quantize({x}, {rho})"), rho)


def from_signed(z: int, precision: int, field: PrimeField) -> QuantizedValue:
    return QuantizedValue(_encode(field, z, "value"), precision)


def dequantize(v: QuantizedValue) -> Fraction:
    return Fraction(v.signed, 1 << v.precision)


def q_mul(a: QuantizedValue, b: QuantizedValue) -> QuantizedValue:
    if a.field != b.field:
        raise QuantizationError("operands live in different fields")
    precision = a.precision + b.precision
    if precision >= a.field.bit_size - 1:
        raise QuantizationError(
            f"product precision {precision} exceeds the {a.field.bit_size}-bit field budget"
        )
    z = a.signed * b.signed
    _encode(a.field, z, "product")
    return QuantizedValue(a.value * b.value, precision)


def q_add(a: QuantizedValue, b: QuantizedValue) -> QuantizedValue:
    if a.field != b.field:
        raise QuantizationError("operands live in different fields")
    if a.precision != b.precision:
        raise QuantizationError(
            f"cannot add precisions {a.precision} and {b.precision}; cut one operand first"
        )
    _encode(a.field, a.signed + b.signed, "sum")
    return QuantizedValue(a.value + b.value, a.precision)


def precision_cut(v: QuantizedValue, bits: int) -> QuantizedValue:
    """Drop ``bits`` of precision: floor(Z(v) / 2^bits)."""
    if not 0 < bits < v.precision:
        raise QuantizationError(f"cut of {bits} bits invalid at precision {v.precision}")
    return from_signed(floor_shift(v.signed, bits), v.precision - bits, v.field)


class QuantizedTensor:
    """Field-encoded tensor with a single effective precision."""

    def __init__(self, shape: Sequence[int], values: Iterable[QuantizedValue]):
        values = list(values)
        shape = tuple(int(s) for s in shape)
        if len(values) != prod(shape):
            raise QuantizationError(f"{len(values)} values do not fill shape {shape}")
        precisions = {v.precision for v in values}
        if len(precisions) > 1:
            raise QuantizationError(f"mixed precisions {sorted(precisions)} in one tensor")
        self.shape = shape
        self.values = values
        self.precision = precisions.pop() if precisions else None

    @classmethod
    def from_array(cls, array, rho: int, field: PrimeField) -> QuantizedTensor:
        arr = np.asarray(array, dtype=float)
        return cls(arr.shape, (quantize(x, rho, field) for x in arr.ravel()))

    def signed(self) -> np.ndarray:
        return np.array([v.signed for v in self.values], dtype=object).reshape(self.shape)

    def dequantize(self) -> np.ndarray:
        return np.array([float(v) for v in self.values]).reshape(self.shape)

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return f"QuantizedTensor(shape={self.shape}, precision={self.precision})"


def quantize_array(x, rho: int) -> np.ndarray:
    """Vectorized round(2^rho x) with ties away from zero, as Python ints in an object array."""
    arr = np.asarray(x, dtype=float)
    out = np.empty(arr.shape, dtype=object)
    flat = out.reshape(-1)
    for i, v in enumerate(arr.ravel()):
        flat[i] = quantize_int(v, rho)
    return out


def multiplication_error_bound(x: Real, y: Real, rho: int) -> Fraction:
    """Worst-case |D_2rho(Q(x) Q(y)) - xy| for inputs quantized at rho."""
    beta = 2 * max(abs(to_fraction(x)), abs(to_fraction(y)))
    eps = Fraction(1, 1 << rho)
    return eps * beta + eps * eps


def addition_error_bound(rho: int) -> Fraction:
    return Fraction(2, 1 << rho)
