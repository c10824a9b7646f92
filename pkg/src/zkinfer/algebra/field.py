"""Prime fields and their elements.

Hot paths in this package work on plain ``int`` residues; :class:`FieldElement`
is the ergonomic wrapper used at API boundaries.
"""
from __future__ import annotations

import math
import random
from functools import cached_property
from typing import Iterable, Sequence

from sympy import isprime
from sympy.ntheory import factorint


class PrimeField:
    """The field F_p for an odd prime p."""

    def __init__(self, modulus: int, *, name: str | None = None):
        if modulus < 3 or modulus % 2 == 0 or not isprime(modulus):
            raise ValueError(f"modulus {modulus} is not an odd prime")
        self.modulus = modulus
        self.name = name or f"F_{modulus}"
        self.bit_size = modulus.bit_length()
        self.byte_size = (self.bit_size + 7) // 8
        m = modulus - 1
        self.two_adicity = (m & -m).bit_length() - 1
        nonresidue = 2
        while pow(nonresidue, m // 2, modulus) != m:
            nonresidue += 1
        # generator of the multiplicative subgroup of order 2^two_adicity
        self.two_adic_root = pow(nonresidue, m >> self.two_adicity, modulus)

    def __repr__(self) -> str:
        return f"PrimeField({self.name})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.modulus == self.modulus

    def __hash__(self) -> int:
        return hash(("PrimeField", self.modulus))

    def __call__(self, value) -> FieldElement:
        return FieldElement(int(value), self)

    # -- signed representation -------------------------------------------------

    @property
    def sign_threshold(self) -> int:
        """Residues at or above 2^(b-1) represent negative integers."""
        return 1 << (self.bit_size - 1)

    @property
    def signed_min(self) -> int:
        return self.sign_threshold - self.modulus

    @property
    def signed_max(self) -> int:
        return self.sign_threshold - 1

    @cached_property
    def safe_signed_bits(self) -> int:
        """Largest k such that every |x| < 2^k survives an encode/decode roundtrip."""
        return min(-self.signed_min, self.sign_threshold).bit_length() - 1

    def signed_encode(self, x: int) -> int:
        x = int(x)
        if not self.signed_min <= x <= self.signed_max:
            raise OverflowError(
                f"{x} outside the signed range [{self.signed_min}, {self.signed_max}] of {self.name}"
            )
        return x % self.modulus

    def signed_decode(self, residue: int) -> int:
        residue = int(residue) % self.modulus
        return residue if residue < self.sign_threshold else residue - self.modulus

    # -- arithmetic on residues --------------------------------------------------

    def inv(self, a: int) -> int:
        a %= self.modulus
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.modulus)

    def batch_invert(self, values: Sequence[int]) -> list[int]:
        """Invert every value with a single field inversion (Montgomery's trick)."""
        p = self.modulus
        vals = [int(v) % p for v in values]
        prefix = []
        acc = 1
        for i, v in enumerate(vals):
            if v == 0:
                raise ZeroDivisionError(f"batch_invert: value at index {i} is zero")
            prefix.append(acc)
            acc = acc * v % p
        inv = pow(acc, -1, p) if vals else 1
        out = [0] * len(vals)
        for i in range(len(vals) - 1, -1, -1):
            out[i] = inv * prefix[i] % p
            inv = inv * vals[i] % p
        return out

    def random(self, rng: random.Random | None = None, *, nonzero: bool = False) -> int:
        rng = rng or random.SystemRandom()
        low = 1 if nonzero else 0
        return rng.randrange(low, self.modulus)

    # -- roots of unity -----------------------------------------------------------

    @cached_property
    def _group_factors(self) -> dict[int, int]:
        known = _KNOWN_FACTORS.get(self.modulus)
        if known is not None:
            return known
        return {int(q): e for q, e in factorint(self.modulus - 1).items()}

    @cached_property
    def multiplicative_generator(self) -> int:
        m = self.modulus - 1
        g = 2
        while any(pow(g, m // q, self.modulus) == 1 for q in self._group_factors):
            g += 1
        return g

    def root_of_unity(self, order: int) -> int:
        """A primitive ``order``-th root of unity."""
        if order < 1 or (self.modulus - 1) % order:
            raise ValueError(f"{self.name} has no subgroup of order {order}")
        if order & (order - 1) == 0:
            k = order.bit_length() - 1
            return pow(self.two_adic_root, 1 << (self.two_adicity - k), self.modulus)
        return pow(self.multiplicative_generator, (self.modulus - 1) // order, self.modulus)

    # -- serialization ------------------------------------------------------------

    def to_bytes(self, a: int) -> bytes:
        return (int(a) % self.modulus).to_bytes(self.byte_size, "little")

    def from_bytes(self, data: bytes) -> int:
        if len(data) != self.byte_size:
            raise ValueError(f"expected {self.byte_size} bytes, got {len(data)}")
        v = int.from_bytes(data, "little")
        if v >= self.modulus:
            raise ValueError("non-canonical field element encoding")
        return v


class FieldElement:
    """A canonical residue in [0, p)."""

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: PrimeField):
        self.field = field
        self.value = value % field.modulus

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise TypeError("mixing elements of different fields")
            return other.value
        return int(other)

    def __add__(self, other):
        return FieldElement(self.value + self._coerce(other), self.field)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.value - self._coerce(other), self.field)

    def __rsub__(self, other):
        return FieldElement(self._coerce(other) - self.value, self.field)

    def __mul__(self, other):
        return FieldElement(self.value * self._coerce(other), self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElement(self.value * self.field.inv(self._coerce(other)), self.field)

    def __rtruediv__(self, other):
        return FieldElement(self._coerce(other) * self.field.inv(self.value), self.field)

    def __pow__(self, exponent: int):
        return FieldElement(pow(self.value, exponent, self.field.modulus), self.field)

    def __neg__(self):
        return FieldElement(-self.value, self.field)

    def inverse(self) -> FieldElement:
        return FieldElement(self.field.inv(self.value), self.field)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.modulus
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.field.modulus))

    def __int__(self) -> int:
        return self.value

    __index__ = __int__

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.modulus})"

    def to_bytes(self) -> bytes:
        return self.field.to_bytes(self.value)

    @property
    def signed(self) -> int:
        return self.field.signed_decode(self.value)


def batch_invert(values: Iterable[FieldElement]) -> list[FieldElement]:
    values = list(values)
    if not values:
        return []
    field = values[0].field
    return [FieldElement(v, field) for v in field.batch_invert([x.value for x in values])]


def signed_encode(field: PrimeField, x: int) -> FieldElement:
    return FieldElement(field.signed_encode(x), field)


def signed_decode(x: FieldElement) -> int:
    return x.field.signed_decode(x.value)


BN254_SCALAR_MODULUS = 21888242871839275222246405745257275088548364400416034343698204186575808495617

# factoring r - 1 for BN254 takes seconds with a general-purpose factorizer
_KNOWN_FACTORS: dict[int, dict[int, int]] = {
    BN254_SCALAR_MODULUS: {
        2: 28, 3: 2, 13: 1, 29: 1, 983: 1, 11003: 1, 237073: 1, 405928799: 1,
        1670836401704629: 1, 13818364434197438864469338081: 1,
    },
}
assert math.prod(q ** e for q, e in _KNOWN_FACTORS[BN254_SCALAR_MODULUS].items()) == BN254_SCALAR_MODULUS - 1

BN254_FR = PrimeField(BN254_SCALAR_MODULUS, name="bn254-fr")
# 3 * 2^18 + 1: small, highly 2-adic field for exhaustive tests
TEST_FIELD = PrimeField(786433, name="F_786433")
# the small field used in the quantization worked example (two-adicity 1)
F9967 = PrimeField(9967, name="F_9967")
