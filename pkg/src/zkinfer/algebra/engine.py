"""Bilinear groups behind one interface.

:class:`MockEngine` represents every group element by its discrete logarithm, so the
pairing is plain multiplication in the scalar field. It is insecure and exact, which makes
it the workhorse for protocol tests. :class:`BN254Engine` delegates curve arithmetic to
``py_ecc`` and is the real thing, only slow.
"""
from __future__ import annotations

import random
import threading
from typing import Any, Iterable, Sequence

from .field import BN254_FR, PrimeField
from .msm import msm as _msm_dispatch


class Group:
    """Additively written prime-order group; elements are opaque to callers."""

    name: str
    order: int
    byte_size: int

    def identity(self) -> Any:
        raise NotImplementedError

    def generator(self) -> Any:
        raise NotImplementedError

    def add(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def neg(self, a: Any) -> Any:
        raise NotImplementedError

    def mul(self, a: Any, k: int) -> Any:
        raise NotImplementedError

    def eq(self, a: Any, b: Any) -> bool:
        raise NotImplementedError

    def is_identity(self, a: Any) -> bool:
        return self.eq(a, self.identity())

    def sub(self, a: Any, b: Any) -> Any:
        return self.add(a, self.neg(b))

    def to_bytes(self, a: Any) -> bytes:
        raise NotImplementedError

    def from_bytes(self, data: bytes) -> Any:
        raise NotImplementedError

    def fast_msm(self, bases: Sequence[Any], scalars: Sequence[int]) -> Any | None:
        return None

    def msm(self, bases: Sequence[Any], scalars: Sequence[int]) -> Any:
        return _msm_dispatch(self, bases, scalars)

    def gen_mul(self, k: int) -> Any:
        return self.mul(self.generator(), k)

    def batch_gen_mul(self, scalars: Iterable[int]) -> list[Any]:
        return [self.gen_mul(k) for k in scalars]

    def random(self, rng: random.Random) -> Any:
        return self.gen_mul(rng.randrange(1, self.order))


class _Counters:
    def __init__(self):
        self._lock = threading.Lock()
        self.pairings = 0
        self.final_exponentiations = 0

    def bump(self, pairings: int, final_exps: int = 1) -> None:
        with self._lock:
            self.pairings += pairings
            self.final_exponentiations += final_exps

    def reset(self) -> None:
        with self._lock:
            self.pairings = 0
            self.final_exponentiations = 0


class BilinearEngine:
    """(G1, G2, GT, e) over a common scalar field."""

    engine_id: str
    scalar_field: PrimeField
    g1: Group
    g2: Group
    gt: Group

    def __init__(self):
        self.counters = _Counters()

    def _miller(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def _final_exp(self, f: Any) -> Any:
        raise NotImplementedError

    def _gt_mul(self, f: Any, g: Any) -> Any:
        raise NotImplementedError

    def _gt_one(self) -> Any:
        raise NotImplementedError

    def pairing(self, a: Any, b: Any) -> Any:
        return self.pairing_product([(a, b)])

    def pairing_product(self, pairs: Sequence[tuple[Any, Any]]) -> Any:
        """prod e(a_i, b_i), sharing one final exponentiation across the Miller loops."""
        self.counters.bump(len(pairs))
        f = self._gt_one()
        for a, b in pairs:
            f = self._gt_mul(f, self._miller(a, b))
        return self._final_exp(f)


# -- transparent backend ---------------------------------------------------------


class MockPoint:
    __slots__ = ("group", "exp")

    def __init__(self, group: str, exp: int):
        self.group = group
        self.exp = exp

    def __eq__(self, other) -> bool:
        return isinstance(other, MockPoint) and self.group == other.group and self.exp == other.exp

    def __hash__(self) -> int:
        return hash((self.group, self.exp))

    def __repr__(self) -> str:
        return f"{self.group}^{self.exp}"


class MockGroup(Group):
    def __init__(self, name: str, field: PrimeField):
        self.name = name
        self.field = field
        self.order = field.modulus
        self.byte_size = field.byte_size

    def _check(self, a: MockPoint) -> int:
        if not isinstance(a, MockPoint) or a.group != self.name:
            raise TypeError(f"expected a {self.name} element, got {a!r}")
        return a.exp

    def identity(self) -> MockPoint:
        return MockPoint(self.name, 0)

    def generator(self) -> MockPoint:
        return MockPoint(self.name, 1)

    def add(self, a, b):
        return MockPoint(self.name, (self._check(a) + self._check(b)) % self.order)

    def neg(self, a):
        return MockPoint(self.name, -self._check(a) % self.order)

    def mul(self, a, k):
        return MockPoint(self.name, self._check(a) * int(k) % self.order)

    def eq(self, a, b):
        return self._check(a) == self._check(b)

    def element(self, exp: int) -> MockPoint:
        return MockPoint(self.name, int(exp) % self.order)

    def to_bytes(self, a) -> bytes:
        return self.field.to_bytes(self._check(a))

    def from_bytes(self, data: bytes) -> MockPoint:
        return MockPoint(self.name, self.field.from_bytes(bytes(data)))

    def fast_msm(self, bases, scalars):
        if len(bases) != len(scalars):
            return None
        acc = 0
        for b, k in zip(bases, scalars):
            acc += self._check(b) * int(k)
        return MockPoint(self.name, acc % self.order)


class MockEngine(BilinearEngine):
    """Group elements are their exponents; e(g1^a, g2^b) = gT^(ab)."""

    def __init__(self, field: PrimeField = BN254_FR):
        super().__init__()
        self.scalar_field = field
        self.engine_id = f"mock-{field.modulus:x}"
        self.g1 = MockGroup("G1", field)
        self.g2 = MockGroup("G2", field)
        self.gt = MockGroup("GT", field)

    def __repr__(self) -> str:
        return f"MockEngine({self.scalar_field.name})"

    def _miller(self, a, b):
        return self.g1._check(a) * self.g2._check(b)

    def _final_exp(self, f):
        return MockPoint("GT", f % self.scalar_field.modulus)

    def _gt_mul(self, f, g):
        return f + g

    def _gt_one(self):
        return 0


# -- BN254 via py_ecc --------------------------------------------------------------


def _fq_sqrt(a, FQ, p: int):
    # p = 3 (mod 4)
    r = a ** ((p + 1) // 4)
    return r if r * r == a else None


def _fq2_sqrt(a, FQ2, p: int):
    """Square root in F_p^2 = F_p[u]/(u^2 + 1) for p = 3 (mod 4)."""
    if a == FQ2.zero():
        return a
    a1 = a ** ((p - 3) // 4)
    alpha = a1 * a1 * a
    a0 = (alpha ** p) * alpha
    minus_one = FQ2([-1, 0])
    if a0 == minus_one:
        return None
    x0 = a1 * a
    if alpha == minus_one:
        x = FQ2([0, 1]) * x0
    else:
        x = ((alpha + FQ2.one()) ** ((p - 1) // 2)) * x0
    return x if x * x == a else None


class _BN254Group(Group):
    _INFINITY = 0x40
    _Y_FLAG = 0x80

    def __init__(self, name: str, bn, degree: int):
        self.name = name
        self.bn = bn
        self.degree = degree
        self.order = bn.curve_order
        self.p = bn.field_modulus
        self.byte_size = 32 * degree
        self._gen = bn.G1 if degree == 1 else bn.G2
        self._zero = bn.Z1 if degree == 1 else bn.Z2
        self._b = bn.b if degree == 1 else bn.b2
        self._F = bn.FQ if degree == 1 else bn.FQ2

    def identity(self):
        return self._zero

    def generator(self):
        return self._gen

    def add(self, a, b):
        return self.bn.add(a, b)

    def neg(self, a):
        return self.bn.neg(a)

    def mul(self, a, k):
        return self.bn.multiply(a, int(k) % self.order)

    def eq(self, a, b):
        return self.bn.eq(a, b)

    def is_identity(self, a) -> bool:
        return self.bn.is_inf(a)

    def _coords(self, v) -> list[int]:
        return [int(v)] if self.degree == 1 else [int(c) for c in v.coeffs]

    def _is_larger(self, y) -> bool:
        # lexicographic on the highest coefficient first
        ys = self._coords(y)
        ns = self._coords(-y)
        return ys[::-1] > ns[::-1]

    def to_bytes(self, a) -> bytes:
        """Compressed: little-endian x coordinate(s), flags in the top bits of the last byte."""
        if self.bn.is_inf(a):
            out = bytearray(self.byte_size)
            out[-1] |= self._INFINITY
            return bytes(out)
        x, y = self.bn.normalize(a)
        out = bytearray()
        for c in self._coords(x):
            out += c.to_bytes(32, "little")
        if self._is_larger(y):
            out[-1] |= self._Y_FLAG
        return bytes(out)

    def from_bytes(self, data: bytes):
        data = bytes(data)
        if len(data) != self.byte_size:
            raise ValueError(f"{self.name} encoding must be {self.byte_size} bytes")
        flags = data[-1] & 0xC0
        body = bytearray(data)
        body[-1] &= 0x3F
        if flags & self._INFINITY:
            if flags & self._Y_FLAG or any(body):
                raise ValueError("malformed point at infinity")
            return self._zero
        coords = [int.from_bytes(body[32 * i: 32 * i + 32], "little") for i in range(self.degree)]
        if any(c >= self.p for c in coords):
            raise ValueError("non-canonical coordinate")
        x = self._F(coords[0]) if self.degree == 1 else self._F(coords)
        rhs = x * x * x + self._b
        y = _fq_sqrt(rhs, self._F, self.p) if self.degree == 1 else _fq2_sqrt(rhs, self._F, self.p)
        if y is None:
            raise ValueError(f"x coordinate not on the {self.name} curve")
        if self._is_larger(y) != bool(flags & self._Y_FLAG):
            y = -y
        pt = (x, y, self._F.one())
        if self.degree == 2 and not self.bn.is_inf(self.bn.multiply(pt, self.order)):
            raise ValueError("point not in the prime-order subgroup")
        return pt


class _GTGroup(Group):
    """Multiplicative target group written additively for interface uniformity."""

    def __init__(self, bn):
        self.name = "GT"
        self.bn = bn
        self.order = bn.curve_order
        self.byte_size = 32 * 12

    def identity(self):
        return self.bn.FQ12.one()

    def generator(self):
        return self.bn.pairing(self.bn.G2, self.bn.G1)

    def add(self, a, b):
        return a * b

    def neg(self, a):
        return a.inv()

    def mul(self, a, k):
        return a ** (int(k) % self.order)

    def eq(self, a, b):
        return a == b

    def to_bytes(self, a) -> bytes:
        return b"".join(int(c).to_bytes(32, "little") for c in a.coeffs)

    def from_bytes(self, data: bytes):
        data = bytes(data)
        if len(data) != self.byte_size:
            raise ValueError("GT encoding must be 384 bytes")
        return self.bn.FQ12([int.from_bytes(data[32 * i: 32 * i + 32], "little") for i in range(12)])


class BN254Engine(BilinearEngine):
    """Optimal ate pairing on BN254 (the alt_bn128 curve)."""

    engine_id = "bn254"

    def __init__(self):
        super().__init__()
        import py_ecc.optimized_bn128 as bn
        from py_ecc.optimized_bn128 import optimized_pairing

        self.bn = bn
        self._pairing = optimized_pairing
        self.scalar_field = BN254_FR
        self.g1 = _BN254Group("G1", bn, 1)
        self.g2 = _BN254Group("G2", bn, 2)
        self.gt = _GTGroup(bn)

    def __repr__(self) -> str:
        return "BN254Engine()"

    def _miller(self, a, b):
        if self.bn.is_inf(a) or self.bn.is_inf(b):
            return self.bn.FQ12.one()
        return self._pairing.pairing(b, a, final_exponentiate=False)

    def _final_exp(self, f):
        return self.bn.final_exponentiate(f)

    def _gt_mul(self, f, g):
        return f * g

    def _gt_one(self):
        return self.bn.FQ12.one()


_ENGINES: dict[str, BilinearEngine] = {}


def get_engine(name: str) -> BilinearEngine:
    """Shared engine instances: ``"mock"`` (over the BN254 scalar field) or ``"bn254"``/``"real"``."""
    key = {"real": "bn254"}.get(name, name)
    if key not in _ENGINES:
        if key == "mock":
            _ENGINES[key] = MockEngine(BN254_FR)
        elif key == "bn254":
            _ENGINES[key] = BN254Engine()
        else:
            raise ValueError(f"unknown engine {name!r} (expected mock or bn254)")
    return _ENGINES[key]


def engine_from_id(engine_id: str) -> BilinearEngine:
    if engine_id == "bn254":
        return get_engine("bn254")
    if engine_id.startswith("mock-"):
        modulus = int(engine_id[5:], 16)
        if modulus == BN254_FR.modulus:
            return get_engine("mock")
        return MockEngine(PrimeField(modulus))
    raise ValueError(f"unknown engine id {engine_id!r}")
