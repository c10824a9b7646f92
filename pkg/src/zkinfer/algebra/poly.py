"""Dense univariate polynomials and multiplicative evaluation domains."""
from __future__ import annotations

from typing import Sequence

from .field import PrimeField


class Polynomial:
    """Coefficients low-to-high over a prime field, trailing zeros trimmed."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: PrimeField, coeffs: Sequence[int] = ()):
        p = field.modulus
        cs = [int(c) % p for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.field = field
        self.coeffs = cs

    @classmethod
    def zero(cls, field: PrimeField) -> Polynomial:
        return cls(field, [])

    @classmethod
    def x_pow_minus_one(cls, field: PrimeField, m: int) -> Polynomial:
        return cls(field, [-1] + [0] * (m - 1) + [1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.field == other.field and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs})"

    def __call__(self, x: int) -> int:
        p = self.field.modulus
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % p
        return acc

    def __add__(self, other: Polynomial) -> Polynomial:
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(self.field, out)

    def __neg__(self) -> Polynomial:
        return Polynomial(self.field, [-c for c in self.coeffs])

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other) -> Polynomial:
        if isinstance(other, int):
            return Polynomial(self.field, [c * other for c in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Polynomial.zero(self.field)
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return Polynomial(self.field, out)

    __rmul__ = __mul__

    def divmod(self, divisor: Polynomial) -> tuple[Polynomial, Polynomial]:
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        p = self.field.modulus
        rem = list(self.coeffs)
        dd = divisor.degree
        lead_inv = pow(divisor.coeffs[-1], -1, p)
        quot = [0] * max(len(rem) - dd, 0)
        for k in range(len(rem) - dd - 1, -1, -1):
            coef = rem[k + dd] * lead_inv % p
            quot[k] = coef
            if coef:
                for j, dc in enumerate(divisor.coeffs):
                    rem[k + j] = (rem[k + j] - coef * dc) % p
        return Polynomial(self.field, quot), Polynomial(self.field, rem[:dd])

    def __floordiv__(self, divisor: Polynomial) -> Polynomial:
        return self.divmod(divisor)[0]

    def __mod__(self, divisor: Polynomial) -> Polynomial:
        return self.divmod(divisor)[1]


def _bit_reverse(values: list[int]) -> None:
    n = len(values)
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            values[i], values[j] = values[j], values[i]


def ntt(values: Sequence[int], root: int, p: int) -> list[int]:
    """In-order radix-2 transform: out[j] = sum_i values[i] * root^(i*j)."""
    a = [v % p for v in values]
    n = len(a)
    _bit_reverse(a)
    length = 2
    while length <= n:
        w_len = pow(root, n // length, p)
        half = length >> 1
        twiddles = [1] * half
        for k in range(1, half):
            twiddles[k] = twiddles[k - 1] * w_len % p
        for start in range(0, n, length):
            for k in range(half):
                u = a[start + k]
                v = a[start + k + half] * twiddles[k] % p
                a[start + k] = (u + v) % p
                a[start + k + half] = (u - v) % p
        length <<= 1
    return a


class EvaluationDomain:
    """The subgroup {omega^j} of order ``size`` in F_p^*.

    Power-of-two sizes use the radix-2 transform. :meth:`subgroup` builds domains of any
    order dividing p - 1 and falls back to O(m^2) Lagrange arithmetic; that path exists for
    fields with little 2-adicity and is only meant for tiny systems.
    """

    def __init__(self, field: PrimeField, size: int, *, _allow_any_order: bool = False):
        if size < 1:
            raise ValueError("domain size must be positive")
        radix2 = size & (size - 1) == 0
        if not radix2 and not _allow_any_order:
            raise ValueError(f"domain size {size} is not a power of two")
        if (field.modulus - 1) % size:
            raise ValueError(f"{field.name} has no multiplicative subgroup of order {size}")
        self.field = field
        self.size = size
        self.radix2 = radix2
        self.omega = field.root_of_unity(size)
        self.omega_inv = pow(self.omega, -1, field.modulus)
        self.size_inv = pow(size, -1, field.modulus)

    @classmethod
    def subgroup(cls, field: PrimeField, order: int) -> EvaluationDomain:
        return cls(field, order, _allow_any_order=True)

    @classmethod
    def for_size(cls, field: PrimeField, at_least: int) -> EvaluationDomain:
        """Smallest power-of-two domain holding ``at_least`` points, else the smallest subgroup."""
        m = 1
        while m < max(at_least, 1):
            m <<= 1
        if m.bit_length() - 1 <= field.two_adicity:
            return cls(field, m)
        order = max(at_least, 1)
        limit = max(64 * order, 4096)
        while (field.modulus - 1) % order:
            order += 1
            if order > limit or order > field.modulus - 1:
                raise ValueError(f"domain of size >= {at_least} too large for {field.name}")
        return cls.subgroup(field, order)

    def __repr__(self) -> str:
        return f"EvaluationDomain(size={self.size}, field={self.field.name})"

    def elements(self) -> list[int]:
        p = self.field.modulus
        out = [1] * self.size
        for j in range(1, self.size):
            out[j] = out[j - 1] * self.omega % p
        return out

    def element(self, j: int) -> int:
        return pow(self.omega, j, self.field.modulus)

    def vanishing(self) -> Polynomial:
        return Polynomial.x_pow_minus_one(self.field, self.size)

    def evaluate_vanishing(self, x: int) -> int:
        return (pow(x, self.size, self.field.modulus) - 1) % self.field.modulus

    # -- transforms -------------------------------------------------------------

    def fft(self, coeffs: Sequence[int]) -> list[int]:
        """Evaluations on the domain of a polynomial of degree < size."""
        coeffs = list(coeffs)
        if len(coeffs) > self.size:
            raise ValueError("polynomial degree exceeds domain size")
        coeffs += [0] * (self.size - len(coeffs))
        p = self.field.modulus
        if self.radix2:
            return ntt(coeffs, self.omega, p)
        return [Polynomial(self.field, coeffs)(x) for x in self.elements()]

    def ifft(self, evals: Sequence[int]) -> list[int]:
        if len(evals) != self.size:
            raise ValueError(f"expected {self.size} evaluations, got {len(evals)}")
        p = self.field.modulus
        if self.radix2:
            out = ntt(evals, self.omega_inv, p)
            return [v * self.size_inv % p for v in out]
        # on a subgroup the DFT is inverted by the conjugate DFT scaled by 1/m
        pts = self.elements()
        out = []
        for k in range(self.size):
            acc = 0
            for j, v in enumerate(evals):
                acc += v * pow(pts[j], (self.size - k) % self.size, p)
            out.append(acc * self.size_inv % p)
        return out

    def coset_fft(self, coeffs: Sequence[int], shift: int) -> list[int]:
        p = self.field.modulus
        scaled = []
        s = 1
        for c in coeffs:
            scaled.append(c * s % p)
            s = s * shift % p
        return self.fft(scaled)

    def coset_ifft(self, evals: Sequence[int], shift: int) -> list[int]:
        p = self.field.modulus
        coeffs = self.ifft(evals)
        inv = pow(shift, -1, p)
        s = 1
        out = []
        for c in coeffs:
            out.append(c * s % p)
            s = s * inv % p
        return out

    def interpolate(self, evals: Sequence[int]) -> Polynomial:
        return Polynomial(self.field, self.ifft(evals))

    def evaluate(self, poly: Polynomial) -> list[int]:
        return self.fft(poly.coeffs)

    def lagrange_basis_at(self, x: int) -> list[int]:
        """[L_j(x)] for the Lagrange basis of the domain: L_j(x) = (x^m - 1) w^j / (m (x - w^j))."""
        p = self.field.modulus
        pts = self.elements()
        zx = self.evaluate_vanishing(x)
        if zx == 0:
            return [1 if pt == x % p else 0 for pt in pts]
        denoms = self.field.batch_invert([(x - pt) for pt in pts])
        scale = zx * self.size_inv % p
        return [scale * pt % p * d % p for pt, d in zip(pts, denoms)]


def lagrange_interpolate(field: PrimeField, xs: Sequence[int], ys: Sequence[int]) -> Polynomial:
    """Naive O(n^2) interpolation through arbitrary distinct points."""
    result = Polynomial.zero(field)
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        basis = Polynomial(field, [1])
        denom = 1
        for j, xj in enumerate(xs):
            if j != i:
                basis = basis * Polynomial(field, [-xj, 1])
                denom = denom * (xi - xj) % field.modulus
        result = result + basis * (yi * pow(denom, -1, field.modulus))
    return result
