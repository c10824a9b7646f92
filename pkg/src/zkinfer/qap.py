"""From R1CS to a quadratic arithmetic program.

Constraint j is pinned to the domain point omega^j, so the column polynomials satisfy
l_i(omega^j) = L[j][i] and an assignment satisfies the system iff
t(X) = X^m - 1 divides A(X) B(X) - C(X), where A = sum z_i l_i and so on.
"""
from __future__ import annotations

from typing import Sequence

from .algebra.field import PrimeField
from .algebra.poly import EvaluationDomain, Polynomial
from .r1cs import ConstraintSystem


class QapError(ValueError):
    pass


class QapInstance:
    def __init__(self, cs: ConstraintSystem):
        if not cs.finalized:
            raise QapError("the constraint system must be finalized")
        self.cs = cs
        self.field: PrimeField = cs.field
        self.num_constraints = cs.num_constraints
        self.num_variables = cs.num_variables
        try:
            self.domain = EvaluationDomain.for_size(self.field, self.num_constraints)
        except ValueError as exc:
            raise QapError(f"no evaluation domain for {self.num_constraints} constraints: {exc}") from None
        self.m = self.domain.size
        self.L, self.R, self.O = cs.matrices()

    # -- columns -----------------------------------------------------------------------------

    def vanishing(self) -> Polynomial:
        return self.domain.vanishing()

    def t_at(self, x: int) -> int:
        return self.domain.evaluate_vanishing(x)

    def column_evals_at(self, x: int) -> tuple[list[int], list[int], list[int]]:
        """(l_i(x), r_i(x), o_i(x)) for every wire i."""
        p = self.field.modulus
        basis = self.domain.lagrange_basis_at(x)
        n = self.num_variables
        out = []
        for rows in (self.L, self.R, self.O):
            col = [0] * n
            for j, row in enumerate(rows):
                lj = basis[j]
                if lj:
                    for i, c in row:
                        col[i] += c * lj
            out.append([v % p for v in col])
        return tuple(out)

    def column_polynomial(self, which: str, i: int) -> Polynomial:
        rows = {"l": self.L, "r": self.R, "o": self.O}[which]
        evals = [0] * self.m
        for j, row in enumerate(rows):
            for k, c in row:
                if k == i:
                    evals[j] = c
        return self.domain.interpolate(evals)

    # -- assignment-dependent polynomials ---------------------------------------------------

    def row_evals(self, z: Sequence[int]) -> tuple[list[int], list[int], list[int]]:
        """(Lz, Rz, Oz) padded with zeros to the domain size."""
        if len(z) != self.num_variables:
            raise QapError(f"assignment has {len(z)} values, expected {self.num_variables}")
        p = self.field.modulus
        out = []
        for rows in (self.L, self.R, self.O):
            vals = [sum(c * z[i] for i, c in row) % p for row in rows]
            out.append(vals + [0] * (self.m - len(vals)))
        return tuple(out)

    def combined(self, z: Sequence[int]) -> tuple[list[int], list[int], list[int]]:
        """Coefficients of A, B, C (each of length m)."""
        a, b, c = self.row_evals(z)
        d = self.domain
        return d.ifft(a), d.ifft(b), d.ifft(c)

    def compute_h(self, z: Sequence[int]) -> Polynomial:
        """The quotient (A B - C) / t; raises QapError when the division is not exact."""
        p = self.field.modulus
        a, b, c = self.row_evals(z)
        for j in range(self.num_constraints):
            if a[j] * b[j] % p != c[j]:
                raise QapError(f"assignment violates constraint {j}; t(X) does not divide A B - C")
        d = self.domain
        A, B, C = d.ifft(a), d.ifft(b), d.ifft(c)
        if d.radix2 and (2 * self.m).bit_length() - 1 <= self.field.two_adicity:
            return self._h_on_coset(A, B, C)
        num = Polynomial(self.field, A) * Polynomial(self.field, B) - Polynomial(self.field, C)
        h, rem = num.divmod(self.vanishing())
        if not rem.is_zero():
            raise QapError("nonzero remainder: t(X) does not divide A B - C")
        return h

    def _h_on_coset(self, A: list[int], B: list[int], C: list[int]) -> Polynomial:
        p = self.field.modulus
        m = self.m
        big = EvaluationDomain(self.field, 2 * m)
        shift = self.field.multiplicative_generator
        ea = big.coset_fft(A, shift)
        eb = big.coset_fft(B, shift)
        ec = big.coset_fft(C, shift)
        # t(shift * w^k) = shift^m * (w^m)^k - 1 with w^m = -1 on the doubled domain
        sm = pow(shift, m, p)
        t_inv = self.field.batch_invert([(sm - 1) % p, (-sm - 1) % p])
        quotient = [
            (ea[k] * eb[k] - ec[k]) * t_inv[k & 1] % p
            for k in range(2 * m)
        ]
        coeffs = big.coset_ifft(quotient, shift)
        if any(coeffs[m - 1:]):
            raise QapError("nonzero remainder: t(X) does not divide A B - C")
        return Polynomial(self.field, coeffs[: m - 1])


def r1cs_to_qap(cs: ConstraintSystem) -> QapInstance:
    return QapInstance(cs)
