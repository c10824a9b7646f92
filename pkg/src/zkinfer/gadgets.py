"""In-circuit building blocks: decompositions, the ReLU family, and the LogUp lookup.

Every activation works on the shifted value s = x + 2^(B-1), which lies in [0, 2^B) when
|x| < 2^(B-1). The top bit of s is the sign flag (1 iff x >= 0) and the low B-1 bits equal
x itself for non-negative x, so ``max(0, x) >> cut`` is the flag times the bits above the
cut. The flag is never allocated: it is the linear combination (s - low part) / 2^(B-1),
and constraining it to be boolean enforces the recomposition at the same time.

Each gadget has a ``*_ref`` twin operating on plain integers (or numpy object arrays of
them); these are the reference semantics the circuit must reproduce bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuit import ChallengeCollision, CircuitBuilder, LayerCount, WitnessContext, WitnessError
from .r1cs import LinearCombination, as_lc

MIN_CHUNK_WIDTH = 2
MAX_CHUNK_WIDTH = 24


class GadgetError(ValueError):
    pass


def bits_for_bound(bound: int) -> int:
    """Smallest B with |x| <= bound implying |x| < 2^(B-1)."""
    return int(bound).bit_length() + 1


def round_up(value: int, multiple: int) -> int:
    return -(-value // multiple) * multiple


# -- decomposition -----------------------------------------------------------------


@dataclass(frozen=True)
class DecompositionSpec:
    """Piece layout of s = x + 2^(B-1): ``pieces`` cover bits [0, B-1); bit B-1 is the sign.

    Binary mode uses 1-bit pieces. Chunked mode splits every interval between consecutive
    boundaries into w-bit chunks, the topmost one of each interval possibly narrower.
    """

    width: int
    mode: str
    pieces: tuple[tuple[int, int], ...]  # (position, width)
    boundaries: tuple[int, ...]
    chunk_width: int | None = None

    @classmethod
    def plan(cls, width: int, boundaries: Iterable[int] = (), chunk_width: int | None = None) -> DecompositionSpec:
        if width < 2:
            raise GadgetError("decomposition width must be at least 2")
        cuts = sorted({0, width - 1, *boundaries})
        if cuts[0] < 0 or cuts[-1] > width - 1:
            raise GadgetError(f"boundaries {sorted(boundaries)} fall outside [0, {width - 1}]")
        if chunk_width is None:
            return cls(width, "binary", tuple((i, 1) for i in range(width - 1)), tuple(cuts))
        if not MIN_CHUNK_WIDTH <= chunk_width <= MAX_CHUNK_WIDTH:
            raise GadgetError(f"chunk width {chunk_width} outside [{MIN_CHUNK_WIDTH}, {MAX_CHUNK_WIDTH}]")
        pieces = []
        for lo, hi in zip(cuts, cuts[1:]):
            pos = lo
            while pos < hi:
                w = min(chunk_width, hi - pos)
                pieces.append((pos, w))
                pos += w
        return cls(width, "chunked", tuple(pieces), tuple(cuts), chunk_width)

    @property
    def chunk_widths(self) -> list[int]:
        return [w for _, w in self.pieces]


class Decomposition:
    """Allocates the pieces of s and exposes the sign flag and bit segments as free LCs."""

    def __init__(self, b: CircuitBuilder, x, spec: DecompositionSpec, what: str = "value"):
        self.builder = b
        self.x = as_lc(x)
        self.spec = spec
        B = spec.width
        if B > b.field.bit_size - 2:
            raise GadgetError(f"decomposition width {B} too large for a {b.field.bit_size}-bit field")
        chunked = spec.mode == "chunked"
        if chunked and b.lookup is None:
            raise GadgetError("chunked decomposition needs a lookup argument on the builder")
        rnd = 0 if chunked else None
        self.wires = [b.private(rnd) for _ in spec.pieces]
        p = b.field.modulus
        low = LinearCombination.weighted_sum(
            (LinearCombination.wire(w), 1 << pos) for w, (pos, _) in zip(self.wires, spec.pieces)
        )
        shifted = self.x + (1 << (B - 1))
        self.sign = (shifted - low) * pow(1 << (B - 1), -1, p)
        for w, (_, width) in zip(self.wires, spec.pieces):
            if chunked:
                b.lookup.tag(LinearCombination.wire(w), width)
            else:
                b.enforce_boolean(LinearCombination.wire(w))
        b.enforce_boolean(self.sign)

        wires, pieces, x_lc = self.wires, spec.pieces, self.x

        def fill(ctx: WitnessContext) -> None:
            v = ctx.eval(x_lc)
            if not -(1 << (B - 1)) < v < (1 << (B - 1)):
                raise WitnessError(f"{what} {v} outside the scheduled range |x| < 2^{B - 1}")
            s = v + (1 << (B - 1))
            for w, (pos, width) in zip(wires, pieces):
                ctx[w] = (s >> pos) & ((1 << width) - 1)

        b.step(fill)

    def segment(self, lo: int, hi: int) -> LinearCombination:
        """sum of pieces in bits [lo, hi) scaled down by 2^lo; lo and hi must be boundaries."""
        if lo not in self.spec.boundaries or hi not in self.spec.boundaries:
            raise GadgetError(f"segment [{lo}, {hi}) does not align with {self.spec.boundaries}")
        return LinearCombination.weighted_sum(
            (LinearCombination.wire(w), 1 << (pos - lo))
            for w, (pos, _) in zip(self.wires, self.spec.pieces)
            if lo <= pos < hi
        )

    def floor_shift(self, k: int) -> LinearCombination:
        """floor(x / 2^k) as a linear combination (k must be a boundary)."""
        B = self.spec.width
        return self.segment(k, B - 1) + (self.sign - 1) * (1 << (B - 1 - k))


def _decomposition(b: CircuitBuilder, x, bits: int, boundaries: Iterable[int], chunk_width: int | None, what="value"):
    return Decomposition(b, x, DecompositionSpec.plan(bits, boundaries, chunk_width), what)


def _product(b: CircuitBuilder, left: LinearCombination, right: LinearCombination, offset: LinearCombination | None = None) -> LinearCombination:
    """Allocate y with left * right = y - offset; returns y as an LC."""
    y = b.private()
    out = LinearCombination.wire(y)
    b.enforce(left, right, out - offset if offset is not None else out)

    def fill(ctx: WitnessContext) -> None:
        v = ctx.eval(left) * ctx.eval(right)
        if offset is not None:
            v += ctx.eval(offset)
        ctx[y] = v

    b.step(fill)
    return out


# -- activations -----------------------------------------------------------------------


def relu(b: CircuitBuilder, x, bits: int, cut: int = 0, chunk_width: int | None = None) -> LinearCombination:
    """max(0, x) >> cut in B + 1 constraints (binary mode)."""
    if not 0 <= cut <= bits - 1:
        raise GadgetError(f"cut {cut} incompatible with width {bits}")
    dec = _decomposition(b, x, bits, [cut], chunk_width)
    return _product(b, dec.sign, dec.segment(cut, bits - 1))


def relu_ref(x, cut: int = 0):
    return _where(x >= 0, x >> cut, 0 * x)


def leaky_relu(b: CircuitBuilder, x, bits: int, shift: int, cut: int = 0, chunk_width: int | None = None) -> LinearCombination:
    """max(x, x / 2^shift) >> cut: both branches come from one decomposition."""
    if shift < 1 or cut + shift > bits - 1:
        raise GadgetError(f"slope shift {shift} with cut {cut} does not fit width {bits}")
    dec = _decomposition(b, x, bits, [cut, cut + shift], chunk_width)
    pos = dec.floor_shift(cut)
    neg = dec.floor_shift(cut + shift)
    return _product(b, dec.sign, pos - neg, offset=neg)


def leaky_relu_ref(x, shift: int, cut: int = 0):
    return _where(x >= 0, x >> cut, x >> (cut + shift))


def relu6(b: CircuitBuilder, x, bits: int, precision: int, cut: int = 0, chunk_width: int | None = None) -> LinearCombination:
    """min(6, max(0, x)) >> cut as relu(x) - relu(x - 6), two decompositions."""
    six = 6 << precision
    if six % (1 << cut):
        raise GadgetError("relu6 cut must not exceed precision + 1")
    bits2 = bits_for_bound((1 << (bits - 1)) + six)
    if chunk_width:
        bits2 = round_up(bits2, chunk_width)
    hi = relu(b, x, bits, cut, chunk_width)
    over = relu(b, as_lc(x) - six, bits2, cut, chunk_width)
    return hi - over


def relu6_ref(x, precision: int, cut: int = 0):
    six = 6 << precision
    return relu_ref(x, cut) - relu_ref(x - six, cut)


def is_zero(b: CircuitBuilder, x: LinearCombination) -> LinearCombination:
    """1 if x == 0 else 0, in two constraints."""
    inv = b.private()
    z = b.private()
    zl = LinearCombination.wire(z)
    b.enforce(x, LinearCombination.wire(inv), 1 - zl)
    b.enforce(x, zl, 0)
    p = b.field.modulus

    def fill(ctx: WitnessContext) -> None:
        v = ctx.eval_mod(x)
        ctx[inv] = pow(v, -1, p) if v else 0
        ctx[z] = 0 if v else 1

    b.step(fill)
    return zl


def hard_sigmoid_scale(rho: int) -> int:
    """The quantized 1/6 used to scale before clamping."""
    from .quantize import quantize_int

    return quantize_int(1 / 6, rho)


def hard_sigmoid_bits(bits: int, precision: int, rho: int, chunk_width: int | None = None) -> int:
    """Width of the scaled value u = (x + 3) / 6 when |x| < 2^(bits-1)."""
    c = hard_sigmoid_scale(rho)
    w = max(bits_for_bound(((1 << (bits - 1)) + (3 << precision)) * c), precision + rho + 2)
    return round_up(w, chunk_width) if chunk_width else w


def hard_sigmoid(b: CircuitBuilder, x, bits: int, precision: int, rho: int, out_precision: int | None = None,
                 chunk_width: int | None = None) -> LinearCombination:
    """clamp((x + 3) / 6, 0, 1) at ``out_precision`` (default rho).

    The division by 6 is a free multiplication by Q_rho(1/6), which makes 1.0 the power of
    two 2^(P + rho); saturation then reduces to a zero test on the bits above it.
    """
    out_precision = rho if out_precision is None else out_precision
    top = precision + rho
    cut = top - out_precision
    if not 0 <= cut <= top:
        raise GadgetError("output precision must not exceed precision + rho")
    c = hard_sigmoid_scale(rho)
    u = (as_lc(x) + (3 << precision)) * c
    ubits = hard_sigmoid_bits(bits, precision, rho, chunk_width)
    dec = _decomposition(b, u, ubits, [cut, top], chunk_width, what="scaled hard_sigmoid input")
    over = dec.segment(top, ubits - 1)
    fits = is_zero(b, over)
    one = 1 << out_precision
    low = dec.segment(cut, top)
    q = _product(b, fits, low - one)
    return _product(b, dec.sign, q + one)


def hard_sigmoid_ref(x, precision: int, rho: int, out_precision: int | None = None):
    out_precision = rho if out_precision is None else out_precision
    top = precision + rho
    u = (x + (3 << precision)) * hard_sigmoid_scale(rho)
    clamped = _where(u < 0, 0 * u, _where(u >= (1 << top), 0 * u + (1 << top), u))
    return clamped >> (top - out_precision)


def hard_swish(b: CircuitBuilder, x, bits: int, precision: int, rho: int, chunk_width: int | None = None) -> LinearCombination:
    """x * hard_sigmoid(x); the result carries precision P + rho."""
    gate = hard_sigmoid(b, x, bits, precision, rho, rho, chunk_width)
    return _product(b, as_lc(x), gate)


def hard_swish_ref(x, precision: int, rho: int):
    return x * hard_sigmoid_ref(x, precision, rho, rho)


def _where(cond, a, b):
    if isinstance(cond, (bool, np.bool_)):
        return a if cond else b
    return np.where(cond, a, b)


# -- LogUp -----------------------------------------------------------------------------


class LookupArgument:
    """Range lookup into [0, 2^w) via sum 1/(alpha + z_j) = sum mu_i / (alpha + i).

    Multiplicities are committed in round 0 alongside the chunks; the inverse columns
    depend on alpha and go in the last round.
    """

    def __init__(self, b: CircuitBuilder, chunk_width: int):
        if not MIN_CHUNK_WIDTH <= chunk_width <= MAX_CHUNK_WIDTH:
            raise GadgetError(f"chunk width {chunk_width} outside [{MIN_CHUNK_WIDTH}, {MAX_CHUNK_WIDTH}]")
        if b.rounds < 1:
            raise GadgetError("lookups need at least one challenge round")
        if (1 << chunk_width) >= b.field.modulus // 2:
            raise GadgetError("table does not fit the field")
        self.builder = b
        self.width = chunk_width
        self.alpha = b.challenge(0)
        self.tags: list[LinearCombination] = []
        self.finalized = False
        self.multiplicity_wires: list[int] = []
        self.u_wires: list[int] = []
        self.v_wires: list[int] = []

    @property
    def table_size(self) -> int:
        return 1 << self.width

    def tag(self, lc, width: int | None = None) -> None:
        """Register a value that must lie in [0, 2^width)."""
        if self.finalized:
            raise GadgetError("lookup already finalized")
        width = self.width if width is None else width
        if not 1 <= width <= self.width:
            raise GadgetError(f"tag width {width} exceeds the table width {self.width}")
        lc = as_lc(lc)
        if width < self.width:
            # the scaled copy bounds the value by 2^width, the plain copy rules out the
            # field elements whose scaled image happens to land in the table
            self.tags.append(lc * (1 << (self.width - width)))
            self.builder.count_tag()
        self.tags.append(lc)
        self.builder.count_tag()

    def finalize(self) -> LayerCount:
        if self.finalized:
            raise GadgetError("lookup already finalized")
        self.finalized = True
        b = self.builder
        count = b.begin_layer("lookup", "lookup")
        T = self.table_size
        alpha = LinearCombination.wire(self.alpha)
        self.multiplicity_wires = mu = [b.private(0) for _ in range(T)]
        self.u_wires = u = [b.private() for _ in self.tags]
        self.v_wires = v = [b.private() for _ in range(T)]
        for uj, z in zip(u, self.tags):
            b.enforce(LinearCombination.wire(uj), alpha + z, 1)
        for i in range(T):
            b.enforce(LinearCombination.wire(v[i]), alpha + i, LinearCombination.wire(mu[i]))
        balance = LinearCombination.weighted_sum(
            [(LinearCombination.wire(x), 1) for x in u] + [(LinearCombination.wire(x), -1) for x in v]
        )
        b.enforce(balance, 1, 0)
        tags = self.tags
        p = b.field.modulus

        def fill_multiplicities(ctx: WitnessContext) -> None:
            counts = [0] * T
            for k, z in enumerate(tags):
                val = ctx.eval_mod(z)
                if val >= T:
                    raise WitnessError(f"lookup value {val} (tag {k}) outside [0, {T})")
                counts[val] += 1
            for w, c in zip(mu, counts):
                ctx[w] = c

        def fill_inverses(ctx: WitnessContext) -> None:
            a = ctx[self.alpha]
            zs = [(a + ctx.eval_mod(z)) % p for z in tags]
            ts = [(a + i) % p for i in range(T)]
            try:
                inv = b.field.batch_invert(zs + ts)
            except ZeroDivisionError:
                raise ChallengeCollision("challenge collides with a lookup pole") from None
            for w, val in zip(u, inv[: len(zs)]):
                ctx[w] = val
            for i, w in enumerate(v):
                ctx[w] = ctx[mu[i]] * inv[len(zs) + i] % p

        b.step(fill_multiplicities, phase=0, label="lookup")
        b.step(fill_inverses, phase=1, label="lookup")
        b.end_layer()
        count.extra["table_size"] = T
        count.extra["tags"] = len(tags)
        return count


def multiplicities(values: Sequence[int], table_size: int) -> list[int] | None:
    """mu_i = #{j : values[j] == i}; None if some value misses the table."""
    mu = [0] * table_size
    for v in values:
        if not 0 <= v < table_size:
            return None
        mu[v] += 1
    return mu


def logup_identity_holds(values: Sequence[int], mu: Sequence[int], alpha: int, p: int) -> bool:
    """Evaluate sum 1/(alpha + z) - sum mu_i/(alpha + i) at one point (False at a pole)."""
    lhs = 0
    for z in values:
        d = (alpha + z) % p
        if d == 0:
            return False
        lhs += pow(d, -1, p)
    for i, m in enumerate(mu):
        d = (alpha + i) % p
        if d == 0:
            if m % p:
                return False
            continue
        lhs -= m * pow(d, -1, p)
    return lhs % p == 0
