"""Rank-1 constraint systems with a round-partitioned witness layout.

Wires are allocated into logical blocks (public, per-round challenges, per-round private
witness) in any order. :meth:`ConstraintSystem.finalize` permutes them into the canonical
order ``[1 | public | challenges_0 .. challenges_{d-1} | round_0 .. round_d]`` and rewrites
every constraint, so gadget code never depends on raw indices.
"""
from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .algebra.field import PrimeField

ONE = 0  # the constant wire

MAGIC = b"UNR1"
FORMAT_VERSION = 1


class R1CSError(Exception):
    pass


class LinearCombination:
    """Sparse sum of integer-weighted wires; building one never costs a constraint."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, int] | None = None):
        self.terms: dict[int, int] = {}
        if terms:
            for w, c in terms.items():
                if c:
                    self.terms[w] = c

    @classmethod
    def wire(cls, w: int, coeff: int = 1) -> LinearCombination:
        return cls({w: coeff})

    @classmethod
    def const(cls, c: int) -> LinearCombination:
        return cls({ONE: c})

    @classmethod
    def zero(cls) -> LinearCombination:
        return cls()

    @classmethod
    def weighted_sum(cls, items: Iterable[tuple[LinearCombination, int]]) -> LinearCombination:
        acc: dict[int, int] = {}
        for lc, k in items:
            if k:
                for w, c in lc.terms.items():
                    acc[w] = acc.get(w, 0) + c * k
        return cls(acc)

    def copy(self) -> LinearCombination:
        out = LinearCombination()
        out.terms = dict(self.terms)
        return out

    def __add__(self, other) -> LinearCombination:
        other = as_lc(other)
        out = self.copy()
        for w, c in other.terms.items():
            v = out.terms.get(w, 0) + c
            if v:
                out.terms[w] = v
            else:
                out.terms.pop(w, None)
        return out

    __radd__ = __add__

    def __neg__(self) -> LinearCombination:
        return LinearCombination({w: -c for w, c in self.terms.items()})

    def __sub__(self, other) -> LinearCombination:
        return self + (-as_lc(other))

    def __rsub__(self, other) -> LinearCombination:
        return as_lc(other) - self

    def __mul__(self, k: int) -> LinearCombination:
        if not isinstance(k, int):
            return NotImplemented
        return LinearCombination({w: c * k for w, c in self.terms.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(w == ONE for w in self.terms)

    def evaluate(self, values: Sequence[int], p: int) -> int:
        return sum(c * values[w] for w, c in self.terms.items()) % p

    def reduced(self, p: int) -> list[tuple[int, int]]:
        out = []
        for w in sorted(self.terms):
            c = self.terms[w] % p
            if c:
                out.append((w, c))
        return out

    def __repr__(self) -> str:
        return " + ".join(f"{c}*w{w}" for w, c in sorted(self.terms.items())) or "0"


def as_lc(x) -> LinearCombination:
    if isinstance(x, LinearCombination):
        return x
    if isinstance(x, int):
        return LinearCombination.const(x)
    raise TypeError(f"cannot treat {type(x).__name__} as a linear combination")


Row = list[tuple[int, int]]


@dataclass(frozen=True)
class Constraint:
    left: Row
    right: Row
    output: Row


@dataclass(frozen=True)
class WitnessLayout:
    """Block sizes of the canonical layout ``[1 | x | alpha_0..alpha_{d-1} | w_0..w_d]``."""

    num_public: int
    challenge_sizes: tuple[int, ...]
    round_sizes: tuple[int, ...]

    def __post_init__(self):
        if len(self.round_sizes) != len(self.challenge_sizes) + 1:
            raise R1CSError("need exactly one more private round than challenge rounds")

    @property
    def rounds(self) -> int:
        return len(self.challenge_sizes)

    @property
    def size(self) -> int:
        return 1 + self.num_public + sum(self.challenge_sizes) + sum(self.round_sizes)

    @property
    def public_range(self) -> range:
        return range(1, 1 + self.num_public)

    def challenge_range(self, i: int) -> range:
        start = 1 + self.num_public + sum(self.challenge_sizes[:i])
        return range(start, start + self.challenge_sizes[i])

    @property
    def statement_range(self) -> range:
        """Everything the verifier knows: the constant, the public inputs and the challenges."""
        return range(0, 1 + self.num_public + sum(self.challenge_sizes))

    def round_range(self, i: int) -> range:
        start = len(self.statement_range) + sum(self.round_sizes[:i])
        return range(start, start + self.round_sizes[i])

    def blocks(self) -> list[tuple[str, range]]:
        out = [("one", range(0, 1)), ("public", self.public_range)]
        out += [(f"challenge{i}", self.challenge_range(i)) for i in range(self.rounds)]
        out += [(f"round{i}", self.round_range(i)) for i in range(self.rounds + 1)]
        return out

    def check_partition(self) -> None:
        nxt = 0
        for name, rng in self.blocks():
            if rng.start != nxt:
                raise R1CSError(f"block {name} does not start at {nxt}")
            nxt = rng.stop
        if nxt != self.size:
            raise R1CSError("layout blocks do not cover the witness")


class ConstraintSystem:
    def __init__(self, field: PrimeField, rounds: int = 0):
        if rounds < 0:
            raise R1CSError("rounds must be non-negative")
        self.field = field
        self.rounds = rounds
        self._kinds: list[tuple[str, int]] = [("one", 0)]
        self._constraints: list[tuple[LinearCombination, LinearCombination, LinearCombination]] = []
        self.constraints: list[Constraint] = []
        self.layout: WitnessLayout | None = None
        self._index: list[int] | None = None
        self.meta: dict = {}

    # -- building -------------------------------------------------------------

    @property
    def finalized(self) -> bool:
        return self.layout is not None

    def _alloc(self, kind: str, rnd: int) -> int:
        if self.finalized:
            raise R1CSError("cannot allocate wires after finalization")
        self._kinds.append((kind, rnd))
        return len(self._kinds) - 1

    def alloc_public(self) -> int:
        return self._alloc("public", 0)

    def alloc_challenge(self, rnd: int = 0) -> int:
        if not 0 <= rnd < self.rounds:
            raise R1CSError(f"challenge round {rnd} outside [0, {self.rounds})")
        return self._alloc("challenge", rnd)

    def alloc_private(self, rnd: int | None = None) -> int:
        rnd = self.rounds if rnd is None else rnd
        if not 0 <= rnd <= self.rounds:
            raise R1CSError(f"private round {rnd} outside [0, {self.rounds}]")
        return self._alloc("private", rnd)

    def alloc(self, kind: str, rnd: int | None = None) -> int:
        if kind == "public":
            return self.alloc_public()
        if kind == "challenge":
            return self.alloc_challenge(rnd or 0)
        if kind == "private":
            return self.alloc_private(rnd)
        raise R1CSError(f"unknown wire kind {kind!r}")

    @property
    def num_wires(self) -> int:
        return len(self._kinds)

    def enforce(self, left, right, output) -> None:
        if self.finalized:
            raise R1CSError("cannot add constraints after finalization")
        lcs = (as_lc(left), as_lc(right), as_lc(output))
        n = len(self._kinds)
        for lc in lcs:
            for w in lc.terms:
                if not 0 <= w < n:
                    raise R1CSError(f"constraint references unallocated wire {w}")
        self._constraints.append(lcs)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints) if self.finalized else len(self._constraints)

    def finalize(self) -> ConstraintSystem:
        if self.finalized:
            raise R1CSError("system already finalized")
        if not self._constraints:
            raise R1CSError("a finalized system needs at least one constraint")
        d = self.rounds
        order_key = {"one": 0, "public": 1, "challenge": 2, "private": 3}
        order = sorted(range(len(self._kinds)), key=lambda w: (order_key[self._kinds[w][0]], self._kinds[w][1], w))
        index = [0] * len(order)
        for pos, w in enumerate(order):
            index[w] = pos
        self._index = index
        num_public = sum(1 for k, _ in self._kinds if k == "public")
        challenge_sizes = tuple(sum(1 for k, r in self._kinds if k == "challenge" and r == i) for i in range(d))
        round_sizes = tuple(sum(1 for k, r in self._kinds if k == "private" and r == i) for i in range(d + 1))
        self.layout = WitnessLayout(num_public, challenge_sizes, round_sizes)
        self.layout.check_partition()
        p = self.field.modulus

        def remap(lc: LinearCombination) -> Row:
            return sorted((index[w], c) for w, c in lc.reduced(p))

        self.constraints = [Constraint(remap(a), remap(b), remap(c)) for a, b, c in self._constraints]
        self._constraints = []
        return self

    def index(self, wire: int) -> int:
        """Canonical position of a wire allocated before finalization."""
        if self._index is None:
            raise R1CSError("system not finalized")
        return self._index[wire]

    def to_canonical(self, values: Sequence[int]) -> list[int]:
        """Reorder a wire-id indexed assignment into canonical layout order."""
        if self._index is None:
            return [v % self.field.modulus for v in values]
        if len(values) != len(self._index):
            raise R1CSError(f"expected {len(self._index)} values, got {len(values)}")
        out = [0] * len(values)
        p = self.field.modulus
        for w, pos in enumerate(self._index):
            out[pos] = values[w] % p
        return out

    # -- inspection -------------------------------------------------------------

    @property
    def num_variables(self) -> int:
        self._require_final()
        return self.layout.size

    def _require_final(self) -> None:
        if not self.finalized:
            raise R1CSError("system not finalized")

    def matrices(self) -> tuple[list[Row], list[Row], list[Row]]:
        self._require_final()
        return (
            [c.left for c in self.constraints],
            [c.right for c in self.constraints],
            [c.output for c in self.constraints],
        )

    def dense_matrices(self) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
        n = self.num_variables
        out = []
        for rows in self.matrices():
            dense = []
            for row in rows:
                r = [0] * n
                for i, c in row:
                    r[i] = c
                dense.append(r)
            out.append(dense)
        return tuple(out)

    def is_satisfied(self, assignment: Sequence[int]) -> tuple[bool, int | None]:
        """(ok, index of the first violated constraint or None)."""
        self._require_final()
        n = self.layout.size
        if len(assignment) != n:
            raise R1CSError(f"assignment has {len(assignment)} values, system has {n} wires")
        p = self.field.modulus
        z = [int(v) % p for v in assignment]
        if z[0] != 1:
            return False, None
        for k, con in enumerate(self.constraints):
            a = sum(c * z[i] for i, c in con.left) % p
            b = sum(c * z[i] for i, c in con.right) % p
            o = sum(c * z[i] for i, c in con.output) % p
            if a * b % p != o:
                return False, k
        return True, None

    # -- serialization ------------------------------------------------------------

    def to_bytes(self) -> bytes:
        self._require_final()
        buf = io.BytesIO()
        buf.write(MAGIC)
        buf.write(FORMAT_VERSION.to_bytes(2, "little"))
        mod = self.field.modulus.to_bytes(self.field.byte_size, "little")
        _write_varint(buf, len(mod))
        buf.write(mod)
        lay = self.layout
        _write_varint(buf, len(self.constraints))
        _write_varint(buf, lay.size)
        _write_varint(buf, lay.rounds)
        _write_varint(buf, lay.num_public)
        for s in lay.challenge_sizes:
            _write_varint(buf, s)
        for s in lay.round_sizes:
            _write_varint(buf, s)
        for con in self.constraints:
            for row in (con.left, con.right, con.output):
                _write_varint(buf, len(row))
                prev = 0
                for i, c in row:
                    _write_varint(buf, i - prev)
                    _write_varint(buf, c)
                    prev = i
        meta = json.dumps(self.meta, sort_keys=True, separators=(",", ":")).encode()
        _write_varint(buf, len(meta))
        buf.write(meta)
        return buf.getvalue()

    def digest(self) -> bytes:
        return hashlib.sha256(self.to_bytes()).digest()

    @classmethod
    def from_bytes(cls, data: bytes) -> ConstraintSystem:
        buf = io.BytesIO(data)
        if buf.read(4) != MAGIC:
            raise R1CSError("not a circuit file (bad magic)")
        version = int.from_bytes(_read_exact(buf, 2), "little")
        if version != FORMAT_VERSION:
            raise R1CSError(f"unsupported circuit format version {version}")
        mod = int.from_bytes(_read_exact(buf, _read_varint(buf)), "little")
        from .algebra.field import BN254_FR

        field = BN254_FR if mod == BN254_FR.modulus else PrimeField(mod)
        m = _read_varint(buf)
        n = _read_varint(buf)
        d = _read_varint(buf)
        num_public = _read_varint(buf)
        challenge_sizes = tuple(_read_varint(buf) for _ in range(d))
        round_sizes = tuple(_read_varint(buf) for _ in range(d + 1))
        layout = WitnessLayout(num_public, challenge_sizes, round_sizes)
        if layout.size != n:
            raise R1CSError("layout table disagrees with the wire count")
        layout.check_partition()
        constraints = []
        for _ in range(m):
            rows = []
            for _ in range(3):
                k = _read_varint(buf)
                row, prev = [], 0
                for _ in range(k):
                    i = prev + _read_varint(buf)
                    c = _read_varint(buf)
                    if i >= n or not 0 < c < mod:
                        raise R1CSError("malformed constraint entry")
                    row.append((i, c))
                    prev = i
                rows.append(row)
            constraints.append(Constraint(*rows))
        meta_len = _read_varint(buf)
        meta = json.loads(_read_exact(buf, meta_len).decode()) if meta_len else {}
        if buf.read(1):
            raise R1CSError("trailing bytes after circuit")
        cs = cls(field, d)
        cs._kinds = []
        cs.constraints = constraints
        cs.layout = layout
        cs._index = list(range(n))
        cs.meta = meta
        return cs


def _write_varint(buf: io.BytesIO, v: int) -> None:
    if v < 0:
        raise ValueError("varints are unsigned")
    while True:
        byte = v & 0x7F
        v >>= 7
        if v:
            buf.write(bytes([byte | 0x80]))
        else:
            buf.write(bytes([byte]))
            return


def _read_varint(buf: io.BytesIO) -> int:
    shift = 0
    out = 0
    while True:
        b = buf.read(1)
        if not b:
            raise R1CSError("truncated varint")
        out |= (b[0] & 0x7F) << shift
        if not b[0] & 0x80:
            return out
        shift += 7


def _read_exact(buf: io.BytesIO, k: int) -> bytes:
    data = buf.read(k)
    if len(data) != k:
        raise R1CSError("truncated circuit file")
    return data
