"""Key, proof and trapdoor types with their file formats.

Every binary file starts with the same header:

    magic (4 bytes) | version u16 | engine id (u8 length + ascii) | circuit digest (32 bytes)

followed by counts as little-endian u32 and group elements in their canonical
compressed encodings.
"""
from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Any

from ..algebra.engine import BilinearEngine, engine_from_id
from ..r1cs import WitnessLayout
from .transcript import DOMAIN_TAG, initial_accumulator

FORMAT_VERSION = 1
PK_MAGIC = b"UNPK"
VK_MAGIC = b"UNVK"
PROOF_MAGIC = b"UNPF"


class KeyFormatError(ValueError):
    """Malformed, truncated or mismatched key/proof bytes."""


# -- byte plumbing --------------------------------------------------------------------------


class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def u8(self, v: int) -> None:
        self.buf.write(struct.pack("<B", v))

    def u16(self, v: int) -> None:
        self.buf.write(struct.pack("<H", v))

    def u32(self, v: int) -> None:
        self.buf.write(struct.pack("<I", v))

    def raw(self, b: bytes) -> None:
        self.buf.write(b)

    def blob(self, b: bytes) -> None:
        self.u32(len(b))
        self.buf.write(b)

    def header(self, magic: bytes, engine_id: str, digest: bytes) -> None:
        self.raw(magic)
        self.u16(FORMAT_VERSION)
        eid = engine_id.encode("ascii")
        self.u8(len(eid))
        self.raw(eid)
        if len(digest) != 32:
            raise KeyFormatError("circuit digest must be 32 bytes")
        self.raw(digest)

    def elements(self, group, items) -> None:
        self.u32(len(items))
        for x in items:
            self.raw(group.to_bytes(x))

    def getvalue(self) -> bytes:
        return self.buf.getvalue()


class _Reader:
    def __init__(self, data: bytes):
        self.buf = io.BytesIO(bytes(data))
        self.size = len(data)

    def take(self, k: int) -> bytes:
        b = self.buf.read(k)
        if len(b) != k:
            raise KeyFormatError("truncated input")
        return b

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def blob(self) -> bytes:
        return self.take(self.u32())

    def header(self, magic: bytes) -> tuple[BilinearEngine, bytes]:
        got = self.take(4)
        if got != magic:
            raise KeyFormatError(f"bad magic {got!r}, expected {magic!r}")
        version = self.u16()
        if version != FORMAT_VERSION:
            raise KeyFormatError(f"unsupported format version {version}")
        eid = self.take(self.u8()).decode("ascii", errors="replace")
        try:
            engine = engine_from_id(eid)
        except ValueError as exc:
            raise KeyFormatError(str(exc)) from None
        return engine, self.take(32)

    def element(self, group) -> Any:
        try:
            return group.from_bytes(self.take(group.byte_size))
        except ValueError as exc:
            raise KeyFormatError(f"bad {group.name} element: {exc}") from None

    def elements(self, group, limit: int | None = None) -> list:
        n = self.u32()
        if n * group.byte_size > self.size:
            raise KeyFormatError("element count exceeds the input size")
        if limit is not None and n != limit:
            raise KeyFormatError(f"expected {limit} {group.name} elements, found {n}")
        return [self.element(group) for _ in range(n)]

    def done(self) -> None:
        if self.buf.read(1):
            raise KeyFormatError("trailing bytes")


# -- trapdoor -------------------------------------------------------------------------------


@dataclass(frozen=True)
class Trapdoor:
    """The setup secrets. Only setup (with ``keep_trapdoor``), tests and the simulator hold one."""

    alpha: int
    beta: int
    gamma: int
    deltas: tuple[int, ...]
    tau: int

    def to_json(self, digest: bytes = b"") -> str:
        return json.dumps({
            "alpha": hex(self.alpha), "beta": hex(self.beta), "gamma": hex(self.gamma),
            "deltas": [hex(d) for d in self.deltas], "tau": hex(self.tau), "digest": digest.hex(),
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> Trapdoor:
        d = json.loads(text)
        return cls(int(d["alpha"], 16), int(d["beta"], 16), int(d["gamma"], 16),
                   tuple(int(x, 16) for x in d["deltas"]), int(d["tau"], 16))


# -- verifying key --------------------------------------------------------------------------


@dataclass
class VerifyingKey:
    engine: BilinearEngine
    digest: bytes
    layout: WitnessLayout
    g1: Any
    g2: Any
    gamma_g2: Any
    delta_g2: list
    alpha_beta: Any
    ic: list
    tag: bytes = DOMAIN_TAG

    @property
    def rounds(self) -> int:
        return self.layout.rounds

    @property
    def num_public(self) -> int:
        return self.layout.num_public

    def to_bytes(self) -> bytes:
        e = self.engine
        w = _Writer()
        w.header(VK_MAGIC, e.engine_id, self.digest)
        w.blob(self.tag)
        _write_layout(w, self.layout)
        w.raw(e.g1.to_bytes(self.g1))
        w.raw(e.g2.to_bytes(self.g2))
        w.raw(e.g2.to_bytes(self.gamma_g2))
        w.elements(e.g2, self.delta_g2)
        w.raw(e.gt.to_bytes(self.alpha_beta))
        w.elements(e.g1, self.ic)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> VerifyingKey:
        r = _Reader(data)
        e, digest = r.header(VK_MAGIC)
        tag = r.blob()
        layout = _read_layout(r)
        g1, g2, gamma = r.element(e.g1), r.element(e.g2), r.element(e.g2)
        deltas = r.elements(e.g2, layout.rounds + 1)
        ab = r.element(e.gt)
        ic = r.elements(e.g1, len(layout.statement_range))
        r.done()
        return cls(e, digest, layout, g1, g2, gamma, deltas, ab, ic, tag)

    @cached_property
    def a0(self) -> int:
        return initial_accumulator(self.engine.scalar_field, self.to_bytes(), self.tag)


def _write_layout(w: _Writer, layout: WitnessLayout) -> None:
    w.u32(layout.num_public)
    w.u32(layout.rounds)
    for s in layout.challenge_sizes:
        w.u32(s)
    for s in layout.round_sizes:
        w.u32(s)


def _read_layout(r: _Reader) -> WitnessLayout:
    num_public = r.u32()
    d = r.u32()
    if d > 64:
        raise KeyFormatError(f"implausible round count {d}")
    ch = tuple(r.u32() for _ in range(d))
    rs = tuple(r.u32() for _ in range(d + 1))
    return WitnessLayout(num_public, ch, rs)


# -- proving key ----------------------------------------------------------------------------


@dataclass
class ProvingKey:
    vk: VerifyingKey
    domain_size: int
    alpha_g1: Any
    beta_g1: Any
    delta_g1: list
    beta_g2: Any
    tau_g1: list
    tau_g2: list
    h_query: list
    rounds: list[list] = dc_field(default_factory=list)

    @property
    def engine(self) -> BilinearEngine:
        return self.vk.engine

    @property
    def digest(self) -> bytes:
        return self.vk.digest

    @property
    def layout(self) -> WitnessLayout:
        return self.vk.layout

    def to_bytes(self) -> bytes:
        e = self.engine
        w = _Writer()
        w.header(PK_MAGIC, e.engine_id, self.digest)
        w.blob(self.vk.to_bytes())
        w.u32(self.domain_size)
        w.raw(e.g1.to_bytes(self.alpha_g1))
        w.raw(e.g1.to_bytes(self.beta_g1))
        w.elements(e.g1, self.delta_g1)
        w.raw(e.g2.to_bytes(self.beta_g2))
        w.elements(e.g1, self.tau_g1)
        w.elements(e.g2, self.tau_g2)
        w.elements(e.g1, self.h_query)
        for block in self.rounds:
            w.elements(e.g1, block)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> ProvingKey:
        r = _Reader(data)
        e, digest = r.header(PK_MAGIC)
        vk = VerifyingKey.from_bytes(r.blob())
        if vk.digest != digest or vk.engine.engine_id != e.engine_id:
            raise KeyFormatError("embedded verifying key does not match the proving key header")
        m = r.u32()
        alpha, beta = r.element(e.g1), r.element(e.g1)
        deltas = r.elements(e.g1, vk.rounds + 1)
        beta2 = r.element(e.g2)
        tau1 = r.elements(e.g1, m)
        tau2 = r.elements(e.g2, m)
        hq = r.elements(e.g1, max(m - 1, 0))
        blocks = [r.elements(e.g1, vk.layout.round_sizes[i]) for i in range(vk.rounds + 1)]
        r.done()
        return cls(vk, m, alpha, beta, deltas, beta2, tau1, tau2, hq, blocks)


# -- proofs and statements ----------------------------------------------------------------


@dataclass
class Proof:
    """pi_A in G1, pi_B in G2 and the d + 1 commitments pi_C<0..d> in G1."""

    engine: BilinearEngine
    digest: bytes
    pi_a: Any
    pi_b: Any
    pi_c: list

    @property
    def rounds(self) -> int:
        return len(self.pi_c) - 1

    def shape(self) -> dict:
        return {"G1": 1 + len(self.pi_c), "G2": 1}

    def to_bytes(self) -> bytes:
        e = self.engine
        w = _Writer()
        w.header(PROOF_MAGIC, e.engine_id, self.digest)
        w.raw(e.g1.to_bytes(self.pi_a))
        w.raw(e.g2.to_bytes(self.pi_b))
        w.elements(e.g1, self.pi_c)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> Proof:
        r = _Reader(data)
        e, digest = r.header(PROOF_MAGIC)
        a = r.element(e.g1)
        b = r.element(e.g2)
        cs = r.elements(e.g1)
        if not cs:
            raise KeyFormatError("a proof carries at least one C element")
        r.done()
        return cls(e, digest, a, b, cs)

    def to_json(self) -> str:
        e = self.engine
        return json.dumps({
            "engine": e.engine_id,
            "digest": self.digest.hex(),
            "pi_a": e.g1.to_bytes(self.pi_a).hex(),
            "pi_b": e.g2.to_bytes(self.pi_b).hex(),
            "pi_c": [e.g1.to_bytes(c).hex() for c in self.pi_c],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> Proof:
        try:
            d = json.loads(text)
            e = engine_from_id(d["engine"])
            return cls(
                e, bytes.fromhex(d["digest"]),
                e.g1.from_bytes(bytes.fromhex(d["pi_a"])),
                e.g2.from_bytes(bytes.fromhex(d["pi_b"])),
                [e.g1.from_bytes(bytes.fromhex(c)) for c in d["pi_c"]],
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise KeyFormatError(f"bad proof JSON: {exc}") from None


@dataclass
class Statement:
    """Public signals: the outputs, plus (optionally) the challenges the prover used."""

    outputs: list[int]
    challenges: list[list[int]] | None = None

    def to_json(self, field_bytes: int = 32) -> str:
        d = {"outputs": [_hex(v, field_bytes) for v in self.outputs]}
        return json.dumps(d, indent=1)

    @classmethod
    def from_json(cls, text: str) -> Statement:
        try:
            d = json.loads(text)
            outs = [int(v, 16) for v in d["outputs"]]
        except (KeyError, ValueError, TypeError, AttributeError) as exc:
            raise KeyFormatError(f"bad public io JSON: {exc}") from None
        return cls(outs)


def _hex(v: int, nbytes: int) -> str:
    return "0x" + format(v, f"0{2 * nbytes}x")
