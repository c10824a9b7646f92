"""Fiat-Shamir challenges for the multi-round prover.

H(a, g) = SHA-256(tag || version || a || g) read little-endian and reduced mod p, where
``a`` is the running accumulator (fixed-width little-endian) and ``g`` the canonical
compressed bytes of a round commitment. The chain starts from a hash of the serialized
verifying key so the verifier can recompute it from public data alone.
"""
from __future__ import annotations

import hashlib
import struct

from ..algebra.field import PrimeField

DOMAIN_TAG = b"zkinfer/ultragroth"
TRANSCRIPT_VERSION = 1


def _digest_to_scalar(field: PrimeField, digest: bytes) -> int:
    return int.from_bytes(digest, "little") % field.modulus


def fiat_shamir(field: PrimeField, accumulator: int, element: bytes, tag: bytes = DOMAIN_TAG) -> int:
    h = hashlib.sha256()
    h.update(tag)
    h.update(struct.pack("<H", TRANSCRIPT_VERSION))
    h.update(field.to_bytes(accumulator % field.modulus))
    h.update(bytes(element))
    return _digest_to_scalar(field, h.digest())


def initial_accumulator(field: PrimeField, vk_bytes: bytes, tag: bytes = DOMAIN_TAG) -> int:
    """a_0, bound to the whole verifying key (and through it to the circuit digest)."""
    h = hashlib.sha256()
    h.update(tag)
    h.update(struct.pack("<H", TRANSCRIPT_VERSION))
    h.update(b"vk")
    h.update(hashlib.sha256(vk_bytes).digest())
    return _digest_to_scalar(field, h.digest())


def expand_challenges(field: PrimeField, a: int, count: int, tag: bytes = DOMAIN_TAG) -> list[int]:
    """The round's challenge values: a itself, then H(a || j) for j = 1, 2, ..."""
    if count <= 0:
        return []
    out = [a % field.modulus]
    for j in range(1, count):
        h = hashlib.sha256()
        h.update(tag)
        h.update(struct.pack("<H", TRANSCRIPT_VERSION))
        h.update(b"expand")
        h.update(field.to_bytes(a % field.modulus))
        h.update(struct.pack("<I", j))
        out.append(_digest_to_scalar(field, h.digest()))
    return out


class Transcript:
    """The accumulator chain a_0, a_1, ..; ``hashes`` counts the chain steps H(a_i, pi_C<i>)."""

    def __init__(self, field: PrimeField, a0: int, tag: bytes = DOMAIN_TAG):
        self.field = field
        self.tag = tag
        self.accumulator = a0
        self.hashes = 0

    def absorb(self, element: bytes, count: int) -> list[int]:
        self.accumulator = fiat_shamir(self.field, self.accumulator, element, self.tag)
        self.hashes += 1
        return expand_challenges(self.field, self.accumulator, count, self.tag)
