"""Multi-scalar multiplication: the Pippenger bucket method and a naive reference."""
from __future__ import annotations

from typing import TYPE_CHECKING, Any, Sequence

if TYPE_CHECKING:
    from .engine import Group

PIPPENGER_THRESHOLD = 16


def double_and_add(group: Group, base: Any, k: int) -> Any:
    """Left-to-right binary scalar multiplication using only group additions."""
    k %= group.order
    acc = group.identity()
    for bit in bin(k)[2:] if k else "":
        acc = group.add(acc, acc)
        if bit == "1":
            acc = group.add(acc, base)
    return acc


def naive_msm(group: Group, bases: Sequence[Any], scalars: Sequence[int]) -> Any:
    if len(bases) != len(scalars):
        raise ValueError(f"msm length mismatch: {len(bases)} bases, {len(scalars)} scalars")
    acc = group.identity()
    for base, k in zip(bases, scalars):
        acc = group.add(acc, double_and_add(group, base, int(k)))
    return acc


def _window_bits(n: int) -> int:
    if n < 32:
        return 3
    return max(3, n.bit_length() - 2)


def pippenger(group: Group, bases: Sequence[Any], scalars: Sequence[int], window: int | None = None) -> Any:
    if len(bases) != len(scalars):
        raise ValueError(f"msm length mismatch: {len(bases)} bases, {len(scalars)} scalars")
    order = group.order
    pairs = [(b, int(k) % order) for b, k in zip(bases, scalars)]
    pairs = [(b, k) for b, k in pairs if k]
    if not pairs:
        return group.identity()
    c = window or _window_bits(len(pairs))
    mask = (1 << c) - 1
    nbits = max(k.bit_length() for _, k in pairs)
    add = group.add
    result = group.identity()
    for shift in range((nbits - 1) // c * c, -1, -c):
        for _ in range(c):
            result = add(result, result)
        buckets: list[Any] = [None] * (mask + 1)
        for b, k in pairs:
            idx = (k >> shift) & mask
            if idx:
                buckets[idx] = b if buckets[idx] is None else add(buckets[idx], b)
        # sum_j j * bucket_j via running suffix sums
        running = group.identity()
        window_sum = group.identity()
        for j in range(mask, 0, -1):
            if buckets[j] is not None:
                running = add(running, buckets[j])
            window_sum = add(window_sum, running)
        result = add(result, window_sum)
    return result


def msm(group: Group, bases: Sequence[Any], scalars: Sequence[int]) -> Any:
    """prod bases[i]^scalars[i]; bucketed above a small size threshold."""
    if len(bases) != len(scalars):
        raise ValueError(f"msm length mismatch: {len(bases)} bases, {len(scalars)} scalars")
    fast = group.fast_msm(bases, scalars)
    if fast is not None:
        return fast
    if len(bases) < PIPPENGER_THRESHOLD:
        acc = group.identity()
        for b, k in zip(bases, scalars):
            acc = group.add(acc, group.mul(b, int(k)))
        return acc
    return pippenger(group, bases, scalars)
