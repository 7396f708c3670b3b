"""Fixed-width Gray code conversions.

Bit strings are tuples of 0/1 with index 0 the most significant position.
"""
from __future__ import annotations

from typing import Sequence

BitString = tuple[int, ...]


def _check_width(width: int) -> None:
    if width < 1:
        raise ValueError(f"width must be positive, got {width}")


def to_binary(m: int, width: int) -> BitString:
    _check_width(width)
    if m < 0 or m >= 1 << width:
        raise ValueError(f"{m} does not fit in {width} bits")
    return tuple((m >> (width - 1 - k)) & 1 for k in range(width))


def to_gray(m: int, width: int) -> BitString:
    """Gray code of ``m`` as a ``width``-bit string.

    The leading bit is copied from the binary form and every following bit
    is the XOR of the binary bit with its more significant neighbour.
    """
    b = to_binary(m, width)
    return (b[0],) + tuple(b[k] ^ b[k - 1] for k in range(1, width))


def from_gray(bits: Sequence[int]) -> int:
    if not bits or any(g not in (0, 1) for g in bits):
        raise ValueError(f"invalid bit string {bits!r}")
    value = 0
    acc = 0
    for g in bits:
        acc ^= g
        value = (value << 1) | acc
    return value


def differing_position(n: int, width: int) -> int:
    """Index of the single bit that changes between G(n) and G(n+1)."""
    if n < 0 or n + 1 >= 1 << width:
        raise ValueError(f"{n}+1 does not fit in {width} bits")
    g0, g1 = to_gray(n, width), to_gray(n + 1, width)
    (pos,) = [j for j in range(width) if g0[j] != g1[j]]
    return pos


def bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | b
    return value


def bits_to_str(bits: Sequence[int]) -> str:
    return "".join(str(b) for b in bits)
