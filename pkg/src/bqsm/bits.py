"""Bit-string helpers shared across modules.

Conventions: a bit-string of length n is either a str of '0'/'1', a numpy
uint8 array, or a packed int. Index 0 of the array corresponds to the
leftmost character and to the most significant bit of the packed int, so
``int(s, 2)`` and these helpers agree.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError

_BYTE_PARITY = np.array(
    [bin(v).count("1") & 1 for v in range(256)], dtype=np.uint8
)


def str_to_bits(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")


def bits_to_str(bits) -> str:
    return "".join("1" if b else "0" for b in bits)


def bits_to_int(bits) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def int_to_bits(v: int, n: int) -> np.ndarray:
    return np.array([(v >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)


def int_to_str(v: int, n: int) -> str:
    return format(v, "0{}b".format(n))


def parity(v: int) -> int:
    """Parity of the set bits of a non-negative int."""
    return bin(v).count("1") & 1


def parity_u64(a: np.ndarray) -> np.ndarray:
    """Elementwise parity of a uint64 array, via byte lookup."""
    b = a.astype(np.uint64).view(np.uint8).reshape(a.shape + (8,))
    return np.bitwise_xor.reduce(_BYTE_PARITY[b], axis=-1)


def all_strings(n: int) -> list[str]:
    if n > 24:
        raise InputError("refusing to enumerate 2^{} strings".format(n))
    return [int_to_str(v, n) for v in range(1 << n)]


def hamming(a: str, b: str) -> int:
    if len(a) != len(b):
        raise InputError("length mismatch")
    return sum(x != y for x, y in zip(a, b))
