"""Comparator PA schemes: Toeplitz hashing and modular-arithmetic-only hashing.

The Toeplitz matrix ``T`` (``m`` rows, ``n`` columns) is defined by a
diagonal sequence ``d`` of ``n + m - 1`` bits with ``T[j, i] = d[m - 1 - j + i]``;
row 0 starts at ``d[m - 1]`` and each following row starts one index lower.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from gmpy2 import mpz

from .errors import ParameterError
from .keybuf import KeyBuffer
from .mersenne import to_big, top_bits


@dataclass(frozen=True)
class ToeplitzSeed:
    diagonal: KeyBuffer
    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ParameterError(f"Toeplitz dimensions must be positive, got {self.m}x{self.n}")
        if self.diagonal.length != self.n + self.m - 1:
            raise ParameterError(
                f"diagonal has {self.diagonal.length} bits, a {self.m}x{self.n} matrix needs {self.n + self.m - 1}"
            )


@dataclass(frozen=True)
class MhOnlySeed:
    b: int
    c: int
    n: int

    def __post_init__(self):
        if self.b <= 0 or self.b % 2 == 0 or self.b.bit_length() > self.n:
            raise ParameterError("b must be odd and below 2**n")
        if self.c < 0 or self.c.bit_length() > self.n:
            raise ParameterError("c must lie in [0, 2**n)")


def _check_dims(x: KeyBuffer, seed: ToeplitzSeed, m: int) -> None:
    if x.length != seed.n or m != seed.m:
        raise ParameterError(
            f"input of {x.length} bits and output of {m} bits do not match a {seed.m}x{seed.n} seed"
        )


def toeplitz_matrix(seed: ToeplitzSeed) -> np.ndarray:
    d = seed.diagonal.to_numpy()
    rows = np.arange(seed.m)[:, None]
    cols = np.arange(seed.n)[None, :]
    return d[seed.m - 1 - rows + cols]


def toeplitz_pa_naive(x: KeyBuffer, seed: ToeplitzSeed, m: int) -> KeyBuffer:
    """Explicit matrix-vector product over GF(2)."""
    _check_dims(x, seed, m)
    T = toeplitz_matrix(seed).astype(np.int64)
    return KeyBuffer.from_numpy((T @ x.to_numpy().astype(np.int64)) & 1)


def _pack(bits: np.ndarray, width: int):
    """Integer with bit ``bits[i]`` placed at position ``width * i``."""
    nbytes = (width * len(bits) + 7) // 8 + 1
    buf = np.zeros(nbytes, dtype=np.uint8)
    pos = np.flatnonzero(bits).astype(np.int64) * width
    np.bitwise_or.at(buf, pos >> 3, (1 << (pos & 7)).astype(np.uint8))
    return mpz.from_bytes(buf.tobytes(), "little")


def _slot_parities(value, width: int, count: int) -> np.ndarray:
    """Lowest bit of each ``width``-bit slot ``0 .. count-1`` of ``value``."""
    nbytes = (width * count + 7) // 8 + 8
    raw = np.frombuffer(value.to_bytes(max(nbytes, (value.bit_length() + 7) // 8), "little"),
                        dtype=np.uint8)
    pos = np.arange(count, dtype=np.int64) * width
    return (raw[pos >> 3] >> (pos & 7).astype(np.uint8)) & 1


# Below this many packed bits the slots are built with plain ints.
_SMALL_PACKED_BITS = 4096


@lru_cache(maxsize=1 << 16)
def _spread(value: int, nbits: int, width: int, reverse: bool) -> int:
    """Move bit ``i`` of ``value`` (LSB-first) to position ``width * i``;
    with ``reverse`` bit ``nbits - 1 - i`` goes there instead."""
    out = 0
    for i in range(nbits):
        src = nbits - 1 - i if reverse else i
        if value >> src & 1:
            out |= 1 << (width * i)
    return out


def _toeplitz_small(d: int, x: int, n: int, m: int, width: int) -> int:
    # slot i of D holds diagonal bit i, slot l of X holds input bit n-1-l
    conv = _spread(d, n + m - 1, width, True) * _spread(x, n, width, False)
    out = 0
    for u in range(m):
        out |= (conv >> (width * (u + n - 1)) & 1) << u
    return out


def toeplitz_pa_fast(x: KeyBuffer, seed: ToeplitzSeed, m: int, block_rows: int | None = None) -> KeyBuffer:
    """Toeplitz hashing by exact big-integer convolution.

    Bits of the diagonal and of the reversed input are spread into slots
    wide enough that no convolution sum carries into the next slot; one
    integer product then yields every sum exactly and the output bits are
    the slot parities. No floating point is involved.

    ``block_rows`` splits the output into independent row blocks, each a
    Toeplitz product of its own over the whole input.
    """
    _check_dims(x, seed, m)
    n = seed.n
    width = max(n.bit_length() + 1, 2)
    if block_rows is None and width * (n + m) <= _SMALL_PACKED_BITS:
        return KeyBuffer.from_int(_toeplitz_small(seed.diagonal.integer, x.integer, n, m, width), m)
    d = seed.diagonal.to_numpy()
    xr = x.to_numpy()[::-1]
    packed_x = to_big(_pack(xr, width))
    step = block_rows or m
    out = []
    for j0 in range(0, m, step):
        rows = min(step, m - j0)
        # rows j0 .. j0+rows-1 use diagonal entries m-j0-rows .. m-1-j0+n-1
        lo = m - j0 - rows
        sub = d[lo:lo + n + rows - 1]
        conv = int(to_big(_pack(sub, width)) * packed_x)
        # row j of the block is coefficient (rows - 1 - j) + (n - 1)
        par = _slot_parities(conv, width, n + rows - 1)
        out.append(par[n - 1:n - 1 + rows][::-1])
    return KeyBuffer.from_numpy(np.concatenate(out))


def mh_only_pa(x: KeyBuffer, seed: MhOnlySeed, m: int) -> KeyBuffer:
    """Top ``m`` bits of ``(b * x + c) mod 2**n`` over the whole input."""
    n = seed.n
    if x.length != n:
        raise ParameterError(f"input has {x.length} bits, seed is for n={n}")
    if not 1 <= m <= n:
        raise ParameterError(f"output length m={m} must lie in [1, n={n}]")
    v = to_big(seed.b) * to_big(x.integer) + to_big(seed.c)
    return KeyBuffer.from_int(top_bits(v, n, m), m)
