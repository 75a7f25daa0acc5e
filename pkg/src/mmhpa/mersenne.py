"""Arithmetic in Z_p for Mersenne primes p = 2**gamma - 1.

Reduction never divides: a value is folded as ``(x & p) + (x >> gamma)``
until it fits in ``gamma`` bits, and the single non-canonical pattern
``2**gamma - 1`` is mapped to 0.

Operands of fields with ``gamma >= MUL_THRESHOLD_BITS`` are held in a
big-integer engine with subquadratic multiplication: FLINT ``fmpz`` by
default, or GMP ``mpz`` when ``MMHPA_BIGINT=gmpy2``. Smaller fields stay on
native ints, which win below a few thousand bits.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from flint import fmpz
from gmpy2 import f_mod_2exp, mpz

from .errors import InsufficientInputError, ParameterError
from .keybuf import KeyBuffer

#: Exponents of the known Mersenne primes, excluding 2.
KNOWN_EXPONENTS = (
    3, 5, 7, 13, 17, 19, 31, 61, 89, 107, 127, 521, 607, 1279, 2203, 2281,
    3217, 4253, 4423, 9689, 9941, 11213, 19937, 21701, 23209, 44497, 86243,
    110503, 132049, 216091, 756839, 859433, 1257787, 1398269, 2976221,
    3021377, 6972593, 13466917, 20996011, 24036583, 25964951, 30402457,
    32582657, 37156667, 42643801, 43112609, 57885161, 74207281, 77232917,
    82589933, 136279841,
)
_EXPONENT_SET = frozenset(KNOWN_EXPONENTS)

# Benchmarked crossover (CPython 3.10, GMP 6.3): native ints are as fast up
# to ~1 kbit, GMP is 8x faster at 2 kbit.
MUL_THRESHOLD_BITS = int(os.environ.get("MMHPA_MUL_THRESHOLD", "2048"))

# FLINT multiplies 25-35% faster than GMP at 10-100 Mbit on the reference host.
_ENGINES = {"flint": fmpz, "gmpy2": mpz}
BIGINT_ENGINE = os.environ.get("MMHPA_BIGINT", "flint")
if BIGINT_ENGINE not in _ENGINES:
    raise ImportError(f"MMHPA_BIGINT must be one of {sorted(_ENGINES)}, got {BIGINT_ENGINE!r}")
_BIG = _ENGINES[BIGINT_ENGINE]


def to_big(value):
    """Convert an integer of any supported type to the big-integer engine."""
    if type(value) is _BIG:
        return value
    # fmpz and mpz do not convert into each other directly
    return _BIG(value if type(value) is int else int(value))


def top_bits(v, alpha: int, beta: int):
    """Top ``beta`` bits of ``v mod 2**alpha``."""
    if type(v) is mpz:
        # gmpy2 masking and bit slicing are far slower than this
        return f_mod_2exp(v, alpha) >> (alpha - beta)
    return (v & _low_mask(alpha, type(v) is fmpz)) >> (alpha - beta)


@lru_cache(maxsize=16)
def _low_mask(width: int, flint: bool):
    return (fmpz(1) << width) - 1 if flint else (1 << width) - 1


def check_exponent(gamma: int) -> int:
    """Return ``gamma`` if it is a known Mersenne exponent, else raise."""
    if not isinstance(gamma, int) or gamma not in _EXPONENT_SET:
        raise ParameterError(f"{gamma!r} is not a known Mersenne prime exponent")
    return gamma


def is_mersenne_exponent(gamma) -> bool:
    return gamma in _EXPONENT_SET


@lru_cache(maxsize=64)
def modulus(gamma: int):
    """p = 2**gamma - 1, as the integer type used for this field."""
    return native((1 << gamma) - 1, gamma)


def native(value, gamma: int):
    """Coerce ``value`` to the integer type used for operands of ``gamma``."""
    if gamma >= MUL_THRESHOLD_BITS:
        return to_big(value)
    return int(value)


@dataclass(frozen=True)
class FieldElement:
    """A canonical residue of Z_p, p = 2**gamma - 1."""

    value: int
    gamma: int

    def __post_init__(self):
        check_exponent(self.gamma)
        v = self.value
        if v < 0 or v.bit_length() > self.gamma or v == modulus(self.gamma):
            raise ParameterError(f"value is not a canonical residue mod 2**{self.gamma} - 1")
        object.__setattr__(self, "value", native(v, self.gamma))

    def __int__(self):
        return int(self.value)

    def __repr__(self):
        if self.gamma <= 127:
            return f"FieldElement({int(self.value)}, gamma={self.gamma})"
        return f"FieldElement(<{self.value.bit_length()} bits>, gamma={self.gamma})"


def element(value: int, gamma: int) -> FieldElement:
    """Validate ``gamma`` and wrap ``value``."""
    return FieldElement(value, check_exponent(gamma))


def fold(x, gamma: int):
    """Reduce a nonnegative integer mod 2**gamma - 1 by shift-and-add.

    The result is canonical. No width check; see :func:`reduce_mersenne`.
    """
    p = modulus(gamma)
    while x.bit_length() > gamma:
        x = (x & p) + (x >> gamma)
    return 0 if x == p else x


def reduce_mersenne(x: int, gamma: int) -> FieldElement:
    """Reduce ``x`` modulo the Mersenne prime 2**gamma - 1.

    Parameters
    ----------
    x : int
        Nonnegative integer narrower than ``2 * gamma + 1`` bits, which covers
        a product of two residues plus a carry.
    gamma : int
        Mersenne exponent.

    Returns
    -------
    FieldElement
        The canonical residue in ``[0, 2**gamma - 2]``.

    Raises
    ------
    ParameterError
        If ``x`` is negative or too wide.
    """
    check_exponent(gamma)
    if x < 0:
        raise ParameterError("cannot reduce a negative integer")
    if x.bit_length() > 2 * gamma + 1:
        raise ParameterError(
            f"{x.bit_length()}-bit operand exceeds the {2 * gamma + 1}-bit reduction width"
        )
    return FieldElement(fold(native(x, gamma), gamma), gamma)


def _same_field(a: FieldElement, b: FieldElement) -> int:
    if a.gamma != b.gamma:
        raise ParameterError(f"exponent mismatch: {a.gamma} vs {b.gamma}")
    return a.gamma


def field_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    gamma = _same_field(a, b)
    return FieldElement(fold(a.value * b.value, gamma), gamma)


def field_add(a: FieldElement, b: FieldElement) -> FieldElement:
    gamma = _same_field(a, b)
    return FieldElement(fold(a.value + b.value, gamma), gamma)


class BlockLoad(NamedTuple):
    blocks: list
    consumed_bits: int
    rejected_blocks: int


def bits_to_field_blocks(stream: KeyBuffer, gamma: int, k: int, offset: int = 0) -> BlockLoad:
    """Cut ``k`` field elements out of a bit stream.

    Successive ``gamma``-bit windows starting at ``offset`` are read MSB-first.
    A window equal to ``2**gamma - 1`` is discarded and the next window read
    in its place.

    Returns
    -------
    BlockLoad
        ``(blocks, consumed_bits, rejected_blocks)`` with
        ``consumed_bits == gamma * (k + rejected_blocks)``.

    Raises
    ------
    InsufficientInputError
        If the stream ends before ``k`` blocks are accepted.
    """
    check_exponent(gamma)
    if k < 1:
        raise ParameterError(f"block count must be positive, got {k}")
    p = modulus(gamma)
    blocks = []
    rejected = 0
    pos = offset
    while len(blocks) < k:
        if pos + gamma > stream.length:
            raise InsufficientInputError(
                f"stream exhausted after {len(blocks)} of {k} blocks "
                f"({rejected} rejected, {stream.length - pos} bits left)",
                filled=len(blocks),
                needed=k,
            )
        word = native(stream.window(pos, gamma), gamma)
        pos += gamma
        if word == p:
            rejected += 1
            continue
        blocks.append(FieldElement(word, gamma))
    return BlockLoad(blocks, pos - offset, rejected)
