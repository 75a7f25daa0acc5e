"""The MMH and MH universal hash families and their seeds.

MMH maps a vector ``x`` of ``k`` residues mod ``p = 2**gamma - 1`` to
``sum(a_i * x_i) mod p``. MH maps ``y < 2**alpha`` to the top ``beta`` bits
of ``(b * y + c) mod 2**alpha`` with ``b`` odd.

Seed file layout (all integers big-endian)::

    header   3s  magic  b"PAS"
             B   version (1)
             I   gamma
             I   k
             I   alpha
    record   k + 2 fields, each  I byte-length  then the value bytes,
             in the order a_1 .. a_k, b, c

A file holds one or more records after a single header.
"""

from __future__ import annotations

import hashlib
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence


from .errors import KeyFormatError, ParameterError
from .mersenne import (
    FieldElement,
    check_exponent,
    fold,
    modulus,
    native,
    top_bits,
)
from .rng import BitSource

SEED_MAGIC = b"PAS"
SEED_VERSION = 1
_SEED_HEADER = struct.Struct(">3sBIII")
_LEN = struct.Struct(">I")


@dataclass(frozen=True)
class MmhSeed:
    """Selects ``g_a`` from MMH: the coefficient vector ``a``."""

    a: tuple
    gamma: int
    k: int

    def __post_init__(self):
        check_exponent(self.gamma)
        object.__setattr__(self, "a", tuple(self.a))
        if self.k < 1 or len(self.a) != self.k:
            raise ParameterError(f"MMH seed needs k={self.k} >= 1 coefficients, got {len(self.a)}")
        for ai in self.a:
            if not isinstance(ai, FieldElement) or ai.gamma != self.gamma:
                raise ParameterError("MMH coefficients must be FieldElements of the seed's field")

    @classmethod
    def from_ints(cls, values: Sequence[int], gamma: int) -> MmhSeed:
        return cls(tuple(FieldElement(v, gamma) for v in values), gamma, len(values))


@dataclass(frozen=True)
class MhSeed:
    """Selects ``h_{b,c}`` from MH over ``Z_{2**alpha}``."""

    b: int
    c: int
    alpha: int

    def __post_init__(self):
        if self.alpha < 1:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.b or self.b.bit_length() > self.alpha or self.b % 2 == 0:
            raise ParameterError("b must be odd and below 2**alpha")
        if self.c < 0 or self.c.bit_length() > self.alpha:
            raise ParameterError("c must lie in [0, 2**alpha)")
        object.__setattr__(self, "b", native(self.b, self.alpha))
        object.__setattr__(self, "c", native(self.c, self.alpha))


def _check_vector(seed: MmhSeed, x: Sequence[FieldElement]) -> None:
    if len(x) != seed.k:
        raise ParameterError(f"expected {seed.k} blocks, got {len(x)}")
    for xi in x:
        if xi.gamma != seed.gamma:
            raise ParameterError(f"block exponent {xi.gamma} does not match seed exponent {seed.gamma}")


def mmh_eval(seed: MmhSeed, x: Sequence[FieldElement], workers: int = 1) -> FieldElement:
    """Evaluate ``g_a(x) = sum(a_i * x_i) mod p``.

    Every product and every partial sum is reduced immediately, so no
    intermediate exceeds ``2 * gamma + 1`` bits. With ``workers > 1`` the
    products are computed on a thread pool; the sum is always accumulated in
    index order.
    """
    _check_vector(seed, x)
    gamma = seed.gamma

    def product(i):
        return fold(seed.a[i].value * x[i].value, gamma)

    if workers > 1 and seed.k > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            products = list(pool.map(product, range(seed.k)))
    else:
        products = [product(i) for i in range(seed.k)]
    acc = native(0, gamma)
    for y in products:
        acc = fold(acc + y, gamma)
    return FieldElement(acc, gamma)


def mmh_partial(seed: MmhSeed, x: Sequence[FieldElement], indices) -> FieldElement:
    """Partial MMH sum over a subset of block indices.

    Partial results over any partition of ``range(k)`` add up (mod p) to
    :func:`mmh_eval`.
    """
    _check_vector(seed, x)
    gamma = seed.gamma
    acc = native(0, gamma)
    for i in indices:
        acc = fold(acc + fold(seed.a[i].value * x[i].value, gamma), gamma)
    return FieldElement(acc, gamma)


def mh_eval(seed: MhSeed, y: int, beta: int):
    """Top ``beta`` bits of ``(b * y + c) mod 2**alpha``."""
    alpha = seed.alpha
    if not 1 <= beta <= alpha:
        raise ParameterError(f"output width beta={beta} must lie in [1, alpha={alpha}]")
    if y < 0 or y.bit_length() > alpha:
        raise ParameterError(f"input does not fit in alpha={alpha} bits")
    return top_bits(seed.b * native(y, alpha) + seed.c, alpha, beta)


def sample_mmh_seed(rng: BitSource, gamma: int, k: int) -> MmhSeed:
    """Draw ``a`` uniformly from ``Z_p**k``.

    Each coefficient is a ``gamma``-bit draw, redrawn while it equals the
    all-ones pattern.
    """
    check_exponent(gamma)
    if k < 1:
        raise ParameterError(f"block count must be positive, got {k}")
    p = modulus(gamma)
    a = []
    while len(a) < k:
        v = rng.getbits(gamma)
        if v != p:
            a.append(FieldElement(v, gamma))
    return MmhSeed(tuple(a), gamma, k)


def sample_mh_seed(rng: BitSource, alpha: int) -> MhSeed:
    """Draw ``b`` uniformly among odd residues and ``c`` uniformly in ``Z_{2**alpha}``."""
    if alpha < 1:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    b = rng.getbits(alpha) | 1
    c = rng.getbits(alpha)
    return MhSeed(b, c, alpha)


def _put(value) -> bytes:
    nbytes = (value.bit_length() + 7) // 8
    raw = int(value).to_bytes(nbytes, "big") if nbytes else b""
    return _LEN.pack(nbytes) + raw


def encode_seeds(pairs: Sequence[tuple]) -> bytes:
    """Serialize one or more ``(MmhSeed, MhSeed)`` pairs sharing gamma, k, alpha."""
    if not pairs:
        raise ParameterError("no seeds to encode")
    first_g, first_h = pairs[0]
    header = _SEED_HEADER.pack(SEED_MAGIC, SEED_VERSION, first_g.gamma, first_g.k, first_h.alpha)
    out = [header]
    for g, h in pairs:
        if (g.gamma, g.k, h.alpha) != (first_g.gamma, first_g.k, first_h.alpha):
            raise ParameterError("all seed records in a file must share gamma, k and alpha")
        out.extend(_put(ai.value) for ai in g.a)
        out.append(_put(h.b))
        out.append(_put(h.c))
    return b"".join(out)


def decode_seeds(blob: bytes) -> list:
    """Inverse of :func:`encode_seeds`."""
    if len(blob) < _SEED_HEADER.size:
        raise KeyFormatError("seed file shorter than its header")
    magic, version, gamma, k, alpha = _SEED_HEADER.unpack_from(blob)
    if magic != SEED_MAGIC:
        raise KeyFormatError(f"bad seed file magic {magic!r}")
    if version != SEED_VERSION:
        raise KeyFormatError(f"unsupported seed file version {version}")
    pos = _SEED_HEADER.size
    fields = []
    while pos < len(blob):
        if pos + _LEN.size > len(blob):
            raise KeyFormatError("truncated seed field length")
        (nbytes,) = _LEN.unpack_from(blob, pos)
        pos += _LEN.size
        if pos + nbytes > len(blob):
            raise KeyFormatError("truncated seed field")
        fields.append(int.from_bytes(blob[pos:pos + nbytes], "big"))
        pos += nbytes
    per = k + 2
    if not fields or len(fields) % per:
        raise KeyFormatError(f"seed file holds {len(fields)} fields, not a multiple of {per}")
    pairs = []
    try:
        for r in range(0, len(fields), per):
            rec = fields[r:r + per]
            g = MmhSeed(tuple(FieldElement(v, gamma) for v in rec[:k]), gamma, k)
            h = MhSeed(rec[k], rec[k + 1], alpha)
            pairs.append((g, h))
    except ParameterError as exc:
        raise KeyFormatError(f"invalid seed record: {exc}") from exc
    return pairs


def seed_digest(pairs: Sequence[tuple]) -> str:
    """SHA-256 hex digest of the serialized seeds."""
    return hashlib.sha256(encode_seeds(pairs)).hexdigest()
