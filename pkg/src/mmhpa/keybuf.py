"""Bit buffers and the ``PAKY`` key file format.

Bits are stored MSB-first: bit 0 of a buffer is the most significant bit of
its first byte. Unused trailing bits of the last byte are always zero.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Union

import numpy as np
from gmpy2 import mpz

from .errors import InsufficientInputError, KeyFormatError, ParameterError

KEY_MAGIC = b"PAKY"
KEY_VERSION = 1
_KEY_HEADER = struct.Struct(">4sBQ")

# Above this many bits the integer view is held as an mpz.
_MPZ_VIEW_BITS = 1 << 16


@dataclass(frozen=True, eq=False)
class KeyBuffer:
    """An ordered bit sequence with an explicit length.

    Parameters
    ----------
    data : bytes
        Packed bits, MSB-first, ``ceil(length / 8)`` bytes.
    length : int
        Number of meaningful bits.
    """

    data: bytes
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ParameterError(f"negative bit length {self.length}")
        if len(self.data) != (self.length + 7) // 8:
            raise ParameterError(
                f"{len(self.data)} bytes cannot hold exactly {self.length} bits"
            )
        pad = -self.length % 8
        if pad and self.data[-1] & ((1 << pad) - 1):
            raise ParameterError("padding bits of the last byte must be zero")

    @classmethod
    def empty(cls) -> KeyBuffer:
        return cls(b"", 0)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> KeyBuffer:
        arr = np.fromiter((int(b) for b in bits), dtype=np.uint8)
        return cls.from_numpy(arr)

    @classmethod
    def from_bitstring(cls, text: str) -> KeyBuffer:
        """Build from a string of ``0``/``1``; spaces and underscores are ignored."""
        cleaned = text.replace(" ", "").replace("_", "")
        if set(cleaned) - {"0", "1"}:
            raise ParameterError(f"not a bit string: {text!r}")
        return cls.from_bits(int(c) for c in cleaned)

    @classmethod
    def from_numpy(cls, bits: np.ndarray) -> KeyBuffer:
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.size and arr.max() > 1:
            raise ParameterError("bit array may only contain 0 and 1")
        return cls(np.packbits(arr).tobytes(), int(arr.size))

    @classmethod
    def from_int(cls, value, length: int) -> KeyBuffer:
        """Encode ``value`` as exactly ``length`` bits, most significant first."""
        if value < 0 or value.bit_length() > length:
            raise ParameterError(f"value does not fit in {length} bits")
        nbytes = (length + 7) // 8
        # int() first: other big-integer types do not convert to mpz directly
        shifted = (value if type(value) is mpz else mpz(int(value))) << (-length % 8)
        return cls(shifted.to_bytes(nbytes, "big"), length)

    def __len__(self):
        return self.length

    def __eq__(self, other):
        if not isinstance(other, KeyBuffer):
            return NotImplemented
        return self.length == other.length and self.data == other.data

    def __hash__(self):
        return hash((self.data, self.length))

    def __repr__(self):
        if self.length <= 64:
            return f"KeyBuffer({self.bitstring()!r})"
        return f"KeyBuffer(<{self.length} bits>)"

    @cached_property
    def integer(self):
        """The whole buffer read as one unsigned integer (bit 0 is the MSB)."""
        if not self.length:
            return 0
        if self.length >= _MPZ_VIEW_BITS:
            return mpz.from_bytes(self.data, "big") >> (-self.length % 8)
        return int.from_bytes(self.data, "big") >> (-self.length % 8)

    def window(self, start: int, width: int):
        """Integer value of bits ``[start, start + width)``."""
        if start < 0 or width < 0 or start + width > self.length:
            raise InsufficientInputError(
                f"window [{start}, {start + width}) exceeds {self.length}-bit buffer"
            )
        if self.length < _MPZ_VIEW_BITS:
            return (self.integer >> (self.length - start - width)) & ((1 << width) - 1)
        # read only the covering bytes; gmpy2 bit slicing is far slower
        first, last = start // 8, (start + width + 7) // 8
        if width < _MPZ_VIEW_BITS:
            chunk = int.from_bytes(self.data[first:last], "big")
            return (chunk >> (8 * last - start - width)) & ((1 << width) - 1)
        chunk = mpz.from_bytes(self.data[first:last], "big")
        return (chunk >> (8 * last - start - width)) & ((mpz(1) << width) - 1)

    def slice(self, start: int, stop: int) -> KeyBuffer:
        if not 0 <= start <= stop <= self.length:
            raise ParameterError(f"bad slice [{start}, {stop}) of {self.length} bits")
        if start % 8 == 0:
            nbytes = (stop - start + 7) // 8
            chunk = bytearray(self.data[start // 8:start // 8 + nbytes])
            pad = -(stop - start) % 8
            if pad:
                chunk[-1] &= 0xFF ^ ((1 << pad) - 1)
            return KeyBuffer(bytes(chunk), stop - start)
        return KeyBuffer.from_int(self.window(start, stop - start), stop - start)

    def to_numpy(self) -> np.ndarray:
        """Unpacked ``uint8`` array of the bits."""
        raw = np.frombuffer(self.data, dtype=np.uint8)
        return np.unpackbits(raw)[: self.length]

    def bits(self) -> list[int]:
        return self.to_numpy().tolist()

    def bitstring(self) -> str:
        return "".join(map(str, self.bits()))

    @staticmethod
    def concat(parts: Iterable[KeyBuffer]) -> KeyBuffer:
        parts = list(parts)
        if all(p.length % 8 == 0 for p in parts[:-1]):
            return KeyBuffer(b"".join(p.data for p in parts), sum(p.length for p in parts))
        return KeyBuffer.from_numpy(np.concatenate([p.to_numpy() for p in parts] or [np.zeros(0, np.uint8)]))


PathLike = Union[str, Path]


def encode_key(buf: KeyBuffer) -> bytes:
    return _KEY_HEADER.pack(KEY_MAGIC, KEY_VERSION, buf.length) + buf.data


def decode_key(blob: bytes) -> KeyBuffer:
    """Parse a ``PAKY`` key file image.

    A payload shorter than the declared bit length raises
    :class:`InsufficientInputError`; any other malformation raises
    :class:`KeyFormatError`.
    """
    if len(blob) < _KEY_HEADER.size:
        raise KeyFormatError("key file shorter than its header")
    magic, version, length = _KEY_HEADER.unpack_from(blob)
    if magic != KEY_MAGIC:
        raise KeyFormatError(f"bad key file magic {magic!r}")
    if version != KEY_VERSION:
        raise KeyFormatError(f"unsupported key file version {version}")
    payload = blob[_KEY_HEADER.size:]
    need = (length + 7) // 8
    if len(payload) < need:
        raise InsufficientInputError(
            f"key file truncated: header declares {length} bits, payload holds {8 * len(payload)}"
        )
    if len(payload) > need:
        raise KeyFormatError(f"{len(payload) - need} trailing bytes after key payload")
    try:
        return KeyBuffer(payload, length)
    except ParameterError as exc:
        raise KeyFormatError(str(exc)) from exc


def write_key_file(path: PathLike, buf: KeyBuffer) -> None:
    Path(path).write_bytes(encode_key(buf))


def read_key_file(path: PathLike) -> KeyBuffer:
    return decode_key(Path(path).read_bytes())
