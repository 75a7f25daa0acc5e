"""Random bit sources for seed sampling.

``CounterRng`` is the deterministic generator: a 32-byte key ``K`` expands
into the byte stream ``SHA256(K || 0) || SHA256(K || 1) || ...`` where the
counter is an 8-byte big-endian integer. A request for ``n`` bits consumes
the next ``ceil(n / 8)`` bytes of that stream, reads them as a big-endian
integer and keeps the top ``n`` bits. Any implementation following these
three sentences reproduces the same seeds from the same key.
"""

from __future__ import annotations

import hashlib
import secrets

from .errors import ParameterError


class BitSource:
    """Byte stream with an ``n``-bit draw on top. Subclasses supply :meth:`read`."""

    def read(self, nbytes: int) -> bytes:
        raise NotImplementedError

    def getbits(self, nbits: int) -> int:
        if nbits < 0:
            raise ParameterError("negative bit count")
        nbytes = (nbits + 7) // 8
        raw = self.read(nbytes)
        if len(raw) != nbytes:
            raise RuntimeError(f"bit source returned {len(raw)} of {nbytes} bytes")
        return int.from_bytes(raw, "big") >> (8 * nbytes - nbits)


class SystemRng(BitSource):
    """Operating-system CSPRNG."""

    def read(self, nbytes):
        return secrets.token_bytes(nbytes)


class CounterRng(BitSource):
    """SHA-256 in counter mode, keyed by 32 bytes."""

    def __init__(self, key: bytes):
        if len(key) != 32:
            raise ParameterError(f"counter rng key must be 32 bytes, got {len(key)}")
        self.key = bytes(key)
        self._counter = 0
        self._buf = b""

    @classmethod
    def from_hex(cls, text: str) -> CounterRng:
        try:
            key = bytes.fromhex(text)
        except ValueError as exc:
            raise ParameterError(f"rng seed is not hex: {text!r}") from exc
        return cls(key)

    def read(self, nbytes):
        need = nbytes - len(self._buf)
        if need > 0:
            nblocks = (need + 31) // 32
            key, start = self.key, self._counter
            fresh = b"".join(
                hashlib.sha256(key + i.to_bytes(8, "big")).digest()
                for i in range(start, start + nblocks)
            )
            self._counter += nblocks
            self._buf += fresh
        out, self._buf = self._buf[:nbytes], self._buf[nbytes:]
        return out
