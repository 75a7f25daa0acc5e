"""MMH-MH privacy amplification: parameters, single jobs and key streams."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional

from .errors import InsufficientInputError, ParameterError
from .hashing import MhSeed, MmhSeed, mh_eval, mmh_eval, sample_mh_seed, sample_mmh_seed
from .keybuf import KeyBuffer
from .mersenne import KNOWN_EXPONENTS, bits_to_field_blocks, check_exponent
from .rng import BitSource


def derive_security_coefficient(epsilon: float) -> int:
    """Smallest ``s >= 1`` with ``2**(-s/2 - 1) <= epsilon``."""
    if not 0 < epsilon < 1:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    # 2**(-s/2 - 1) <= eps  <=>  s >= -2*log2(eps) - 2
    bound = -2.0 * math.log2(epsilon) - 2.0
    s = max(1, math.ceil(bound))
    while s > 1 and 2.0 ** (-(s - 1) / 2 - 1) <= epsilon:
        s -= 1
    while 2.0 ** (-s / 2 - 1) > epsilon:
        s += 1
    return s


def select_block_count(r: float) -> int:
    """Largest block count allowed by compression ratio ``r``: ``floor(1/r)``."""
    if not 0 < r < 1:
        raise ParameterError(f"compression ratio must lie in (0, 1), got {r}")
    return math.floor(1 / r)


def select_gamma(target_n: int, k: int) -> int:
    """Largest known Mersenne exponent with ``k * gamma <= target_n``."""
    if k < 1:
        raise ParameterError(f"block count must be positive, got {k}")
    fitting = [g for g in KNOWN_EXPONENTS if k * g <= target_n]
    if not fitting:
        raise ParameterError(
            f"no Mersenne exponent fits target n={target_n} with k={k} "
            f"(needs n >= {k * KNOWN_EXPONENTS[0]})"
        )
    return fitting[-1]


@dataclass(frozen=True)
class PaParams:
    """Validated parameters of one MMH-MH job.

    ``s`` is the security margin actually applied, ``n - t - m``. It must be
    at least :func:`derive_security_coefficient` of ``epsilon``; it is larger
    only when a caller asks for a shorter output than the maximum.
    Use :meth:`derive` to fill ``m`` and ``s`` automatically.
    """

    gamma: int
    k: int
    t: int
    epsilon: float
    s: int
    m: int
    r: Optional[float] = None

    def __post_init__(self):
        check_exponent(self.gamma)
        if self.k < 1:
            raise ParameterError(f"block count must be positive, got {self.k}")
        if self.t < 0:
            raise ParameterError(f"leaked bits t must be nonnegative, got {self.t}")
        s_min = derive_security_coefficient(self.epsilon)
        if self.s < s_min:
            raise ParameterError(
                f"security coefficient s={self.s} is below {s_min} required for epsilon={self.epsilon}"
            )
        if self.m != self.n - self.t - self.s:
            raise ParameterError(f"m={self.m} differs from n - t - s = {self.n - self.t - self.s}")
        if self.m <= 0:
            raise ParameterError(f"no extractable key: m = n - t - s = {self.m}")
        if self.m + self.s > self.gamma:
            raise ParameterError(f"m + s = {self.m + self.s} exceeds gamma = {self.gamma}")
        if self.r is not None:
            kmax = select_block_count(self.r)
            if self.k > kmax:
                raise ParameterError(f"k={self.k} exceeds floor(1/r) = {kmax} for r={self.r}")

    @property
    def n(self) -> int:
        return self.k * self.gamma

    @classmethod
    def derive(cls, gamma, k, t, epsilon, r=None, m=None) -> PaParams:
        """Build parameters with the longest output the margin allows, or ``m`` if given."""
        check_exponent(gamma)
        s_min = derive_security_coefficient(epsilon)
        n = k * gamma
        if m is None:
            m = n - t - s_min
        return cls(gamma=gamma, k=k, t=t, epsilon=epsilon, s=n - t - m, m=m, r=r)

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma, "k": self.k, "n": self.n, "t": self.t, "s": self.s,
            "m": self.m, "epsilon": self.epsilon, "r": self.r,
        }


class PaResult(NamedTuple):
    output: KeyBuffer
    consumed_bits: int
    rejected_blocks: int


def _check_seeds(params: PaParams, g: MmhSeed, h: MhSeed) -> None:
    if g.gamma != params.gamma or g.k != params.k:
        raise ParameterError(
            f"MMH seed is for gamma={g.gamma}, k={g.k}; job needs gamma={params.gamma}, k={params.k}"
        )
    if h.alpha != params.gamma:
        raise ParameterError(f"MH seed alpha={h.alpha} must equal gamma={params.gamma}")


def hash_blocks(blocks, params: PaParams, g: MmhSeed, h: MhSeed, workers: int = 1) -> KeyBuffer:
    y = mmh_eval(g, blocks, workers=workers)
    return KeyBuffer.from_int(mh_eval(h, y.value, params.m), params.m)


def pa_run(stream: KeyBuffer, params: PaParams, mmh_seed: MmhSeed, mh_seed: MhSeed,
           offset: int = 0, workers: int = 1) -> PaResult:
    """Run one MMH-MH job on ``stream`` starting at bit ``offset``.

    Returns the ``m``-bit output together with the number of input bits
    consumed and the number of all-ones blocks skipped.
    """
    _check_seeds(params, mmh_seed, mh_seed)
    load = bits_to_field_blocks(stream, params.gamma, params.k, offset)
    out = hash_blocks(load.blocks, params, mmh_seed, mh_seed, workers=workers)
    return PaResult(out, load.consumed_bits, load.rejected_blocks)


def rng_seed_source(rng: BitSource, gamma: int, k: int) -> Iterator[tuple]:
    """Endless supply of fresh ``(MmhSeed, MhSeed)`` pairs with ``alpha = gamma``."""
    while True:
        yield sample_mmh_seed(rng, gamma, k), sample_mh_seed(rng, gamma)


@dataclass
class StreamResult:
    outputs: list
    seeds: list
    consumed_bits: int = 0
    rejected_blocks: int = 0
    remainder_bits: int = 0
    hash_seconds: float = 0.0
    reuse_seeds: bool = False
    job_offsets: list = field(default_factory=list)

    @property
    def jobs(self) -> int:
        return len(self.outputs)

    @property
    def throughput(self) -> float:
        """Input bits per second of hashing, ``nan`` if nothing was timed."""
        if self.hash_seconds <= 0:
            return float("nan")
        return self.consumed_bits / self.hash_seconds

    def output(self) -> KeyBuffer:
        return KeyBuffer.concat(self.outputs)


def pa_stream(stream: KeyBuffer, params: PaParams, seed_source: Iterable[tuple],
              reuse_seeds: bool = False, workers: int = 1) -> StreamResult:
    """Cut a long key stream into successive jobs and hash each one.

    Each job draws a fresh seed pair from ``seed_source`` unless
    ``reuse_seeds`` is set, in which case the first pair serves every job.
    Bits left over after the last complete job are reported in
    ``remainder_bits`` and never padded. With ``workers > 1`` distinct jobs
    are hashed concurrently; outputs keep stream order.
    """
    loads = []
    offset = 0
    start = time.perf_counter()
    while stream.length - offset >= params.n:
        try:
            load = bits_to_field_blocks(stream, params.gamma, params.k, offset)
        except InsufficientInputError:
            break
        loads.append((offset, load))
        offset += load.consumed_bits
    load_seconds = time.perf_counter() - start

    source = iter(seed_source)
    pairs = []
    for _ in loads:
        if reuse_seeds and pairs:
            pairs.append(pairs[0])
            continue
        try:
            pair = next(source)
        except StopIteration:
            raise ParameterError(f"seed source exhausted after {len(pairs)} jobs") from None
        _check_seeds(params, *pair)
        pairs.append(pair)

    def work(i):
        g, h = pairs[i]
        return hash_blocks(loads[i][1].blocks, params, g, h)

    start = time.perf_counter()
    if workers > 1 and len(loads) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(work, range(len(loads))))
    else:
        outputs = [work(i) for i in range(len(loads))]
    elapsed = load_seconds + time.perf_counter() - start

    return StreamResult(
        outputs=outputs,
        seeds=pairs,
        consumed_bits=offset,
        rejected_blocks=sum(load.rejected_blocks for _, load in loads),
        remainder_bits=stream.length - offset,
        hash_seconds=elapsed,
        reuse_seeds=reuse_seeds,
        job_offsets=[off for off, _ in loads],
    )
