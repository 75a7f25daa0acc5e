"""Throughput benchmark across PA schemes and input sizes.

Each case times only the hashing stage: block loading plus hashing for
MMH-MH, the convolution for Toeplitz, the single product for MH-only.
Input and seed generation are excluded.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import platform
import resource
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .baselines import MhOnlySeed, ToeplitzSeed, mh_only_pa, toeplitz_pa_fast
from .errors import ParameterError
from .hashing import sample_mh_seed, sample_mmh_seed
from .keybuf import KeyBuffer
from .mersenne import BIGINT_ENGINE, MUL_THRESHOLD_BITS
from .pipeline import PaParams, derive_security_coefficient, pa_run, select_block_count, select_gamma
from .rng import CounterRng

log = logging.getLogger(__name__)

ALGORITHMS = ("mmh-mh", "toeplitz", "mh-only")
DEFAULT_SIZES = (10**6, 3 * 10**6, 10**7, 3 * 10**7, 10**8, 260_000_000)
DEFAULT_RATIO = 0.0972
DEFAULT_EPSILON = 1e-10
MIN_TRIALS = 3


@dataclass
class BenchRecord:
    algorithm: str
    n: int
    gamma: int
    k: int
    m: int
    trials: int
    median_seconds: float
    throughput_bps: float
    peak_rss_bytes: int
    timestamp: str
    status: str = "ok"
    reuse_seeds: bool = False


@dataclass
class BenchReport:
    machine: dict
    config: dict
    records: list = field(default_factory=list)

    def find(self, algorithm: str, n: int | None = None):
        for rec in self.records:
            if rec.algorithm == algorithm and (n is None or rec.n == n):
                return rec
        return None

    def to_jsonl(self) -> str:
        lines = [json.dumps({"type": "header", "machine": self.machine, "config": self.config})]
        # NaN is not valid JSON; skipped cases are written as null
        lines += [json.dumps({"type": "record", **_nan_to_none(asdict(r))}, allow_nan=False)
                  for r in self.records]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(BenchRecord.__dataclass_fields__)
        writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
        writer.writeheader()
        for rec in self.records:
            writer.writerow(asdict(rec))
        return buf.getvalue()

    @classmethod
    def from_jsonl(cls, text: str) -> BenchReport:
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        head = rows[0]
        recs = [BenchRecord(**{k: float("nan") if v is None else v for k, v in r.items() if k != "type"})
                for r in rows[1:]]
        return cls(head["machine"], head["config"], recs)

    def write(self, outdir, figure: bool = True) -> dict:
        """Write ``bench.jsonl``, ``bench.csv`` and, if asked, ``throughput.png``."""
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        paths = {"jsonl": outdir / "bench.jsonl", "csv": outdir / "bench.csv"}
        paths["jsonl"].write_text(self.to_jsonl())
        paths["csv"].write_text(self.to_csv())
        if figure:
            from .plotting import plot_throughput
            paths["figure"] = plot_throughput(self, outdir / "throughput.png")
        return paths


def machine_descriptor() -> dict:
    return {
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "cpus": os.cpu_count(),
        "python": sys.version.split()[0],
        "mul_threshold_bits": MUL_THRESHOLD_BITS,
        "bigint_engine": BIGINT_ENGINE,
    }


def _nan_to_none(row: dict) -> dict:
    return {k: None if isinstance(v, float) and math.isnan(v) else v for k, v in row.items()}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def _peak_rss() -> int:
    # ru_maxrss is KiB on Linux
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


def _random_key(gen: np.random.Generator, nbits: int) -> KeyBuffer:
    raw = bytearray(gen.bytes((nbits + 7) // 8))
    if nbits % 8:
        raw[-1] &= 0xFF ^ ((1 << (-nbits % 8)) - 1)
    return KeyBuffer(bytes(raw), nbits)


def mmh_params_for(target_n: int, ratio: float, epsilon: float = DEFAULT_EPSILON) -> PaParams:
    """Benchmark parameters: ``k`` from the ratio, largest fitting ``gamma``,
    output ``m = floor(ratio * n)`` capped at ``gamma - s``."""
    k = select_block_count(ratio)
    gamma = select_gamma(target_n, k)
    s = derive_security_coefficient(epsilon)
    n = k * gamma
    m = max(1, min(int(ratio * n), gamma - s))
    return PaParams(gamma=gamma, k=k, t=n - m - s, epsilon=epsilon, s=s, m=m, r=ratio)


def toeplitz_memory_estimate(n: int, m: int) -> int:
    width = n.bit_length() + 1
    operand = width * (n + m) // 8
    return 5 * operand


class _Case:
    """One (algorithm, n) benchmark: prepares inputs, runs timed trials."""

    def __init__(self, algorithm, params, gen, rng, reuse_seeds):
        self.algorithm = algorithm
        self.params = params
        self.gen = gen
        self.rng = rng
        self.reuse_seeds = reuse_seeds
        self._seed = None

    def _fresh_seed(self):
        p = self.params
        if self.algorithm == "mmh-mh":
            return sample_mmh_seed(self.rng, p.gamma, p.k), sample_mh_seed(self.rng, p.gamma)
        if self.algorithm == "toeplitz":
            return ToeplitzSeed(_random_key(self.gen, p.n + p.m - 1), p.n, p.m)
        b = int.from_bytes(self.gen.bytes((p.n + 7) // 8), "big") >> (-p.n % 8) | 1
        c = int.from_bytes(self.gen.bytes((p.n + 7) // 8), "big") >> (-p.n % 8)
        return MhOnlySeed(b, c, p.n)

    def seed(self):
        if self._seed is None or not self.reuse_seeds:
            self._seed = self._fresh_seed()
        return self._seed

    def trial(self) -> float:
        p = self.params
        seed = self.seed()
        x = _random_key(self.gen, p.n)
        if self.algorithm == "mmh-mh":
            start = time.perf_counter()
            pa_run(x, p, *seed)
        elif self.algorithm == "toeplitz":
            start = time.perf_counter()
            toeplitz_pa_fast(x, seed, p.m)
        else:
            start = time.perf_counter()
            _ = x.integer
            mh_only_pa(x, seed, p.m)
        return time.perf_counter() - start


def bench_compare(sizes, algorithms, ratio: float = DEFAULT_RATIO, trials: int = MIN_TRIALS,
                  reuse_seeds: bool = False, memory_budget: int = 1 << 30,
                  rng_seed: bytes = bytes(32)) -> BenchReport:
    """Time every algorithm at every target input size.

    For each target size the MMH-MH parameters fix the actual ``n = k * gamma``
    and output length ``m``; the baselines run at the same ``n`` and ``m``.
    Toeplitz cases whose packed operands would exceed ``memory_budget`` bytes
    are recorded as skipped.
    """
    algorithms = list(algorithms)
    if not algorithms:
        raise ParameterError("no algorithms selected")
    unknown = set(algorithms) - set(ALGORITHMS)
    if unknown:
        raise ParameterError(f"unknown algorithms: {sorted(unknown)}")
    if trials < MIN_TRIALS:
        raise ParameterError(f"at least {MIN_TRIALS} trials are required, got {trials}")
    sizes = sorted(int(s) for s in sizes)
    if not sizes:
        raise ParameterError("no sizes selected")

    report = BenchReport(machine_descriptor(), {
        "sizes": sizes, "algorithms": algorithms, "ratio": ratio, "trials": trials,
        "reuse_seeds": reuse_seeds, "timing": "hashing stage only, median of trials",
    })
    gen = np.random.default_rng(int.from_bytes(rng_seed[:8], "big"))
    rng = CounterRng(rng_seed)
    for target in sizes:
        params = mmh_params_for(target, ratio)
        for algo in algorithms:
            base = dict(algorithm=algo, n=params.n, gamma=params.gamma, k=params.k, m=params.m,
                        reuse_seeds=reuse_seeds)
            if algo == "toeplitz":
                need = toeplitz_memory_estimate(params.n, params.m)
                if need > memory_budget:
                    report.records.append(BenchRecord(
                        **base, trials=0, median_seconds=float("nan"), throughput_bps=float("nan"),
                        peak_rss_bytes=_peak_rss(), timestamp=_now(),
                        status=f"skipped: needs ~{need >> 20} MiB, budget {memory_budget >> 20} MiB"))
                    continue
            case = _Case(algo, params, gen, rng, reuse_seeds)
            try:
                times = [case.trial() for _ in range(trials)]
            except MemoryError:
                report.records.append(BenchRecord(
                    **base, trials=0, median_seconds=float("nan"), throughput_bps=float("nan"),
                    peak_rss_bytes=_peak_rss(), timestamp=_now(), status="skipped: out of memory"))
                continue
            med = statistics.median(times)
            report.records.append(BenchRecord(
                **base, trials=trials, median_seconds=med, throughput_bps=params.n / med,
                peak_rss_bytes=_peak_rss(), timestamp=_now()))
            log.info("%s n=%d: %.3f s, %.1f Mbps", algo, params.n, med, params.n / med / 1e6)
    return report
