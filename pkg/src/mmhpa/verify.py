"""Self-checks: embedded vectors (quick) and brute-force oracles (full)."""

from __future__ import annotations

import math
import random
import time
from typing import Callable

import numpy as np

from .baselines import (
    MhOnlySeed,
    ToeplitzSeed,
    mh_only_pa,
    toeplitz_pa_fast,
    toeplitz_matrix,
    toeplitz_pa_naive,
)
from .hashing import MhSeed, MmhSeed, mh_eval, mmh_eval
from .keybuf import KeyBuffer
from .mersenne import (
    FieldElement,
    bits_to_field_blocks,
    field_add,
    field_mul,
    reduce_mersenne,
)
from .errors import InsufficientInputError
from .pipeline import (
    PaParams,
    derive_security_coefficient,
    pa_run,
    select_block_count,
    select_gamma,
)
from .security import (
    Distribution,
    EavesdropModel,
    OracleResult,
    brute_force_pa_distance,
    brute_force_universality,
    collision_distance_bound,
    composed_family,
    conditional_collision,
    eval_bounds,
    mh_family,
    mmh_family,
    renyi_entropy,
    shannon_entropy,
    statistical_distance,
)


def reference_pa(bits: str, gamma: int, k: int, m: int, a, b: int, c: int) -> str:
    """Straight-line MMH-MH on a ``0``/``1`` string with plain ``%`` and ``//``."""
    p = 2**gamma - 1
    xs, pos = [], 0
    while len(xs) < k:
        word = int(bits[pos:pos + gamma], 2)
        pos += gamma
        if word != p:
            xs.append(word)
    y = sum(ai * xi for ai, xi in zip(a, xs)) % p
    z = ((b * y + c) % 2**gamma) // 2 ** (gamma - m)
    return format(z, f"0{m}b")


def _toy_params(gamma, k, m, epsilon=0.5):
    s = derive_security_coefficient(epsilon)
    return PaParams(gamma=gamma, k=k, t=gamma * k - m - s, epsilon=epsilon, s=s, m=m)


def _vectors() -> list:
    fe = FieldElement
    out = []

    def vec(name, got, want):
        out.append(OracleResult(name, {}, float(got == want), 1.0, got == want,
                                "" if got == want else f"got {got!r}, want {want!r}"))

    vec("reduce 20 mod 7", int(reduce_mersenne(20, 3)), 6)
    vec("reduce 7 mod 7", int(reduce_mersenne(7, 3)), 0)
    vec("reduce 50 mod 7", int(reduce_mersenne(50, 3)), 1)
    vec("mul 3*5 mod 7", int(field_mul(fe(3, 3), fe(5, 3))), 1)
    vec("add 4+5 mod 7", int(field_add(fe(4, 3), fe(5, 3))), 2)
    vec("add 3+4 mod 7", int(field_add(fe(3, 3), fe(4, 3))), 0)
    load = bits_to_field_blocks(KeyBuffer.from_bitstring("111010110"), 3, 2)
    vec("block reload", ([int(v) for v in load.blocks], load.consumed_bits, load.rejected_blocks), ([2, 6], 9, 1))
    try:
        bits_to_field_blocks(KeyBuffer.from_bitstring("111111111"), 3, 1)
        vec("all-ones stream rejected", False, True)
    except InsufficientInputError:
        vec("all-ones stream rejected", True, True)
    vec("mmh (3,5).(2,6)", int(mmh_eval(MmhSeed.from_ints([3, 5], 3), [fe(2, 3), fe(6, 3)])), 1)
    vec("mh a=3 b=2 (3,1) y=5", mh_eval(MhSeed(3, 1, 3), 5, 2), 0)
    vec("mh a=4 b=2 (5,3) y=7", mh_eval(MhSeed(5, 3, 4), 7, 2), 1)
    res = pa_run(KeyBuffer.from_bitstring("010110"), _toy_params(3, 2, 2),
                 MmhSeed.from_ints([3, 5], 3), MhSeed(3, 1, 3))
    vec("pa_run toy job", res.output.bitstring(), "10")
    vec("toeplitz naive 2x2", toeplitz_pa_naive(KeyBuffer.from_bitstring("10"),
        ToeplitzSeed(KeyBuffer.from_bitstring("111"), 2, 2), 2).bitstring(), "11")
    vec("toeplitz fast 2x2", toeplitz_pa_fast(KeyBuffer.from_bitstring("10"),
        ToeplitzSeed(KeyBuffer.from_bitstring("111"), 2, 2), 2).bitstring(), "11")
    vec("mh-only n=4 m=2", mh_only_pa(KeyBuffer.from_bitstring("0111"), MhOnlySeed(5, 3, 4), 2).bitstring(), "01")
    vec("s for eps=1e-10", derive_security_coefficient(1e-10), 65)
    vec("k for r=0.2957", select_block_count(0.2957), 3)
    vec("k for r=0.0972", select_block_count(0.0972), 10)
    vec("gamma for n=2.6e8, k=10", select_gamma(260_000_000, 10), 25964951)
    return out


def _reduction_identities(count=2000, seed=1) -> OracleResult:
    rnd = random.Random(seed)
    bad = 0
    for gamma in (3, 13, 31, 61, 127):
        p = 2**gamma - 1
        for _ in range(count):
            x = rnd.getrandbits(2 * gamma)
            bad += int(reduce_mersenne(x, gamma)) != x % p
    return OracleResult("mersenne reduction vs %", {"per_gamma": count}, bad, 0, bad == 0)


def quick_checks() -> list:
    return _vectors() + [_reduction_identities()]


DISTANCE_CONFIGS = (
    (3, 2, 1, lambda: EavesdropModel.leading_bits(3, 2, 2)),
    (3, 2, 2, lambda: EavesdropModel.leading_bits(3, 2, 1)),
    (3, 2, 3, lambda: EavesdropModel.leading_bits(3, 2, 1)),
    (3, 2, 2, lambda: EavesdropModel.parities(3, 2, [0b101101])),
    (3, 2, 1, lambda: EavesdropModel.random_partition(3, 2, 4, seed=0)),
    (3, 2, 2, lambda: EavesdropModel.leading_bits(3, 2, 4)),
    (3, 3, 2, lambda: EavesdropModel.leading_bits(3, 3, 2)),
    (3, 3, 3, lambda: EavesdropModel.parities(3, 3, [0b111000111, 0b010101010])),
    (3, 4, 2, lambda: EavesdropModel.leading_bits(3, 4, 4)),
    (5, 2, 3, lambda: EavesdropModel.leading_bits(5, 2, 3)),
)


def distance_checks(configs=DISTANCE_CONFIGS) -> list:
    out = []
    for gamma, k, beta, make in configs:
        model = make()
        rep = brute_force_pa_distance(gamma, k, beta, model)
        bound = eval_bounds(gamma * k, beta, model.leaked_bits, gamma).eps_bound
        out.append(OracleResult(
            f"eps-security {model.name}",
            {"gamma": gamma, "k": k, "beta": beta, "t": model.leaked_bits},
            rep.average, bound, rep.average <= bound,
            f"max={rep.maximum:.4g}, inputs={rep.input_size}/{2 ** rep.n}",
        ))
    return out


def universality_checks() -> list:
    d_g = brute_force_universality(mmh_family(3, 2))
    d_h = brute_force_universality(mh_family(4, 2))
    d_h3 = brute_force_universality(mh_family(3, 2))
    d_c = brute_force_universality(composed_family(3, 2, 2))
    return [
        OracleResult("MMH universality", {"gamma": 3, "k": 2}, d_g, 1 / 7, d_g <= 1 / 7),
        OracleResult("MH universality", {"alpha": 4, "beta": 2}, d_h, 0.5, d_h <= 0.5,
                     f"claimed 1/2^beta = {2 ** -2:g}: {'met' if d_h <= 2 ** -2 else 'exceeded'}"),
        OracleResult("MMH-MH composition", {"gamma": 3, "k": 2, "beta": 2}, d_c, d_g + d_h3,
                     d_c <= d_g + d_h3, f"delta_g={d_g:.4g}, delta_h={d_h3:.4g}"),
    ]


def entropy_checks(count=1000, seed=7) -> list:
    rng = np.random.default_rng(seed)
    worst_renyi = -math.inf
    worst_lemma = -math.inf
    for _ in range(count):
        size = int(rng.integers(2, 65))
        p = Distribution.from_masses(rng.dirichlet(np.full(size, rng.uniform(0.05, 5))))
        worst_renyi = max(worst_renyi, renyi_entropy(p) - shannon_entropy(p))
        u = Distribution.uniform(size)
        worst_lemma = max(worst_lemma, statistical_distance(p, u) - collision_distance_bound(p))
    tol = 1e-9
    return [
        OracleResult("renyi <= shannon", {"samples": count}, worst_renyi, tol, worst_renyi <= tol,
                     "measured is max(H2 - H)"),
        OracleResult("distance <= sqrt(D*|Y|-1)/2", {"samples": count}, worst_lemma, tol, worst_lemma <= tol,
                     "measured is max(d - bound)"),
    ]


def conditional_entropy_checks(partitions=5) -> list:
    out = []
    for seed in range(partitions):
        model = EavesdropModel.random_partition(3, 2, 4 + seed, seed=seed)
        rows = conditional_collision(3, 2, model)
        slack = max(coll - bound for coll, bound in rows)
        out.append(OracleResult(f"MMH collision given w ({model.name})", {"gamma": 3, "k": 2},
                                slack, 1e-12, slack <= 1e-12, "measured is max(E_g Delta - (delta + 1/c_w))"))
    return out


def toeplitz_exhaustive(max_n=8, max_m=4) -> tuple:
    """Compare fast and naive Toeplitz hashing on every seed and input.

    Returns ``(cases, mismatches)``.
    """
    cases = bad = 0
    for n in range(1, max_n + 1):
        xs = [KeyBuffer.from_int(v, n) for v in range(1 << n)]
        X = np.array([x.to_numpy() for x in xs], dtype=np.int64)
        for m in range(1, max_m + 1):
            weights = 1 << np.arange(m - 1, -1, -1)
            for dv in range(1 << (n + m - 1)):
                sd = ToeplitzSeed(KeyBuffer.from_int(dv, n + m - 1), n, m)
                T = toeplitz_matrix(sd).astype(np.int64)
                want = (((X @ T.T) & 1) * weights).sum(axis=1).tolist()
                for xb, w in zip(xs, want):
                    cases += 1
                    bad += toeplitz_pa_fast(xb, sd, m).integer != w
    return cases, bad


def toeplitz_random(count=100, n=64, m=16, seed=11) -> tuple:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(count):
        sd = ToeplitzSeed(KeyBuffer.from_numpy(rng.integers(0, 2, n + m - 1)), n, m)
        x = KeyBuffer.from_numpy(rng.integers(0, 2, n))
        bad += toeplitz_pa_fast(x, sd, m) != toeplitz_pa_naive(x, sd, m)
    return count, bad


def toeplitz_checks() -> list:
    c1, b1 = toeplitz_exhaustive()
    c2, b2 = toeplitz_random()
    return [
        OracleResult("toeplitz fast == naive, exhaustive n<=8 m<=4", {"cases": c1}, b1, 0, b1 == 0),
        OracleResult("toeplitz fast == naive, random n=64 m=16", {"cases": c2}, b2, 0, b2 == 0),
    ]


def pipeline_checks(count=100, seed=5) -> list:
    rnd = random.Random(seed)
    gamma, k, m = 31, 4, 16
    params = _toy_params(gamma, k, m, epsilon=2 ** -8)
    bad = 0
    for _ in range(count):
        a = [rnd.randrange(2**gamma - 1) for _ in range(k)]
        b, c = rnd.getrandbits(gamma) | 1, rnd.getrandbits(gamma)
        bits = "".join(rnd.choice("01") for _ in range(gamma * (k + 2)))
        got = pa_run(KeyBuffer.from_bitstring(bits), params, MmhSeed.from_ints(a, gamma), MhSeed(b, c, gamma))
        bad += got.output.bitstring() != reference_pa(bits, gamma, k, m, a, b, c)
    return [OracleResult("pa_run vs straight-line oracle", {"gamma": gamma, "k": k, "m": m, "cases": count},
                         bad, 0, bad == 0)]


def full_checks() -> list:
    return (quick_checks() + universality_checks() + entropy_checks() + conditional_entropy_checks()
            + distance_checks() + toeplitz_checks() + pipeline_checks())


def run_checks(level: str = "quick", echo: Callable[[str], None] | None = None) -> tuple:
    """Run a check level and return ``(results, seconds)``."""
    start = time.perf_counter()
    results = quick_checks() if level == "quick" else full_checks()
    elapsed = time.perf_counter() - start
    if echo:
        for r in results:
            echo(r.to_text())
    return results, elapsed
