import math
import random

import pytest

from mmhpa import (
    CounterRng,
    InsufficientInputError,
    KeyBuffer,
    MhSeed,
    MmhSeed,
    PaParams,
    ParameterError,
    derive_security_coefficient,
    pa_run,
    pa_stream,
    rng_seed_source,
    select_block_count,
    select_gamma,
)
from mmhpa.verify import reference_pa

from .conftest import bits_of


def toy(gamma, k, m, epsilon=0.5):
    s = derive_security_coefficient(epsilon)
    return PaParams(gamma=gamma, k=k, t=gamma * k - m - s, epsilon=epsilon, s=s, m=m)


@pytest.mark.parametrize("eps, s", [(1e-10, 65), (0.25, 2), (0.5, 1), (0.9, 1)])
def test_security_coefficient(eps, s):
    assert derive_security_coefficient(eps) == s
    assert 2.0 ** (-s / 2 - 1) <= eps
    if s > 1:
        assert 2.0 ** (-(s - 1) / 2 - 1) > eps


def test_security_coefficient_closed_form():
    for eps in (1e-3, 1e-6, 3e-9, 1e-10, 1e-15, 1e-30):
        assert derive_security_coefficient(eps) == max(1, math.ceil(2 * math.log2(1 / eps) - 2))


@pytest.mark.parametrize("eps", [0.0, 1.0, -1e-3, 2.0])
def test_security_coefficient_range(eps):
    with pytest.raises(ParameterError):
        derive_security_coefficient(eps)


@pytest.mark.parametrize("r, k", [(0.2957, 3), (0.0972, 10), (0.5, 2)])
def test_block_count(r, k):
    assert select_block_count(r) == k


@pytest.mark.parametrize("r", [0.0, 1.0, 1.5, -0.1])
def test_block_count_range(r):
    with pytest.raises(ParameterError):
        select_block_count(r)


@pytest.mark.parametrize("target, k, gamma", [(260_000_000, 10, 25964951), (200_000_000, 3, 57885161), (21, 3, 7)])
def test_select_gamma(target, k, gamma):
    assert select_gamma(target, k) == gamma


def test_select_gamma_too_small():
    with pytest.raises(ParameterError):
        select_gamma(8, 3)


def test_params_derive_full_scale():
    n = 259_649_510
    p = PaParams.derive(25964951, 10, n - math.floor(0.0972 * n) - 65, 1e-10, r=0.0972)
    assert p.s == 65 and p.n == n and p.m == math.floor(0.0972 * n)
    assert p.m == p.n - p.t - p.s


def test_params_shorter_output_widens_margin():
    p = PaParams.derive(127, 2, 200, 2 ** -8, m=10)
    assert p.m == 10 and p.s == 254 - 200 - 10


@pytest.mark.parametrize("kwargs", [
    dict(gamma=31, k=4, t=124 - 14 - 20, epsilon=2**-8, s=14, m=20),    # m + s > gamma
    dict(gamma=31, k=4, t=124 - 14, epsilon=2**-8, s=14, m=0),          # m <= 0
    dict(gamma=31, k=4, t=124 - 14 - 10, epsilon=2**-8, s=14, m=10, r=0.3),  # k > floor(1/r)
    dict(gamma=31, k=4, t=124 - 5 - 10, epsilon=2**-8, s=5, m=10),      # s below requirement
    dict(gamma=31, k=4, t=100, epsilon=2**-8, s=14, m=7),               # m != n - t - s
    dict(gamma=30, k=4, t=100, epsilon=2**-8, s=14, m=6),               # not a Mersenne exponent
])
def test_params_rejected(kwargs):
    with pytest.raises(ParameterError):
        PaParams(**kwargs)


def test_pa_run_toy_vector():
    res = pa_run(KeyBuffer.from_bitstring("010110"), toy(3, 2, 2),
                 MmhSeed.from_ints([3, 5], 3), MhSeed(3, 1, 3))
    assert res.output.bitstring() == "10"
    assert (res.consumed_bits, res.rejected_blocks) == (6, 0)


def test_pa_run_zero_input():
    params = toy(31, 4, 16, 2**-8)
    rnd = random.Random(0)
    g = MmhSeed.from_ints([rnd.randrange(2**31 - 1) for _ in range(4)], 31)
    res = pa_run(KeyBuffer.from_int(0, 124), params, g, MhSeed(rnd.getrandbits(31) | 1, 0, 31))
    assert res.output.bitstring() == "0" * 16


def test_pa_run_with_rejection_matches_oracle():
    bits = "111" + "010" + "111" + "110"
    res = pa_run(KeyBuffer.from_bitstring(bits), toy(3, 2, 2), MmhSeed.from_ints([3, 5], 3), MhSeed(3, 1, 3))
    assert res.rejected_blocks == 2 and res.consumed_bits == 12
    assert res.output.bitstring() == reference_pa(bits, 3, 2, 2, [3, 5], 3, 1)


def test_pa_run_seed_mismatch():
    params = toy(3, 2, 2)
    with pytest.raises(ParameterError):
        pa_run(KeyBuffer.from_bitstring("010110"), params, MmhSeed.from_ints([3, 5, 1], 3), MhSeed(3, 1, 3))
    with pytest.raises(ParameterError):
        pa_run(KeyBuffer.from_bitstring("010110"), params, MmhSeed.from_ints([3, 5], 3), MhSeed(3, 1, 4))


def test_pa_run_insufficient():
    with pytest.raises(InsufficientInputError):
        pa_run(KeyBuffer.from_bitstring("01011"), toy(3, 2, 2), MmhSeed.from_ints([3, 5], 3), MhSeed(3, 1, 3))


def test_pa_run_oracle_and_length():
    rnd = random.Random(17)
    gamma, k = 61, 3
    for m in (1, 5, 30, 61 - 1):
        params = toy(gamma, k, m)
        for _ in range(10):
            a = [rnd.randrange(2**gamma - 1) for _ in range(k)]
            b, c = rnd.getrandbits(gamma) | 1, rnd.getrandbits(gamma)
            bits = "".join(bits_of(rnd.getrandbits(gamma), gamma) for _ in range(k + 1))
            out = pa_run(KeyBuffer.from_bitstring(bits), params, MmhSeed.from_ints(a, gamma), MhSeed(b, c, gamma)).output
            assert out.length == m
            assert out.bitstring() == reference_pa(bits, gamma, k, m, a, b, c)


def test_parallel_equals_serial():
    rnd = random.Random(23)
    gamma, k = 607, 5
    params = toy(gamma, k, 100)
    for _ in range(50):
        a = [rnd.randrange(2**gamma - 1) for _ in range(k)]
        g, h = MmhSeed.from_ints(a, gamma), MhSeed(rnd.getrandbits(gamma) | 1, rnd.getrandbits(gamma), gamma)
        x = KeyBuffer.from_int(rnd.getrandbits(gamma * k), gamma * k)
        assert pa_run(x, params, g, h, workers=3).output == pa_run(x, params, g, h).output


def test_pa_run_deterministic():
    rng = CounterRng(bytes(32))
    g, h = next(rng_seed_source(rng, 127, 3))
    x = KeyBuffer.from_int(random.Random(5).getrandbits(381), 381)
    params = toy(127, 3, 60)
    assert pa_run(x, params, g, h).output == pa_run(x, params, g, h).output


def _fixed(pair):
    while True:
        yield pair


def test_stream_two_jobs_and_remainder():
    params = toy(3, 2, 2)
    pair = (MmhSeed.from_ints([3, 5], 3), MhSeed(3, 1, 3))
    res = pa_stream(KeyBuffer.from_bitstring("010110" "010110" "10101"), params, _fixed(pair))
    assert res.jobs == 2 and res.remainder_bits == 5
    assert res.output().bitstring() == "1010"
    assert res.job_offsets == [0, 6]


def test_stream_empty():
    res = pa_stream(KeyBuffer.empty(), toy(3, 2, 2), iter([]))
    assert res.jobs == 0 and res.remainder_bits == 0 and res.output().length == 0


def test_stream_twelve_bits():
    res = pa_stream(KeyBuffer.from_bitstring("001010011100"), toy(3, 2, 2), rng_seed_source(CounterRng(bytes(32)), 3, 2))
    assert res.jobs == 2 and res.remainder_bits == 0 and res.consumed_bits == 12


def test_stream_rejections_shift_jobs():
    bits = "111010110" + "011100" + "11"
    res = pa_stream(KeyBuffer.from_bitstring(bits), toy(3, 2, 2), rng_seed_source(CounterRng(bytes(32)), 3, 2))
    assert res.jobs == 2 and res.rejected_blocks == 1
    assert res.consumed_bits == 15 and res.remainder_bits == 2


def test_stream_all_ones_tail_is_remainder():
    bits = "010110" + "111111111"
    res = pa_stream(KeyBuffer.from_bitstring(bits), toy(3, 2, 2), rng_seed_source(CounterRng(bytes(32)), 3, 2))
    assert res.jobs == 1 and res.remainder_bits == 9


def test_stream_fresh_vs_reused_seeds():
    params = toy(61, 2, 20)
    x = KeyBuffer.from_int(random.Random(8).getrandbits(61 * 2 * 4), 61 * 2 * 4)
    fresh = pa_stream(x, params, rng_seed_source(CounterRng(bytes(32)), 61, 2))
    reused = pa_stream(x, params, rng_seed_source(CounterRng(bytes(32)), 61, 2), reuse_seeds=True)
    assert len({id(p) for p in reused.seeds}) == 1
    assert len({seed_key(p) for p in fresh.seeds}) == 4
    assert fresh.outputs[0] == reused.outputs[0]
    for i, (g, h) in enumerate(fresh.seeds):
        assert pa_run(x, params, g, h, offset=i * 122).output == fresh.outputs[i]


def seed_key(pair):
    g, h = pair
    return tuple(int(a) for a in g.a), int(h.b), int(h.c)


def test_stream_parallel_jobs():
    params = toy(127, 2, 40)
    x = KeyBuffer.from_int(random.Random(9).getrandbits(127 * 2 * 6 + 3), 127 * 2 * 6 + 3)
    one = pa_stream(x, params, rng_seed_source(CounterRng(bytes(32)), 127, 2))
    many = pa_stream(x, params, rng_seed_source(CounterRng(bytes(32)), 127, 2), workers=3)
    assert one.output() == many.output()
    assert many.remainder_bits == 3


def test_stream_exhausted_seed_source():
    pair = (MmhSeed.from_ints([3, 5], 3), MhSeed(3, 1, 3))
    with pytest.raises(ParameterError):
        pa_stream(KeyBuffer.from_bitstring("010110" * 2), toy(3, 2, 2), iter([pair]))
