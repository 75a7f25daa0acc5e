import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmhpa import (
    CounterRng,
    FieldElement,
    KeyFormatError,
    MhSeed,
    MmhSeed,
    ParameterError,
    decode_seeds,
    encode_seeds,
    mh_eval,
    mmh_eval,
    mmh_partial,
    sample_mh_seed,
    sample_mmh_seed,
)
from mmhpa.hashing import seed_digest
from mmhpa.rng import SystemRng

KEY = bytes(range(32))


def vec(values, gamma):
    return [FieldElement(v, gamma) for v in values]


def test_mmh_examples():
    assert int(mmh_eval(MmhSeed.from_ints([3, 5], 3), vec([2, 6], 3))) == 1
    assert int(mmh_eval(MmhSeed.from_ints([0, 0, 0], 5), vec([1, 17, 30], 5))) == 0
    assert int(mmh_eval(MmhSeed.from_ints([1], 3), vec([4], 3))) == 4


def test_mmh_mismatches():
    seed = MmhSeed.from_ints([3, 5], 3)
    with pytest.raises(ParameterError):
        mmh_eval(seed, vec([1], 3))
    with pytest.raises(ParameterError):
        mmh_eval(seed, vec([1, 2], 5))


def test_mh_examples():
    assert mh_eval(MhSeed(3, 1, 3), 5, 2) == 0
    assert mh_eval(MhSeed(1, 0, 3), 5, 3) == 5
    assert mh_eval(MhSeed(5, 3, 4), 7, 2) == 1


def test_mh_beta_above_alpha():
    with pytest.raises(ParameterError):
        mh_eval(MhSeed(1, 0, 3), 1, 4)


@pytest.mark.parametrize("b, c", [(2, 0), (0, 0), (9, 0), (3, 8), (3, -1)])
def test_mh_seed_invariants(b, c):
    with pytest.raises(ParameterError):
        MhSeed(b, c, 3)


def test_mh_is_top_bits_exhaustive():
    for alpha in range(1, 9):
        mod = 1 << alpha
        for b in range(1, mod, 2):
            for c in range(0, mod, max(1, mod // 8)):
                seed = MhSeed(b, c, alpha)
                for y in range(mod):
                    v = (b * y + c) % mod
                    for beta in (1, alpha):
                        assert mh_eval(seed, y, beta) == v >> (alpha - beta)


@st.composite
def mmh_case(draw):
    gamma = draw(st.sampled_from((3, 7, 13, 31, 61)))
    k = draw(st.integers(1, 8))
    p = 2**gamma - 1
    ints = st.integers(0, p - 1)
    a = [draw(ints) for _ in range(k)]
    x = [draw(ints) for _ in range(k)]
    y = [draw(ints) for _ in range(k)]
    return gamma, k, a, x, y


@settings(max_examples=200, deadline=None)
@given(mmh_case())
def test_mmh_linearity(case):
    gamma, k, a, x, y = case
    p = 2**gamma - 1
    seed = MmhSeed.from_ints(a, gamma)
    xy = [(u + v) % p for u, v in zip(x, y)]
    lhs = int(mmh_eval(seed, vec(xy, gamma)))
    rhs = (int(mmh_eval(seed, vec(x, gamma))) + int(mmh_eval(seed, vec(y, gamma)))) % p
    assert lhs == rhs
    assert lhs == sum(ai * xi for ai, xi in zip(a, xy)) % p


@settings(max_examples=200, deadline=None)
@given(mmh_case(), st.data())
def test_split_merge(case, data):
    gamma, k, a, x, _ = case
    p = 2**gamma - 1
    seed = MmhSeed.from_ints(a, gamma)
    xs = vec(x, gamma)
    labels = data.draw(st.lists(st.integers(0, 3), min_size=k, max_size=k))
    total = 0
    for part in set(labels):
        total = (total + int(mmh_partial(seed, xs, [i for i, l in enumerate(labels) if l == part]))) % p
    assert total == int(mmh_eval(seed, xs))


def test_parallel_products_match_serial():
    rnd = random.Random(1)
    gamma, k = 4423, 6
    p = 2**gamma - 1
    seed = MmhSeed.from_ints([rnd.randrange(p) for _ in range(k)], gamma)
    x = vec([rnd.randrange(p) for _ in range(k)], gamma)
    assert mmh_eval(seed, x, workers=4) == mmh_eval(seed, x)


def test_sampling_deterministic():
    g1 = sample_mmh_seed(CounterRng(KEY), 3, 2)
    g2 = sample_mmh_seed(CounterRng(KEY), 3, 2)
    assert g1 == g2
    h1 = sample_mh_seed(CounterRng(KEY), 31)
    h2 = sample_mh_seed(CounterRng(KEY), 31)
    assert (h1.b, h1.c) == (h2.b, h2.c)
    assert sample_mmh_seed(CounterRng(bytes(32)), 61, 4) != sample_mmh_seed(CounterRng(KEY), 61, 4)


def test_sampling_degenerate():
    with pytest.raises(ParameterError):
        sample_mmh_seed(CounterRng(KEY), 3, 0)
    with pytest.raises(ParameterError):
        sample_mh_seed(CounterRng(KEY), 0)


def test_mmh_coefficients_uniform():
    rng = CounterRng(KEY)
    counts = Counter()
    draws = 10_000
    for _ in range(draws // 2):
        for a in sample_mmh_seed(rng, 3, 2).a:
            counts[int(a)] += 1
    assert set(counts) == set(range(7))
    expect = draws / 7
    sigma = (draws * (1 / 7) * (6 / 7)) ** 0.5
    for r in range(7):
        assert abs(counts[r] - expect) <= 5 * sigma
    chi2 = sum((counts[r] - expect) ** 2 / expect for r in range(7))
    assert chi2 < 30  # 6 degrees of freedom; far beyond the 0.9999 quantile (~27.9)


def test_mh_b_odd_and_covers_residues():
    rng = CounterRng(KEY)
    seen = set()
    for _ in range(10_000):
        h = sample_mh_seed(rng, 4)
        assert h.b % 2 == 1 and 0 <= h.c < 16
        seen.add(h.b)
    assert seen == set(range(1, 16, 2))


def test_system_rng_draws_valid_seeds():
    h = sample_mh_seed(SystemRng(), 61)
    assert h.b % 2 == 1
    assert len(sample_mmh_seed(SystemRng(), 61, 3).a) == 3


def test_counter_rng_stream_definition():
    import hashlib

    rng = CounterRng(KEY)
    stream = hashlib.sha256(KEY + (0).to_bytes(8, "big")).digest() + hashlib.sha256(KEY + (1).to_bytes(8, "big")).digest()
    assert rng.getbits(12) == int.from_bytes(stream[:2], "big") >> 4
    assert rng.getbits(256) == int.from_bytes(stream[2:34], "big")
    with pytest.raises(ParameterError):
        CounterRng(b"short")


def test_seed_file_round_trip():
    rng = CounterRng(KEY)
    pairs = [(sample_mmh_seed(rng, 61, 3), sample_mh_seed(rng, 61)) for _ in range(3)]
    blob = encode_seeds(pairs)
    assert blob[:3] == b"PAS" and blob[3] == 1
    assert len(blob) >= 16
    back = decode_seeds(blob)
    assert [(g, h.b, h.c) for g, h in back] == [(g, h.b, h.c) for g, h in pairs]
    assert seed_digest(back) == seed_digest(pairs)


@pytest.mark.parametrize("cut", [5, 17, -1])
def test_seed_file_corruption(cut):
    rng = CounterRng(KEY)
    blob = encode_seeds([(sample_mmh_seed(rng, 7, 2), sample_mh_seed(rng, 7))])
    with pytest.raises(KeyFormatError):
        decode_seeds(blob[:cut])


def test_seed_file_bad_magic():
    rng = CounterRng(KEY)
    blob = encode_seeds([(sample_mmh_seed(rng, 7, 2), sample_mh_seed(rng, 7))])
    with pytest.raises(KeyFormatError):
        decode_seeds(b"XYZ" + blob[3:])
