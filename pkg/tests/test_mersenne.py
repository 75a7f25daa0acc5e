import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmhpa import (
    KNOWN_EXPONENTS,
    FieldElement,
    InsufficientInputError,
    KeyBuffer,
    ParameterError,
    bits_to_field_blocks,
    field_add,
    field_mul,
    reduce_mersenne,
)
from flint import fmpz
from gmpy2 import mpz

from mmhpa.mersenne import fold, modulus, to_big, top_bits

SMALL = (3, 5, 7, 13, 17, 19, 31, 61, 89, 107, 127)


@pytest.mark.parametrize("x, want", [(20, 6), (7, 0), (0, 0), (50, 1)])
def test_reduce_examples(x, want):
    assert int(reduce_mersenne(x, 3)) == want


def test_reduce_canonicalises_p_to_zero():
    for gamma in SMALL:
        p = 2**gamma - 1
        assert int(reduce_mersenne(p, gamma)) == 0
        assert int(reduce_mersenne(2 * p, gamma)) == 0


def test_reduce_matches_general_modulo():
    rnd = random.Random(3)
    for gamma in (3, 13, 31, 61, 127):
        p = 2**gamma - 1
        for _ in range(2000):
            x = rnd.getrandbits(2 * gamma)
            assert int(reduce_mersenne(x, gamma)) == x % p


def test_reduce_at_width_limit():
    gamma = 61
    p = 2**gamma - 1
    x = 2 ** (2 * gamma + 1) - 1
    assert int(reduce_mersenne(x, gamma)) == x % p
    with pytest.raises(ParameterError):
        reduce_mersenne(x + 1, gamma)
    with pytest.raises(ParameterError):
        reduce_mersenne(-1, gamma)


def test_reduce_large_exponent():
    gamma = 4423
    p = 2**gamma - 1
    rnd = random.Random(9)
    for _ in range(20):
        x = rnd.getrandbits(2 * gamma)
        assert int(reduce_mersenne(x, gamma)) == x % p


def test_known_exponents_cover_required_table():
    required = {3, 5, 7, 13, 17, 19, 31, 61, 89, 107, 127, 521, 607, 1279, 2203, 2281, 3217, 4253,
                4423, 9689, 9941, 11213, 19937, 21701, 23209, 44497, 86243, 110503, 132049, 216091,
                756839, 859433, 1257787, 1398269, 2976221, 3021377, 6972593, 13466917, 20996011,
                24036583, 25964951, 30402457, 32582657, 37156667, 42643801, 43112609, 57885161,
                74207281}
    assert required <= set(KNOWN_EXPONENTS)
    assert list(KNOWN_EXPONENTS) == sorted(KNOWN_EXPONENTS)


def test_unknown_exponent_rejected():
    with pytest.raises(ParameterError):
        FieldElement(1, 11)
    with pytest.raises(ParameterError):
        reduce_mersenne(5, 4)


def test_field_element_range():
    FieldElement(6, 3)
    with pytest.raises(ParameterError):
        FieldElement(7, 3)
    with pytest.raises(ParameterError):
        FieldElement(-1, 3)


def test_mul_add_examples():
    fe = FieldElement
    assert int(field_mul(fe(3, 3), fe(5, 3))) == 1
    assert int(field_mul(fe(0, 3), fe(6, 3))) == 0
    assert int(field_mul(fe(1, 3), fe(5, 3))) == 5
    assert int(field_add(fe(4, 3), fe(5, 3))) == 2
    assert int(field_add(fe(0, 3), fe(6, 3))) == 6
    assert int(field_add(fe(3, 3), fe(4, 3))) == 0


def test_exponent_mismatch():
    with pytest.raises(ParameterError):
        field_mul(FieldElement(1, 3), FieldElement(1, 5))
    with pytest.raises(ParameterError):
        field_add(FieldElement(1, 3), FieldElement(1, 5))


def test_mul_above_threshold_matches_python():
    gamma = 4423
    p = modulus(gamma)
    rnd = random.Random(4)
    a, b = rnd.randrange(p), rnd.randrange(p)
    assert int(field_mul(FieldElement(a, gamma), FieldElement(b, gamma))) == a * b % p


@pytest.mark.parametrize("engine", [fmpz, mpz])
def test_top_bits_agrees_across_integer_types(engine):
    gamma = 86243
    p = (1 << gamma) - 1
    rnd = random.Random(9)
    x = rnd.getrandbits(2 * gamma + 1)
    assert int(fold(to_big(x), gamma)) == x % p
    assert int(top_bits(engine(x), gamma, 40)) == (x % (1 << gamma)) >> (gamma - 40)


def test_to_big_round_trips_every_integer_type():
    x = random.Random(10).getrandbits(5000)
    for v in (x, mpz(x), fmpz(x)):
        assert int(to_big(v)) == x


gammas = st.sampled_from((3, 5, 7, 13, 31, 61, 127))


@st.composite
def triples(draw):
    gamma = draw(gammas)
    p = 2**gamma - 1
    vals = [draw(st.integers(0, p - 1)) for _ in range(3)]
    return [FieldElement(v, gamma) for v in vals]


@settings(max_examples=300, deadline=None)
@given(triples())
def test_ring_laws(t):
    a, b, c = t
    assert field_mul(a, b) == field_mul(b, a)
    assert field_add(a, b) == field_add(b, a)
    assert field_mul(field_mul(a, b), c) == field_mul(a, field_mul(b, c))
    assert field_add(field_add(a, b), c) == field_add(a, field_add(b, c))
    one, zero = FieldElement(1, a.gamma), FieldElement(0, a.gamma)
    assert field_mul(a, one) == a
    assert field_add(a, zero) == a
    assert field_mul(a, zero) == zero


def test_block_load_examples():
    load = bits_to_field_blocks(KeyBuffer.from_bitstring("111010110"), 3, 2)
    assert [int(v) for v in load.blocks] == [2, 6]
    assert (load.consumed_bits, load.rejected_blocks) == (9, 1)
    load = bits_to_field_blocks(KeyBuffer.from_bitstring("000000"), 3, 2)
    assert [int(v) for v in load.blocks] == [0, 0]
    assert load.rejected_blocks == 0


def test_block_load_exhausted_reports_progress():
    with pytest.raises(InsufficientInputError) as info:
        bits_to_field_blocks(KeyBuffer.from_bitstring("111111111"), 3, 1)
    assert info.value.filled == 0
    with pytest.raises(InsufficientInputError) as info:
        bits_to_field_blocks(KeyBuffer.from_bitstring("010111"), 3, 2)
    assert info.value.filled == 1 and info.value.needed == 2


def test_block_load_offset():
    load = bits_to_field_blocks(KeyBuffer.from_bitstring("1" + "011101"), 3, 2, offset=1)
    assert [int(v) for v in load.blocks] == [3, 5]


@settings(max_examples=200, deadline=None)
@given(st.sampled_from((3, 5, 7)), st.integers(1, 4), st.data())
def test_block_invariants(gamma, k, data):
    p = 2**gamma - 1
    # bias towards all-ones windows so rejections actually occur
    words = data.draw(st.lists(st.one_of(st.just(p), st.integers(0, p)), min_size=k, max_size=3 * k))
    stream = KeyBuffer.from_bitstring("".join(format(w, f"0{gamma}b") for w in words))
    accepted = [w for w in words if w != p]
    if len(accepted) < k:
        with pytest.raises(InsufficientInputError):
            bits_to_field_blocks(stream, gamma, k)
        return
    load = bits_to_field_blocks(stream, gamma, k)
    assert [int(v) for v in load.blocks] == accepted[:k]
    assert all(int(v) != p for v in load.blocks)
    assert load.consumed_bits - gamma * k == gamma * load.rejected_blocks


def test_block_load_large_exponent_windows():
    gamma, k = 4423, 3
    rnd = random.Random(2)
    words = [rnd.randrange(2**gamma - 1) for _ in range(k)]
    stream = KeyBuffer.from_int(sum(w << (gamma * (k - 1 - i)) for i, w in enumerate(words)), gamma * k)
    assert [int(v) for v in bits_to_field_blocks(stream, gamma, k).blocks] == words
