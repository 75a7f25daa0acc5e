"""MMH-MH privacy amplification over Mersenne prime fields.

Multilinear modular hashing (MMH) compresses ``k`` blocks of ``gamma`` bits
into one residue modulo ``2**gamma - 1``; modular arithmetic hashing (MH)
then keeps the top ``m`` bits of an affine map of that residue. The package
also ships Toeplitz and MH-only baselines, brute-force security oracles and
a benchmark harness.
"""

__version__ = "0.1.0"

from .errors import InsufficientInputError, KeyFormatError, PaError, ParameterError, VerificationError
from .keybuf import KeyBuffer, read_key_file, write_key_file
from .mersenne import (
    KNOWN_EXPONENTS,
    BlockLoad,
    FieldElement,
    bits_to_field_blocks,
    field_add,
    field_mul,
    reduce_mersenne,
)
from .rng import CounterRng, SystemRng
from .hashing import (
    MhSeed,
    MmhSeed,
    decode_seeds,
    encode_seeds,
    mh_eval,
    mmh_eval,
    mmh_partial,
    sample_mh_seed,
    sample_mmh_seed,
)
from .pipeline import (
    PaParams,
    PaResult,
    StreamResult,
    derive_security_coefficient,
    pa_run,
    pa_stream,
    rng_seed_source,
    select_block_count,
    select_gamma,
)
from .baselines import MhOnlySeed, ToeplitzSeed, mh_only_pa, toeplitz_pa_fast, toeplitz_pa_naive
from .security import (
    Distribution,
    EavesdropModel,
    SecurityBounds,
    brute_force_pa_distance,
    brute_force_universality,
    collision_probability,
    eval_bounds,
    renyi_entropy,
    shannon_entropy,
    statistical_distance,
)
from .bench import BenchRecord, BenchReport, bench_compare

__all__ = [name for name in dir() if not name.startswith("_")]
