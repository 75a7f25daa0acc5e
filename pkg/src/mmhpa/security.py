"""Security bounds and brute-force oracles at toy scale.

The bound evaluators work in the log2 domain so they stay finite for
production-size ``n``. The oracles enumerate every input and every member
of a hash family, which limits them to a handful of bits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ParameterError
from .mersenne import check_exponent

DEFAULT_BUDGET = 1 << 22


# -- distributions ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Distribution:
    """Finite probability mass function."""

    support: tuple
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=np.float64)
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "mass", mass)
        if mass.ndim != 1 or len(mass) != len(self.support):
            raise ParameterError("mass must be a vector matching the support")
        if (mass < 0).any():
            raise ParameterError("negative probability mass")
        if abs(mass.sum() - 1.0) > 1e-12:
            raise ParameterError(f"masses sum to {mass.sum()!r}, not 1")

    @classmethod
    def from_masses(cls, masses) -> Distribution:
        masses = np.asarray(masses, dtype=np.float64)
        return cls(tuple(range(len(masses))), masses)

    @classmethod
    def uniform(cls, size: int) -> Distribution:
        return cls(tuple(range(size)), np.full(size, 1.0 / size))

    @classmethod
    def from_counts(cls, counts) -> Distribution:
        counts = np.asarray(counts, dtype=np.float64)
        return cls(tuple(range(len(counts))), counts / counts.sum())


def collision_probability(p: Distribution) -> float:
    return float(np.dot(p.mass, p.mass))


def renyi_entropy(p: Distribution) -> float:
    """Order-2 Renyi entropy, ``-log2`` of the collision probability."""
    return -math.log2(collision_probability(p))


def shannon_entropy(p: Distribution) -> float:
    nz = p.mass[p.mass > 0]
    return float(-(nz * np.log2(nz)).sum())


def statistical_distance(p: Distribution, q: Distribution) -> float:
    if p.support != q.support:
        raise ParameterError("distributions are defined on different supports")
    return float(0.5 * np.abs(p.mass - q.mass).sum())


def collision_distance_bound(p: Distribution) -> float:
    """``sqrt(Delta_p * |Y| - 1) / 2``, an upper bound on the distance to uniform."""
    return math.sqrt(max(collision_probability(p) * len(p.support) - 1.0, 0.0)) / 2


# -- closed-form bounds ----------------------------------------------------

def _log2_add(a: float, b: float) -> float:
    hi, lo = max(a, b), min(a, b)
    return hi + math.log2(1.0 + 2.0 ** (lo - hi))


@dataclass(frozen=True)
class SecurityBounds:
    """Leakage bounds for one parameter set.

    ``info_bound`` bounds the mutual information (bits) between the output
    and everything Eve holds; ``eps_bound`` bounds the statistical distance
    of the output from uniform. ``log2_*`` hold the same quantities exactly
    when the float values underflow.
    """

    n: int
    m: int
    t: int
    gamma: int
    s: int
    log2_info_bound: float
    log2_eps_bound: float
    simple_info_bound: float
    simple_eps_bound: float

    @property
    def info_bound(self) -> float:
        return 2.0 ** self.log2_info_bound

    @property
    def eps_bound(self) -> float:
        return 2.0 ** self.log2_eps_bound


def eval_bounds(n: int, m: int, t: int, gamma: int) -> SecurityBounds:
    """Evaluate both leakage bounds for output length ``m``.

    ``info = (2**(t-n+m) + 2**(m-gamma)) / ln 2`` and
    ``eps = sqrt(2**(m+t-n) + 2**(m-gamma)) / 2``. With ``s = n - t - m`` the
    simplified forms ``2**-s / ln 2`` and ``2**(-s/2 - 1)`` are returned too;
    when ``m + s <= gamma`` the full bounds are checked to be within twice
    the simplified ones.
    """
    if not 0 <= t < n:
        raise ParameterError(f"need 0 <= t < n, got t={t}, n={n}")
    if not 1 <= m <= n - t:
        raise ParameterError(f"need 1 <= m <= n - t = {n - t}, got m={m}")
    if gamma < m:
        raise ParameterError(f"need gamma >= m, got gamma={gamma}, m={m}")
    s = n - t - m
    log2_sum = _log2_add(t - n + m, m - gamma)
    log2_info = log2_sum - math.log2(math.log(2))
    log2_eps = 0.5 * log2_sum - 1
    simple_info = 2.0 ** -s / math.log(2)
    simple_eps = 2.0 ** (-s / 2 - 1)
    if m + s <= gamma:
        assert log2_info <= 1 + (-s - math.log2(math.log(2))) + 1e-12
        assert log2_eps <= 1 + (-s / 2 - 1) + 1e-12
    return SecurityBounds(n, m, t, gamma, s, log2_info, log2_eps, simple_info, simple_eps)


# -- enumerable families ---------------------------------------------------

@dataclass
class EnumerableFamily:
    """A hash family small enough to tabulate.

    ``table[f, x]`` is the output of member ``f`` on the ``x``-th domain
    element; ``labels`` names the members (seed tuples).
    """

    name: str
    table: np.ndarray
    labels: list
    domain_size: int
    range_size: int
    config: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.table.shape[0]


def mmh_domain(gamma: int, k: int) -> np.ndarray:
    """All accepted input vectors ``Z_p**k`` in lexicographic order, shape ``(p**k, k)``."""
    p = (1 << gamma) - 1
    return np.array(list(itertools.product(range(p), repeat=k)), dtype=np.int64).reshape(-1, k)


def mmh_family(gamma: int, k: int) -> EnumerableFamily:
    check_exponent(gamma)
    p = (1 << gamma) - 1
    X = mmh_domain(gamma, k)
    A = X.copy()
    table = (A @ X.T) % p
    return EnumerableFamily(f"MMH(gamma={gamma},k={k})", table, [tuple(a) for a in A.tolist()],
                            len(X), p, {"gamma": gamma, "k": k})


def mh_members(alpha: int):
    """All ``(b, c)`` with ``b`` odd, as two aligned arrays."""
    size = 1 << alpha
    b, c = np.meshgrid(np.arange(1, size, 2), np.arange(size), indexing="ij")
    return b.ravel().astype(np.int64), c.ravel().astype(np.int64)


def mh_family(alpha: int, beta: int, domain_size: Optional[int] = None) -> EnumerableFamily:
    """MH over ``Z_{2**alpha}``, optionally restricted to inputs below ``domain_size``."""
    if not 1 <= beta <= alpha:
        raise ParameterError(f"need 1 <= beta <= alpha, got beta={beta}, alpha={alpha}")
    size = 1 << alpha
    dom = size if domain_size is None else domain_size
    b, c = mh_members(alpha)
    y = np.arange(dom, dtype=np.int64)
    table = ((b[:, None] * y[None, :] + c[:, None]) % size) >> (alpha - beta)
    return EnumerableFamily(f"MH(alpha={alpha},beta={beta})", table, list(zip(b.tolist(), c.tolist())),
                            dom, 1 << beta, {"alpha": alpha, "beta": beta})


def composed_family(gamma: int, k: int, beta: int) -> EnumerableFamily:
    """``h o g`` for every MMH member ``g`` and MH member ``h`` (``alpha = gamma``)."""
    g = mmh_family(gamma, k)
    b, c = mh_members(gamma)
    size = 1 << gamma
    # rows ordered (g, h) with h fastest
    y = g.table[:, None, :]
    table = ((b[None, :, None] * y + c[None, :, None]) % size) >> (gamma - beta)
    table = table.reshape(g.size * len(b), g.domain_size)
    labels = [(a, (bb, cc)) for a in g.labels for bb, cc in zip(b.tolist(), c.tolist())]
    return EnumerableFamily(f"MH o MMH(gamma={gamma},k={k},beta={beta})", table, labels,
                            g.domain_size, 1 << beta, {"gamma": gamma, "k": k, "beta": beta})


def _work(family_size: int, domain_size: int) -> int:
    return family_size * domain_size * (domain_size - 1) // 2


def brute_force_universality(family: EnumerableFamily, budget: int = DEFAULT_BUDGET) -> float:
    """Largest fraction of members on which two distinct inputs collide.

    Raises
    ------
    ParameterError
        If ``members * pairs`` exceeds ``budget``; the message carries the
        estimate.
    """
    work = _work(family.size, family.domain_size)
    if work > budget:
        raise ParameterError(f"enumeration needs {work} member-pair checks, budget is {budget}")
    T = family.table
    X = family.domain_size
    counts = np.zeros((X, X), dtype=np.int64)
    chunk = max(1, (1 << 24) // (X * X))
    for f0 in range(0, family.size, chunk):
        block = T[f0:f0 + chunk]
        counts += (block[:, :, None] == block[:, None, :]).sum(axis=0)
    np.fill_diagonal(counts, 0)
    return float(counts.max()) / family.size


# -- eavesdropping ---------------------------------------------------------

@dataclass
class EavesdropModel:
    """Eve's view ``w = e(x)`` over the accepted inputs of a toy job.

    ``labels[x]`` is ``e`` applied to the ``x``-th element of
    :func:`mmh_domain` order.
    """

    name: str
    labels: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.labels)
        if raw.ndim > 1:
            _, self.labels = np.unique(raw, axis=0, return_inverse=True)
        else:
            _, self.labels = np.unique(raw, return_inverse=True)
        self.labels = self.labels.astype(np.int64).ravel()

    @property
    def outputs(self) -> int:
        return int(self.labels.max()) + 1

    @property
    def class_sizes(self) -> np.ndarray:
        """``c_w``: number of inputs mapped to each ``w``."""
        return np.bincount(self.labels, minlength=self.outputs)

    @property
    def leaked_bits(self) -> int:
        """``t = ceil(log2 |W|)``."""
        return math.ceil(math.log2(self.outputs)) if self.outputs > 1 else 0

    @classmethod
    def from_function(cls, name: str, gamma: int, k: int, fn: Callable[[int], object]) -> EavesdropModel:
        """Apply ``fn`` to each accepted input, given as its ``k * gamma``-bit integer."""
        X = mmh_domain(gamma, k)
        weights = (1 << (gamma * np.arange(k - 1, -1, -1))).astype(np.int64)
        words = X @ weights
        return cls(name, np.array([fn(int(v)) for v in words]))

    @classmethod
    def constant(cls, gamma, k):
        return cls.from_function("constant", gamma, k, lambda v: 0)

    @classmethod
    def identity(cls, gamma, k):
        return cls.from_function("identity", gamma, k, lambda v: v)

    @classmethod
    def leading_bits(cls, gamma, k, count):
        n = gamma * k
        return cls.from_function(f"leading-{count}-bits", gamma, k, lambda v: v >> (n - count))

    @classmethod
    def parities(cls, gamma, k, masks: Sequence[int]):
        """Eve learns the parity of each masked subset of input bits."""
        def fn(v):
            return tuple(bin(v & mk).count("1") & 1 for mk in masks)
        return cls.from_function(f"parities{tuple(masks)}", gamma, k, fn)

    @classmethod
    def random_partition(cls, gamma, k, classes, seed=0):
        rng = np.random.default_rng(seed)
        size = ((1 << gamma) - 1) ** k
        labels = rng.integers(0, classes, size=size)
        labels[:classes] = np.arange(classes)
        return cls(f"random-{classes}-way(seed={seed})", labels)


@dataclass
class DistanceReport:
    """Outcome of :func:`brute_force_pa_distance`.

    ``average`` is weighted by ``p_w`` and uniform over MMH and MH members;
    ``maximum`` is the worst single ``(w, g, h)``. ``input_size`` is the
    number of accepted inputs, ``p**k``, against the nominal ``2**n``.
    """

    gamma: int
    k: int
    beta: int
    model: str
    leaked_bits: int
    average: float
    maximum: float
    input_size: int
    family_size: int

    @property
    def n(self) -> int:
        return self.gamma * self.k


def brute_force_pa_distance(gamma: int, k: int, beta: int, model: EavesdropModel,
                            budget: int = 1 << 31) -> DistanceReport:
    """Average distance of the MMH-MH output from uniform, given Eve's view.

    For every MMH member ``g``, MH member ``h`` and view ``w``, the output
    distribution of ``h(g(x))`` with ``x`` uniform on ``e^-1(w)`` is
    compared with the uniform distribution on ``beta`` bits.
    """
    check_exponent(gamma)
    if gamma * k > 12:
        raise ParameterError(f"k * gamma = {gamma * k} exceeds the 12-bit enumeration limit")
    if not 1 <= beta <= gamma:
        raise ParameterError(f"need 1 <= beta <= gamma, got {beta}")
    g = mmh_family(gamma, k)
    if len(model.labels) != g.domain_size:
        raise ParameterError(f"model covers {len(model.labels)} inputs, domain has {g.domain_size}")
    b, c = mh_members(gamma)
    members = g.size * len(b)
    if members * g.domain_size > budget:
        raise ParameterError(f"enumeration needs {members * g.domain_size} evaluations, budget is {budget}")

    size = 1 << gamma
    Z = 1 << beta
    W = model.outputs
    cw = model.class_sizes.astype(np.float64)
    pw = cw / cw.sum()
    w = model.labels
    total = 0.0
    worst = 0.0
    chunk = max(1, (1 << 22) // (g.domain_size * len(b)))
    for f0 in range(0, g.size, chunk):
        y = g.table[f0:f0 + chunk]                     # (G, X)
        z = ((b[None, :, None] * y[:, None, :] + c[None, :, None]) % size) >> (gamma - beta)
        z = z.reshape(-1, g.domain_size)               # (G*H, X)
        rows = z.shape[0]
        cell = (np.arange(rows)[:, None] * W + w[None, :]) * Z + z
        counts = np.bincount(cell.ravel(), minlength=rows * W * Z).reshape(rows, W, Z)
        q = counts / cw[None, :, None]
        dist = 0.5 * np.abs(q - 1.0 / Z).sum(axis=2)  # (rows, W)
        total += float((dist @ pw).sum())
        worst = max(worst, float(dist.max()))
    return DistanceReport(gamma, k, beta, model.name, model.leaked_bits,
                          total / members, worst, g.domain_size, members)


def conditional_collision(gamma: int, k: int, model: EavesdropModel) -> list:
    """Per-view collision check of the MMH output.

    For each ``w`` returns ``(E_g[Delta(g(x) | w)], delta_measured + 1/c_w)``:
    the averaged collision probability of the MMH output given ``w`` and the
    bound it must not exceed.
    """
    g = mmh_family(gamma, k)
    delta = brute_force_universality(g)
    p = g.range_size
    out = []
    for wv, cw in enumerate(model.class_sizes):
        idx = np.flatnonzero(model.labels == wv)
        ys = g.table[:, idx]
        cnt = np.stack([np.bincount(row, minlength=p) for row in ys])
        coll = ((cnt / cw) ** 2).sum(axis=1).mean()
        out.append((float(coll), delta + 1.0 / cw))
    return out


@dataclass
class OracleResult:
    """One line of an oracle report."""

    name: str
    config: dict
    measured: float
    bound: float
    passed: bool
    note: str = ""

    def to_text(self) -> str:
        cfg = " ".join(f"{k}={v}" for k, v in self.config.items())
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.note})" if self.note else ""
        return f"[{status}] {self.name}: {cfg} measured={self.measured:.6g} bound={self.bound:.6g}{extra}"
