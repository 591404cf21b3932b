"""Likelihood ratios on sampled graphs, test risks and Monte Carlo checks.

The log likelihood ratio of a graph ``y`` is

    log dP/dQ (y) = -(sum_{present} k + sum_{all pairs} l),

so it only needs the ``k`` coefficients of the edges actually present plus
one model-level constant. :class:`_LLR` caches that constant so Monte Carlo
loops pay O(edges) per replication.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import ndtr

from .contiguity import ModelPair, edge_k_at, lindeberg_normalizer, sum_kq, sum_l
from .errors import DomainError, EnumerationTooLargeError, UndefinedNormalizerError
from .graph_core import GraphSample, child_seed, n_pairs, index_to_pair, sample

MAX_ENUMERATION_N = 5


@dataclass(frozen=True)
class LogLikelihoodRatio:
    value: float
    sum_k_terms: float
    sum_l_terms: float


@dataclass(frozen=True)
class Frequency:
    """Monte Carlo event frequency with its binomial standard error."""

    value: float
    stderr: float
    reps: int

    def __float__(self) -> float:
        return self.value


def _frequency(hits: int, reps: int) -> Frequency:
    f = hits / reps
    return Frequency(f, math.sqrt(f * (1 - f) / reps), reps)


@dataclass(frozen=True)
class TestRiskReport:
    __test__ = False  # keep pytest from collecting this as a test class

    a_n: float
    type1_weighted: float
    type2: float
    total: float
    type1_weighted_stderr: float
    type2_stderr: float
    total_stderr: float
    reps: int


class _LLR:
    def __init__(self, pair: ModelPair):
        self.pair = pair
        self.sum_l = sum_l(pair)
        self._k = None
        if pair.p_model.is_homogeneous and pair.q_model.is_homogeneous:
            self._k = float(edge_k_at(pair, np.array([1]), np.array([2]))[0]) if pair.n >= 2 else 0.0

    def sum_k(self, g: GraphSample) -> float:
        if g.n != self.pair.n:
            raise DomainError(f"graph has n={g.n}, model pair has n={self.pair.n}")
        if g.m == 0:
            return 0.0
        if self._k is not None:
            return g.m * self._k
        return math.fsum(edge_k_at(self.pair, g.edges[:, 0], g.edges[:, 1]).tolist())

    def __call__(self, g: GraphSample) -> LogLikelihoodRatio:
        sk = self.sum_k(g)
        return LogLikelihoodRatio(-(sk + self.sum_l), sk, self.sum_l)


def log_lr(pair: ModelPair, g: GraphSample) -> LogLikelihoodRatio:
    """``log dP_n/dQ_n`` evaluated at ``g``."""
    return _LLR(pair)(g)


def _check_rate(a_n: float) -> float:
    if not (a_n > 0 and math.isfinite(a_n)):
        raise DomainError(f"rate a_n must be positive, got {a_n}")
    return math.log(a_n)


def lr_test(pair: ModelPair, g: GraphSample, a_n: float) -> bool:
    """Likelihood-ratio test: reject ``P`` when ``q(g) > p(g) / a_n``.

    This is the test that minimizes ``a_n^{-1} P(phi) + Q(1 - phi)``.
    """
    return log_lr(pair, g).value < _check_rate(a_n)


def weighted_risk_mc(pair: ModelPair, a_n: float, reps: int, seed: int) -> TestRiskReport:
    """Monte Carlo estimate of ``a_n^{-1} P(psi = 1) + Q(psi = 0)`` for the LR test."""
    if reps < 1:
        raise DomainError("reps must be >= 1")
    thresh = _check_rate(a_n)
    llr = _LLR(pair)
    hits_p = sum(llr(sample(pair.p_model, child_seed(seed, 0, r))).value < thresh for r in range(reps))
    miss_q = sum(not (llr(sample(pair.q_model, child_seed(seed, 1, r))).value < thresh) for r in range(reps))
    f1, f2 = _frequency(hits_p, reps), _frequency(miss_q, reps)
    t1, se1 = f1.value / a_n, f1.stderr / a_n
    return TestRiskReport(a_n, t1, f2.value, t1 + f2.value, se1, f2.stderr, math.hypot(se1, f2.stderr), reps)


def rc_condition_ii_mc(pair: ModelPair, a_n: float, delta: float, reps: int, seed: int) -> Frequency:
    """Frequency under ``Q`` of ``dP/dQ < delta * a_n``."""
    if reps < 1:
        raise DomainError("reps must be >= 1")
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    thresh = math.log(delta) + _check_rate(a_n)
    llr = _LLR(pair)
    hits = sum(llr(sample(pair.q_model, child_seed(seed, r))).value < thresh for r in range(reps))
    return _frequency(hits, reps)


def normal_cdf(x):
    """Standard normal CDF (Cephes ``ndtr``; absolute error well below 1e-15)."""
    return ndtr(x)


def ks_statistic_normal(values) -> float:
    """Exact one-sample Kolmogorov-Smirnov distance to ``N(0, 1)``."""
    x = np.sort(np.asarray(values, dtype=float))
    m = x.size
    if m == 0:
        raise DomainError("need at least one value")
    cdf = normal_cdf(x)
    upper = np.arange(1, m + 1) / m - cdf
    lower = cdf - np.arange(m) / m
    return float(max(upper.max(), lower.max(), 0.0))


def normalized_sums(pair: ModelPair, reps: int, seed: int) -> np.ndarray:
    """``reps`` draws under ``Q`` of ``sum k (Y - q) / s_n``."""
    s2 = lindeberg_normalizer(pair)
    if s2 <= 0:
        raise UndefinedNormalizerError("s_n = 0: the models coincide edge-wise")
    s = math.sqrt(s2)
    centre = sum_kq(pair)
    llr = _LLR(pair)
    return np.array([(llr.sum_k(sample(pair.q_model, child_seed(seed, r))) - centre) / s for r in range(reps)])


def clt_check(pair: ModelPair, reps: int, seed: int) -> float:
    """KS distance between the normalized log-LR sums under ``Q`` and ``N(0, 1)``."""
    if reps < 100:
        raise DomainError("clt_check needs reps >= 100")
    return ks_statistic_normal(normalized_sums(pair, reps, seed))


# --------------------------------------------------------------------------
# exhaustive enumeration


class EnumerationResult(NamedTuple):
    p_event: float
    q_event: float
    kl: float
    affinity: float


@dataclass(frozen=True)
class ExactLaw:
    """All ``2**C(n,2)`` graphs with their log masses under ``P`` and ``Q``."""

    n: int
    graphs: tuple[GraphSample, ...]
    log_p: np.ndarray
    log_q: np.ndarray


def enumerate_graphs(n: int) -> list[GraphSample]:
    if n > MAX_ENUMERATION_N:
        raise EnumerationTooLargeError(f"enumeration is limited to n <= {MAX_ENUMERATION_N}, got {n}")
    npairs = n_pairs(n)
    if npairs:
        ii, jj = index_to_pair(n, np.arange(npairs))
    else:
        ii = jj = np.empty(0, dtype=np.int64)
    out = []
    for bits in itertools.product((0, 1), repeat=npairs):
        sel = np.flatnonzero(np.array(bits, dtype=bool)) if npairs else np.empty(0, dtype=np.int64)
        out.append(GraphSample(n, np.column_stack([ii[sel], jj[sel]]).astype(np.int64).reshape(-1, 2)))
    return out


def exact_law(pair: ModelPair) -> ExactLaw:
    n = pair.n
    graphs = enumerate_graphs(n)
    npairs = n_pairs(n)
    if npairs:
        ii, jj = index_to_pair(n, np.arange(npairs))
        p = pair.p_model.lambdas_at(ii, jj) / n
        q = pair.q_model.lambdas_at(ii, jj) / n
    else:
        p = q = np.empty(0)
    bits = np.array(list(itertools.product((0, 1), repeat=npairs)), dtype=float).reshape(-1, npairs)
    with np.errstate(divide="ignore"):
        log_p = bits @ np.log(p) + (1 - bits) @ np.log1p(-p) if npairs else np.zeros(1)
        log_q = bits @ np.log(q) + (1 - bits) @ np.log1p(-q) if npairs else np.zeros(1)
    return ExactLaw(n, tuple(graphs), np.asarray(log_p), np.asarray(log_q))


def enumerate_exact(pair: ModelPair, event: Callable[[GraphSample], bool]) -> EnumerationResult:
    """Exact ``(P(event), Q(event), KL(Q||P), affinity)`` by summing over every graph (n <= 5)."""
    law = exact_law(pair)
    pm, qm = np.exp(law.log_p), np.exp(law.log_q)
    hit = np.array([bool(event(g)) for g in law.graphs])
    kl_terms = np.where(qm > 0, qm * (law.log_q - law.log_p), 0.0)
    return EnumerationResult(
        math.fsum(pm[hit].tolist()),
        math.fsum(qm[hit].tolist()),
        math.fsum(kl_terms.tolist()),
        math.fsum(np.exp(0.5 * (law.log_p + law.log_q)).tolist()),
    )


def lr_region_probabilities(pair: ModelPair, a_n: float) -> tuple[float, float]:
    """``(P(psi = 1), Q(psi = 1))`` in closed form for a homogeneous pair.

    The LR statistic depends on the graph only through its edge count ``m``,
    which is Binomial(``C(n,2)``, p) under ``P``.
    """
    if not (pair.p_model.is_homogeneous and pair.q_model.is_homogeneous):
        raise DomainError("closed-form LR region probabilities need a homogeneous pair")
    n, N = pair.n, n_pairs(pair.n)
    thresh = _check_rate(a_n)
    k = float(edge_k_at(pair, np.array([1]), np.array([2]))[0]) if N else 0.0
    L = sum_l(pair)
    p = pair.p_model.homogeneous_lambda / n
    q = pair.q_model.homogeneous_lambda / n
    ms = [m for m in range(N + 1) if -(m * k + L) < thresh]

    def mass(prob):
        return math.fsum(math.comb(N, m) * prob**m * (1 - prob) ** (N - m) for m in ms)

    return mass(p), mass(q)


def exact_weighted_risk(pair: ModelPair, a_n: float) -> float:
    """``a_n^{-1} P(psi = 1) + Q(psi = 0)`` in closed form (homogeneous pairs)."""
    pr, qr = lr_region_probabilities(pair, a_n)
    return pr / a_n + (1.0 - qr)
