"""Analytic contiguity quantities for a pair ``(P_n, Q_n)`` of ER models.

Every quantity here is a sum (or product) over the ``C(n, 2)`` candidate
edges of a per-edge term that depends only on the base probability ``p`` and
the perturbed probability ``q``. Pairs whose models are homogeneous or
block-constant reduce to a handful of edge classes with multiplicities, so a
homogeneous pair at ``n = 10**6`` costs O(1). Other pairs are streamed in
fixed row chunks; chunk partial sums are combined with ``math.fsum`` so
results do not depend on how the work is scheduled.

Per-edge terms are evaluated from ``d = q - p = (lambda - mu)/n`` directly,
never as a difference of nearly equal logs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import DegenerateProbabilityError, DomainError, UndefinedNormalizerError
from .graph_core import EdgeProbModel, n_pairs


@dataclass(frozen=True, eq=False)
class ModelPair:
    """Base model ``p_model`` (parameters mu) and perturbed ``q_model`` (lambda)."""

    p_model: EdgeProbModel
    q_model: EdgeProbModel

    def __post_init__(self):
        if self.p_model.n != self.q_model.n:
            raise DomainError(f"models disagree on n: {self.p_model.n} vs {self.q_model.n}")

    @property
    def n(self) -> int:
        return self.p_model.n

    @classmethod
    def homogeneous(cls, n: int, mu: float, lam: float) -> "ModelPair":
        return cls(EdgeProbModel.homogeneous(n, mu), EdgeProbModel.homogeneous(n, lam))

    @classmethod
    def from_probabilities(cls, n: int, p: float, q: float) -> "ModelPair":
        return cls.homogeneous(n, p * n, q * n)


@dataclass(frozen=True)
class EdgeCoefficients:
    """Log-odds contrast ``k`` and complement log-ratio ``l`` per edge class.

    ``weights[c]`` is the number of edges sharing the values at index ``c``;
    for unstructured inhomogeneous pairs every edge is its own class, in the
    linear pair order.
    """

    k: np.ndarray
    l: np.ndarray
    weights: np.ndarray


# --------------------------------------------------------------------------
# edge tables


def _class_table(pair: ModelPair):
    bp, bq = pair.p_model.blocks, pair.q_model.blocks
    if bp is None or bq is None:
        return None
    kq = bq.matrix.shape[0]
    joint = bp.labels * kq + bq.labels
    uniq, counts = np.unique(joint, return_counts=True)
    lp, lq = uniq // kq, uniq % kq
    a, b = np.triu_indices(uniq.size)
    ca, cb = counts[a].astype(float), counts[b].astype(float)
    w = np.where(a == b, ca * (ca - 1) / 2, ca * cb)
    keep = w > 0
    a, b, w = a[keep], b[keep], w[keep]
    return w, bp.matrix[lp[a], lp[b]], bq.matrix[lq[a], lq[b]]


def _edge_chunks(pair: ModelPair) -> Iterator[tuple[np.ndarray | None, np.ndarray, np.ndarray]]:
    """Yield ``(weights, mu, lam)``; ``weights`` is ``None`` for unit weights."""
    table = _class_table(pair)
    if table is not None:
        if table[0].size:
            yield table
        return
    for ii, jj, lam in pair.q_model.iter_lambdas():
        yield None, pair.p_model.lambdas_at(ii, jj), lam


def _require_interior(mu: np.ndarray, lam: np.ndarray, n: int) -> None:
    if np.any(mu <= 0) or np.any(mu >= n) or np.any(lam <= 0) or np.any(lam >= n):
        raise DegenerateProbabilityError("edge probabilities must lie strictly inside (0, 1)")


def _reduce(pair: ModelPair, term: Callable[[np.ndarray, np.ndarray, int], np.ndarray], interior: bool = True) -> float:
    n = pair.n
    partials = []
    for w, mu, lam in _edge_chunks(pair):
        if interior:
            _require_interior(mu, lam, n)
        v = term(mu, lam, n)
        partials.append(float(np.sum(v)) if w is None else float(np.sum(v * w)))
    return math.fsum(partials)


# --------------------------------------------------------------------------
# per-edge terms


def _xlog1px_minus_x(t: np.ndarray) -> np.ndarray:
    """``(1 + t) log(1 + t) - t``, accurate to full relative precision near 0."""
    t = np.asarray(t, dtype=float)
    out = (1.0 + t) * np.log1p(t) - t
    small = np.abs(t) < 1e-2
    if np.any(small):
        ts = t[small]
        # sum_{k>=2} (-1)^k t^k / (k (k-1))
        acc = np.zeros_like(ts)
        for k in range(9, 1, -1):
            acc = acc * ts + (-1.0) ** k / (k * (k - 1))
        out[small] = acc * ts * ts
    return out


def _k_term(mu, lam, n):
    p = mu / n
    d = (lam - mu) / n
    return np.log1p(d / p) - np.log1p(-d / (1.0 - p))


def _l_term(mu, lam, n):
    p = mu / n
    d = (lam - mu) / n
    return np.log1p(-d / (1.0 - p))


def _kl_term(mu, lam, n):
    p = mu / n
    d = (lam - mu) / n
    return p * _xlog1px_minus_x(d / p) + (1.0 - p) * _xlog1px_minus_x(-d / (1.0 - p))


def _s2_term(mu, lam, n):
    q = lam / n
    return _k_term(mu, lam, n) ** 2 * q * (1.0 - q)


def _R_term(mu, lam, n):
    return (lam - mu) ** 2 / (mu * (n - mu))


def _log_affinity_term(mu, lam, n):
    p, q = mu / n, lam / n
    d = (lam - mu) / n
    h = 0.5 * ((d / (np.sqrt(p) + np.sqrt(q))) ** 2 + (d / (np.sqrt(1.0 - p) + np.sqrt(1.0 - q))) ** 2)
    return np.log1p(-h)


# --------------------------------------------------------------------------
# public operations


def edge_coefficients(pair: ModelPair) -> EdgeCoefficients:
    n = pair.n
    ks, ls, ws = [], [], []
    for w, mu, lam in _edge_chunks(pair):
        _require_interior(mu, lam, n)
        ks.append(_k_term(mu, lam, n))
        ls.append(_l_term(mu, lam, n))
        ws.append(np.ones(mu.size) if w is None else w)
    if not ks:
        empty = np.empty(0)
        return EdgeCoefficients(empty, empty, empty)
    return EdgeCoefficients(np.concatenate(ks), np.concatenate(ls), np.concatenate(ws))


def edge_k_at(pair: ModelPair, i, j) -> np.ndarray:
    """Log-odds contrast ``k`` at specific 1-based pairs."""
    n = pair.n
    mu, lam = pair.p_model.lambdas_at(i, j), pair.q_model.lambdas_at(i, j)
    _require_interior(mu, lam, n)
    return _k_term(mu, lam, n)


def sum_l(pair: ModelPair) -> float:
    return _reduce(pair, _l_term)


def sum_kq(pair: ModelPair) -> float:
    return _reduce(pair, lambda mu, lam, n: _k_term(mu, lam, n) * lam / n)


def kl_divergence(pair: ModelPair) -> float:
    """``-E_Q log dP/dQ = sum (k q + l)`` over all edges."""
    kl = _reduce(pair, _kl_term)
    if kl < 0:
        if kl < -1e-12:
            raise ArithmeticError(f"negative KL divergence {kl}")
        kl = 0.0
    return kl


def lindeberg_normalizer(pair: ModelPair) -> float:
    """``s_n^2 = sum k^2 q (1 - q)``."""
    return _reduce(pair, _s2_term)


def lindeberg_lhs(pair: ModelPair, eps: float) -> float:
    """Left side of the Lindeberg condition, from the exact two-point law of ``Y - q``."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    s2 = lindeberg_normalizer(pair)
    if s2 <= 0:
        raise UndefinedNormalizerError("s_n = 0: the models coincide edge-wise")
    cut = eps * math.sqrt(s2)

    def term(mu, lam, n):
        q = lam / n
        k = _k_term(mu, lam, n)
        ak = np.abs(k)
        up = (1.0 - q) ** 2 * q * (ak * (1.0 - q) > cut)
        down = q**2 * (1.0 - q) * (ak * q > cut)
        return k * k * (up + down)

    return _reduce(pair, term) / s2


def rate_quantities(pair: ModelPair) -> tuple[float, float]:
    """``(r_n, R_n)``: sup relative perturbation and aggregate chi-square size."""
    n = pair.n
    r = 0.0
    partials = []
    for w, mu, lam in _edge_chunks(pair):
        if np.any(mu <= 0) or np.any(mu >= n):
            raise DomainError("base lambda-values must lie strictly inside (0, n)")
        r = max(r, float(np.max(np.abs(mu - lam) / mu)))
        v = _R_term(mu, lam, n)
        partials.append(float(np.sum(v)) if w is None else float(np.sum(v * w)))
    return r, math.fsum(partials)


def log_hellinger_affinity(pair: ModelPair) -> float:
    return _reduce(pair, _log_affinity_term)


def hellinger_affinity(pair: ModelPair) -> float:
    """Product over edges of ``sqrt(pq) + sqrt((1-p)(1-q))``, accumulated in logs."""
    return math.exp(log_hellinger_affinity(pair))


def homogeneous_rate(lam: float, lambda_n_fn: Callable[[int], float] | float, n: int) -> float:
    """``C(n,2) (lambda_n - lambda)^2 / (lambda (n - lambda))``."""
    lam_n = float(lambda_n_fn(n)) if callable(lambda_n_fn) else float(lambda_n_fn)
    for name, v in (("lambda", lam), ("lambda_n", lam_n)):
        if not (0 < v < n):
            raise DomainError(f"{name}={v} must lie in (0, n={n})")
    return n_pairs(n) * (lam_n - lam) ** 2 / (lam * (n - lam))


def inhomogeneous_rate(lam: float, lambda_matrix, n: int) -> float:
    """``||lambda_n - lambda||_{2,n}^2 / (lambda (n - lambda))``.

    ``lambda_matrix`` is an ``n x n`` array (upper triangle used) or a flat
    array of ``C(n, 2)`` values in linear pair order.
    """
    if not (0 < lam < n):
        raise DomainError(f"lambda={lam} must lie in (0, n={n})")
    vals = np.asarray(lambda_matrix, dtype=float)
    if vals.shape == (n, n):
        vals = vals[np.triu_indices(n, k=1)]
    elif vals.shape != (n_pairs(n),):
        raise DomainError(f"lambda_matrix must be ({n}, {n}) or ({n_pairs(n)},), got {vals.shape}")
    if np.any(vals <= 0) or np.any(vals >= n):
        raise DomainError("perturbed lambda-values must lie in (0, n)")
    return math.fsum(((vals - lam) ** 2).tolist()) / (lam * (n - lam))


def critical_affinity_approx(lambda_n_fn: Callable[[int], float], n: int) -> tuple[float, float]:
    """Exact affinity of ``P_{lambda_n,n}`` vs ``P_{1,n}`` and ``exp(-n (lambda_n - 1)^2 / 16)``."""
    lam_n = float(lambda_n_fn(n))
    exact = hellinger_affinity(ModelPair.homogeneous(n, 1.0, lam_n))
    return exact, math.exp(-n * (lam_n - 1.0) ** 2 / 16.0)


# --------------------------------------------------------------------------
# reports

REPORT_COLUMNS = ("n", "kl", "s2", "r", "R", "affinity")


def fmt(x: float) -> str:
    return f"{x:.9g}"


@dataclass(frozen=True)
class ContiguityReport:
    n: int
    kl: float
    s2: float
    r: float
    R: float
    hellinger_affinity: float
    delta_margin: dict[float, float] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            f"n={self.n}",
            f"kl={fmt(self.kl)}",
            f"s2={fmt(self.s2)}",
            f"r={fmt(self.r)}",
            f"R={fmt(self.R)}",
            f"affinity={fmt(self.hellinger_affinity)}",
        ]
        lines += [f"delta_margin[{fmt(a)}]={fmt(v)}" for a, v in self.delta_margin.items()]
        return "\n".join(lines) + "\n"

    def csv_row(self) -> list[str]:
        return [str(self.n)] + [fmt(v) for v in (self.kl, self.s2, self.r, self.R, self.hellinger_affinity)]


def contiguity_report(pair: ModelPair, rates: Iterable[float] = ()) -> ContiguityReport:
    kl = kl_divergence(pair)
    r, R = rate_quantities(pair)
    margins = {}
    for a in rates:
        if not (0 < a < 1):
            raise DomainError(f"rate a_n must lie in (0, 1), got {a}")
        margins[float(a)] = -kl + math.log(a)
    return ContiguityReport(pair.n, kl, lindeberg_normalizer(pair), r, R, hellinger_affinity(pair), margins)


# --------------------------------------------------------------------------
# rate margins


class Trend(str, enum.Enum):
    MINUS_INF = "diverges-to-minus-infinity"
    BOUNDED = "bounded"
    PLUS_INF = "diverges-to-plus-infinity"
    INCONCLUSIVE = "inconclusive"


SLOPE_THRESHOLD = 0.1
BOUNDED_RANGE = 1.0


def classify_trend(grid: Sequence[int], values: Sequence[float]) -> Trend:
    """Least-squares slope of ``values`` against ``log n`` over the top half of the grid.

    slope < -0.1 -> minus infinity; slope > 0.1 -> plus infinity;
    otherwise bounded if the top-half range is below 1, else inconclusive.
    """
    h = len(grid) // 2
    x = np.log(np.asarray(grid[h:], dtype=float))
    y = np.asarray(values[h:], dtype=float)
    if x.size < 2 or not np.all(np.isfinite(y)):
        return Trend.INCONCLUSIVE
    slope = float(np.polyfit(x, y, 1)[0])
    if slope < -SLOPE_THRESHOLD:
        return Trend.MINUS_INF
    if slope > SLOPE_THRESHOLD:
        return Trend.PLUS_INF
    if float(np.ptp(y)) < BOUNDED_RANGE:
        return Trend.BOUNDED
    return Trend.INCONCLUSIVE


@dataclass(frozen=True)
class RateMarginCurve:
    grid: tuple[int, ...]
    margins: tuple[float, ...]
    classification: Trend
    normalized: tuple[float, ...]
    R: tuple[float, ...]


def rate_margin_curve(
    pair_family: Callable[[int], ModelPair],
    a_fn: Callable[[int], float] | None,
    grid: Sequence[int],
    log_a_fn: Callable[[int], float] | None = None,
) -> RateMarginCurve:
    """``log a_n + R_n`` along ``grid`` with its trend classification.

    Pass ``log_a_fn`` instead of ``a_fn`` when ``a_n`` would underflow.
    ``normalized`` holds ``(KL + log a_n) / s_n`` (NaN where ``s_n = 0``).
    """
    if (a_fn is None) == (log_a_fn is None):
        raise DomainError("give exactly one of a_fn and log_a_fn")
    grid = [int(n) for n in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("grid must be strictly increasing")
    margins, normalized, Rs = [], [], []
    for n in grid:
        try:
            pair = pair_family(n)
            if log_a_fn is not None:
                log_a = float(log_a_fn(n))
            else:
                a = float(a_fn(n))
                if not (0 < a < 1):
                    raise DomainError(f"rate a_n must lie in (0, 1), got {a}")
                log_a = math.log(a)
            _, R = rate_quantities(pair)
            kl = kl_divergence(pair)
            s2 = lindeberg_normalizer(pair)
        except ValueError as exc:
            raise type(exc)(f"at n={n}: {exc}") from exc
        margins.append(log_a + R)
        normalized.append((kl + log_a) / math.sqrt(s2) if s2 > 0 else math.nan)
        Rs.append(R)
    return RateMarginCurve(tuple(grid), tuple(margins), classify_trend(grid, margins), tuple(normalized), tuple(Rs))
