"""Monte Carlo regime experiments with reproducible per-replication streams.

Every ``(n, r)`` replication is an independent task whose graph is sampled
with ``child_seed(seed, n, r)``; tasks may run on a thread pool but results
are always merged in ``(n, r)`` order, so the raw CSV is byte-identical for a
given spec and seed regardless of ``threads``.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from scipy.stats import poisson

from . import regimes
from .contiguity import ModelPair, rate_quantities
from .errors import ConfigError, RCGraphError
from .graph_core import EdgeProbModel, GraphSample, child_seed, degrees, max_component_size, sample

EXPERIMENTS = ("giant_component", "fragmentation", "critical_window", "connectivity", "degree_distribution")
POISSON_TAIL = 1e-12

RAW_PREFIX = ("name", "n", "rep", "seed_child")
AGGREGATE_COLUMNS = ("name", "n", "reps", "frequency", "stderr", "wall_ms")


# --------------------------------------------------------------------------
# model families (n -> EdgeProbModel)


@dataclass(frozen=True)
class ModelFamily:
    name: str
    build: Callable[[int], EdgeProbModel]
    base_lambda: float | None = None
    params: dict[str, float] = field(default_factory=dict)

    def __call__(self, n: int) -> EdgeProbModel:
        return self.build(n)


def homogeneous_family(lam: float) -> ModelFamily:
    return ModelFamily("homogeneous", lambda n: EdgeProbModel.homogeneous(n, lam), lam, {"lambda": lam})


def supercritical_family(lam: float, delta: float) -> ModelFamily:
    """Homogeneous perturbation with ``R_n ~ delta log n`` around base ``lam``."""
    return ModelFamily(
        "supercritical_perturbed",
        lambda n: EdgeProbModel.homogeneous(n, regimes.supercritical_schedule(lam, delta, n)),
        lam,
        {"lambda": lam, "delta": delta},
    )


def critical_family(theta: float) -> ModelFamily:
    return ModelFamily(
        "critical", lambda n: EdgeProbModel.homogeneous(n, regimes.critical_schedule(theta, n)), 1.0, {"theta": theta}
    )


def log_multiple_family(c: float) -> ModelFamily:
    """``lambda_n = c log n``."""
    return ModelFamily("log_multiple", lambda n: EdgeProbModel.homogeneous(n, c * math.log(n)), None, {"c": c})


def complete_family() -> ModelFamily:
    return ModelFamily("complete", lambda n: EdgeProbModel.homogeneous(n, float(n)))


def _two_block(n: int, within: float, across: float) -> EdgeProbModel:
    labels = (np.arange(n) >= n // 2).astype(np.int64)
    return EdgeProbModel.from_blocks(n, labels, [[within, across], [across, within]])


def two_block_family(lam: float, c: float) -> ModelFamily:
    """Two halves with ``lam (1 + c)`` inside and ``lam (1 - c)`` across."""
    return ModelFamily(
        "two_block", lambda n: _two_block(n, lam * (1 + c), lam * (1 - c)), lam, {"lambda": lam, "c": c}
    )


def log_two_block_family(d: float, c: float) -> ModelFamily:
    """Edge lambdas ``c_ij log n`` with ``c_ij = d (1 +/- c)`` on a two-block split."""
    return ModelFamily(
        "log_two_block",
        lambda n: _two_block(n, d * (1 + c) * math.log(n), d * (1 - c) * math.log(n)),
        None,
        {"d": d, "c": c},
    )


FAMILIES: dict[str, tuple[Callable[..., ModelFamily], tuple[str, ...]]] = {
    "homogeneous": (homogeneous_family, ("lambda",)),
    "supercritical_perturbed": (supercritical_family, ("lambda", "delta")),
    "critical": (critical_family, ("theta",)),
    "log_multiple": (log_multiple_family, ("c",)),
    "complete": (complete_family, ()),
    "two_block": (two_block_family, ("lambda", "c")),
    "log_two_block": (log_two_block_family, ("d", "c")),
}


def make_family(name: str, **values: float) -> ModelFamily:
    if name not in FAMILIES:
        raise ConfigError(f"unknown model family {name!r}; choose from {sorted(FAMILIES)}")
    fn, keys = FAMILIES[name]
    missing = [k for k in keys if k not in values]
    extra = [k for k in values if k not in keys]
    if missing or extra:
        raise ConfigError(f"family {name!r} takes {list(keys)}; missing {missing}, unexpected {extra}")
    return fn(*(float(values[k]) for k in keys))


# --------------------------------------------------------------------------
# specs and results


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    model: ModelFamily
    n_grid: tuple[int, ...]
    reps: int
    seed: int
    params: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        if self.name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.name!r}; choose from {list(EXPERIMENTS)}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigError(f"reps must be a positive integer, got {self.reps!r}")
        if not self.n_grid:
            raise ConfigError("n_grid must not be empty")
        if any(int(n) != n or n < 2 for n in self.n_grid):
            raise ConfigError(f"n_grid entries must be integers >= 2, got {self.n_grid}")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError(f"n_grid must be strictly increasing, got {self.n_grid}")


@dataclass(frozen=True)
class RawRecord:
    n: int
    rep: int
    seed_child: int
    outcome: dict[str, float]


@dataclass(frozen=True)
class Aggregate:
    name: str
    n: int
    reps: int
    frequency: float
    stderr: float
    wall_ms: float


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    fields: tuple[str, ...]
    records: list[RawRecord]
    aggregates: list[Aggregate]
    metadata: dict[str, Any] = field(default_factory=dict)

    def frequency(self, name: str | None = None, n: int | None = None) -> float:
        """Frequency of aggregate ``name`` (default: the only one) at ``n`` (default: last)."""
        rows = [a for a in self.aggregates if name is None or a.name == name]
        names = {a.name for a in rows}
        if len(names) != 1:
            raise KeyError(f"ambiguous or unknown aggregate {name!r}; have {sorted({a.name for a in self.aggregates})}")
        n = rows[-1].n if n is None else n
        return next(a.frequency for a in rows if a.n == n)

    def aggregate(self, name: str, n: int) -> Aggregate:
        return next(a for a in self.aggregates if a.name == name and a.n == n)

    def outcomes(self, field_name: str, n: int | None = None) -> np.ndarray:
        return np.array([r.outcome[field_name] for r in self.records if n is None or r.n == n])


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.9g}"


def write_raw_csv(result: ExperimentResult, dest) -> None:
    _write_csv(
        dest,
        RAW_PREFIX + result.fields,
        ([result.spec.name, r.n, r.rep, r.seed_child] + [r.outcome[f] for f in result.fields] for r in result.records),
    )


def write_aggregate_csv(result: ExperimentResult, dest) -> None:
    _write_csv(
        dest,
        AGGREGATE_COLUMNS,
        ([a.name, a.n, a.reps, a.frequency, a.stderr, a.wall_ms] for a in result.aggregates),
    )


def _write_csv(dest, header, rows) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])

    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            emit(fh)
    else:
        emit(dest)


# --------------------------------------------------------------------------
# harness


Outcome = Callable[[int, GraphSample], dict[str, float]]


def _run(spec: ExperimentSpec, fields: Sequence[str], outcome: Outcome, events: Sequence[tuple[str, str]],
         threads: int = 1) -> ExperimentResult:
    models = {}
    for n in spec.n_grid:
        try:
            models[n] = spec.model(n)
        except RCGraphError as exc:
            raise ConfigError(f"model family {spec.model.name!r} invalid at n={n}: {exc}") from exc
    tasks = [(n, r) for n in spec.n_grid for r in range(spec.reps)]

    def work(task):
        n, r = task
        t0 = time.perf_counter()
        s = child_seed(spec.seed, n, r)
        out = outcome(n, sample(models[n], s))
        return RawRecord(n, r, s, out), time.perf_counter() - t0

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            done = list(pool.map(work, tasks))
    else:
        done = [work(t) for t in tasks]

    records = [rec for rec, _ in done]
    wall = {n: 0.0 for n in spec.n_grid}
    for rec, dt in done:
        wall[rec.n] += dt
    aggregates = []
    for agg_name, flag in events:
        for n in spec.n_grid:
            hits = [rec.outcome[flag] for rec in records if rec.n == n]
            f = float(np.mean(hits))
            aggregates.append(Aggregate(agg_name, n, len(hits), f, math.sqrt(f * (1 - f) / len(hits)), 1e3 * wall[n]))
    meta = {
        "spec": {
            "name": spec.name,
            "family": spec.model.name,
            "family_params": dict(spec.model.params),
            "n_grid": list(spec.n_grid),
            "reps": spec.reps,
            "seed": spec.seed,
            "params": dict(spec.params),
        },
        "wall_ms": {n: 1e3 * w for n, w in wall.items()},
    }
    return ExperimentResult(spec, tuple(fields), records, aggregates, meta)


def _param(spec: ExperimentSpec, key: str, default=None):
    if key in spec.params:
        return spec.params[key]
    if default is not None:
        return default
    raise ConfigError(f"experiment {spec.name!r} needs parameter {key!r}")


def _base_lambda(spec: ExperimentSpec) -> float:
    lam = spec.params.get("lambda", spec.model.base_lambda)
    if lam is None:
        raise ConfigError(f"experiment {spec.name!r} needs a base 'lambda' (family {spec.model.name!r} has none)")
    return float(lam)


def run_giant_component(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """Frequency of ``| |C_max| - zeta n | > n^nu`` with ``zeta`` from the base lambda."""
    spec.validate()
    lam = _base_lambda(spec)
    nu = float(_param(spec, "nu"))
    if lam <= 1:
        raise ConfigError(f"giant component needs a supercritical base lambda > 1, got {lam}")
    if not (0.5 < nu < 1):
        raise ConfigError(f"nu must lie in (1/2, 1), got {nu}")
    zeta = regimes.survival_probability(lam)

    def outcome(n, g):
        cmax = max_component_size(g)
        dev = abs(cmax - zeta * n)
        return {"cmax": cmax, "deviation": dev, "exceeds": dev > n**nu}

    res = _run(spec, ("cmax", "deviation", "exceeds"), outcome, [("giant_component", "exceeds")], threads)
    res.metadata["zeta"] = zeta
    return res


def run_fragmentation(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """Frequencies of ``|C_max| >= a' log n`` (upper) and ``|C_max| <= a log n`` (lower)."""
    spec.validate()
    lam = _base_lambda(spec)
    if not (0 < lam < 1):
        raise ConfigError(f"fragmentation needs 0 < lambda < 1, got {lam}")
    a, a_prime = float(_param(spec, "a")), float(_param(spec, "a_prime"))
    inv_I = 1.0 / regimes.fragmentation_constant(lam)
    if not (0 < a < inv_I < a_prime):
        raise ConfigError(f"need 0 < a < 1/I_lambda = {inv_I:.9g} < a_prime, got a={a}, a_prime={a_prime}")

    def outcome(n, g):
        cmax = max_component_size(g)
        L = math.log(n)
        return {"cmax": cmax, "upper": cmax >= a_prime * L, "lower": cmax <= a * L}

    res = _run(spec, ("cmax", "upper", "lower"), outcome,
               [("fragmentation.upper", "upper"), ("fragmentation.lower", "lower")], threads)
    res.metadata["inverse_I"] = inv_I
    return res


def _as_list(v) -> list[float]:
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    return [float(v)]


def run_critical_window(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """Frequency of ``a n^(2/3) <= |C_max| <= n^(2/3) / a`` for each requested ``a``."""
    spec.validate()
    a_values = _as_list(_param(spec, "a"))
    for a in a_values:
        if not (0 < a < 1):
            raise ConfigError(f"critical window needs 0 < a < 1, got {a}")
    flags = [f"in_window[a={a:g}]" for a in a_values]

    def outcome(n, g):
        cmax = max_component_size(g)
        scale = n ** (2.0 / 3.0)
        out = {"cmax": cmax, "scaled": cmax / scale}
        for a, f in zip(a_values, flags):
            out[f] = a * scale <= cmax <= scale / a
        return out

    return _run(spec, ("cmax", "scaled", *flags), outcome,
                [(f"critical_window[a={a:g}]", f) for a, f in zip(a_values, flags)], threads)


def connectivity_conditions(d: float, model: EdgeProbModel) -> dict[str, float | bool]:
    """Finite-n diagnostics for edge lambdas ``c_ij log n`` against ``d log n``.

    Reports ``sup |c_ij/d - 1|`` and ``sum (c_ij - d)^2 / (d (n - log n))``;
    the sufficient condition for asymptotic connectivity wants the first to
    vanish and the second to stay below 1/4, with ``d > 1`` and
    ``d log n / n < 1``.
    """
    n = model.n
    L = math.log(n)
    mu = d * L
    r, R = rate_quantities(ModelPair(EdgeProbModel.homogeneous(n, mu), model))
    sq = R * mu * (n - mu) / L**2
    ratio = sq / (d * (n - L))
    return {
        "sup_rel_dev": r,
        "sum_ratio": ratio,
        "sum_ratio_below_quarter": ratio < 0.25,
        "d_above_one": d > 1,
        "d_log_n_over_n_below_one": mu / n < 1,
    }


def run_connectivity(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """Frequency with which the sampled graph is connected."""
    spec.validate()

    def outcome(n, g):
        cmax = max_component_size(g)
        return {"cmax": cmax, "connected": cmax == n}

    res = _run(spec, ("cmax", "connected"), outcome, [("connectivity", "connected")], threads)
    d = spec.params.get("d", spec.model.params.get("d") if spec.model.name == "log_two_block" else None)
    if d is not None:
        res.metadata["conditions"] = {n: connectivity_conditions(float(d), spec.model(n)) for n in spec.n_grid}
    return res


def poisson_masses(lam: float, kmax: int) -> np.ndarray:
    return poisson.pmf(np.arange(kmax + 1), lam)


def poisson_cutoff(lam: float, tail: float = POISSON_TAIL) -> int:
    """Smallest ``k >= lam`` with Poisson mass below ``tail``."""
    k = int(math.ceil(lam))
    while poisson.pmf(k, lam) >= tail:
        k += 1
    return k


def max_degree_deviation(g: GraphSample, pk: np.ndarray) -> float:
    """``max_k |P_k - p_k|`` over ``k = 0..max(max degree, len(pk) - 1)``."""
    counts = np.bincount(degrees(g))
    K = max(counts.size, pk.size)
    emp = np.zeros(K)
    emp[: counts.size] = counts / g.n
    ref = np.zeros(K)
    ref[: pk.size] = pk
    return float(np.max(np.abs(emp - ref)))


def _eps_rule(params: dict[str, Any]) -> Callable[[int], float]:
    if "eps" in params:
        eps = float(params["eps"])
        return lambda n: eps
    if "eps_c" in params:
        c, power = float(params["eps_c"]), float(params.get("eps_power", 0.5))
        return lambda n: c * n ** (-power)
    raise ConfigError("degree_distribution needs 'eps' or 'eps_c' (with optional 'eps_power')")


def degree_admissibility(lam: float, model: EdgeProbModel, eps: float, delta: float) -> dict[str, float | bool]:
    """Check ``sum (lambda_ij - lam)^2 < n lam delta log(n eps^2)`` for a perturbed model."""
    n = model.n
    r, R = rate_quantities(ModelPair(EdgeProbModel.homogeneous(n, lam), model))
    sq = R * lam * (n - lam)
    bound = n * lam * delta * math.log(n * eps * eps) if n * eps * eps > 0 else -math.inf
    return {"sup_dev": r * lam, "sq_norm": sq, "bound": bound, "admissible": sq < bound}


def run_degree_distribution(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """Frequency of ``max_k |P_k - p_k| > eps_n`` against Poisson(base lambda)."""
    spec.validate()
    lam = _base_lambda(spec)
    if lam <= 0:
        raise ConfigError(f"degree distribution needs lambda > 0, got {lam}")
    eps_fn = _eps_rule(spec.params)
    eps_n = {}
    for n in spec.n_grid:
        e = eps_fn(n)
        if not e > 0:
            raise ConfigError(f"eps rule gives nonpositive eps_n={e} at n={n}")
        eps_n[n] = e
    pk = poisson_masses(lam, poisson_cutoff(lam))

    admissibility = {}
    probe = spec.model(spec.n_grid[0])
    if not probe.is_homogeneous:
        delta = float(spec.params.get("delta", 0.5))
        for n in spec.n_grid:
            info = degree_admissibility(lam, spec.model(n), eps_n[n], delta)
            if not info["admissible"]:
                raise ConfigError(f"perturbation not admissible at n={n}: {info}")
            admissibility[n] = info

    def outcome(n, g):
        dev = max_degree_deviation(g, pk)
        return {"max_dev": dev, "exceeds": dev > eps_n[n]}

    res = _run(spec, ("max_dev", "exceeds"), outcome, [("degree_distribution", "exceeds")], threads)
    res.metadata["eps_n"] = eps_n
    if admissibility:
        res.metadata["admissibility"] = admissibility
    return res


RUNNERS = {
    "giant_component": run_giant_component,
    "fragmentation": run_fragmentation,
    "critical_window": run_critical_window,
    "connectivity": run_connectivity,
    "degree_distribution": run_degree_distribution,
}


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    spec.validate()
    return RUNNERS[spec.name](spec, threads=threads)
