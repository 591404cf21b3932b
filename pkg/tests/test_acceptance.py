"""Acceptance criteria, one PASS/FAIL line each (see the terminal summary).

Monte Carlo criteria use the stated thresholds directly; stated runtime
bounds are part of the check, approximate ones are only reported.
"""

import itertools
import math
import time

import numpy as np
import pytest

from rcgraph.contiguity import (
    ModelPair,
    Trend,
    critical_affinity_approx,
    hellinger_affinity,
    kl_divergence,
    lindeberg_normalizer,
    log_hellinger_affinity,
    rate_margin_curve,
    rate_quantities,
)
from rcgraph.experiments import (
    ExperimentSpec,
    critical_family,
    homogeneous_family,
    log_multiple_family,
    run_experiment,
    supercritical_family,
    two_block_family,
)
from rcgraph.graph_core import EdgeProbModel, n_pairs
from rcgraph.inference import clt_check, enumerate_exact, exact_law, log_lr, lr_region_probabilities, lr_test
from rcgraph.regimes import supercritical_schedule, survival_probability

SEED = 20261014


def spec(name, family, grid, reps, **params):
    return ExperimentSpec(name, family, tuple(grid), reps, SEED, params)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.s = time.perf_counter() - self.t0


def test_criterion_01_survival_probability(criterion):
    with Timer() as t:
        z = survival_probability(2.0)
        resid = abs(z - 1 + math.exp(-2 * z))
        grid = np.arange(1.01, 5.0 + 1e-9, 0.01)
        zs = [survival_probability(x) for x in grid]
        mono = all(b >= a for a, b in zip(zs, zs[1:]))
    ok = abs(z - 0.796812) <= 1e-6 and resid < 1e-12 and mono and t.s < 1
    criterion("1 zeta_2 value, residual, monotonicity", ok, f"zeta={z:.9f} resid={resid:.2e} mono={mono} {t.s:.2f}s")


def _pi_prime(pm, qm, a, region):
    return pm[region].sum() / a + qm[~region].sum()


def test_criterion_02_enumeration_oracle(criterion):
    worst = 0.0
    minimal = True
    with Timer() as t:
        cases = [(3, 0.2, 0.3, 0.5), (3, 0.2, 0.8, 0.05), (3, 0.4, 0.25, 0.9), (4, 0.3, 0.6, 0.2), (4, 0.5, 0.4, 0.7),
                 (4, 0.1, 0.15, 0.95)]
        for n, p, q, a in cases:
            pair = ModelPair.from_probabilities(n, p, q)
            res = enumerate_exact(pair, lambda g: lr_test(pair, g, a))
            pr, qr = lr_region_probabilities(pair, a)
            worst = max(worst, abs(res.kl - kl_divergence(pair)), abs(res.affinity - hellinger_affinity(pair)),
                        abs(res.p_event - pr), abs(res.q_event - qr))
            if n == 3:
                law = exact_law(pair)
                pm, qm = np.exp(law.log_p), np.exp(law.log_q)
                psi = np.array([lr_test(pair, g, a) for g in law.graphs])
                best = min(_pi_prime(pm, qm, a, np.array(b)) for b in itertools.product((False, True), repeat=8))
                minimal &= _pi_prime(pm, qm, a, psi) <= best + 1e-12
    ok = worst <= 1e-12 and minimal and t.s < 5
    criterion("2 enumeration oracle and LR-test optimality", ok, f"max diff={worst:.2e} psi minimal={minimal} {t.s:.2f}s")


@pytest.mark.slow
def test_criterion_03_giant_component(criterion):
    with Timer() as t:
        base = run_experiment(spec("giant_component", homogeneous_family(2.0), [10**5], 100, nu=0.75))
        pert = run_experiment(spec("giant_component", supercritical_family(2.0, 0.1), [10**5], 100, nu=0.75))
    fb, fp = base.frequency(), pert.frequency()
    ok = fb <= 0.05 and fp <= 0.10
    criterion("3 giant component, base and perturbed", ok, f"base={fb:.3f} perturbed={fp:.3f} {t.s:.1f}s")


@pytest.mark.slow
def test_criterion_04_fragmentation(criterion):
    with Timer() as t:
        res = run_experiment(spec("fragmentation", homogeneous_family(0.5), [10**5], 100, a=2, a_prime=8))
    up, low = res.frequency("fragmentation.upper"), res.frequency("fragmentation.lower")
    ok = up <= 0.05 and low <= 0.05
    criterion("4 fragmentation, both tails", ok, f"upper={up:.3f} lower={low:.3f} {t.s:.1f}s")


@pytest.mark.slow
def test_criterion_05_critical_window(criterion):
    with Timer() as t:
        res = run_experiment(spec("critical_window", critical_family(0.0), [10**6], 50, a=[0.5, 0.2, 0.1]))
    f = [res.frequency(f"critical_window[a={a:g}]") for a in (0.5, 0.2, 0.1)]
    ok = f[2] >= 0.8 and f[0] <= f[1] <= f[2]
    criterion("5 critical window", ok, f"a=0.5:{f[0]:.2f} a=0.2:{f[1]:.2f} a=0.1:{f[2]:.2f} {t.s:.1f}s")


@pytest.mark.slow
def test_criterion_06_connectivity(criterion):
    with Timer() as t:
        high = run_experiment(spec("connectivity", log_multiple_family(1.5), [10**4], 100)).frequency()
        low = run_experiment(spec("connectivity", log_multiple_family(0.5), [10**4], 100)).frequency()
    ok = high >= 0.95 and low <= 0.05 and t.s < 30
    criterion("6 connectivity thresholds", ok, f"1.5 log n:{high:.2f} 0.5 log n:{low:.2f} {t.s:.1f}s")


@pytest.mark.slow
def test_criterion_07_degree_distribution(criterion):
    with Timer() as t:
        base = run_experiment(spec("degree_distribution", homogeneous_family(1.0), [10**5], 100, eps=0.01))
        pert = run_experiment(spec("degree_distribution", two_block_family(1.0, 0.004), [10**5], 100, eps=0.01))
    info = pert.metadata["admissibility"][10**5]
    fb, fp = base.frequency(), pert.frequency()
    ok = fb <= 0.05 and fp <= 0.05 and info["admissible"]
    criterion("7 degree distribution, base and perturbed", ok,
              f"base={fb:.3f} perturbed={fp:.3f} sq_norm={info['sq_norm']:.4g}<{info['bound']:.4g} {t.s:.1f}s")


def test_criterion_08_clt(criterion):
    with Timer() as t:
        lam_n = supercritical_schedule(2.0, 0.1, 10**4)
        ks = clt_check(ModelPair.homogeneous(10**4, 2.0, lam_n), 2000, SEED)
    ok = abs(lam_n - 2.019194) < 1e-6 and ks < 0.05 and t.s < 60
    criterion("8 CLT of normalized log-LR sums", ok, f"lambda_n={lam_n:.6f} KS={ks:.4f} {t.s:.1f}s")


def test_criterion_09_rate_margins(criterion):
    grid = [10**3, 10**4, 10**5, 10**6]
    with Timer() as t:
        # family with R_n growing polynomially so both constructed rates separate clearly
        def growing(n):
            return ModelPair.homogeneous(n, 2.0, 2.0 * (1 + n**-0.4))

        def R(n):
            return rate_quantities(growing(n))[1]

        low = rate_margin_curve(growing, None, grid, log_a_fn=lambda n: -2 * R(n)).classification
        high = rate_margin_curve(growing, None, grid, log_a_fn=lambda n: -0.5 * R(n)).classification

        def schedule(n):
            return ModelPair.homogeneous(n, 2.0, supercritical_schedule(2.0, 0.1, n))

        # a_n = n^(-delta') with the rate exponent above delta, so a_n = o(exp(-R_n))
        sched = rate_margin_curve(schedule, lambda n: n**-0.3, grid).classification
    ok = low is Trend.MINUS_INF and high is Trend.PLUS_INF and sched is Trend.MINUS_INF and t.s < 1
    criterion("9 rate-margin classification", ok,
              f"exp(-2R)={low.value} exp(-R/2)={high.value} n^-0.3 vs delta=0.1: {sched.value} {t.s:.2f}s")


def test_criterion_10_critical_affinity(criterion):
    with Timer() as t:
        exact, approx = critical_affinity_approx(lambda n: 1 + n**-0.5, 10**6)
    ok = abs(exact - math.exp(-1 / 16)) <= 0.01 and abs(approx - 0.939413) < 1e-6 and t.s < 1
    criterion("10 critical affinity", ok, f"exact={exact:.6f} approx={approx:.6f} {t.s:.2f}s")


def _random_pair(rng, n, max_rel=None):
    N = n_pairs(n)
    p = np.exp(rng.uniform(math.log(1e-5), math.log(0.9), N))
    if max_rel is None:
        q = np.exp(rng.uniform(math.log(1e-5), math.log(0.9), N))
    else:
        q = p * (1 + rng.uniform(-max_rel, max_rel, N))
    return ModelPair(EdgeProbModel.from_edge_values(n, p * n), EdgeProbModel.from_edge_values(n, q * n))


def test_criterion_11_property_suite(criterion):
    rng = np.random.default_rng(SEED)
    count = 200
    fails = {k: 0 for k in ("kl>=0", "kl<=R", "s2~R", "symmetry", "additivity", "E_Q[dP/dQ]=1")}
    with Timer() as t:
        for _ in range(count):
            pair = _random_pair(rng, int(rng.integers(2, 25)))
            kl = kl_divergence(pair)
            r, R = rate_quantities(pair)
            fails["kl>=0"] += kl < 0
            fails["kl<=R"] += kl > R * (1 + 1e-12)
            swapped = ModelPair(pair.q_model, pair.p_model)
            fails["symmetry"] += not math.isclose(hellinger_affinity(pair), hellinger_affinity(swapped), rel_tol=1e-12)

            n = pair.n
            iu = np.triu_indices(n, 1)
            mu = pair.p_model.lambdas_at(iu[0] + 1, iu[1] + 1)
            lam = pair.q_model.lambdas_at(iu[0] + 1, iu[1] + 1)
            mask = rng.random(mu.size) < 0.5
            base = EdgeProbModel.from_edge_values(n, mu)
            parts = [ModelPair(base, EdgeProbModel.from_edge_values(n, np.where(m, lam, mu))) for m in (mask, ~mask)]
            for op in (kl_divergence, lindeberg_normalizer, log_hellinger_affinity, lambda x: rate_quantities(x)[1]):
                fails["additivity"] += not math.isclose(op(pair), op(parts[0]) + op(parts[1]),
                                                        rel_tol=1e-10, abs_tol=1e-14)

            small = _random_pair(rng, int(rng.integers(2, 25)), max_rel=0.05)
            r, R = rate_quantities(small)
            fails["s2~R"] += r > 0.05 or abs(lindeberg_normalizer(small) / R - 1) > 5 * r

            tiny = _random_pair(rng, int(rng.integers(2, 5)))
            law = exact_law(tiny)
            lr = np.array([log_lr(tiny, g).value for g in law.graphs])
            fails["E_Q[dP/dQ]=1"] += abs(math.fsum(np.exp(law.log_q + lr).tolist()) - 1) > 1e-12
    ok = not any(fails.values()) and t.s < 10
    criterion(f"11 property suite over {count} random pairs each", ok,
              " ".join(f"{k}:{v}" for k, v in fails.items()) + f" {t.s:.1f}s")


def test_rate_exponent_below_delta_is_not_admissible():
    # a_n = n^(-delta') with delta' < delta gives margins (delta - delta') log n, which grow
    def schedule(n):
        return ModelPair.homogeneous(n, 2.0, supercritical_schedule(2.0, 0.1, n))

    grid = [10**3, 10**4, 10**5, 10**6]
    curve = rate_margin_curve(schedule, lambda n: n**-0.05, grid)
    assert all(b > a for a, b in zip(curve.margins, curve.margins[1:]))
    assert curve.classification is Trend.BOUNDED
