"""Property-based checks of the analytic identities and inequalities."""

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rcgraph.contiguity import (
    ModelPair,
    classify_trend,
    hellinger_affinity,
    kl_divergence,
    lindeberg_normalizer,
    log_hellinger_affinity,
    rate_quantities,
)
from rcgraph.graph_core import EdgeProbModel, n_pairs
from rcgraph.inference import exact_law, ks_statistic_normal, log_lr
from rcgraph.regimes import survival_probability

SETTINGS = settings(max_examples=80, deadline=None)


@st.composite
def flat_pairs(draw, max_n=12, max_rel=None):
    n = draw(st.integers(2, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    N = n_pairs(n)
    # log-uniform base probabilities, bounded away from 0 and 1
    p = np.exp(rng.uniform(math.log(1e-6), math.log(0.9), N))
    if max_rel is None:
        q = np.exp(rng.uniform(math.log(1e-6), math.log(0.9), N))
    else:
        q = p * (1 + rng.uniform(-max_rel, max_rel, N))
    q = np.clip(q, 1e-9, 0.95)
    return ModelPair(EdgeProbModel.from_edge_values(n, p * n), EdgeProbModel.from_edge_values(n, q * n))


def swap(pair):
    return ModelPair(pair.q_model, pair.p_model)


@SETTINGS
@given(flat_pairs())
def test_kl_nonnegative_and_below_chi_square(pair):
    kl = kl_divergence(pair)
    _, R = rate_quantities(pair)
    assert kl >= 0
    assert kl <= R * (1 + 1e-12) + 1e-300


@SETTINGS
@given(flat_pairs(max_rel=0.05))
def test_normalizer_tracks_rate_for_small_perturbations(pair):
    r, R = rate_quantities(pair)
    assume(R > 0)
    assert abs(lindeberg_normalizer(pair) / R - 1) <= 5 * r


@SETTINGS
@given(flat_pairs())
def test_affinity_symmetric_in_unit_interval(pair):
    a, b = hellinger_affinity(pair), hellinger_affinity(swap(pair))
    assert 0 < a <= 1
    assert math.isclose(a, b, rel_tol=1e-12)


@SETTINGS
@given(flat_pairs(), st.integers(0, 2**32 - 1))
def test_additivity_over_edge_partitions(pair, seed):
    n = pair.n
    mu = pair.p_model.lambdas_at(*_pairs(n))
    lam = pair.q_model.lambdas_at(*_pairs(n))
    mask = np.random.default_rng(seed).random(mu.size) < 0.5
    # edges outside a part carry identical probabilities and contribute nothing
    part_a = ModelPair(EdgeProbModel.from_edge_values(n, mu), EdgeProbModel.from_edge_values(n, np.where(mask, lam, mu)))
    part_b = ModelPair(EdgeProbModel.from_edge_values(n, mu), EdgeProbModel.from_edge_values(n, np.where(mask, mu, lam)))
    for op in (kl_divergence, lindeberg_normalizer, log_hellinger_affinity, lambda p: rate_quantities(p)[1]):
        whole, a, b = op(pair), op(part_a), op(part_b)
        assert math.isclose(whole, a + b, rel_tol=1e-10, abs_tol=1e-14)


def _pairs(n):
    iu = np.triu_indices(n, 1)
    return iu[0] + 1, iu[1] + 1


@settings(max_examples=40, deadline=None)
@given(flat_pairs(max_n=4))
def test_change_of_measure_identity(pair):
    law = exact_law(pair)
    lr = np.array([log_lr(pair, g).value for g in law.graphs])
    assert math.isclose(math.fsum(np.exp(law.log_q + lr).tolist()), 1.0, abs_tol=1e-12)


@settings(max_examples=40, deadline=None)
@given(flat_pairs(max_n=4))
def test_enumerated_kl_matches_closed_form(pair):
    law = exact_law(pair)
    qm = np.exp(law.log_q)
    kl = math.fsum((qm * (law.log_q - law.log_p)).tolist())
    assert math.isclose(kl_divergence(pair), kl, abs_tol=1e-12)


@SETTINGS
@given(st.floats(1.0 + 1e-9, 50.0))
def test_survival_fixed_point(lam):
    z = survival_probability(lam)
    # for large lambda the root 1 - exp(-lambda) rounds to 1.0
    assert 0 < z <= 1
    assert abs(z - 1 + math.exp(-lam * z)) <= 1e-12


@SETTINGS
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=200))
def test_ks_statistic_in_unit_interval(values):
    assert 0.0 <= ks_statistic_normal(values) <= 1.0


@SETTINGS
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=12), st.floats(-100, 100))
def test_trend_invariant_under_constant_shift(values, shift):
    grid = [10 * 2**k for k in range(len(values))]
    shifted = [v + shift for v in values]
    # polyfit slopes can differ in the last bits after a shift
    slope = np.polyfit(np.log(grid[len(grid) // 2:]), values[len(grid) // 2:], 1)[0]
    assume(abs(abs(slope) - 0.1) > 1e-6)
    assume(abs(np.ptp(values[len(grid) // 2:]) - 1.0) > 1e-6)
    assert classify_trend(grid, values) == classify_trend(grid, shifted)
