import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcgraph.errors import InvalidModelError
from rcgraph.graph_core import (
    EdgeProbModel,
    GraphSample,
    child_seed,
    components,
    components_union_find,
    degree_histogram,
    index_to_pair,
    iter_pair_chunks,
    max_component_size,
    n_pairs,
    pair_index,
    read_edge_list,
    sample,
    write_edge_list,
)


def graph(n, edges):
    return GraphSample(n, np.array(edges, dtype=np.int64).reshape(-1, 2))


# --- sampling --------------------------------------------------------------


def test_zero_lambda_gives_empty_graph():
    assert sample(EdgeProbModel.homogeneous(5, 0.0), 1).m == 0


def test_full_lambda_gives_complete_graph():
    g = sample(EdgeProbModel.homogeneous(4, 4.0), 1)
    assert g.m == 6
    assert sorted(map(tuple, g.edges.tolist())) == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]


def test_mean_edge_count_homogeneous():
    n, lam = 10**5, 2.0
    N, p = n_pairs(n), lam / n
    counts = [sample(EdgeProbModel.homogeneous(n, lam), child_seed(7, r)).m for r in range(100)]
    assert abs(np.mean(counts) - N * p) <= 3 * math.sqrt(N * p)
    assert N * p == pytest.approx(99999.0)


@pytest.mark.parametrize("value", [-0.1, 5.5, math.inf, math.nan])
def test_out_of_range_lambda_rejected(value):
    with pytest.raises(InvalidModelError):
        EdgeProbModel.homogeneous(5, value)


def test_inhomogeneous_out_of_range_rejected_at_sampling():
    m = EdgeProbModel.inhomogeneous(4, lambda n, i, j: np.where(j == 4, 5.0, 1.0))
    with pytest.raises(InvalidModelError):
        sample(m, 0)


def test_false_lambda_max_detected():
    m = EdgeProbModel.inhomogeneous(30, lambda n, i, j: np.full(i.shape, 20.0), lambda_max=10.0)
    with pytest.raises(InvalidModelError):
        sample(m, 0)


def test_vertex_count_validated():
    with pytest.raises(InvalidModelError):
        EdgeProbModel.homogeneous(0, 0.0)


def _pair_frequencies(model, reps, seed=99):
    n = model.n
    hits = np.zeros(n_pairs(n))
    for r in range(reps):
        g = sample(model, child_seed(seed, r))
        if g.m:
            hits[pair_index(n, g.edges[:, 0], g.edges[:, 1])] += 1
    return hits / reps


def _edge_probs(model):
    i, j = index_to_pair(model.n, np.arange(n_pairs(model.n)))
    return model.lambdas_at(i, j) / model.n


SMALL_MODELS = {
    "homogeneous": EdgeProbModel.homogeneous(5, 1.5),
    "blocks": EdgeProbModel.from_blocks(6, [0, 1, 0, 1, 1, 0], [[3.0, 1.2], [1.2, 4.5]]),
    "inhomogeneous": EdgeProbModel.inhomogeneous(5, lambda n, i, j: (i + j) / 4.0),
    "thinned": EdgeProbModel.inhomogeneous(5, lambda n, i, j: (i * j) / 6.0, lambda_max=20 / 6.0),
}


@pytest.mark.slow
@pytest.mark.parametrize("name", list(SMALL_MODELS))
def test_edge_presence_frequencies(name):
    model = SMALL_MODELS[name]
    reps = 10**5
    p = _edge_probs(model)
    freq = _pair_frequencies(model, reps)
    assert np.all(np.abs(freq - p) <= 4 * np.sqrt(p * (1 - p) / reps))


def test_sampling_is_deterministic():
    for model in SMALL_MODELS.values():
        assert sample(model, 1234) == sample(model, 1234)
    big = EdgeProbModel.homogeneous(10**5, 3.0)
    assert sample(big, 5) == sample(big, 5)
    assert sample(big, 5) != sample(big, 6)


def test_samples_are_valid_graphs():
    models = list(SMALL_MODELS.values()) + [
        EdgeProbModel.homogeneous(2000, 5.0),
        EdgeProbModel.from_blocks(300, np.arange(300) % 3, [[20, 5, 1], [5, 30, 2], [1, 2, 9]]),
    ]
    for model in models:
        for s in range(5):
            sample(model, s).validate()


def test_block_and_edge_value_models_share_law():
    labels = np.array([0, 1, 1, 0, 1])
    mat = np.array([[2.0, 0.5], [0.5, 3.0]])
    blocks = EdgeProbModel.from_blocks(5, labels, mat)
    i, j = index_to_pair(5, np.arange(10))
    values = mat[labels[i - 1], labels[j - 1]]
    flat = EdgeProbModel.from_edge_values(5, values)
    np.testing.assert_array_equal(blocks.lambdas_at(i, j), flat.lambdas_at(i, j))


def test_schedule_model_is_homogeneous():
    m = EdgeProbModel.schedule(1000, lambda n: 1 + n ** (-1 / 3))
    assert m.is_homogeneous
    assert m.homogeneous_lambda == pytest.approx(1.1)


# --- indexing ----------------------------------------------------------------


@given(st.integers(2, 2_000_000), st.data())
def test_index_roundtrip(n, data):
    k = data.draw(st.integers(0, n_pairs(n) - 1))
    i, j = index_to_pair(n, np.array([k]))
    assert 1 <= i[0] < j[0] <= n
    assert pair_index(n, i, j)[0] == k


def test_index_covers_all_pairs_in_order():
    n = 7
    i, j = index_to_pair(n, np.arange(n_pairs(n)))
    assert list(zip(i.tolist(), j.tolist())) == [(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]


def test_pair_chunks_cover_everything():
    n = 50
    chunks = list(iter_pair_chunks(n, max_pairs=100))
    assert len(chunks) > 1
    ii = np.concatenate([c[0] for c in chunks])
    jj = np.concatenate([c[1] for c in chunks])
    np.testing.assert_array_equal(pair_index(n, ii, jj), np.arange(n_pairs(n)))


# --- components and degrees ------------------------------------------------------


def test_components_examples():
    cs = components(graph(5, []))
    assert cs.sizes == (1, 1, 1, 1, 1) and cs.max_size == 1 and not cs.is_connected
    cs = components(graph(5, [(1, 2), (2, 3)]))
    assert cs.sizes == (3, 1, 1) and cs.max_size == 3
    cs = components(graph(4, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]))
    assert cs.is_connected and cs.max_size == 4


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.floats(0.0, 4.0), st.integers(0, 2**32))
def test_components_match_union_find(n, lam, seed):
    g = sample(EdgeProbModel.homogeneous(n, min(lam, n)), seed)
    fast, ref = components(g), components_union_find(g)
    assert fast == ref
    assert sum(fast.sizes) == n
    assert fast.max_size == fast.sizes[0] == max_component_size(g)
    assert fast.is_connected == (fast.max_size == n)


def test_components_repeatable_on_duplicate_run():
    model = EdgeProbModel.homogeneous(20000, 1.2)
    assert components(sample(model, 3)) == components(sample(model, 3))


def test_degree_histogram_examples():
    assert degree_histogram(graph(3, [])).counts == {0: 3}
    assert degree_histogram(graph(3, [(1, 2)])).counts == {0: 1, 1: 2}
    assert degree_histogram(graph(4, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])).counts == {3: 4}


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 200), st.floats(0.0, 6.0), st.integers(0, 2**32))
def test_degree_sum_is_twice_edge_count(n, lam, seed):
    g = sample(EdgeProbModel.homogeneous(n, min(lam, n)), seed)
    h = degree_histogram(g)
    assert sum(h.counts.values()) == n
    assert sum(k * c for k, c in h.counts.items()) == 2 * g.m


# --- edge-list format -----------------------------------------------------------------


def test_edge_list_roundtrip(tmp_path):
    g = sample(EdgeProbModel.homogeneous(40, 3.0), 11)
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    text = path.read_text().splitlines()
    assert text[0] == f"40 {g.m}"
    assert read_edge_list(path) == g


def test_edge_list_to_stream_and_empty_graph():
    buf = io.StringIO()
    write_edge_list(graph(3, []), buf)
    assert buf.getvalue() == "3 0\n"
    assert read_edge_list(io.StringIO(buf.getvalue())).m == 0


@pytest.mark.parametrize(
    "text",
    ["3 1\n1 1\n", "3 2\n1 2\n", "3 1\n1 4\n", "3 2\n1 2\n2 1\n", "x y\n", "3 1\n1 2 3\n"],
)
def test_malformed_edge_list_rejected(text):
    with pytest.raises(ValueError):
        read_edge_list(io.StringIO(text))


def test_child_seeds_are_order_free():
    a = [child_seed(42, n, r) for n in (10, 20) for r in range(3)]
    b = [child_seed(42, n, r) for n in (20, 10) for r in reversed(range(3))]
    assert sorted(a) == sorted(b)
    assert len(set(a)) == 6
    assert child_seed(42, 10, 0) == child_seed(42, 10, 0)
