import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from migrantnet.assortativity import (
    assortativity_histograms,
    categorical_assortativity,
    degree_assortativity,
    local_assortativity,
    local_mixing_matrix,
    mixing_matrix,
    personalized_walk_weights,
    transition_matrix,
)
from migrantnet.errors import ValidationError
from migrantnet.graph import graph_from_edges


def labeled(n, edges, labels):
    return graph_from_edges(n, edges, attrs={"nationality": list(labels)})


def both_ways(edges):
    return [(u, v) for u, v in edges] + [(v, u) for u, v in edges]


def planted(seed, n=20, p_in=0.5, p_out=0.08):
    """Two planted blocks plus a ring (keeps every node connected), returned as a dense matrix."""
    rng = np.random.default_rng(seed)
    labels = np.array(["DE" if i < n // 2 else "IT" for i in range(n)])
    same = labels[:, None] == labels[None, :]
    a = (rng.random((n, n)) < np.where(same, p_in, p_out)).astype(float)
    for i in range(n):
        a[i, (i + 1) % n] = 1.0
    np.fill_diagonal(a, 0.0)
    return a, labels


# ---------------------------------------------------------------- global


def test_degree_assortativity_star():
    star = graph_from_edges(5, both_ways([(0, k) for k in range(1, 5)]))
    assert degree_assortativity(star, "total") == pytest.approx(-1.0)
    one_way = graph_from_edges(5, [(0, k) for k in range(1, 5)])
    assert degree_assortativity(one_way, "total") == pytest.approx(-1.0)


def test_degree_assortativity_regular_undefined():
    cycle = graph_from_edges(4, [(i, (i + 1) % 4) for i in range(4)])
    assert degree_assortativity(cycle, "out_in") is None
    assert degree_assortativity(cycle, "total") is None
    with pytest.raises(ValidationError):
        degree_assortativity(cycle, "nope")


def test_single_category_undefined():
    clique = labeled(4, [(i, j) for i in range(4) for j in range(4) if i != j], "IIII")
    assert categorical_assortativity(clique, "nationality") is None
    with pytest.raises(ValidationError):
        local_assortativity(clique, "nationality")


def test_perfect_homophily():
    tri = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]
    g = labeled(6, tri, ["A"] * 3 + ["B"] * 3)
    assert categorical_assortativity(g, "nationality") == pytest.approx(1.0)


def test_perfect_heterophily():
    g = labeled(4, both_ways([(0, 2), (0, 3), (1, 2), (1, 3)]), "AABB")
    assert categorical_assortativity(g, "nationality") == pytest.approx(-1.0)


def test_random_labels_near_zero():
    rng = np.random.default_rng(11)
    n = 4000
    edges = np.column_stack([rng.integers(0, n, 8 * n), rng.integers(0, n, 8 * n)])
    g = labeled(n, edges, rng.choice(list("ABCDE"), n))
    assert abs(categorical_assortativity(g, "nationality")) <= 0.05


def test_mixing_matrix_properties():
    a, labels = planted(0)
    g = labeled(len(a), oracles.edges_of(a), labels)
    m = mixing_matrix(g, "nationality")
    assert m.e.sum() == pytest.approx(1.0)
    u = mixing_matrix(g, "nationality", undirected=True)
    np.testing.assert_allclose(u.e, u.e.T)
    np.testing.assert_allclose(u.a, u.b)
    rec = m.to_record()
    assert rec["categories"] == ["DE", "IT"]


def test_missing_attribute_rejected():
    g = graph_from_edges(2, [(0, 1)], attrs={"nationality": ["IT", None]})
    with pytest.raises(ValidationError):
        categorical_assortativity(g, "nationality")


# ---------------------------------------------------------------- walks


def test_walk_alpha_zero_is_indicator():
    a, labels = planted(1)
    g = labeled(len(a), oracles.edges_of(a), labels)
    w = personalized_walk_weights(g, 3, 0.0)
    assert w.tolist() == [1.0 if i == 3 else 0.0 for i in range(len(a))]


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9, 0.99, 0.999])
def test_walk_matches_dense_inverse(alpha):
    a, labels = planted(2)
    g = labeled(len(a), oracles.edges_of(a), labels)
    dense = oracles.walk_matrix_dense(a, alpha)
    for node in (0, 7, 19):
        w = personalized_walk_weights(g, node, alpha)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        assert (w >= 0).all()
        np.testing.assert_allclose(w, dense[node], atol=1e-9)


def test_walk_approaches_stationary_as_alpha_grows():
    a, labels = planted(3)
    g = labeled(len(a), oracles.edges_of(a), labels)
    _, deg = transition_matrix(g)
    pi = deg / deg.sum()
    gaps = [np.abs(personalized_walk_weights(g, 0, al) - pi).sum() for al in (0.5, 0.9, 0.99, 0.999)]
    assert all(x > y for x, y in zip(gaps, gaps[1:]))


def test_walk_on_tree_decreases_with_distance():
    # path 0-1-2-3-4 rooted at 0
    g = labeled(5, both_ways([(i, i + 1) for i in range(4)]), "AABBB")
    w = personalized_walk_weights(g, 0, 0.3)
    assert all(w[i] > w[i + 1] for i in range(4))


def test_walk_validation():
    g = labeled(2, [(0, 1)], "AB")
    with pytest.raises(ValidationError):
        personalized_walk_weights(g, 0, 1.0)
    with pytest.raises(ValidationError):
        personalized_walk_weights(g, 0, -0.1)
    isolated = labeled(3, [(0, 1)], "ABA")
    with pytest.raises(ValidationError):
        transition_matrix(isolated)


# ---------------------------------------------------------------- local


@pytest.mark.parametrize("seed", range(3))
def test_local_matches_dense_oracle(seed):
    a, labels = planted(seed)
    g = labeled(len(a), oracles.edges_of(a), labels)
    grid = (0.0, 0.3, 0.6, 0.9)
    res = local_assortativity(g, "nationality", grid)
    mean, per = oracles.local_assortativity_dense(a, list(labels), grid)
    np.testing.assert_allclose(res.per_alpha, per, atol=1e-9)
    np.testing.assert_allclose(res.scores, mean, atol=1e-9)


def test_local_trace_equals_walk_weighted_share():
    a, labels = planted(4)
    g = labeled(len(a), oracles.edges_of(a), labels)
    res = local_assortativity(g, "nationality", (0.5,))
    w = personalized_walk_weights(g, 5, 0.5)
    m = local_mixing_matrix(g, "nationality", w)
    r = (np.trace(m.e) - res.chance) / (1 - res.chance)
    assert res.per_alpha[5, 0] == pytest.approx(r, abs=1e-10)


@pytest.mark.parametrize("seed", range(3))
def test_stationary_weights_reproduce_global(seed):
    a, labels = planted(seed, p_in=0.3, p_out=0.15)
    g = labeled(len(a), oracles.edges_of(a), labels)
    _, deg = transition_matrix(g)
    m = local_mixing_matrix(g, "nationality", deg / deg.sum())
    glob = mixing_matrix(g, "nationality", undirected=True)
    np.testing.assert_allclose(m.e, glob.e, atol=1e-12)
    assert m.coefficient() == pytest.approx(glob.coefficient(), abs=1e-10)


def test_local_perfect_neighborhood_alpha_zero():
    # node 0's neighbors all share its label; the rest of the graph is mixed
    edges = both_ways([(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)])
    g = labeled(5, edges, "AAABB")
    res = local_assortativity(g, "nationality", (0.0,))
    _, deg = transition_matrix(g)
    w = np.zeros(5)
    w[0] = 1.0
    assert np.trace(local_mixing_matrix(g, "nationality", w).e) == pytest.approx(1.0)
    assert res.scores[0] == pytest.approx(1.0)
    assert res.scores[0] == res.scores.max()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.permutations(["DE", "FR", "IT"]))
def test_category_renaming_invariance(seed, names):
    rng = np.random.default_rng(seed)
    a, _ = planted(seed % 50, n=15)
    base = rng.choice(["DE", "FR", "IT"], len(a))
    rename = dict(zip(["DE", "FR", "IT"], names))
    if len(set(base)) < 2:
        return
    g1 = labeled(len(a), oracles.edges_of(a), base)
    g2 = labeled(len(a), oracles.edges_of(a), [rename[x] for x in base])
    r1 = local_assortativity(g1, "nationality", (0.0, 0.5))
    r2 = local_assortativity(g2, "nationality", (0.0, 0.5))
    np.testing.assert_allclose(r1.scores, r2.scores, atol=1e-12)
    c1, c2 = categorical_assortativity(g1, "nationality"), categorical_assortativity(g2, "nationality")
    assert (c1 is None and c2 is None) or c1 == pytest.approx(c2, abs=1e-12)


def test_local_config_and_validation():
    a, labels = planted(5)
    g = labeled(len(a), oracles.edges_of(a), labels)
    res = local_assortativity(g, "nationality")
    assert len(res.alpha_grid) == 10 and res.alpha_grid[0] == 0.0 and res.alpha_grid[-1] == 0.9
    assert res.config()["aggregation"] == "mean over alpha_grid"
    with pytest.raises(ValidationError):
        local_assortativity(g, "nationality", ())
    with pytest.raises(ValidationError):
        local_assortativity(g, "nationality", (0.5, 1.0))


def test_histograms_share_grid():
    a, labels = planted(6)
    g = labeled(len(a), oracles.edges_of(a), labels)
    res = local_assortativity(g, "nationality", (0.0, 0.5))
    status = ["Migrant" if i % 4 == 0 else "Native" for i in range(len(a))]
    h = assortativity_histograms(res, status, bins=10)
    assert len(h["edges"]) == 11
    assert sum(h["groups"]["Migrant"]["counts"]) == 5
    assert sum(h["groups"]["Native"]["counts"]) == 15


@pytest.mark.parametrize("seed", range(5))
def test_degree_assortativity_matches_edge_pearson(seed):
    a = oracles.random_digraph(seed, n=30, p=0.12)
    edges = oracles.edges_of(a)
    g = graph_from_edges(len(a), edges)
    out_deg, in_deg = a.sum(axis=1), a.sum(axis=0)
    x = np.array([out_deg[u] for u, _ in edges])
    y = np.array([in_deg[v] for _, v in edges])
    want = float(np.corrcoef(x, y)[0, 1])
    assert degree_assortativity(g, "out_in") == pytest.approx(want, abs=1e-12)


def _fake_result(scores):
    from migrantnet.assortativity import LocalAssortativityResult
    scores = np.asarray(scores, dtype=float)
    return LocalAssortativityResult("nationality", tuple(range(len(scores))), (0.0,),
                                    scores[:, None], scores, None, 0.0, ("a", "b"))


def test_histograms_two_users_in_different_bins():
    h = assortativity_histograms(_fake_result([0.1, 0.9]), ["Migrant", "Native"], bins=2)
    assert h["groups"]["Migrant"]["counts"] == [1, 0]
    assert h["groups"]["Native"]["counts"] == [0, 1]


def test_histograms_constant_scores_single_bin():
    h = assortativity_histograms(_fake_result([0.4] * 6), ["Migrant", "Native"] * 3, bins=5)
    for g in ("Migrant", "Native"):
        counts = h["groups"][g]["counts"]
        assert sum(c > 0 for c in counts) == 1 and sum(counts) == 3
