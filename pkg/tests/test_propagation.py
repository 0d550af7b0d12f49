import numpy as np
import pytest

from kycrec.core import Account, AccountKind, FollowEdge, SocialGraph
from kycrec.pipeline import PropagationConfig, propagate, propagated_graph
from kycrec.pipeline.propagation import propagation_rounds


def _graph(vectors, edges):
    accounts = [
        Account(f"a{i:05d}", AccountKind.INDIVIDUAL, tuple(float(x) for x in v))
        for i, v in enumerate(vectors)
    ]
    return SocialGraph(accounts, [FollowEdge(f"a{a:05d}", f"a{b:05d}") for a, b in edges])


def _random_graph(rng, n, dim, p):
    vecs = rng.standard_normal((n, dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    edges = [(a, b) for a in range(n) for b in range(n) if a != b and rng.random() < p]
    return _graph(vecs, edges)


def test_config_bounds():
    with pytest.raises(ValueError):
        PropagationConfig(alpha=1.0)
    with pytest.raises(ValueError):
        PropagationConfig(alpha=-0.1)
    with pytest.raises(ValueError):
        PropagationConfig(iterations=-1)


def test_isolated_node_keeps_its_seed():
    graph = _graph([[0.6, 0.8]], [])
    for rounds in (0, 1, 5):
        out = propagate(graph, PropagationConfig(0.3, rounds))
        assert np.array_equal(out["a00000"], np.array([0.6, 0.8]))


def test_zero_alpha_is_identity():
    graph = _random_graph(np.random.default_rng(0), 20, 6, 0.2)
    cfg = PropagationConfig(alpha=0.0, iterations=4)
    assert propagated_graph(graph, cfg) is graph
    out = propagate(graph, cfg)
    for account in graph.accounts:
        assert np.array_equal(out[account.account_id], account.vector())


def test_two_node_closed_form():
    graph = _graph([[1.0, 0.0], [0.0, 1.0]], [(0, 1), (1, 0)])
    out = propagate(graph, PropagationConfig(alpha=0.5, iterations=1))
    half = 1.0 / np.sqrt(2.0)
    assert np.allclose(out["a00000"], [half, half], atol=1e-12, rtol=0)
    assert np.allclose(out["a00001"], [half, half], atol=1e-12, rtol=0)


def test_followers_aggregate_followees():
    # a0 follows a1; a1 follows nobody and keeps its seed
    graph = _graph([[1.0, 0.0], [0.0, 1.0]], [(0, 1)])
    out = propagate(graph, PropagationConfig(alpha=0.5, iterations=3))
    assert np.array_equal(out["a00001"], np.array([0.0, 1.0]))
    assert out["a00000"][1] > 0


def test_deltas_shrink_after_first_round():
    rng = np.random.default_rng(1)
    for _ in range(100):
        graph = _random_graph(rng, int(rng.integers(2, 40)), int(rng.integers(2, 10)), rng.uniform(0.02, 0.4))
        alpha = float(rng.uniform(0.0, 0.999))
        cfg = PropagationConfig(alpha=alpha, iterations=6)
        _, deltas = propagation_rounds(graph, cfg)
        assert len(deltas) == 6
        for earlier, later in zip(deltas, deltas[1:]):
            assert later <= earlier + 1e-12
            assert later <= alpha * earlier + 1e-12


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.5, 0.9, 0.999])
def test_deltas_shrink_at_fixed_alpha(alpha):
    graph = _random_graph(np.random.default_rng(5), 25, 4, 0.2)
    _, deltas = propagation_rounds(graph, PropagationConfig(alpha=alpha, iterations=8))
    for earlier, later in zip(deltas, deltas[1:]):
        assert later <= alpha * earlier + 1e-12


def test_one_round_matches_direct_mix():
    rng = np.random.default_rng(6)
    graph = _random_graph(rng, 12, 3, 0.3)
    out = propagate(graph, PropagationConfig(alpha=0.6, iterations=1))
    seeds = {a.account_id: a.vector() for a in graph.accounts}
    for account in graph.accounts:
        followees = [e.followee for e in graph.edges if e.follower == account.account_id]
        if not followees:
            continue
        mixed = 0.4 * seeds[account.account_id] + 0.6 * np.mean([seeds[f] for f in followees], axis=0)
        assert np.allclose(out[account.account_id], mixed / np.linalg.norm(mixed), atol=1e-12)


def test_outputs_are_unit_norm():
    graph = _random_graph(np.random.default_rng(2), 30, 5, 0.15)
    vectors, _ = propagation_rounds(graph, PropagationConfig())
    assert np.allclose(np.linalg.norm(vectors, axis=1), 1.0)


def test_relabelling_permutes_outputs():
    rng = np.random.default_rng(3)
    n = 15
    vecs = rng.standard_normal((n, 4))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    edges = [(a, b) for a in range(n) for b in range(n) if a != b and rng.random() < 0.25]
    perm = rng.permutation(n)

    original = propagate(_graph(vecs, edges), PropagationConfig())
    relabelled_vecs = np.empty_like(vecs)
    relabelled_vecs[perm] = vecs
    relabelled = propagate(
        _graph(relabelled_vecs, [(perm[a], perm[b]) for a, b in edges]), PropagationConfig()
    )
    for i in range(n):
        assert np.allclose(original[f"a{i:05d}"], relabelled[f"a{perm[i]:05d}"], atol=1e-12)


def test_propagated_graph_keeps_edges():
    graph = _random_graph(np.random.default_rng(4), 10, 3, 0.3)
    moved = propagated_graph(graph, PropagationConfig())
    assert moved.edges == graph.edges
    assert moved.account_ids == graph.account_ids
