import numpy as np
import pytest

from kycrec.core import Category, ContentItem, RankedEntry, RankedList
from kycrec.pipeline import round_robin, truncate
from kycrec.pipeline.rerank import seed_interest


def _ranked(scores):
    """scores: item id -> total; returns a score-sorted RankedList."""
    entries = sorted(
        (RankedEntry.from_parts(i, s, 0.0, 0.0) for i, s in scores.items()),
        key=lambda e: (-e.total_score, e.item_id),
    )
    return RankedList("u0001", tuple(entries), cutoff=max(1, len(entries)))


def test_rotation_example():
    ranked = _ranked({"a1": 0.9, "b1": 0.8, "a2": 0.7})
    groups = {"a1": "A", "a2": "A", "b1": "B"}
    out = round_robin(ranked, 3, groups)
    assert out.item_ids == ("a1", "b1", "a2")
    assert out.reranked and out.cutoff == 3


def test_group_order_follows_best_member():
    ranked = _ranked({"a1": 0.9, "a2": 0.85, "a3": 0.8, "b1": 0.5, "c1": 0.6, "c2": 0.1})
    groups = {"a1": "A", "a2": "A", "a3": "A", "b1": "B", "c1": "C", "c2": "C"}
    out = round_robin(ranked, 6, groups)
    assert out.item_ids == ("a1", "c1", "b1", "a2", "c2", "a3")


def test_single_group_is_truncation():
    ranked = _ranked({f"i{j}": 1.0 - j / 10 for j in range(6)})
    out = round_robin(ranked, 4, lambda _: "only")
    assert out.item_ids == truncate(ranked, 4).item_ids


def test_three_by_three_cycles():
    scores = {f"{g}{j}": j + 0.1 * "xyz".index(g) for g in "xyz" for j in range(3)}
    ranked = _ranked(scores)
    out = round_robin(ranked, 9, lambda item_id: item_id[0])
    for cycle in range(3):
        assert {i[0] for i in out.item_ids[cycle * 3 : cycle * 3 + 3]} == {"x", "y", "z"}


def test_short_input_and_bad_n():
    ranked = _ranked({"a": 0.5, "b": 0.4})
    assert len(round_robin(ranked, 5, lambda i: i)) == 2
    with pytest.raises(ValueError):
        round_robin(ranked, 0, lambda i: i)


def test_diversity_stability_and_idempotence():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        size = int(rng.integers(0, 25))
        n = int(rng.integers(1, 12))
        n_groups = int(rng.integers(1, 7))
        scores = {f"i{j:03d}": float(rng.integers(0, 10)) / 10 for j in range(size)}
        groups = {item_id: f"g{int(rng.integers(0, n_groups))}" for item_id in scores}
        ranked = _ranked(scores)
        out = round_robin(ranked, n, groups)

        assert len(out) == min(n, size)
        distinct = len(set(groups.values()))
        assert len({groups[i] for i in out.item_ids}) == min(distinct, n, size)
        for group in set(groups.values()):
            emitted = [i for i in out.item_ids if groups[i] == group]
            original = [i for i in ranked.item_ids if groups[i] == group]
            assert emitted == original[: len(emitted)]
        assert round_robin(out, n, groups) == out


def test_seed_interest_prefers_declared_tags():
    item = ContentItem("i00001", Category.TECH, (1.0,), "a00000", 1, 0, ("topic_03", "topic_01"))
    assert seed_interest(item, {"topic_03"}) == "topic_03"
    assert seed_interest(item, {"topic_01", "topic_03"}) == "topic_01"
    assert seed_interest(item) == "Tech"
    # undeclared item tags never stand in for the category
    assert seed_interest(item, {"topic_07"}) == "Tech"
