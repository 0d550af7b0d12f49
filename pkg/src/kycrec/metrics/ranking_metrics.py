"""nDCG@k, CTR@k and serendipity@k."""

from __future__ import annotations

import logging
from typing import Callable, Collection, Iterable, Mapping, Sequence

import numpy as np

from ..core.types import Interaction, InteractionKind, RankedList

log = logging.getLogger(__name__)


def _discounts(n: int) -> np.ndarray:
    return 1.0 / np.log2(np.arange(2, n + 2, dtype=np.float64))


def dcg_at_k(grades: Sequence[int], k: int) -> float:
    """Sum of (2^rel - 1) / log2(i + 1) over the first k positions."""
    gains = np.exp2(np.asarray(grades[:k], dtype=np.float64)) - 1.0
    return float(gains @ _discounts(len(gains)))


def ndcg_at_k(ranked: Sequence[int], pool: Iterable[int], k: int) -> float:
    """
    DCG of the ranked grades over the DCG of the pool in ideal order.
    Returns 0 when the pool has no gain at all.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ideal = dcg_at_k(sorted(pool, reverse=True), k)
    if ideal == 0.0:
        return 0.0
    return min(1.0, dcg_at_k(list(ranked), k) / ideal)


def clicked_pairs(interactions: Iterable[Interaction]) -> frozenset[tuple[str, str]]:
    return frozenset(
        (e.user_id, e.item_id) for e in interactions if e.kind is InteractionKind.CLICK
    )


def clicked_within(clicks: Collection[tuple[str, str]], ranked: RankedList, k: int) -> bool:
    return any((ranked.user_id, item_id) in clicks for item_id in ranked.item_ids[:k])


def ctr_at_k(
    interactions: Iterable[Interaction], ranked_lists: Sequence[RankedList], k: int
) -> float:
    """
    Share of lists with at least one click in the top k. For k = 1 this is
    the click rate of the top item.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not ranked_lists:
        return 0.0
    clicks = clicked_pairs(interactions)
    return sum(clicked_within(clicks, r, k) for r in ranked_lists) / len(ranked_lists)


def serendipity_of(
    ranked: RankedList,
    history_labels: Collection[str],
    relevance: Callable[[str, str], int],
    label_of: Callable[[str], str],
    k: int,
) -> float:
    top = ranked.item_ids[:k]
    if not top:
        return 0.0
    hits = sum(
        1
        for item_id in top
        if relevance(ranked.user_id, item_id) >= 2 and label_of(item_id) not in history_labels
    )
    return hits / len(top)


def serendipity_at_k(
    histories: Mapping[str, Collection[str]],
    ranked_lists: Sequence[RankedList],
    relevance: Callable[[str, str], int],
    label_of: Callable[[str], str],
    k: int,
) -> float:
    """
    Mean over lists of the share of top-k entries that are relevant
    (grade >= 2) and carry an interest label outside the user's history.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not ranked_lists:
        return 0.0
    values = [
        serendipity_of(r, histories.get(r.user_id, ()), relevance, label_of, k)
        for r in ranked_lists
    ]
    return float(np.mean(values))
