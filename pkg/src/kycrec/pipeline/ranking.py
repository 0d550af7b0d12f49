"""Additive scoring (relevance + social boost + exploration reward) and sorting."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from ..core.store import Corpus
from ..core.types import (
    CandidateSet,
    Category,
    Interaction,
    InteractionKind,
    RankedEntry,
    RankedList,
    Source,
    entry_order,
)
from .recall import ContentIndex

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankingWeights:
    """
    Args:
        w_rel: weight of cosine relevance
        w_social: boost for one-hop social candidates (half for two-hop)
        w_explore: exploration reward for high-quality underexposed items
        exposure_threshold: impressions below which an item is underexposed;
            None derives it from `exposure_percentile` of the impression log
        exposure_percentile: percentile of per-item impressions used for tau
        quality_percentile: popularity percentile an item must reach to earn
            the exploration reward
    """

    w_rel: float = 1.0
    w_social: float = 0.25
    w_explore: float = 0.15
    exposure_threshold: Optional[float] = None
    exposure_percentile: float = 20.0
    quality_percentile: float = 50.0

    def __post_init__(self) -> None:
        for name in ("w_rel", "w_social", "w_explore"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.exposure_threshold is not None and self.exposure_threshold < 0:
            raise ValueError("exposure_threshold must be >= 0")


@dataclass(frozen=True)
class ExposureStats:
    impressions: dict[str, int] = field(default_factory=dict)
    threshold: float = 1.0
    quality_floor: float = 0.0

    @classmethod
    def from_log(
        cls,
        interactions: Iterable[Interaction],
        corpus: Corpus,
        weights: RankingWeights = RankingWeights(),
    ) -> "ExposureStats":
        counts = Counter(
            event.item_id
            for event in interactions
            if event.kind is InteractionKind.IMPRESSION
        )
        per_item = np.array([counts.get(i, 0) for i in corpus.ids], dtype=np.float64)
        if weights.exposure_threshold is not None:
            tau = float(weights.exposure_threshold)
        elif per_item.size:
            tau = max(1.0, float(np.percentile(per_item, weights.exposure_percentile)))
        else:
            tau = 1.0
        floor = (
            float(np.percentile(corpus.popularity, weights.quality_percentile))
            if len(corpus)
            else 0.0
        )
        log.debug("Exposure threshold %.3g, quality floor %.3g", tau, floor)
        return cls(dict(counts), tau, floor)

    def impressions_of(self, item_id: str) -> int:
        return self.impressions.get(item_id, 0)

    def underexposed(self, item_id: str, popularity: float) -> bool:
        return self.impressions_of(item_id) < self.threshold and popularity >= self.quality_floor


def social_boost(sources: Iterable[Source], weights: RankingWeights) -> float:
    tags = set(sources)
    if Source.SOCIAL1 in tags:
        return weights.w_social
    if Source.SOCIAL2 in tags:
        return weights.w_social / 2
    return 0.0


def score(
    user_vec: np.ndarray,
    item_id: str,
    item_vec: np.ndarray,
    popularity: float,
    sources: Iterable[Source],
    exposure: ExposureStats,
    weights: RankingWeights,
) -> RankedEntry:
    norm = np.linalg.norm(user_vec)
    item_norm = np.linalg.norm(item_vec)
    if norm == 0.0 or item_norm == 0.0:
        relevance = 0.0
    else:
        relevance = weights.w_rel * float(np.dot(user_vec, item_vec) / (norm * item_norm))
    bonus = weights.w_explore if exposure.underexposed(item_id, popularity) else 0.0
    return RankedEntry.from_parts(item_id, relevance, social_boost(sources, weights), bonus)


def popularity_relevance(popularity: float, max_popularity: float, w_rel: float) -> float:
    """Baseline relevance: log-scaled popularity relative to the pool maximum."""
    if max_popularity <= 0:
        return 0.0
    return w_rel * float(np.log1p(popularity) / np.log1p(max_popularity))


def _cosines(
    user_vec: Optional[np.ndarray], index: ContentIndex, item_ids: Sequence[str]
) -> np.ndarray:
    """Cosine of each item embedding with `user_vec`, 0 where either is zero."""
    if user_vec is None or not item_ids:
        return np.zeros(len(item_ids))
    norm = np.linalg.norm(user_vec)
    if norm == 0.0:
        return np.zeros(len(item_ids))
    rows = index.embeddings[[index.corpus.position(i) for i in item_ids]]
    row_norms = np.linalg.norm(rows, axis=1)
    dots = rows @ (np.asarray(user_vec, dtype=np.float64) / norm)
    return np.divide(dots, row_norms, out=np.zeros_like(dots), where=row_norms > 0)


def rank(
    user_vec: Optional[np.ndarray],
    candidates: CandidateSet,
    index: ContentIndex,
    exposure: ExposureStats,
    weights: RankingWeights,
    n: int,
    *,
    by_popularity: bool = False,
    category: Optional[Category] = None,
    condition: Optional[str] = None,
) -> RankedList:
    """
    Score every candidate and keep the best `n`.

    With `by_popularity` the relevance term is the log-scaled popularity
    instead of cosine similarity and `user_vec` is ignored.
    """
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    corpus = index.corpus
    entries: list[RankedEntry] = []
    if by_popularity:
        pops = [corpus[c.item_id].popularity for c in candidates.candidates]
        top = max(pops, default=0)
        for cand, pop in zip(candidates.candidates, pops):
            bonus = weights.w_explore if exposure.underexposed(cand.item_id, pop) else 0.0
            entries.append(
                RankedEntry.from_parts(
                    cand.item_id,
                    popularity_relevance(pop, top, weights.w_rel),
                    social_boost(cand.sources, weights),
                    bonus,
                )
            )
    else:
        relevance = weights.w_rel * _cosines(user_vec, index, candidates.item_ids)
        for cand, rel in zip(candidates.candidates, relevance):
            pop = corpus[cand.item_id].popularity
            bonus = weights.w_explore if exposure.underexposed(cand.item_id, pop) else 0.0
            entries.append(
                RankedEntry.from_parts(
                    cand.item_id, float(rel), social_boost(cand.sources, weights), bonus
                )
            )
    entries.sort(key=entry_order)
    for entry in entries[:n]:
        log.debug(
            "%s %s total=%.4f rel=%.4f social=%.4f explore=%.4f",
            candidates.user_id,
            entry.item_id,
            entry.total_score,
            entry.relevance_score,
            entry.social_boost,
            entry.exploration_bonus,
        )
    return RankedList(
        candidates.user_id,
        tuple(entries[:n]),
        n,
        category=category,
        condition=condition,
    )
