"""
The end-to-end recommendation pipeline as configured by an experimental
condition: recall -> rank -> re-rank.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from ..core.graph import SocialGraph
from ..core.profiles import profile_at_tier
from ..core.store import Corpus
from ..core.types import (
    CandidateSet,
    Category,
    Interaction,
    KycTier,
    RankedList,
    Source,
    UserProfile,
)
from .cold_start import DemographicPrior, cold_start_recall
from .embedding import EmbeddingConfig, build_index, embed_user
from .exploration import ExplorationConfig
from .propagation import PropagationConfig, propagated_graph
from .ranking import ExposureStats, RankingWeights, rank
from .recall import (
    AccountIndex,
    ClickLog,
    ContentIndex,
    RecallConfig,
    cooccurrence_recall,
    knn_recall,
    merge_candidates,
    popularity_recall,
    recency_recall,
    social_recall_bands,
)
from .rerank import round_robin, seed_interest, truncate
from .space import EmbeddingSpace

log = logging.getLogger(__name__)


class UnknownConditionError(ValueError):
    pass


class Condition(str, Enum):
    """The five experimental conditions, in table column order."""

    BASELINE = "Baseline"
    NO_KYC = "NoKyc"
    BASIC_KYC = "BasicKyc"
    ADVANCED_KYC = "AdvancedKyc"
    ADVANCED_KYC_CIRCLES = "AdvancedKycCircles"

    @classmethod
    def parse(cls, label: str) -> "Condition":
        for condition in cls:
            if label in (condition.value, condition.name, condition.display):
                return condition
        raise UnknownConditionError(
            f"unknown condition {label!r}; expected one of "
            f"{', '.join(c.value for c in cls)}"
        )

    @property
    def tier(self) -> KycTier:
        """Profile tier the condition exposes; Baseline sees nothing."""
        if self is Condition.BASELINE:
            return KycTier.NO_KYC
        return KycTier(self.value)

    @property
    def display(self) -> str:
        return _DISPLAY[self]


_DISPLAY = {
    Condition.BASELINE: "Baseline",
    Condition.NO_KYC: "Ours (No KYC)",
    Condition.BASIC_KYC: "Ours (Basic KYC)",
    Condition.ADVANCED_KYC: "Ours (Advanced KYC)",
    Condition.ADVANCED_KYC_CIRCLES: "Ours (Adv. KYC + Circles)",
}


@dataclass(frozen=True)
class RerankConfig:
    """
    Args:
        enabled: apply round-robin diversity re-ranking (never for Baseline)
        pool_size: ranked entries handed to the re-ranker
    """

    enabled: bool = True
    pool_size: int = 10


@dataclass(frozen=True)
class PipelineConfig:
    embedding: EmbeddingConfig = EmbeddingConfig()
    recall: RecallConfig = RecallConfig()
    propagation: PropagationConfig = PropagationConfig()
    ranking: RankingWeights = RankingWeights()
    rerank: RerankConfig = RerankConfig()
    exploration: ExplorationConfig = ExplorationConfig()


@dataclass(frozen=True)
class Recommendation:
    candidates: CandidateSet
    ranked: RankedList


class Recommender:
    """
    Runs the pipeline for one condition over an observable snapshot. The
    snapshot's indices are built once and shared across users and
    conditions; user vectors and social reach are cached per user.

    Args:
        corpus: every item, including study users' authored items
        space: embedding space with the global prior already set
        graph: follow graph with seed interest vectors
        priors: demographic prior table
        history: background interaction log
        cfg: per-stage configuration
        index: a prebuilt content index for `cfg.embedding`
    """

    def __init__(
        self,
        corpus: Corpus,
        space: EmbeddingSpace,
        graph: SocialGraph,
        priors: DemographicPrior,
        history: Iterable[Interaction],
        cfg: PipelineConfig = PipelineConfig(),
        index: Optional[ContentIndex] = None,
    ) -> None:
        self.corpus = corpus
        self.space = space
        self.graph = graph
        self.priors = priors
        self.history = tuple(history)
        self.cfg = cfg
        if index is not None:
            self.__dict__["index"] = index
        self._vectors: dict[tuple[str, KycTier], np.ndarray] = {}
        self._reach: dict[str, tuple[list[str], list[str]]] = {}
        self._shared: dict[tuple[Source, Category], list[str]] = {}

    @cached_property
    def index(self) -> ContentIndex:
        return build_index(self.corpus, self.space, self.cfg.embedding)

    @cached_property
    def clicklog(self) -> ClickLog:
        return ClickLog(self.history)

    @cached_property
    def exposure(self) -> ExposureStats:
        return ExposureStats.from_log(self.history, self.corpus, self.cfg.ranking)

    @cached_property
    def circle_graph(self) -> SocialGraph:
        return propagated_graph(self.graph, self.cfg.propagation)

    @cached_property
    def account_index(self) -> AccountIndex:
        return AccountIndex(self.circle_graph)

    def warm(self) -> "Recommender":
        """Build every shared index now rather than on first use."""
        for name in ("index", "clicklog", "exposure", "circle_graph", "account_index"):
            getattr(self, name)
        return self

    def weights_for(
        self, condition: Condition, explore_weight: Optional[float] = None
    ) -> RankingWeights:
        weights = self.cfg.ranking
        if condition is Condition.BASELINE:
            return replace(weights, w_social=0.0, w_explore=0.0)
        if explore_weight is not None:
            weights = replace(weights, w_explore=explore_weight)
        if condition is not Condition.ADVANCED_KYC_CIRCLES:
            return replace(weights, w_social=0.0)
        return weights

    def user_vector(self, view: UserProfile) -> np.ndarray:
        key = (view.user_id, view.kyc_tier)
        if key not in self._vectors:
            graph = self.circle_graph if view.kyc_tier == KycTier.ADVANCED_KYC_CIRCLES else None
            self._vectors[key] = embed_user(
                view, self.space, graph, self.corpus, self.cfg.embedding, self.priors
            )
        return self._vectors[key]

    def social_reach(self, view: UserProfile) -> tuple[list[str], list[str]]:
        """Both social bands over every category, computed once per user."""
        if view.user_id not in self._reach:
            self._reach[view.user_id] = social_recall_bands(
                view,
                self.circle_graph,
                self.corpus,
                hops=2,
                seed_neighbors=self.cfg.recall.seed_neighbors,
                account_index=self.account_index,
            )
        return self._reach[view.user_id]

    def shared_list(self, source: Source, category: Category) -> list[str]:
        """Popularity or recency recall, the same for every user."""
        key = (source, category)
        if key not in self._shared:
            recall = popularity_recall if source is Source.POPULARITY else recency_recall
            self._shared[key] = recall(self.corpus, category, self.cfg.recall.cap(source))
        return list(self._shared[key])

    def sources(
        self,
        view: UserProfile,
        category: Category,
        condition: Condition,
        user_vec: Optional[np.ndarray],
    ) -> dict[Source, list[str]]:
        recall = self.cfg.recall
        cap = recall.cap
        if condition is Condition.BASELINE:
            return {
                Source.POPULARITY: self.shared_list(Source.POPULARITY, category),
                Source.RECENCY: self.shared_list(Source.RECENCY, category),
            }

        tier = condition.tier
        if tier == KycTier.NO_KYC:
            return {
                Source.COLDSTART: cold_start_recall(
                    view, self.priors, self.corpus, cap(Source.COLDSTART), category
                )
            }

        # every tier above NoKyc keeps the anonymous popularity list and adds to it
        lists = {
            Source.POPULARITY: self.shared_list(Source.POPULARITY, category),
            Source.COLDSTART: cold_start_recall(
                view, self.priors, self.corpus, cap(Source.COLDSTART), category
            ),
        }
        if user_vec is not None:
            lists[Source.KNN] = knn_recall(user_vec, self.index, cap(Source.KNN), category)
        if tier >= KycTier.ADVANCED_KYC:
            lists[Source.COOCCUR] = cooccurrence_recall(
                view.history, self.clicklog, cap(Source.COOCCUR), category, self.corpus
            )
        if tier >= KycTier.ADVANCED_KYC_CIRCLES:
            band1, band2 = self.social_reach(view)
            lists[Source.SOCIAL1] = [i for i in band1 if self.corpus[i].category is category]
            lists[Source.SOCIAL2] = [i for i in band2 if self.corpus[i].category is category]
        return lists

    def recommend(
        self,
        full: UserProfile,
        category: Category,
        condition: Condition,
        top_n: int,
        explore_weight: Optional[float] = None,
    ) -> Recommendation:
        """
        Candidates and the emitted top-N list for one user and category.
        `explore_weight` replaces the configured exploration reward for
        this user; Baseline ignores it.
        """
        view = profile_at_tier(full, condition.tier)
        baseline = condition is Condition.BASELINE
        user_vec = None if baseline else self.user_vector(view)

        lists = self.sources(view, category, condition, user_vec)
        candidates = merge_candidates(lists, self.cfg.recall.caps, view)
        log.debug(
            "%s %s %s: %s -> %d candidates",
            view.user_id,
            condition.value,
            category.value,
            ", ".join(f"{s.value}={len(v)}" for s, v in lists.items()),
            len(candidates),
        )

        rerank_cfg = self.cfg.rerank
        rerank = rerank_cfg.enabled and not baseline
        depth = max(top_n, rerank_cfg.pool_size) if rerank else top_n
        ranked = rank(
            user_vec,
            candidates,
            self.index,
            self.exposure,
            self.weights_for(condition, explore_weight),
            depth,
            by_popularity=baseline,
            category=category,
            condition=condition.value,
        )
        if rerank:
            interests = {
                item_id: seed_interest(self.corpus[item_id], view.declared_tags)
                for item_id in ranked.item_ids
            }
            ranked = round_robin(ranked, top_n, interests)
        else:
            ranked = truncate(ranked, top_n)
        return Recommendation(candidates, ranked)
