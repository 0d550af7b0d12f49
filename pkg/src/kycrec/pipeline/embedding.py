"""Content embeddings and KYC-tier-dependent user embeddings."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from ..core.graph import SocialGraph
from ..core.store import Corpus
from ..core.types import ContentItem, DimensionMismatchError, KycTier, UserProfile, as_tuple
from .cold_start import DemographicPrior, demographic_prior_vector
from .recall import ContentIndex
from .space import EmbeddingSpace, l2_normalize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingConfig:
    """
    Args:
        w_cat: weight of the category basis in a content embedding
        w_feat: weight of the item features in a content embedding
        prior_carry: share of the NoKyc vector (the global prior) kept at
            BasicKyc; 0 gives the plain tag and demographic blend
        basic_blend: (declared tags, demographic prior)
        advanced_blend: (basic vector, bio keywords, authored centroid)
        circles_blend: (advanced vector, followed-account centroid)
    """

    w_cat: float = 0.5
    w_feat: float = 0.5
    prior_carry: float = 0.3
    basic_blend: tuple[float, float] = (0.7, 0.3)
    advanced_blend: tuple[float, float, float] = (0.4, 0.3, 0.3)
    circles_blend: tuple[float, float] = (0.6, 0.4)

    def __post_init__(self) -> None:
        if not 0.0 <= self.prior_carry <= 1.0:
            raise ValueError(f"prior_carry must be in [0, 1], got {self.prior_carry}")


def embed_content(
    item: ContentItem, space: EmbeddingSpace, cfg: EmbeddingConfig = EmbeddingConfig()
) -> np.ndarray:
    if len(item.features) != space.dimension:
        raise DimensionMismatchError(
            f"{item.item_id} has {len(item.features)} features, "
            f"space dimension is {space.dimension}"
        )
    vec = cfg.w_cat * space.category(item.category) + cfg.w_feat * item.vector()
    return l2_normalize(vec)


def embed_corpus(
    corpus: Corpus, space: EmbeddingSpace, cfg: EmbeddingConfig = EmbeddingConfig()
) -> np.ndarray:
    """One `embed_content` row per corpus item, in corpus order."""
    if not len(corpus):
        return np.zeros((0, space.dimension))
    return np.stack([embed_content(item, space, cfg) for item in corpus])


def build_index(
    corpus: Corpus, space: EmbeddingSpace, cfg: EmbeddingConfig = EmbeddingConfig()
) -> ContentIndex:
    return ContentIndex(corpus, embed_corpus(corpus, space, cfg))


def popularity_prior(embeddings: np.ndarray, popularity: np.ndarray) -> np.ndarray:
    """Popularity-weighted mean of content embeddings, renormalized."""
    if embeddings.size == 0 or popularity.sum() <= 0:
        dim = embeddings.shape[1] if embeddings.ndim == 2 else 0
        return np.zeros(dim)
    return l2_normalize(popularity @ embeddings / popularity.sum())


def with_global_prior(
    space: EmbeddingSpace, corpus: Corpus, cfg: EmbeddingConfig = EmbeddingConfig()
) -> EmbeddingSpace:
    """The same space with `global_prior` recomputed over `corpus`."""
    prior = popularity_prior(embed_corpus(corpus, space, cfg), corpus.popularity)
    return replace(space, global_prior=as_tuple(prior))


def _blend(parts: Sequence[tuple[float, np.ndarray]]) -> np.ndarray:
    # every term is unit-normalized before weighting
    total = np.zeros_like(parts[0][1])
    for weight, vec in parts:
        total = total + weight * l2_normalize(vec)
    return l2_normalize(total)


def _mean_topics(labels: Iterable[str], space: EmbeddingSpace) -> np.ndarray:
    vecs = []
    for label in sorted(labels):
        if space.has_topic(label):
            vecs.append(space.topic(label))
        else:
            log.debug("Ignoring unknown topic label %s", label)
    if not vecs:
        return np.zeros(space.dimension)
    return np.mean(vecs, axis=0)


def _authored_centroid(
    profile: UserProfile,
    space: EmbeddingSpace,
    corpus: Corpus,
    cfg: EmbeddingConfig,
) -> np.ndarray:
    vecs = [
        embed_content(corpus[item_id], space, cfg)
        for item_id in profile.authored_items
        if item_id in corpus
    ]
    if not vecs:
        return np.zeros(space.dimension)
    return np.mean(vecs, axis=0)


def _followed_centroid(
    profile: UserProfile, space: EmbeddingSpace, graph: Optional[SocialGraph]
) -> np.ndarray:
    if graph is None:
        return np.zeros(space.dimension)
    vecs = [
        graph.account(a).vector(space.dimension) for a in profile.followed if a in graph
    ]
    if not vecs:
        return np.zeros(space.dimension)
    return np.mean(vecs, axis=0)


def embed_user(
    profile: UserProfile,
    space: EmbeddingSpace,
    graph: Optional[SocialGraph],
    corpus: Corpus,
    cfg: EmbeddingConfig = EmbeddingConfig(),
    priors: Optional[DemographicPrior] = None,
) -> np.ndarray:
    """
    User vector at the profile's KYC tier. Each tier blends the previous
    tier's vector with the context the new tier unlocks; every blend is
    L2-normalized, so the result is unit-norm or exactly zero.

    Args:
        profile: the user as visible at their tier
        space: topic/category bases and the global prior
        graph: follow graph whose interest vectors are averaged at Circles
        corpus: item store used to resolve authored items
        cfg: blend weights
        priors: demographic prior table; the built-in default when None
    """
    tier = profile.kyc_tier
    vec = space.prior.copy()
    if tier == KycTier.NO_KYC:
        if not np.any(vec):
            log.warning("Global prior is zero; %s gets a zero embedding", profile.user_id)
        return vec

    tags = _mean_topics(profile.declared_tags, space)
    if profile.demographics is not None:
        table = priors if priors is not None else DemographicPrior.default(space.topic_labels)
        demo = demographic_prior_vector(profile, table, space)
    else:
        demo = np.zeros(space.dimension)
    w_tags, w_demo = cfg.basic_blend
    context = _blend([(w_tags, tags), (w_demo, demo)])
    vec = _blend([(cfg.prior_carry, vec), (1.0 - cfg.prior_carry, context)])
    if tier == KycTier.BASIC_KYC:
        return vec

    w_basic, w_bio, w_auth = cfg.advanced_blend
    vec = _blend(
        [
            (w_basic, vec),
            (w_bio, _mean_topics(profile.bio_keywords, space)),
            (w_auth, _authored_centroid(profile, space, corpus, cfg)),
        ]
    )
    if tier == KycTier.ADVANCED_KYC:
        return vec

    w_adv, w_circle = cfg.circles_blend
    return _blend([(w_adv, vec), (w_circle, _followed_centroid(profile, space, graph))])
