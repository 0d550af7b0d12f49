"""Demographic priors and cold-start recall for users with little or no history."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from ..core.records import register_record
from ..core.store import Corpus
from ..core.types import Category, Demographics, KycTier, UserProfile
from .recall import popularity_recall
from .space import EmbeddingSpace, l2_normalize

log = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-9

AGE_BANDS: tuple[tuple[int, int], ...] = ((18, 24), (25, 34), (35, 44), (45, 60))

DEFAULT_OCCUPATIONS: tuple[str, ...] = (
    "student",
    "engineer",
    "teacher",
    "clerk",
    "merchant",
    "designer",
    "healthcare",
    "freelancer",
)

# share of each band's category mass; younger bands lean to social content
BAND_CATEGORY_SHAPE: dict[str, dict[Category, float]] = {
    "18-24": {Category.GOSSIP: 0.3, Category.SHARING: 0.3, Category.TECH: 0.2, Category.NEWS: 0.1, Category.AD: 0.1},
    "25-34": {Category.TECH: 0.25, Category.SHARING: 0.25, Category.GOSSIP: 0.2, Category.NEWS: 0.15, Category.AD: 0.15},
    "35-44": {Category.NEWS: 0.3, Category.AD: 0.25, Category.TECH: 0.2, Category.SHARING: 0.15, Category.GOSSIP: 0.1},
    "45-60": {Category.NEWS: 0.4, Category.AD: 0.25, Category.GOSSIP: 0.15, Category.SHARING: 0.1, Category.TECH: 0.1},
}

TOPIC_SHARE = 0.7

CATEGORY_NAMES = frozenset(c.value for c in Category)


def age_band(age: int) -> str:
    for lo, hi in AGE_BANDS:
        if lo <= age <= hi:
            return f"{lo}-{hi}"
    raise ValueError(f"age {age} outside every age band")


def bucket_key(demographics: Demographics) -> str:
    return f"{age_band(demographics.age)}|{demographics.occupation}"


def occupation_topics(
    topic_labels: Sequence[str], occupations: Sequence[str], occupation: str
) -> list[str]:
    """Topics mapped to an occupation: topic index mod occupation count."""
    if occupation not in occupations:
        return []
    j = list(occupations).index(occupation)
    return [label for i, label in enumerate(sorted(topic_labels)) if i % len(occupations) == j]


def uniform_distribution() -> dict[str, float]:
    return {c.value: 1.0 / len(Category) for c in Category}


@register_record("prior")
@dataclass(frozen=True)
class DemographicPrior:
    """
    Bucket (age band x occupation) -> weights over category names and topic
    labels. Buckets missing from the table resolve to the uniform
    distribution over categories.
    """

    buckets: dict[str, dict[str, float]]

    def __post_init__(self) -> None:
        for key, weights in self.buckets.items():
            if any(w < 0 for w in weights.values()):
                raise ValueError(f"prior bucket {key} has a negative weight")
            total = math.fsum(weights.values())
            if abs(total - 1.0) > WEIGHT_TOLERANCE:
                raise ValueError(f"prior bucket {key} sums to {total}, expected 1")

    @classmethod
    def default(
        cls,
        topic_labels: Sequence[str],
        occupations: Sequence[str] = DEFAULT_OCCUPATIONS,
    ) -> "DemographicPrior":
        buckets: dict[str, dict[str, float]] = {}
        for lo, hi in AGE_BANDS:
            band = f"{lo}-{hi}"
            for occupation in occupations:
                topics = occupation_topics(topic_labels, occupations, occupation)
                cat_share = 1.0 - TOPIC_SHARE if topics else 1.0
                weights = {
                    c.value: cat_share * BAND_CATEGORY_SHAPE[band][c] for c in Category
                }
                for label in topics:
                    weights[label] = TOPIC_SHARE / len(topics)
                buckets[f"{band}|{occupation}"] = weights
        return cls(buckets)

    def distribution(self, demographics: Demographics) -> dict[str, float]:
        key = bucket_key(demographics)
        if key not in self.buckets:
            log.warning("No prior bucket %s; falling back to uniform", key)
            return uniform_distribution()
        return dict(self.buckets[key])


def demographic_prior_vector(
    profile: UserProfile, prior: DemographicPrior, space: EmbeddingSpace
) -> np.ndarray:
    if profile.demographics is None:
        raise ValueError(f"{profile.user_id} has no demographics")
    total = np.zeros(space.dimension)
    for label, weight in sorted(prior.distribution(profile.demographics).items()):
        if weight == 0:
            continue
        try:
            total = total + weight * space.basis_vector(label)
        except ValueError:
            log.warning("Prior label %s has no basis vector; skipped", label)
    return l2_normalize(total)


def largest_remainder(weights: Mapping[str, float], k: int) -> dict[str, int]:
    """
    Apportion k seats over labels proportionally to weight. Leftover seats
    go to the largest remainders, ties by label name.
    """
    positive = {label: w for label, w in weights.items() if w > 0}
    if not positive or k <= 0:
        return {label: 0 for label in positive}
    total = math.fsum(positive.values())
    quotas = {label: k * w / total for label, w in positive.items()}
    seats = {label: int(math.floor(q)) for label, q in quotas.items()}
    left = k - sum(seats.values())
    by_remainder = sorted(positive, key=lambda label: (-(quotas[label] - seats[label]), label))
    for label in by_remainder[:left]:
        seats[label] += 1
    return seats


def allocate(
    weights: Mapping[str, float], available: Mapping[str, int], k: int
) -> dict[str, int]:
    """
    Largest-remainder allocation capped by availability. Shortfalls move to
    labels with spare items by weight, then label name. Sums to
    min(k, total available over positive-weight labels).
    """
    seats = largest_remainder(weights, k)
    seats = {label: min(n, available.get(label, 0)) for label, n in seats.items()}
    capacity = sum(available.get(label, 0) for label in seats)
    left = min(k, capacity) - sum(seats.values())
    order = sorted(seats, key=lambda label: (-weights[label], label))
    while left > 0:
        for label in order:
            if left == 0:
                break
            if seats[label] < available.get(label, 0):
                seats[label] += 1
                left -= 1
    return seats


def _balanced(corpus: Corpus, k: int) -> list[str]:
    per_category = [popularity_recall(corpus, c, k) for c in Category]
    picked: list[str] = []
    depth = 0
    while len(picked) < k and any(depth < len(lst) for lst in per_category):
        for lst in per_category:
            if depth < len(lst) and len(picked) < k:
                picked.append(lst[depth])
        depth += 1
    return picked


def _popular_with_tag(corpus: Corpus, category: Category, tag: str) -> list[str]:
    rows = np.flatnonzero(corpus.mask(category, tag))
    order = rows[np.argsort(-corpus.popularity[rows], kind="stable")]
    return [corpus.ids[r] for r in order]


def _fill(
    ranked: Mapping[str, list[str]], seats: Mapping[str, int], order: Sequence[str]
) -> list[str]:
    picked: list[str] = []
    taken: set[str] = set()
    for label in order:
        want = seats.get(label, 0)
        for item_id in ranked[label]:
            if want == 0:
                break
            if item_id not in taken:
                picked.append(item_id)
                taken.add(item_id)
                want -= 1
    return picked


def cold_start_recall(
    profile: UserProfile,
    prior: DemographicPrior,
    corpus: Corpus,
    k: int,
    category: Optional[Category] = None,
) -> list[str]:
    """
    Popularity recall steered by the user's demographic bucket, or balanced
    across categories for anonymous users.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not len(corpus):
        return []

    if profile.kyc_tier == KycTier.NO_KYC or profile.demographics is None:
        if category is not None:
            return popularity_recall(corpus, category, k)
        return _balanced(corpus, k)

    dist = prior.distribution(profile.demographics)
    if category is None:
        weights = {c.value: dist.get(c.value, 0.0) for c in Category}
        ranked = {c.value: popularity_recall(corpus, c, k) for c in Category}
    else:
        weights = {label: w for label, w in dist.items() if label not in CATEGORY_NAMES}
        ranked = {
            label: _popular_with_tag(corpus, category, label)
            for label, w in weights.items()
            if w > 0
        }
    weights = {label: w for label, w in weights.items() if w > 0}
    if not weights:
        if category is None:
            return _balanced(corpus, k)
        return popularity_recall(corpus, category, k)

    available = {label: len(ranked[label]) for label in weights}
    seats = allocate(weights, available, k)
    order = sorted(weights, key=lambda label: (-weights[label], label))
    picked = _fill(ranked, seats, order)
    if category is not None and len(picked) < k:
        # topic shortfall inside a category tops up from plain popularity
        for item_id in popularity_recall(corpus, category, k + len(picked)):
            if len(picked) == k:
                break
            if item_id not in picked:
                picked.append(item_id)
    return picked
