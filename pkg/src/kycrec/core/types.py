"""Shared domain types for the recommendation pipeline and the simulator.

All types are frozen dataclasses. Vectors are stored as tuples of floats so
values compare by content and survive a JSON round trip unchanged; the
`vector` helpers hand out numpy arrays for computation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np

log = logging.getLogger(__name__)


class DimensionMismatchError(ValueError):
    pass


class Category(str, Enum):
    """The five content verticals, in table row order."""

    AD = "Ad"
    NEWS = "News"
    GOSSIP = "Gossip"
    SHARING = "Sharing"
    TECH = "Tech"


class KycTier(str, Enum):
    """
    Depth of user context visible to the recommender. Ordered:
    NoKyc < BasicKyc < AdvancedKyc < AdvancedKycCircles
    """

    NO_KYC = "NoKyc"
    BASIC_KYC = "BasicKyc"
    ADVANCED_KYC = "AdvancedKyc"
    ADVANCED_KYC_CIRCLES = "AdvancedKycCircles"

    @property
    def rank(self) -> int:
        return _TIER_RANK[self]

    # the str mixin would otherwise compare labels alphabetically
    def __lt__(self, other: object) -> bool:
        if not isinstance(other, KycTier):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other: object) -> bool:
        if not isinstance(other, KycTier):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other: object) -> bool:
        if not isinstance(other, KycTier):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other: object) -> bool:
        if not isinstance(other, KycTier):
            return NotImplemented
        return self.rank >= other.rank


_TIER_RANK = {
    KycTier.NO_KYC: 0,
    KycTier.BASIC_KYC: 1,
    KycTier.ADVANCED_KYC: 2,
    KycTier.ADVANCED_KYC_CIRCLES: 3,
}


class AccountKind(str, Enum):
    INDIVIDUAL = "individual"
    CREATOR = "creator"
    ENTERPRISE = "enterprise"


class InteractionKind(str, Enum):
    IMPRESSION = "impression"
    CLICK = "click"


class Source(str, Enum):
    """Recall source tags attached to candidates."""

    POPULARITY = "popularity"
    RECENCY = "recency"
    KNN = "knn"
    COOCCUR = "cooccur"
    SOCIAL1 = "social1"
    SOCIAL2 = "social2"
    COLDSTART = "coldstart"


def as_vector(values: Iterable[float], dimension: Optional[int] = None) -> np.ndarray:
    """Convert a stored vector into a float64 array, checking its dimension."""
    vec = np.asarray(tuple(values), dtype=np.float64)
    if dimension is not None and vec.shape != (dimension,):
        raise DimensionMismatchError(
            f"expected a vector of dimension {dimension}, got shape {vec.shape}"
        )
    return vec


def as_tuple(vec: np.ndarray) -> tuple[float, ...]:
    return tuple(float(x) for x in np.asarray(vec, dtype=np.float64).ravel())


@dataclass(frozen=True)
class Demographics:
    age: int
    occupation: str
    region: str
    income: float
    gender: str


@dataclass(frozen=True)
class UserProfile:
    """
    A study user as the recommender sees them. Which context fields may be
    populated depends on `kyc_tier`; see `validate_profile`.
    """

    user_id: str
    kyc_tier: KycTier
    demographics: Optional[Demographics] = None
    declared_tags: frozenset[str] = frozenset()
    bio_keywords: frozenset[str] = frozenset()
    authored_items: tuple[str, ...] = ()
    followed: tuple[str, ...] = ()
    history: tuple[str, ...] = ()


@dataclass(frozen=True)
class ContentItem:
    item_id: str
    category: Category
    features: tuple[float, ...]
    author_id: str
    popularity: int
    created_at: int
    tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.popularity < 0:
            raise ValueError(f"{self.item_id}: popularity must be >= 0")

    def vector(self, dimension: Optional[int] = None) -> np.ndarray:
        return as_vector(self.features, dimension)


@dataclass(frozen=True)
class Account:
    account_id: str
    kind: AccountKind
    interest_vector: tuple[float, ...]

    def vector(self, dimension: Optional[int] = None) -> np.ndarray:
        return as_vector(self.interest_vector, dimension)


@dataclass(frozen=True)
class FollowEdge:
    follower: str
    followee: str


@dataclass(frozen=True)
class Interaction:
    user_id: str
    item_id: str
    kind: InteractionKind
    position: int
    tick: int

    def __post_init__(self) -> None:
        if self.position < 1:
            raise ValueError(f"position must be >= 1, got {self.position}")


@dataclass(frozen=True)
class RankedEntry:
    item_id: str
    total_score: float
    relevance_score: float
    social_boost: float
    exploration_bonus: float

    @classmethod
    def from_parts(
        cls, item_id: str, relevance: float, social: float, exploration: float
    ) -> "RankedEntry":
        # one fixed accumulation order; the identity check below repeats it
        total = relevance + social + exploration
        return cls(item_id, total, relevance, social, exploration)

    def decomposes(self) -> bool:
        return self.total_score == (
            self.relevance_score + self.social_boost + self.exploration_bonus
        )


def entry_order(entry: RankedEntry) -> tuple[float, str]:
    """Sort key: total score descending, then ascending item id."""
    return (-entry.total_score, entry.item_id)


@dataclass(frozen=True)
class RankedList:
    """
    Ordered top-N recommendation. A list straight from ranking is sorted by
    `entry_order`; a re-ranked list (`reranked=True`) keeps the rotation
    order instead.
    """

    user_id: str
    entries: tuple[RankedEntry, ...]
    cutoff: int
    category: Optional[Category] = None
    condition: Optional[str] = None
    reranked: bool = False

    def __post_init__(self) -> None:
        if self.cutoff < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.cutoff}")
        if len(self.entries) > self.cutoff:
            raise ValueError(
                f"{len(self.entries)} entries exceed cutoff {self.cutoff}"
            )
        ids = [e.item_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate item ids in ranked list for {self.user_id}")
        for entry in self.entries:
            if not entry.decomposes():
                raise ValueError(f"score decomposition broken for {entry.item_id}")
        if not self.reranked and list(self.entries) != sorted(
            self.entries, key=entry_order
        ):
            raise ValueError(f"ranked list for {self.user_id} is not score-ordered")

    @property
    def item_ids(self) -> tuple[str, ...]:
        return tuple(e.item_id for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Candidate:
    item_id: str
    sources: frozenset[Source]


@dataclass(frozen=True)
class CandidateSet:
    user_id: str
    candidates: tuple[Candidate, ...] = ()
    caps: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ids = [c.item_id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate candidates for {self.user_id}")
        for cand in self.candidates:
            if not cand.sources:
                raise ValueError(f"candidate {cand.item_id} carries no source tag")

    @property
    def item_ids(self) -> tuple[str, ...]:
        return tuple(c.item_id for c in self.candidates)

    def sources_of(self, item_id: str) -> frozenset[Source]:
        for cand in self.candidates:
            if cand.item_id == item_id:
                return cand.sources
        raise KeyError(item_id)

    def __len__(self) -> int:
        return len(self.candidates)
