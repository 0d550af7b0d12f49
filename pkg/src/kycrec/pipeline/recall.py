"""Multi-source candidate generation.

Every source returns an ordered list of item ids; `merge_candidates` folds
the per-source lists into one CandidateSet.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from ..core.graph import SocialGraph
from ..core.store import Corpus
from ..core.types import (
    Candidate,
    CandidateSet,
    Category,
    Interaction,
    InteractionKind,
    Source,
    UserProfile,
)

log = logging.getLogger(__name__)

DEFAULT_CAP = 50


def _default_caps() -> dict[str, int]:
    return {source.value: DEFAULT_CAP for source in Source}


@dataclass(frozen=True)
class RecallConfig:
    """
    Args:
        caps: per-source maximum number of candidates entering the union
        seed_neighbors: nearest-neighbour accounts expanded per followed seed
    """

    caps: dict[str, int] = field(default_factory=_default_caps)
    seed_neighbors: int = 3

    def cap(self, source: Source) -> int:
        return self.caps.get(Source(source).value, DEFAULT_CAP)


def _check_k(k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")


def _top_by(
    corpus: Corpus, key: np.ndarray, mask: np.ndarray, k: int
) -> list[str]:
    """Ids of the k masked items with the largest key, ties by ascending id."""
    rows = np.flatnonzero(mask)
    if rows.size == 0:
        return []
    # corpus rows are in ascending id order, so a stable sort keeps id ties
    order = rows[np.argsort(-key[rows], kind="stable")]
    return [corpus.ids[r] for r in order[:k]]


def popularity_recall(
    corpus: Corpus, category: Optional[Category] = None, k: int = DEFAULT_CAP
) -> list[str]:
    _check_k(k)
    return _top_by(corpus, corpus.popularity, corpus.mask(category), k)


def recency_recall(
    corpus: Corpus, category: Optional[Category] = None, k: int = DEFAULT_CAP
) -> list[str]:
    _check_k(k)
    return _top_by(corpus, corpus.created_at.astype(np.float64), corpus.mask(category), k)


class ContentIndex:
    """
    Exact cosine index over content embeddings.

    Args:
        corpus: the items to index
        embeddings: one unit-or-zero row per corpus item, in corpus order
    """

    def __init__(self, corpus: Corpus, embeddings: np.ndarray) -> None:
        if embeddings.shape != (len(corpus), corpus.dimension):
            raise ValueError(
                f"embedding matrix shape {embeddings.shape} does not match corpus"
            )
        self.corpus = corpus
        self.embeddings = embeddings

    def vector(self, item_id: str) -> np.ndarray:
        return self.embeddings[self.corpus.position(item_id)]

    def similarities(self, user_vec: np.ndarray) -> np.ndarray:
        norm = np.linalg.norm(user_vec)
        if norm == 0.0:
            return np.zeros(len(self.corpus))
        return self.embeddings @ (np.asarray(user_vec, dtype=np.float64) / norm)


def knn_recall(
    user_vec: np.ndarray,
    index: ContentIndex,
    k: int = DEFAULT_CAP,
    category: Optional[Category] = None,
) -> list[str]:
    """The k items most cosine-similar to `user_vec`; [] for a zero vector."""
    _check_k(k)
    if not np.any(user_vec):
        return []
    sims = index.similarities(user_vec)
    return _top_by(index.corpus, sims, index.corpus.mask(category), k)


class ClickLog:
    """Per-user click sets extracted from an interaction log."""

    def __init__(self, interactions: Iterable[Interaction]) -> None:
        clicks: dict[str, set[str]] = {}
        for event in interactions:
            if event.kind is InteractionKind.CLICK:
                clicks.setdefault(event.user_id, set()).add(event.item_id)
        self.clicks = {user: frozenset(items) for user, items in sorted(clicks.items())}

    def __len__(self) -> int:
        return len(self.clicks)


def cooccurrence_scores(
    history: Iterable[str], log_: Union[ClickLog, Iterable[Interaction]]
) -> dict[str, int]:
    """score(c) = sum over h in history of the distinct users who clicked h and c."""
    clicklog = log_ if isinstance(log_, ClickLog) else ClickLog(log_)
    seen = frozenset(history)
    scores: dict[str, int] = {}
    if not seen:
        return scores
    for items in clicklog.clicks.values():
        overlap = len(items & seen)
        if not overlap:
            continue
        for item in items - seen:
            scores[item] = scores.get(item, 0) + overlap
    return scores


def cooccurrence_recall(
    history: Sequence[str],
    log_: Union[ClickLog, Iterable[Interaction]],
    k: int = DEFAULT_CAP,
    category: Optional[Category] = None,
    corpus: Optional[Corpus] = None,
) -> list[str]:
    _check_k(k)
    scores = cooccurrence_scores(history, log_)
    if category is not None:
        if corpus is None:
            raise ValueError("a category filter needs the corpus")
        scores = {
            item: s
            for item, s in scores.items()
            if item in corpus and corpus[item].category == category
        }
    ranked = sorted(
        ((item, s) for item, s in scores.items() if s > 0),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return [item for item, _ in ranked[:k]]


class AccountIndex:
    """Cosine neighbours between accounts of a social graph."""

    def __init__(self, graph: SocialGraph) -> None:
        self.ids = graph.account_ids
        self._row = {aid: i for i, aid in enumerate(self.ids)}
        if not self.ids:
            self.unit = np.zeros((0, 0))
            return
        mat = graph.vector_matrix()
        norms = np.linalg.norm(mat, axis=1, keepdims=True)
        self.unit = mat / np.where(norms > 0, norms, 1.0)

    def neighbours(self, account_id: str, m: int) -> list[str]:
        if m <= 0 or account_id not in self._row:
            return []
        row = self._row[account_id]
        sims = self.unit @ self.unit[row]
        sims[row] = -np.inf
        order = np.argsort(-sims, kind="stable")
        return [self.ids[i] for i in order[:m]]


def _newest_first(corpus: Corpus, item_ids: Iterable[str]) -> list[str]:
    return sorted(set(item_ids), key=lambda i: (-corpus[i].created_at, i))


def social_recall_bands(
    profile: UserProfile,
    graph: SocialGraph,
    corpus: Corpus,
    hops: int = 2,
    category: Optional[Category] = None,
    seed_neighbors: int = 3,
    account_index: Optional[AccountIndex] = None,
) -> tuple[list[str], list[str]]:
    """
    One-hop and two-hop item bands, each newest first with id tie-break.
    """
    if hops not in (1, 2):
        raise ValueError(f"hops must be 1 or 2, got {hops}")
    seeds = [a for a in profile.followed if a in graph]
    if len(seeds) < len(profile.followed):
        log.debug(
            "%s follows %d accounts missing from the graph",
            profile.user_id,
            len(profile.followed) - len(seeds),
        )
    if not seeds:
        return [], []

    def authored(authors: Iterable[str]) -> set[str]:
        found: set[str] = set()
        for author in authors:
            for item_id in corpus.by_author.get(author, ()):
                if category is None or corpus[item_id].category == category:
                    found.add(item_id)
        return found

    band1_items = authored(seeds)
    band1 = _newest_first(corpus, band1_items)
    if hops == 1:
        return band1, []

    index = account_index or AccountIndex(graph)
    second: set[str] = set()
    for seed in seeds:
        second.update(graph.followees(seed))
        second.update(index.neighbours(seed, seed_neighbors))
    band2 = _newest_first(corpus, authored(second) - band1_items)
    return band1, band2


def social_recall(
    profile: UserProfile,
    graph: SocialGraph,
    corpus: Corpus,
    hops: int = 2,
    k: int = DEFAULT_CAP,
    category: Optional[Category] = None,
    seed_neighbors: int = 3,
    account_index: Optional[AccountIndex] = None,
) -> list[str]:
    _check_k(k)
    band1, band2 = social_recall_bands(
        profile, graph, corpus, hops, category, seed_neighbors, account_index
    )
    return (band1 + band2)[:k]


MERGE_ORDER = tuple(Source)


def merge_candidates(
    lists: Mapping[Source, Sequence[str]],
    caps: Mapping[str, int],
    user: UserProfile,
    base: Optional[CandidateSet] = None,
) -> CandidateSet:
    """
    Union of the per-source lists, each cut to its cap first. Items the
    user authored are dropped. Candidates come out in ascending id order.
    """
    tags: dict[str, set[Source]] = {}
    if base is not None:
        for cand in base.candidates:
            tags.setdefault(cand.item_id, set()).update(cand.sources)
    for source in MERGE_ORDER:
        items = lists.get(source)
        if not items:
            continue
        cap = caps.get(source.value)
        for item_id in list(items)[: cap if cap is not None else len(items)]:
            tags.setdefault(item_id, set()).add(source)

    authored = set(user.authored_items)
    candidates = tuple(
        Candidate(item_id, frozenset(sources))
        for item_id, sources in sorted(tags.items())
        if item_id not in authored
    )
    merged_caps = dict(base.caps) if base is not None else {}
    merged_caps.update({k: int(v) for k, v in caps.items()})
    return CandidateSet(user.user_id, candidates, merged_caps)
