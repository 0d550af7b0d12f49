"""
Seeded synthetic world: accounts, follow graph, content corpus, study users
and a background interaction log.

The snapshot is split in two. `ObservedWorld` is everything the pipeline
may read. `GroundTruth` holds the hidden latent interests and grades
relevance; only the click model and the metrics use it.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ..core.graph import SocialGraph
from ..core.records import RecordFormatError, dump_jsonl, load_jsonl, register_record
from ..core.store import Corpus
from ..core.types import (
    Account,
    AccountKind,
    Category,
    ContentItem,
    Demographics,
    FollowEdge,
    Interaction,
    InteractionKind,
    KycTier,
    UserProfile,
    as_tuple,
)
from ..pipeline.cold_start import DemographicPrior
from ..pipeline.embedding import EmbeddingConfig, build_index, with_global_prior
from ..pipeline.recall import ContentIndex
from ..pipeline.recommender import Recommender
from ..pipeline.space import EmbeddingSpace, l2_normalize
from .scenario import CategoryProfile, ScenarioConfig

log = logging.getLogger(__name__)

MAINSTREAM_ROW = -1
FOLLOW_FLOOR = 1e-9


@register_record("truth")
@dataclass(frozen=True)
class GroundTruth:
    """
    Hidden per-user latent interests and the relevance grading rule.

    Args:
        latents: user id -> unit latent interest vector
        mainstream: the population-wide appeal direction
        thresholds: cosine cut points between grades 0|1|2|3
    """

    latents: dict[str, tuple[float, ...]]
    mainstream: tuple[float, ...]
    thresholds: tuple[float, float, float] = (0.2, 0.45, 0.7)

    @cached_property
    def _latent_arrays(self) -> dict[str, np.ndarray]:
        return {u: np.asarray(v, dtype=np.float64) for u, v in self.latents.items()}

    def latent(self, user_id: str) -> np.ndarray:
        return self._latent_arrays[user_id]

    def quantize(self, cosines: Union[float, np.ndarray]) -> np.ndarray:
        return np.searchsorted(np.asarray(self.thresholds), cosines, side="right")

    def grades(self, user_id: str, item_ids: Sequence[str], index: ContentIndex) -> np.ndarray:
        """rel(u, i) in {0, 1, 2, 3} for each item, in the given order."""
        if not item_ids:
            return np.zeros(0, dtype=np.int64)
        latent = self.latent(user_id)
        rows = np.array([index.corpus.position(i) for i in item_ids])
        norm = np.linalg.norm(latent)
        if norm == 0.0:
            return np.zeros(len(item_ids), dtype=np.int64)
        cosines = index.embeddings[rows] @ (latent / norm)
        return self.quantize(cosines).astype(np.int64)

    def relevance(self, user_id: str, item_id: str, index: ContentIndex) -> int:
        return int(self.grades(user_id, [item_id], index)[0])


@dataclass(frozen=True)
class ObservedWorld:
    """
    Everything the recommendation pipeline may read.

    Args:
        profiles: study users at full context (AdvancedKycCircles)
        corpus: all items, study users' authored items included
        graph: accounts and follow edges
        space: embedding space with the popularity-weighted global prior
        priors: demographic prior table
        history: background interaction log
        tick: the tick the experiment runs at
    """

    profiles: tuple[UserProfile, ...]
    corpus: Corpus
    graph: SocialGraph
    space: EmbeddingSpace
    priors: DemographicPrior
    history: tuple[Interaction, ...]
    tick: int

    def profile(self, user_id: str) -> UserProfile:
        for profile in self.profiles:
            if profile.user_id == user_id:
                return profile
        raise KeyError(user_id)

    def content_index(self, cfg: EmbeddingConfig) -> ContentIndex:
        """The corpus index for one embedding configuration, built once."""
        built = self.__dict__.setdefault("_indices", {})
        if cfg not in built:
            built[cfg] = build_index(self.corpus, self.space, cfg)
        return built[cfg]

    def recommender(self, cfg: ScenarioConfig) -> Recommender:
        pipeline = cfg.pipeline
        return Recommender(
            self.corpus,
            self.space,
            self.graph,
            self.priors,
            self.history,
            pipeline,
            index=self.content_index(pipeline.embedding),
        )


@dataclass(frozen=True)
class World:
    config: ScenarioConfig
    observed: ObservedWorld
    truth: GroundTruth

    @cached_property
    def index(self) -> ContentIndex:
        return self.observed.content_index(self.config.embedding)

    def grades(self, user_id: str, item_ids: Sequence[str]) -> np.ndarray:
        return self.truth.grades(user_id, item_ids, self.index)


def _bases(rng: np.random.Generator, dim: int, count: int) -> np.ndarray:
    """`count` unit vectors as rows; orthonormal when they fit in `dim`."""
    if count <= dim:
        q, _ = np.linalg.qr(rng.standard_normal((dim, count)))
        return q.T.copy()
    raw = rng.standard_normal((count, dim))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def _zipf_weights(n: int, s: float, rng: np.random.Generator) -> np.ndarray:
    """Zipf weights over n labels assigned in a random rank order."""
    order = rng.permutation(n)
    weights = np.empty(n)
    weights[order] = (np.arange(1, n + 1, dtype=np.float64)) ** -s
    return weights / weights.sum()


def _noise(rng: np.random.Generator, dim: int, sigma: float) -> np.ndarray:
    return rng.standard_normal(dim) * (sigma / np.sqrt(dim))


def _standardize(x: np.ndarray) -> np.ndarray:
    std = x.std()
    if std == 0:
        return np.zeros_like(x)
    return (x - x.mean()) / std


class _Generator:
    """One pass of seeded world construction; draw order is part of the contract."""

    def __init__(self, cfg: ScenarioConfig) -> None:
        self.cfg = cfg
        self.w = cfg.world
        self.rng = np.random.default_rng(self.w.seed)
        self.dim = self.w.dimension
        self.labels = [f"topic_{i:02d}" for i in range(self.w.topics)]

    def run(self) -> World:
        w = self.w
        rows = _bases(self.rng, self.dim, w.topics + len(Category) + 1)
        self.topics = rows[: w.topics]
        self.cats = {c: rows[w.topics + j] for j, c in enumerate(Category)}
        self.mainstream = rows[MAINSTREAM_ROW]
        self.topic_pop = _zipf_weights(w.topics, w.topic_skew, self.rng)

        latents = self._latents()
        accounts, account_topics = self._accounts()
        edges = self._edges(account_topics)
        items = self._items(latents, account_topics)
        users, authored = self._users(latents, accounts)
        corpus = Corpus(items + authored, self.dim)

        space = EmbeddingSpace(
            dimension=self.dim,
            topic_basis={label: as_tuple(v) for label, v in zip(self.labels, self.topics)},
            category_basis={c: as_tuple(v) for c, v in self.cats.items()},
            global_prior=as_tuple(np.zeros(self.dim)),
            seed=w.seed,
        )
        space = with_global_prior(space, corpus, self.cfg.embedding)
        truth = GroundTruth(
            latents={u.user_id: as_tuple(v) for u, v in zip(users, latents)},
            mainstream=as_tuple(self.mainstream),
            thresholds=w.relevance_thresholds,
        )
        index = build_index(corpus, space, self.cfg.embedding)
        history = self._history(users, corpus, truth, index)

        clicked: dict[str, list[str]] = {}
        for event in history:
            if event.kind is InteractionKind.CLICK:
                clicked.setdefault(event.user_id, []).append(event.item_id)
        users = [
            replace(u, history=tuple(dict.fromkeys(clicked.get(u.user_id, ()))))
            for u in users
        ]

        if self.cfg.cold_start.priors is not None:
            priors = DemographicPrior(self.cfg.cold_start.priors)
        else:
            priors = DemographicPrior.default(self.labels, w.occupations)

        observed = ObservedWorld(
            profiles=tuple(users),
            corpus=corpus,
            graph=SocialGraph(accounts, edges),
            space=space,
            priors=priors,
            history=tuple(history),
            tick=w.creation_ticks + w.history_sessions,
        )
        observed.__dict__["_indices"] = {self.cfg.embedding: index}
        log.info(
            "Generated world seed=%d: %d users, %d accounts, %d edges, %d items, %d events",
            w.seed,
            len(users),
            len(accounts),
            len(edges),
            len(corpus),
            len(history),
        )
        return World(self.cfg, observed, truth)

    def _latents(self) -> np.ndarray:
        w = self.w
        latents = np.zeros((w.users, self.dim))
        lo, hi = w.mainstream_range
        for u in range(w.users):
            topics = self.rng.choice(w.topics, size=w.user_topics, replace=False, p=self.topic_pop)
            mix = np.sort(self.rng.dirichlet(np.ones(w.user_topics)))[::-1]
            mu = self.rng.uniform(lo, hi)
            affinity = self.rng.dirichlet(np.ones(len(Category)))
            vec = mix @ self.topics[topics] + mu * self.mainstream
            vec = vec + w.category_affinity * sum(
                a * self.cats[c] for a, c in zip(affinity, Category)
            )
            vec = vec + _noise(self.rng, self.dim, w.feature_noise)
            latents[u] = l2_normalize(vec)
        return latents

    def _accounts(self) -> tuple[list[Account], np.ndarray]:
        w = self.w
        kinds = list(w.account_kinds)
        probs = np.array([w.account_kinds[k] for k in kinds], dtype=np.float64)
        probs = probs / probs.sum()
        account_topics = self.rng.integers(0, w.topics, size=w.accounts)
        accounts = []
        for a in range(w.accounts):
            kind = AccountKind(kinds[self.rng.choice(len(kinds), p=probs)])
            vec = l2_normalize(
                self.topics[account_topics[a]] + _noise(self.rng, self.dim, w.feature_noise)
            )
            accounts.append(Account(self._account_id(a), kind, as_tuple(vec)))
        return accounts, account_topics

    def _account_id(self, a: int) -> str:
        return f"a{a:05d}"

    def _edges(self, account_topics: np.ndarray) -> list[FollowEdge]:
        w = self.w
        by_topic: dict[int, np.ndarray] = {
            t: np.flatnonzero(account_topics == t) for t in range(w.topics)
        }
        everyone = np.arange(w.accounts)
        edges = []
        for a in range(w.accounts):
            same = by_topic[int(account_topics[a])]
            same = same[same != a]
            n_same = min(len(same), int(round(w.account_homophily * w.account_follows)))
            chosen = set(self.rng.choice(same, size=n_same, replace=False).tolist()) if n_same else set()
            rest = np.setdiff1d(everyone, np.fromiter(chosen | {a}, dtype=np.int64))
            n_rest = min(len(rest), w.account_follows - len(chosen))
            if n_rest:
                chosen.update(self.rng.choice(rest, size=n_rest, replace=False).tolist())
            edges.extend(
                FollowEdge(self._account_id(a), self._account_id(b)) for b in sorted(chosen)
            )
        return edges

    def _item_topic(self, profile: CategoryProfile, author_topic: int) -> int:
        w = self.w
        if self.rng.random() < profile.author_fidelity:
            return int(author_topic)
        if self.rng.random() < profile.topic_skew_mix:
            return int(self.rng.choice(w.topics, p=self.topic_pop))
        return int(self.rng.integers(0, w.topics))

    def _popularity(self, n: int) -> np.ndarray:
        draws = self.rng.zipf(self.w.zipf_s, size=n)
        return np.minimum(draws, self.w.max_popularity).astype(np.int64)

    def _items(self, latents: np.ndarray, account_topics: np.ndarray) -> list[ContentItem]:
        w = self.w
        appeal_dir = l2_normalize(latents.mean(axis=0)) if len(latents) else np.zeros(self.dim)
        items: list[ContentItem] = []
        serial = 0
        for category in Category:
            profile = self.cfg.categories[category]
            n = profile.items
            if n == 0:
                continue
            authors = self.rng.integers(0, w.accounts, size=n)
            feats = np.zeros((n, self.dim))
            topics = np.zeros(n, dtype=np.int64)
            for j in range(n):
                t = self._item_topic(profile, account_topics[authors[j]])
                vec = (1.0 - profile.breadth) * self.topics[t] + profile.breadth * self.mainstream
                feats[j] = l2_normalize(vec + _noise(self.rng, self.dim, w.feature_noise))
                topics[j] = t
            pops = np.sort(self._popularity(n))[::-1]
            appeal = _standardize(feats @ appeal_dir)
            jitter = _standardize(self.rng.standard_normal(n))
            key = profile.popularity_alignment * appeal + (1 - profile.popularity_alignment) * jitter
            order = np.argsort(-key, kind="stable")
            popularity = np.empty(n, dtype=np.int64)
            popularity[order] = pops
            created = self.rng.integers(0, w.creation_ticks, size=n)
            for j in range(n):
                items.append(
                    ContentItem(
                        item_id=f"i{serial:05d}",
                        category=category,
                        features=as_tuple(feats[j]),
                        author_id=self._account_id(int(authors[j])),
                        popularity=int(popularity[j]),
                        created_at=int(created[j]),
                        tags=(self.labels[topics[j]],),
                    )
                )
                serial += 1
        self._next_serial = serial
        return items

    def _users(
        self,
        latents: np.ndarray,
        accounts: list[Account],
    ) -> tuple[list[UserProfile], list[ContentItem]]:
        w = self.w
        account_vecs = np.array([a.interest_vector for a in accounts])
        account_ids = [a.account_id for a in accounts]
        categories = list(Category)
        users: list[UserProfile] = []
        authored_all: list[ContentItem] = []
        serial = self._next_serial
        for u, latent in enumerate(latents):
            user_id = f"u{u:04d}"
            topic_cos = self.topics @ latent
            ranked_topics = np.argsort(-topic_cos, kind="stable")

            top = int(ranked_topics[0])
            if self.rng.random() < w.occupation_fidelity:
                occupation = w.occupations[top % len(w.occupations)]
            else:
                occupation = w.occupations[int(self.rng.integers(0, len(w.occupations)))]
            lo_age, hi_age = w.age_range
            lo_inc, hi_inc = w.income_range
            demographics = Demographics(
                age=int(self.rng.integers(lo_age, hi_age + 1)),
                occupation=occupation,
                region=w.regions[int(self.rng.integers(0, len(w.regions)))],
                income=round(float(np.exp(self.rng.uniform(np.log(lo_inc), np.log(hi_inc)))), 2),
                gender=w.genders[int(self.rng.integers(0, len(w.genders)))],
            )

            # declared tags: the strongest topic, the runner-up swapped for a random other
            top2 = [int(t) for t in ranked_topics[:2]]
            others = [t for t in range(w.topics) if t not in top2]
            declared = {top2[0]}
            if others:
                declared.add(int(self.rng.choice(others)))
            bio = {int(t) for t in ranked_topics[:4]}

            authored: list[ContentItem] = []
            for _ in range(w.authored_per_user):
                feats = l2_normalize(latent + _noise(self.rng, self.dim, w.feature_noise))
                category = categories[int(self.rng.integers(0, len(categories)))]
                authored.append(
                    ContentItem(
                        item_id=f"i{serial:05d}",
                        category=category,
                        features=as_tuple(feats),
                        author_id=user_id,
                        popularity=int(self._popularity(1)[0]),
                        created_at=int(self.rng.integers(0, w.creation_ticks)),
                        tags=(self.labels[int(np.argmax(self.topics @ feats))],),
                    )
                )
                serial += 1

            weights = np.maximum(account_vecs @ latent, 0.0) ** w.follow_sharpness + FOLLOW_FLOOR
            followed_rows = self.rng.choice(
                len(accounts), size=w.followed_count, replace=False, p=weights / weights.sum()
            )
            followed = tuple(sorted(account_ids[r] for r in followed_rows))

            users.append(
                UserProfile(
                    user_id=user_id,
                    kyc_tier=KycTier.ADVANCED_KYC_CIRCLES,
                    demographics=demographics,
                    declared_tags=frozenset(self.labels[t] for t in declared),
                    bio_keywords=frozenset(self.labels[t] for t in bio),
                    authored_items=tuple(item.item_id for item in authored),
                    followed=followed,
                )
            )
            authored_all.extend(authored)
        return users, authored_all

    def _history(
        self,
        users: list[UserProfile],
        corpus: Corpus,
        truth: GroundTruth,
        index: ContentIndex,
    ) -> list[Interaction]:
        w = self.w
        threshold = self.cfg.clicks.threshold
        events: list[Interaction] = []
        weights_all = corpus.popularity ** w.history_exposure
        for user in users:
            own = set(user.authored_items)
            for session in range(w.history_sessions):
                tick = w.creation_ticks + session
                eligible = np.flatnonzero(
                    (corpus.created_at < tick)
                    & np.array([i not in own for i in corpus.ids], dtype=bool)
                    & (weights_all > 0)
                )
                size = min(w.session_size, len(eligible))
                if size == 0:
                    continue
                p = weights_all[eligible] / weights_all[eligible].sum()
                shown = self.rng.choice(eligible, size=size, replace=False, p=p)
                shown_ids = [corpus.ids[r] for r in shown]
                grades = truth.grades(user.user_id, shown_ids, index)
                for position, (item_id, grade) in enumerate(zip(shown_ids, grades), start=1):
                    events.append(
                        Interaction(user.user_id, item_id, InteractionKind.IMPRESSION, position, tick)
                    )
                    if grade >= threshold:
                        events.append(
                            Interaction(user.user_id, item_id, InteractionKind.CLICK, position, tick)
                        )
        return events


def generate_world(cfg: ScenarioConfig) -> World:
    """Build the whole world from `cfg.world.seed`; same config, same world."""
    return _Generator(cfg).run()


def world_records(world: World) -> Iterable[object]:
    obs = world.observed
    yield world.config
    yield obs.space
    yield obs.priors
    yield from obs.graph.accounts
    yield from obs.graph.edges
    yield from obs.corpus
    yield from obs.profiles
    yield from obs.history
    yield world.truth


def save_world(world: World, path: Union[str, Path]) -> str:
    """Write the snapshot as JSONL; returns the file's SHA-256."""
    count = dump_jsonl(world_records(world), path)
    digest = file_digest(path)
    log.info("Wrote world snapshot %s (%d records, sha256 %s)", path, count, digest[:12])
    return digest


def file_digest(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_world(path: Union[str, Path]) -> World:
    records = load_jsonl(path)
    config: Optional[ScenarioConfig] = None
    space: Optional[EmbeddingSpace] = None
    priors: Optional[DemographicPrior] = None
    truth: Optional[GroundTruth] = None
    accounts: list[Account] = []
    edges: list[FollowEdge] = []
    items: list[ContentItem] = []
    profiles: list[UserProfile] = []
    history: list[Interaction] = []
    buckets: dict[type, list] = {
        Account: accounts,
        FollowEdge: edges,
        ContentItem: items,
        UserProfile: profiles,
        Interaction: history,
    }
    for record in records:
        if isinstance(record, ScenarioConfig):
            config = record
        elif isinstance(record, EmbeddingSpace):
            space = record
        elif isinstance(record, DemographicPrior):
            priors = record
        elif isinstance(record, GroundTruth):
            truth = record
        elif type(record) in buckets:
            buckets[type(record)].append(record)
        else:
            raise RecordFormatError(f"{path}: unexpected {type(record).__name__} record")
    missing = [
        name
        for name, value in (("scenario", config), ("space", space), ("prior", priors), ("truth", truth))
        if value is None
    ]
    if missing:
        raise RecordFormatError(f"{path}: snapshot lacks {', '.join(missing)} record(s)")
    observed = ObservedWorld(
        profiles=tuple(profiles),
        corpus=Corpus(items, space.dimension),
        graph=SocialGraph(accounts, edges),
        space=space,
        priors=priors,
        history=tuple(history),
        tick=config.world.creation_ticks + config.world.history_sessions,
    )
    return World(config, observed, truth)
