"""Condition runs: recommend for every (user, category), then simulate clicks."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from ..core.types import (
    CandidateSet,
    Category,
    Interaction,
    InteractionKind,
    RankedList,
)
from ..pipeline.exploration import ExplorationState
from ..pipeline.recommender import Condition, Recommender
from .scenario import ClickConfig
from .world import World

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Slate:
    user_id: str
    category: Category
    candidates: CandidateSet
    ranked: RankedList


@dataclass(frozen=True)
class ConditionRun:
    """
    Args:
        condition: the condition that produced the run
        slates: one per (user, category), users ascending then table row order
        interactions: impressions and clicks in slate order
        explore_weights: each user's exploration weight after their last list
    """

    condition: Condition
    slates: tuple[Slate, ...]
    interactions: tuple[Interaction, ...]
    explore_weights: dict[str, float] = field(default_factory=dict)

    @property
    def ranked_lists(self) -> tuple[RankedList, ...]:
        return tuple(slate.ranked for slate in self.slates)

    def exploration_share(self) -> float:
        """Fraction of emitted entries carrying a nonzero exploration bonus."""
        entries = [e for slate in self.slates for e in slate.ranked.entries]
        if not entries:
            return 0.0
        return sum(1 for e in entries if e.exploration_bonus > 0) / len(entries)

    def mean_explore_weight(self) -> float:
        if not self.explore_weights:
            return 0.0
        return float(np.mean(list(self.explore_weights.values())))


class DeterministicClicks:
    """Click iff the relevance grade reaches the threshold."""

    def __init__(self, threshold: int = 2) -> None:
        self.threshold = threshold

    def clicks(self, grades: np.ndarray) -> np.ndarray:
        return np.asarray(grades) >= self.threshold


class BernoulliClicks:
    """Click with a per-grade probability from a seeded generator."""

    def __init__(self, probabilities: Mapping[int, float], rng: np.random.Generator) -> None:
        self.table = np.array([probabilities[g] for g in range(4)], dtype=np.float64)
        self.rng = rng

    def clicks(self, grades: np.ndarray) -> np.ndarray:
        grades = np.asarray(grades, dtype=np.int64)
        return self.rng.random(grades.shape) < self.table[grades]


def click_model(
    cfg: ClickConfig, seed: int, condition: Condition
) -> Union[DeterministicClicks, BernoulliClicks]:
    if cfg.model == "deterministic":
        return DeterministicClicks(cfg.threshold)
    # one stream per condition keeps concurrent runs reproducible
    stream = list(Condition).index(condition)
    return BernoulliClicks(cfg.probabilities, np.random.default_rng([seed, stream]))


def run_condition(
    world: World,
    condition: Union[Condition, str],
    ks: Optional[Sequence[int]] = None,
    progress: Optional[bool] = None,
    recommender: Optional[Recommender] = None,
) -> ConditionRun:
    """
    Recommend for every user and category under one condition and record
    the impressions and clicks of the emitted lists.

    Users are served category by category; each user's exploration weight
    is folded forward from the clicks on their previous lists.
    """
    condition = condition if isinstance(condition, Condition) else Condition.parse(condition)
    cfg = world.config
    top_n = max([cfg.experiment.top_n, *(ks or ())])
    show = cfg.experiment.progress if progress is None else progress

    recommender = recommender or world.observed.recommender(cfg)
    clicker = click_model(cfg.clicks, cfg.world.seed, condition)
    explorer = ExplorationState.from_log(
        world.observed.history,
        recommender.exposure,
        world.observed.corpus,
        recommender.weights_for(condition).w_explore,
        cfg.pipeline.exploration,
    )
    tick = world.observed.tick
    profiles = sorted(world.observed.profiles, key=lambda p: p.user_id)

    slates: list[Slate] = []
    events: list[Interaction] = []
    for profile in tqdm(profiles, desc=condition.value, disable=not show, leave=False):
        for category in Category:
            rec = recommender.recommend(
                profile, category, condition, top_n, explorer.weight(profile.user_id)
            )
            slates.append(Slate(profile.user_id, category, rec.candidates, rec.ranked))
            shown = list(rec.ranked.item_ids)
            clicked = clicker.clicks(world.grades(profile.user_id, shown))
            explorer.observe(rec.ranked, [bool(hit) for hit in clicked])
            for position, (item_id, hit) in enumerate(zip(shown, clicked), start=1):
                events.append(
                    Interaction(profile.user_id, item_id, InteractionKind.IMPRESSION, position, tick)
                )
                if hit:
                    events.append(
                        Interaction(profile.user_id, item_id, InteractionKind.CLICK, position, tick)
                    )

    run = ConditionRun(
        condition,
        tuple(slates),
        tuple(events),
        {p.user_id: explorer.weight(p.user_id) for p in profiles},
    )
    log.info(
        "%s: %d slates, %d clicks, exploration share %.3f, mean exploration weight %.3f",
        condition.value,
        len(slates),
        sum(1 for e in events if e.kind is InteractionKind.CLICK),
        run.exploration_share(),
        run.mean_explore_weight(),
    )
    return run


def run_experiment(
    world: World,
    conditions: Optional[Iterable[Union[Condition, str]]] = None,
    workers: Optional[int] = None,
) -> dict[Condition, ConditionRun]:
    """
    Run several conditions, possibly concurrently; results keep the given
    order. One recommender serves every condition.
    """
    cfg = world.config
    chosen = [
        c if isinstance(c, Condition) else Condition.parse(c)
        for c in (conditions if conditions is not None else cfg.conditions)
    ]
    ks = cfg.experiment.ks
    n_workers = workers or cfg.experiment.workers
    recommender = world.observed.recommender(cfg)
    if n_workers > 1 and len(chosen) > 1:
        # shared lazy state is built before the threads start
        recommender.warm()
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            runs = list(
                pool.map(lambda c: run_condition(world, c, ks, recommender=recommender), chosen)
            )
    else:
        runs = [run_condition(world, c, ks, recommender=recommender) for c in chosen]
    return dict(zip(chosen, runs))
