"""
Per-user exploration weights.

Each user starts at the configured exploration reward. Explored entries the
user leaves unclicked shrink it, explored entries the user clicks grow it
back, never above the configured value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..core.store import Corpus
from ..core.types import Interaction, InteractionKind, RankedList
from .ranking import ExposureStats

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExplorationConfig:
    """
    Args:
        adaptive: keep a weight per user; off uses the global w_explore for everyone
        decay: factor per explored impression the user did not click, in (0, 1]
        recovery: factor per explored impression the user clicked, >= 1
    """

    adaptive: bool = True
    decay: float = 0.7
    recovery: float = 1.5

    def __post_init__(self) -> None:
        if not 0.0 < self.decay <= 1.0:
            raise ValueError(f"decay must be in (0, 1], got {self.decay}")
        if self.recovery < 1.0:
            raise ValueError(f"recovery must be >= 1, got {self.recovery}")


class ExplorationState:
    """
    Args:
        base: the exploration reward a fresh user gets, and the cap
        cfg: decay and recovery factors
    """

    def __init__(self, base: float, cfg: ExplorationConfig = ExplorationConfig()) -> None:
        if base < 0:
            raise ValueError(f"base weight must be >= 0, got {base}")
        self.base = float(base)
        self.cfg = cfg
        self._weights: dict[str, float] = {}

    def weight(self, user_id: str) -> float:
        if not self.cfg.adaptive:
            return self.base
        return self._weights.get(user_id, self.base)

    @property
    def weights(self) -> dict[str, float]:
        return dict(sorted(self._weights.items()))

    def update(self, user_id: str, ignored: int, taken: int) -> float:
        if not self.cfg.adaptive or (ignored == 0 and taken == 0):
            return self.weight(user_id)
        value = self.weight(user_id) * self.cfg.decay**ignored * self.cfg.recovery**taken
        value = min(self.base, value)
        self._weights[user_id] = value
        log.debug("%s exploration weight %.4f (%d ignored, %d taken)", user_id, value, ignored, taken)
        return value

    def observe(self, ranked: RankedList, clicked: Sequence[bool]) -> float:
        """Fold one emitted list and its click flags into the user's weight."""
        if len(clicked) != len(ranked.entries):
            raise ValueError(
                f"{len(clicked)} click flags for {len(ranked.entries)} entries"
            )
        ignored = taken = 0
        for entry, hit in zip(ranked.entries, clicked):
            if entry.exploration_bonus > 0:
                if hit:
                    taken += 1
                else:
                    ignored += 1
        return self.update(ranked.user_id, ignored, taken)

    @classmethod
    def from_log(
        cls,
        interactions: Iterable[Interaction],
        exposure: ExposureStats,
        corpus: Corpus,
        base: float,
        cfg: ExplorationConfig = ExplorationConfig(),
    ) -> "ExplorationState":
        """
        Warm start from a background log: every impression of an item the
        exposure stats count as underexposed is an explored impression.
        """
        state = cls(base, cfg)
        if not cfg.adaptive or base == 0:
            return state
        shown: dict[tuple[str, str], bool] = {}
        for event in interactions:
            if event.item_id not in corpus:
                continue
            if not exposure.underexposed(event.item_id, corpus[event.item_id].popularity):
                continue
            key = (event.user_id, event.item_id)
            if event.kind is InteractionKind.IMPRESSION:
                shown.setdefault(key, False)
            elif event.kind is InteractionKind.CLICK:
                shown[key] = True
        counts: dict[str, list[int]] = {}
        for (user_id, _), hit in sorted(shown.items()):
            tally = counts.setdefault(user_id, [0, 0])
            tally[1 if hit else 0] += 1
        for user_id, (ignored, taken) in counts.items():
            state.update(user_id, ignored, taken)
        return state
