"""Round-robin diversity re-ranking over seed interests."""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Callable, Iterable, Mapping, Union

from ..core.types import ContentItem, RankedEntry, RankedList

log = logging.getLogger(__name__)


def seed_interest(item: ContentItem, declared_tags: Iterable[str] = ()) -> str:
    """The item's first tag the user declared, else its category label."""
    declared = set(declared_tags)
    for tag in sorted(item.tags):
        if tag in declared:
            return tag
    return item.category.value


def round_robin(
    ranked: RankedList,
    n: int,
    interest_of: Union[Mapping[str, str], Callable[[str], str]],
) -> RankedList:
    """
    Rotate through seed-interest groups, one entry per group per cycle.

    Groups are visited in order of first appearance in `ranked`, which for a
    score-sorted list is the order of each group's best member. Entries keep
    their score order inside a group.
    """
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    lookup = interest_of if callable(interest_of) else interest_of.__getitem__

    groups: dict[str, list[RankedEntry]] = {}
    for entry in ranked.entries:
        groups.setdefault(lookup(entry.item_id), []).append(entry)

    target = min(n, len(ranked.entries))
    emitted: list[RankedEntry] = []
    depth = 0
    while len(emitted) < target:
        for members in groups.values():
            if depth < len(members):
                emitted.append(members[depth])
                if len(emitted) == target:
                    break
        depth += 1

    log.debug(
        "%s: %d seed interests across %d entries", ranked.user_id, len(groups), target
    )
    return replace(ranked, entries=tuple(emitted), cutoff=n, reranked=True)


def truncate(ranked: RankedList, n: int) -> RankedList:
    return replace(ranked, entries=ranked.entries[:n], cutoff=n)
