"""In-memory item store with column arrays for vectorised recall."""

from __future__ import annotations

import logging
from functools import cached_property
from typing import Iterable, Iterator, Optional

import numpy as np

from .types import Category, ContentItem, DimensionMismatchError

log = logging.getLogger(__name__)


class Corpus:
    """
    Immutable collection of ContentItems ordered by item id.

    Args:
        items: the items; ids must be unique
        dimension: feature dimension every item must have
    """

    def __init__(self, items: Iterable[ContentItem], dimension: int) -> None:
        ordered = sorted(items, key=lambda item: item.item_id)
        self.dimension = dimension
        self._items: tuple[ContentItem, ...] = tuple(ordered)
        self._by_id: dict[str, ContentItem] = {}
        for item in self._items:
            if item.item_id in self._by_id:
                raise ValueError(f"duplicate item id {item.item_id}")
            if len(item.features) != dimension:
                raise DimensionMismatchError(
                    f"{item.item_id} has {len(item.features)} features, "
                    f"expected {dimension}"
                )
            self._by_id[item.item_id] = item
        self._position = {item.item_id: pos for pos, item in enumerate(self._items)}

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[ContentItem]:
        return iter(self._items)

    def __contains__(self, item_id: object) -> bool:
        return item_id in self._by_id

    def __getitem__(self, item_id: str) -> ContentItem:
        return self._by_id[item_id]

    @property
    def items(self) -> tuple[ContentItem, ...]:
        return self._items

    def position(self, item_id: str) -> int:
        return self._position[item_id]

    @cached_property
    def ids(self) -> np.ndarray:
        return np.array([item.item_id for item in self._items], dtype=object)

    @cached_property
    def features(self) -> np.ndarray:
        if not self._items:
            return np.zeros((0, self.dimension))
        return np.array([item.features for item in self._items], dtype=np.float64)

    @cached_property
    def popularity(self) -> np.ndarray:
        return np.array([item.popularity for item in self._items], dtype=np.float64)

    @cached_property
    def created_at(self) -> np.ndarray:
        return np.array([item.created_at for item in self._items], dtype=np.int64)

    @cached_property
    def categories(self) -> np.ndarray:
        return np.array([item.category.value for item in self._items], dtype=object)

    def mask(
        self, category: Optional[Category] = None, tag: Optional[str] = None
    ) -> np.ndarray:
        """Boolean row mask for items matching an optional category and tag."""
        keep = np.ones(len(self._items), dtype=bool)
        if category is not None:
            keep &= self._category_rows[Category(category)]
        if tag is not None:
            keep &= self._tag_rows.get(tag, np.zeros(len(self._items), dtype=bool))
        return keep

    @cached_property
    def _category_rows(self) -> dict[Category, np.ndarray]:
        return {c: self.categories == c.value for c in Category}

    @cached_property
    def _tag_rows(self) -> dict[str, np.ndarray]:
        rows: dict[str, np.ndarray] = {}
        for pos, item in enumerate(self._items):
            for tag in item.tags:
                rows.setdefault(tag, np.zeros(len(self._items), dtype=bool))[pos] = True
        return rows

    def authored_by(self, author_id: str) -> list[ContentItem]:
        return [item for item in self._items if item.author_id == author_id]

    @cached_property
    def by_author(self) -> dict[str, tuple[str, ...]]:
        grouped: dict[str, list[str]] = {}
        for item in self._items:
            grouped.setdefault(item.author_id, []).append(item.item_id)
        return {author: tuple(ids) for author, ids in grouped.items()}
