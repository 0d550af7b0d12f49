"""The shared embedding space: topic and category bases plus the global prior."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from ..core.records import register_record
from ..core.types import Category, DimensionMismatchError

log = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-9


def l2_normalize(vec: np.ndarray) -> np.ndarray:
    """Unit vector in the direction of `vec`; the zero vector stays zero."""
    vec = np.asarray(vec, dtype=np.float64)
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        return np.zeros_like(vec)
    return vec / norm


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


@register_record("space")
@dataclass(frozen=True)
class EmbeddingSpace:
    """
    Args:
        dimension: vector dimension D
        topic_basis: topic label -> unit vector
        category_basis: Category -> unit vector
        global_prior: popularity-weighted mean content embedding, unit or zero
        seed: RNG seed the bases were drawn from
    """

    dimension: int
    topic_basis: dict[str, tuple[float, ...]]
    category_basis: dict[Category, tuple[float, ...]]
    global_prior: tuple[float, ...]
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        bases = list(self.topic_basis.items()) + [
            (c.value, v) for c, v in self.category_basis.items()
        ]
        for label, vec in bases:
            if len(vec) != self.dimension:
                raise DimensionMismatchError(
                    f"basis {label} has dimension {len(vec)}, expected {self.dimension}"
                )
            norm = float(np.linalg.norm(vec))
            if abs(norm - 1.0) > UNIT_TOLERANCE:
                raise ValueError(f"basis {label} is not unit-norm ({norm})")
        if len(self.global_prior) != self.dimension:
            raise DimensionMismatchError("global prior has the wrong dimension")
        missing = set(Category) - set(self.category_basis)
        if missing:
            raise ValueError(f"category basis missing {sorted(c.value for c in missing)}")

    @cached_property
    def topic_labels(self) -> tuple[str, ...]:
        return tuple(sorted(self.topic_basis))

    @cached_property
    def _topic_arrays(self) -> dict[str, np.ndarray]:
        return {k: np.asarray(v, dtype=np.float64) for k, v in self.topic_basis.items()}

    @cached_property
    def _category_arrays(self) -> dict[Category, np.ndarray]:
        return {k: np.asarray(v, dtype=np.float64) for k, v in self.category_basis.items()}

    @cached_property
    def prior(self) -> np.ndarray:
        return np.asarray(self.global_prior, dtype=np.float64)

    def topic(self, label: str) -> np.ndarray:
        return self._topic_arrays[label]

    def category(self, category: Category) -> np.ndarray:
        return self._category_arrays[Category(category)]

    def has_topic(self, label: str) -> bool:
        return label in self.topic_basis

    def basis_vector(self, label: str) -> np.ndarray:
        """Topic label or category name -> basis vector."""
        if label in self.topic_basis:
            return self.topic(label)
        return self.category(Category(label))
