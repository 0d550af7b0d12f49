import numpy as np
import pytest

from kycrec.core import Category, ContentItem, Corpus
from kycrec.pipeline import EmbeddingSpace
from kycrec.sim import ScenarioConfig, generate_world

TINY = {
    "world": {
        "seed": 11,
        "dimension": 16,
        "users": 12,
        "accounts": 60,
        "account_follows": 4,
        "followed_count": 8,
        "topics": 8,
        "user_topics": 2,
        "history_sessions": 2,
        "session_size": 6,
        "authored_per_user": 2,
    },
    "categories": {c.value: {"items": 30} for c in Category},
}


def tiny_config(**sections) -> ScenarioConfig:
    data = {key: dict(value) for key, value in TINY.items()}
    for name, overrides in sections.items():
        data.setdefault(name, {}).update(overrides)
    return ScenarioConfig.from_dict(data)


def axis_space(dimension: int = 8, topics: int = 3) -> EmbeddingSpace:
    """Topics on the first axes, categories on the next five, zero prior."""
    eye = np.eye(dimension)
    return EmbeddingSpace(
        dimension=dimension,
        topic_basis={f"topic_{i:02d}": tuple(eye[i]) for i in range(topics)},
        category_basis={c: tuple(eye[topics + j]) for j, c in enumerate(Category)},
        global_prior=tuple(np.zeros(dimension)),
    )


def make_corpus(rng: np.random.Generator, n: int, dimension: int = 8) -> Corpus:
    categories = list(Category)
    items = []
    for j in range(n):
        feats = rng.standard_normal(dimension)
        items.append(
            ContentItem(
                item_id=f"i{j:05d}",
                category=categories[int(rng.integers(0, len(categories)))],
                features=tuple(float(x) for x in feats / np.linalg.norm(feats)),
                author_id=f"a{int(rng.integers(0, 20)):05d}",
                popularity=int(rng.integers(0, 50)),
                created_at=int(rng.integers(0, 100)),
                tags=(f"topic_{int(rng.integers(0, 3)):02d}",),
            )
        )
    return Corpus(items, dimension)


@pytest.fixture(scope="session", name="tiny_world")
def _tiny_world():
    yield generate_world(tiny_config())
