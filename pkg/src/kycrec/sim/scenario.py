"""
Scenario configuration: one YAML document with a section per module.

Every field is range-checked with qcodes validators when a ScenarioConfig
is constructed, so a ScenarioConfig in hand is always valid.
"""

from __future__ import annotations

import dataclasses
import hashlib
import importlib.resources
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import yaml
from qcodes.validators import Bool, Enum, Ints, Numbers, Validator

from ..core.records import build_dataclass, register_record, to_record
from ..core.types import AccountKind, Category, Source
from ..pipeline.cold_start import DEFAULT_OCCUPATIONS, DemographicPrior
from ..pipeline.embedding import EmbeddingConfig
from ..pipeline.exploration import ExplorationConfig
from ..pipeline.propagation import PropagationConfig
from ..pipeline.ranking import RankingWeights
from ..pipeline.recall import RecallConfig
from ..pipeline.recommender import Condition, PipelineConfig, RerankConfig

log = logging.getLogger(__name__)

DEFAULT_SCENARIO = "kycrec.scenarios:default.yaml"


class ScenarioConfigError(ValueError):
    pass


class InfeasibleScenarioError(ScenarioConfigError):
    pass


@dataclass(frozen=True)
class WorldConfig:
    seed: int = 7
    dimension: int = 32
    users: int = 100
    accounts: int = 2000
    account_kinds: dict[str, float] = field(
        default_factory=lambda: {"individual": 0.6, "creator": 0.3, "enterprise": 0.1}
    )
    account_follows: int = 10
    account_homophily: float = 0.7
    followed_count: int = 100
    follow_sharpness: float = 2.0
    age_range: tuple[int, int] = (18, 60)
    occupations: tuple[str, ...] = DEFAULT_OCCUPATIONS
    regions: tuple[str, ...] = ("north", "south", "east", "west", "central")
    genders: tuple[str, ...] = ("female", "male")
    income_range: tuple[float, float] = (4.0e4, 1.0e6)
    topics: int = 24
    user_topics: int = 3
    topic_skew: float = 1.0
    occupation_fidelity: float = 0.6
    feature_noise: float = 0.3
    zipf_s: float = 1.1
    max_popularity: int = 1_000_000_000
    mainstream_range: tuple[float, float] = (0.3, 0.6)
    category_affinity: float = 0.3
    history_sessions: int = 4
    session_size: int = 10
    history_exposure: float = 0.5
    creation_ticks: int = 1000
    authored_per_user: int = 3
    relevance_thresholds: tuple[float, float, float] = (0.2, 0.45, 0.7)


@dataclass(frozen=True)
class CategoryProfile:
    """
    Args:
        items: corpus size for the category
        breadth: share of the mainstream direction in item features
        topic_skew_mix: probability an item topic follows population topic
            popularity rather than a uniform draw
        popularity_alignment: how strongly popularity ranks follow
            population-level appeal
        author_fidelity: probability an item's topic is its author's topic
    """

    items: int = 200
    breadth: float = 0.3
    topic_skew_mix: float = 0.5
    popularity_alignment: float = 0.5
    author_fidelity: float = 0.5


def _default_categories() -> dict[Category, CategoryProfile]:
    return {
        Category.AD: CategoryProfile(200, 0.35, 0.7, 0.6, 0.3),
        Category.NEWS: CategoryProfile(200, 0.4, 0.8, 0.6, 0.3),
        Category.GOSSIP: CategoryProfile(200, 0.6, 1.0, 0.85, 0.2),
        Category.SHARING: CategoryProfile(200, 0.15, 0.3, 0.2, 0.9),
        Category.TECH: CategoryProfile(200, 0.1, 0.2, 0.2, 0.6),
    }


@dataclass(frozen=True)
class ColdStartConfig:
    """`priors` of None selects the built-in age-band x occupation table."""

    priors: Optional[dict[str, dict[str, float]]] = None


@dataclass(frozen=True)
class ClickConfig:
    model: str = "deterministic"
    threshold: int = 2
    probabilities: dict[int, float] = field(
        default_factory=lambda: {0: 0.02, 1: 0.1, 2: 0.45, 3: 0.8}
    )


@dataclass(frozen=True)
class MetricsConfig:
    relevance_mode: str = "graded"


@dataclass(frozen=True)
class ExperimentConfig:
    conditions: tuple[str, ...] = tuple(c.value for c in Condition)
    ks: tuple[int, ...] = (1, 3, 5)
    top_n: int = 5
    workers: int = 1
    progress: bool = False


SECTIONS: dict[str, type] = {
    "world": WorldConfig,
    "embedding": EmbeddingConfig,
    "recall": RecallConfig,
    "propagation": PropagationConfig,
    "ranking": RankingWeights,
    "rerank": RerankConfig,
    "exploration": ExplorationConfig,
    "cold_start": ColdStartConfig,
    "clicks": ClickConfig,
    "metrics": MetricsConfig,
    "experiment": ExperimentConfig,
}

# dotted field path -> validator; tuple and dict fields are checked per element
_FIELD_VALIDATORS: dict[str, Validator] = {
    "world.seed": Ints(min_value=0),
    "world.dimension": Ints(2, 4096),
    "world.users": Ints(min_value=1),
    "world.accounts": Ints(min_value=1),
    "world.account_kinds": Numbers(min_value=0),
    "world.account_follows": Ints(min_value=0),
    "world.account_homophily": Numbers(0, 1),
    "world.followed_count": Ints(min_value=0),
    "world.follow_sharpness": Numbers(min_value=0),
    "world.age_range": Ints(18, 60),
    "world.income_range": Numbers(min_value=1),
    "world.topics": Ints(min_value=1),
    "world.user_topics": Ints(min_value=1),
    "world.topic_skew": Numbers(min_value=0),
    "world.occupation_fidelity": Numbers(0, 1),
    "world.feature_noise": Numbers(min_value=0),
    "world.zipf_s": Numbers(1.000001, 10),
    "world.max_popularity": Ints(min_value=1),
    "world.mainstream_range": Numbers(min_value=0),
    "world.category_affinity": Numbers(min_value=0),
    "world.history_sessions": Ints(min_value=0),
    "world.session_size": Ints(min_value=1),
    "world.history_exposure": Numbers(min_value=0),
    "world.creation_ticks": Ints(min_value=1),
    "world.authored_per_user": Ints(min_value=0),
    "world.relevance_thresholds": Numbers(-1, 1),
    "categories.items": Ints(min_value=0),
    "categories.breadth": Numbers(0, 1),
    "categories.topic_skew_mix": Numbers(0, 1),
    "categories.popularity_alignment": Numbers(0, 1),
    "categories.author_fidelity": Numbers(0, 1),
    "embedding.w_cat": Numbers(min_value=0),
    "embedding.w_feat": Numbers(min_value=0),
    "embedding.basic_blend": Numbers(min_value=0),
    "embedding.advanced_blend": Numbers(min_value=0),
    "embedding.circles_blend": Numbers(min_value=0),
    "embedding.prior_carry": Numbers(0, 1),
    "recall.caps": Ints(min_value=1),
    "recall.seed_neighbors": Ints(min_value=0),
    "propagation.alpha": Numbers(0, 0.999999),
    "propagation.iterations": Ints(min_value=0),
    "ranking.w_rel": Numbers(min_value=0),
    "ranking.w_social": Numbers(min_value=0),
    "ranking.w_explore": Numbers(min_value=0),
    "ranking.exposure_threshold": Numbers(min_value=0),
    "ranking.exposure_percentile": Numbers(0, 100),
    "ranking.quality_percentile": Numbers(0, 100),
    "rerank.enabled": Bool(),
    "rerank.pool_size": Ints(min_value=1),
    "exploration.adaptive": Bool(),
    "exploration.decay": Numbers(0, 1),
    "exploration.recovery": Numbers(min_value=1),
    "clicks.model": Enum("deterministic", "bernoulli"),
    "clicks.threshold": Ints(0, 3),
    "clicks.probabilities": Numbers(0, 1),
    "metrics.relevance_mode": Enum("graded", "binary"),
    "experiment.conditions": Enum(*(c.value for c in Condition)),
    "experiment.ks": Ints(min_value=1),
    "experiment.top_n": Ints(min_value=1),
    "experiment.workers": Ints(min_value=1),
    "experiment.progress": Bool(),
}


def _validate_field(path: str, value: Any) -> None:
    validator = _FIELD_VALIDATORS.get(path)
    if validator is None or value is None:
        return
    if isinstance(value, dict):
        values = list(value.values())
    elif isinstance(value, (tuple, list)):
        values = list(value)
    else:
        values = [value]
    for element in values:
        validator.validate(element, context=path)


@register_record("scenario")
@dataclass(frozen=True)
class ScenarioConfig:
    world: WorldConfig = WorldConfig()
    categories: dict[Category, CategoryProfile] = field(default_factory=_default_categories)
    embedding: EmbeddingConfig = EmbeddingConfig()
    recall: RecallConfig = RecallConfig()
    propagation: PropagationConfig = PropagationConfig()
    ranking: RankingWeights = RankingWeights()
    rerank: RerankConfig = RerankConfig()
    exploration: ExplorationConfig = ExplorationConfig()
    cold_start: ColdStartConfig = ColdStartConfig()
    clicks: ClickConfig = ClickConfig()
    metrics: MetricsConfig = MetricsConfig()
    experiment: ExperimentConfig = ExperimentConfig()

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        """Range-check every field, then the cross-field feasibility rules."""
        try:
            for section in SECTIONS:
                value = getattr(self, section)
                for f in dataclasses.fields(value):
                    _validate_field(f"{section}.{f.name}", getattr(value, f.name))
            for category, profile in self.categories.items():
                for f in dataclasses.fields(profile):
                    path = f"categories.{f.name}"
                    value = getattr(profile, f.name)
                    if path in _FIELD_VALIDATORS:
                        _FIELD_VALIDATORS[path].validate(
                            value, context=f"categories.{category.value}.{f.name}"
                        )
        except (TypeError, ValueError) as err:
            raise ScenarioConfigError(str(err)) from err
        self._check_shapes()
        self._check_feasible()

    def _check_shapes(self) -> None:
        w = self.world
        for kind in w.account_kinds:
            if kind not in {k.value for k in AccountKind}:
                raise ScenarioConfigError(f"world.account_kinds: unknown kind {kind!r}")
        if sum(w.account_kinds.values()) <= 0:
            raise ScenarioConfigError("world.account_kinds: weights sum to zero")
        if not 5 <= len(w.occupations) <= 10:
            raise ScenarioConfigError(
                f"world.occupations: expected 5 to 10 classes, got {len(w.occupations)}"
            )
        if len(set(w.occupations)) != len(w.occupations):
            raise ScenarioConfigError("world.occupations: duplicate class")
        if not w.regions or not w.genders:
            raise ScenarioConfigError("world.regions and world.genders must be nonempty")
        for name in ("age_range", "income_range", "mainstream_range"):
            lo, hi = getattr(w, name)
            if lo > hi:
                raise ScenarioConfigError(f"world.{name}: lower bound above upper bound")
        t = w.relevance_thresholds
        if not t[0] < t[1] < t[2]:
            raise ScenarioConfigError("world.relevance_thresholds must be increasing")
        for source in self.recall.caps:
            if source not in {s.value for s in Source}:
                raise ScenarioConfigError(f"recall.caps: unknown source {source!r}")
        if set(self.clicks.probabilities) != {0, 1, 2, 3}:
            raise ScenarioConfigError("clicks.probabilities needs grades 0, 1, 2 and 3")
        if not self.experiment.conditions:
            raise ScenarioConfigError("experiment.conditions is empty")
        if not self.experiment.ks:
            raise ScenarioConfigError("experiment.ks is empty")
        if self.cold_start.priors is not None:
            try:
                DemographicPrior(self.cold_start.priors)
            except ValueError as err:
                raise ScenarioConfigError(f"cold_start.priors: {err}") from err

    def _check_feasible(self) -> None:
        w = self.world
        if w.followed_count > w.accounts:
            raise InfeasibleScenarioError(
                f"world.followed_count ({w.followed_count}) exceeds "
                f"world.accounts ({w.accounts})"
            )
        if w.account_follows >= w.accounts:
            raise InfeasibleScenarioError(
                f"world.account_follows ({w.account_follows}) needs more than "
                f"{w.account_follows} accounts"
            )
        if w.user_topics > w.topics:
            raise InfeasibleScenarioError(
                f"world.user_topics ({w.user_topics}) exceeds world.topics ({w.topics})"
            )
        if w.topics < 2:
            raise InfeasibleScenarioError("world.topics must allow a declared-tag swap (>= 2)")
        total = sum(p.items for p in self.categories.values())
        if w.history_sessions and w.session_size > total:
            raise InfeasibleScenarioError(
                f"world.session_size ({w.session_size}) exceeds the corpus ({total} items)"
            )
        if max(self.experiment.ks) > self.experiment.top_n:
            raise InfeasibleScenarioError(
                f"experiment.ks reach {max(self.experiment.ks)} but "
                f"experiment.top_n is {self.experiment.top_n}"
            )

    @property
    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            embedding=self.embedding,
            recall=self.recall,
            propagation=self.propagation,
            ranking=self.ranking,
            rerank=self.rerank,
            exploration=self.exploration,
        )

    @property
    def conditions(self) -> tuple[Condition, ...]:
        return tuple(Condition.parse(c) for c in self.experiment.conditions)

    def to_dict(self) -> dict[str, Any]:
        record = to_record(self)
        record.pop("record")
        return record

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, data: Optional[dict[str, Any]]) -> "ScenarioConfig":
        data = dict(data or {})
        unknown = set(data) - set(SECTIONS) - {"categories"}
        if unknown:
            raise ScenarioConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
        sections: dict[str, Any] = {}
        for name, section_cls in SECTIONS.items():
            sections[name] = _build_section(section_cls, data.get(name), name)
        sections["categories"] = _build_categories(data.get("categories"))
        try:
            return cls(**sections)
        except ScenarioConfigError:
            raise
        except (TypeError, ValueError) as err:
            raise ScenarioConfigError(str(err)) from err

    @classmethod
    def load(cls, ref: Union[str, Path, None] = None) -> "ScenarioConfig":
        """Load from a file path or a `package:resource` reference."""
        text = read_scenario_text(ref or DEFAULT_SCENARIO)
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as err:
            raise ScenarioConfigError(f"{ref}: invalid YAML: {err}") from err
        if data is not None and not isinstance(data, dict):
            raise ScenarioConfigError(f"{ref}: top level must be a mapping")
        cfg = cls.from_dict(data)
        log.info("Loaded scenario %s (config %s)", ref or DEFAULT_SCENARIO, cfg.digest()[:12])
        return cfg

    def with_override(self, path: str, value: Any) -> "ScenarioConfig":
        """Copy with one field replaced, e.g. `with_override("ranking.w_explore", 0.3)`."""
        data = self.to_dict()
        keys = path.split(".")
        node: Any = data
        for key in keys[:-1]:
            if not isinstance(node, dict) or key not in node:
                raise ScenarioConfigError(f"unknown field {path}")
            node = node[key]
        if not isinstance(node, dict) or keys[-1] not in node:
            raise ScenarioConfigError(f"unknown field {path}")
        node[keys[-1]] = value
        return ScenarioConfig.from_dict(data)

    def numeric_field(self, path: str) -> float:
        node: Any = self.to_dict()
        for key in path.split("."):
            if not isinstance(node, dict) or key not in node:
                raise ScenarioConfigError(f"unknown field {path}")
            node = node[key]
        if isinstance(node, bool) or not isinstance(node, (int, float)):
            raise ScenarioConfigError(f"{path} is not a numeric field")
        return float(node)


def _build_section(section_cls: type, data: Any, name: str) -> Any:
    if data is None:
        return section_cls()
    if not isinstance(data, dict):
        raise ScenarioConfigError(f"section {name} must be a mapping")
    known = {f.name for f in dataclasses.fields(section_cls)}
    for key in data:
        if key not in known:
            raise ScenarioConfigError(f"unknown field {name}.{key}")
    try:
        for key, value in data.items():
            _validate_field(f"{name}.{key}", value)
        return build_dataclass(section_cls, data)
    except (TypeError, ValueError) as err:
        raise ScenarioConfigError(f"{name}: {err}") from err


def _build_categories(data: Any) -> dict[Category, CategoryProfile]:
    categories = _default_categories()
    if data is None:
        return categories
    if not isinstance(data, dict):
        raise ScenarioConfigError("section categories must be a mapping")
    for label, overrides in data.items():
        try:
            category = Category(label)
        except ValueError as err:
            raise ScenarioConfigError(f"unknown category categories.{label}") from err
        fields_ = dataclasses.asdict(categories[category])
        for key, value in (overrides or {}).items():
            if key not in fields_:
                raise ScenarioConfigError(f"unknown field categories.{label}.{key}")
            fields_[key] = value
        categories[category] = build_dataclass(CategoryProfile, fields_)
    return categories


def read_scenario_text(ref: Union[str, Path]) -> str:
    path = Path(ref)
    if path.exists():
        return path.read_text(encoding="utf-8")
    text = str(ref)
    if ":" in text:
        package, _, resource = text.partition(":")
        try:
            return (importlib.resources.files(package) / resource).read_text(encoding="utf-8")
        except (ModuleNotFoundError, FileNotFoundError) as err:
            raise ScenarioConfigError(f"cannot read scenario resource {text}") from err
    raise ScenarioConfigError(f"scenario file {text} not found")


def scenario_from(
    ref: Union[str, Path, None],
    seed: Optional[int] = None,
    overrides: Optional[dict[str, Any]] = None,
) -> ScenarioConfig:
    """Load a scenario and apply the CLI overrides in a fixed order."""
    cfg = ScenarioConfig.load(ref)
    if seed is not None:
        cfg = cfg.with_override("world.seed", seed)
    for path, value in sorted((overrides or {}).items()):
        cfg = cfg.with_override(path, value)
    return cfg
