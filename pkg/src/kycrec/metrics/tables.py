"""
Category x condition metric tables.

Cells are means over users. A condition without run data shows up as a gap
(NaN in memory, `--` on disk and in text).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..core.profiles import profile_at_tier
from ..core.types import Category, InteractionKind, RankedList
from ..pipeline.recommender import Condition, UnknownConditionError
from ..pipeline.rerank import seed_interest
from ..sim.runner import ConditionRun
from ..sim.world import World
from .ranking_metrics import clicked_pairs, clicked_within, ndcg_at_k, serendipity_of

log = logging.getLogger(__name__)

GAP = "--"
FLOAT_FORMAT = "%.6f"
METRICS = ("ndcg", "ctr", "serendipity")
METRIC_TITLES = {"ndcg": "nDCG", "ctr": "CTR", "serendipity": "Serendipity"}
ROWS = [c.value for c in Category]
BOUND_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MetricTable:
    """
    Args:
        metric: one of `METRICS`
        k: cutoff
        frame: index = category labels, columns = condition labels
    """

    metric: str
    k: int
    frame: pd.DataFrame

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        values = self.frame.to_numpy(dtype=np.float64)
        present = values[~np.isnan(values)]
        if present.size and (
            present.min() < -BOUND_TOLERANCE or present.max() > 1 + BOUND_TOLERANCE
        ):
            raise ValueError(f"{self.name} has a cell outside [0, 1]")

    @property
    def name(self) -> str:
        return f"{self.metric}@{self.k}"

    @property
    def title(self) -> str:
        return f"{METRIC_TITLES[self.metric]}@{self.k} by category and condition"

    def cell(self, category: Union[Category, str], condition: Union[Condition, str]) -> float:
        row = category.value if isinstance(category, Category) else category
        col = condition.value if isinstance(condition, Condition) else condition
        return float(self.frame.loc[row, col])

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.frame.to_csv(
            path, float_format=FLOAT_FORMAT, na_rep=GAP, index_label="category", lineterminator="\n"
        )
        return path

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "MetricTable":
        path = Path(path)
        metric, sep, k = path.stem.partition("@")
        if not sep or not k.isdigit():
            raise ValueError(f"{path.name} is not named <metric>@<k>.csv")
        frame = pd.read_csv(path, index_col="category", na_values=[GAP], keep_default_na=False)
        frame = frame.astype(np.float64)
        if list(frame.index) != ROWS:
            raise ValueError(f"{path.name}: rows {list(frame.index)} are not {ROWS}")
        return cls(metric, int(k), frame)

    def render(self) -> str:
        """Aligned text in table layout, three decimals."""
        shown = self.frame.rename(columns=_display)
        shown = shown.apply(lambda col: col.map(lambda v: GAP if math.isnan(v) else f"{v:.3f}"))
        shown.index.name = "Category"
        return f"{self.title}\n{shown.to_string(justify='right')}\n"


def _display(column: str) -> str:
    try:
        return Condition.parse(column).display
    except UnknownConditionError:
        return column


def history_labels(world: World) -> dict[str, frozenset[str]]:
    """
    Per user, the interest profile of the background log: the categories of
    clicked items plus the declared tags those items carry.
    """
    corpus = world.observed.corpus
    declared = {p.user_id: p.declared_tags for p in world.observed.profiles}
    labels: dict[str, set[str]] = {}
    for event in world.observed.history:
        if event.kind is not InteractionKind.CLICK or event.item_id not in corpus:
            continue
        item = corpus[event.item_id]
        found = labels.setdefault(event.user_id, set())
        found.add(item.category.value)
        found.update(tag for tag in item.tags if tag in declared.get(event.user_id, ()))
    return {user: frozenset(items) for user, items in labels.items()}


def slate_interests(world: World, condition: Condition, ranked: RankedList) -> dict[str, str]:
    """
    Seed interest of each emitted item. Lists that skipped re-ranking were
    never grouped by declared tag, so every item falls back to its category.
    """
    corpus = world.observed.corpus
    tags: frozenset[str] = frozenset()
    if ranked.reranked:
        full = world.observed.profile(ranked.user_id)
        tags = profile_at_tier(full, condition.tier).declared_tags
    return {i: seed_interest(corpus[i], tags) for i in ranked.item_ids}


def slate_metrics(
    runs: Mapping[Condition, ConditionRun],
    world: World,
    ks: Sequence[int],
    relevance_mode: str = "graded",
) -> pd.DataFrame:
    """Long frame: one row per (condition, category, user, metric, k)."""
    if relevance_mode not in ("graded", "binary"):
        raise ValueError(f"unknown relevance mode {relevance_mode!r}")
    threshold = world.config.clicks.threshold
    histories = history_labels(world)

    rows = []
    for condition, run in runs.items():
        clicks = clicked_pairs(run.interactions)
        for slate in run.slates:
            ranked = slate.ranked
            pool = world.grades(slate.user_id, slate.candidates.item_ids)
            graded = dict(zip(ranked.item_ids, world.grades(slate.user_id, ranked.item_ids)))
            interests = slate_interests(world, condition, ranked)
            if relevance_mode == "graded":
                ranked_grades = [int(graded[i]) for i in ranked.item_ids]
            else:
                ranked_grades = [int((slate.user_id, i) in clicks) for i in ranked.item_ids]
                pool = (pool >= threshold).astype(np.int64)
            history = histories.get(slate.user_id, frozenset())
            for k in ks:
                values = {
                    "ndcg": ndcg_at_k(ranked_grades, pool.tolist(), k),
                    "ctr": float(clicked_within(clicks, ranked, k)),
                    "serendipity": serendipity_of(
                        ranked, history, lambda _, i: graded[i], interests.__getitem__, k
                    ),
                }
                for metric, value in values.items():
                    rows.append(
                        (condition.value, slate.category.value, slate.user_id, metric, k, value)
                    )
    frame = pd.DataFrame(
        rows, columns=["condition", "category", "user_id", "metric", "k", "value"]
    )
    return frame.sort_values(
        ["condition", "category", "user_id", "metric", "k"], kind="stable"
    ).reset_index(drop=True)


def build_tables(
    runs: Mapping[Condition, ConditionRun],
    world: World,
    conditions: Optional[Iterable[Union[Condition, str]]] = None,
    ks: Sequence[int] = (1, 3, 5),
    relevance_mode: Optional[str] = None,
) -> dict[str, MetricTable]:
    """
    One table per (metric, k). Requested conditions without a run become
    gap columns.
    """
    columns = [
        (c if isinstance(c, Condition) else Condition.parse(c)).value
        for c in (conditions if conditions is not None else list(Condition))
    ]
    mode = relevance_mode or world.config.metrics.relevance_mode
    long = slate_metrics(runs, world, ks, mode)
    missing = [c for c in columns if Condition(c) not in runs]
    if missing:
        log.warning("No run data for %s; rendering gaps", ", ".join(missing))

    tables: dict[str, MetricTable] = {}
    for metric in METRICS:
        for k in ks:
            frame = pd.DataFrame(np.nan, index=ROWS, columns=columns, dtype=np.float64)
            sub = long[(long["metric"] == metric) & (long["k"] == k)]
            if not sub.empty:
                block = sub.groupby(["category", "condition"])["value"].mean().unstack("condition")
                for column in columns:
                    if column in block.columns:
                        frame[column] = block[column].reindex(ROWS)
            frame.index.name = "category"
            table = MetricTable(metric, k, frame)
            tables[table.name] = table
    return tables


def plot_data(tables: Mapping[str, MetricTable]) -> pd.DataFrame:
    """Long frame (category, condition, metric, k, value) for grouped bar charts."""
    parts = []
    for table in tables.values():
        part = table.frame.reset_index().melt(
            id_vars="category", var_name="condition", value_name="value"
        )
        part.insert(2, "metric", table.metric)
        part.insert(3, "k", table.k)
        parts.append(part)
    if not parts:
        return pd.DataFrame(columns=["category", "condition", "metric", "k", "value"])
    return pd.concat(parts, ignore_index=True)


def write_tables(
    tables: Mapping[str, MetricTable], out_dir: Union[str, Path], text: bool = False
) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in tables.items():
        written.append(table.to_csv(out / f"{name}.csv"))
        if text:
            path = out / f"{name}.txt"
            path.write_text(table.render(), encoding="utf-8")
            written.append(path)
    plot_path = out / "plot_data.csv"
    plot_data(tables).to_csv(
        plot_path, index=False, float_format=FLOAT_FORMAT, na_rep=GAP, lineterminator="\n"
    )
    written.append(plot_path)
    log.info("Wrote %d table files to %s", len(written), out)
    return written


def read_tables(run_dir: Union[str, Path]) -> dict[str, MetricTable]:
    tables = {}
    for path in sorted(Path(run_dir).glob("*@*.csv")):
        table = MetricTable.read_csv(path)
        tables[table.name] = table
    return tables
