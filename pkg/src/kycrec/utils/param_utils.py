import logging
from dataclasses import replace
from typing import Iterator, Union

import numpy as np
import pandas as pd

from ..core.types import Category
from ..metrics.tables import build_tables
from ..pipeline.recommender import Condition
from ..sim.runner import run_condition
from ..sim.scenario import ScenarioConfig
from ..sim.world import World, generate_world

log = logging.getLogger(__name__)

# changing these sections changes the world itself, not just the pipeline
WORLD_SECTIONS = ("world.", "categories.")


def paramp(start: float, final: float = 0.0, steps: int = 40) -> np.ndarray:
    """
    Evenly spaced values from `start` to `final`, both ends included.

    Args:
        start (float): value at the first step
        final (float): value at the last step
        steps (int): number of points, at least 2
    """
    if steps < 2:
        raise ValueError("steps must be at least 2")
    return np.linspace(start, final, steps)


def ramp_config(
    cfg: ScenarioConfig, path: str, final: float, steps: int = 5
) -> Iterator[tuple[float, ScenarioConfig]]:
    """
    Yield (value, config) pairs ramping the numeric field `path` from its
    configured value to `final`.
    """
    start = cfg.numeric_field(path)
    is_int = isinstance(_lookup(cfg, path), int)
    for point in paramp(start, final, steps):
        value: Union[int, float] = int(round(point)) if is_int else float(point)
        yield value, cfg.with_override(path, value)


def _lookup(cfg: ScenarioConfig, path: str):
    node = cfg.to_dict()
    for key in path.split("."):
        node = node[key]
    return node


def sweep(
    world: World,
    condition: Union[Condition, str],
    path: str,
    final: float,
    steps: int = 5,
) -> pd.DataFrame:
    """
    Rerun one condition while ramping a config parameter.

    Returns:
        One row per (step, category): the parameter value, nDCG and
        serendipity at the largest k, and the run's exploration share.
    """
    condition = condition if isinstance(condition, Condition) else Condition.parse(condition)
    k = max(world.config.experiment.ks)
    rows = []
    for step, (value, cfg) in enumerate(ramp_config(world.config, path, final, steps)):
        if path.startswith(WORLD_SECTIONS):
            stepped = generate_world(cfg)
        else:
            stepped = replace(world, config=cfg)
        run = run_condition(stepped, condition)
        tables = build_tables({condition: run}, stepped, [condition], [k])
        share = run.exploration_share()
        log.info("Sweep step %d: %s=%s", step, path, value)
        for category in Category:
            rows.append(
                {
                    "step": step,
                    "value": value,
                    "category": category.value,
                    f"ndcg@{k}": tables[f"ndcg@{k}"].cell(category, condition),
                    f"serendipity@{k}": tables[f"serendipity@{k}"].cell(category, condition),
                    "exploration_share": share,
                }
            )
    return pd.DataFrame(rows)
