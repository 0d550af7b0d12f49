"""Damped interest propagation over the follow graph."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import networkx as nx
import numpy as np

from ..core.graph import SocialGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PropagationConfig:
    """
    Args:
        alpha: damping in [0, 1); 0 disables propagation
        iterations: number of synchronous rounds
    """

    alpha: float = 0.3
    iterations: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")


def _normalize_rows(mat: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    return mat / np.where(norms > 0, norms, 1.0)


def propagation_rounds(
    graph: SocialGraph, cfg: PropagationConfig
) -> tuple[np.ndarray, list[float]]:
    """
    Run the rounds and return the final vectors (rows in `graph.account_ids`
    order) together with the per-round deltas, each the largest L2 change
    of any single node.

    Rounds iterate the damped update u <- (1-a) v0 + a mean(followees) on
    unnormalized iterates, a contraction by a factor of a in the
    largest-node-change norm, so the deltas shrink geometrically for every
    a in [0, 1). Each vector is normalized once after the last round; one
    round therefore gives exactly normalize((1-a) v0 + a mean(followees)).
    Nodes without followees, and nodes whose iterate cancels to zero, keep
    their seed.
    """
    ids = list(graph.account_ids)
    seeds = graph.vector_matrix().reshape(len(ids), -1) if ids else np.zeros((0, 0))
    if not ids or cfg.alpha == 0.0 or cfg.iterations == 0:
        return seeds.copy(), [0.0] * cfg.iterations

    # row i averages the followees of node i
    adjacency = nx.to_numpy_array(graph.nx_graph, nodelist=ids, dtype=np.float64)
    out_degree = adjacency.sum(axis=1)
    has_followees = out_degree > 0
    mean_op = adjacency / np.where(has_followees, out_degree, 1.0)[:, None]

    current = seeds.copy()
    deltas: list[float] = []
    for _ in range(cfg.iterations):
        mixed = (1.0 - cfg.alpha) * seeds + cfg.alpha * (mean_op @ current)
        updated = np.where(has_followees[:, None], mixed, seeds)
        deltas.append(float(np.linalg.norm(updated - current, axis=1).max()))
        current = updated
    log.debug("Propagation deltas: %s", ", ".join(f"{d:.3g}" for d in deltas))

    keep = ~has_followees | (np.linalg.norm(current, axis=1) == 0.0)
    return np.where(keep[:, None], seeds, _normalize_rows(current)), deltas


def propagate(graph: SocialGraph, cfg: PropagationConfig) -> dict[str, np.ndarray]:
    """Updated interest vector per account id."""
    vectors, _ = propagation_rounds(graph, cfg)
    return {aid: vectors[i] for i, aid in enumerate(graph.account_ids)}


def propagated_graph(graph: SocialGraph, cfg: PropagationConfig) -> SocialGraph:
    if cfg.alpha == 0.0 or cfg.iterations == 0:
        return graph
    log.info(
        "Propagating interests over %d accounts (alpha=%s, rounds=%d)",
        len(graph),
        cfg.alpha,
        cfg.iterations,
    )
    return graph.with_vectors(propagate(graph, cfg))
