"""Heterogeneous follow graph over individual, creator and enterprise accounts."""

from __future__ import annotations

import logging
from typing import Iterable, Mapping

import networkx as nx
import numpy as np

from .types import Account, FollowEdge, as_tuple

log = logging.getLogger(__name__)


class SocialGraphError(ValueError):
    pass


class SocialGraph:
    """
    Directed follow graph (follower -> followee) backed by a frozen
    networkx DiGraph. Adjacency queries are O(degree).
    """

    def __init__(self, accounts: Iterable[Account], edges: Iterable[FollowEdge]) -> None:
        graph = nx.DiGraph()
        self._accounts: dict[str, Account] = {}
        for account in sorted(accounts, key=lambda a: a.account_id):
            if account.account_id in self._accounts:
                raise SocialGraphError(f"duplicate account {account.account_id}")
            self._accounts[account.account_id] = account
            graph.add_node(account.account_id, kind=account.kind.value)

        for edge in edges:
            if edge.follower == edge.followee:
                raise SocialGraphError(f"self-loop on {edge.follower}")
            for end in (edge.follower, edge.followee):
                if end not in self._accounts:
                    raise SocialGraphError(f"edge references unknown account {end}")
            graph.add_edge(edge.follower, edge.followee)

        self._graph = nx.freeze(graph)

    @property
    def nx_graph(self) -> nx.DiGraph:
        return self._graph

    @property
    def account_ids(self) -> tuple[str, ...]:
        return tuple(self._accounts)

    @property
    def accounts(self) -> tuple[Account, ...]:
        return tuple(self._accounts.values())

    @property
    def edges(self) -> tuple[FollowEdge, ...]:
        return tuple(FollowEdge(a, b) for a, b in sorted(self._graph.edges()))

    def __contains__(self, account_id: object) -> bool:
        return account_id in self._accounts

    def __len__(self) -> int:
        return len(self._accounts)

    def account(self, account_id: str) -> Account:
        return self._accounts[account_id]

    def followees(self, account_id: str) -> list[str]:
        if account_id not in self._graph:
            return []
        return sorted(self._graph.successors(account_id))

    def followers(self, account_id: str) -> list[str]:
        if account_id not in self._graph:
            return []
        return sorted(self._graph.predecessors(account_id))

    def vector_matrix(self) -> np.ndarray:
        """Interest vectors stacked in `account_ids` order."""
        return np.array(
            [account.interest_vector for account in self._accounts.values()],
            dtype=np.float64,
        )

    def with_vectors(self, vectors: Mapping[str, np.ndarray]) -> "SocialGraph":
        """New graph with the same edges and replaced interest vectors."""
        accounts = [
            Account(a.account_id, a.kind, as_tuple(vectors[a.account_id]))
            if a.account_id in vectors
            else a
            for a in self._accounts.values()
        ]
        return SocialGraph(accounts, self.edges)
