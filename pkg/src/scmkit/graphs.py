"""Causal graphs and random DAG generation.

A causal graph separates endogenous nodes (variables with structural
equations) from exogenous nodes (independent noise sources).  Edges out of
exogenous nodes point only at endogenous nodes; an exogenous node with two
or more children acts as a hidden confounder of those children.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable

from .distributions import RngState

__all__ = [
    "CycleError",
    "ExhaustedRetriesError",
    "CausalGraph",
    "GraphGenConfig",
    "topological_order",
    "generate_graph",
    "generate_unique_graph_set",
    "is_confounded",
]


class CycleError(Exception):
    """The directed graph induced by the equations contains a cycle."""

    def __init__(self, cycle: Iterable[str]):
        self.cycle = tuple(cycle)
        path = " -> ".join(self.cycle + self.cycle[:1])
        super().__init__(f"cycle detected: {path}")


class ExhaustedRetriesError(Exception):
    """Too many consecutive duplicates while collecting unique graphs."""


@dataclass(frozen=True)
class CausalGraph:
    """Directed acyclic graph over named endogenous and exogenous nodes."""

    endo_nodes: tuple[str, ...]
    exo_nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self):
        object.__setattr__(self, "endo_nodes", tuple(self.endo_nodes))
        object.__setattr__(self, "exo_nodes", tuple(self.exo_nodes))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))

    def nodes(self) -> tuple[str, ...]:
        return self.endo_nodes + self.exo_nodes

    def parents(self, name: str) -> list[str]:
        return sorted(src for src, dst in self.edges if dst == name)

    def children(self, name: str) -> list[str]:
        return sorted(dst for src, dst in self.edges if src == name)

    def topological_order(self) -> list[str]:
        return topological_order(self.nodes(), self.edges)

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except CycleError:
            return False
        return True


def topological_order(nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> list[str]:
    """Topologically sort, breaking ties lexicographically.

    Nodes appearing only as edge endpoints are included.  Raises CycleError
    naming the offending cycle when no ordering exists.
    """
    edges = list(edges)
    order_in = dict.fromkeys(nodes)
    for src, dst in edges:
        order_in.setdefault(src)
        order_in.setdefault(dst)
    indegree = {n: 0 for n in order_in}
    successors: dict[str, list[str]] = {n: [] for n in order_in}
    for src, dst in edges:
        indegree[dst] += 1
        successors[src].append(dst)
    ready = [n for n, d in indegree.items() if d == 0]
    heapq.heapify(ready)
    result: list[str] = []
    while ready:
        node = heapq.heappop(ready)
        result.append(node)
        for succ in successors[node]:
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heapq.heappush(ready, succ)
    if len(result) < len(indegree):
        remaining = {n for n, d in indegree.items() if d > 0}
        raise CycleError(_find_cycle(remaining, successors))
    return result


def _find_cycle(nodes: set[str], successors: dict[str, list[str]]) -> list[str]:
    # every node here has positive indegree within `nodes`, so a walk must loop
    start = min(nodes)
    path = [start]
    seen = {start: 0}
    while True:
        node = path[-1]
        nxt = min(s for s in successors[node] if s in nodes)
        if nxt in seen:
            return path[seen[nxt]:]
        seen[nxt] = len(path)
        path.append(nxt)


@dataclass(frozen=True)
class GraphGenConfig:
    """Knobs for random graph generation.

    ``edge_prob`` is the probability of each forward edge between
    endogenous nodes.  With ``allow_exo_confounders`` unset every exogenous
    node gets exactly one child; otherwise each endogenous node becomes a
    child with probability ``confounder_child_prob``, resampled until the
    exogenous node has at least one child.
    """

    n_endo: int
    n_exo: int = 0
    allow_exo_confounders: bool = False
    edge_prob: float = 0.5
    confounder_child_prob: float = 0.5

    def __post_init__(self):
        if self.n_endo < 1:
            raise ValueError(f"n_endo must be >= 1, got {self.n_endo}")
        if self.n_exo < 0:
            raise ValueError(f"n_exo must be >= 0, got {self.n_exo}")
        if not 0.0 <= self.edge_prob <= 1.0:
            raise ValueError(f"edge_prob must be in [0, 1], got {self.edge_prob}")
        if not 0.0 <= self.confounder_child_prob <= 1.0:
            raise ValueError(
                f"confounder_child_prob must be in [0, 1], got {self.confounder_child_prob}"
            )
        if self.allow_exo_confounders and self.n_exo > 0 and self.confounder_child_prob == 0.0:
            raise ValueError("confounder_child_prob == 0 can never produce a child")


def generate_graph(config: GraphGenConfig, rng: RngState) -> CausalGraph:
    """Sample one random DAG.

    Endogenous nodes are named X0..X{n-1}, exogenous nodes U0..U{m-1}.  A
    uniformly random order of the endogenous nodes is drawn and each forward
    pair is connected independently with probability ``edge_prob``, which
    guarantees acyclicity by construction.  Every exogenous node ends up
    with at least one endogenous child.
    """
    endo = [f"X{i}" for i in range(config.n_endo)]
    exo = [f"U{j}" for j in range(config.n_exo)]
    order = endo[:]
    rng.shuffle(order)
    edges: set[tuple[str, str]] = set()
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if rng.random() < config.edge_prob:
                edges.add((order[i], order[j]))
    for u in exo:
        if config.allow_exo_confounders:
            while True:
                children = [x for x in endo if rng.random() < config.confounder_child_prob]
                if children:
                    break
        else:
            children = [endo[rng.randrange(config.n_endo)]]
        edges.update((u, x) for x in children)
    return CausalGraph(tuple(endo), tuple(exo), frozenset(edges))


def generate_unique_graph_set(
    config: GraphGenConfig,
    count: int,
    rng: RngState,
    max_retries: int | None = None,
) -> list[CausalGraph]:
    """Collect ``count`` graphs that are pairwise distinct by edge set.

    Duplicates are discarded and retried; ``max_retries`` consecutive
    duplicates (default 100 * count) raise ExhaustedRetriesError, which
    callers hit when asking for more distinct graphs than exist.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if max_retries is None:
        max_retries = 100 * count
    graphs: list[CausalGraph] = []
    seen: set[frozenset[tuple[str, str]]] = set()
    consecutive = 0
    while len(graphs) < count:
        g = generate_graph(config, rng)
        if g.edges in seen:
            consecutive += 1
            if consecutive >= max_retries:
                raise ExhaustedRetriesError(
                    f"gave up after {consecutive} consecutive duplicates "
                    f"with {len(graphs)} of {count} graphs collected"
                )
            continue
        consecutive = 0
        seen.add(g.edges)
        graphs.append(g)
    return graphs


def is_confounded(graph: CausalGraph) -> bool:
    """True when some exogenous node has two or more children."""
    return any(len(graph.children(u)) >= 2 for u in graph.exo_nodes)
