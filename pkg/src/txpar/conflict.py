"""Conflict graph over a block's transactions and the largest-cluster bound."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Set, Tuple

from .trace import BlockTrace


class EmptyBlockError(ValueError):
    pass


class DisjointSet:
    """Union-find over 0..n-1 with path compression. Roots are always the smallest member."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        parent = self.parent
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if rx < ry:
            self.parent[ry] = rx
        else:
            self.parent[rx] = ry


@dataclass(frozen=True)
class ConflictGraph:
    """Undirected conflict graph: vertices are block positions, an edge means a shared account.

    Edges are not stored; ``touchers`` maps every account to the positions that
    access it (ascending), from which ``edges`` and ``conflicts`` are derived.
    """

    n: int
    gas: Tuple[int, ...]
    access_lists: Tuple[frozenset, ...]
    component_of: Tuple[int, ...]
    component_gas: Dict[int, int]
    touchers: Dict[bytes, Tuple[int, ...]] = field(repr=False)

    def conflicts(self, i: int, j: int) -> bool:
        return i != j and not self.access_lists[i].isdisjoint(self.access_lists[j])

    def iter_edges(self) -> Iterator[Tuple[int, int]]:
        seen: Set[Tuple[int, int]] = set()
        for positions in self.touchers.values():
            for a in range(len(positions)):
                for b in range(a + 1, len(positions)):
                    e = (positions[a], positions[b])
                    if e not in seen:
                        seen.add(e)
                        yield e

    @property
    def edges(self) -> Set[Tuple[int, int]]:
        return set(self.iter_edges())

    @property
    def components(self) -> List[List[int]]:
        groups: Dict[int, List[int]] = {}
        for pos, cid in enumerate(self.component_of):
            groups.setdefault(cid, []).append(pos)
        return [groups[c] for c in sorted(groups)]

    @property
    def total_gas(self) -> int:
        return sum(self.gas)

    def dump_components(self) -> str:
        return json.dumps({"components": self.components}, separators=(",", ":"))


@dataclass(frozen=True)
class ClusterMetric:
    makespan: int
    speedup: float
    largest_component_size: int
    total_gas: int


def build_conflict_graph(block: BlockTrace) -> ConflictGraph:
    access_lists = tuple(block.access_lists)
    gas = tuple(block.gas)
    n = len(access_lists)

    dsu = DisjointSet(n)
    touchers: Dict[bytes, List[int]] = {}
    for pos, accounts in enumerate(access_lists):
        for a in accounts:
            prior = touchers.get(a)
            if prior is None:
                touchers[a] = [pos]
            else:
                dsu.union(prior[0], pos)
                prior.append(pos)

    component_of = tuple(dsu.find(i) for i in range(n))
    component_gas: Dict[int, int] = {}
    for pos, cid in enumerate(component_of):
        component_gas[cid] = component_gas.get(cid, 0) + gas[pos]

    return ConflictGraph(
        n=n,
        gas=gas,
        access_lists=access_lists,
        component_of=component_of,
        component_gas=component_gas,
        touchers={a: tuple(p) for a, p in touchers.items()},
    )


def largest_cluster_metric(graph: ConflictGraph) -> ClusterMetric:
    """Makespan with one thread per component, each component run sequentially."""
    if graph.n == 0:
        raise EmptyBlockError("largest-cluster metric is undefined for an empty block")
    makespan = max(graph.component_gas.values())
    # lowest component id among ties
    heaviest = min(c for c, g in graph.component_gas.items() if g == makespan)
    size = sum(1 for c in graph.component_of if c == heaviest)
    total = graph.total_gas
    return ClusterMetric(makespan, total / makespan, size, total)
