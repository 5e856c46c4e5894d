"""HEFT list scheduling on identical threads with zero communication cost.

Precedence comes from consensus order plus conflicts: i -> j whenever i < j
and the two transactions share an account. Task weight is gas_used. With
identical threads and no communication cost, HEFT's mean-cost terms collapse
to the plain weights, so the upward rank is just the heaviest path to a sink.

Tasks are placed in descending rank (ties: lower index first) onto the thread
with the earliest finish time, using insertion into idle gaps (ties: lowest
thread id). Weights are >= 1, so ranks strictly decrease along every edge and
the rank order is a topological order.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import List, Optional, Set, Tuple

from .conflict import ConflictGraph
from .schedule import Entry, Schedule
from .trace import BlockTrace


@dataclass(frozen=True)
class PrecedenceDag:
    n: int
    weights: Tuple[int, ...]
    successors: Tuple[Tuple[int, ...], ...]

    @property
    def edges(self) -> Set[Tuple[int, int]]:
        return {(i, j) for i, succ in enumerate(self.successors) for j in succ}

    @property
    def predecessors(self) -> Tuple[Tuple[int, ...], ...]:
        preds: List[List[int]] = [[] for _ in range(self.n)]
        for i, succ in enumerate(self.successors):
            for j in succ:
                preds[j].append(i)
        return tuple(tuple(p) for p in preds)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    @classmethod
    def from_edges(cls, weights, edges) -> "PrecedenceDag":
        weights = tuple(int(w) for w in weights)
        n = len(weights)
        succ: List[Set[int]] = [set() for _ in range(n)]
        for i, j in edges:
            if not 0 <= i < j < n:
                raise ValueError(f"edge ({i},{j}) must point forward within 0..{n - 1}")
            succ[i].add(j)
        if any(w < 1 for w in weights):
            raise ValueError("task weights must be >= 1")
        return cls(n, weights, tuple(tuple(sorted(s)) for s in succ))


def transitive_reduction(dag: PrecedenceDag) -> PrecedenceDag:
    """Drop every edge implied by a longer path. Reachability is kept as int bitsets."""
    reach = [0] * dag.n
    reduced: List[Tuple[int, ...]] = [()] * dag.n
    for i in range(dag.n - 1, -1, -1):
        covered = 0
        keep = []
        # any path i -> k -> ... -> j has k < j, so ascending order sees k first
        for j in dag.successors[i]:
            if covered >> j & 1:
                continue
            keep.append(j)
            covered |= reach[j] | (1 << j)
        reach[i] = covered
        reduced[i] = tuple(keep)
    return PrecedenceDag(dag.n, dag.weights, tuple(reduced))


def build_dag(block: BlockTrace, graph: ConflictGraph, reduce: bool = True) -> PrecedenceDag:
    succ: List[Set[int]] = [set() for _ in range(graph.n)]
    for positions in graph.touchers.values():
        for a, i in enumerate(positions):
            if reduce:
                # later touchers of the same account are reached through the next one
                if a + 1 < len(positions):
                    succ[i].add(positions[a + 1])
            else:
                succ[i].update(positions[a + 1:])
    dag = PrecedenceDag(graph.n, tuple(block.gas), tuple(tuple(sorted(s)) for s in succ))
    return transitive_reduction(dag) if reduce else dag


def upward_rank(dag: PrecedenceDag) -> List[int]:
    rank = [0] * dag.n
    for i in range(dag.n - 1, -1, -1):
        rank[i] = dag.weights[i] + max((rank[j] for j in dag.successors[i]), default=0)
    return rank


def critical_path(dag: PrecedenceDag) -> int:
    return max(upward_rank(dag), default=0)


def _earliest_start(timeline: List[Tuple[int, int]], ready: int, weight: int) -> int:
    t = ready
    for s, f in timeline:
        if f <= t:
            continue
        if t + weight <= s:
            return t
        t = max(t, f)
    return t


def heft_order(dag: PrecedenceDag, rank: Optional[List[int]] = None) -> List[int]:
    if rank is None:
        rank = upward_rank(dag)
    return sorted(range(dag.n), key=lambda i: (-rank[i], i))


def heft_schedule(dag: PrecedenceDag, threads: int) -> Schedule:
    if threads < 1:
        raise ValueError("threads must be >= 1")
    preds = dag.predecessors
    timelines: List[List[Tuple[int, int]]] = [[] for _ in range(threads)]
    entries: List[Optional[Entry]] = [None] * dag.n

    for task in heft_order(dag):
        w = dag.weights[task]
        ready = 0
        for p in preds[task]:
            e = entries[p]
            if e is None:
                raise AssertionError(f"task {task} ranked ahead of its predecessor {p}")
            ready = max(ready, e.finish)

        best_thread, best_start = 0, None
        for t, timeline in enumerate(timelines):
            if not timeline or timeline[-1][1] <= ready:
                start = ready
            else:
                start = _earliest_start(timeline, ready, w)
            if best_start is None or start < best_start:
                best_thread, best_start = t, start
                if start == ready:
                    break  # nothing can start earlier than ready
        bisect.insort(timelines[best_thread], (best_start, best_start + w))
        entries[task] = Entry(best_thread, best_start, best_start + w)

    return Schedule(threads, tuple(entries))
