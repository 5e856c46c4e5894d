"""Schedule representation, validity checking, chunking and per-block metrics.

All times are integer gas units; only speedup and utilization are floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .conflict import ConflictGraph
from .trace import BlockTrace, Violation


class SchedulerBugError(RuntimeError):
    """A scheduler produced something no valid schedule can have."""


class Entry(NamedTuple):
    thread: int
    start: int
    finish: int


@dataclass(frozen=True)
class Schedule:
    threads: int
    entries: Tuple[Entry, ...]

    @property
    def makespan(self) -> int:
        return max((e.finish for e in self.entries), default=0)

    def gantt_rows(self) -> List[dict]:
        return [
            {"tx": i, "thread": e.thread, "start": e.start, "finish": e.finish}
            for i, e in enumerate(self.entries)
        ]

    def dump(self) -> str:
        return "\n".join(json.dumps(r, separators=(",", ":")) for r in self.gantt_rows())


@dataclass(frozen=True)
class ScheduleMetrics:
    makespan: int
    speedup: float
    utilization: float


def sequential_schedule(block: BlockTrace) -> Schedule:
    t = 0
    entries = []
    for g in block.gas:
        entries.append(Entry(0, t, t + g))
        t += g
    return Schedule(1, tuple(entries))


def check_valid(schedule: Schedule, block: BlockTrace, graph: ConflictGraph) -> List[Violation]:
    """List every way ``schedule`` fails to be a safe, non-preemptive schedule of ``block``.

    Conflicting transactions must not overlap and must run in consensus order.
    Violations name block positions, not trace indices.
    """
    n = len(block)
    if len(schedule.entries) != n:
        return [Violation(None, f"schedule covers {len(schedule.entries)} transactions, block has {n}")]

    out = []
    gas = block.gas
    by_thread: Dict[int, List[Tuple[int, int, int]]] = {}
    for i, e in enumerate(schedule.entries):
        if not 0 <= e.thread < schedule.threads:
            out.append(Violation(i, f"thread {e.thread} out of range"))
        if e.start < 0:
            out.append(Violation(i, "negative start"))
        if e.finish - e.start != gas[i]:
            out.append(Violation(i, f"duration {e.finish - e.start} != gas_used {gas[i]}"))
        by_thread.setdefault(e.thread, []).append((e.start, e.finish, i))

    for t, intervals in sorted(by_thread.items()):
        intervals.sort()
        for (s0, f0, i0), (s1, f1, i1) in zip(intervals, intervals[1:]):
            if s1 < f0:
                out.append(Violation(None, f"thread overlap ({min(i0, i1)},{max(i0, i1)}) on thread {t}"))

    entries = schedule.entries
    for i, j in sorted(graph.iter_edges()):
        ei, ej = entries[i], entries[j]
        if ej.start >= ei.finish:
            continue
        if ei.start >= ej.finish:
            out.append(Violation(None, f"consensus order inversion ({i},{j})"))
        else:
            out.append(Violation(None, f"conflict overlap ({i},{j})"))
    return out


def chunk(block: BlockTrace, cap: Optional[int]) -> List[BlockTrace]:
    """Split into consecutive consensus-order slices of at most ``cap`` transactions."""
    if cap is None:
        return [block]
    if cap < 1:
        raise ValueError("cap must be >= 1")
    txs = block.transactions
    if not txs:
        return [block]
    return [BlockTrace(block.block_number, txs[k:k + cap]) for k in range(0, len(txs), cap)]


def combine_chunked(makespans: Sequence[int]) -> int:
    # chunks run back to back
    if not makespans:
        raise ValueError("no chunk makespans to combine")
    return sum(makespans)


def metrics(schedule_makespan: int, block: BlockTrace, threads: int) -> ScheduleMetrics:
    total = block.total_gas
    if total == 0:
        raise ValueError("metrics undefined for an empty block")
    if schedule_makespan < block.max_gas:
        raise SchedulerBugError(
            f"makespan {schedule_makespan} below the longest transaction ({block.max_gas})"
        )
    speedup = total / schedule_makespan
    return ScheduleMetrics(schedule_makespan, speedup, total / (threads * schedule_makespan))
