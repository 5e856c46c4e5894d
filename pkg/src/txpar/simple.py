"""Batch scheduler: conflict-free batches of at most ``threads`` transactions.

A batch is a barrier; it ends when its longest transaction ends.

Two batch-formation rules:

``prefix``
    Take transactions in consensus order; close the batch at the first one
    that conflicts with a batch member, or when it is full.
``scan``
    Keep scanning past conflicts. A later transaction may join if it conflicts
    neither with a batch member nor with any earlier transaction skipped in
    this pass (those must still run before it).
"""

from __future__ import annotations

from typing import List

from .conflict import ConflictGraph
from .schedule import Entry, Schedule
from .trace import BlockTrace

VARIANTS = ("prefix", "scan")


def _prefix_batches(graph: ConflictGraph, threads: int) -> List[List[int]]:
    batches: List[List[int]] = []
    batch: List[int] = []
    touched: set = set()
    for pos, accounts in enumerate(graph.access_lists):
        if batch and (len(batch) == threads or not touched.isdisjoint(accounts)):
            batches.append(batch)
            batch, touched = [], set()
        batch.append(pos)
        touched |= accounts
    if batch:
        batches.append(batch)
    return batches


def _scan_batches(graph: ConflictGraph, threads: int) -> List[List[int]]:
    remaining = list(range(graph.n))
    batches: List[List[int]] = []
    while remaining:
        batch: List[int] = []
        touched: set = set()
        skipped_touched: set = set()
        leftover: List[int] = []
        for k, pos in enumerate(remaining):
            if len(batch) == threads:
                leftover.extend(remaining[k:])
                break
            accounts = graph.access_lists[pos]
            if touched.isdisjoint(accounts) and skipped_touched.isdisjoint(accounts):
                batch.append(pos)
                touched |= accounts
            else:
                leftover.append(pos)
                skipped_touched |= accounts
        batches.append(batch)
        remaining = leftover
    return batches


def simple_batches(graph: ConflictGraph, threads: int, variant: str = "prefix") -> List[List[int]]:
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if variant == "prefix":
        return _prefix_batches(graph, threads)
    if variant == "scan":
        return _scan_batches(graph, threads)
    raise ValueError(f"unknown simple variant {variant!r}; expected one of {VARIANTS}")


def simple_schedule(block: BlockTrace, graph: ConflictGraph, threads: int, variant: str = "prefix") -> Schedule:
    gas = block.gas
    entries = [None] * len(gas)
    t = 0
    for batch in simple_batches(graph, threads, variant):
        for thread, pos in enumerate(batch):
            entries[pos] = Entry(thread, t, t + gas[pos])
        t += max(gas[pos] for pos in batch)
    return Schedule(threads, tuple(entries))
