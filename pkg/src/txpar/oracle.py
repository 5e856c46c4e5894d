"""Exhaustive optimal-makespan search for tiny precedence DAGs.

Depth-first branch and bound over event times. At each event (time 0 or a
task completion) the search either starts one ready task on a free thread or
advances to the next completion, so deliberate idling is explored too. Every
semi-active schedule is reachable this way, and some semi-active schedule is
optimal, so exhausting the tree gives the true optimum.

Threads are identical, so which free thread a task starts on does not matter;
the search always picks the lowest free id. Tasks started at the same event
are started in ascending index order to avoid enumerating permutations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from .heft import PrecedenceDag, upward_rank
from .schedule import Entry, Schedule

DEFAULT_MAX_TASKS = 8
DEFAULT_MAX_THREADS = 3


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    optimal_makespan: int
    witness: Schedule
    explored: int


def optimal_schedule(
    dag: PrecedenceDag,
    threads: int,
    max_tasks: int = DEFAULT_MAX_TASKS,
    max_threads: int = DEFAULT_MAX_THREADS,
) -> OracleResult:
    n = dag.n
    if n > max_tasks:
        raise OracleLimitError(f"{n} tasks exceeds the oracle limit of {max_tasks}")
    if threads > max_threads:
        raise OracleLimitError(f"{threads} threads exceeds the oracle limit of {max_threads}")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if n == 0:
        return OracleResult(0, Schedule(threads, ()), 1)

    w = dag.weights
    tail = upward_rank(dag)
    pred_mask = [0] * n
    for i, succ in enumerate(dag.successors):
        for j in succ:
            pred_mask[j] |= 1 << i
    all_done = (1 << n) - 1

    # incumbent: run everything in index order on thread 0
    best = [sum(w), None]
    start = [0] * n
    thread_of = [0] * n
    finish = [0] * n
    explored = 0

    def search(t: int, started: int, thread_free: List[int], min_next: int, unstarted_work: int) -> None:
        nonlocal explored
        explored += 1

        done = 0
        running_finish = []
        for i in range(n):
            if started >> i & 1:
                if finish[i] <= t:
                    done |= 1 << i
                else:
                    running_finish.append(finish[i])

        if started == all_done:
            makespan = max(finish)
            if makespan < best[0] or best[1] is None:
                best[0] = makespan
                best[1] = tuple(Entry(thread_of[i], start[i], finish[i]) for i in range(n))
            return

        # lower bound
        lb = max(running_finish, default=t)
        running_work = sum(f - t for f in running_finish)
        lb = max(lb, t + -(-(running_work + unstarted_work) // threads))
        for i in range(n):
            if not started >> i & 1:
                lb = max(lb, t + tail[i])
            elif finish[i] > t:
                lb = max(lb, finish[i] + tail[i] - w[i])
        if lb > best[0] or (lb == best[0] and best[1] is not None):
            return

        free = [k for k in range(threads) if thread_free[k] <= t]
        if free:
            k = free[0]
            for i in range(min_next, n):
                if started >> i & 1 or pred_mask[i] & ~done:
                    continue
                start[i], finish[i], thread_of[i] = t, t + w[i], k
                old = thread_free[k]
                thread_free[k] = t + w[i]
                search(t, started | 1 << i, thread_free, i + 1, unstarted_work - w[i])
                thread_free[k] = old

        if running_finish:
            search(min(running_finish), started, thread_free, 0, unstarted_work)

    search(0, 0, [0] * threads, 0, sum(w))

    if best[1] is None:
        raise AssertionError("oracle search found no schedule")
    return OracleResult(best[0], Schedule(threads, best[1]), explored)
