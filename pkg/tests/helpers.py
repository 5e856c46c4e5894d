"""Independent brute-force references used only by the tests."""

import itertools
import random

from txpar.trace import make_block


def pairwise_edges(access_lists):
    n = len(access_lists)
    return {
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if set(access_lists[i]) & set(access_lists[j])
    }


def components_by_search(n, edges):
    """Connected components by plain graph search, each sorted, list sorted by first member."""
    adj = {i: set() for i in range(n)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    seen, comps = set(), []
    for s in range(n):
        if s in seen:
            continue
        stack, comp = [s], []
        seen.add(s)
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        comps.append(sorted(comp))
    return comps


def linear_extensions(n, edges):
    preds = {j: {i for i, k in edges if k == j} for j in range(n)}

    def rec(prefix, placed):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(n):
            if v not in placed and preds[v] <= placed:
                prefix.append(v)
                placed.add(v)
                yield from rec(prefix, placed)
                placed.remove(v)
                prefix.pop()

    yield from rec([], set())


def brute_force_optimum(weights, edges, threads):
    """Min makespan over every thread assignment and every topological order.

    Start times are the earliest allowed by predecessors and the previous task
    on the same thread, which is optimal for a fixed assignment and order.
    """
    n = len(weights)
    preds = {j: [i for i, k in edges if k == j] for j in range(n)}
    best = sum(weights)
    for order in linear_extensions(n, edges):
        for assign in itertools.product(range(threads), repeat=n):
            free = [0] * threads
            finish = [0] * n
            for v in order:
                t = max([free[assign[v]]] + [finish[p] for p in preds[v]])
                finish[v] = t + weights[v]
                free[assign[v]] = finish[v]
            best = min(best, max(finish, default=0))
    return best


def critical_path_by_paths(weights, edges):
    """Heaviest path weight, by DFS over every path from every vertex."""
    succ = {i: [j for a, j in edges if a == i] for i in range(len(weights))}

    def heaviest(v):
        return weights[v] + max((heaviest(u) for u in succ[v]), default=0)

    return max((heaviest(v) for v in range(len(weights))), default=0)


def random_block(rng: random.Random, n_max=8, pool_max=None, gas_max=100, block_number=0):
    n = rng.randint(1, n_max)
    pool = rng.randint(1, pool_max or 2 * n)
    access = [rng.sample(range(pool), rng.randint(1, min(3, pool))) for _ in range(n)]
    gas = [rng.randint(1, gas_max) for _ in range(n)]
    return make_block(block_number, access, gas), access, gas
