import random

import pytest

from helpers import brute_force_optimum, random_block
from txpar.conflict import build_conflict_graph
from txpar.heft import PrecedenceDag, build_dag
from txpar.oracle import OracleLimitError, optimal_schedule
from txpar.schedule import check_valid


def test_chain():
    r = optimal_schedule(PrecedenceDag.from_edges([5, 10, 5], [(0, 1), (1, 2)]), 2)
    assert r.optimal_makespan == 20


def test_independent_packing():
    dag = PrecedenceDag.from_edges([30, 10, 10, 10], [])
    assert brute_force_optimum([30, 10, 10, 10], [], 2) == 30
    r = optimal_schedule(dag, 2)
    assert r.optimal_makespan == 30
    assert r.witness.makespan == 30


def test_single_task():
    assert optimal_schedule(PrecedenceDag.from_edges([42], []), 3).optimal_makespan == 42


def test_limits():
    with pytest.raises(OracleLimitError):
        optimal_schedule(PrecedenceDag.from_edges([1] * 9, []), 2)
    with pytest.raises(OracleLimitError):
        optimal_schedule(PrecedenceDag.from_edges([1] * 3, []), 4)
    assert optimal_schedule(PrecedenceDag.from_edges([1] * 9, []), 4, max_tasks=9, max_threads=4).optimal_makespan == 3


def test_needs_deliberate_idling():
    # Starting independent task 2 at time 0 (as any non-idling schedule must)
    # delays 1 or 3 and gives 10. Leaving thread 1 idle until task 0 ends gives 9.
    weights = [1, 4, 3, 5, 3]
    edges = [(0, 1), (0, 3), (1, 4), (3, 4)]
    assert brute_force_optimum(weights, edges, 2) == 9
    r = optimal_schedule(PrecedenceDag.from_edges(weights, edges), 2)
    assert r.optimal_makespan == 9
    assert r.witness.entries[2].start > 0


@pytest.mark.parametrize("seed", range(120))
def test_matches_brute_force(seed):
    rng = random.Random(seed)
    block, _, gas = random_block(rng, n_max=5, gas_max=20)
    dag = build_dag(block, build_conflict_graph(block), reduce=False)
    threads = rng.randint(1, 3)
    r = optimal_schedule(dag, threads)
    assert r.optimal_makespan == brute_force_optimum(list(gas), sorted(dag.edges), threads)
    assert r.witness.makespan == r.optimal_makespan
    assert check_valid(r.witness, block, build_conflict_graph(block)) == []


@pytest.mark.parametrize("seed", range(40))
def test_random_dag_structures_vs_brute_force(seed):
    # DAGs not derived from access lists (arbitrary forward edges)
    rng = random.Random(5000 + seed)
    n = rng.randint(1, 6)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.3]
    weights = [rng.randint(1, 15) for _ in range(n)]
    threads = rng.randint(1, 3)
    r = optimal_schedule(PrecedenceDag.from_edges(weights, edges), threads)
    assert r.optimal_makespan == brute_force_optimum(weights, edges, threads)


@pytest.mark.parametrize("seed", range(30))
def test_self_checks(seed):
    rng = random.Random(seed)
    block, _, gas = random_block(rng, n_max=8)
    dag = build_dag(block, build_conflict_graph(block))
    assert optimal_schedule(dag, 1).optimal_makespan == sum(gas)
    free = PrecedenceDag.from_edges(gas, [])
    n = len(gas)
    assert optimal_schedule(free, n, max_threads=n).optimal_makespan == max(gas)
