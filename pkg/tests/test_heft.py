import random

import pytest

from helpers import critical_path_by_paths, pairwise_edges, random_block
from txpar.conflict import build_conflict_graph
from txpar.heft import (
    PrecedenceDag, build_dag, critical_path, heft_order, heft_schedule, transitive_reduction,
    upward_rank,
)
from txpar.schedule import check_valid
from txpar.trace import make_block


def dag_for(lists, gas, reduce=True):
    block = make_block(0, lists, gas)
    g = build_conflict_graph(block)
    return block, g, build_dag(block, g, reduce=reduce)


def test_disjoint_lists_give_no_edges():
    _, _, dag = dag_for([["a"], ["b"], ["c"]], [1, 2, 3])
    assert dag.edges == set()


def test_shared_account_gives_chain():
    _, _, dag = dag_for([["x"]] * 5, [1] * 5)
    assert dag.edges == {(0, 1), (1, 2), (2, 3), (3, 4)}
    _, _, full = dag_for([["x"]] * 5, [1] * 5, reduce=False)
    assert len(full.edges) == 10


def test_pairwise_dag_example():
    lists = [["A", "B"], ["B"], ["A"]]
    _, _, dag = dag_for(lists, [1, 1, 1])
    assert dag.edges == pairwise_edges(lists) == {(0, 1), (0, 2)}


def test_rank_examples():
    chain = PrecedenceDag.from_edges([5, 10, 5], [(0, 1), (1, 2)])
    assert upward_rank(chain) == [20, 15, 5]
    assert upward_rank(PrecedenceDag.from_edges([7], [])) == [7]
    assert upward_rank(PrecedenceDag.from_edges([3, 9, 4], [])) == [3, 9, 4]


def test_chain_makespan():
    chain = PrecedenceDag.from_edges([5, 10, 5], [(0, 1), (1, 2)])
    for threads in (1, 2, 3, 8):
        assert heft_schedule(chain, threads).makespan == 20


def test_independent_example():
    dag = PrecedenceDag.from_edges([30, 10, 10, 10], [])
    s = heft_schedule(dag, 2)
    assert s.makespan == 30
    assert [e.thread for e in s.entries] == [0, 1, 1, 1]


def test_perfect_parallelism():
    dag = PrecedenceDag.from_edges([7] * 5, [])
    for threads in (5, 6, 10):
        assert heft_schedule(dag, threads).makespan == 7


def test_insertion_uses_idle_gap():
    # 0 -> 1, 0 -> 2; task 2 lands on thread 1 at [10, 20], leaving [0, 10] idle.
    # Task 3 (rank 5, placed last) fits that gap; append-only would start it at 20.
    dag = PrecedenceDag.from_edges([10, 10, 10, 5], [(0, 1), (0, 2)])
    assert heft_order(dag) == [0, 1, 2, 3]
    s = heft_schedule(dag, 2)
    assert s.entries[2] == (1, 10, 20)
    assert s.entries[3] == (1, 0, 5)
    assert s.makespan == 20


def test_rank_order_single_thread():
    dag = PrecedenceDag.from_edges([5, 5, 20, 2], [(0, 1), (2, 3)])
    s = heft_schedule(dag, 1)
    # ranks 10, 5, 22, 2
    assert [e.start for e in s.entries] == [20, 25, 0, 30]
    assert s.makespan == 32


def test_from_edges_rejects_backward_and_zero_weight():
    with pytest.raises(ValueError):
        PrecedenceDag.from_edges([1, 1], [(1, 0)])
    with pytest.raises(ValueError):
        PrecedenceDag.from_edges([0], [])


@pytest.mark.parametrize("seed", range(200))
def test_random_heft_invariants(seed):
    rng = random.Random(seed)
    block, lists, gas = random_block(rng, n_max=20, pool_max=25)
    g = build_conflict_graph(block)
    full = build_dag(block, g, reduce=False)
    dag = build_dag(block, g)
    assert full.edges == pairwise_edges(lists)

    # reduced edges imply the same reachability and drop every shortcut
    assert dag.edges <= full.edges
    assert transitive_reduction(full).edges == dag.edges
    rank = upward_rank(dag)
    assert rank == upward_rank(full)
    for i, j in full.edges:
        assert rank[i] > rank[j]
    assert critical_path(dag) == critical_path_by_paths(gas, full.edges)

    threads = rng.randint(1, 6)
    s = heft_schedule(dag, threads)
    assert s == heft_schedule(full, threads)
    assert s == heft_schedule(dag, threads)
    assert check_valid(s, block, g) == []

    order = heft_order(dag)
    pos = {t: k for k, t in enumerate(order)}
    assert all(pos[i] < pos[j] for i, j in full.edges)

    total = sum(gas)
    lower = max(critical_path(dag), -(-total // threads), max(gas))
    assert lower <= s.makespan <= total
