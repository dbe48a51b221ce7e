import itertools

import numpy as np
import pytest

from prophetsim.common import ValidationError
from prophetsim.matroids import (
    GraphicMatroid,
    PartitionMatroid,
    UniformMatroid,
    greedy_opt,
    remaining_value,
)


def triangle():
    return GraphicMatroid(3, [(0, 1), (1, 2), (2, 0)])


def k4():
    return GraphicMatroid(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])


def test_uniform_independence():
    M = UniformMatroid(3, 1)
    assert M.is_independent([])
    assert M.is_independent([1])
    assert not M.is_independent([1, 2])
    assert M.rank() == 1


def test_partition_independence():
    M = PartitionMatroid([0, 0, 1, 1], [1, 2])
    assert M.is_independent([0, 2, 3])
    assert not M.is_independent([0, 1])
    assert M.rank() == 3


def test_graphic_independence_triangle():
    M = triangle()
    for pair in itertools.combinations(range(3), 2):
        assert M.is_independent(pair)
    assert not M.is_independent([0, 1, 2])
    assert M.rank() == 2


def test_greedy_examples():
    assert greedy_opt(UniformMatroid(2, 1), [1.0, 2.0]) == (frozenset({1}), 2.0)
    taken, total = greedy_opt(triangle(), [3.0, 2.0, 1.0])
    assert taken == frozenset({0, 1}) and total == 5.0


def test_greedy_skips_zero_weight():
    taken, total = greedy_opt(UniformMatroid(3, 3), [0.0, 5.0, 0.0])
    assert taken == frozenset({1}) and total == 5.0


def test_greedy_contracted_must_be_independent():
    with pytest.raises(ValidationError):
        greedy_opt(UniformMatroid(2, 1), [1.0, 1.0], contracted=[0, 1])


def test_remaining_value_examples():
    M = UniformMatroid(2, 2)
    assert remaining_value(M, [], [1.0, 2.0]) == 3.0
    assert remaining_value(M, [1], [1.0, 2.0]) == 1.0
    assert remaining_value(UniformMatroid(2, 1), [0], [1.0, 2.0]) == 0.0


def _brute_force_opt(M, weights, contracted=frozenset()):
    ground = [e for e in range(M.ground_size) if e not in contracted]
    best = 0.0
    for r in range(len(ground) + 1):
        for S in itertools.combinations(ground, r):
            if M.is_independent(set(S) | set(contracted)):
                best = max(best, sum(weights[e] for e in S))
    return best


@pytest.mark.parametrize("seed", range(30))
def test_greedy_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    M = _random_matroid(rng)
    weights = rng.uniform(0, 10, M.ground_size)
    assert greedy_opt(M, weights)[1] == pytest.approx(_brute_force_opt(M, weights))


def _random_matroid(rng):
    choice = rng.integers(3)
    if choice == 0:
        n = int(rng.integers(2, 8))
        return UniformMatroid(n, int(rng.integers(0, n + 1)))
    if choice == 1:
        nblocks = int(rng.integers(1, 4))
        n = int(rng.integers(2, 8))
        return PartitionMatroid(
            [int(b) for b in rng.integers(0, nblocks, n)],
            [int(c) for c in rng.integers(0, 3, nblocks)],
        )
    V = int(rng.integers(3, 6))
    edges = [(u, v) for u in range(V) for v in range(u + 1, V)]
    rng.shuffle(edges)
    return GraphicMatroid(V, edges[: int(rng.integers(2, len(edges) + 1))])


@pytest.mark.parametrize("seed", range(50))
def test_remaining_value_monotone_in_contraction(seed):
    rng = np.random.default_rng(100 + seed)
    M = _random_matroid(rng)
    weights = rng.uniform(0, 10, M.ground_size)
    A = _random_independent(M, rng)
    bigger = _grow_independent(M, A, rng)
    assert remaining_value(M, bigger, weights) <= remaining_value(M, A, weights) + 1e-9


def _random_independent(M, rng):
    chk = M.checker()
    out = []
    for e in rng.permutation(M.ground_size):
        if rng.random() < 0.4 and chk.try_add(int(e)):
            out.append(int(e))
    return frozenset(out)


def _grow_independent(M, A, rng):
    out = set(A)
    for e in rng.permutation(M.ground_size):
        e = int(e)
        if e not in out and rng.random() < 0.5 and M.is_independent(out | {e}):
            out.add(e)
    return frozenset(out)


def test_greedy_critical_value_bound_small():
    # sum over V independent in M/A of [R(A) - R(A u {i})] <= R(A); the
    # full 10k-case fuzz lives in the acceptance suite.
    rng = np.random.default_rng(7)
    for _ in range(200):
        M = _random_matroid(rng)
        weights = rng.uniform(0, 10, M.ground_size)
        A = _random_independent(M, rng)
        V = [
            e
            for e in _grow_independent(M, A, rng)
            if e not in A
        ]
        base = remaining_value(M, A, weights)
        drop = sum(base - remaining_value(M, A | {i}, weights) for i in V)
        assert drop <= base + 1e-9
