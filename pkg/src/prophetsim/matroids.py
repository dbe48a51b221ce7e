"""Matroids with exact independence oracles, contraction, and weighted greedy.

Three concrete kinds: uniform (rank cap), partition (per-block caps), and
graphic (edge sets acyclic in a fixed graph). Contraction is handled lazily:
the contracted set is carried into each oracle call instead of materializing
the quotient matroid, since it changes on every acceptance during a trial.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .common import ValidationError


class Matroid:
    """Base class; subclasses implement checker() for incremental adds."""

    ground_size: int

    def checker(self) -> "IndependenceChecker":
        raise NotImplementedError

    def is_independent(self, elements: Iterable[int]) -> bool:
        chk = self.checker()
        for e in elements:
            if not chk.try_add(e):
                return False
        return True

    def rank(self) -> int:
        chk = self.checker()
        return sum(1 for e in range(self.ground_size) if chk.try_add(e))


class IndependenceChecker:
    """Mutable state for building up an independent set one element at a time."""

    def try_add(self, e: int) -> bool:
        raise NotImplementedError

    def can_add(self, e: int) -> bool:
        raise NotImplementedError


class UniformMatroid(Matroid):
    def __init__(self, ground_size: int, k: int):
        if ground_size < 1 or k < 0:
            raise ValidationError("uniform matroid needs ground_size >= 1 and k >= 0")
        self.ground_size = ground_size
        self.k = k

    def checker(self):
        return _UniformChecker(self.k)

    def __repr__(self):
        return f"UniformMatroid(n={self.ground_size}, k={self.k})"


class _UniformChecker(IndependenceChecker):
    def __init__(self, k):
        self.k = k
        self.count = 0

    def can_add(self, e):
        return self.count < self.k

    def try_add(self, e):
        if self.count < self.k:
            self.count += 1
            return True
        return False


class PartitionMatroid(Matroid):
    def __init__(self, block_of: Sequence[int], caps: Sequence[int]):
        if not block_of:
            raise ValidationError("partition matroid needs a nonempty ground set")
        self.block_of = list(block_of)
        self.caps = list(caps)
        self.ground_size = len(self.block_of)
        for b in self.block_of:
            if not (0 <= b < len(self.caps)):
                raise ValidationError(f"element assigned to unknown block {b}")
        for c in self.caps:
            if c < 0:
                raise ValidationError("block capacities must be nonnegative")

    def checker(self):
        return _PartitionChecker(self.block_of, self.caps)

    def __repr__(self):
        return f"PartitionMatroid(blocks={self.block_of}, caps={self.caps})"


class _PartitionChecker(IndependenceChecker):
    def __init__(self, block_of, caps):
        self.block_of = block_of
        self.caps = caps
        self.counts = [0] * len(caps)

    def can_add(self, e):
        b = self.block_of[e]
        return self.counts[b] < self.caps[b]

    def try_add(self, e):
        b = self.block_of[e]
        if self.counts[b] < self.caps[b]:
            self.counts[b] += 1
            return True
        return False


class GraphicMatroid(Matroid):
    """Ground set = edge list; a set is independent iff it is a forest."""

    def __init__(self, num_vertices: int, edges: Sequence[tuple[int, int]]):
        if num_vertices < 1 or not edges:
            raise ValidationError("graphic matroid needs vertices and edges")
        self.num_vertices = num_vertices
        self.edges = [(int(u), int(v)) for u, v in edges]
        self.ground_size = len(self.edges)
        for u, v in self.edges:
            if not (0 <= u < num_vertices and 0 <= v < num_vertices):
                raise ValidationError(f"edge ({u},{v}) outside vertex range")

    def checker(self):
        return _ForestChecker(self.num_vertices, self.edges)

    def __repr__(self):
        return f"GraphicMatroid(V={self.num_vertices}, edges={self.edges})"


class _ForestChecker(IndependenceChecker):
    """Union-find over vertices; adding an edge fails iff it closes a cycle."""

    def __init__(self, num_vertices, edges):
        self.parent = list(range(num_vertices))
        self.edges = edges

    def _find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def can_add(self, e):
        u, v = self.edges[e]
        return self._find(u) != self._find(v)

    def try_add(self, e):
        u, v = self.edges[e]
        ru, rv = self._find(u), self._find(v)
        if ru == rv:
            return False
        self.parent[ru] = rv
        return True


def greedy_opt(
    matroid: Matroid,
    weights: Sequence[float],
    contracted: Iterable[int] = (),
) -> tuple[frozenset[int], float]:
    """Max-weight independent set of the contraction by `contracted`.

    Elements are scanned by weight descending (index ascending on ties) and
    added when jointly independent with everything taken so far; matroid
    greedy optimality makes this exact. Zero-weight elements are skipped,
    which never changes the total.
    """
    chk = matroid.checker()
    contracted = set(contracted)
    for e in contracted:
        if not chk.try_add(e):
            raise ValidationError("contracted set is not independent")
    order = sorted(
        (e for e in range(matroid.ground_size) if e not in contracted),
        key=lambda e: (-weights[e], e),
    )
    taken = []
    total = 0.0
    for e in order:
        if weights[e] <= 0.0:
            break
        if chk.try_add(e):
            taken.append(e)
            total += weights[e]
    return frozenset(taken), total


def remaining_value(
    matroid: Matroid, contracted: Iterable[int], vhat: Sequence[float]
) -> float:
    """Total weight of the greedy optimum in the contraction by `contracted`."""
    return greedy_opt(matroid, vhat, contracted)[1]
