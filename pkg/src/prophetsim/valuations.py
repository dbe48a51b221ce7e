"""Combinatorial valuations: additive, unit-demand, and XOS.

Item sets are represented as bitmasks over item indices 0..m-1. All oracle
ties break toward the smallest clause index / smallest set, so every code
path is deterministic under a fixed seed.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .common import CapacityError, ValidationError
from .distributions import PROB_TOL

DEMAND_ORACLE_CAP = 16


def mask_of(items: Iterable[int]) -> int:
    mask = 0
    for j in items:
        mask |= 1 << j
    return mask


def items_of(mask: int) -> list[int]:
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


class XosValuation:
    """Pointwise maximum of additive clauses (all of the same item count)."""

    __slots__ = ("clauses", "m")

    def __init__(self, clauses: Sequence[Sequence[float]]):
        if not clauses:
            raise ValidationError("XOS valuation needs at least one clause")
        self.clauses = tuple(tuple(float(x) for x in c) for c in clauses)
        self.m = len(self.clauses[0])
        for c in self.clauses:
            if len(c) != self.m:
                raise ValidationError("all clauses must have the same item count")
            for x in c:
                if not math.isfinite(x) or x < 0:
                    raise ValidationError(f"clause entry {x} must be finite and >= 0")

    def __eq__(self, other) -> bool:
        return isinstance(other, XosValuation) and self.clauses == other.clauses

    def __hash__(self) -> int:
        return hash(self.clauses)

    def __repr__(self) -> str:
        return f"XosValuation({list(map(list, self.clauses))})"


def additive(per_item: Sequence[float]) -> XosValuation:
    return XosValuation([per_item])


def unit_demand(per_item: Sequence[float]) -> XosValuation:
    """One singleton clause per item; value(S) = max over items in S."""
    m = len(per_item)
    clauses = []
    for j, v in enumerate(per_item):
        row = [0.0] * m
        row[j] = float(v)
        clauses.append(row)
    return XosValuation(clauses)


def clause_sum(clause: Sequence[float], mask: int) -> float:
    total = 0.0
    j = 0
    while mask:
        if mask & 1:
            total += clause[j]
        mask >>= 1
        j += 1
    return total


def value(v: XosValuation, mask: int) -> float:
    """v(S) = max over clauses of the clause sum on S; value(empty) = 0."""
    if mask == 0:
        return 0.0
    return max(clause_sum(c, mask) for c in v.clauses)


def xos_oracle(v: XosValuation, mask: int) -> int:
    """Index of a supporting clause for S (smallest index on ties)."""
    best_idx = 0
    best = clause_sum(v.clauses[0], mask)
    for idx in range(1, len(v.clauses)):
        s = clause_sum(v.clauses[idx], mask)
        if s > best:
            best, best_idx = s, idx
    return best_idx


def demand_oracle(v: XosValuation, prices: Sequence[float]) -> int:
    """argmax_S value(S) - sum of prices over S, by subset enumeration.

    Ties break toward smaller cardinality, then smaller bitmask (which is
    lexicographic in item order).
    """
    m = v.m
    if m > DEMAND_ORACLE_CAP:
        raise CapacityError(f"demand oracle enumerates 2^m subsets; m={m} > {DEMAND_ORACLE_CAP}")
    if len(prices) != m:
        raise ValidationError("price vector length must match item count")
    best_mask = 0
    best_surplus = 0.0
    best_card = 0
    for mask in range(1, 1 << m):
        surplus = value(v, mask) - clause_sum(prices, mask)
        card = mask.bit_count()
        if surplus > best_surplus or (
            surplus == best_surplus and (card, mask) < (best_card, best_mask)
        ):
            best_mask, best_surplus, best_card = mask, surplus, card
    return best_mask


def subset_values(v: XosValuation, m: int | None = None) -> list[float]:
    """value(v, S) for every S, indexed by bitmask; used by enumerators."""
    m = v.m if m is None else m
    table = [0.0] * (1 << m)
    rows = [[0.0] * (1 << m) for _ in v.clauses]
    for ci, c in enumerate(v.clauses):
        row = rows[ci]
        for mask in range(1, 1 << m):
            j = (mask & -mask).bit_length() - 1
            row[mask] = row[mask ^ (1 << j)] + c[j]
    for mask in range(1, 1 << m):
        table[mask] = max(row[mask] for row in rows)
    return table


class BuyerValuationDistribution:
    """Finite support over XOS valuations for one buyer."""

    __slots__ = ("support", "probs", "m", "_cum")

    def __init__(self, support: Sequence[tuple[float, XosValuation]]):
        if not support:
            raise ValidationError("valuation support must be nonempty")
        self.probs = [float(p) for p, _ in support]
        self.support = [v for _, v in support]
        self.m = self.support[0].m
        for p in self.probs:
            if not (0 < p <= 1):
                raise ValidationError(f"support probability {p} outside (0, 1]")
        for v in self.support:
            if v.m != self.m:
                raise ValidationError("all support valuations must share the item count")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > PROB_TOL:
            raise ValidationError(f"support probabilities sum to {total}, not 1")
        cum = []
        acc = 0.0
        for p in self.probs:
            acc += p
            cum.append(acc)
        cum[-1] = 1.0
        self._cum = cum

    def __len__(self) -> int:
        return len(self.support)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BuyerValuationDistribution)
            and self.probs == other.probs
            and self.support == other.support
        )

    def index_from_uniform(self, u: float) -> int:
        from bisect import bisect_right

        return bisect_right(self._cum, u)
