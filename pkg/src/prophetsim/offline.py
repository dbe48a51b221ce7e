"""Exact offline optima for every setting and expected-OPT estimation.

The offline optimum sees the full value profile, so expectations integrate
only over value profiles, never over arrival times.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .common import CapacityError, ExpectationEstimate, ValidationError
from .instances import Instance
from .matroids import greedy_opt
from .valuations import XosValuation, subset_values

MATCHING_ITEM_CAP = 20
XOS_ITEM_CAP = 8


def max_weight_matching(
    weights: Sequence[Sequence[float]],
) -> tuple[dict[int, int], float]:
    """Maximum-weight bipartite matching of buyers (rows) to items (columns).

    Zero-weight edges are never matched. Among optimal matchings the
    lexicographically smallest edge set under (buyer, item) order is
    returned, which makes the maximizer unique: buyers are scanned in
    index order and each is matched to the smallest item consistent with
    optimality (matching beats skipping when both are optimal, since an
    earlier first edge compares smaller).
    """
    n = len(weights)
    m = len(weights[0]) if n else 0
    for row in weights:
        if len(row) != m:
            raise ValidationError("weight matrix must be rectangular")
        for w in row:
            if not math.isfinite(w) or w < 0:
                raise ValidationError("weights must be finite and nonnegative")
    if m > MATCHING_ITEM_CAP:
        raise CapacityError(f"matching solver enumerates item masks; m={m} > {MATCHING_ITEM_CAP}")

    full = (1 << m) - 1
    memo: dict[tuple[int, int], float] = {}

    def best(i: int, mask: int) -> float:
        if i == n:
            return 0.0
        key = (i, mask)
        val = memo.get(key)
        if val is not None:
            return val
        row = weights[i]
        val = best(i + 1, mask)
        avail = mask
        while avail:
            bit = avail & -avail
            avail ^= bit
            j = bit.bit_length() - 1
            w = row[j]
            if w > 0.0:
                cand = w + best(i + 1, mask ^ bit)
                if cand > val:
                    val = cand
        memo[key] = val
        return val

    matching: dict[int, int] = {}
    mask = full
    total = best(0, full)
    for i in range(n):
        target = best(i, mask)
        row = weights[i]
        chosen = None
        for j in range(m):
            bit = 1 << j
            if mask & bit and row[j] > 0.0 and row[j] + best(i + 1, mask ^ bit) == target:
                chosen = j
                break
        if chosen is not None:
            matching[i] = chosen
            mask ^= 1 << chosen
    return matching, total


def xos_welfare_opt(
    valuations: Sequence[XosValuation], m: int, cap: int = XOS_ITEM_CAP
) -> tuple[dict[int, int], float]:
    """Exact welfare maximum over all assignments of items to buyers-or-nobody.

    Enumerates (n+1)^m item-to-buyer maps; value tables per buyer are
    precomputed over all 2^m subsets. Returns (item -> buyer, value).
    """
    if m > cap:
        raise CapacityError(f"welfare enumeration needs (n+1)^m maps; m={m} > {cap}")
    n = len(valuations)
    tables = [subset_values(v, m) for v in valuations]
    assignment = [0] * m  # 0 = unassigned, b+1 = buyer b
    best_val = -1.0
    best_assign: list[int] = assignment[:]
    while True:
        masks = [0] * n
        for j, a in enumerate(assignment):
            if a:
                masks[a - 1] |= 1 << j
        val = sum(tables[b][masks[b]] for b in range(n))
        if val > best_val:
            best_val = val
            best_assign = assignment[:]
        # Odometer over assignments.
        for j in range(m):
            assignment[j] += 1
            if assignment[j] <= n:
                break
            assignment[j] = 0
        else:
            break
    alloc = {j: a - 1 for j, a in enumerate(best_assign) if a}
    return alloc, best_val


def offline_value(inst: Instance, profile: Sequence[int]) -> float:
    """Offline optimum welfare for one realized value profile."""
    if inst.kind == "single_item":
        return max(inst.scalar_values(profile))
    if inst.kind == "matroid":
        return greedy_opt(inst.matroid, inst.scalar_values(profile))[1]
    if inst.kind == "matching":
        return max_weight_matching(inst.value_vectors(profile))[1]
    return xos_welfare_opt(inst.xos_valuations(profile), inst.items)[1]


def expected_opt(
    inst: Instance,
    budget: int = 100_000,
    rng: Optional[np.random.Generator] = None,
    mc_trials: int = 200_000,
) -> ExpectationEstimate:
    """E[OPT]: exact product-support enumeration when affordable, else MC."""
    if inst.product_support_size() <= budget:
        terms = [p * offline_value(inst, prof) for prof, p in inst.iter_profiles()]
        return ExpectationEstimate(math.fsum(terms))
    if rng is None:
        raise ValueError("Monte Carlo path needs an rng")
    vals = np.empty(mc_trials)
    for t in range(mc_trials):
        prof = inst.profile_from_uniforms(rng.random(inst.n))
        vals[t] = offline_value(inst, prof)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(mc_trials))
    return ExpectationEstimate(mean, se, f"mc:{mc_trials}")
