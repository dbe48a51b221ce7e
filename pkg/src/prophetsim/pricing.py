"""The time discount curve and base-price computations for every setting.

Base prices never depend on observed sales history: the single-item price is
the expected maximum, matching prices are per-item expected values of the
matched buyer under the (unique, tie-broken) offline matching, and matroid
prices are expected remaining-value differences under contraction.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .common import ExpectationEstimate, ValidationError
from .distributions import DiscreteDistribution, expected_max
from .instances import Instance
from .matroids import Matroid
from .offline import max_weight_matching

MATROID_EXACT_BUDGET = 4096
MATROID_PANEL_SIZE = 512


def discount(t: float) -> float:
    """alpha(t) = 1 - e^(t-1): the decreasing multiplier applied to base
    prices, chosen so that 1 - alpha(t) + alpha'(t) = 0 identically."""
    if not (0.0 <= t <= 1.0):
        raise ValidationError(f"time {t} outside [0, 1]")
    return 1.0 - math.exp(t - 1.0)


def single_item_base_price(
    dists: Sequence[DiscreteDistribution],
    budget: int = 1_000_000,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """b = E[max_i v_i]."""
    return expected_max(dists, budget=budget, rng=rng).mean


def matching_base_prices(
    inst: Instance,
    budget: int = 100_000,
    rng: Optional[np.random.Generator] = None,
    mc_trials: int = 200_000,
) -> list[float]:
    """b_j = E over profiles of the value of the buyer matched to item j in
    the tie-broken offline maximum matching (0 when j is unmatched)."""
    if inst.kind != "matching":
        raise ValidationError("matching base prices need a matching instance")
    m = inst.items
    if inst.product_support_size() <= budget:
        acc = [[] for _ in range(m)]
        for profile, p in inst.iter_profiles():
            vectors = inst.value_vectors(profile)
            matched, _ = max_weight_matching(vectors)
            for i, j in matched.items():
                acc[j].append(p * vectors[i][j])
        return [math.fsum(a) for a in acc]
    if rng is None:
        raise ValueError("Monte Carlo path needs an rng")
    totals = [0.0] * m
    for _ in range(mc_trials):
        profile = inst.profile_from_uniforms(rng.random(inst.n))
        vectors = inst.value_vectors(profile)
        matched, _ = max_weight_matching(vectors)
        for i, j in matched.items():
            totals[j] += vectors[i][j]
    return [t / mc_trials for t in totals]


class MatroidPricer:
    """Dynamic matroid base prices b_i(A) = E[R(A) - R(A u {i})].

    The expectation runs over a fixed panel of fresh value profiles: the full
    product support (exact, probability weighted) when it fits the budget,
    otherwise a seed-derived sample of profiles shared by all (A, i) queries
    (common random numbers keep the estimate consistent along a trajectory).
    Expected remaining values are memoized per accepted set, and linearity
    of the expectation gives b_i(A) = f(A) - f(A u {i}).
    """

    def __init__(
        self,
        matroid: Matroid,
        dists: Sequence[DiscreteDistribution],
        exact_budget: int = MATROID_EXACT_BUDGET,
        panel_size: int = MATROID_PANEL_SIZE,
        seed: Optional[int] = None,
    ):
        if matroid.ground_size != len(dists):
            raise ValidationError("one value distribution per matroid element")
        self.matroid = matroid
        self.dists = dists
        size = 1
        for d in dists:
            size *= len(d)
        if size <= exact_budget:
            import itertools

            self.profiles = []
            self.weights = []
            for combo in itertools.product(*(d.atoms for d in dists)):
                p = 1.0
                for _, q in combo:
                    p *= q
                self.profiles.append(tuple(v for v, _ in combo))
                self.weights.append(p)
            self.exact = True
        else:
            if seed is None:
                raise ValueError("sampled panel needs a seed")
            rng = np.random.Generator(np.random.Philox(key=[seed, 0x70726963]))
            self.profiles = []
            for _ in range(panel_size):
                us = rng.random(len(dists))
                self.profiles.append(
                    tuple(d.values[d.index_from_uniform(u)] for d, u in zip(dists, us))
                )
            self.weights = [1.0 / panel_size] * panel_size
            self.exact = False
        self._remaining: dict[frozenset[int], float] = {}

    def expected_remaining(self, accepted: frozenset[int]) -> float:
        val = self._remaining.get(accepted)
        if val is None:
            from .matroids import remaining_value

            val = math.fsum(
                w * remaining_value(self.matroid, accepted, prof)
                for prof, w in zip(self.profiles, self.weights)
            )
            self._remaining[accepted] = val
        return val

    def base_price(self, accepted: frozenset[int], i: int) -> float:
        return self.expected_remaining(accepted) - self.expected_remaining(
            accepted | {i}
        )
