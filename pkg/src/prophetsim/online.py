"""Online mechanisms: dynamic-price algorithms for single item, matching,
XOS, and matroids, plus fixed-threshold algorithms (single item and the
candidate-recommendation reduction for matchings).

Each runner maps one realized trial (values, arrival order, auxiliary
uniforms) to a TrialOutcome. Auxiliary randomness is consumed from `aux` in
arrival order: at most one set/candidate draw per buyer, plus one
tie-breaking coin when a value lands exactly on a threshold.

Threshold conventions follow the per-setting acceptance rules: weak
inequality (>=) for single item, matching, and XOS; strict (>) for matroids.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .common import ValidationError
from .distributions import SmoothedThreshold, solve_product_threshold
from .instances import Instance
from .matroids import Matroid
from .offline import max_weight_matching
from .pricing import MatroidPricer, discount
from .valuations import XosValuation, xos_oracle


class Arrival(NamedTuple):
    buyer: int
    time: float


def sort_arrivals(arrivals: Sequence[Arrival]) -> list[Arrival]:
    return sorted(arrivals, key=lambda a: (a.time, a.buyer))


@dataclass
class TrialOutcome:
    """One trial's allocation and its welfare accounting.

    welfare = revenue + utility holds by construction; `welfare_true` is the
    buyers' true value of their bundles, which for XOS can exceed the
    clause-accounted welfare used in the ratio.
    """

    allocation: object
    utilities: list[float]
    payments: list[float]
    welfare: float
    revenue: float
    utility: float
    item_sale_times: list[Optional[float]]
    welfare_true: Optional[float] = None


def _finish(allocation, utilities, payments, values_gained, sale_times, welfare_true=None):
    revenue = math.fsum(payments)
    utility = math.fsum(utilities)
    welfare = math.fsum(values_gained)
    return TrialOutcome(
        allocation, utilities, payments, welfare, revenue, utility, sale_times, welfare_true
    )


def run_single_item_dynamic(
    b: float, values: Sequence[float], arrivals: Sequence[Arrival]
) -> TrialOutcome:
    """First buyer (in time) with v >= alpha(t) * b gets the item at that price."""
    n = len(values)
    utilities = [0.0] * n
    for a in sort_arrivals(arrivals):
        price = discount(a.time) * b
        v = values[a.buyer]
        if v >= price:
            utilities[a.buyer] = v - price
            return _finish({a.buyer: 0}, utilities, [price], [v], [a.time])
    return _finish({}, utilities, [], [], [None])


def run_matching_dynamic(
    b: Sequence[float],
    vectors: Sequence[Sequence[float]],
    arrivals: Sequence[Arrival],
) -> TrialOutcome:
    """Each arriving buyer takes the unsold item maximizing v_ij - alpha(t) b_j
    when that maximum is >= 0 (zero surplus buys, but never for a worthless
    item); ties to the smallest item."""
    m = len(b)
    n = len(vectors)
    utilities = [0.0] * n
    payments = []
    gained = []
    sale_times: list[Optional[float]] = [None] * m
    sold = [False] * m
    allocation: dict[int, int] = {}
    for a in sort_arrivals(arrivals):
        alpha = discount(a.time)
        row = vectors[a.buyer]
        best_j = -1
        best_surplus = -math.inf
        for j in range(m):
            if sold[j] or row[j] <= 0.0:
                continue
            surplus = row[j] - alpha * b[j]
            if surplus > best_surplus:
                best_surplus, best_j = surplus, j
        if best_j >= 0 and best_surplus >= 0.0:
            sold[best_j] = True
            sale_times[best_j] = a.time
            allocation[a.buyer] = best_j
            price = alpha * b[best_j]
            payments.append(price)
            gained.append(row[best_j])
            utilities[a.buyer] = row[best_j] - price
    return _finish(allocation, utilities, payments, gained, sale_times)


def run_xos_caps(
    b: Sequence[float],
    set_samplers: dict[tuple[int, int], tuple[list[float], list[int]]],
    valuations: Sequence[XosValuation],
    profile: Sequence[int],
    arrivals: Sequence[Arrival],
    aux: Iterator[float],
) -> TrialOutcome:
    """Sampled-set allocation: the arriving buyer draws a target set from the
    LP mass, and receives every unsold item in it whose supporting-clause
    value clears alpha(t) * b_j. Welfare is clause-accounted; the true bundle
    value is recorded separately."""
    m = len(b)
    n = len(valuations)
    utilities = [0.0] * n
    payments = []
    gained = []
    true_vals = []
    sale_times: list[Optional[float]] = [None] * m
    sold = [False] * m
    allocation: dict[int, int] = {}
    from .valuations import value as xos_value

    for a in sort_arrivals(arrivals):
        i = a.buyer
        k = profile[i]
        cum, masks = set_samplers[(i, k)]
        u = next(aux)
        target = masks[bisect_left(cum, u)] if u <= cum[-1] else 0
        if target == 0:
            continue
        v = valuations[i]
        clause = v.clauses[xos_oracle(v, target)]
        alpha = discount(a.time)
        got = 0
        buyer_value = 0.0
        buyer_pay = 0.0
        for j in range(m):
            if target >> j & 1 and not sold[j] and clause[j] >= alpha * b[j]:
                sold[j] = True
                sale_times[j] = a.time
                got |= 1 << j
                price = alpha * b[j]
                payments.append(price)
                buyer_pay += price
                buyer_value += clause[j]
        if got:
            allocation[i] = got
            gained.append(buyer_value)
            true_vals.append(xos_value(v, got))
            utilities[i] = buyer_value - buyer_pay
    return _finish(
        allocation, utilities, payments, gained, sale_times, math.fsum(true_vals)
    )


def run_matroid_mps(
    matroid: Matroid,
    pricer: MatroidPricer,
    values: Sequence[float],
    arrivals: Sequence[Arrival],
) -> TrialOutcome:
    """Accept arriving element i iff A u {i} stays independent and
    v_i > alpha(t) * b_i(A), paying that dynamic price."""
    n = matroid.ground_size
    utilities = [0.0] * n
    payments = []
    gained = []
    sale_times: list[Optional[float]] = [None] * n
    accepted: frozenset[int] = frozenset()
    for a in sort_arrivals(arrivals):
        i = a.buyer
        if not matroid.is_independent(accepted | {i}):
            continue
        price = discount(a.time) * pricer.base_price(accepted, i)
        v = values[i]
        if v > price:
            accepted = accepted | {i}
            sale_times[i] = a.time
            payments.append(price)
            gained.append(v)
            utilities[i] = v - price
    return _finish(accepted, utilities, payments, gained, sale_times)


def run_fta_single(
    threshold: SmoothedThreshold,
    values: Sequence[float],
    arrivals: Sequence[Arrival],
    aux: Iterator[float],
) -> TrialOutcome:
    """First buyer clearing the fixed smoothed threshold buys at tau."""
    n = len(values)
    utilities = [0.0] * n
    for a in sort_arrivals(arrivals):
        v = values[a.buyer]
        coin = next(aux) if v == threshold.tau else None
        if threshold.clears(v, coin):
            utilities[a.buyer] = v - threshold.tau
            return _finish({a.buyer: 0}, utilities, [threshold.tau], [v], [a.time])
    return _finish({}, utilities, [], [], [None])


@dataclass
class FtaMatchingPolicy:
    """Per-buyer candidate-item probabilities (per support index) and fixed
    per-item smoothed thresholds."""

    candidate_probs: list[list[list[float]]]  # [buyer][support index][item]
    thresholds: list[SmoothedThreshold]
    candidate_cum: list[list[list[float]]] = field(init=False)

    def __post_init__(self):
        self.candidate_cum = [
            [self._cum(ps) for ps in per_buyer] for per_buyer in self.candidate_probs
        ]
        for per_buyer in self.candidate_probs:
            for ps in per_buyer:
                if math.fsum(ps) > 1 + 1e-9:
                    raise ValidationError("candidate probabilities exceed 1")

    @staticmethod
    def _cum(ps):
        out = []
        acc = 0.0
        for p in ps:
            acc += p
            out.append(acc)
        return out

    def draw_candidate(self, buyer: int, support_idx: int, r: float) -> Optional[int]:
        """Candidate item k with cum[k-1] < r <= cum[k] for r in (0, 1]; None
        when r falls past the total candidate mass."""
        cum = self.candidate_cum[buyer][support_idx]
        if not cum or r > cum[-1]:
            return None
        return bisect_left(cum, r)


def fta_matching_prepare(
    inst: Instance,
    budget: int = 100_000,
    rng: Optional[np.random.Generator] = None,
    mc_trials: int = 50_000,
) -> FtaMatchingPolicy:
    """Candidate probabilities from the (unique) offline matching and per-item
    thresholds calibrated to a no-sale probability of 1/e.

    p_k(buyer i, support s) is the probability over the other buyers' values
    that edge (i, k) belongs to the tie-broken maximum matching when buyer
    i's vector is fixed to support entry s. The per-item threshold solve runs
    over each buyer's induced "offered value" distribution, with the
    never-a-candidate mass inert; when the target is unreachable the solver
    already returns the most permissive (tau at the lowest atom, accept-all)
    configuration.
    """
    if inst.kind != "matching":
        raise ValidationError("FTA matching policy needs a matching instance")
    n, m = inst.n, inst.items
    candidate_probs: list[list[list[float]]] = []
    for i in range(n):
        others = [b for bi, b in enumerate(inst.buyers) if bi != i]
        others_size = 1
        for b in others:
            others_size *= len(b)
        per_support = []
        for s in range(len(inst.buyers[i])):
            probs = [0.0] * m
            if others_size <= budget:
                combos = (
                    itertools.product(*(range(len(b)) for b in others))
                    if others
                    else iter([()])
                )
                for combo in combos:
                    p = 1.0
                    for b, k in zip(others, combo):
                        p *= b.probs[k]
                    vectors = []
                    oi = 0
                    for bi in range(n):
                        if bi == i:
                            vectors.append(inst.buyers[i].support[s])
                        else:
                            vectors.append(others[oi].support[combo[oi]])
                            oi += 1
                    matched, _ = max_weight_matching(vectors)
                    if i in matched:
                        probs[matched[i]] += p
            else:
                if rng is None:
                    raise ValueError("Monte Carlo candidate probabilities need an rng")
                for _ in range(mc_trials):
                    us = rng.random(n)
                    profile = list(inst.profile_from_uniforms(us))
                    profile[i] = s
                    vectors = inst.value_vectors(profile)
                    matched, _ = max_weight_matching(vectors)
                    if i in matched:
                        probs[matched[i]] += 1.0 / mc_trials
            per_support.append(probs)
        candidate_probs.append(per_support)

    thresholds = []
    target = 1.0 / math.e
    for k in range(m):
        entries = []
        for i, buyer in enumerate(inst.buyers):
            masses: dict[float, float] = {}
            for s, ps in enumerate(candidate_probs[i]):
                mass = buyer.probs[s] * ps[k]
                if mass > 0:
                    v = buyer.support[s][k]
                    masses[v] = masses.get(v, 0.0) + mass
            inert = 1.0 - math.fsum(masses.values())
            entries.append((sorted(masses.items()), inert))
        if all(not atoms for atoms, _ in entries):
            thresholds.append(SmoothedThreshold(0.0, 0.0))
            continue
        tau, a, _ = solve_product_threshold(
            [(atoms, inert) for atoms, inert in entries if atoms], target
        )
        thresholds.append(SmoothedThreshold(tau, a))
    return FtaMatchingPolicy(candidate_probs, thresholds)


def run_fta_matching(
    policy: FtaMatchingPolicy,
    profile: Sequence[int],
    vectors: Sequence[Sequence[float]],
    arrivals: Sequence[Arrival],
    aux: Iterator[float],
) -> TrialOutcome:
    """Each arriving buyer draws a candidate item; if it is unsold and her
    value clears its smoothed threshold she buys it at tau_k."""
    m = len(policy.thresholds)
    n = len(vectors)
    utilities = [0.0] * n
    payments = []
    gained = []
    sale_times: list[Optional[float]] = [None] * m
    sold = [False] * m
    allocation: dict[int, int] = {}
    for a in sort_arrivals(arrivals):
        i = a.buyer
        r = 1.0 - next(aux)  # map [0,1) draw onto (0,1] for the cumulative rule
        k = policy.draw_candidate(i, profile[i], r)
        if k is None or sold[k]:
            continue
        thr = policy.thresholds[k]
        v = vectors[i][k]
        coin = next(aux) if v == thr.tau else None
        if thr.clears(v, coin):
            sold[k] = True
            sale_times[k] = a.time
            allocation[i] = k
            payments.append(thr.tau)
            gained.append(v)
            utilities[i] = v - thr.tau
    return _finish(allocation, utilities, payments, gained, sale_times)
