"""Finite-support nonnegative value distributions.

Sampling, CDF queries, smoothed (randomized tie-breaking) threshold solving,
and exact small-product expectations of the maximum.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .common import CapacityError, ExpectationEstimate, ValidationError

PROB_TOL = 1e-9
_BISECT_TOL = 1e-12


class DiscreteDistribution:
    """Finite list of (value, prob) atoms, values strictly increasing."""

    __slots__ = ("values", "probs", "_cum")

    def __init__(self, atoms: Iterable[tuple[float, float]]):
        atoms = sorted(atoms)
        if not atoms:
            raise ValidationError("distribution needs at least one atom")
        values = [float(v) for v, _ in atoms]
        probs = [float(p) for _, p in atoms]
        for v in values:
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"atom value {v} must be finite and nonnegative")
        for p in probs:
            if not (0 < p <= 1):
                raise ValidationError(f"atom probability {p} outside (0, 1]")
        if any(a >= b for a, b in zip(values, values[1:])):
            raise ValidationError("atom values must be strictly increasing")
        total = math.fsum(probs)
        if abs(total - 1.0) > PROB_TOL:
            raise ValidationError(f"atom probabilities sum to {total}, not 1")
        self.values = values
        self.probs = probs
        self._cum = list(itertools.accumulate(probs))
        self._cum[-1] = 1.0

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DiscreteDistribution)
            and self.values == other.values
            and self.probs == other.probs
        )

    def __repr__(self) -> str:
        pairs = ", ".join(f"{v}: {p}" for v, p in zip(self.values, self.probs))
        return f"DiscreteDistribution({{{pairs}}})"

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values, self.probs))

    def index_from_uniform(self, u: float) -> int:
        """Inverse-CDF atom index for a uniform draw u in [0, 1)."""
        return bisect_right(self._cum, u)

    def sample_index(self, rng: np.random.Generator) -> int:
        return self.index_from_uniform(rng.random())

    def sample(self, rng: np.random.Generator) -> float:
        return self.values[self.sample_index(rng)]

    def cdf(self, x: float) -> float:
        """Pr[v <= x]."""
        i = bisect_right(self.values, x)
        return self._cum[i - 1] if i > 0 else 0.0

    def prob_below(self, x: float) -> float:
        """Pr[v < x]."""
        i = bisect_left(self.values, x)
        return self._cum[i - 1] if i > 0 else 0.0

    def prob_at(self, x: float) -> float:
        """Pr[v = x]."""
        i = bisect_left(self.values, x)
        if i < len(self.values) and self.values[i] == x:
            return self.probs[i]
        return 0.0

    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))


@dataclass(frozen=True)
class SmoothedThreshold:
    """Fixed threshold with randomized tie-breaking at the atom tau.

    A value above tau always clears the threshold; a value exactly equal to
    tau clears it with probability atom_accept_prob.
    """

    tau: float
    atom_accept_prob: float

    def __post_init__(self):
        if self.tau < 0:
            raise ValidationError("tau must be nonnegative")
        if not (0.0 <= self.atom_accept_prob <= 1.0):
            raise ValidationError("atom_accept_prob outside [0, 1]")

    def clears(self, value: float, coin: Optional[float] = None) -> bool:
        """Threshold test for one value; coin is a uniform draw used on ties."""
        if value > self.tau:
            return True
        if value == self.tau:
            if coin is None:
                raise ValueError("tie at tau needs a tie-breaking coin")
            return coin < self.atom_accept_prob
        return False


def solve_product_threshold(
    entries: Sequence[tuple[Sequence[tuple[float, float]], float]],
    target: float,
) -> tuple[float, float, float]:
    """Solve prod_i [inert_i + P_i(v < tau) + (1-a) P_i(v = tau)] = target.

    Each entry is (atoms, inert): atoms are (value, mass) pairs of the
    buyable part of buyer i's value distribution and inert is the mass that
    can never clear any threshold (e.g. "no candidate drawn").
    Returns (tau, a, achieved). When even the most permissive configuration
    (tau at the lowest atom, a = 1) leaves the product above target, that
    configuration is returned with its achieved product.
    """
    if not (0 < target < 1):
        raise ValidationError("target must lie in (0, 1)")
    prepared = []
    grid = set()
    for atoms, inert in entries:
        atoms = sorted(atoms)
        if inert < -PROB_TOL:
            raise ValidationError("inert mass must be nonnegative")
        prepared.append((atoms, max(inert, 0.0)))
        grid.update(v for v, _ in atoms)
    if not grid:
        raise ValidationError("no atoms to place a threshold on")
    grid = sorted(grid)

    def below(tau: float, a: float) -> float:
        prod = 1.0
        for atoms, inert in prepared:
            p = inert
            for v, mass in atoms:
                if v < tau:
                    p += mass
                elif v == tau:
                    p += (1.0 - a) * mass
            prod *= p
        return prod

    floor = below(grid[0], 1.0)
    if floor > target:
        # Unreachable: sell as aggressively as possible.
        return grid[0], 1.0, floor
    for tau in grid:
        if below(tau, 0.0) >= target:
            if len(prepared) == 1 and prepared[0][1] == 0.0:
                atoms = prepared[0][0]
                lt = sum(m for v, m in atoms if v < tau)
                eq = sum(m for v, m in atoms if v == tau)
                a = 1.0 - (target - lt) / eq if eq > 0 else 0.0
                a = min(1.0, max(0.0, a))
            else:
                lo, hi = 0.0, 1.0  # below() decreasing in a
                while hi - lo > _BISECT_TOL:
                    mid = 0.5 * (lo + hi)
                    if below(tau, mid) > target:
                        lo = mid
                    else:
                        hi = mid
                a = 0.5 * (lo + hi)
            return tau, a, below(tau, a)
    raise AssertionError("unreachable: product attains 1 at the top atom")


def smoothed_threshold(
    dists: Sequence[DiscreteDistribution], target: float
) -> SmoothedThreshold:
    """Threshold (tau, a) with induced no-sale probability equal to target.

    tau lies on the union atom grid; the per-buyer "below threshold"
    probability is Pr(v < tau) + (1-a) Pr(v = tau).
    """
    if not dists:
        raise ValidationError("need at least one distribution")
    if target == 1.0:
        top = max(d.values[-1] for d in dists)
        return SmoothedThreshold(top + 1.0, 0.0)
    tau, a, achieved = solve_product_threshold(
        [(d.atoms, 0.0) for d in dists], target
    )
    if abs(achieved - target) > PROB_TOL:
        raise AssertionError(f"threshold solve missed target: {achieved} vs {target}")
    return SmoothedThreshold(tau, a)


def expected_max(
    dists: Sequence[DiscreteDistribution],
    budget: int = 1_000_000,
    rng: Optional[np.random.Generator] = None,
    mc_trials: int = 200_000,
) -> ExpectationEstimate:
    """E[max_i v_i]: exact product enumeration when affordable, else MC."""
    if not dists:
        raise ValidationError("need at least one distribution")
    size = 1
    for d in dists:
        size *= len(d)
        if size > budget:
            break
    if size <= budget:
        total = []
        for combo in itertools.product(*(d.atoms for d in dists)):
            p = 1.0
            best = 0.0
            for v, q in combo:
                p *= q
                if v > best:
                    best = v
            total.append(p * best)
        return ExpectationEstimate(math.fsum(total))
    if rng is None:
        raise ValueError("Monte Carlo path needs an rng")
    u = rng.random((mc_trials, len(dists)))
    draws = np.empty_like(u)
    for i, d in enumerate(dists):
        idx = np.searchsorted(np.asarray(d._cum), u[:, i], side="right")
        draws[:, i] = np.asarray(d.values)[idx]
    maxima = draws.max(axis=1)
    mean = float(maxima.mean())
    se = float(maxima.std(ddof=1) / math.sqrt(mc_trials))
    return ExpectationEstimate(mean, se, f"mc:{mc_trials}")
