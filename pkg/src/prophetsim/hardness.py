"""The iid two-atom family on which no fixed-threshold algorithm beats
1 - 1/e, with closed-form E[OPT] and E[ALG] and an exhaustive threshold
sweep.

Every buyer independently takes the high value n/(e-1) with probability
1/n^2 and the low value (e-2)/(e-1) otherwise. A fixed (smoothed) threshold
is fully described by the per-buyer skip probability p = Pr[buyer does not
clear it]:

  * tau below the low atom: everyone clears, p = 0;
  * tau strictly between the atoms: only the high value clears,
    p = 1 - 1/n^2;
  * tau at the low atom with acceptance randomization: p sweeps the whole
    interval [0, 1 - 1/n^2].

The first clearing buyer in arrival order buys, so
E[ALG](p) = (1 + p + ... + p^{n-1}) * E[v * 1{clears}].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .common import ValidationError
from .distributions import DiscreteDistribution
from .instances import Instance

E = math.e


def low_value() -> float:
    return (E - 2.0) / (E - 1.0)


def high_value(n: int) -> float:
    return n / (E - 1.0)


def hard_iid_instance(n: int) -> Instance:
    """n iid buyers: value n/(e-1) w.p. 1/n^2, else (e-2)/(e-1)."""
    if n < 2:
        raise ValidationError("hard instance needs n >= 2")
    p_high = 1.0 / n**2
    dist = DiscreteDistribution([(low_value(), 1.0 - p_high), (high_value(n), p_high)])
    return Instance("single_item", [dist] * n, name=f"hard-iid-{n}")


def hard_exact_opt(n: int) -> float:
    """E[max_i v_i] in closed form: the max is high unless every buyer drew
    low, which happens with probability (1 - 1/n^2)^n."""
    if n < 2:
        raise ValidationError("hard instance needs n >= 2")
    all_low = math.exp(n * math.log1p(-1.0 / n**2))
    return all_low * low_value() + (1.0 - all_low) * high_value(n)


def fta_value(n: int, p: float) -> float:
    """Closed-form E[ALG] for the low-atom threshold with per-buyer skip
    probability p in [0, 1 - 1/n^2]."""
    p_high = 1.0 / n**2
    if not (-1e-12 <= p <= 1.0 - p_high + 1e-12):
        raise ValidationError(f"skip probability {p} outside [0, 1 - 1/n^2]")
    p = min(max(p, 0.0), 1.0 - p_high)
    # E[v * 1{clears}]: high always clears; low clears with the leftover mass.
    clear_value = p_high * high_value(n) + (1.0 - p_high - p) * low_value()
    if p == 0.0:
        expected_tries = 1.0
    else:
        # (1 - p^n) / (1 - p); log1p keeps p = 1 - c/n accurate for tiny c/n.
        expected_tries = -math.expm1(n * math.log1p(p - 1.0)) / (1.0 - p)
    return expected_tries * clear_value


def high_only_value(n: int) -> float:
    """E[ALG] for a threshold strictly between the atoms (only high clears)."""
    return fta_value(n, 1.0 - 1.0 / n**2)


def accept_all_value(n: int) -> float:
    """E[ALG] for a threshold below the low atom (first buyer always buys)."""
    return fta_value(n, 0.0)


@dataclass(frozen=True)
class SweepResult:
    n: int
    opt: float
    best_p: float
    best_ratio: float
    accept_all_ratio: float
    high_only_ratio: float
    grid: list[float]
    ratios: list[float]

    @property
    def bound(self) -> float:
        """The limiting benchmark 1 - 1/e."""
        return 1.0 - 1.0 / E


def fta_sweep(n: int, grid_points: int = 2000) -> SweepResult:
    """Maximize the closed-form ratio over every fixed-threshold regime.

    The low-atom regime is swept over p on a uniform grid joined with a
    refinement p = 1 - c/n for c near 1, where the asymptotic maximizer of
    (1 - e^{-c})(e - 2 + 1/c)/(e - 1) sits.
    """
    if n < 2:
        raise ValidationError("hard instance needs n >= 2")
    if grid_points < 1000:
        raise ValidationError("grid resolution must be >= 1000")
    opt = hard_exact_opt(n)
    p_max = 1.0 - 1.0 / n**2
    grid = list(np.linspace(0.0, p_max, grid_points))
    grid.extend(
        1.0 - c / n for c in np.linspace(0.25, 4.0, grid_points) if 0.0 <= 1.0 - c / n <= p_max
    )
    grid.extend(
        1.0 - c / n for c in np.linspace(0.9, 1.1, grid_points) if 0.0 <= 1.0 - c / n <= p_max
    )
    grid = sorted(set(float(p) for p in grid))
    ratios = [fta_value(n, p) / opt for p in grid]
    best_idx = max(range(len(grid)), key=lambda i: ratios[i])
    return SweepResult(
        n=n,
        opt=opt,
        best_p=grid[best_idx],
        best_ratio=ratios[best_idx],
        accept_all_ratio=accept_all_value(n) / opt,
        high_only_ratio=high_only_value(n) / opt,
        grid=grid,
        ratios=ratios,
    )
