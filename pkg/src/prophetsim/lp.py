"""Dense two-phase simplex (Bland's rule) and the configuration LP for XOS
instances: relaxed item constraints, base-price extraction, and the sampling
distributions over buyer sets consumed by the online allocation rule.

The item constraints use `<=` rather than the exact-equality form: equality
can be infeasible when the total demand mass is insufficient, and since
values are nonnegative and the empty set is an allowed configuration, the
relaxation never changes the optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .common import CapacityError, ValidationError
from .instances import Instance
from .valuations import value as xos_value, xos_oracle

_TOL = 1e-9
CONFIG_LP_SUBSET_CAP = 256


class InfeasibleError(Exception):
    pass


class UnboundedError(Exception):
    pass


@dataclass
class LpProblem:
    """maximize c @ x subject to rows (a, rel, rhs) with rel in {"<=", "=="},
    x >= 0."""

    objective: np.ndarray
    constraints: list[tuple[np.ndarray, str, float]]

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        n = self.objective.size
        rows = []
        for a, rel, rhs in self.constraints:
            a = np.asarray(a, dtype=float)
            if a.size != n:
                raise ValidationError("constraint width does not match objective")
            if rel not in ("<=", "=="):
                raise ValidationError(f"unsupported relation {rel!r}")
            if not (np.isfinite(a).all() and math.isfinite(rhs)):
                raise ValidationError("nonfinite coefficients in LP")
            rows.append((a, rel, float(rhs)))
        self.constraints = rows


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _simplex(T: np.ndarray, basis: list[int], cost: np.ndarray) -> None:
    """Maximize cost over the tableau in place, Bland anti-cycling rule."""
    m = T.shape[0]
    while True:
        cb = cost[basis]
        reduced = cb @ T[:, :-1] - cost
        entering = -1
        for j in range(T.shape[1] - 1):
            if reduced[j] < -_TOL:
                entering = j
                break
        if entering < 0:
            return
        ratios = [
            (T[r, -1] / T[r, entering], r)
            for r in range(m)
            if T[r, entering] > _TOL
        ]
        if not ratios:
            raise UnboundedError("objective unbounded above")
        best_ratio = min(ratio for ratio, _ in ratios)
        leaving = min(
            (r for ratio, r in ratios if ratio <= best_ratio + _TOL),
            key=lambda r: basis[r],
        )
        _pivot(T, basis, leaving, entering)


def solve_lp(p: LpProblem) -> tuple[np.ndarray, float]:
    """Primal-feasible optimum of p within ~1e-7, or raises
    InfeasibleError / UnboundedError."""
    n = p.objective.size
    m = len(p.constraints)
    n_slack = sum(1 for _, rel, _ in p.constraints if rel == "<=")
    width = n + n_slack + m + 1  # one artificial per row keeps the setup simple
    T = np.zeros((m, width))
    basis = [0] * m
    slack_at = n
    art_at = n + n_slack
    for r, (a, rel, rhs) in enumerate(p.constraints):
        sign = 1.0 if rhs >= 0 else -1.0
        T[r, :n] = sign * a
        T[r, -1] = sign * rhs
        if rel == "<=":
            T[r, slack_at] = sign
            slack_at += 1
    # Phase 1: artificial in every row (a <= row whose slack has sign +1 and
    # rhs >= 0 could start from its slack, but one uniform scheme is simpler).
    slack_at = n
    for r, (_, rel, rhs) in enumerate(p.constraints):
        if rel == "<=" and rhs >= 0:
            basis[r] = slack_at
        else:
            T[r, art_at + r] = 1.0
            basis[r] = art_at + r
        if rel == "<=":
            slack_at += 1
    phase1 = np.zeros(width - 1)
    phase1[art_at:] = -1.0
    _simplex(T, basis, phase1)
    if -(phase1[basis] @ T[:, -1]) > 1e-7:
        raise InfeasibleError("phase-1 optimum nonzero")
    # Drive any leftover artificial out of the basis, or drop its row.
    keep = []
    for r in range(m):
        if basis[r] >= art_at:
            pivot_col = next(
                (j for j in range(art_at) if abs(T[r, j]) > _TOL), None
            )
            if pivot_col is None:
                continue  # redundant row
            _pivot(T, basis, r, pivot_col)
        keep.append(r)
    T = T[keep][:, [*range(art_at), width - 1]]
    basis = [basis[r] for r in keep]
    cost = np.zeros(art_at)
    cost[:n] = p.objective
    _simplex(T, basis, cost)
    x = np.zeros(art_at)
    x[basis] = T[:, -1]
    return x[:n], float(p.objective @ x[:n])


# Configuration LP -------------------------------------------------------------


@dataclass
class ConfigLpSolution:
    """Optimal mass x[(buyer, support index, item mask)] and its objective."""

    var_index: list[tuple[int, int, int]]
    x: dict[tuple[int, int, int], float]
    objective_value: float

    def mass(self, i: int, k: int, mask: int) -> float:
        return self.x.get((i, k, mask), 0.0)

    def set_distribution(self, inst: Instance, i: int, k: int) -> list[tuple[int, float]]:
        """Sampling distribution over item masks for buyer i at support k:
        mask drawn with probability x / Pr[support k]; residual mass from the
        relaxed item constraints goes to the empty set."""
        pk = inst.buyers[i].probs[k]
        out = []
        used = 0.0
        for (bi, bk, mask), xv in self.x.items():
            if bi == i and bk == k and mask != 0 and xv > _TOL:
                q = min(xv / pk, 1.0 - used)
                out.append((mask, q))
                used += q
        out.append((0, max(0.0, 1.0 - used)))
        return out


def build_configuration_lp(
    inst: Instance, subset_cap: int = CONFIG_LP_SUBSET_CAP
) -> tuple[LpProblem, list[tuple[int, int, int]]]:
    """LP over variables x[i, k, S] for every buyer, support index, and item
    subset S (including the empty set): maximize total supported value with
    per-(i, k) mass fixed to the support probability and at most unit mass
    per item."""
    if inst.kind != "xos":
        raise ValidationError("configuration LP is defined for xos instances")
    m = inst.items
    if (1 << m) > subset_cap:
        raise CapacityError(f"2^m = {1 << m} exceeds subset cap {subset_cap}")
    var_index = []
    objective = []
    for i, buyer in enumerate(inst.buyers):
        for k, v in enumerate(buyer.support):
            for mask in range(1 << m):
                var_index.append((i, k, mask))
                objective.append(xos_value(v, mask))
    nvars = len(var_index)
    col = {key: c for c, key in enumerate(var_index)}
    constraints = []
    for i, buyer in enumerate(inst.buyers):
        for k, pk in enumerate(buyer.probs):
            a = np.zeros(nvars)
            for mask in range(1 << m):
                a[col[(i, k, mask)]] = 1.0
            constraints.append((a, "==", pk))
    for j in range(m):
        a = np.zeros(nvars)
        for c, (_, _, mask) in enumerate(var_index):
            if mask >> j & 1:
                a[c] = 1.0
        constraints.append((a, "<=", 1.0))
    return LpProblem(np.asarray(objective), constraints), var_index


def solve_configuration_lp(inst: Instance, subset_cap: int = CONFIG_LP_SUBSET_CAP) -> ConfigLpSolution:
    problem, var_index = build_configuration_lp(inst, subset_cap)
    xvec, obj = solve_lp(problem)
    x = {
        key: float(v)
        for key, v in zip(var_index, xvec)
        if v > _TOL
    }
    sol = ConfigLpSolution(var_index, x, obj)
    _check_solution(inst, sol)
    return sol


def _check_solution(inst: Instance, sol: ConfigLpSolution) -> None:
    m = inst.items
    for i, buyer in enumerate(inst.buyers):
        for k, pk in enumerate(buyer.probs):
            total = math.fsum(
                v for (bi, bk, _), v in sol.x.items() if bi == i and bk == k
            )
            if abs(total - pk) > 1e-7:
                raise AssertionError(f"mass constraint violated for buyer {i}, support {k}")
    for j in range(m):
        load = math.fsum(v for (_, _, mask), v in sol.x.items() if mask >> j & 1)
        if load > 1 + 1e-7:
            raise AssertionError(f"item {j} overloaded in LP solution")


def xos_base_prices(inst: Instance, sol: ConfigLpSolution) -> list[float]:
    """Per-item base prices from the supporting-clause decomposition of the
    LP mass; their sum equals the LP objective exactly."""
    m = inst.items
    b = [0.0] * m
    for (i, k, mask), xv in sol.x.items():
        if mask == 0 or xv <= 0.0:
            continue
        v = inst.buyers[i].support[k]
        clause = v.clauses[xos_oracle(v, mask)]
        for j in range(m):
            if mask >> j & 1:
                b[j] += clause[j] * xv
    return b
