"""Seeded Monte Carlo harness: policy preparation, trial execution, ratio
reports, and empirical survival curves q_j(t).

Reports are deterministic functions of (instance, config): trial uniforms
come from counter-based streams indexed by trial number, aggregation uses
compensated summation in trial-index order, and expected OPT comes from the
offline oracles, so the worker count never changes a single output bit.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .common import ExpectationEstimate, ValidationError
from .distributions import smoothed_threshold
from .instances import Instance
from .lp import solve_configuration_lp, xos_base_prices
from .offline import expected_opt
from .online import (
    Arrival,
    FtaMatchingPolicy,
    TrialOutcome,
    fta_matching_prepare,
    run_fta_matching,
    run_fta_single,
    run_matching_dynamic,
    run_matroid_mps,
    run_single_item_dynamic,
    run_xos_caps,
)
from .pricing import MatroidPricer, matching_base_prices, single_item_base_price
from .streams import OPT_TAG, PRICE_TAG, TrialStream, derived_rng

ALGS = ("dynamic", "fta")
_ACCOUNTING_TOL = 1e-9


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int
    alg: str = "dynamic"
    workers: int = 1
    budget: int = 100_000
    k_samples: int = 512
    q_grid: int = 100

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if self.alg not in ALGS:
            raise ValidationError(f"unknown algorithm {self.alg!r}")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")


@dataclass(frozen=True)
class RatioReport:
    instance: str
    kind: str
    alg: str
    trials: int
    seed: int
    alg_mean: float
    alg_se: float
    opt: ExpectationEstimate
    ratio: float
    ci_lo: float
    ci_hi: float
    welfare_true_mean: Optional[float] = None

    CSV_HEADER = "instance,kind,alg,trials,seed,alg_mean,alg_se,opt_mean,opt_se,ratio,ci_lo,ci_hi"

    def csv_row(self) -> str:
        return ",".join(
            [
                self.instance,
                self.kind,
                self.alg,
                str(self.trials),
                str(self.seed),
                repr(self.alg_mean),
                repr(self.alg_se),
                repr(self.opt.mean),
                repr(self.opt.std_error),
                repr(self.ratio),
                repr(self.ci_lo),
                repr(self.ci_hi),
            ]
        )


@dataclass
class QCurve:
    """Per-item survival estimates on a uniform time grid.

    qhat[j][g] estimates Pr[item j unsold strictly before grid[g]]; se[j][g]
    is the binomial standard error. residual[g] = sum_j qhat[j][g] * b_j when
    per-item base prices are available.
    """

    grid: list[float]
    qhat: list[list[float]]
    se: list[list[float]]
    residual: Optional[list[float]] = None


def sample_arrivals(n: int, rng: np.random.Generator) -> list[Arrival]:
    """n iid uniform arrival times, ascending."""
    times = rng.random(n)
    return sorted((Arrival(i, float(t)) for i, t in enumerate(times)), key=lambda a: (a.time, a.buyer))


# Policy preparation -----------------------------------------------------------


@dataclass
class Policy:
    """Everything precomputed before trials start, per (kind, alg)."""

    kind: str
    alg: str
    b: object = None  # scalar / per-item list, per the kind
    threshold: object = None  # SmoothedThreshold (single-item FTA)
    samplers: Optional[dict] = None  # XOS set samplers
    pricer: Optional[MatroidPricer] = None
    matching_policy: Optional[FtaMatchingPolicy] = None
    lp_objective: Optional[float] = None


def prepare_policy(inst: Instance, cfg: SimConfig) -> Policy:
    rng = derived_rng(cfg.seed, PRICE_TAG)
    if inst.kind == "single_item":
        if cfg.alg == "fta":
            return Policy(inst.kind, cfg.alg, threshold=smoothed_threshold(inst.buyers, 1.0 / math.e))
        return Policy(
            inst.kind, cfg.alg, b=single_item_base_price(inst.buyers, budget=cfg.budget, rng=rng)
        )
    if inst.kind == "matching":
        if cfg.alg == "fta":
            return Policy(
                inst.kind,
                cfg.alg,
                matching_policy=fta_matching_prepare(inst, budget=cfg.budget, rng=rng),
            )
        return Policy(inst.kind, cfg.alg, b=matching_base_prices(inst, budget=cfg.budget, rng=rng))
    if inst.kind == "matroid":
        if cfg.alg == "fta":
            raise ValidationError("fixed-threshold mode is not defined for matroid instances")
        pricer = MatroidPricer(
            inst.matroid,
            inst.buyers,
            exact_budget=cfg.budget,
            panel_size=cfg.k_samples,
            seed=cfg.seed,
        )
        return Policy(inst.kind, cfg.alg, pricer=pricer)
    # xos
    if cfg.alg == "fta":
        raise ValidationError("fixed-threshold mode is not defined for xos instances")
    sol = solve_configuration_lp(inst)
    b = xos_base_prices(inst, sol)
    samplers = {}
    for i, buyer in enumerate(inst.buyers):
        for k in range(len(buyer)):
            dist = sol.set_distribution(inst, i, k)
            masks = [mask for mask, _ in dist]
            cum = []
            acc = 0.0
            for _, q in dist:
                acc += q
                cum.append(acc)
            cum[-1] = 1.0
            samplers[(i, k)] = (cum, masks)
    return Policy(inst.kind, cfg.alg, b=b, samplers=samplers, lp_objective=sol.objective_value)


# Trial execution --------------------------------------------------------------


def run_one_trial(inst: Instance, policy: Policy, row: Sequence[float]) -> TrialOutcome:
    n = inst.n
    profile = inst.profile_from_uniforms(row[:n])
    arrivals = [Arrival(i, float(row[n + i])) for i in range(n)]
    aux = iter(row[2 * n :])
    if policy.kind == "single_item":
        values = inst.scalar_values(profile)
        if policy.alg == "fta":
            out = run_fta_single(policy.threshold, values, arrivals, aux)
        else:
            out = run_single_item_dynamic(policy.b, values, arrivals)
    elif policy.kind == "matching":
        vectors = inst.value_vectors(profile)
        if policy.alg == "fta":
            out = run_fta_matching(policy.matching_policy, profile, vectors, arrivals, aux)
        else:
            out = run_matching_dynamic(policy.b, vectors, arrivals)
    elif policy.kind == "matroid":
        out = run_matroid_mps(inst.matroid, policy.pricer, inst.scalar_values(profile), arrivals)
    else:
        out = run_xos_caps(
            policy.b, policy.samplers, inst.xos_valuations(profile), profile, arrivals, aux
        )
    _check_outcome(inst, policy, out)
    return out


def _check_outcome(inst: Instance, policy: Policy, out: TrialOutcome) -> None:
    if abs(out.welfare - (out.revenue + out.utility)) > _ACCOUNTING_TOL * (1.0 + abs(out.welfare)):
        raise AssertionError("accounting identity violated: welfare != revenue + utility")
    if policy.kind == "matroid":
        if not inst.matroid.is_independent(out.allocation):
            raise AssertionError("accepted set not independent")
    elif policy.kind == "matching":
        items = list(out.allocation.values())
        if len(items) != len(set(items)):
            raise AssertionError("matching allocation not injective")
    elif policy.kind == "xos":
        combined = 0
        for mask in out.allocation.values():
            if combined & mask:
                raise AssertionError("xos allocations overlap")
            combined |= mask


def _run_range(
    inst: Instance,
    policy: Policy,
    seed: int,
    start: int,
    stop: int,
    collect_sale_times: bool,
):
    stream = TrialStream(seed, 4 * inst.n)
    welfares = np.empty(stop - start)
    true_welfares = np.empty(stop - start) if policy.kind == "xos" else None
    sale_times = [] if collect_sale_times else None
    for t in range(start, stop):
        out = run_one_trial(inst, policy, stream.row(t))
        welfares[t - start] = out.welfare
        if true_welfares is not None:
            true_welfares[t - start] = out.welfare_true
        if sale_times is not None:
            sale_times.append(out.item_sale_times)
    return welfares, true_welfares, sale_times


def _collect_trials(inst: Instance, policy: Policy, cfg: SimConfig, collect_sale_times=False):
    """Per-trial welfare arrays in trial-index order, optionally with per-item
    sale times, split across processes in contiguous chunks."""
    T = cfg.trials
    if cfg.workers == 1 or T < 4 * cfg.workers:
        return _run_range(inst, policy, cfg.seed, 0, T, collect_sale_times)
    bounds = [T * w // cfg.workers for w in range(cfg.workers + 1)]
    chunks = [(bounds[w], bounds[w + 1]) for w in range(cfg.workers)]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [
            pool.submit(_run_range, inst, policy, cfg.seed, a, b, collect_sale_times)
            for a, b in chunks
        ]
        parts = [f.result() for f in futures]
    welfares = np.concatenate([p[0] for p in parts])
    true_welfares = (
        np.concatenate([p[1] for p in parts]) if parts[0][1] is not None else None
    )
    sale_times = None
    if collect_sale_times:
        sale_times = [st for p in parts for st in p[2]]
    return welfares, true_welfares, sale_times


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    """Compensated mean and standard error, independent of chunking."""
    T = len(values)
    mean = math.fsum(values) / T
    if T < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (T - 1)
    return mean, math.sqrt(var / T)


def run_trials(inst: Instance, cfg: SimConfig) -> RatioReport:
    policy = prepare_policy(inst, cfg)
    welfares, true_welfares, _ = _collect_trials(inst, policy, cfg)
    alg_mean, alg_se = _mean_se(welfares)
    opt = expected_opt(inst, budget=cfg.budget, rng=derived_rng(cfg.seed, OPT_TAG))
    ratio = alg_mean / opt.mean
    # Delta-method CI for a ratio of independent estimates.
    se_ratio = math.sqrt(
        (alg_se / opt.mean) ** 2 + (alg_mean * opt.std_error / opt.mean**2) ** 2
    )
    true_mean = math.fsum(true_welfares) / cfg.trials if true_welfares is not None else None
    return RatioReport(
        instance=inst.name,
        kind=inst.kind,
        alg=cfg.alg,
        trials=cfg.trials,
        seed=cfg.seed,
        alg_mean=alg_mean,
        alg_se=alg_se,
        opt=opt,
        ratio=ratio,
        ci_lo=ratio - 1.96 * se_ratio,
        ci_hi=ratio + 1.96 * se_ratio,
        welfare_true_mean=true_mean,
    )


def track_q(inst: Instance, cfg: SimConfig) -> QCurve:
    """Empirical per-item survival curves: the fraction of trials in which
    each item is still unsold strictly before each grid time."""
    if inst.kind == "matroid":
        n_items = inst.n  # per-element survival
    elif inst.kind == "single_item":
        n_items = 1
    else:
        n_items = inst.items
    policy = prepare_policy(inst, cfg)
    _, _, sale_times = _collect_trials(inst, policy, cfg, collect_sale_times=True)
    G = cfg.q_grid
    grid = [g / G for g in range(G + 1)]
    T = cfg.trials
    qhat = []
    se = []
    for j in range(n_items):
        times = sorted(st[j] for st in sale_times if st[j] is not None)
        # unsold strictly before t  <=>  sale time >= t (or no sale)
        col_q = []
        col_se = []
        for t in grid:
            sold_before = bisect_left(times, t)
            q = 1.0 - sold_before / T
            col_q.append(q)
            col_se.append(math.sqrt(q * (1.0 - q) / T))
        qhat.append(col_q)
        se.append(col_se)
    residual = None
    if isinstance(policy.b, (list, tuple)):
        residual = [
            math.fsum(policy.b[j] * qhat[j][g] for j in range(n_items))
            for g in range(G + 1)
        ]
    elif policy.kind == "single_item" and policy.alg == "dynamic":
        residual = [policy.b * qhat[0][g] for g in range(G + 1)]
    return QCurve(grid, qhat, se, residual)
