"""Command-line interface.

Subcommands: simulate, prices, qcurve, hardness, opt, gen. Reports are CSV
(stdout, or --out FILE); when --out is given a matplotlib figure is rendered
next to it with the same stem and a .png suffix.

Exit codes: 0 success, 1 validation/runtime error, 2 enumeration capacity
exceeded, 64 usage error. Randomized subcommands need --seed or the SEED
environment variable; there is no hidden entropy source.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional

from .common import CapacityError, ValidationError
from .hardness import fta_sweep, hard_iid_instance
from .instances import (
    gen_matching,
    gen_matroid,
    gen_single_item,
    gen_xos,
    instance_to_json,
    load_instance,
    save_instance,
)
from .matroids import GraphicMatroid, PartitionMatroid, UniformMatroid
from .offline import expected_opt
from .simulation import RatioReport, SimConfig, prepare_policy, run_trials, track_q
from .streams import GEN_TAG, OPT_TAG, derived_rng


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="prophetsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_instance=True):
        if needs_instance:
            p.add_argument("--instance", required=True, help="instance JSON file")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (or env SEED)")
        p.add_argument("--budget", type=int, default=100_000, help="exact-enumeration cap")
        p.add_argument("--out", default=None, help="CSV output path (default stdout)")

    p = sub.add_parser("simulate", help="estimate the competitive ratio")
    common(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--alg", choices=("dynamic", "fta"), default="dynamic")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--k-samples", type=int, default=512, help="matroid price panel size")

    p = sub.add_parser("prices", help="emit base prices")
    common(p)
    p.add_argument("--alg", choices=("dynamic", "fta"), default="dynamic")
    p.add_argument("--k-samples", type=int, default=512)

    p = sub.add_parser("qcurve", help="empirical per-item survival curves")
    common(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--alg", choices=("dynamic", "fta"), default="fta")
    p.add_argument("--grid", type=int, default=100, help="number of grid intervals")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--k-samples", type=int, default=512)

    p = sub.add_parser("hardness", help="fixed-threshold sweep on the hard iid family")
    p.add_argument("--n", type=int, required=True, action="append", help="repeatable")
    p.add_argument("--grid", type=int, default=2000, help="sweep resolution")
    p.add_argument("--out", default=None)

    p = sub.add_parser("opt", help="expected offline optimum")
    common(p)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--kind", choices=("single_item", "matching", "xos", "matroid", "hard"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None, help="items (matching/xos)")
    p.add_argument("--support", type=int, default=3)
    p.add_argument(
        "--matroid",
        default="uniform",
        help="matroid kind for --kind matroid: uniform:k | partition | graphic-complete:V",
    )
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--name", default=None)
    p.add_argument("--out", default=None, help="instance JSON path (default stdout)")
    return parser


def _require_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SEED")
    if env is not None:
        return int(env)
    raise ValidationError("no seed: pass --seed or set the SEED environment variable")


def _emit(lines: list[str], out: Optional[str]) -> None:
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _figure_path(out: Optional[str]) -> Optional[str]:
    return str(Path(out).with_suffix(".png")) if out else None


def _cmd_simulate(args) -> None:
    inst = load_instance(args.instance)
    cfg = SimConfig(
        trials=args.trials,
        seed=_require_seed(args),
        alg=args.alg,
        workers=args.workers,
        budget=args.budget,
        k_samples=args.k_samples,
    )
    report = run_trials(inst, cfg)
    _emit([RatioReport.CSV_HEADER, report.csv_row()], args.out)
    fig = _figure_path(args.out)
    if fig:
        from .plots import plot_ratios

        plot_ratios([report], fig)


def _cmd_prices(args) -> None:
    inst = load_instance(args.instance)
    seed = args.seed if args.seed is not None else int(os.environ.get("SEED", "0"))
    cfg = SimConfig(
        trials=1, seed=seed, alg=args.alg, budget=args.budget, k_samples=args.k_samples
    )
    policy = prepare_policy(inst, cfg)
    lines = ["item,price"]
    if inst.kind == "single_item":
        if args.alg == "fta":
            lines.append(f"0,{policy.threshold.tau!r}")
        else:
            lines.append(f"0,{policy.b!r}")
    elif inst.kind == "matroid":
        for i in range(inst.n):
            lines.append(f"{i},{policy.pricer.base_price(frozenset(), i)!r}")
    elif args.alg == "fta":
        for j, thr in enumerate(policy.matching_policy.thresholds):
            lines.append(f"{j},{thr.tau!r}")
    else:
        for j, b in enumerate(policy.b):
            lines.append(f"{j},{b!r}")
    _emit(lines, args.out)


def _cmd_qcurve(args) -> None:
    inst = load_instance(args.instance)
    cfg = SimConfig(
        trials=args.trials,
        seed=_require_seed(args),
        alg=args.alg,
        workers=args.workers,
        budget=args.budget,
        k_samples=args.k_samples,
        q_grid=args.grid,
    )
    curve = track_q(inst, cfg)
    lines = ["item,t,qhat,se"]
    for j, (col_q, col_se) in enumerate(zip(curve.qhat, curve.se)):
        for t, q, s in zip(curve.grid, col_q, col_se):
            lines.append(f"{j},{t!r},{q!r},{s!r}")
    _emit(lines, args.out)
    fig = _figure_path(args.out)
    if fig:
        from .plots import plot_qcurve

        plot_qcurve(curve, fig)


def _cmd_hardness(args) -> None:
    lines = ["n,best_ratio,best_p,bound"]
    sweeps = []
    for n in args.n:
        sweep = fta_sweep(n, grid_points=args.grid)
        sweeps.append(sweep)
        lines.append(f"{n},{sweep.best_ratio!r},{sweep.best_p!r},{sweep.bound!r}")
    _emit(lines, args.out)
    fig = _figure_path(args.out)
    if fig:
        from .plots import plot_sweep

        plot_sweep(sweeps[-1], fig)


def _cmd_opt(args) -> None:
    inst = load_instance(args.instance)
    seed = args.seed if args.seed is not None else int(os.environ.get("SEED", "0"))
    est = expected_opt(inst, budget=args.budget, rng=derived_rng(seed, OPT_TAG))
    _emit(
        [
            "instance,kind,opt_mean,opt_se,method",
            f"{inst.name},{inst.kind},{est.mean!r},{est.std_error!r},{est.method}",
        ],
        args.out,
    )


def _parse_gen_matroid(spec: str, n: int):
    if spec.startswith("uniform"):
        k = int(spec.split(":")[1]) if ":" in spec else max(1, n // 2)
        return UniformMatroid(n, k)
    if spec == "partition":
        return PartitionMatroid([i % max(1, n // 2) for i in range(n)], [1] * max(1, n // 2))
    if spec.startswith("graphic-complete"):
        V = int(spec.split(":")[1])
        edges = [(u, v) for u in range(V) for v in range(u + 1, V)]
        return GraphicMatroid(V, edges)
    raise ValidationError(f"unknown matroid spec {spec!r}")


def _cmd_gen(args) -> None:
    if args.kind == "hard":
        inst = hard_iid_instance(args.n)
    else:
        rng = derived_rng(_require_seed(args), GEN_TAG)
        if args.kind == "single_item":
            inst = gen_single_item(rng, args.n, support=args.support)
        elif args.kind == "matching":
            m = args.m if args.m is not None else args.n
            inst = gen_matching(rng, args.n, m, support=args.support)
        elif args.kind == "xos":
            m = args.m if args.m is not None else args.n
            inst = gen_xos(rng, args.n, m, support=args.support)
        else:
            matroid = _parse_gen_matroid(args.matroid, args.n)
            inst = gen_matroid(rng, matroid, support=args.support)
    if args.name:
        inst.name = args.name
    if args.out is None:
        import json

        sys.stdout.write(json.dumps(instance_to_json(inst), indent=2) + "\n")
    else:
        save_instance(inst, args.out)


_COMMANDS = {
    "simulate": _cmd_simulate,
    "prices": _cmd_prices,
    "qcurve": _cmd_qcurve,
    "hardness": _cmd_hardness,
    "opt": _cmd_opt,
    "gen": _cmd_gen,
}


def dispatch(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 64
    try:
        _COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
