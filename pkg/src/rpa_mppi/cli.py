"""Command-line entry point.

Subcommands:
    run     -- one navigation trial from a scenario config
    bench   -- the full scenario x planner comparison, CSV/SVG outputs
    verify  -- numerical certification of the cost-field properties

Exit codes: 0 success; 1 infrastructure failure; 2 configuration error;
3 (verify only) property failure. Timeout/collision trial outcomes are data,
not errors. Log level comes from the RPA_MPPI_LOG environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import analysis, bench, config
from .domain import CostMode, PlannerKind

log = logging.getLogger("rpa_mppi")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_PROPERTY = 3


def _setup_logging() -> None:
    level = os.environ.get("RPA_MPPI_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpa-mppi",
        description="Local-minima-free MPPI navigation: trials, benchmarks, "
        "and cost-field verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a single navigation trial")
    run_p.add_argument("--config", required=True, help="scenario YAML file")
    run_p.add_argument("--out", help="trajectory dump path (default: trial.txt)")
    run_p.add_argument("--seed", type=int, help="override the config seed")
    run_p.add_argument(
        "--planner", choices=[k.value for k in PlannerKind], help="override planner"
    )
    run_p.add_argument("--horizon", type=int, help="override MPPI horizon")
    run_p.add_argument("--alpha", type=float, help="override repulsion coefficient")
    run_p.add_argument(
        "--state-index", type=int, default=0, help="which initial state to use"
    )
    run_p.add_argument("--json", action="store_true", help="machine-readable summary")

    bench_p = sub.add_parser("bench", help="run the benchmark suite")
    bench_p.add_argument(
        "--config", help="suite YAML file (default: built-in three-scenario suite)"
    )
    bench_p.add_argument("--out", default="bench_out", help="output directory")
    bench_p.add_argument(
        "--seed",
        type=int,
        action="append",
        help="seed for the suite (repeatable; overrides config seeds)",
    )
    bench_p.add_argument("--filter", help="only scenarios whose name contains this")
    bench_p.add_argument(
        "--workers", type=int, default=None, help="trial parallelism (default: cores)"
    )
    bench_p.add_argument("--json", action="store_true", help="machine-readable table")
    bench_p.add_argument(
        "--ct-digits", type=int, default=4, help="decimals for the CT column"
    )
    bench_p.add_argument(
        "--no-ct",
        action="store_true",
        help="write NA in the CT column (byte-reproducible CSV; timing is "
        "wall-clock and cannot be seed-deterministic)",
    )

    verify_p = sub.add_parser("verify", help="verify the cost-field properties")
    verify_p.add_argument("--config", help="analysis scene YAML (default: canonical)")
    verify_p.add_argument(
        "--resolution",
        type=float,
        action="append",
        help="grid resolution(s) for the minima search (default: 0.1 and 0.05)",
    )
    verify_p.add_argument("--out", help="directory for the text reports")
    verify_p.add_argument("--seed", type=int, default=0, help="gradient-oracle seed")
    verify_p.add_argument("--json", action="store_true", help="machine-readable report")
    return parser


def _cmd_run(args) -> int:
    cfg = config.load_scenario(args.config)
    if args.planner is not None:
        kind = PlannerKind(args.planner)
        cost = cfg.cost
        if kind is PlannerKind.RPA_MPPI and cost.p_minimum is None:
            raise config.ConfigError(
                "--planner=rpa-mppi needs cost.p_minimum in the config"
            )
        cfg = dataclasses.replace(cfg, planner=kind)
    if args.horizon is not None:
        cfg = dataclasses.replace(
            cfg, mppi=dataclasses.replace(cfg.mppi, horizon=args.horizon)
        )
    if args.alpha is not None:
        cfg = dataclasses.replace(
            cfg, cost=dataclasses.replace(cfg.cost, alpha=args.alpha)
        )
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if not (0 <= args.state_index < len(cfg.initial_states)):
        raise config.ConfigError(
            f"--state-index out of range (config has {len(cfg.initial_states)} states)"
        )

    initial = cfg.initial_states[args.state_index]
    result = bench.run_trial(cfg, initial, cfg.seed)
    out_path = Path(args.out) if args.out else Path("trial.txt")
    result.scenario = "single"
    result.state_index = args.state_index
    result.seed = cfg.seed
    bench.write_trajectory_dump(result, out_path)

    summary = {
        "planner": cfg.planner.value,
        "horizon": cfg.mppi.horizon,
        "alpha": cfg.cost.alpha,
        "seed": cfg.seed,
        "outcome": result.outcome,
        "success_time": result.success_time,
        "path_length": round(result.path_length, 6),
        "steps": result.n_steps,
        "mean_opt_time": round(result.mean_opt_time, 6),
        "trajectory_dump": str(out_path),
    }
    if args.json:
        print(json.dumps(summary))
    else:
        print(
            f"planner={summary['planner']} horizon={summary['horizon']} "
            f"alpha={summary['alpha']} seed={summary['seed']} -> "
            f"outcome={result.outcome} time={result.success_time} "
            f"path_length={result.path_length:.2f} m steps={result.n_steps} "
            f"(dump: {out_path})"
        )
    return EXIT_OK


def _cmd_bench(args) -> int:
    seeds = tuple(args.seed) if args.seed else None
    if args.config:
        suite = config.load_suite(args.config)
        if seeds:
            suite = dataclasses.replace(suite, seeds=seeds)
    else:
        suite = bench.paper_suite(seeds=seeds or (0, 1, 2))
    if args.filter:
        kept = tuple(s for s in suite.scenarios if args.filter in s.name)
        if not kept:
            raise config.ConfigError(
                f"--filter={args.filter!r} matches no scenario in the suite"
            )
        suite = dataclasses.replace(suite, scenarios=kept)

    total = (
        len(suite.scenarios)
        * len(suite.planners)
        * len(suite.initial_states)
        * len(suite.seeds)
    )
    log.info("running %d trials", total)
    table, trials = bench.run_suite(suite, workers=args.workers)
    bench.export_results(
        table,
        trials,
        suite,
        args.out,
        ct_digits=args.ct_digits,
        include_ct=not args.no_ct,
    )
    if args.json:
        print(
            json.dumps(
                [dataclasses.asdict(r) for r in table.rows],
                default=lambda v: None if isinstance(v, float) and math.isnan(v) else v,
            )
        )
    else:
        print(bench.format_table(table, ct_digits=args.ct_digits))
        print(f"\nwrote {Path(args.out) / 'metrics.csv'}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.config:
        scene = config.load_analysis_scene(args.config)
    else:
        scene = analysis.AnalysisScene()
    resolutions = tuple(args.resolution) if args.resolution else (0.1, 0.05)

    reports: dict[str, str] = {}
    failures: list[str] = []

    # Gradient oracle agreement on the obstacle-free field.
    params = scene.cost_params(CostMode.RPA, repulsion_sign=-1)
    n_checked, worst = analysis.gradient_oracle_agreement(
        params, scene.search_region(), n_points=10_000, seed=args.seed
    )
    grad_ok = worst <= 1e-5
    if not grad_ok:
        failures.append(f"gradient oracle disagreement: worst rel err {worst:.3e}")
    reports["gradient_oracle"] = (
        f"gradient-oracle\npoints: {n_checked}\nworst_rel_err: {worst:.3e}\n"
        f"tolerance: 1e-05\npassed: {grad_ok}\n"
    )

    # Both sign conventions of the repulsion term. The adopted convention is
    # -1; +1 (the attractive variant) is expected to fail and is reported
    # for documentation, not gated on.
    adopted_ok = True
    for sign in (-1, +1):
        finest = min(resolutions)
        report = analysis.verify_properties(
            scene, repulsion_sign=sign, grid_resolution=finest
        )
        reports[f"properties_sign{sign:+d}"] = report.to_text()
        if sign == -1:
            adopted_ok = report.all_passed
            if not report.all_passed:
                for c in report.checks:
                    if not c.passed:
                        failures.append(
                            f"{c.name} failed ({c.detail})"
                            + (
                                f" counterexample={c.counterexample}"
                                if c.counterexample
                                else ""
                            )
                        )

    # Entrapment of the conventional cost, and minima counts at every
    # requested resolution for both formulations.
    entrap_ok = True
    for res in resolutions:
        base_report, entrapped = analysis.baseline_entrapment(scene, res)
        reports[f"baseline_minima_res{res:g}"] = base_report.to_text()
        if not entrapped:
            entrap_ok = False
            failures.append(
                f"baseline entrapment not reproduced at resolution {res:g}"
            )
        rpa_report = analysis.grid_local_minima(
            analysis.cost_to_go_field(
                scene, scene.cost_params(CostMode.RPA, repulsion_sign=-1)
            ),
            scene.search_region(),
            res,
        )
        reports[f"rpa_minima_res{res:g}"] = rpa_report.to_text()
        if len(rpa_report.minima) != 1:
            failures.append(
                f"repulsive-potential field has {len(rpa_report.minima)} lattice "
                f"minima at resolution {res:g}, expected exactly 1"
            )

    passed = grad_ok and adopted_ok and entrap_ok and not failures
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in reports.items():
            (out / f"{name}.txt").write_text(text)
    if args.json:
        print(json.dumps({"passed": passed, "failures": failures}))
    else:
        for name, text in reports.items():
            print(f"=== {name} ===")
            print(text)
        if failures:
            print("FAILURES:")
            for f in failures:
                print(f"  - {f}")
        else:
            print("all checks passed (adopted repulsion sign: -1)")
    return EXIT_OK if passed else EXIT_PROPERTY


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "verify":
            return _cmd_verify(args)
        parser.error(f"unknown command {args.command!r}")
    except config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
