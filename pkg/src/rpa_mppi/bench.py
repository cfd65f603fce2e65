"""Benchmark suite: obstacle-width scenarios x initial states x planners,
with success rate (SR), relative difference in success time (RDST) and path
length (RDPL) vs the A*-guided reference, and per-step optimization time (CT).

Scenario geometry note: the benchmark worlds below are reconstructions (the
source experiments publish initial states, obstacle margin, goal tolerance and
the repulsion point, but not the exact arena extent, obstacle sizes or goal
coordinates). All exported artifacts label them as reconstructed defaults.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import mppi as mppi_mod
from . import planners as astar_mod
from .costs import collides_true
from .domain import (
    AStarParams,
    CostMode,
    CostParams,
    MppiParams,
    PlannerKind,
    RectObstacle,
    ScenarioConfig,
    State,
    World,
)
from .dynamics import step

REFERENCE_PLANNER = "astar-mppi"

OUTCOME_SUCCESS = "success"
OUTCOME_TIMEOUT = "timeout"
OUTCOME_COLLISION = "collision"

CSV_HEADER = ("scenario", "planner", "horizon", "SR", "RDST", "RDPL", "CT")


@dataclass(frozen=True)
class BenchScenario:
    name: str
    world: World
    p_minimum: tuple[float, float]


@dataclass(frozen=True)
class BenchPlanner:
    name: str
    kind: PlannerKind
    horizon: int


@dataclass(frozen=True)
class SuiteConfig:
    scenarios: tuple[BenchScenario, ...]
    planners: tuple[BenchPlanner, ...]
    initial_states: tuple[State, ...]
    seeds: tuple[int, ...]
    mppi: MppiParams = MppiParams()
    astar: AStarParams = AStarParams()
    alpha: float = 0.75
    w_obst: float = 1.0e6
    repulsion_sign: int = -1
    time_limit: float = 50.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "planners", tuple(self.planners))
        object.__setattr__(self, "initial_states", tuple(self.initial_states))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))


@dataclass
class TrialResult:
    scenario: str
    planner: str
    horizon: int
    state_index: int
    seed: int
    outcome: str
    success_time: float | None
    path_length: float
    n_steps: int
    mean_opt_time: float  # per-step optimization incl. amortized guidance
    mean_plan_time: float  # controller-only share
    mean_guidance_time: float  # amortized path-search share (A*-guided only)
    trajectory: np.ndarray  # (n_steps + 1, 3)
    controls: np.ndarray  # (n_steps, 2)

    @property
    def succeeded(self) -> bool:
        return self.outcome == OUTCOME_SUCCESS


@dataclass(frozen=True)
class MetricsRow:
    scenario: str
    planner: str
    horizon: int
    sr: float  # percent
    rdst: float  # percent; nan when no common successes; 0 for the reference
    rdpl: float
    ct: float  # seconds per step
    n_common: int = 0  # size of the RDST/RDPL pairing set


@dataclass(frozen=True)
class MetricsTable:
    rows: tuple[MetricsRow, ...]

    def row(self, scenario: str, planner: str) -> MetricsRow:
        for r in self.rows:
            if r.scenario == scenario and r.planner == planner:
                return r
        raise KeyError((scenario, planner))


# Reconstructed benchmark geometry: 20 x 20 m arena, obstacle centered on
# x = 10 with its bottom edge at y = 9.5 (so the margin-inflated edge, where
# the entrapment point sits, is y = 9.0), goal at (10, 18).
ARENA_BOUNDS = (0.0, 0.0, 20.0, 20.0)
ARENA_GOAL = (10.0, 18.0)
OBSTACLE_CENTER = (10.0, 10.0)
OBSTACLE_HEIGHT = 1.0
SAFETY_MARGIN = 0.5
P_MINIMUM = (10.0, 9.0)
SCENARIO_WIDTHS = {"short-wid": 4.0, "middle-wid": 10.0, "long-wid": 16.0}

INITIAL_POSITIONS = ((10.0, 1.0), (1.0, 1.0), (19.0, 1.0), (10.0, 8.5), (1.0, 8.5), (19.0, 8.5))
INITIAL_HEADINGS = (math.pi / 4, math.pi / 2, 5 * math.pi / 4, 3 * math.pi / 2)


def paper_initial_states() -> tuple[State, ...]:
    """The 24 benchmark start states: 6 positions x 4 headings."""
    return tuple(
        State(x, y, th) for x, y in INITIAL_POSITIONS for th in INITIAL_HEADINGS
    )


def make_scenario_world(width: float) -> World:
    return World(
        obstacles=(
            RectObstacle(
                center=OBSTACLE_CENTER,
                width=width,
                height=OBSTACLE_HEIGHT,
                safety_margin=SAFETY_MARGIN,
            ),
        ),
        goal=ARENA_GOAL,
        goal_tolerance=1.0,
        bounds=ARENA_BOUNDS,
    )


def paper_planners() -> tuple[BenchPlanner, ...]:
    return (
        BenchPlanner(REFERENCE_PLANNER, PlannerKind.ASTAR_MPPI, 50),
        BenchPlanner("std-mppi-50", PlannerKind.STD_MPPI, 50),
        BenchPlanner("std-mppi-150", PlannerKind.STD_MPPI, 150),
        BenchPlanner("rpa-mppi", PlannerKind.RPA_MPPI, 50),
    )


def paper_suite(seeds=(0, 1, 2)) -> SuiteConfig:
    """The full three-scenario, four-planner comparison."""
    return SuiteConfig(
        scenarios=tuple(
            BenchScenario(name, make_scenario_world(w), P_MINIMUM)
            for name, w in SCENARIO_WIDTHS.items()
        ),
        planners=paper_planners(),
        initial_states=paper_initial_states(),
        seeds=tuple(seeds),
    )


def misspecified_suite(seeds=(0, 1, 2), offset=(2.0, 0.0)) -> SuiteConfig:
    """Long-wid scenario with the repulsion point deliberately offset."""
    bad_minimum = (P_MINIMUM[0] + offset[0], P_MINIMUM[1] + offset[1])
    return SuiteConfig(
        scenarios=(
            BenchScenario(
                "long-wid-misspec",
                make_scenario_world(SCENARIO_WIDTHS["long-wid"]),
                bad_minimum,
            ),
        ),
        planners=(BenchPlanner("rpa-mppi", PlannerKind.RPA_MPPI, 50),),
        initial_states=paper_initial_states(),
        seeds=tuple(seeds),
    )


def _cost_params_for(
    kind: PlannerKind, world: World, p_minimum, alpha, w_obst, repulsion_sign
) -> CostParams:
    if kind is PlannerKind.RPA_MPPI:
        return CostParams(
            mode=CostMode.RPA,
            p_goal=world.goal,
            p_minimum=p_minimum,
            alpha=alpha,
            w_obst=w_obst,
            repulsion_sign=repulsion_sign,
        )
    return CostParams(mode=CostMode.BASELINE, p_goal=world.goal, w_obst=w_obst)


def _guidance_world(world: World, clearance: float) -> World:
    """World with obstacle margins grown by the A* clearance (grid use only)."""
    if clearance <= 0:
        return world
    obstacles = tuple(
        replace(o, safety_margin=o.safety_margin + clearance) for o in world.obstacles
    )
    return replace(world, obstacles=obstacles)


def _nearest_free_cell(grid: astar_mod.GridMap, cell):
    """Closest free cell by ring search; the robot cell can rasterize blocked
    while the robot itself is still collision-free near a boundary."""
    if not grid.blocked(cell):
        return cell
    nx, ny = grid.shape
    for radius in range(1, max(nx, ny)):
        best = None
        for di in range(-radius, radius + 1):
            for dj in range(-radius, radius + 1):
                if max(abs(di), abs(dj)) != radius:
                    continue
                ni, nj = cell[0] + di, cell[1] + dj
                if 0 <= ni < nx and 0 <= nj < ny and not grid.occupancy[ni, nj]:
                    cand = (ni, nj)
                    if best is None or cand < best:
                        best = cand
        if best is not None:
            return best
    raise astar_mod.InfeasibleGrid("no free cell in grid")


def run_trial(config: ScenarioConfig, initial: State, seed) -> TrialResult:
    """Closed loop: plan -> apply first control -> step simulator -> check.

    Termination checks (success, then collision, then timeout) precede motion,
    so a robot starting inside the goal tolerance succeeds immediately. For the
    A*-guided planner the reference path is searched once at the trial start
    and the subgoal is re-selected along it every step; the search cost is
    amortized into the per-step optimization time.
    """
    world = config.world
    dt = config.mppi.dt
    max_steps = config.max_steps
    goal = world.goal
    kind = config.planner

    cost_params = _cost_params_for(
        kind,
        world,
        config.cost.p_minimum,
        config.cost.alpha,
        config.cost.w_obst,
        config.cost.repulsion_sign,
    )
    planner_state = mppi_mod.PlannerState.from_seed(config.mppi, seed)

    path = None
    path_index = 0
    search_time = 0.0
    if kind is PlannerKind.ASTAR_MPPI:
        t0 = time.perf_counter()
        try:
            grid = astar_mod.rasterize(
                _guidance_world(world, config.astar.clearance),
                config.astar.grid_resolution,
            )
        except ValueError:
            # Clearance made the grid (or the goal) infeasible; plan without it.
            grid = astar_mod.rasterize(world, config.astar.grid_resolution)
        start_cell = _nearest_free_cell(grid, grid.cell_of(initial.x, initial.y))
        path = astar_mod.astar(grid, start_cell, grid.cell_of(*goal))
        search_time = time.perf_counter() - t0

    state = initial
    states = [(state.x, state.y, state.theta)]
    controls: list[tuple[float, float]] = []
    plan_times: list[float] = []
    guidance_times: list[float] = []
    path_length = 0.0
    outcome = OUTCOME_TIMEOUT
    success_time = None

    for step_index in range(max_steps + 1):
        if math.hypot(state.x - goal[0], state.y - goal[1]) <= world.goal_tolerance:
            outcome = OUTCOME_SUCCESS
            success_time = step_index * dt
            break
        if collides_true(state.x, state.y, world):
            outcome = OUTCOME_COLLISION
            break
        if step_index == max_steps:
            outcome = OUTCOME_TIMEOUT
            break

        step_params = cost_params
        if path is not None:
            t0 = time.perf_counter()
            path_index = astar_mod.nearest_index(path, state, path_index)
            sg = astar_mod.subgoal(path, state, config.astar.lookahead, path_index)
            guidance_times.append(time.perf_counter() - t0)
            step_params = cost_params.with_goal(sg)

        control, diag = mppi_mod.plan(state, planner_state, world, step_params)
        plan_times.append(diag.opt_time)

        new_state = step(state, control, dt)
        path_length += math.hypot(new_state.x - state.x, new_state.y - state.y)
        state = new_state
        states.append((state.x, state.y, state.theta))
        controls.append((control.v, control.omega))

    n_steps = len(controls)
    total_plan = float(sum(plan_times))
    total_guidance = float(sum(guidance_times)) + search_time
    return TrialResult(
        scenario="",
        planner=kind.value,
        horizon=config.mppi.horizon,
        state_index=-1,
        seed=int(seed) if np.isscalar(seed) else 0,
        outcome=outcome,
        success_time=success_time,
        path_length=path_length,
        n_steps=n_steps,
        mean_opt_time=(total_plan + total_guidance) / n_steps if n_steps else 0.0,
        mean_plan_time=total_plan / n_steps if n_steps else 0.0,
        mean_guidance_time=total_guidance / n_steps if n_steps else 0.0,
        trajectory=np.asarray(states),
        controls=np.asarray(controls).reshape(n_steps, 2),
    )


@dataclass(frozen=True)
class _TrialSpec:
    scenario: BenchScenario
    planner: BenchPlanner
    state_index: int
    initial: State
    seed: int
    spawn_key: tuple[int, ...]
    suite: SuiteConfig


def _spec_config(spec: _TrialSpec) -> ScenarioConfig:
    suite = spec.suite
    return ScenarioConfig(
        world=spec.scenario.world,
        initial_states=(spec.initial,),
        planner=spec.planner.kind,
        mppi=replace(suite.mppi, horizon=spec.planner.horizon),
        cost=CostParams(
            mode=CostMode.RPA,
            p_goal=spec.scenario.world.goal,
            p_minimum=spec.scenario.p_minimum,
            alpha=suite.alpha,
            w_obst=suite.w_obst,
            repulsion_sign=suite.repulsion_sign,
        ),
        astar=suite.astar,
        time_limit=suite.time_limit,
        seed=spec.seed,
    )


def _run_spec(spec: _TrialSpec) -> TrialResult:
    config = _spec_config(spec)
    rng_seed = np.random.SeedSequence(entropy=spec.seed, spawn_key=spec.spawn_key)
    result = run_trial(config, spec.initial, rng_seed)
    result.scenario = spec.scenario.name
    result.planner = spec.planner.name
    result.state_index = spec.state_index
    result.seed = spec.seed
    return result


def _make_specs(suite: SuiteConfig) -> list[_TrialSpec]:
    specs = []
    for si, scenario in enumerate(suite.scenarios):
        for pi, planner in enumerate(suite.planners):
            for state_index, initial in enumerate(suite.initial_states):
                for seed in suite.seeds:
                    specs.append(
                        _TrialSpec(
                            scenario=scenario,
                            planner=planner,
                            state_index=state_index,
                            initial=initial,
                            seed=seed,
                            spawn_key=(si, pi, state_index),
                            suite=suite,
                        )
                    )
    return specs


def run_suite(
    suite: SuiteConfig,
    workers: int | None = None,
    require_reference: bool = True,
    progress=None,
) -> tuple[MetricsTable, list[TrialResult]]:
    """Run every (scenario, planner, state, seed) trial and aggregate metrics.

    Trials are independent; `workers` > 1 fans them out across processes.
    Results are assembled in spec order, so the outcome is identical for any
    worker count.
    """
    planner_names = {p.name for p in suite.planners}
    if require_reference and REFERENCE_PLANNER not in planner_names:
        raise ValueError(
            f"suite must include the reference planner {REFERENCE_PLANNER!r} "
            "(RDST/RDPL are relative to it)"
        )
    specs = _make_specs(suite)
    if workers is None:
        workers = os.cpu_count() or 1
    results: list[TrialResult] = []
    if workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, result in enumerate(pool.map(_run_spec, specs, chunksize=4)):
                results.append(result)
                if progress:
                    progress(i + 1, len(specs), result)
    else:
        for i, spec in enumerate(specs):
            results.append(_run_spec(spec))
            if progress:
                progress(i + 1, len(specs), results[-1])
    reference = REFERENCE_PLANNER if REFERENCE_PLANNER in planner_names else None
    return aggregate(results, reference=reference), results


def aggregate(
    trials: list[TrialResult], reference: str | None = REFERENCE_PLANNER
) -> MetricsTable:
    """Compute the SR/RDST/RDPL/CT table from raw trial results.

    RDST/RDPL pair each (initial state, seed) and average only over pairs in
    which both the planner and the reference succeeded; SR covers all trials;
    CT is the step-weighted mean optimization time.
    """
    by_key: dict[tuple[str, str], list[TrialResult]] = {}
    order: list[tuple[str, str]] = []
    for t in trials:
        key = (t.scenario, t.planner)
        if key not in by_key:
            by_key[key] = []
            order.append(key)
        by_key[key].append(t)

    ref_success: dict[tuple[str, int, int], TrialResult] = {}
    if reference is not None:
        for t in trials:
            if t.planner == reference and t.succeeded:
                ref_success[(t.scenario, t.state_index, t.seed)] = t

    rows = []
    for scenario, planner in order:
        group = by_key[(scenario, planner)]
        n = len(group)
        sr = 100.0 * sum(t.succeeded for t in group) / n
        total_time = sum(t.mean_opt_time * t.n_steps for t in group)
        total_steps = sum(t.n_steps for t in group)
        ct = total_time / total_steps if total_steps else 0.0
        rdst = rdpl = math.nan
        n_common = 0
        if reference is not None:
            dst, dpl = [], []
            for t in group:
                ref = ref_success.get((t.scenario, t.state_index, t.seed))
                if t.succeeded and ref is not None:
                    dst.append(100.0 * (t.success_time - ref.success_time) / ref.success_time)
                    dpl.append(100.0 * (t.path_length - ref.path_length) / ref.path_length)
            n_common = len(dst)
            if n_common:
                rdst = float(np.mean(dst))
                rdpl = float(np.mean(dpl))
        rows.append(
            MetricsRow(
                scenario=scenario,
                planner=planner,
                horizon=group[0].horizon,
                sr=sr,
                rdst=rdst,
                rdpl=rdpl,
                ct=ct,
                n_common=n_common,
            )
        )
    return MetricsTable(rows=tuple(rows))


def _fmt(value: float, digits: int = 6) -> str:
    return "nan" if math.isnan(value) else f"{value:.{digits}f}"


def write_metrics_csv(
    table: MetricsTable, path, ct_digits: int = 4, include_ct: bool = True
) -> None:
    """One row per (scenario, planner). CT is wall-clock derived; pass
    include_ct=False to emit 'NA' there for byte-reproducible artifacts."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in table.rows:
            writer.writerow(
                [
                    r.scenario,
                    r.planner,
                    r.horizon,
                    _fmt(r.sr),
                    _fmt(r.rdst),
                    _fmt(r.rdpl),
                    f"{r.ct:.{ct_digits}f}" if include_ct else "NA",
                ]
            )


def load_metrics_csv(path) -> MetricsTable:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected metrics header: {header}")
        for rec in reader:
            rows.append(
                MetricsRow(
                    scenario=rec[0],
                    planner=rec[1],
                    horizon=int(rec[2]),
                    sr=float(rec[3]),
                    rdst=float(rec[4]),
                    rdpl=float(rec[5]),
                    ct=math.nan if rec[6] == "NA" else float(rec[6]),
                )
            )
    return MetricsTable(rows=tuple(rows))


def write_trajectory_dump(result: TrialResult, path) -> None:
    """Plain-text executed trajectory: 't,x,y,theta,v,omega' per line.

    The control on each line is the one applied *at* that state; the final
    state carries zeros.
    """
    with open(path, "w") as fh:
        fh.write(f"# scenario={result.scenario} planner={result.planner} ")
        fh.write(f"state_index={result.state_index} seed={result.seed}\n")
        fh.write(f"# outcome={result.outcome} path_length={result.path_length:.6f}\n")
        fh.write("t,x,y,theta,v,omega\n")
        dt_rows = result.trajectory.shape[0]
        for i in range(dt_rows):
            x, y, th = result.trajectory[i]
            if i < result.controls.shape[0]:
                v, om = result.controls[i]
            else:
                v, om = 0.0, 0.0
            fh.write(f"{i},{x:.9g},{y:.9g},{th:.9g},{v:.9g},{om:.9g}\n")


_PLANNER_COLORS = {
    REFERENCE_PLANNER: "#1f77b4",
    "std-mppi-50": "#7f7f7f",
    "std-mppi-150": "#2ca02c",
    "rpa-mppi": "#d62728",
}


def write_scenario_svg(world: World, trials: list[TrialResult], path) -> None:
    """Overview plot: arena, obstacles (true and inflated), goal, one polyline
    per trial."""
    xmin, ymin, xmax, ymax = world.bounds
    pad = 1.0
    width, height = (xmax - xmin) + 2 * pad, (ymax - ymin) + 2 * pad

    def sx(x):
        return x - xmin + pad

    def sy(y):
        return (ymax - y) + pad  # flip so +y is up

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:g} {height:g}" '
        f'width="{width * 30:g}" height="{height * 30:g}">',
        f'<rect x="{sx(xmin):g}" y="{sy(ymax):g}" width="{xmax - xmin:g}" '
        f'height="{ymax - ymin:g}" fill="white" stroke="black" stroke-width="0.05"/>',
    ]
    for obs in world.obstacles:
        hw, hh = obs.half_extents_inflated
        cx, cy = obs.center
        parts.append(
            f'<rect x="{sx(cx - hw):g}" y="{sy(cy + hh):g}" width="{2 * hw:g}" '
            f'height="{2 * hh:g}" fill="#f2c2c2" stroke="none"/>'
        )
        parts.append(
            f'<rect x="{sx(cx - obs.width / 2):g}" y="{sy(cy + obs.height / 2):g}" '
            f'width="{obs.width:g}" height="{obs.height:g}" fill="#b04a4a" stroke="none"/>'
        )
    gx, gy = world.goal
    parts.append(
        f'<circle cx="{sx(gx):g}" cy="{sy(gy):g}" r="{world.goal_tolerance:g}" '
        f'fill="none" stroke="#2a9d2a" stroke-width="0.08"/>'
    )
    for t in trials:
        pts = " ".join(
            f"{sx(x):.3f},{sy(y):.3f}" for x, y in t.trajectory[:, :2]
        )
        color = _PLANNER_COLORS.get(t.planner, "#444444")
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="0.04" opacity="0.6"/>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def export_results(
    table: MetricsTable,
    trials: list[TrialResult],
    suite: SuiteConfig,
    out_dir,
    ct_digits: int = 4,
    include_ct: bool = True,
) -> None:
    """Write metrics.csv, per-trial trajectory dumps, and per-scenario SVGs."""
    out = Path(out_dir)
    try:
        (out / "trials").mkdir(parents=True, exist_ok=True)
        (out / "plots").mkdir(parents=True, exist_ok=True)
        write_metrics_csv(
            table, out / "metrics.csv", ct_digits=ct_digits, include_ct=include_ct
        )
        for t in trials:
            name = f"{t.scenario}__{t.planner}__s{t.state_index:02d}__seed{t.seed}.txt"
            write_trajectory_dump(t, out / "trials" / name)
        worlds = {s.name: s.world for s in suite.scenarios}
        for name, world in worlds.items():
            scenario_trials = [t for t in trials if t.scenario == name]
            write_scenario_svg(world, scenario_trials, out / "plots" / f"{name}.svg")
    except OSError as exc:
        raise OSError(f"failed writing benchmark outputs under {out}: {exc}") from exc


def format_table(table: MetricsTable, ct_digits: int = 4) -> str:
    header = f"{'scenario':<18} {'planner':<14} {'hor':>4} {'SR%':>7} {'RDST%':>9} {'RDPL%':>9} {'CT[s]':>9}"
    lines = [header, "-" * len(header)]
    for r in table.rows:
        lines.append(
            f"{r.scenario:<18} {r.planner:<14} {r.horizon:>4} {r.sr:>7.1f} "
            f"{_fmt(r.rdst, 2):>9} {_fmt(r.rdpl, 2):>9} {r.ct:>9.{ct_digits}f}"
        )
    return "\n".join(lines)
