"""YAML config loading/saving for single-trial scenarios, benchmark suites and
the analysis scene.

Scenario file layout (all keys required unless a default is noted):

    world:
      bounds: [xmin, ymin, xmax, ymax]
      goal: [x, y]
      goal_tolerance: 1.0
      obstacles:
        - {center: [x, y], width: w, height: h, safety_margin: 0.5}
    planner: rpa-mppi            # std-mppi | astar-mppi | rpa-mppi
    time_limit: 50.0
    seed: 0
    initial_states: [[x, y, theta], ...]
    mppi:
      samples: 1000
      horizon: 50
      temperature: 0.1
      noise_variance: [1.0, 1.0]
      dt: 0.1
      v_bounds: [0.0, 1.0]
      omega_bounds: [-0.5, 0.5]
    cost:
      alpha: 0.75
      w_obst: 1.0e6
      p_minimum: [10.0, 9.0]     # required by the rpa-mppi planner
      repulsion_sign: -1         # -1 validated (repulsive); +1 diagnostic only
    astar:
      grid_resolution: 0.5
      lookahead: 2.0
      clearance: 0.5

The cost's goal is always the world goal. Deserialized configs round-trip
exactly through dump/load.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .bench import BenchPlanner, BenchScenario, SuiteConfig
from .domain import (
    AStarParams,
    ControlBounds,
    CostMode,
    CostParams,
    MppiParams,
    PlannerKind,
    RectObstacle,
    ScenarioConfig,
    State,
    World,
)


class ConfigError(ValueError):
    """Malformed or missing configuration."""


def _point(value, what: str) -> tuple[float, float]:
    try:
        x, y = value
        return (float(x), float(y))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be a [x, y] pair, got {value!r}") from exc


def world_to_dict(world: World) -> dict:
    return {
        "bounds": list(world.bounds),
        "goal": list(world.goal),
        "goal_tolerance": world.goal_tolerance,
        "obstacles": [
            {
                "center": list(o.center),
                "width": o.width,
                "height": o.height,
                "safety_margin": o.safety_margin,
            }
            for o in world.obstacles
        ],
    }


def world_from_dict(d: dict) -> World:
    try:
        obstacles = tuple(
            RectObstacle(
                center=_point(o["center"], "obstacle center"),
                width=float(o["width"]),
                height=float(o["height"]),
                safety_margin=float(o.get("safety_margin", 0.0)),
            )
            for o in d.get("obstacles", [])
        )
        return World(
            obstacles=obstacles,
            goal=_point(d["goal"], "world goal"),
            goal_tolerance=float(d.get("goal_tolerance", 1.0)),
            bounds=tuple(float(v) for v in d["bounds"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid world config: {exc}") from exc


def mppi_to_dict(p: MppiParams) -> dict:
    return {
        "samples": p.n_samples,
        "horizon": p.horizon,
        "temperature": p.temperature,
        "noise_variance": list(p.sigma_eps),
        "dt": p.dt,
        "v_bounds": [p.bounds.v_min, p.bounds.v_max],
        "omega_bounds": [p.bounds.omega_min, p.bounds.omega_max],
    }


def mppi_from_dict(d: dict) -> MppiParams:
    try:
        v_lo, v_hi = d.get("v_bounds", (0.0, 1.0))
        w_lo, w_hi = d.get("omega_bounds", (-0.5, 0.5))
        return MppiParams(
            n_samples=int(d.get("samples", 1000)),
            horizon=int(d.get("horizon", 50)),
            temperature=float(d.get("temperature", 0.10)),
            sigma_eps=tuple(float(s) for s in d.get("noise_variance", (1.0, 1.0))),
            bounds=ControlBounds(float(v_lo), float(v_hi), float(w_lo), float(w_hi)),
            dt=float(d.get("dt", 0.1)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid mppi config: {exc}") from exc


def astar_to_dict(p: AStarParams) -> dict:
    return {
        "grid_resolution": p.grid_resolution,
        "lookahead": p.lookahead,
        "clearance": p.clearance,
    }


def astar_from_dict(d: dict) -> AStarParams:
    try:
        return AStarParams(
            grid_resolution=float(d.get("grid_resolution", 0.5)),
            lookahead=float(d.get("lookahead", 2.0)),
            clearance=float(d.get("clearance", 0.5)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid astar config: {exc}") from exc


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    cost = {
        "alpha": cfg.cost.alpha,
        "w_obst": cfg.cost.w_obst,
        "repulsion_sign": cfg.cost.repulsion_sign,
    }
    if cfg.cost.p_minimum is not None:
        cost["p_minimum"] = list(cfg.cost.p_minimum)
    return {
        "world": world_to_dict(cfg.world),
        "planner": cfg.planner.value,
        "time_limit": cfg.time_limit,
        "seed": cfg.seed,
        "initial_states": [[s.x, s.y, s.theta] for s in cfg.initial_states],
        "mppi": mppi_to_dict(cfg.mppi),
        "cost": cost,
        "astar": astar_to_dict(cfg.astar),
    }


def scenario_from_dict(d: dict) -> ScenarioConfig:
    try:
        world = world_from_dict(d["world"])
        planner = PlannerKind(d["planner"])
        cost_d = d.get("cost", {})
        p_minimum = cost_d.get("p_minimum")
        mode = CostMode.RPA if planner is PlannerKind.RPA_MPPI else CostMode.BASELINE
        if mode is CostMode.RPA and p_minimum is None:
            raise ConfigError("cost.p_minimum is required for the rpa-mppi planner")
        cost = CostParams(
            mode=mode,
            p_goal=world.goal,
            p_minimum=_point(p_minimum, "cost.p_minimum") if p_minimum else None,
            alpha=float(cost_d.get("alpha", 0.75)),
            w_obst=float(cost_d.get("w_obst", 1.0e6)),
            repulsion_sign=int(cost_d.get("repulsion_sign", -1)),
        )
        states = tuple(
            State(float(s[0]), float(s[1]), float(s[2]))
            for s in d["initial_states"]
        )
        return ScenarioConfig(
            world=world,
            initial_states=states,
            planner=planner,
            mppi=mppi_from_dict(d.get("mppi", {})),
            cost=cost,
            astar=astar_from_dict(d.get("astar", {})),
            time_limit=float(d.get("time_limit", 50.0)),
            seed=int(d.get("seed", 0)),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario config: {exc}") from exc


def suite_to_dict(suite: SuiteConfig) -> dict:
    return {
        "scenarios": [
            {
                "name": s.name,
                "world": world_to_dict(s.world),
                "p_minimum": list(s.p_minimum),
            }
            for s in suite.scenarios
        ],
        "planners": [
            {"name": p.name, "kind": p.kind.value, "horizon": p.horizon}
            for p in suite.planners
        ],
        "initial_states": [[s.x, s.y, s.theta] for s in suite.initial_states],
        "seeds": list(suite.seeds),
        "mppi": mppi_to_dict(suite.mppi),
        "astar": astar_to_dict(suite.astar),
        "alpha": suite.alpha,
        "w_obst": suite.w_obst,
        "repulsion_sign": suite.repulsion_sign,
        "time_limit": suite.time_limit,
    }


def suite_from_dict(d: dict) -> SuiteConfig:
    try:
        scenarios = tuple(
            BenchScenario(
                name=str(s["name"]),
                world=world_from_dict(s["world"]),
                p_minimum=_point(s["p_minimum"], "scenario p_minimum"),
            )
            for s in d["scenarios"]
        )
        planners = tuple(
            BenchPlanner(
                name=str(p["name"]),
                kind=PlannerKind(p["kind"]),
                horizon=int(p["horizon"]),
            )
            for p in d["planners"]
        )
        states = tuple(
            State(float(s[0]), float(s[1]), float(s[2]))
            for s in d["initial_states"]
        )
        return SuiteConfig(
            scenarios=scenarios,
            planners=planners,
            initial_states=states,
            seeds=tuple(int(s) for s in d["seeds"]),
            mppi=mppi_from_dict(d.get("mppi", {})),
            astar=astar_from_dict(d.get("astar", {})),
            alpha=float(d.get("alpha", 0.75)),
            w_obst=float(d.get("w_obst", 1.0e6)),
            repulsion_sign=int(d.get("repulsion_sign", -1)),
            time_limit=float(d.get("time_limit", 50.0)),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid suite config: {exc}") from exc


def analysis_scene_from_dict(d: dict):
    from .analysis import AnalysisScene

    try:
        return AnalysisScene(
            obstacle_width=float(d.get("obstacle_width", 8.0)),
            obstacle_height=float(d.get("obstacle_height", 4.0)),
            y_goal=float(d.get("y_goal", 10.0)),
            alpha=float(d.get("alpha", 0.75)),
            w_obst=float(d.get("w_obst", 1.0e6)),
            horizon=int(d.get("horizon", 50)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid analysis scene config: {exc}") from exc


def _load_yaml(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {p}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"top level of {p} must be a mapping")
    return data


def load_scenario(path) -> ScenarioConfig:
    return scenario_from_dict(_load_yaml(path))


def dump_scenario(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_dict(cfg), sort_keys=False))


def load_suite(path) -> SuiteConfig:
    return suite_from_dict(_load_yaml(path))


def dump_suite(suite: SuiteConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(suite_to_dict(suite), sort_keys=False))


def load_analysis_scene(path):
    return analysis_scene_from_dict(_load_yaml(path))
