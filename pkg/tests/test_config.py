"""YAML round trips and config validation errors."""

import math

import pytest

from rpa_mppi import bench, config
from rpa_mppi.domain import (
    CostMode,
    CostParams,
    MppiParams,
    PlannerKind,
    RectObstacle,
    ScenarioConfig,
    State,
    World,
)


def _scenario() -> ScenarioConfig:
    world = World(
        obstacles=(
            RectObstacle(
                center=(10.0, 10.0), width=4.0, height=1.0, safety_margin=0.5
            ),
        ),
        goal=(10.0, 18.0),
    )
    return ScenarioConfig(
        world=world,
        initial_states=(State(10.0, 1.0, math.pi / 2), State(1.0, 1.0, 0.25)),
        planner=PlannerKind.RPA_MPPI,
        mppi=MppiParams(),
        cost=CostParams(
            mode=CostMode.RPA,
            p_goal=(10.0, 18.0),
            p_minimum=(10.0, 9.0),
            alpha=0.75,
            w_obst=1.0e6,
        ),
        seed=7,
    )


class TestScenarioRoundTrip:
    def test_dump_load_identity(self, tmp_path):
        cfg = _scenario()
        path = tmp_path / "scenario.yaml"
        config.dump_scenario(cfg, path)
        loaded = config.load_scenario(path)
        assert loaded == cfg

    def test_std_planner_drops_p_minimum_requirement(self, tmp_path):
        cfg = _scenario()
        d = config.scenario_to_dict(cfg)
        d["planner"] = "std-mppi"
        del d["cost"]["p_minimum"]
        loaded = config.scenario_from_dict(d)
        assert loaded.planner is PlannerKind.STD_MPPI
        assert loaded.cost.mode is CostMode.BASELINE

    def test_rpa_without_p_minimum_rejected(self):
        d = config.scenario_to_dict(_scenario())
        del d["cost"]["p_minimum"]
        with pytest.raises(config.ConfigError):
            config.scenario_from_dict(d)


class TestSuiteRoundTrip:
    def test_paper_suite_round_trip(self, tmp_path):
        suite = bench.paper_suite()
        path = tmp_path / "suite.yaml"
        config.dump_suite(suite, path)
        assert config.load_suite(path) == suite

    def test_misspecified_suite_round_trip(self, tmp_path):
        suite = bench.misspecified_suite()
        path = tmp_path / "suite.yaml"
        config.dump_suite(suite, path)
        assert config.load_suite(path) == suite

    def test_shipped_configs_load(self):
        for name in ("paper_suite", "misspecified_suite", "smoke_suite", "long_wid_rpa"):
            suite = config.load_suite(f"configs/{name}.yaml")
            assert suite.scenarios and suite.planners and suite.initial_states

    def test_astar_clearance_round_trips(self, tmp_path):
        d = config.astar_to_dict(bench.paper_suite().astar)
        assert d["clearance"] == 0.5
        assert config.astar_from_dict(d) == bench.paper_suite().astar


class TestErrors:
    def test_missing_file(self):
        with pytest.raises(config.ConfigError):
            config.load_scenario("does/not/exist.yaml")

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("world: [unbalanced")
        with pytest.raises(config.ConfigError):
            config.load_scenario(path)

    def test_unknown_planner(self):
        d = config.scenario_to_dict(_scenario())
        d["planner"] = "dijkstra-mppi"
        with pytest.raises(config.ConfigError):
            config.scenario_from_dict(d)

    def test_negative_resolution(self):
        with pytest.raises(config.ConfigError):
            config.astar_from_dict({"grid_resolution": -0.5})
