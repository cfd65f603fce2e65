"""Cost functions: indicator, baseline, repulsive potential, gradients,
rollout costs and the constant-control cost-to-go."""

import math

import numpy as np
import pytest

from rpa_mppi.costs import (
    NonDifferentiablePoint,
    baseline_cost,
    cost_to_go_const,
    grad_g,
    grad_g_field,
    indicator,
    indicator_xy,
    potential_g,
    rollout_cost,
    rollout_cost_batch,
    rpa_cost,
    stage_cost,
    stage_cost_field,
)
from rpa_mppi.domain import (
    ControlBounds,
    CostMode,
    CostParams,
    MppiParams,
    RectObstacle,
    State,
    World,
)
from rpa_mppi.dynamics import clip_sequence, rollout

WORLD = World(
    obstacles=(
        RectObstacle(center=(0.0, 2.0), width=8.0, height=4.0, safety_margin=0.0),
    ),
    goal=(0.0, 10.0),
    bounds=(-10.0, -6.0, 10.0, 14.0),
)

RPA = CostParams(
    mode=CostMode.RPA, p_goal=(0.0, 10.0), p_minimum=(0.0, 0.0), alpha=0.75
)
BASE = CostParams(mode=CostMode.BASELINE, p_goal=(0.0, 10.0))


class TestIndicator:
    def test_inside_outside_boundary(self):
        assert indicator((0.0, 2.0), WORLD) == 1
        assert indicator((0.0, 9.0), WORLD) == 0
        assert indicator((4.0, 0.0), WORLD) == 1  # edge counts as inside
        assert indicator((4.0 + 1e-12, 0.0), WORLD) == 0

    def test_vectorized_matches_scalar(self):
        xs = np.linspace(-6, 6, 25)
        ys = np.linspace(-2, 6, 25)
        field = indicator_xy(xs[:, None], ys[None, :], WORLD)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                assert field[i, j] == indicator((x, y), WORLD)


class TestPotential:
    def test_known_value_repulsive(self):
        # ||goal - p|| - alpha * ||p_min - p|| at p = (3, 4):
        # sqrt(9 + 36) - 0.75 * 5
        assert potential_g((3.0, 4.0), RPA) == pytest.approx(
            math.sqrt(45.0) - 3.75, abs=1e-15
        )

    def test_known_value_attractive_variant(self):
        params = CostParams(
            mode=CostMode.RPA,
            p_goal=(0.0, 10.0),
            p_minimum=(0.0, 0.0),
            alpha=0.75,
            repulsion_sign=+1,
        )
        assert potential_g((3.0, 4.0), params) == pytest.approx(
            math.sqrt(45.0) + 3.75, abs=1e-15
        )

    def test_negative_near_goal(self):
        # The repulsive potential is not bounded below by zero: at the goal it
        # equals -alpha * ||p_min - goal||.
        assert potential_g((0.0, 10.0), RPA) == pytest.approx(-7.5)

    def test_rpa_cost_adds_penalty(self):
        inside = (0.0, 2.0)
        assert rpa_cost(inside, WORLD, RPA) == pytest.approx(
            potential_g(inside, RPA) + RPA.w_obst
        )

    def test_baseline_is_squared_distance(self):
        assert baseline_cost((3.0, 6.0), WORLD, BASE) == pytest.approx(25.0)


class TestGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        h = 1e-6
        n = 0
        while n < 200:
            p = rng.uniform(-8, 12, size=2)
            if min(np.hypot(*(p - [0, 10])), np.hypot(*p)) < 1e-2:
                continue
            gx, gy = grad_g(p, RPA)
            fx = (potential_g((p[0] + h, p[1]), RPA) - potential_g((p[0] - h, p[1]), RPA)) / (2 * h)
            fy = (potential_g((p[0], p[1] + h), RPA) - potential_g((p[0], p[1] - h), RPA)) / (2 * h)
            assert gx == pytest.approx(fx, abs=1e-7)
            assert gy == pytest.approx(fy, abs=1e-7)
            n += 1

    def test_raises_at_singular_points(self):
        with pytest.raises(NonDifferentiablePoint):
            grad_g((0.0, 10.0), RPA)
        with pytest.raises(NonDifferentiablePoint):
            grad_g((0.0, 0.0), RPA)

    def test_field_matches_pointwise(self):
        xs = np.array([1.0, -2.0, 3.5])
        ys = np.array([0.5, 4.0, -1.0])
        gx, gy = grad_g_field(xs, ys, RPA)
        for i in range(3):
            ex, ey = grad_g((xs[i], ys[i]), RPA)
            assert gx[i] == pytest.approx(ex, abs=1e-15)
            assert gy[i] == pytest.approx(ey, abs=1e-15)

    def test_points_away_from_minimum_on_axis(self):
        # On the segment between p_minimum and the goal the pull toward the
        # goal and the push away from the minimum act in the same direction.
        _, gy = grad_g((0.0, 5.0), RPA)
        assert gy < 0


class TestStageCost:
    def test_mode_dispatch(self):
        p = (3.0, 4.0)
        assert stage_cost(p, WORLD, BASE) == baseline_cost(p, WORLD, BASE)
        assert stage_cost(p, WORLD, RPA) == rpa_cost(p, WORLD, RPA)

    def test_field_matches_scalar(self):
        xs = np.linspace(-6, 6, 13)
        ys = np.linspace(-3, 11, 13)
        field = stage_cost_field(xs[:, None], ys[None, :], WORLD, RPA)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                assert field[i, j] == pytest.approx(
                    stage_cost((x, y), WORLD, RPA), rel=1e-15
                )


class TestRolloutCost:
    def _setup(self, horizon=12, seed=9):
        rng = np.random.default_rng(seed)
        mppi = MppiParams(horizon=horizon, sigma_eps=(1.0, 0.25))
        nominal = clip_sequence(rng.normal(size=(horizon, 2)), mppi.bounds)
        perturbed = clip_sequence(
            nominal + rng.normal(size=(horizon, 2)), mppi.bounds
        )
        traj = rollout(State(5.0, -2.0, 0.4), perturbed, mppi.dt, mppi.bounds)
        return mppi, nominal, perturbed, traj

    def test_manual_sum(self):
        mppi, nominal, perturbed, traj = self._setup()
        expected = sum(
            stage_cost((x, y), WORLD, RPA) for x, y, _ in traj
        )
        inv = 1.0 / np.asarray(mppi.sigma_eps)
        expected += mppi.temperature * float(np.sum(nominal * inv * perturbed))
        got = rollout_cost(traj, nominal, perturbed, WORLD, RPA, mppi)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_batch_matches_loop(self):
        mppi, nominal, _, _ = self._setup()
        rng = np.random.default_rng(21)
        perturbed = clip_sequence(
            nominal + rng.normal(size=(16, mppi.horizon, 2)), mppi.bounds
        )
        trajs = np.stack(
            [rollout(State(5.0, -2.0, 0.4), p, mppi.dt, mppi.bounds) for p in perturbed]
        )
        batch = rollout_cost_batch(trajs, nominal, perturbed, WORLD, RPA, mppi)
        for k in range(16):
            single = rollout_cost(trajs[k], nominal, perturbed[k], WORLD, RPA, mppi)
            assert batch[k] == pytest.approx(single, rel=1e-12)

    def test_shape_validation(self):
        mppi, nominal, perturbed, traj = self._setup()
        with pytest.raises(ValueError):
            rollout_cost(traj[:-1], nominal, perturbed, WORLD, RPA, mppi)


class TestCostToGoConst:
    def test_equals_stationary_rollout(self):
        mppi = MppiParams(horizon=50)
        p = (4.0, -3.0)
        traj = rollout(
            State(p[0], p[1], 1.2), np.zeros((50, 2)), mppi.dt, mppi.bounds
        )
        zeros = np.zeros((50, 2))
        via_rollout = rollout_cost(traj, zeros, zeros, WORLD, RPA, mppi)
        assert cost_to_go_const(p, 50, WORLD, RPA, mppi) == pytest.approx(via_rollout)

    def test_closed_form(self):
        assert cost_to_go_const((3.0, 4.0), 50, WORLD, RPA, MppiParams()) == (
            pytest.approx(51 * stage_cost((3.0, 4.0), WORLD, RPA))
        )
