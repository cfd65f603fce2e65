"""Controller internals: sampling, weighting, updates, warm start, planning."""

import math

import numpy as np
import pytest

from rpa_mppi import mppi
from rpa_mppi.domain import (
    CostMode,
    CostParams,
    MppiParams,
    RectObstacle,
    State,
    World,
)
from rpa_mppi.dynamics import rollout

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

SMALL = MppiParams(n_samples=64, horizon=10)


def _planner(params=SMALL, seed=0):
    return mppi.PlannerState.from_seed(params, seed)


class TestSamplePerturbations:
    def test_shape_and_moments(self):
        rng = np.random.default_rng(0)
        noise = mppi.sample_perturbations(rng, 20000, 5, (1.0, 0.25))
        assert noise.shape == (20000, 5, 2)
        assert abs(float(np.mean(noise))) < 0.02
        assert float(np.var(noise[..., 0])) == pytest.approx(1.0, rel=0.05)
        assert float(np.var(noise[..., 1])) == pytest.approx(0.25, rel=0.05)

    def test_seed_reproducibility(self):
        a = mppi.sample_perturbations(np.random.default_rng(42), 10, 4, (1, 1))
        b = mppi.sample_perturbations(np.random.default_rng(42), 10, 4, (1, 1))
        assert np.array_equal(a, b)


class TestSoftmaxWeights:
    def test_minimum_gets_weight_one(self):
        w = mppi.softmax_weights(np.array([3.0, 1.0, 2.0]), 0.1)
        assert w[1] == 1.0
        assert np.all(w <= 1.0)

    def test_normalization_is_exact(self):
        rng = np.random.default_rng(1)
        costs = rng.uniform(0, 100, size=1000)
        w = mppi.softmax_weights(costs, 0.1)
        normalized = w / np.sum(w)
        assert abs(float(np.sum(normalized)) - 1.0) < 1e-12

    def test_shift_invariance(self):
        costs = np.array([5.0, 7.0, 9.0])
        assert np.allclose(
            mppi.softmax_weights(costs, 0.5),
            mppi.softmax_weights(costs + 123.0, 0.5),
        )

    def test_huge_costs_do_not_overflow(self):
        w = mppi.softmax_weights(np.array([1e8, 1e8 + 1e7]), 0.1)
        assert np.isfinite(w).all()
        assert w[0] == 1.0


class TestEvaluateRollouts:
    def test_zero_noise_reproduces_nominal_rollout(self):
        planner = _planner()
        batch = mppi.evaluate_rollouts(
            State(5.0, -3.0, 0.5),
            planner,
            WORLD,
            RPA,
            perturbations=np.zeros((1, SMALL.horizon, 2)),
        )
        ref = rollout(
            State(5.0, -3.0, 0.5), planner.nominal, SMALL.dt, SMALL.bounds
        )
        assert np.allclose(batch.trajectories[0], ref, atol=1e-12)
        assert batch.rho == batch.costs[0]

    def test_perturbed_sequences_respect_bounds(self):
        planner = _planner()
        batch = mppi.evaluate_rollouts(State(5.0, -3.0, 0.5), planner, WORLD, RPA)
        b = SMALL.bounds
        assert np.all(batch.perturbed_sequences[..., 0] >= b.v_min)
        assert np.all(batch.perturbed_sequences[..., 0] <= b.v_max)
        assert np.all(batch.perturbed_sequences[..., 1] >= b.omega_min)
        assert np.all(batch.perturbed_sequences[..., 1] <= b.omega_max)

    def test_rho_is_batch_minimum(self):
        planner = _planner()
        batch = mppi.evaluate_rollouts(State(5.0, -3.0, 0.5), planner, WORLD, RPA)
        assert batch.rho == float(np.min(batch.costs))


class TestNominalBounds:
    def test_slack_widths(self):
        nb = mppi.nominal_bounds(SMALL)
        b = SMALL.bounds
        sv = math.sqrt(SMALL.sigma_eps[0])
        so = 0.5 * math.sqrt(SMALL.sigma_eps[1])
        assert nb.v_min == pytest.approx(b.v_min - sv)
        assert nb.v_max == pytest.approx(b.v_max + sv)
        assert nb.omega_min == pytest.approx(b.omega_min - so)
        assert nb.omega_max == pytest.approx(b.omega_max + so)


class TestUpdateControls:
    def test_single_sample_closed_form(self):
        # K = 1: the weighted average is exactly that sample's raw noise;
        # the nominal is clipped to the slack-widened bounds.
        params = MppiParams(n_samples=1, horizon=6)
        planner = _planner(params, seed=3)
        batch = mppi.evaluate_rollouts(State(5.0, -3.0, 0.5), planner, WORLD, RPA)
        updated = mppi.update_controls(batch, planner)
        from rpa_mppi.dynamics import clip_sequence

        expected = clip_sequence(
            planner.nominal + batch.perturbations[0], mppi.nominal_bounds(params)
        )
        assert np.array_equal(updated, expected)

    def test_equal_costs_average_noise(self):
        # Equal costs make every weight exactly 1, so the update is the plain
        # mean of the perturbations.
        planner = _planner(seed=4)
        noise = mppi.sample_perturbations(
            np.random.default_rng(8), 32, SMALL.horizon, SMALL.sigma_eps
        )
        batch = mppi.RolloutBatch(
            perturbations=noise,
            perturbed_sequences=noise,
            trajectories=np.zeros((32, SMALL.horizon + 1, 3)),
            costs=np.full(32, 7.0),
            rho=7.0,
        )
        updated = mppi.update_controls(batch, planner)
        from rpa_mppi.dynamics import clip_sequence

        expected = clip_sequence(
            planner.nominal + np.mean(noise, axis=0), mppi.nominal_bounds(SMALL)
        )
        assert np.allclose(updated, expected, atol=1e-15)

    def test_temperature_to_zero_selects_argmin(self):
        planner = _planner(seed=5)
        batch = mppi.evaluate_rollouts(State(5.0, -3.0, 0.5), planner, WORLD, RPA)
        cold_params = MppiParams(
            n_samples=SMALL.n_samples,
            horizon=SMALL.horizon,
            temperature=1e-6,
        )
        cold = mppi.PlannerState(
            params=cold_params,
            rng=np.random.default_rng(0),
            nominal=planner.nominal.copy(),
        )
        updated = mppi.update_controls(batch, cold)
        k_best = int(np.argmin(batch.costs))
        from rpa_mppi.dynamics import clip_sequence

        expected = clip_sequence(
            planner.nominal + batch.perturbations[k_best],
            mppi.nominal_bounds(cold_params),
        )
        assert np.allclose(updated, expected, atol=1e-6)

    def test_clipping_feasibility_random_updates(self):
        # Criterion-style sweep: executed controls stay inside the hard
        # bounds for a large number of random weighted updates.
        rng = np.random.default_rng(99)
        params = MppiParams(n_samples=100, horizon=10)
        nb = mppi.nominal_bounds(params)
        for _ in range(1000):
            planner = mppi.PlannerState(
                params=params,
                nominal=rng.uniform(-3, 3, size=(10, 2)).clip(
                    [nb.v_min, nb.omega_min], [nb.v_max, nb.omega_max]
                ),
                rng=rng,
            )
            noise = mppi.sample_perturbations(rng, 100, 10, params.sigma_eps)
            batch = mppi.RolloutBatch(
                perturbations=noise,
                perturbed_sequences=noise,
                trajectories=np.zeros((100, 11, 3)),
                costs=rng.uniform(0, 1000, size=100),
                rho=0.0,
            )
            updated = mppi.update_controls(batch, planner)
            assert np.all(updated[:, 0] >= nb.v_min - 1e-12)
            assert np.all(updated[:, 0] <= nb.v_max + 1e-12)
            assert np.all(updated[:, 1] >= nb.omega_min - 1e-12)
            assert np.all(updated[:, 1] <= nb.omega_max + 1e-12)
            first = np.clip(
                updated[0],
                [params.bounds.v_min, params.bounds.omega_min],
                [params.bounds.v_max, params.bounds.omega_max],
            )
            assert params.bounds.v_min <= first[0] <= params.bounds.v_max
            assert params.bounds.omega_min <= first[1] <= params.bounds.omega_max


class TestShiftWarmStart:
    def test_shift(self):
        seq = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        shifted = mppi.shift_warm_start(seq)
        assert np.array_equal(
            shifted, np.array([[3.0, 4.0], [5.0, 6.0], [5.0, 6.0]])
        )

    def test_length_preserved(self):
        seq = np.zeros((50, 2))
        assert mppi.shift_warm_start(seq).shape == (50, 2)


class TestEffectiveSampleSize:
    def test_bounds(self):
        assert mppi.effective_sample_size(np.ones(10)) == pytest.approx(10.0)
        w = np.zeros(10)
        w[0] = 1.0
        assert mppi.effective_sample_size(w) == pytest.approx(1.0)


class TestPlan:
    def test_deterministic_given_seed(self):
        results = []
        for _ in range(2):
            planner = _planner(seed=12)
            state = State(5.0, -3.0, 0.5)
            controls = []
            for _ in range(5):
                u, _ = mppi.plan(state, planner, WORLD, RPA)
                controls.append((u.v, u.omega))
            results.append(controls)
        assert results[0] == results[1]

    def test_control_is_feasible(self):
        planner = _planner(seed=13)
        u, diag = mppi.plan(State(5.0, -3.0, 0.5), planner, WORLD, RPA)
        b = SMALL.bounds
        assert b.v_min <= u.v <= b.v_max
        assert b.omega_min <= u.omega <= b.omega_max
        assert diag.opt_time > 0
        assert 1.0 <= diag.effective_sample_size <= SMALL.n_samples

    def test_nominal_is_shifted_update(self):
        planner = _planner(seed=14)
        u, _ = mppi.plan(State(5.0, -3.0, 0.5), planner, WORLD, RPA)
        # After planning, nominal[[-1]] == nominal[[-2]] (last control repeated).
        assert np.array_equal(planner.nominal[-1], planner.nominal[-2])

    def test_drives_toward_goal_in_open_space(self):
        world = World(obstacles=(), goal=(0.0, 10.0), bounds=(-20, -20, 20, 20))
        params = CostParams(mode=CostMode.BASELINE, p_goal=(0.0, 10.0))
        planner = _planner(MppiParams(n_samples=256, horizon=30), seed=15)
        state = State(0.0, 0.0, math.pi / 2)
        from rpa_mppi.dynamics import step

        for _ in range(120):
            u, _ = mppi.plan(state, planner, world, params)
            state = step(state, u, 0.1)
        assert math.hypot(state.x, state.y - 10.0) < 1.0
