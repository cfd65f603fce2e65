"""Cost machinery: obstacle indicator, baseline and repulsive-potential costs,
the potential's analytic gradient, rollout cost, and the constant-control
cost-to-go.

Terminal cost equals stage cost in both formulations, so the cost of a rollout
is the stage cost summed over all T+1 visited states plus the bilinear control
term lambda * sum_t u_hat_t^T Sigma_eps^{-1} u_t.

The repulsive potential is
    g(p) = ||p_goal - p|| + sign * alpha * ||p_minimum - p||,
with sign = -1 in the validated convention (the term *rewards* distance from
p_minimum). sign = +1 is kept available so the verification tooling can
demonstrate that the attractive variant re-introduces entrapment.
"""

from __future__ import annotations

import math

import numpy as np

from .domain import CostMode, CostParams, MppiParams, World


class NonDifferentiablePoint(ValueError):
    """Raised when the potential gradient is requested at p_goal or p_minimum."""


def indicator(p, world: World):
    """1 if p lies inside any inflated obstacle (boundary inclusive), else 0.

    Accepts a (2,) point or coordinate arrays via indicator_xy.
    """
    x, y = float(p[0]), float(p[1])
    return int(indicator_xy(x, y, world))


def indicator_xy(x, y, world: World):
    """Vectorized indicator over coordinate arrays (or scalars)."""
    hit = np.zeros(np.broadcast(x, y).shape, dtype=bool)
    for obs in world.obstacles:
        hit |= obs.contains(x, y)
    return hit.astype(float) if hit.shape else float(hit)


def collides_true(x, y, world: World) -> bool:
    """Physical collision test against the un-inflated obstacle footprints.

    The safety margin only shapes the cost field and the occupancy grid; a
    simulated robot inside the margin band is penalized, not crashed.
    """
    return any(bool(obs.contains_true(x, y)) for obs in world.obstacles)


def baseline_cost(p, world: World, params: CostParams) -> float:
    """Squared goal distance plus collision penalty (conventional formulation)."""
    return float(_stage_xy(float(p[0]), float(p[1]), world, params, CostMode.BASELINE))


def potential_g(p, params: CostParams) -> float:
    """The obstacle-free part of the repulsive-potential cost."""
    gx, gy = params.p_goal
    mx, my = params.p_minimum
    x, y = float(p[0]), float(p[1])
    return math.hypot(gx - x, gy - y) + params.repulsion_sign * params.alpha * math.hypot(
        mx - x, my - y
    )


def rpa_cost(p, world: World, params: CostParams) -> float:
    """potential_g plus the collision penalty."""
    return potential_g(p, params) + params.w_obst * indicator(p, world)


def grad_g(p, params: CostParams) -> tuple[float, float]:
    """Closed-form gradient of potential_g.

    Undefined exactly at p_goal and p_minimum; raises NonDifferentiablePoint
    there.
    """
    gx, gy = params.p_goal
    mx, my = params.p_minimum
    x, y = float(p[0]), float(p[1])
    rg = math.hypot(x - gx, y - gy)
    rm = math.hypot(x - mx, y - my)
    if rg == 0.0 or rm == 0.0:
        raise NonDifferentiablePoint(f"gradient undefined at {(x, y)}")
    s = params.repulsion_sign * params.alpha
    return (
        (x - gx) / rg + s * (x - mx) / rm,
        (y - gy) / rg + s * (y - my) / rm,
    )


def grad_g_field(x, y, params: CostParams) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized grad_g over coordinate arrays.

    The caller is responsible for keeping sample points away from the two
    singular points; values there come out as inf/nan.
    """
    gx, gy = params.p_goal
    mx, my = params.p_minimum
    rg = np.hypot(x - gx, y - gy)
    rm = np.hypot(x - mx, y - my)
    s = params.repulsion_sign * params.alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        return (
            (x - gx) / rg + s * (x - mx) / rm,
            (y - gy) / rg + s * (y - my) / rm,
        )


def _stage_xy(x, y, world: World, params: CostParams, mode: CostMode):
    """Stage cost c(p) (== terminal cost) for scalar or array coordinates."""
    gx, gy = params.p_goal
    dxg = gx - x
    dyg = gy - y
    if mode is CostMode.BASELINE:
        dist_term = dxg * dxg + dyg * dyg
    else:
        mx, my = params.p_minimum
        dxm = mx - x
        dym = my - y
        dist_term = np.sqrt(dxg * dxg + dyg * dyg) + (
            params.repulsion_sign * params.alpha
        ) * np.sqrt(dxm * dxm + dym * dym)
    return dist_term + params.w_obst * indicator_xy(x, y, world)


def stage_cost(p, world: World, params: CostParams) -> float:
    """Mode-dispatched stage cost at a point."""
    return float(_stage_xy(float(p[0]), float(p[1]), world, params, params.mode))


def stage_cost_field(x, y, world: World, params: CostParams) -> np.ndarray:
    """Vectorized stage cost over coordinate arrays (used by grid oracles)."""
    return _stage_xy(np.asarray(x, dtype=float), np.asarray(y, dtype=float), world, params, params.mode)


def rollout_cost(
    traj: np.ndarray,
    nominal: np.ndarray,
    perturbed: np.ndarray,
    world: World,
    params: CostParams,
    mppi: MppiParams,
) -> float:
    """Cost of one rollout: terminal + stage costs + bilinear control term.

    traj: (T+1, 3) states generated from `perturbed`; nominal/perturbed: (T, 2).
    The control term uses the clipped perturbed input, consistent with what the
    dynamics actually executed.
    """
    traj = np.asarray(traj, dtype=float)
    nominal = np.asarray(nominal, dtype=float)
    perturbed = np.asarray(perturbed, dtype=float)
    horizon = nominal.shape[0]
    if perturbed.shape != nominal.shape or traj.shape[0] != horizon + 1:
        raise ValueError("trajectory/control sequence lengths are inconsistent")
    state_term = float(
        np.sum(_stage_xy(traj[:, 0], traj[:, 1], world, params, params.mode))
    )
    inv_var = 1.0 / np.asarray(mppi.sigma_eps)
    control_term = mppi.temperature * float(np.sum(nominal * inv_var * perturbed))
    return state_term + control_term


def rollout_cost_batch(
    trajs: np.ndarray,
    nominal: np.ndarray,
    perturbed: np.ndarray,
    world: World,
    params: CostParams,
    mppi: MppiParams,
) -> np.ndarray:
    """rollout_cost for K rollouts at once. trajs: (K, T+1, 3); perturbed: (K, T, 2)."""
    state_terms = np.sum(
        _stage_xy(trajs[:, :, 0], trajs[:, :, 1], world, params, params.mode), axis=1
    )
    inv_var = 1.0 / np.asarray(mppi.sigma_eps)
    control_terms = mppi.temperature * np.einsum(
        "tc,ktc->k", nominal * inv_var, perturbed
    )
    return state_terms + control_terms


def cost_to_go_const(
    p, horizon: int, world: World, params: CostParams, mppi: MppiParams
) -> float:
    """Cost-to-go of holding position with the zero control sequence.

    Equals (T+1) * (stage cost at p); the control term vanishes for zero
    controls. Matches rollout_cost of the stationary rollout exactly.
    """
    return (horizon + 1) * stage_cost(p, world, params)
