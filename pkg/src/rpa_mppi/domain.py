"""Core value types shared by every module: states, controls, worlds, parameters.

All types are immutable after construction and safe to share across workers.
Angles are stored normalized to the half-open interval (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

TAU = 2.0 * math.pi

# Paper-default actuation limits for the unicycle: v in [0, 1] m/s, omega in
# [-0.5, 0.5] rad/s.
DEFAULT_V_BOUNDS = (0.0, 1.0)
DEFAULT_OMEGA_BOUNDS = (-0.5, 0.5)


def _require_finite(**fields: float) -> None:
    for name, value in fields.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


def normalize_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi].

    The interval is half-open with pi included, so normalize_angle(-pi) == pi.
    Idempotent: normalizing twice gives the same result.
    """
    _require_finite(theta=theta)
    r = theta % TAU  # [0, tau)
    if r > math.pi:
        r -= TAU
    return r


@dataclass(frozen=True)
class State:
    """Robot pose (x, y, heading). Heading is normalized on construction."""

    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        _require_finite(x=self.x, y=self.y, theta=self.theta)
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Control:
    """Unicycle input: linear velocity v [m/s] and angular velocity omega [rad/s]."""

    v: float
    omega: float

    def __post_init__(self) -> None:
        _require_finite(v=self.v, omega=self.omega)


@dataclass(frozen=True)
class ControlBounds:
    """Per-channel box bounds applied by clipping."""

    v_min: float = DEFAULT_V_BOUNDS[0]
    v_max: float = DEFAULT_V_BOUNDS[1]
    omega_min: float = DEFAULT_OMEGA_BOUNDS[0]
    omega_max: float = DEFAULT_OMEGA_BOUNDS[1]

    def __post_init__(self) -> None:
        _require_finite(
            v_min=self.v_min,
            v_max=self.v_max,
            omega_min=self.omega_min,
            omega_max=self.omega_max,
        )
        if self.v_min > self.v_max:
            raise ValueError("v_min must not exceed v_max")
        if self.omega_min > self.omega_max:
            raise ValueError("omega_min must not exceed omega_max")


@dataclass(frozen=True)
class RectObstacle:
    """Axis-aligned rectangular obstacle with a safety margin.

    Collision checks test the inflated footprint
    (width + 2*margin) x (height + 2*margin); the inflation is a Minkowski
    sum with an axis-aligned square, so corners stay square.
    Points exactly on the inflated boundary count as inside.
    """

    center: tuple[float, float]
    width: float
    height: float
    safety_margin: float = 0.0

    def __post_init__(self) -> None:
        cx, cy = self.center
        _require_finite(
            cx=cx, cy=cy, width=self.width, height=self.height, margin=self.safety_margin
        )
        object.__setattr__(self, "center", (float(cx), float(cy)))
        if self.width <= 0 or self.height <= 0:
            raise ValueError("obstacle width and height must be positive")
        if self.safety_margin < 0:
            raise ValueError("safety_margin must be >= 0")

    @property
    def half_extents_inflated(self) -> tuple[float, float]:
        return (
            0.5 * self.width + self.safety_margin,
            0.5 * self.height + self.safety_margin,
        )

    def contains(self, x, y):
        """Inflated-footprint membership; boundary counts as inside.

        Accepts scalars or numpy arrays and broadcasts.
        """
        hw, hh = self.half_extents_inflated
        cx, cy = self.center
        return (abs(x - cx) <= hw) & (abs(y - cy) <= hh)

    def contains_true(self, x, y):
        """True-footprint membership (margin excluded); boundary inclusive.

        The margin is a planning-time inflation: costs and grids use
        `contains`, physical collision of the simulated robot uses this.
        """
        cx, cy = self.center
        return (abs(x - cx) <= 0.5 * self.width) & (abs(y - cy) <= 0.5 * self.height)


@dataclass(frozen=True)
class World:
    """Navigation environment: obstacles, goal, goal tolerance, outer bounds."""

    obstacles: tuple[RectObstacle, ...]
    goal: tuple[float, float]
    goal_tolerance: float = 1.0
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 20.0, 20.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        gx, gy = self.goal
        _require_finite(goal_x=gx, goal_y=gy, goal_tolerance=self.goal_tolerance)
        object.__setattr__(self, "goal", (float(gx), float(gy)))
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        if self.goal_tolerance <= 0:
            raise ValueError("goal_tolerance must be positive")
        xmin, ymin, xmax, ymax = self.bounds
        if xmin >= xmax or ymin >= ymax:
            raise ValueError("bounds must be a non-degenerate rectangle")
        for obs in self.obstacles:
            if obs.contains(gx, gy):
                raise ValueError("goal lies inside an inflated obstacle")


class CostMode(Enum):
    BASELINE = "baseline"
    RPA = "rpa"


# Sign of the repulsion term in the potential
#   g(p) = ||p_goal - p|| + sign * alpha * ||p_minimum - p||.
# The validated convention is -1 (repulsive: cost decreases moving away from
# p_minimum); +1 reproduces the attractive variant for cross-checking.
REPULSION_SIGN_VALIDATED = -1


@dataclass(frozen=True)
class CostParams:
    """Parameters of the stage/terminal cost (terminal cost equals stage cost)."""

    mode: CostMode
    p_goal: tuple[float, float]
    p_minimum: tuple[float, float] | None = None
    alpha: float = 0.75
    w_obst: float = 1.0e6
    repulsion_sign: int = REPULSION_SIGN_VALIDATED

    def __post_init__(self) -> None:
        gx, gy = self.p_goal
        _require_finite(p_goal_x=gx, p_goal_y=gy, alpha=self.alpha, w_obst=self.w_obst)
        object.__setattr__(self, "p_goal", (float(gx), float(gy)))
        if self.mode is CostMode.RPA:
            if self.p_minimum is None:
                raise ValueError("p_minimum is required in RPA mode")
            mx, my = self.p_minimum
            _require_finite(p_minimum_x=mx, p_minimum_y=my)
            object.__setattr__(self, "p_minimum", (float(mx), float(my)))
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie strictly in (0, 1)")
        if self.w_obst <= 0:
            raise ValueError("w_obst must be positive")
        if self.repulsion_sign not in (-1, 1):
            raise ValueError("repulsion_sign must be -1 or +1")

    def with_goal(self, p_goal: tuple[float, float]) -> "CostParams":
        return CostParams(
            mode=self.mode,
            p_goal=p_goal,
            p_minimum=self.p_minimum,
            alpha=self.alpha,
            w_obst=self.w_obst,
            repulsion_sign=self.repulsion_sign,
        )


@dataclass(frozen=True)
class MppiParams:
    """Sampling and update parameters of the controller.

    sigma_eps holds the per-channel *variances* of the diagonal sampling
    covariance. Paper defaults: K=1000, lambda=0.10, diag{1.00, 1.00}, dt=0.1.
    """

    n_samples: int = 1000
    horizon: int = 50
    temperature: float = 0.10
    sigma_eps: tuple[float, float] = (1.0, 1.0)
    bounds: ControlBounds = field(default_factory=ControlBounds)
    dt: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma_eps", tuple(float(s) for s in self.sigma_eps))
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if len(self.sigma_eps) != 2 or any(s <= 0 for s in self.sigma_eps):
            raise ValueError("sigma_eps must be two positive variances")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class AStarParams:
    """Grid planner parameters: 0.50 m cells, 2.00 m lookahead.

    clearance is extra obstacle inflation applied only when rasterizing the
    guidance grid. Shortest grid paths hug inflated-obstacle corners, which
    puts subgoals one cell from the penalty region; the extra inflation keeps
    reference paths centered in narrow passages. It does not change the
    controller's cost function or the collision model.
    """

    grid_resolution: float = 0.50
    lookahead: float = 2.00
    clearance: float = 0.50

    def __post_init__(self) -> None:
        if self.grid_resolution <= 0:
            raise ValueError("grid_resolution must be positive")
        if self.lookahead <= 0:
            raise ValueError("lookahead must be positive")
        if self.clearance < 0:
            raise ValueError("clearance must be nonnegative")


class PlannerKind(Enum):
    STD_MPPI = "std-mppi"
    ASTAR_MPPI = "astar-mppi"
    RPA_MPPI = "rpa-mppi"


@dataclass(frozen=True)
class ScenarioConfig:
    """One fully specified navigation trial setup."""

    world: World
    initial_states: tuple[State, ...]
    planner: PlannerKind
    mppi: MppiParams
    cost: CostParams
    astar: AStarParams = field(default_factory=AStarParams)
    time_limit: float = 50.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "initial_states", tuple(self.initial_states))
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if not self.initial_states:
            raise ValueError("at least one initial state is required")

    @property
    def max_steps(self) -> int:
        return int(round(self.time_limit / self.mppi.dt))
