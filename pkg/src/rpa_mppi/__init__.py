"""Local-minima-free MPPI navigation via repulsive potential augmentation.

Submodules:
    domain    -- shared value types (states, controls, worlds, parameters)
    dynamics  -- unicycle model, clipping, rollouts
    costs     -- baseline and repulsive-potential costs, gradients, rollout cost
    mppi      -- the sampling-based controller
    planners  -- A* grid planner and subgoal extraction
    analysis  -- numerical certification of the cost-field properties
    bench     -- scenario benchmark (SR / RDST / RDPL / CT)
    config    -- YAML configuration I/O
    cli       -- command-line interface (rpa-mppi run | bench | verify)
"""

from .domain import (
    AStarParams,
    Control,
    ControlBounds,
    CostMode,
    CostParams,
    MppiParams,
    PlannerKind,
    RectObstacle,
    ScenarioConfig,
    State,
    World,
    normalize_angle,
)

__version__ = "0.1.0"

__all__ = [
    "AStarParams",
    "Control",
    "ControlBounds",
    "CostMode",
    "CostParams",
    "MppiParams",
    "PlannerKind",
    "RectObstacle",
    "ScenarioConfig",
    "State",
    "World",
    "normalize_angle",
    "__version__",
]
