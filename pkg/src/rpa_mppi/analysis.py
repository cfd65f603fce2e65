"""Numerical certification of the cost-field claims: finite-difference
gradient oracle, exhaustive grid search for local minima, and the four
sign/minimum properties of the repulsive potential.

Everything here is an *oracle*: it checks the closed-form implementations in
`costs` by independent means (central differences, dense sampling, exhaustive
neighbor comparison on a lattice). Reports state explicitly that the lattice
certifies only sampled points, not the continuum.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import costs
from .domain import CostMode, CostParams, MppiParams, RectObstacle, World


def finite_diff_grad(f, p, h: float) -> tuple[float, float]:
    """Central-difference gradient of a scalar field f((x, y)) at p."""
    if h <= 0:
        raise ValueError("h must be positive")
    x, y = float(p[0]), float(p[1])
    return (
        (f((x + h, y)) - f((x - h, y))) / (2.0 * h),
        (f((x, y + h)) - f((x, y - h))) / (2.0 * h),
    )


@dataclass(frozen=True)
class Minimum:
    point: tuple[float, float]
    cost: float
    is_global: bool


@dataclass(frozen=True)
class MinimaReport:
    minima: tuple[Minimum, ...]
    grid_resolution: float
    region: tuple[float, float, float, float]
    cost_mode: str

    def global_minima(self) -> tuple[Minimum, ...]:
        return tuple(m for m in self.minima if m.is_global)

    def to_text(self) -> str:
        lines = [
            "minima-report",
            f"cost_mode: {self.cost_mode}",
            "region: " + " ".join(f"{v:.6g}" for v in self.region),
            f"resolution: {self.grid_resolution:.6g}",
            "note: certifies lattice nodes only, not the continuum",
            f"count: {len(self.minima)}",
        ]
        for m in self.minima:
            kind = "global" if m.is_global else "local"
            lines.append(
                f"minimum: {m.point[0]:.6f} {m.point[1]:.6f} {m.cost:.9g} {kind}"
            )
        return "\n".join(lines) + "\n"


_NEIGHBOR_SHIFTS = [
    (di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)
]


def grid_local_minima(
    cost_fn, region: tuple[float, float, float, float], resolution: float
) -> MinimaReport:
    """Exhaustive 8-neighbor minimum search of a cost field on a lattice.

    cost_fn(X, Y) must evaluate vectorized on coordinate arrays. A node is a
    local minimum if no 8-neighbor is strictly lower; equal-cost plateaus are
    collapsed by flood fill and count as one minimum only when their entire
    outer boundary is strictly higher. The report flags grid-global minima.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    xmin, ymin, xmax, ymax = region
    xs = np.arange(xmin, xmax + 0.5 * resolution, resolution)
    ys = np.arange(ymin, ymax + 0.5 * resolution, resolution)
    cost = np.asarray(cost_fn(xs[:, None], ys[None, :]), dtype=float)

    padded = np.full((cost.shape[0] + 2, cost.shape[1] + 2), np.inf)
    padded[1:-1, 1:-1] = cost
    neighbor_min = np.full_like(cost, np.inf)
    for di, dj in _NEIGHBOR_SHIFTS:
        np.minimum(
            neighbor_min,
            padded[1 + di : 1 + di + cost.shape[0], 1 + dj : 1 + dj + cost.shape[1]],
            out=neighbor_min,
        )

    strict = cost < neighbor_min
    tied = (cost == neighbor_min) & ~strict
    global_cost = float(np.min(cost))

    minima: list[Minimum] = []
    for i, j in np.argwhere(strict):
        minima.append(
            Minimum(
                point=(float(xs[i]), float(ys[j])),
                cost=float(cost[i, j]),
                is_global=(cost[i, j] == global_cost),
            )
        )

    # Plateau handling: flood-fill equal-cost components seeded from tied
    # candidates; a plateau is a minimum iff its whole boundary is higher.
    visited = np.zeros_like(tied)
    nx, ny = cost.shape
    for i0, j0 in np.argwhere(tied):
        if visited[i0, j0]:
            continue
        value = cost[i0, j0]
        component = [(i0, j0)]
        visited[i0, j0] = True
        queue = deque(component)
        is_min = True
        while queue:
            ci, cj = queue.popleft()
            for di, dj in _NEIGHBOR_SHIFTS:
                ni, nj = ci + di, cj + dj
                if not (0 <= ni < nx and 0 <= nj < ny):
                    continue
                if cost[ni, nj] == value:
                    if not visited[ni, nj]:
                        visited[ni, nj] = True
                        component.append((ni, nj))
                        queue.append((ni, nj))
                elif cost[ni, nj] < value:
                    is_min = False
        if is_min:
            ci, cj = min(component)
            minima.append(
                Minimum(
                    point=(float(xs[ci]), float(ys[cj])),
                    cost=float(value),
                    is_global=(value == global_cost),
                )
            )

    minima.sort(key=lambda m: (m.cost, m.point))
    return MinimaReport(
        minima=tuple(minima),
        grid_resolution=resolution,
        region=tuple(float(v) for v in region),
        cost_mode=getattr(cost_fn, "cost_mode", "custom"),
    )


def greedy_descent_reaches(cost: np.ndarray, free: np.ndarray, goal_idx) -> bool:
    """True if greedy 8-neighbor descent from every free node ends at goal_idx.

    Equivalent statement of "no local minima" on the lattice: processing nodes
    in ascending cost order, each node inherits reachability from its lowest
    neighbor.
    """
    nx, ny = cost.shape
    padded = np.full((nx + 2, ny + 2), np.inf)
    padded[1:-1, 1:-1] = cost
    best = np.full((nx, ny, 2), -1, dtype=int)
    best_cost = np.full((nx, ny), np.inf)
    for di, dj in _NEIGHBOR_SHIFTS:
        shifted = padded[1 + di : 1 + di + nx, 1 + dj : 1 + dj + ny]
        better = shifted < best_cost
        best_cost[better] = shifted[better]
        ii, jj = np.nonzero(better)
        best[ii, jj, 0] = ii + di
        best[ii, jj, 1] = jj + dj

    reaches = np.zeros((nx, ny), dtype=bool)
    reaches[goal_idx] = True
    order = np.argsort(cost, axis=None, kind="stable")
    for flat in order:
        i, j = divmod(int(flat), ny)
        if reaches[i, j]:
            continue
        if best_cost[i, j] >= cost[i, j]:
            # Node is itself a (weak) minimum; only free nodes must descend.
            if free[i, j]:
                return False
            continue
        ni, nj = best[i, j]
        reaches[i, j] = reaches[ni, nj]
        if free[i, j] and not reaches[i, j]:
            return False
    return bool(np.all(reaches[free]))


@dataclass(frozen=True)
class AnalysisScene:
    """The canonical single-obstacle scene for the cost-field analysis.

    Frame: obstacle of size W x H centered at (0, H/2) (bottom edge on y = 0),
    goal at (0, y_goal) with y_goal > H, repulsion point at the origin.
    """

    obstacle_width: float = 8.0
    obstacle_height: float = 4.0
    y_goal: float = 10.0
    alpha: float = 0.75
    w_obst: float = 1.0e6
    horizon: int = 50

    def world(self) -> World:
        w = self.obstacle_width
        pad = 6.0
        return World(
            obstacles=(
                RectObstacle(
                    center=(0.0, 0.5 * self.obstacle_height),
                    width=self.obstacle_width,
                    height=self.obstacle_height,
                    safety_margin=0.0,
                ),
            ),
            goal=(0.0, self.y_goal),
            goal_tolerance=1.0,
            bounds=(-(0.5 * w + pad), -pad, 0.5 * w + pad, self.y_goal + 4.0),
        )

    def cost_params(self, mode: CostMode, repulsion_sign: int = -1) -> CostParams:
        return CostParams(
            mode=mode,
            p_goal=(0.0, self.y_goal),
            p_minimum=(0.0, 0.0) if mode is CostMode.RPA else None,
            alpha=self.alpha,
            w_obst=self.w_obst,
            repulsion_sign=repulsion_sign,
        )

    def search_region(self, inflate: float = 2.0) -> tuple[float, float, float, float]:
        xmin, ymin, xmax, ymax = self.world().bounds
        return (xmin - inflate, ymin - inflate, xmax + inflate, ymax + inflate)


def cost_to_go_field(scene: AnalysisScene, params: CostParams):
    """Vectorized constant-control cost-to-go over the scene, for grid search."""
    world = scene.world()
    multiplier = scene.horizon + 1

    def fn(x, y):
        return multiplier * costs.stage_cost_field(x, y, world, params)

    fn.cost_mode = (
        params.mode.value
        if params.mode is CostMode.BASELINE
        else f"{params.mode.value}(sign={params.repulsion_sign:+d})"
    )
    return fn


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    detail: str
    counterexample: tuple[float, float] | None = None


@dataclass(frozen=True)
class PropertyReport:
    scene: AnalysisScene
    repulsion_sign: int
    checks: tuple[PropertyCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [
            "property-report",
            f"repulsion_sign: {self.repulsion_sign:+d}",
            f"alpha: {self.scene.alpha:.6g}",
            f"y_goal: {self.scene.y_goal:.6g}",
            f"obstacle: W={self.scene.obstacle_width:.6g} H={self.scene.obstacle_height:.6g}",
            "note: sign convention -1 (repulsive) is the validated one; "
            "the potential rewards distance from the designated minimum",
        ]
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            line = f"{c.name}: {status} ({c.detail})"
            if c.counterexample is not None:
                line += f" counterexample=({c.counterexample[0]:.4f}, {c.counterexample[1]:.4f})"
            lines.append(line)
        lines.append(f"all_passed: {self.all_passed}")
        return "\n".join(lines) + "\n"


def _first_violation(xs, ys, values, predicate) -> tuple[float, float] | None:
    bad = ~predicate(values)
    if not np.any(bad):
        return None
    idx = np.argwhere(bad)[0]
    return (float(np.broadcast_to(xs, values.shape)[tuple(idx)]),
            float(np.broadcast_to(ys, values.shape)[tuple(idx)]))


def verify_properties(
    scene: AnalysisScene,
    repulsion_sign: int = -1,
    sample_step: float = 0.01,
    grid_resolution: float = 0.05,
) -> PropertyReport:
    """Check the feasibility condition and the four potential-field properties.

    Signs of the lateral/vertical gradient components are verified by dense
    sampling along the obstacle bottom edge and over the obstacle band; the
    unique-minimum property is verified by exhaustive lattice search of the
    constant-control cost-to-go. Failures are reported, never raised.
    """
    params = scene.cost_params(CostMode.RPA, repulsion_sign=repulsion_sign)
    half_w = 0.5 * scene.obstacle_width
    checks: list[PropertyCheck] = []

    bound = scene.y_goal * math.sqrt(
        scene.alpha**2 / (1.0 - scene.alpha**2)
    )
    checks.append(
        PropertyCheck(
            name="feasibility",
            passed=half_w < bound,
            detail=f"W/2={half_w:.4f} vs y_goal*sqrt(a^2/(1-a^2))={bound:.4f}",
        )
    )

    # Lateral escape push along the bottom edge, both sides of the symmetry axis.
    xs = np.arange(sample_step, half_w + 0.5 * sample_step, sample_step)
    xs = np.minimum(xs, half_w)
    gx_pos, _ = costs.grad_g_field(xs, np.zeros_like(xs), params)
    ce = _first_violation(xs, np.zeros_like(xs), gx_pos, lambda v: v < 0)
    checks.append(
        PropertyCheck(
            name="property1_dgdx_negative_right",
            passed=ce is None,
            detail=f"{xs.size} samples on (0, W/2], max dg/dx={np.max(gx_pos):.3e}",
            counterexample=ce,
        )
    )
    gx_neg, _ = costs.grad_g_field(-xs, np.zeros_like(xs), params)
    ce = _first_violation(-xs, np.zeros_like(xs), gx_neg, lambda v: v > 0)
    checks.append(
        PropertyCheck(
            name="property2_dgdx_positive_left",
            passed=ce is None,
            detail=f"{xs.size} samples on [-W/2, 0), min dg/dx={np.min(gx_neg):.3e}",
            counterexample=ce,
        )
    )

    # Downhill-toward-obstacle-top push over the band 0 <= y <= H.
    bx = np.arange(-half_w, half_w + 0.5 * sample_step, sample_step)
    by = np.arange(0.0, scene.obstacle_height + 0.5 * sample_step, sample_step)
    bxg, byg = np.meshgrid(bx, by, indexing="ij")
    _, gy_band = costs.grad_g_field(bxg, byg, params)
    singular = np.hypot(bxg, byg) < 1e-3  # origin is non-differentiable
    gy_masked = np.where(singular, -1.0, gy_band)
    ce = _first_violation(bxg, byg, gy_masked, lambda v: v < 0)
    checks.append(
        PropertyCheck(
            name="property3_dgdy_negative_band",
            passed=ce is None,
            detail=(
                f"{gy_masked.size} samples over [-W/2, W/2] x [0, H], "
                f"max dg/dy={np.max(gy_masked):.3e}"
            ),
            counterexample=ce,
        )
    )

    # Unique global minimum at the goal, no other lattice minima.
    report = grid_local_minima(
        cost_to_go_field(scene, params), scene.search_region(), grid_resolution
    )
    goal = (0.0, scene.y_goal)
    ok = len(report.minima) == 1 and report.minima[0].is_global
    if ok:
        p = report.minima[0].point
        ok = math.hypot(p[0] - goal[0], p[1] - goal[1]) <= grid_resolution
    ce = None
    if not ok and report.minima:
        extra = [m for m in report.minima if not m.is_global]
        ce = (extra or report.minima)[0].point
    checks.append(
        PropertyCheck(
            name="property4_unique_global_minimum",
            passed=ok,
            detail=f"lattice minima found: {len(report.minima)} at res {grid_resolution}",
            counterexample=ce,
        )
    )

    return PropertyReport(
        scene=scene, repulsion_sign=repulsion_sign, checks=tuple(checks)
    )


def baseline_entrapment(
    scene: AnalysisScene, grid_resolution: float = 0.05
) -> tuple[MinimaReport, bool]:
    """Grid-search the baseline cost; True when a non-global minimum sits next
    to the origin (the entrapment point) while the goal stays globally optimal."""
    params = scene.cost_params(CostMode.BASELINE)
    report = grid_local_minima(
        cost_to_go_field(scene, params), scene.search_region(), grid_resolution
    )
    near_origin = any(
        not m.is_global
        and math.hypot(m.point[0], m.point[1]) <= grid_resolution + 1e-12
        for m in report.minima
    )
    goal_is_global = any(
        m.is_global
        and math.hypot(m.point[0] - 0.0, m.point[1] - scene.y_goal) <= grid_resolution
        for m in report.minima
    )
    return report, (len(report.minima) >= 2 and near_origin and goal_is_global)


def gradient_oracle_agreement(
    params: CostParams,
    region: tuple[float, float, float, float],
    n_points: int = 10_000,
    h: float = 1e-6,
    rel_tol: float = 1e-5,
    exclusion: float = 1e-3,
    seed: int = 0,
) -> tuple[int, float]:
    """Compare grad_g with central differences of potential_g at random points.

    Returns (number of compared points, worst relative error). Points within
    `exclusion` of the two singular points are resampled.
    """
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = region
    worst = 0.0
    checked = 0
    goal = np.array(params.p_goal)
    pmin = np.array(params.p_minimum)
    while checked < n_points:
        pts = rng.uniform([xmin, ymin], [xmax, ymax], size=(n_points, 2))
        keep = (np.linalg.norm(pts - goal, axis=1) > exclusion) & (
            np.linalg.norm(pts - pmin, axis=1) > exclusion
        )
        for p in pts[keep]:
            if checked >= n_points:
                break
            analytic = np.array(costs.grad_g(p, params))
            numeric = np.array(
                finite_diff_grad(lambda q: costs.potential_g(q, params), p, h)
            )
            err = np.linalg.norm(analytic - numeric) / max(
                np.linalg.norm(analytic), 1e-30
            )
            worst = max(worst, float(err))
            checked += 1
    return checked, worst
