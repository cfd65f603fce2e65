"""A* grid planner and subgoal extraction for the A*-guided MPPI baseline.

The world is rasterized onto a uniform grid (cell blocked iff its center lies
inside an inflated obstacle). A* runs 8-connected with unit/sqrt(2) edge costs,
octile heuristic, no corner cutting, and deterministic tie-breaking
(lower f, then lower h, then row-major cell order).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .costs import indicator_xy
from .domain import State, World

SQRT2 = math.sqrt(2.0)

# 8-connected moves in row-major order, with per-move cost.
_MOVES = (
    (-1, -1, SQRT2),
    (-1, 0, 1.0),
    (-1, 1, SQRT2),
    (0, -1, 1.0),
    (0, 1, 1.0),
    (1, -1, SQRT2),
    (1, 0, 1.0),
    (1, 1, SQRT2),
)


class InfeasibleGrid(ValueError):
    """Raised when a required cell (goal or start) rasterizes as blocked."""


class NoPath(RuntimeError):
    """Raised when the goal cell is unreachable from the start cell."""


@dataclass(frozen=True)
class GridMap:
    """Occupancy grid. occupancy[ix, iy] is True when the cell is blocked."""

    origin: tuple[float, float]
    resolution: float
    occupancy: np.ndarray

    def __post_init__(self) -> None:
        self.occupancy.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.occupancy.shape

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        ix = int(math.floor((x - self.origin[0]) / self.resolution))
        iy = int(math.floor((y - self.origin[1]) / self.resolution))
        nx, ny = self.occupancy.shape
        return (min(max(ix, 0), nx - 1), min(max(iy, 0), ny - 1))

    def center_of(self, cell: tuple[int, int]) -> tuple[float, float]:
        return (
            self.origin[0] + (cell[0] + 0.5) * self.resolution,
            self.origin[1] + (cell[1] + 0.5) * self.resolution,
        )

    def blocked(self, cell: tuple[int, int]) -> bool:
        return bool(self.occupancy[cell])


@dataclass(frozen=True)
class ReferencePath:
    """A* output: 8-adjacent free cells and their centers, start to goal."""

    cells: tuple[tuple[int, int], ...]
    waypoints: np.ndarray  # (N, 2) cell centers

    def __post_init__(self) -> None:
        self.waypoints.setflags(write=False)


def rasterize(world: World, resolution: float) -> GridMap:
    """Build an occupancy grid over the world bounds (cell-center rule).

    Raises InfeasibleGrid if the goal cell comes out blocked.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    xmin, ymin, xmax, ymax = world.bounds
    nx = max(1, int(math.ceil((xmax - xmin) / resolution)))
    ny = max(1, int(math.ceil((ymax - ymin) / resolution)))
    cx = xmin + (np.arange(nx) + 0.5) * resolution
    cy = ymin + (np.arange(ny) + 0.5) * resolution
    occ = indicator_xy(cx[:, None], cy[None, :], world).astype(bool)
    grid = GridMap(origin=(xmin, ymin), resolution=resolution, occupancy=occ)
    if grid.blocked(grid.cell_of(*world.goal)):
        raise InfeasibleGrid("goal cell is blocked at this resolution")
    return grid


def octile(a: tuple[int, int], b: tuple[int, int]) -> float:
    """Octile distance in cells: max(|dx|,|dy|) + (sqrt(2)-1) min(|dx|,|dy|)."""
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    return max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy)


def astar(
    grid: GridMap, start: tuple[int, int], goal: tuple[int, int]
) -> ReferencePath:
    """8-connected shortest path with octile heuristic.

    Diagonal moves through a blocked corner-adjacent pair are forbidden.
    Raises InfeasibleGrid for blocked endpoints and NoPath when unreachable.
    """
    if grid.blocked(start) or grid.blocked(goal):
        raise InfeasibleGrid("start or goal cell is blocked")
    nx, ny = grid.shape
    occ = grid.occupancy
    g_score = {start: 0.0}
    came_from: dict[tuple[int, int], tuple[int, int]] = {}
    closed: set[tuple[int, int]] = set()
    h0 = octile(start, goal)
    # Heap entries: (f, h, row-major index, cell) for deterministic tie-breaks.
    frontier = [(h0, h0, start[0] * ny + start[1], start)]
    while frontier:
        _, _, _, current = heapq.heappop(frontier)
        if current in closed:
            continue
        if current == goal:
            cells = [current]
            while cells[-1] != start:
                cells.append(came_from[cells[-1]])
            cells.reverse()
            waypoints = np.array([grid.center_of(c) for c in cells])
            return ReferencePath(cells=tuple(cells), waypoints=waypoints)
        closed.add(current)
        ci, cj = current
        base = g_score[current]
        for di, dj, move_cost in _MOVES:
            ni, nj = ci + di, cj + dj
            if not (0 <= ni < nx and 0 <= nj < ny) or occ[ni, nj]:
                continue
            if di != 0 and dj != 0 and (occ[ci + di, cj] or occ[ci, cj + dj]):
                continue  # no corner cutting
            neighbor = (ni, nj)
            tentative = base + move_cost
            if tentative < g_score.get(neighbor, math.inf):
                g_score[neighbor] = tentative
                came_from[neighbor] = current
                h = octile(neighbor, goal)
                heapq.heappush(
                    frontier, (tentative + h, h, ni * ny + nj, neighbor)
                )
    raise NoPath(f"no path from {start} to {goal}")


def path_cost(path: ReferencePath) -> float:
    """Total edge cost of a reference path, in cells."""
    total = 0.0
    for a, b in zip(path.cells, path.cells[1:]):
        total += SQRT2 if (a[0] != b[0] and a[1] != b[1]) else 1.0
    return total


def nearest_index(path: ReferencePath, state: State, min_index: int = 0) -> int:
    """Index of the waypoint nearest the robot, at or after min_index."""
    wp = path.waypoints
    if wp.shape[0] == 0:
        raise ValueError("empty reference path")
    if not (0 <= min_index < wp.shape[0]):
        raise ValueError("min_index out of range")
    d2 = (wp[min_index:, 0] - state.x) ** 2 + (wp[min_index:, 1] - state.y) ** 2
    return min_index + int(np.argmin(d2))


def subgoal(
    path: ReferencePath, state: State, lookahead: float, min_index: int = 0
) -> tuple[float, float]:
    """First path point at arc length >= lookahead beyond the nearest waypoint.

    Saturates to the final waypoint when the remaining path is shorter. The
    nearest-waypoint search starts at min_index, so callers that track their
    progress keep the subgoal monotone along the path; an unrestricted
    nearest-point projection can jump to a later path segment that passes
    close by on the far side of an obstacle.
    """
    wp = path.waypoints
    if wp.shape[0] == 0:
        raise ValueError("empty reference path")
    if not (0 <= min_index < wp.shape[0]):
        raise ValueError("min_index out of range")
    d2 = (wp[min_index:, 0] - state.x) ** 2 + (wp[min_index:, 1] - state.y) ** 2
    i = min_index + int(np.argmin(d2))
    travelled = 0.0
    while i + 1 < wp.shape[0] and travelled < lookahead:
        travelled += float(np.hypot(*(wp[i + 1] - wp[i])))
        i += 1
    return (float(wp[i, 0]), float(wp[i, 1]))


def astar_mppi_cost(p, world: World, subgoal_point, w_obst: float) -> float:
    """Baseline tracking cost with the goal replaced by the current subgoal."""
    sx, sy = subgoal_point
    x, y = float(p[0]), float(p[1])
    return (sx - x) ** 2 + (sy - y) ** 2 + w_obst * float(indicator_xy(x, y, world))
