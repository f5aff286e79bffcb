"""Coverage-scan planning: grid decomposition and serpentine sweeps.

The survey area is split into one vertical strip per UAV.  Each strip is
tiled with equal rectangular cells small enough that a UAV hovering over
a cell center reaches the whole cell (half-diagonal within the ground
coverage radius), and the UAV sweeps the cell centers in a serpentine
order without stopping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Vec2, vec2


def ground_coverage_radius(comm_range: float, h: float) -> float:
    """Radius of the ground disk reachable from altitude h."""
    if comm_range <= h:
        raise ValueError(f"no ground coverage: comm_range {comm_range} <= altitude {h}")
    return math.sqrt(comm_range**2 - h**2)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned ground rectangle [x0, x0+width] x [y0, y0+height]."""
    x0: float
    y0: float
    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("rectangle sides must be positive")

    def contains(self, p) -> bool:
        return (self.x0 <= p[0] <= self.x0 + self.width
                and self.y0 <= p[1] <= self.y0 + self.height)


@dataclass(frozen=True)
class ScanGrid:
    origin: Vec2            # lower-left corner of the gridded rectangle
    cell_width: float
    cell_height: float
    columns: int
    rows: int

    def __post_init__(self):
        if self.columns < 1 or self.rows < 1:
            raise ValueError("grid needs at least one cell")
        if self.cell_width <= 0 or self.cell_height <= 0:
            raise ValueError("cell sides must be positive")

    @property
    def half_diagonal(self) -> float:
        return math.hypot(self.cell_width / 2, self.cell_height / 2)

    def center(self, col: int, row: int) -> Vec2:
        return vec2(self.origin[0] + (col + 0.5) * self.cell_width,
                    self.origin[1] + (row + 0.5) * self.cell_height)

    def centers(self) -> np.ndarray:
        """All cell centers, shape (columns*rows, 2), column-major order."""
        out = np.empty((self.columns * self.rows, 2))
        k = 0
        for c in range(self.columns):
            for r in range(self.rows):
                out[k] = self.center(c, r)
                k += 1
        return out


def build_grid(sub_area: Rect, g: float) -> ScanGrid:
    """Tile sub_area with the fewest equal cells whose half-diagonal is <= g.

    A square cell of side g*sqrt(2) has half-diagonal exactly g, so
    ceil(side / (g*sqrt(2))) cells per axis suffice; equal division then
    only shrinks the cells.
    """
    if g <= 0:
        raise ValueError("coverage radius must be positive")
    side = g * math.sqrt(2)
    columns = max(1, math.ceil(sub_area.width / side))
    rows = max(1, math.ceil(sub_area.height / side))
    grid = ScanGrid(origin=vec2(sub_area.x0, sub_area.y0),
                    cell_width=sub_area.width / columns,
                    cell_height=sub_area.height / rows,
                    columns=columns, rows=rows)
    assert grid.half_diagonal <= g * (1 + 1e-12)
    return grid


@dataclass(frozen=True)
class ScanPath:
    """Closed sweep: start point, every cell center once, back to start."""
    start: Vec2
    waypoints: np.ndarray   # cell centers in visit order, shape (N, 2)
    total_length: float     # entry leg + inter-center legs + return leg

    def points(self) -> np.ndarray:
        """Full polyline including the start/return point, shape (N+2, 2)."""
        return np.vstack([self.start, self.waypoints, self.start])


def _serpentine_order(columns: int, rows: int, by_column: bool) -> list[tuple[int, int]]:
    order = []
    if by_column:
        for c in range(columns):
            rs = range(rows) if c % 2 == 0 else range(rows - 1, -1, -1)
            order.extend((c, r) for r in rs)
    else:
        for r in range(rows):
            cs = range(columns) if r % 2 == 0 else range(columns - 1, -1, -1)
            order.extend((c, r) for c in cs)
    return order


def boustrophedon_path(grid: ScanGrid, start: Vec2) -> ScanPath:
    """Serpentine sweep of all cell centers, closed at the start point.

    Lane direction is whichever orientation needs fewer lanes (hence
    fewer turns); ties go to column-by-column lanes.
    """
    by_column = grid.columns <= grid.rows
    order = _serpentine_order(grid.columns, grid.rows, by_column)
    pts = np.array([grid.center(c, r) for c, r in order])
    poly = np.vstack([np.asarray(start, dtype=float), pts,
                      np.asarray(start, dtype=float)])
    legs = np.linalg.norm(np.diff(poly, axis=0), axis=1)
    return ScanPath(start=vec2(*start), waypoints=pts,
                    total_length=float(np.sum(legs)))


def partition_area(area: Rect, m: int) -> list[Rect]:
    """Split the area into m equal-width vertical strips, one per UAV."""
    if m < 1:
        raise ValueError("need at least one UAV")
    w = area.width / m
    return [Rect(area.x0 + i * w, area.y0, w, area.height) for i in range(m)]
