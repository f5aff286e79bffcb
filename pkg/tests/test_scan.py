import math

import numpy as np
import pytest

from uavloc.scan import (Rect, ScanGrid, boustrophedon_path, build_grid,
                         ground_coverage_radius, partition_area)

AREA = Rect(0.0, 0.0, 1120.0, 640.0)


def test_ground_coverage_radius():
    # sqrt(150^2 - 100^2)
    assert ground_coverage_radius(150.0, 100.0) == pytest.approx(
        111.80339887498948, abs=1e-12)
    with pytest.raises(ValueError):
        ground_coverage_radius(100.0, 100.0)
    with pytest.raises(ValueError):
        ground_coverage_radius(90.0, 100.0)


def test_rect_contains():
    r = Rect(10.0, 20.0, 5.0, 5.0)
    assert r.contains((12.0, 22.0))
    assert r.contains((10.0, 20.0))
    assert not r.contains((16.0, 22.0))
    with pytest.raises(ValueError):
        Rect(0.0, 0.0, -1.0, 5.0)


def test_build_grid_default_area():
    g = ground_coverage_radius(150.0, 100.0)
    grid = build_grid(AREA, g)
    assert (grid.columns, grid.rows) == (8, 5)
    assert grid.cell_width == pytest.approx(140.0)
    assert grid.cell_height == pytest.approx(128.0)
    # sqrt(70^2 + 64^2)
    assert grid.half_diagonal == pytest.approx(94.847245611035, abs=1e-9)
    assert grid.half_diagonal <= g
    assert np.allclose(grid.center(0, 0), [70.0, 64.0])
    assert np.allclose(grid.center(7, 4), [1050.0, 576.0])
    assert grid.centers().shape == (40, 2)


def test_build_grid_single_cell_when_area_small():
    g = ground_coverage_radius(150.0, 100.0)
    grid = build_grid(Rect(0, 0, 100.0, 80.0), g)
    assert (grid.columns, grid.rows) == (1, 1)
    with pytest.raises(ValueError):
        build_grid(AREA, 0.0)


def test_boustrophedon_full_area_length():
    g = ground_coverage_radius(150.0, 100.0)
    grid = build_grid(AREA, g)
    path = boustrophedon_path(grid, (0.0, 0.0))
    assert len(path.waypoints) == 40
    # entry + 5 lanes of 7 cells + 4 lane hops + return diagonal:
    # sqrt(8996) + 5*980 + 4*128 + sqrt(1050^2 + 576^2)
    assert path.total_length == pytest.approx(6704.459870794988, abs=1e-9)
    pts = path.points()
    assert pts.shape == (42, 2)
    assert np.array_equal(pts[0], pts[-1])
    # every center visited exactly once
    assert len(np.unique(path.waypoints, axis=0)) == 40


def test_boustrophedon_prefers_fewer_lanes():
    # 8 columns x 5 rows: horizontal lanes, so consecutive waypoints on
    # the first lane share a y coordinate
    g = ground_coverage_radius(150.0, 100.0)
    grid = build_grid(AREA, g)
    wp = boustrophedon_path(grid, (0.0, 0.0)).waypoints
    assert np.allclose(wp[:8, 1], wp[0, 1])
    # tall strip: vertical lanes
    strip_grid = build_grid(Rect(0, 0, 280.0, 640.0), g)
    wp = boustrophedon_path(strip_grid, (0.0, 0.0)).waypoints
    assert np.allclose(wp[:5, 0], wp[0, 0])


def test_boustrophedon_strip_length():
    g = ground_coverage_radius(150.0, 100.0)
    strips = partition_area(AREA, 4)
    grid = build_grid(strips[1], g)
    path = boustrophedon_path(grid, (280.0, 0.0))
    assert np.allclose(path.waypoints[0], [350.0, 64.0])
    assert path.total_length == pytest.approx(1478.383119672656, abs=1e-9)


def test_partition_area():
    strips = partition_area(AREA, 4)
    assert len(strips) == 4
    assert all(s.width == pytest.approx(280.0) for s in strips)
    assert all(s.height == 640.0 for s in strips)
    assert strips[2].x0 == pytest.approx(560.0)
    assert sum(s.width for s in strips) == pytest.approx(AREA.width)
    with pytest.raises(ValueError):
        partition_area(AREA, 0)


def test_scan_grid_validation():
    with pytest.raises(ValueError):
        ScanGrid(origin=np.zeros(2), cell_width=10.0, cell_height=10.0,
                 columns=0, rows=3)
    with pytest.raises(ValueError):
        ScanGrid(origin=np.zeros(2), cell_width=-1.0, cell_height=10.0,
                 columns=2, rows=3)
