"""
Area decomposition and serpentine coverage scan
===============================================
"""

import numpy as np

from uavloc import Scenario, ground_coverage_radius
from uavloc.scan import Rect, boustrophedon_path, build_grid, partition_area

sc = Scenario()
g = ground_coverage_radius(sc.comm_range, sc.altitude)
print(f"altitude {sc.altitude} m, link range {sc.comm_range} m "
      f"-> ground coverage radius g = {g:.2f} m")

area = Rect(0.0, 0.0, sc.area_length, sc.area_width)
grid = build_grid(area, g)
print(f"\nwhole area as one grid: {grid.columns} x {grid.rows} cells of "
      f"{grid.cell_width:.0f} x {grid.cell_height:.0f} m "
      f"(half-diagonal {grid.half_diagonal:.2f} m <= g)")

# one vertical strip per UAV, each swept in a closed serpentine
strips = partition_area(area, sc.uav_count)
print(f"\n{sc.uav_count} UAVs, strips of {strips[0].width:.0f} m width:")
total = []
for j, strip in enumerate(strips):
    path = boustrophedon_path(build_grid(strip, g), (strip.x0, strip.y0))
    secs = path.total_length / sc.uav_vmax
    total.append(secs)
    print(f"  uav {j}: {len(path.waypoints)} cells, "
          f"{path.total_length:7.1f} m, {secs:6.2f} s")
print(f"scan phase makespan: {max(total):.2f} s")

# the whole closed polyline of strip 0, ready for plotting
pts = boustrophedon_path(build_grid(strips[0], g), (0.0, 0.0)).points()
print(f"\nstrip 0 polyline ({len(pts)} points):")
print(np.round(pts, 1))
