"""
A complete two-phase mission
============================

Phase 1 scans the area in strips while fitting a track for every person
heard along the way; phase 2 plans min-makespan visit tours and refines
each estimate from close range.  The report carries per-person errors,
per-UAV energy, and plot-ready traces.
"""

import numpy as np

from uavloc import Scenario, collect_metrics, run_mission

sc = Scenario()
report = run_mission(sc, 10, "epso", seed=0)

print(f"planner {report.planner}, {len(report.persons)} persons, "
      f"{sc.uav_count} UAVs")
print(f"phase 1 ends at slot {report.phase1_end} "
      f"({report.phase1_end * sc.slot_duration:.1f} s)")
print(f"mission makespan {report.makespan:.1f} s, "
      f"replans {report.replans}\n")

print("person   error_m   bound_m   visits  located  met_e_th")
for p in report.persons:
    print(f"  {p.person:2d}    {p.final_error:7.2f}   {p.final_bound:7.2f}"
          f"   {p.visits:4d}     {str(p.located):5s}   {p.met_e_th}")

print("\nuav   return_s   energy_kJ   within_budget")
for u in report.uavs:
    print(f" {u.uav}    {u.makespan:8.2f}   {u.energy / 1e3:9.2f}   "
          f"{u.within_budget}")

row = collect_metrics(report, seed=0)
print("\nmetrics row:", {k: (round(v, 3) if isinstance(v, float) else v)
                         for k, v in row.items()})

# traces: entity -> (slot, x, y, z, vx, vy) array, one row per slot
tr = report.traces["uav0"]
print(f"\nuav0 trace: {tr.shape[0]} slots, "
      f"closes at start: {np.array_equal(tr[0, 1:3], tr[-1, 1:3])}")
