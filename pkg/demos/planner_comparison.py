#!/usr/bin/env python3
"""Plan visit tours for located targets with three solvers.

Same seeded instance through the adaptive swarm, the fixed-inertia
swarm and the genetic baseline; then the effect of edge access on tour
length.
"""

import time

import numpy as np

from uavloc import Scenario, SwarmParams, solve
from uavloc.mle import TrackEstimate

sc = Scenario()
rng = np.random.default_rng(17)
targets = [TrackEstimate(person=s, t_ref=0,
                         position=rng.uniform([20, 20], [1100, 620]),
                         velocity=rng.uniform(-1, 1, 2) * 0.75,
                         error_bound=rng.uniform(5.0, 25.0),
                         log_likelihood=0.0)
           for s in range(10)]
params = SwarmParams(seed=0)

print(f"{len(targets)} targets, {sc.uav_count} UAVs, accuracy goal "
      f"e_th = {sc.e_th} m\n")

for name in ("epso", "pso", "ga"):
    t0 = time.perf_counter()
    plan = solve(name, targets, sc, params)
    wall = time.perf_counter() - t0
    print(f"{name:4s}: makespan {plan.makespan:7.2f} s   "
          f"tours {[len(o) for o in plan.orders]}   {wall:5.2f} s wall")

plan = solve("epso", targets, sc, params)
print("\nepso tours in visit order (person ids):")
for j, legs in enumerate(plan.legs):
    stops = ", ".join(f"{leg.person}@({leg.waypoint[0]:.0f},{leg.waypoint[1]:.0f})"
                      for leg in legs)
    print(f"  uav {j}: {stops if stops else '(idle)'}")

# edge access saves the last rho meters of every approach
near = solve("epso", targets, sc, params)
far = solve("epso", targets, sc, params, edge_access=False)
print(f"\nmakespan with edge access    {near.makespan:7.2f} s")
print(f"makespan flying to centers   {far.makespan:7.2f} s")
rhos = [leg.rho for legs in near.legs for leg in legs]
print(f"access radii used: {min(rhos):.1f} .. {max(rhos):.1f} m")
