"""Multi-UAV visit planning: swarm and genetic solvers with edge access.

Targets are partitioned among UAVs and ordered into tours minimizing the
longest tour time (a min-max multiple-TSP).  Tours are searched over a
random-key encoding so the continuous particle updates apply unchanged:
the integer part of a key picks the UAV, the fractional part sorts the
visit order.  Instead of flying over each target estimate, a UAV may cut
the corner and range from the edge of an accuracy-feasible circle around
it; the circle radius comes from the predicted ranging error against
reference points spread over the estimate's uncertainty disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Scenario, Vec2
from .energy import PowerParams, propulsion_power
from .errorbound import ErrorModel
from .mle import TrackEstimate
from .ranging import RangingParams, mean_range_error
from .scan import Rect, ground_coverage_radius, partition_area

INFEASIBLE_PENALTY = 1.0e6  # seconds added per target whose accuracy is unreachable


@dataclass(frozen=True)
class SwarmParams:
    population: int = 50
    iterations: int = 200
    c1: float = 2.0
    c2: float = 2.0
    eps_min: float = 0.4
    eps_max: float = 0.9
    ref_points: int = 8          # reference points on the uncertainty circle
    kappa: float = 2.0           # predicted-error calibration factor
    seed: int = 0
    # genetic baseline knobs
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    tournament: int = 3

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if not 0 < self.eps_min <= self.eps_max:
            raise ValueError("need 0 < eps_min <= eps_max")
        if self.ref_points < 3:
            raise ValueError("need at least 3 reference points")


@dataclass(frozen=True)
class PlanLeg:
    """One planned target visit: where to fly and what was assumed."""
    person: int                      # global person id of the target
    waypoint: tuple[float, float]    # edge-access point
    center: tuple[float, float]      # target estimate at planned arrival
    arrival: float                   # planned arrival, slot index
    rho: float                       # access radius used, m


@dataclass
class Plan:
    assignments: list[list[int]]     # estimate indices per UAV, sorted
    orders: list[list[int]]          # estimate indices per UAV in visit order
    waypoints: list[np.ndarray]      # per-UAV (K, 2) polyline, start..end
    makespan: float                  # max tour time, s
    fitness: float                   # makespan plus any infeasibility penalty
    infeasible: list[int] = field(default_factory=list)  # person ids
    legs: list[list[PlanLeg]] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.infeasible


def decode(keys, m: int) -> tuple[list[list[int]], list[list[int]]]:
    """Random-key decoding: floor picks the UAV, fraction sorts the tour.

    Returns (groups, orders): groups[m] lists persons by index, orders[m]
    lists them in visit order (fraction ascending, ties by index).
    """
    keys = np.asarray(keys, dtype=float)
    uav = np.clip(np.floor(keys).astype(int), 0, m - 1)
    frac = keys - np.floor(keys)
    orders = []
    for j in range(m):
        members = np.flatnonzero(uav == j)
        orders.append([int(s) for s in members[np.argsort(frac[members], kind="stable")]])
    groups = [sorted(o) for o in orders]
    return groups, orders


def tour_time(waypoints, v_max: float) -> float:
    """Total traversal time of a polyline at constant speed."""
    pts = np.atleast_2d(np.asarray(waypoints, dtype=float))
    if len(pts) < 2:
        return 0.0
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)) / v_max)


def reference_points(center, radius: float, r: int) -> np.ndarray:
    """r points equally spaced on the circle, starting at angle 0."""
    if r < 1:
        raise ValueError("need at least one reference point")
    ang = 2 * np.pi * np.arange(r) / r
    return np.asarray(center, dtype=float) + radius * np.stack(
        [np.cos(ang), np.sin(ang)], axis=1)


def predicted_error(d_ground, h: float, params: RangingParams, kappa: float):
    """Localization error predicted for ranging at a given ground offset."""
    return kappa * mean_range_error(np.sqrt(np.square(d_ground) + h * h), params)


def access_radius(e_s: float, e_th: float, params: RangingParams, h: float,
                  comm_range: float, r: int = 8, kappa: float = 2.0,
                  tol: float = 0.1, cap: float | None = None) -> tuple[float, bool]:
    """Largest ground radius from which ranging still meets the accuracy goal.

    The target is known only to a disk of radius e_s around its estimate;
    a waypoint at ground radius rho must keep the predicted error within
    e_th against every one of r reference points on that disk's boundary.
    Returns (rho, feasible); feasible is False when even ranging from
    directly overhead cannot meet e_th, in which case rho is 0.  rho is
    capped by the communication footprint (or an explicit tighter cap)
    and resolved by bisection.
    """
    if e_th <= 0:
        raise ValueError("accuracy threshold must be positive")
    if cap is None:
        cap = ground_coverage_radius(comm_range, h)
    refs = reference_points(np.zeros(2), e_s, r)

    def ok(rho: float) -> bool:
        d = np.linalg.norm(refs - np.array([rho, 0.0]), axis=1)
        return bool(np.max(predicted_error(d, h, params, kappa)) <= e_th)

    if not ok(0.0):
        return 0.0, False
    if cap <= 0:
        return 0.0, True
    if ok(cap):
        return cap, True
    lo, hi = 0.0, cap
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo, True


def edge_waypoint(prev, center, rho: float) -> Vec2:
    """Point on the segment prev->center at distance rho from center.

    Inside the circle already (or rho covers the whole leg) the previous
    point itself is the access point.
    """
    prev = np.asarray(prev, dtype=float)
    center = np.asarray(center, dtype=float)
    if rho < 0:
        raise ValueError("radius must be >= 0")
    gap = np.linalg.norm(prev - center)
    if gap <= rho:
        return prev.copy()
    if gap == 0:
        return center.copy()
    return center + (prev - center) * (rho / gap)


@dataclass
class PlanningContext:
    """Everything a fitness evaluation needs, precomputed once."""
    estimates: list[TrackEstimate]
    scenario: Scenario
    params: SwarmParams
    starts: np.ndarray            # (M, 2) per-UAV departure points
    returns: np.ndarray           # (M, 2) per-UAV return points
    t_now: float                  # planning time, slot index
    budgets: np.ndarray           # (M,) remaining propulsion energy, J
    edge_access: bool
    power: PowerParams = field(default_factory=PowerParams)

    def __post_init__(self):
        sc = self.scenario
        dt = sc.slot_duration
        self.ranging = RangingParams(sc.eta, sc.sigma_psi)
        self.models = [ErrorModel(e.error_bound, sc.alpha, e.t_ref, sc.slot_duration)
                       for e in self.estimates]
        self.vmax_slot = sc.uav_vmax * dt   # meters per slot
        self.p_cruise = float(propulsion_power(sc.uav_vmax, self.power))
        # per-target track unpacked to floats; velocity in meters per slot
        self._track = [(float(e.position[0]), float(e.position[1]),
                        float(e.velocity[0]) * dt, float(e.velocity[1]) * dt,
                        float(e.t_ref), float(e.error_bound))
                       for e in self.estimates]
        self._footprint = ground_coverage_radius(sc.comm_range, sc.altitude)
        self._rho_cache: dict[int, tuple[float, bool]] = {}

    RHO_STEP = 0.05  # m, uncertainty-radius quantization for the rho cache

    def _rho(self, e_s: float) -> tuple[float, bool]:
        """Access radius for uncertainty e_s, quantized and cached.

        Quantizing e_s to 0.05 m moves rho by well under the 0.1 m
        bisection tolerance.  The cap is tightened so that even the
        worst-case true position stays inside the communication
        footprint, keeping the close-range refit supplied with samples.
        """
        key = int(e_s / self.RHO_STEP + 0.5)
        hit = self._rho_cache.get(key)
        if hit is None:
            e_q = key * self.RHO_STEP
            cap = self._footprint - e_q - 2.0 * self.vmax_slot
            sc = self.scenario
            hit = access_radius(e_q, sc.e_th, self.ranging, sc.altitude,
                                sc.comm_range, self.params.ref_points,
                                self.params.kappa, cap=max(0.0, cap))
            self._rho_cache[key] = hit
        return hit

    def tour(self, order: list[int], uav: int) -> tuple[np.ndarray, float, list[int]]:
        """Forward pass over one tour: waypoints, time and infeasible ids.

        Each leg aims at the target's position extrapolated to the
        planned arrival slot; the accuracy circle radius uses the error
        bound grown to that slot.  The person walks far slower than the
        UAV flies, so one pass (no fixed-point refinement) is enough.
        """
        sc = self.scenario
        lx, ly = sc.area_length, sc.area_width
        alpha_dt = sc.alpha * sc.slot_duration
        sx, sy = float(self.starts[uav][0]), float(self.starts[uav][1])
        hx, hy = float(self.returns[uav][0]), float(self.returns[uav][1])
        px, py = sx, sy
        t = self.t_now
        pts = [(sx, sy)]
        bad = []
        legs = []
        for s in order:
            ex, ey, vx, vy, tr, e0 = self._track[s]
            dt_dep = t - tr
            ax = ex + vx * dt_dep
            ay = ey + vy * dt_dep
            t_a = t + math.hypot(px - ax, py - ay) / self.vmax_slot
            dt_arr = t_a - tr
            cx = ex + vx * dt_arr
            cy = ey + vy * dt_arr
            cx = 0.0 if cx < 0.0 else (lx if cx > lx else cx)
            cy = 0.0 if cy < 0.0 else (ly if cy > ly else cy)
            e_a = e0 * (1.0 + alpha_dt * dt_arr)
            rho, feasible = self._rho(e_a)
            if not feasible:
                bad.append(self.estimates[s].person)
            if not self.edge_access:
                rho = 0.0
            gap = math.hypot(px - cx, py - cy)
            if gap <= rho:
                wx, wy = px, py
            elif gap == 0.0:
                wx, wy = cx, cy
            else:
                f = rho / gap
                wx = cx + (px - cx) * f
                wy = cy + (py - cy) * f
            t += math.hypot(px - wx, py - wy) / self.vmax_slot
            pts.append((wx, wy))
            legs.append(PlanLeg(self.estimates[s].person, (wx, wy), (cx, cy),
                                t, rho))
            px, py = wx, wy
        t += math.hypot(px - hx, py - hy) / self.vmax_slot
        pts.append((hx, hy))
        return np.array(pts), float((t - self.t_now) * sc.slot_duration), bad, legs

    def evaluate_orders(self, orders: list[list[int]]) -> float:
        worst = 0.0
        penalty = 0.0
        for j, order in enumerate(orders):
            _, t_m, bad, _ = self.tour(order, j)
            penalty += INFEASIBLE_PENALTY * len(bad)
            if self.p_cruise * t_m > self.budgets[j]:
                penalty += INFEASIBLE_PENALTY
            worst = max(worst, t_m)
        return worst + penalty

    def evaluate(self, keys) -> float:
        _, orders = decode(keys, self.scenario.uav_count)
        return self.evaluate_orders(orders)

    def materialize(self, orders: list[list[int]]) -> Plan:
        waypoints, times, bad, legs = [], [], [], []
        for j, order in enumerate(orders):
            pts, t_m, b, lg = self.tour(order, j)
            waypoints.append(pts)
            times.append(t_m)
            bad.extend(b)
            legs.append(lg)
        makespan = max(times) if times else 0.0
        return Plan(assignments=[sorted(o) for o in orders], orders=orders,
                    waypoints=waypoints, makespan=makespan,
                    fitness=self.evaluate_orders(orders),
                    infeasible=sorted(set(bad)), legs=legs)


def default_starts(scenario: Scenario) -> np.ndarray:
    """Scan-strip entry corners, the phase-2 launch and return points."""
    area = Rect(0.0, 0.0, scenario.area_length, scenario.area_width)
    return np.array([[s.x0, s.y0] for s in partition_area(area, scenario.uav_count)])


def make_context(estimates, scenario: Scenario, params: SwarmParams,
                 starts=None, t_now=None, budgets=None,
                 edge_access=None, returns=None) -> PlanningContext:
    if not estimates:
        raise ValueError("nothing to plan")
    if starts is None:
        starts = default_starts(scenario)
    starts = np.asarray(starts, dtype=float)
    returns = starts if returns is None else np.asarray(returns, dtype=float)
    if t_now is None:
        t_now = max(e.t_ref for e in estimates)
    if budgets is None:
        budgets = np.full(len(starts), scenario.energy_budget)
    if edge_access is None:
        edge_access = scenario.edge_access
    return PlanningContext(list(estimates), scenario, params, starts, returns,
                           float(t_now), np.asarray(budgets, dtype=float),
                           bool(edge_access))


def fitness(keys, estimates, scenario: Scenario, params: SwarmParams,
            **ctx_kw) -> float:
    """Penalized makespan of the decoded plan (lower is better)."""
    return make_context(estimates, scenario, params, **ctx_kw).evaluate(keys)


def adaptive_inertia(f: float, f_min: float, f_avg: float,
                     eps_min: float, eps_max: float) -> float:
    """Inertia weight: small for good particles, large for laggards."""
    if f > f_avg or f_avg == f_min:
        return eps_max if f > f_avg else eps_min
    eps = eps_min + (eps_max - eps_min) * (f - f_min) / (f_avg - f_min)
    return float(min(max(eps, eps_min), eps_max))


def _entropy(params: SwarmParams, rng) -> int:
    if rng is None:
        return params.seed
    return int(rng.integers(0, 2**63 - 1))


def _swarm_solve(estimates, scenario, params, rng, adaptive: bool,
                 **ctx_kw) -> Plan:
    ctx = make_context(estimates, scenario, params, **ctx_kw)
    s_count = len(estimates)
    m = scenario.uav_count
    pop = params.population
    streams = [np.random.default_rng(c)
               for c in np.random.SeedSequence(_entropy(params, rng)).spawn(pop)]

    keys = np.stack([g.uniform(0.0, m, s_count) for g in streams])
    vel = np.stack([g.uniform(-1.0, 1.0, s_count) for g in streams])
    fit = np.array([ctx.evaluate(k) for k in keys])
    pbest_keys = keys.copy()
    pbest_fit = fit.copy()
    g_idx = int(np.argmin(fit))
    gbest_keys = keys[g_idx].copy()
    gbest_fit = float(fit[g_idx])

    for _ in range(params.iterations):
        f_min = float(np.min(fit))
        f_avg = float(np.mean(fit))
        for i, g in enumerate(streams):
            eps = (adaptive_inertia(float(fit[i]), f_min, f_avg,
                                    params.eps_min, params.eps_max)
                   if adaptive else params.eps_max)
            shape = s_count if scenario.rand_per_coordinate else None
            r1 = g.random(shape)
            r2 = g.random(shape)
            vel[i] = (eps * vel[i]
                      + params.c1 * r1 * (pbest_keys[i] - keys[i])
                      + params.c2 * r2 * (gbest_keys - keys[i]))
            x = keys[i] + vel[i]
            x = np.where(x < 0, -x, x)
            x = np.where(x > m, 2 * m - x, x)
            keys[i] = np.clip(x, 0.0, m)
        fit = np.array([ctx.evaluate(k) for k in keys])
        better = fit < pbest_fit
        pbest_keys[better] = keys[better]
        pbest_fit[better] = fit[better]
        i_min = int(np.argmin(pbest_fit))
        if pbest_fit[i_min] < gbest_fit:
            gbest_fit = float(pbest_fit[i_min])
            gbest_keys = pbest_keys[i_min].copy()

    _, orders = decode(gbest_keys, m)
    return ctx.materialize(orders)


def epso_solve(estimates, scenario: Scenario, params: SwarmParams,
               rng=None, **ctx_kw) -> Plan:
    """Min-makespan tours by particle swarm with adaptive inertia."""
    return _swarm_solve(estimates, scenario, params, rng, True, **ctx_kw)


def pso_solve(estimates, scenario: Scenario, params: SwarmParams,
              rng=None, **ctx_kw) -> Plan:
    """Baseline swarm with fixed inertia eps_max."""
    return _swarm_solve(estimates, scenario, params, rng, False, **ctx_kw)


def _ga_decode(perm: np.ndarray, assign: np.ndarray, m: int) -> list[list[int]]:
    return [[int(s) for s in perm if assign[s] == j] for j in range(m)]


def ga_solve(estimates, scenario: Scenario, params: SwarmParams,
             rng=None, **ctx_kw) -> Plan:
    """Genetic baseline: permutation plus assignment chromosome, order
    crossover on the permutation, swap mutation, tournament selection."""
    ctx = make_context(estimates, scenario, params, **ctx_kw)
    s_count = len(estimates)
    m = scenario.uav_count
    pop = params.population
    g = np.random.default_rng(np.random.SeedSequence(_entropy(params, rng)))

    perms = np.stack([g.permutation(s_count) for _ in range(pop)])
    assigns = g.integers(0, m, (pop, s_count))
    fit = np.array([ctx.evaluate_orders(_ga_decode(p, a, m))
                    for p, a in zip(perms, assigns)])

    def order_crossover(p1, p2):
        if s_count == 1:
            return p1.copy()
        a, b = np.sort(g.choice(s_count, 2, replace=False))
        child = np.full(s_count, -1)
        child[a:b + 1] = p1[a:b + 1]
        rest = [x for x in p2 if x not in set(child[a:b + 1])]
        slots = [i for i in range(s_count) if child[i] < 0]
        child[slots] = rest
        return child

    for _ in range(params.iterations):
        elite = int(np.argmin(fit))
        new_perms = [perms[elite].copy()]
        new_assigns = [assigns[elite].copy()]
        while len(new_perms) < pop:
            i1 = min(g.integers(0, pop, params.tournament), key=lambda i: fit[i])
            i2 = min(g.integers(0, pop, params.tournament), key=lambda i: fit[i])
            if g.random() < params.crossover_rate:
                perm = order_crossover(perms[i1], perms[i2])
                mask = g.random(s_count) < 0.5
                assign = np.where(mask, assigns[i1], assigns[i2])
            else:
                perm = perms[i1].copy()
                assign = assigns[i1].copy()
            if g.random() < params.mutation_rate and s_count > 1:
                a, b = g.choice(s_count, 2, replace=False)
                perm[[a, b]] = perm[[b, a]]
            if g.random() < params.mutation_rate:
                assign[g.integers(0, s_count)] = g.integers(0, m)
            new_perms.append(perm)
            new_assigns.append(assign)
        perms = np.stack(new_perms)
        assigns = np.stack(new_assigns)
        fit = np.array([ctx.evaluate_orders(_ga_decode(p, a, m))
                        for p, a in zip(perms, assigns)])

    best = int(np.argmin(fit))
    return ctx.materialize(_ga_decode(perms[best], assigns[best], m))


SOLVERS = {"epso": epso_solve, "pso": pso_solve, "ga": ga_solve}


def solve(name: str, estimates, scenario: Scenario, params: SwarmParams,
          rng=None, **ctx_kw) -> Plan:
    try:
        solver = SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown planner {name!r}; choose from {sorted(SOLVERS)}")
    return solver(estimates, scenario, params, rng, **ctx_kw)
