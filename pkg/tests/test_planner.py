import numpy as np
import pytest

from uavloc.core import Scenario
from uavloc.mle import TrackEstimate
from uavloc.planner import (INFEASIBLE_PENALTY, SOLVERS, SwarmParams,
                            access_radius, adaptive_inertia, decode,
                            default_starts, edge_waypoint, fitness,
                            make_context, predicted_error, reference_points,
                            solve, tour_time)
from uavloc.ranging import RangingParams
from uavloc.scan import ground_coverage_radius

DEFAULTS = RangingParams()


def make_estimates(positions, e0=10.0, velocities=None):
    out = []
    for i, p in enumerate(np.atleast_2d(np.asarray(positions, dtype=float))):
        v = np.zeros(2) if velocities is None else np.asarray(velocities[i])
        e = e0[i] if np.ndim(e0) else e0
        out.append(TrackEstimate(person=i, t_ref=0, position=p.copy(),
                                 velocity=v, error_bound=float(e),
                                 log_likelihood=0.0))
    return out


def spread_positions(n, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform([50.0, 50.0], [1070.0, 590.0], (n, 2))


def test_decode_partition_and_order():
    groups, orders = decode([0.5, 1.2, 0.9, 1.1], m=2)
    assert groups == [[0, 2], [1, 3]]
    assert orders == [[0, 2], [3, 1]]
    # out-of-range keys clip to the nearest UAV
    groups, _ = decode([2.5, -0.3], m=2)
    assert groups == [[1], [0]]


def test_decode_covers_every_target_once():
    rng = np.random.default_rng(4)
    keys = rng.uniform(0, 3, 17)
    groups, orders = decode(keys, m=3)
    flat = sorted(s for g in groups for s in g)
    assert flat == list(range(17))
    assert [sorted(o) for o in orders] == groups


def test_tour_time_square():
    pts = [(0.0, 0.0), (100.0, 0.0), (100.0, 100.0), (0.0, 0.0)]
    # (200 + sqrt(20000)) / 25
    assert tour_time(pts, 25.0) == pytest.approx(13.65685424949238, abs=1e-12)
    assert tour_time([(5.0, 5.0)], 25.0) == 0.0
    assert tour_time(np.empty((0, 2)), 25.0) == 0.0


def test_reference_points():
    pts = reference_points((1.0, 2.0), 5.0, 4)
    assert np.allclose(pts, [[6, 2], [1, 7], [-4, 2], [1, -3]], atol=1e-12)
    with pytest.raises(ValueError):
        reference_points((0, 0), 5.0, 0)


def test_predicted_error_overhead():
    # kappa * mean ranging error of the slant range; directly overhead
    # the slant range is the altitude
    assert predicted_error(0.0, 100.0, DEFAULTS, kappa=2.0) == pytest.approx(
        22.37281690455174, abs=1e-9)
    close = predicted_error(10.0, 100.0, DEFAULTS, 2.0)
    far = predicted_error(80.0, 100.0, DEFAULTS, 2.0)
    assert close < far


def brute_access_radius(e_s, e_th, params, h, comm, r=8, kappa=2.0):
    refs = reference_points(np.zeros(2), e_s, r)
    cap = ground_coverage_radius(comm, h)
    best = 0.0
    for rho in np.linspace(0.0, cap, 4001):
        d = np.linalg.norm(refs - [rho, 0.0], axis=1)
        if np.max(predicted_error(d, h, params, kappa)) <= e_th:
            best = rho
    return best


def test_access_radius_matches_brute_force():
    rho, feasible = access_radius(10.0, 30.0, DEFAULTS, 100.0, 150.0)
    assert feasible
    ref = brute_access_radius(10.0, 30.0, DEFAULTS, 100.0, 150.0)
    assert abs(rho - ref) <= 0.15  # bisection tol + scan step
    # returned radius is itself feasible and not wasteful
    assert rho == pytest.approx(79.32, abs=0.5)


def test_access_radius_noiseless_hits_cap():
    quiet = RangingParams(eta=2.0, sigma_psi=0.0)
    rho, feasible = access_radius(10.0, 30.0, quiet, 100.0, 150.0)
    assert feasible
    assert rho == pytest.approx(ground_coverage_radius(150.0, 100.0))


def test_access_radius_infeasible_overhead():
    rho, feasible = access_radius(10.0, 5.0, DEFAULTS, 100.0, 150.0)
    assert (rho, feasible) == (0.0, False)
    with pytest.raises(ValueError):
        access_radius(10.0, 0.0, DEFAULTS, 100.0, 150.0)


def test_access_radius_respects_cap():
    rho, feasible = access_radius(10.0, 30.0, DEFAULTS, 100.0, 150.0, cap=40.0)
    assert feasible and rho == pytest.approx(40.0)


def test_edge_waypoint():
    assert np.allclose(edge_waypoint((100.0, 0.0), (0.0, 0.0), 30.0), [30.0, 0.0])
    # already inside the access circle: stay put
    assert np.allclose(edge_waypoint((10.0, 0.0), (0.0, 0.0), 30.0), [10.0, 0.0])
    assert np.allclose(edge_waypoint((0.0, 0.0), (0.0, 0.0), 0.0), [0.0, 0.0])
    with pytest.raises(ValueError):
        edge_waypoint((1.0, 1.0), (0.0, 0.0), -1.0)


def test_adaptive_inertia_branches():
    assert adaptive_inertia(70.0, 40.0, 60.0, 0.4, 0.9) == 0.9   # laggard
    assert adaptive_inertia(40.0, 40.0, 60.0, 0.4, 0.9) == 0.4   # best particle
    assert adaptive_inertia(50.0, 40.0, 60.0, 0.4, 0.9) == pytest.approx(0.65)
    # degenerate population: everyone equal
    assert adaptive_inertia(40.0, 40.0, 40.0, 0.4, 0.9) == 0.4


def test_default_starts_are_strip_corners():
    starts = default_starts(Scenario())
    assert np.allclose(starts, [[0, 0], [280, 0], [560, 0], [840, 0]])


def test_make_context_requires_estimates():
    with pytest.raises(ValueError):
        make_context([], Scenario(), SwarmParams())


def test_edge_access_never_hurts():
    sc = Scenario(uav_count=2)
    ests = make_estimates(spread_positions(6, seed=11))
    params = SwarmParams()
    ctx_edge = make_context(ests, sc, params, edge_access=True)
    ctx_center = make_context(ests, sc, params, edge_access=False)
    orders = [[0, 2, 4], [1, 3, 5]]
    assert ctx_edge.evaluate_orders(orders) <= ctx_center.evaluate_orders(orders)


def test_tour_geometry_and_makespan():
    sc = Scenario(uav_count=2, edge_access=False)
    ests = make_estimates([[100.0, 100.0], [300.0, 100.0]])
    ctx = make_context(ests, sc, SwarmParams())
    pts, seconds, bad, legs = ctx.tour([0, 1], 0)
    assert not bad
    assert np.allclose(pts[0], ctx.starts[0]) and np.allclose(pts[-1], ctx.starts[0])
    # static targets, no edge access: waypoints sit on the estimates
    assert np.allclose(pts[1], [100.0, 100.0])
    assert np.allclose(pts[2], [300.0, 100.0])
    length = sum(np.linalg.norm(np.diff(pts, axis=0), axis=1))
    assert seconds == pytest.approx(length / sc.uav_vmax)
    assert legs[0].person == 0 and legs[1].person == 1
    assert legs[0].arrival < legs[1].arrival


def test_infeasible_target_is_reported_and_penalized():
    sc = Scenario(uav_count=1)
    ests = make_estimates([[400.0, 300.0], [700.0, 300.0]], e0=[10.0, 200.0])
    ctx = make_context(ests, sc, SwarmParams())
    _, _, bad, _ = ctx.tour([0, 1], 0)
    assert bad == [1]
    plan = ctx.materialize([[0, 1]])
    assert plan.infeasible == [1]
    assert not plan.feasible
    assert plan.fitness >= INFEASIBLE_PENALTY


def test_energy_budget_penalty():
    sc = Scenario(uav_count=1)
    ests = make_estimates([[600.0, 300.0]])
    params = SwarmParams()
    lean = make_context(ests, sc, params, budgets=[1.0])
    rich = make_context(ests, sc, params)
    orders = [[0]]
    assert lean.evaluate_orders(orders) >= INFEASIBLE_PENALTY
    assert rich.evaluate_orders(orders) < INFEASIBLE_PENALTY


def test_fitness_matches_context_evaluate():
    sc = Scenario(uav_count=2)
    ests = make_estimates(spread_positions(5, seed=2))
    params = SwarmParams()
    keys = np.array([0.1, 0.7, 1.3, 1.9, 0.5])
    assert fitness(keys, ests, sc, params) == pytest.approx(
        make_context(ests, sc, params).evaluate(keys))


@pytest.mark.parametrize("name", sorted(SOLVERS))
def test_solvers_are_deterministic(name):
    sc = Scenario(uav_count=2)
    ests = make_estimates(spread_positions(6, seed=8))
    params = SwarmParams(population=16, iterations=15, seed=5)
    a = solve(name, ests, sc, params)
    b = solve(name, ests, sc, params)
    assert a.fitness == b.fitness
    assert a.orders == b.orders
    assert a.makespan == pytest.approx(b.makespan)


@pytest.mark.parametrize("name", sorted(SOLVERS))
def test_solvers_cover_all_targets(name):
    sc = Scenario(uav_count=3)
    ests = make_estimates(spread_positions(8, seed=9))
    plan = solve(name, ests, sc, SwarmParams(population=16, iterations=10, seed=1))
    visited = sorted(s for o in plan.orders for s in o)
    assert visited == list(range(8))
    assert plan.makespan > 0
    assert len(plan.waypoints) == 3


def test_epso_fitness_improves_with_iterations():
    sc = Scenario(uav_count=2)
    ests = make_estimates(spread_positions(7, seed=14))
    short = solve("epso", ests, sc,
                  SwarmParams(population=20, iterations=40, seed=3))
    long = solve("epso", ests, sc,
                 SwarmParams(population=20, iterations=120, seed=3))
    assert long.fitness <= short.fitness


def test_solve_rejects_unknown_planner():
    with pytest.raises(ValueError, match="unknown planner"):
        solve("annealing", make_estimates([[100.0, 100.0]]), Scenario(),
              SwarmParams())
