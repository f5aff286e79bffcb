import numpy as np
import pytest

from uavloc.core import Scenario
from uavloc.mle import TrackEstimate
from uavloc.planner import SwarmParams
from uavloc.sim import (METRIC_FIELDS, choose_hypotheses, collect_metrics,
                        make_world, person_mobility_step, run_mission,
                        scan_paths, swap_hypothesis)

TINY = Scenario(area_length=400.0, area_width=200.0, uav_count=2)
QUICK = SwarmParams(population=12, iterations=12)


def test_make_world_deterministic():
    a = make_world(Scenario(), 5, seed=3)
    b = make_world(Scenario(), 5, seed=3)
    for pa, pb in zip(a.persons, b.persons):
        assert np.array_equal(pa.position, pb.position)
    c = make_world(Scenario(), 5, seed=4)
    assert not np.array_equal(a.persons[0].position, c.persons[0].position)


def test_make_world_counts():
    w = make_world(Scenario(), 0)
    assert w.persons == []
    with pytest.raises(ValueError):
        make_world(Scenario(), -1)


def test_make_world_positions_inside_area():
    w = make_world(Scenario(), 40, seed=1)
    pos = np.array([p.position for p in w.persons])
    assert np.all(pos >= 0)
    assert np.all(pos[:, 0] <= 1120.0) and np.all(pos[:, 1] <= 640.0)


def test_person_mobility_redraw_schedule():
    sc = Scenario()
    rng = np.random.default_rng(9)
    w = make_world(sc, 1, seed=9)
    st = w.persons[0]
    st = person_mobility_step(st, 0, rng, sc)    # slot 0 redraws
    v_after_draw = st.velocity.copy()
    assert np.hypot(*v_after_draw) <= sc.person_vmax
    # straight-line walking between redraws
    for slot in range(1, sc.resample_interval):
        st = person_mobility_step(st, slot, rng, sc)
        assert np.array_equal(st.velocity, v_after_draw)
    st = person_mobility_step(st, sc.resample_interval, rng, sc)
    assert not np.array_equal(st.velocity, v_after_draw)


def test_person_stays_in_bounds_long_run():
    sc = Scenario(area_length=30.0, area_width=20.0, comm_range=150.0)
    rng = np.random.default_rng(2)
    w = make_world(sc, 1, seed=2)
    st = w.persons[0]
    for slot in range(5000):
        st = person_mobility_step(st, slot, rng, sc)
        assert 0 <= st.position[0] <= 30.0
        assert 0 <= st.position[1] <= 20.0


def test_scan_paths_cover_strips():
    paths = scan_paths(Scenario())
    assert len(paths) == 4
    starts = np.array([p.start for p in paths])
    assert np.allclose(starts, [[0, 0], [280, 0], [560, 0], [840, 0]])
    # congruent strips sweep congruent serpentines
    for p in paths:
        assert p.total_length == pytest.approx(1478.383119672656, abs=1e-9)
        assert len(p.waypoints) == 10


def test_choose_hypotheses_discards_out_of_area_mirror():
    sc = Scenario()
    est = TrackEstimate(person=0, t_ref=0, position=np.array([50.0, 50.0]),
                        velocity=np.zeros(2), error_bound=10.0,
                        log_likelihood=0.0,
                        mirror=(np.array([50.0, -50.0]), np.zeros(2)))
    picked = choose_hypotheses([est], sc, np.random.default_rng(0))[0]
    assert np.array_equal(picked.position, [50.0, 50.0])
    # mirrored case: the in-area mirror must win
    est2 = TrackEstimate(person=0, t_ref=0, position=np.array([50.0, -50.0]),
                         velocity=np.zeros(2), error_bound=10.0,
                         log_likelihood=0.0,
                         mirror=(np.array([50.0, 50.0]), np.zeros(2)))
    picked2 = choose_hypotheses([est2], sc, np.random.default_rng(0))[0]
    assert np.array_equal(picked2.position, [50.0, 50.0])


def test_swap_hypothesis_round_trip():
    est = TrackEstimate(person=3, t_ref=7, position=np.array([1.0, 2.0]),
                        velocity=np.array([0.5, 0.0]), error_bound=4.0,
                        log_likelihood=-10.0,
                        mirror=(np.array([1.0, -2.0]), np.array([0.5, 0.0])))
    swapped = swap_hypothesis(est)
    assert np.array_equal(swapped.position, [1.0, -2.0])
    back = swap_hypothesis(swapped)
    assert np.array_equal(back.position, est.position)
    assert np.array_equal(back.mirror[0], est.mirror[0])


def test_empty_person_set_is_scan_only():
    report = run_mission(Scenario(), 0, "epso")
    assert report.persons == []
    assert report.makespan == pytest.approx(59.2)
    assert all(u.makespan == pytest.approx(59.2) for u in report.uavs)
    row = collect_metrics(report)
    assert row["max_error_m"] == 0.0 and row["frac_met_eth"] == 0.0


def test_small_mission_end_to_end():
    report = run_mission(TINY, 3, "epso", seed=1, swarm=QUICK)
    assert len(report.persons) == 3
    assert report.makespan > report.phase1_end * TINY.slot_duration
    assert len(report.uavs) == 2
    for u in report.uavs:
        assert u.energy > 0
        assert u.makespan <= report.makespan + 1e-9
    for p in report.persons:
        assert p.estimate is not None
        assert p.final_bound > 0
    # UAV traces end where they started
    for j in range(2):
        tr = report.traces[f"uav{j}"]
        assert np.array_equal(tr[0, 1:3], tr[-1, 1:3])


def test_small_mission_deterministic_metrics():
    a = collect_metrics(run_mission(TINY, 3, "epso", seed=1, swarm=QUICK))
    b = collect_metrics(run_mission(TINY, 3, "epso", seed=1, swarm=QUICK))
    a.pop("planner_time_s")
    b.pop("planner_time_s")
    assert a == b


def test_collect_metrics_contract():
    report = run_mission(Scenario(), 0, "epso")
    row = collect_metrics(report, seed=42)
    assert tuple(row) == METRIC_FIELDS
    assert row["seed"] == 42
    assert row["planner"] == "epso"
    assert row["persons"] == 0
