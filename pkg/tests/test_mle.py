import math

import numpy as np
import pytest
from scipy import stats

from uavloc.core import Scenario
from uavloc.mle import (RangeWindow, TrackEstimate, detect_collinear,
                        estimate_static_distance, extrapolate, fit_track,
                        mirror_hypothesis, window_log_likelihood)
from uavloc.ranging import RangingParams


def make_window(uav_xy, h, w0, v, dt, n=4, sigma_psi=4.0, seed=0,
                uav=0, person=0, t_start=0):
    """Window with lognormal (or exact) samples for a linear track."""
    uav_xy = np.asarray(uav_xy, dtype=float)
    T = len(uav_xy)
    pos = np.column_stack([uav_xy, np.full(T, float(h))])
    t_rel = np.arange(T) * dt
    w = np.asarray(w0, dtype=float) + np.outer(t_rel, np.asarray(v, dtype=float))
    d = np.sqrt(np.sum((pos[:, :2] - w) ** 2, axis=1) + h * h)
    params = RangingParams(eta=2.0, sigma_psi=sigma_psi)
    if params.log_std == 0.0:
        samples = np.repeat(d[:, None], n, axis=1)
    else:
        rng = np.random.default_rng(seed)
        samples = d[:, None] * np.exp(rng.normal(0, params.log_std, (T, n)))
    return RangeWindow(uav=uav, person=person, t_start=t_start,
                       t_end=t_start + T - 1, uav_positions=pos,
                       samples=samples)


def bent_path(T, step=0.6):
    """Two straight legs joined at a right angle."""
    half = T // 2
    first = np.column_stack([np.arange(half) * step, np.zeros(half)])
    second = np.column_stack(
        [np.full(T - half, first[-1, 0]),
         (np.arange(T - half) + 1) * step])
    return np.vstack([first, second])


def test_static_distance_is_geometric_mean():
    assert estimate_static_distance([90.0, 110.0]) == pytest.approx(
        99.498743710662, abs=1e-10)
    assert estimate_static_distance([77.7]) == pytest.approx(77.7, rel=1e-12)
    with pytest.raises(ValueError):
        estimate_static_distance([])
    with pytest.raises(ValueError):
        estimate_static_distance([10.0, -1.0])


def test_static_distance_maximizes_sample_likelihood():
    rng = np.random.default_rng(3)
    samples = 100.0 * np.exp(rng.normal(0, 0.4, 50))
    params = RangingParams(eta=2.0, sigma_psi=4.0)
    d_hat = estimate_static_distance(samples)

    def nll(d):
        return -np.sum(stats.lognorm.logpdf(samples, s=params.log_std, scale=d))

    assert nll(d_hat) < nll(d_hat * 1.01)
    assert nll(d_hat) < nll(d_hat * 0.99)


def test_window_log_likelihood_matches_scipy():
    dt = 0.025
    win = make_window(bent_path(6), 100.0, (20.0, 15.0), (1.0, -0.5), dt,
                      n=3, seed=5)
    params = RangingParams(eta=2.0, sigma_psi=4.0)
    w0, v = np.array([22.0, 13.0]), np.array([0.5, 0.5])
    got = window_log_likelihood(win, params, w0, v, dt)

    ref = 0.0
    for t in range(win.n_slots):
        w = w0 + v * (t * dt)
        d = math.hypot(*(win.uav_positions[t, :2] - w), win.uav_positions[t, 2])
        ref += np.sum(stats.lognorm.logpdf(win.samples[t], s=params.log_std,
                                           scale=d))
    assert got == pytest.approx(ref, rel=1e-12)


def test_window_log_likelihood_degenerate_slot():
    dt = 0.025
    pos = np.zeros((3, 3))
    pos[:, 0] = [0.0, 1.0, 2.0]  # altitude 0, target on the anchor
    win = RangeWindow(uav=0, person=0, t_start=0, t_end=2, uav_positions=pos,
                      samples=np.full((3, 2), 5.0))
    val = window_log_likelihood(win, RangingParams(), (0.0, 0.0), (0.0, 0.0), dt)
    assert val == -math.inf


def test_detect_collinear():
    line_pts = np.column_stack([np.linspace(0, 10, 8), np.linspace(0, 5, 8)])
    ok, (anchor, u) = detect_collinear(line_pts, tol_m=0.5)
    assert ok
    assert np.hypot(*u) == pytest.approx(1.0)
    # direction matches the segment slope
    assert abs(u[1] / u[0]) == pytest.approx(0.5, abs=1e-9)

    bent = bent_path(10, step=2.0)
    assert not detect_collinear(bent, tol_m=0.5)[0]
    with pytest.raises(ValueError):
        detect_collinear(np.array([[1.0, 2.0]]), 0.5)


def test_mirror_hypothesis_reflects_across_line():
    est = TrackEstimate(person=0, t_ref=0, position=np.array([3.0, 4.0]),
                        velocity=np.array([1.0, -2.0]), error_bound=5.0,
                        log_likelihood=0.0)
    x_axis = (np.array([0.0, 0.0]), np.array([1.0, 0.0]))
    p, v = mirror_hypothesis(est, x_axis)
    assert np.allclose(p, [3.0, -4.0])
    assert np.allclose(v, [1.0, 2.0])
    # reflecting twice restores the original
    est2 = TrackEstimate(person=0, t_ref=0, position=p, velocity=v,
                         error_bound=5.0, log_likelihood=0.0)
    p2, v2 = mirror_hypothesis(est2, x_axis)
    assert np.allclose(p2, est.position) and np.allclose(v2, est.velocity)


def test_extrapolate():
    est = TrackEstimate(person=0, t_ref=100, position=np.array([10.0, 20.0]),
                        velocity=np.array([1.0, -1.0]), error_bound=5.0,
                        log_likelihood=0.0)
    out = extrapolate(est, 180, 0.025)
    assert np.allclose(out, [12.0, 18.0])
    assert np.allclose(extrapolate(est, 100, 0.025), est.position)
    with pytest.raises(ValueError):
        extrapolate(est, 99, 0.025)


def test_fit_track_rejects_short_window():
    win = make_window(bent_path(2), 100.0, (5.0, 5.0), (0.0, 0.0), 0.025)
    with pytest.raises(ValueError):
        fit_track(win, Scenario())


def test_fit_track_noiseless_bent_path():
    sc = Scenario(sigma_psi=0.0)
    dt = sc.slot_duration
    T = 40
    path = bent_path(T, step=sc.uav_vmax * dt)
    w0 = np.array([30.0, -25.0])
    v = np.array([0.8, -0.6])
    win = make_window(path, sc.altitude, w0, v, dt, n=2, sigma_psi=0.0)
    est = fit_track(win, sc)
    truth_end = w0 + v * (T - 1) * dt
    assert est.t_ref == T - 1
    assert np.linalg.norm(est.position - truth_end) < 1e-3
    assert np.linalg.norm(est.velocity - v) < 1e-2
    assert est.error_bound > 0.0
    assert est.mirror is None  # bent anchor path disambiguates the side


def test_fit_track_straight_path_reports_mirror():
    sc = Scenario(sigma_psi=0.0)
    dt = sc.slot_duration
    T = 40
    xs = np.arange(T) * sc.uav_vmax * dt
    path = np.column_stack([xs, np.zeros(T)])
    w0 = np.array([8.0, 40.0])
    v = np.array([0.0, 0.0])
    win = make_window(path, sc.altitude, w0, v, dt, n=2, sigma_psi=0.0)
    est = fit_track(win, sc)
    assert est.mirror is not None
    mp, _ = est.mirror
    # the two hypotheses cover both sides of the flight line; which one
    # is reported as primary is a tie under symmetric geometry
    hyps = sorted([est.position, mp], key=lambda p: p[1])
    assert np.linalg.norm(hyps[0] - [8.0, -40.0]) < 1e-2
    assert np.linalg.norm(hyps[1] - [8.0, 40.0]) < 1e-2
    assert est.position[1] * mp[1] < 0
