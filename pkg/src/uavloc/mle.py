"""Single-anchor maximum-likelihood track estimation.

One moving anchor collects lognormal range samples of a target over a
continuous reception window.  Assuming the target holds a constant
ground velocity across the window, the joint log-likelihood of all
samples depends only on the start position and velocity; maximizing it
recovers both.  Because the likelihood is invariant under reflection of
the target track across the anchor's path, a straight-line (collinear)
window yields two equally likely hypotheses; both are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import Scenario, Vec2
from .errorbound import Annulus, build_annulus, farthest_point_error
from .ranging import RangingParams

# degenerate-noise guard so zero-shadowing windows still score finitely
_MIN_LOG_STD = 1e-12


@dataclass(frozen=True)
class RangeWindow:
    """One continuous reception episode of one target by one anchor."""

    uav: int
    person: int
    t_start: int
    t_end: int
    uav_positions: np.ndarray  # (T, 3), anchor pose per slot
    samples: np.ndarray        # (T, n), range estimates per slot, m

    def __post_init__(self):
        T = self.t_end - self.t_start + 1
        if T < 1:
            raise ValueError("window must span at least one slot")
        if self.uav_positions.shape != (T, 3):
            raise ValueError(f"uav_positions must be ({T}, 3)")
        if self.samples.shape[0] != T or self.samples.ndim != 2:
            raise ValueError(f"samples must be ({T}, n)")
        if np.any(self.samples <= 0):
            raise ValueError("range samples must be > 0")

    @property
    def n_slots(self) -> int:
        return self.t_end - self.t_start + 1


@dataclass
class TrackEstimate:
    person: int
    t_ref: int            # last reception slot of the fitted window
    position: Vec2        # estimated ground position at t_ref
    velocity: Vec2        # estimated ground velocity, m/s
    error_bound: float    # farthest-point bound at t_ref, m
    log_likelihood: float
    mirror: tuple[Vec2, Vec2] | None = None  # reflected (position, velocity)
    converged: bool = True
    bound_is_fallback: bool = False  # empty intersection region


def estimate_static_distance(samples) -> float:
    """Geometric mean of the samples: the closed-form MLE for a fixed
    anchor-target distance under lognormal range noise."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("need at least one sample")
    if np.any(samples <= 0):
        raise ValueError("samples must be > 0")
    return float(np.exp(np.mean(np.log(samples))))


def window_log_likelihood(window: RangeWindow, params: RangingParams,
                          w0, v, slot_duration: float) -> float:
    """Exact log-likelihood of the window for a candidate track.

    ``w0`` is the target ground position at the window's first slot and
    ``v`` its velocity in m/s.  Every sample of every slot contributes
    ``-ln(r * sqrt(2 pi) * s) - ln(r/d)^2 / (2 s^2)`` with ``s`` the
    lognormal scale and ``d`` the slot's anchor-target distance.  A slot
    with zero distance is degenerate and scores -inf.
    """
    w0 = np.asarray(w0, dtype=float)
    v = np.asarray(v, dtype=float)
    T = window.n_slots
    t_rel = np.arange(T) * slot_duration
    w = w0 + np.outer(t_rel, v)
    diff = window.uav_positions[:, :2] - w
    d2 = np.sum(diff**2, axis=1) + window.uav_positions[:, 2] ** 2
    if np.any(d2 == 0):
        return -math.inf
    s = max(params.log_std, _MIN_LOG_STD)
    log_r = np.log(window.samples)
    const = -np.sum(log_r) - window.samples.size * math.log(math.sqrt(2 * math.pi) * s)
    resid = log_r - 0.5 * np.log(d2)[:, None]
    return float(const - np.sum(resid**2) / (2 * s * s))


def detect_collinear(positions, tol_m: float) -> tuple[bool, tuple[Vec2, Vec2]]:
    """Test whether ground positions lie on one straight line.

    Fits the total-least-squares line through the points and reports
    collinear when the maximum perpendicular deviation is below
    ``tol_m``.  Returns the line as (point on line, unit direction).
    """
    pts = np.asarray(positions, dtype=float)[:, :2]
    if len(pts) < 2:
        raise ValueError("need at least two positions")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    direction = vt[0]
    perp = centered @ np.array([-direction[1], direction[0]])
    return bool(np.max(np.abs(perp)) < tol_m), (centroid, direction)


def reflect_point(p, line) -> Vec2:
    anchor, u = line
    w = np.asarray(p, dtype=float) - anchor
    return anchor + 2.0 * (w @ u) * u - w


def reflect_direction(v, line) -> Vec2:
    _, u = line
    v = np.asarray(v, dtype=float)
    return 2.0 * (v @ u) * u - v


def mirror_hypothesis(estimate: TrackEstimate, line) -> tuple[Vec2, Vec2]:
    """Reflect an estimate's position and velocity across a ground line."""
    return reflect_point(estimate.position, line), reflect_direction(estimate.velocity, line)


def extrapolate(estimate: TrackEstimate, t, slot_duration: float) -> Vec2:
    """Constant-velocity prediction of the target position at slot t >= t_ref."""
    if t < estimate.t_ref:
        raise ValueError(f"t ({t}) must be >= t_ref ({estimate.t_ref})")
    return estimate.position + estimate.velocity * ((t - estimate.t_ref) * slot_duration)


# ---------------------------------------------------------------------------
# track fitting


def _circle_intersections(c1, r1, c2, r2):
    """Intersection points of two ground circles (0, 1 or 2 points)."""
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    delta = c2 - c1
    d = float(np.linalg.norm(delta))
    if d < 1e-9:
        return []
    a = (d * d + r1 * r1 - r2 * r2) / (2 * d)
    h2 = r1 * r1 - a * a
    base = c1 + (a / d) * delta
    if h2 <= 0:
        return [base]
    h = math.sqrt(h2)
    perp = np.array([-delta[1], delta[0]]) / d
    return [base + h * perp, base - h * perp]


def _objective(window: RangeWindow, slot_duration: float):
    """Weighted least-squares core of the likelihood.

    Maximizing the window likelihood over the track equals minimizing
    sum_t n_t * (mean_log_range_t - ln d_t)^2, independent of the noise
    scale, so the same fit works for noiseless windows.  The track is
    parameterized by its mid-window position for conditioning.
    """
    T = window.n_slots
    m = np.mean(np.log(window.samples), axis=1)
    t_rel = (np.arange(T) - (T - 1) / 2.0) * slot_duration
    q_xy = window.uav_positions[:, :2]
    q_z2 = window.uav_positions[:, 2] ** 2

    def f(p):
        w = p[:2] + np.outer(t_rel, p[2:])
        diff = q_xy - w
        d2 = np.maximum(np.sum(diff**2, axis=1) + q_z2, 1e-12)
        resid = m - 0.5 * np.log(d2)
        return float(resid @ resid)

    return f, m, t_rel


def _seed_guesses(window: RangeWindow, slot_duration: float, v_max: float):
    """Initial guesses: static-distance trilateration of three sub-windows
    (all pairings, both intersection branches) plus velocity estimates
    from consecutive pair solutions, plus a coarse ground grid under the
    anchor track."""
    T = window.n_slots
    m = np.mean(np.log(window.samples), axis=1)
    t_rel = (np.arange(T) - (T - 1) / 2.0) * slot_duration
    thirds = np.array_split(np.arange(T), 3)
    centers, radii, taus = [], [], []
    for idx in thirds:
        if len(idx) == 0:
            continue
        q = window.uav_positions[idx]
        d_hat = math.exp(float(np.mean(m[idx])))
        h2 = float(np.mean(q[:, 2])) ** 2
        centers.append(q[:, :2].mean(axis=0))
        radii.append(math.sqrt(max(d_hat * d_hat - h2, 1.0)))
        taus.append(float(np.mean(t_rel[idx])))

    pair_pts = {}
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            pts = _circle_intersections(centers[i], radii[i], centers[j], radii[j])
            pair_pts[(i, j)] = (pts, 0.5 * (taus[i] + taus[j]))

    seeds = []
    for pts, _tau in pair_pts.values():
        for p in pts:
            seeds.append(np.array([p[0], p[1], 0.0, 0.0]))
    early = pair_pts.get((0, 1))
    late = pair_pts.get((1, 2))
    if early and late and abs(late[1] - early[1]) > 1e-9:
        dt = late[1] - early[1]
        for p1 in early[0]:
            for p2 in late[0]:
                v = (np.asarray(p2) - np.asarray(p1)) / dt
                speed = float(np.linalg.norm(v))
                if speed > v_max:
                    v = v * (v_max / speed)
                wc = np.asarray(p1) + v * (0.0 - early[1])
                seeds.append(np.array([wc[0], wc[1], v[0], v[1]]))

    # coarse stationary grid across the anchor's ground footprint
    q_xy = window.uav_positions[:, :2]
    reach = max(radii, default=50.0)
    lo = q_xy.min(axis=0) - reach
    hi = q_xy.max(axis=0) + reach
    for x in np.linspace(lo[0], hi[0], 5):
        for y in np.linspace(lo[1], hi[1], 5):
            seeds.append(np.array([x, y, 0.0, 0.0]))
    return seeds


def _window_annuli(window: RangeWindow, params: RangingParams, v_max: float,
                   slot_duration: float, count: int):
    """Annuli at evenly spaced interior slots of the window.

    Slot selection uses midpoint fractions (2k+1)/(2K) so every ring
    keeps a nonzero motion margin.  Slots whose range estimate projects
    to (nearly) zero ground range carry no lateral information and are
    skipped; if all degenerate, the best remaining slot is used alone.
    """
    T = window.n_slots
    d_slant = np.exp(np.mean(np.log(window.samples), axis=1))
    g2 = d_slant**2 - window.uav_positions[:, 2] ** 2
    d_ground = np.sqrt(np.maximum(g2, 0.0))
    count = min(count, T)
    picks = np.unique((np.arange(count) + 0.5) / count * (T - 1)).round().astype(int)
    h_typ = float(np.mean(window.uav_positions[:, 2]))
    usable = [t for t in picks if d_ground[t] > max(1.0, 0.1 * h_typ)]
    if not usable:
        usable = [int(np.argmax(d_ground))]
    annuli = []
    for t in usable:
        dt_secs = (T - 1 - t) * slot_duration
        d_star = max(d_ground[t], 1.0)
        annuli.append(build_annulus(d_star, params, v_max, dt_secs,
                                    window.uav_positions[t, :2]))
    return annuli


_HALF_PLANE_RADIUS = 1.0e6  # m; sagitta < 0.2 m over a 600 m region

SPEED_PENALTY = 1.0e4  # objective weight per (m/s)^2 over the speed bound


def _half_plane_disk(line, point) -> Annulus | None:
    """Huge disk tangent to ``line``, covering ``point``'s side of it.

    Approximates the half-plane through the line: intersecting it into
    a region keeps the lobe containing ``point`` and drops the mirrored
    one.  Returns None when the point sits on the line itself.
    """
    anchor, u = line
    w = np.asarray(point, dtype=float) - anchor
    proj = anchor + (w @ u) * u
    n = np.asarray(point, dtype=float) - proj
    dist = float(np.linalg.norm(n))
    if dist < 1e-9:
        return None
    return Annulus(center=proj + n * (_HALF_PLANE_RADIUS / dist),
                   inner=0.0, outer=_HALF_PLANE_RADIUS)


def fit_track(window: RangeWindow, scenario: Scenario,
              extra_annuli=()) -> TrackEstimate:
    """Maximum-likelihood constant-velocity track from one window.

    Multi-start derivative-free descent on the likelihood core: seeds
    from sub-window trilateration and a coarse grid, the best few
    refined by Nelder-Mead with restarts until the objective change
    drops below 1e-10.  A soft barrier keeps candidate tracks inside
    the known target speed bound and the reported velocity is clamped
    to it.  Straight-line anchor geometry flags the estimate as
    ambiguous and attaches the reflected second hypothesis.

    extra_annuli adds prior feasible regions (a disk is an annulus with
    zero inner radius) intersected into the error-bound region only.
    """
    if window.n_slots < 3:
        raise ValueError("track fit needs a window of at least 3 slots")
    params = RangingParams(eta=scenario.eta, sigma_psi=scenario.sigma_psi)
    dt = scenario.slot_duration
    f, _, t_rel = _objective(window, dt)

    # descend on the residual core plus a soft speed barrier: anchor
    # paths made of straight legs admit exact spurious tracks that run
    # at tens of m/s (each leg pins only three moments of the range
    # polynomial), and the barrier keeps those basins unattractive
    vmax = scenario.person_vmax

    def fp(p):
        over = math.hypot(p[2], p[3]) - vmax
        return f(p) + (SPEED_PENALTY * over * over if over > 0.0 else 0.0)

    seeds = _seed_guesses(window, dt, scenario.person_vmax)
    scored = sorted(seeds, key=fp)
    best_p, best_val = None, math.inf
    converged = False
    for seed in scored[:6]:
        p, val = seed, fp(seed)
        for _ in range(4):
            res = minimize(fp, p, method="Nelder-Mead",
                           options=dict(maxiter=500, xatol=1e-8, fatol=1e-14))
            improved = val - res.fun
            p, val = res.x, float(res.fun)
            if improved < 1e-10:
                break
        if val < best_val:
            best_p, best_val = p, val
            converged = bool(res.success) or improved < 1e-10

    wc = best_p[:2]
    v = best_p[2:]
    speed = float(np.linalg.norm(v))
    if speed > scenario.person_vmax:
        v = v * (scenario.person_vmax / speed)
    pos_end = wc + best_p[2:] * t_rel[-1]

    w0 = wc + best_p[2:] * t_rel[0]
    loglik = window_log_likelihood(window, params, w0, best_p[2:], dt)

    collinear, line = detect_collinear(window.uav_positions,
                                       scenario.collinear_tol)
    mirror = None
    if collinear:
        mirror = (reflect_point(pos_end, line), reflect_direction(v, line))

    annuli = _window_annuli(window, params, scenario.person_vmax, dt,
                            scenario.annuli_count) + list(extra_annuli)
    region = annuli
    if collinear:
        # the feasible region has a twin lobe mirrored across the anchor
        # line; the bound covers the chosen hypothesis only (its mirror
        # is symmetric), so cut the far lobe with a half-plane disk
        cut = _half_plane_disk(line, pos_end)
        if cut is not None:
            region = annuli + [cut]
    bound = farthest_point_error(region, pos_end,
                                 theta_steps=scenario.theta_steps,
                                 grid_steps=scenario.grid_steps)
    if bound.empty_region and region is not annuli:
        # fall back to the uncut region so the failure value keeps the
        # scale of the rings, not of the half-plane disk
        bound = farthest_point_error(annuli, pos_end,
                                     theta_steps=scenario.theta_steps,
                                     grid_steps=scenario.grid_steps)

    return TrackEstimate(
        person=window.person,
        t_ref=window.t_end,
        position=pos_end,
        velocity=v,
        error_bound=bound.error,
        log_likelihood=loglik,
        mirror=mirror,
        converged=converged,
        bound_is_fallback=bound.empty_region,
    )
