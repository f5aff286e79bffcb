"""Two-phase mission orchestration.

Phase 1 sweeps the area with per-UAV serpentine scans, collecting range
samples from every person in communication range and fitting one coarse
track per person from their latest reception window.  Phase 2 plans
minimum-makespan visit tours over the estimates, flies them, and refines
each estimate from a close pass at the planned waypoint; a visit that
never hears its target swaps to the mirror hypothesis and triggers a
replan.  Everything is driven by one slot-stepped loop per phase and is
bit-reproducible for a given (scenario, person count, planner, seed).
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .core import PersonState, Scenario, advance, vec2
from .energy import PowerParams, propulsion_power
from .errorbound import Annulus, ErrorModel, error_at
from .mle import RangeWindow, TrackEstimate, fit_track
from .planner import Plan, SwarmParams, solve
from .ranging import RangingParams, sample_range
from .scan import Rect, ScanPath, boustrophedon_path, build_grid, partition_area

MAX_SWAPS = 2               # hypothesis swaps per person before giving up
MISSION_SLOT_CAP = 400_000  # hard stop against pathological scenarios
_DEBUG = bool(os.environ.get("UAVLOC_DEBUG"))


@dataclass
class ReceptionLog:
    """Closed reception windows, keyed by (uav, person)."""
    windows: dict = field(default_factory=dict)

    def add(self, window: RangeWindow):
        self.windows.setdefault((window.uav, window.person), []).append(window)

    def for_person(self, person: int) -> list[RangeWindow]:
        return [w for (_, p), ws in sorted(self.windows.items()) if p == person
                for w in ws]


@dataclass
class PersonReport:
    person: int
    estimate: TrackEstimate
    final_error: float    # |estimate - truth| at the estimate's slot, m
    final_bound: float    # reported error bound at the estimate's slot, m
    located: bool         # refined by a close pass in phase 2
    met_e_th: bool        # final bound within the accuracy threshold
    visits: int
    lost: bool = False    # gave up after repeated silent visits


@dataclass
class UavReport:
    uav: int
    makespan: float       # return-to-start time, s from mission start
    energy: float         # propulsion energy spent, J
    within_budget: bool
    aborted: bool = False  # headed home early on energy


@dataclass
class MissionReport:
    scenario: Scenario
    planner: str
    persons: list[PersonReport]
    uavs: list[UavReport]
    makespan: float       # max over UAVs, s
    planner_time: float   # wall time spent inside the planner, s
    replans: int
    phase1_end: int       # first slot of phase 2
    traces: dict          # entity -> array of (slot, x, y, z, vx, vy)


@dataclass
class World:
    """Mutable mission state: people, their rng streams, the clock."""
    scenario: Scenario
    persons: list[PersonState]
    person_rngs: list
    range_rng: np.random.Generator
    mirror_rng: np.random.Generator
    planner_rng: np.random.Generator
    slot: int = 0
    phase1_energy: np.ndarray | None = None
    phase1_ends: list | None = None
    traces: dict = field(default_factory=dict)

    def trace(self, entity: str, slot: int, x, y, z, vx, vy):
        self.traces.setdefault(entity, []).append(
            (slot, float(x), float(y), float(z), float(vx), float(vy)))

    def packed_traces(self) -> dict:
        return {k: np.array(v) for k, v in sorted(self.traces.items())}


def make_world(scenario: Scenario, s_count: int, seed: int | None = None) -> World:
    """Fresh mission state; every stochastic strand gets its own stream."""
    if s_count < 0:
        raise ValueError(f"person count must be >= 0, got {s_count}")
    root = np.random.SeedSequence(scenario.seed if seed is None else seed)
    ss_init, ss_people, ss_range, ss_mirror, ss_plan = root.spawn(5)
    init = np.random.default_rng(ss_init)
    lo = np.zeros(2)
    hi = np.array([scenario.area_length, scenario.area_width])
    persons = [PersonState(position=init.uniform(lo, hi), velocity=np.zeros(2))
               for _ in range(s_count)]
    person_rngs = [np.random.default_rng(c) for c in ss_people.spawn(s_count)]
    return World(scenario=scenario, persons=persons, person_rngs=person_rngs,
                 range_rng=np.random.default_rng(ss_range),
                 mirror_rng=np.random.default_rng(ss_mirror),
                 planner_rng=np.random.default_rng(ss_plan))


def person_mobility_step(state: PersonState, slot: int,
                         rng: np.random.Generator,
                         scenario: Scenario) -> PersonState:
    """Advance a person one slot, redrawing heading and speed on schedule.

    Heading (uniform over the circle) and speed (uniform up to the walk
    limit) are redrawn every ``resample_interval`` slots; between draws
    the person walks straight, reflecting off the area boundary.
    """
    if slot % scenario.resample_interval == 0:
        heading = rng.uniform(0.0, 2.0 * np.pi)
        speed = rng.uniform(0.0, scenario.person_vmax)
        state = replace(state, velocity=speed * np.array([np.cos(heading),
                                                          np.sin(heading)]))
    bounds = vec2(scenario.area_length, scenario.area_width)
    return advance(state, scenario.slot_duration, bounds=bounds)


def _init_people(world: World):
    # slot 0 carries the initial draw; no displacement yet
    for s, (st, rng) in enumerate(zip(world.persons, world.person_rngs)):
        heading = rng.uniform(0.0, 2.0 * np.pi)
        speed = rng.uniform(0.0, world.scenario.person_vmax)
        st.velocity = speed * np.array([np.cos(heading), np.sin(heading)])
        world.trace(f"person{s}", 0, st.position[0], st.position[1], 0.0,
                    st.velocity[0], st.velocity[1])


def _step_people(world: World):
    for s in range(len(world.persons)):
        st = person_mobility_step(world.persons[s], world.slot,
                                  world.person_rngs[s], world.scenario)
        world.persons[s] = st
        world.trace(f"person{s}", world.slot, st.position[0], st.position[1],
                    0.0, st.velocity[0], st.velocity[1])


def scan_paths(scenario: Scenario) -> list[ScanPath]:
    """One serpentine per UAV over its vertical strip of the area."""
    area = Rect(0.0, 0.0, scenario.area_length, scenario.area_width)
    paths = []
    for strip in partition_area(area, scenario.uav_count):
        grid = build_grid(strip, scenario.ground_radius)
        paths.append(boustrophedon_path(grid, vec2(strip.x0, strip.y0)))
    return paths


@dataclass
class _Sweep:
    """Slot-by-slot kinematics of one scan path.

    Cruise at full speed along each leg with a final partial slot per
    leg, so waypoints are hit exactly on slot boundaries.  ``lanes[t]``
    identifies the maximal straight run the slot-``t`` movement belongs
    to; reception windows must not straddle lane changes or the window
    anchors stop being collinear.
    """
    positions: np.ndarray   # (K+1, 2), positions[t] = position at slot t
    lanes: np.ndarray       # (K+1,) lane id of the movement ending at slot t
    end_slot: int


def _sweep_kinematics(path: ScanPath, v_max: float, dt: float) -> _Sweep:
    pts = path.points()
    v_slot = v_max * dt
    positions = [np.asarray(pts[0], dtype=float)]
    lanes = [0]
    lane = 0
    prev_dir = None
    for a, b in zip(pts[:-1], pts[1:]):
        seg = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        length = float(np.linalg.norm(seg))
        if length < 1e-12:
            continue
        u = seg / length
        if prev_dir is not None and not np.allclose(u, prev_dir, atol=1e-9):
            lane += 1
        prev_dir = u
        n_full = int(length / v_slot + 1e-9)
        start = positions[-1]
        for k in range(1, n_full + 1):
            positions.append(start + u * (v_slot * k))
            lanes.append(lane)
        rem = length - n_full * v_slot
        if rem > 1e-9:
            positions.append(np.asarray(b, dtype=float))
            lanes.append(lane)
        else:
            positions[-1] = np.asarray(b, dtype=float)
    return _Sweep(positions=np.array(positions), lanes=np.array(lanes),
                  end_slot=len(positions) - 1)


@dataclass
class _OpenWindow:
    t_start: int
    lane: int
    positions: list = field(default_factory=list)
    samples: list = field(default_factory=list)

    def close(self, uav: int, person: int) -> RangeWindow:
        # reception is contiguous while a window stays open
        t_end = self.t_start + len(self.positions) - 1
        return RangeWindow(uav=uav, person=person, t_start=self.t_start,
                           t_end=t_end, uav_positions=np.array(self.positions),
                           samples=np.array(self.samples))


def simulate_phase1(scenario: Scenario, paths: list[ScanPath],
                    world: World) -> tuple[ReceptionLog, list[TrackEstimate]]:
    """Sweep the strips and fit one coarse track per person.

    Windows close when the signal drops or the sweep turns onto a new
    lane; only the latest window of at least 3 slots feeds the fit, so
    stale geometry never dilutes the estimate.  Straight lanes leave
    every fit mirror-ambiguous, and the range history then pins the
    velocity only up to a one-parameter family, so these tracks are
    treated as stationary at their last fix.
    """
    sc = scenario
    params = RangingParams(sc.eta, sc.sigma_psi)
    sweeps = [_sweep_kinematics(p, sc.uav_vmax, sc.slot_duration) for p in paths]
    end_slot = max(s.end_slot for s in sweeps)
    log = ReceptionLog()
    open_windows: dict = {}
    energy = np.zeros(len(sweeps))
    p_hover = float(propulsion_power(0.0))

    _init_people(world)
    for m, sw in enumerate(sweeps):
        world.trace(f"uav{m}", 0, sw.positions[0][0], sw.positions[0][1],
                    sc.altitude, 0.0, 0.0)

    for t in range(1, end_slot + 1):
        world.slot = t
        slot_pos = []
        for m, sw in enumerate(sweeps):
            k = min(t, sw.end_slot)
            x, y = sw.positions[k]
            if t <= sw.end_slot:
                d = sw.positions[k] - sw.positions[k - 1]
                speed = float(np.linalg.norm(d)) / sc.slot_duration
                world.trace(f"uav{m}", t, x, y, sc.altitude,
                            d[0] / sc.slot_duration, d[1] / sc.slot_duration)
            else:
                speed = 0.0  # finished early: hold position for the laggards
                world.trace(f"uav{m}", t, x, y, sc.altitude, 0.0, 0.0)
            energy[m] += (propulsion_power(speed) if speed > 0 else p_hover) \
                * sc.slot_duration
            slot_pos.append((x, y, sw.lanes[k]))
        _step_people(world)

        for m, (ux, uy, lane) in enumerate(slot_pos):
            if t > sweeps[m].end_slot:
                continue
            for s, st in enumerate(world.persons):
                dx = ux - st.position[0]
                dy = uy - st.position[1]
                d = math.sqrt(dx * dx + dy * dy + sc.altitude * sc.altitude)
                key = (m, s)
                if d <= sc.comm_range:
                    samples = sample_range(d, params, world.range_rng,
                                           size=sc.samples_per_slot)
                    win = open_windows.get(key)
                    if win is not None and win.lane != lane:
                        log.add(win.close(m, s))
                        win = None
                    if win is None:
                        win = _OpenWindow(t_start=t, lane=int(lane))
                        open_windows[key] = win
                    win.positions.append((ux, uy, sc.altitude))
                    win.samples.append(samples)
                elif key in open_windows:
                    log.add(open_windows.pop(key).close(m, s))
    for (m, s), win in sorted(open_windows.items()):
        log.add(win.close(m, s))

    world.phase1_energy = energy
    world.phase1_ends = [s.end_slot for s in sweeps]
    estimates = [_phase1_estimate(s, log, scenario)
                 for s in range(len(world.persons))]
    return log, estimates


def _phase1_estimate(person: int, log: ReceptionLog,
                     scenario: Scenario) -> TrackEstimate:
    windows = log.for_person(person)
    if not windows:
        raise RuntimeError(f"person {person} never received during the scan; "
                           "the coverage grid should make this impossible")
    usable = [w for w in windows if w.n_slots >= 3]
    if usable:
        latest = max(usable, key=lambda w: (w.t_end, w.t_start, w.uav))
        est = fit_track(latest, scenario)
        if est.mirror is not None:
            # straight-lane ambiguity also hides the velocity: plan from
            # the last fix instead of chasing an arbitrary family member
            mpos, _ = est.mirror
            est.velocity = np.zeros(2)
            est.mirror = (mpos, np.zeros(2))
        return est
    # degenerate reception (< 3 slots): fall back to the anchor's ground
    # position with a bound covering the whole footprint
    best = max(windows, key=lambda w: (w.n_slots, w.t_end))
    d = float(np.exp(np.mean(np.log(best.samples[-1]))))
    anchor = best.uav_positions[-1]
    g = math.sqrt(max(d * d - anchor[2] ** 2, 0.0))
    return TrackEstimate(person=person, t_ref=best.t_end,
                         position=np.array(anchor[:2], dtype=float),
                         velocity=np.zeros(2),
                         error_bound=g + scenario.ground_radius,
                         log_likelihood=-math.inf, converged=False,
                         bound_is_fallback=True)


def choose_hypotheses(estimates: list[TrackEstimate], scenario: Scenario,
                      rng: np.random.Generator) -> list[TrackEstimate]:
    """Pick a working hypothesis for each mirror-ambiguous estimate.

    Mirrors outside the area cannot be the truth (people never leave
    it), so they are discarded; when both hypotheses are admissible the
    choice is a fair coin, since both explain the data equally well.
    """
    hi = np.array([scenario.area_length, scenario.area_width])
    out = []
    for est in estimates:
        if est.mirror is None:
            out.append(est)
            continue
        mpos, _ = est.mirror
        primary_in = bool(np.all(est.position >= 0) and np.all(est.position <= hi))
        mirror_in = bool(np.all(np.asarray(mpos) >= 0)
                         and np.all(np.asarray(mpos) <= hi))
        pick_mirror = False
        if primary_in and mirror_in:
            pick_mirror = bool(rng.random() < 0.5)
        elif mirror_in:
            pick_mirror = True
        out.append(swap_hypothesis(est) if pick_mirror else est)
    return out


def swap_hypothesis(est: TrackEstimate) -> TrackEstimate:
    """Exchange the working track with its mirror (both retained)."""
    mpos, mvel = est.mirror
    return replace(est, position=np.array(mpos, dtype=float),
                   velocity=np.array(mvel, dtype=float),
                   mirror=(est.position, est.velocity))


FLY, DWELL, HOME, DONE = range(4)


@dataclass
class _UavExec:
    uav: int
    start: np.ndarray       # scan corner: departure and return point
    pos: np.ndarray
    legs: list = field(default_factory=list)
    mode: int = FLY
    leg_i: int = 0
    dwell_heading: np.ndarray | None = None
    arrived_slot: int = -1
    rx_slots: int = 0       # reception slots since arriving at the waypoint
    window: list = field(default_factory=list)  # (slot, anchor, samples)
    energy: float = 0.0
    aborted: bool = False
    return_slot: int = -1

    def target_leg(self):
        return self.legs[self.leg_i] if self.leg_i < len(self.legs) else None

    def next_point(self) -> np.ndarray:
        if self.leg_i + 1 < len(self.legs):
            return np.asarray(self.legs[self.leg_i + 1].waypoint, dtype=float)
        return self.start


def simulate_phase2(scenario: Scenario, estimates: list[TrackEstimate],
                    planner: str, world: World,
                    swarm: SwarmParams | None = None,
                    log: ReceptionLog | None = None) -> MissionReport:
    """Fly planned visit tours and refine each estimate from close range.

    UAVs launch together from their scan corners once the slowest sweep
    finishes.  At a planned waypoint the UAV keeps moving, turning
    perpendicular to its approach, so the reception window bends and the
    close-range refit is unambiguous; the refit fires once refine_slots
    reception slots accumulate after arrival.  A visit silent past
    hypothesis_timeout slots swaps the target to its mirror hypothesis
    and replans the remaining visits; after repeated silent visits the
    target is written off.  UAVs return to their corners when their tour
    ends, or immediately once the energy budget only just covers the
    trip home.
    """
    sc = scenario
    swarm = swarm or SwarmParams(seed=sc.seed)
    params = RangingParams(sc.eta, sc.sigma_psi)
    power = PowerParams()
    p_hover = float(propulsion_power(0.0, power))
    p_cruise = float(propulsion_power(sc.uav_vmax, power))
    v_slot = sc.uav_vmax * sc.slot_duration
    corners = np.array([np.asarray(p.start, dtype=float)
                        for p in scan_paths(sc)])

    t0 = int(max(world.phase1_ends)) if world.phase1_ends else world.slot
    phase1_energy = (world.phase1_energy if world.phase1_energy is not None
                     else np.zeros(sc.uav_count))

    working = {e.person: e
               for e in choose_hypotheses(estimates, sc, world.mirror_rng)}
    models = {p: ErrorModel(e.error_bound, sc.alpha, e.t_ref, sc.slot_duration)
              for p, e in working.items()}
    swaps = {p: 0 for p in working}
    visits = {p: 0 for p in working}
    located: set = set()
    lost: set = set()
    planner_time = 0.0
    replans = 0

    execs = [_UavExec(uav=m, start=corners[m].copy(), pos=corners[m].copy(),
                      energy=float(phase1_energy[m]))
             for m in range(sc.uav_count)]

    def plan_now(slot: int) -> Plan:
        nonlocal planner_time
        remaining = [working[p] for p in sorted(working)
                     if p not in located and p not in lost]
        starts = np.array([e.pos for e in execs])
        budgets = np.array([max(sc.energy_budget - e.energy, 0.0)
                            for e in execs])
        t_begin = time.perf_counter()
        plan = solve(planner, remaining, sc, swarm, rng=world.planner_rng,
                     starts=starts, returns=corners, t_now=slot,
                     budgets=budgets)
        planner_time += time.perf_counter() - t_begin
        return plan

    def adopt(plan: Plan):
        for e in execs:
            if e.aborted:
                continue
            e.legs = list(plan.legs[e.uav])
            e.leg_i = 0
            e.window = []
            e.rx_slots = 0
            e.arrived_slot = -1
            if e.legs:
                e.mode = FLY
                e.return_slot = -1
            elif e.mode != DONE:
                e.mode = FLY  # nothing to do: FLY with no legs heads home

    def refit(e: _UavExec, person: int) -> bool:
        """Fit the freshest contiguous sample run of the visit window."""
        runs = []
        cur = []
        for rec in e.window:
            if cur and rec[0] != cur[-1][0] + 1:
                runs.append(cur)
                cur = []
            cur.append(rec)
        if cur:
            runs.append(cur)
        runs = [r for r in runs if len(r) >= 3]
        if not runs:
            return False
        # the whole approach matters: the off-axis sweep past the person
        # carries most of the cross-range information, the dwell bend
        # only disambiguates the mirror
        run = runs[-1]
        win = RangeWindow(uav=e.uav, person=person, t_start=run[0][0],
                          t_end=run[-1][0],
                          uav_positions=np.array([r[1] for r in run]),
                          samples=np.array([r[2] for r in run]))
        prior = working[person]
        dt_ref = (win.t_end - prior.t_ref) * sc.slot_duration
        # both sides of the prior ambiguity stay candidate references: a
        # refit that lands on the mirror side means the working pick was
        # wrong, not that the refit is
        refs = [prior.position + prior.velocity * dt_ref]
        if prior.mirror is not None:
            mpos, mvel = prior.mirror
            refs.append(np.asarray(mpos, dtype=float)
                        + np.asarray(mvel, dtype=float) * dt_ref)
        est = fit_track(win, sc)
        cands = [np.asarray(est.position, dtype=float)]
        if est.mirror is not None:
            cands.append(np.asarray(est.mirror[0], dtype=float))
        pairs = [(float(np.linalg.norm(c - r)), ci, ri)
                 for ci, c in enumerate(cands) for ri, r in enumerate(refs)]
        _, ci, ri = min(pairs)
        disk = Annulus(center=refs[ri], inner=0.0,
                       outer=error_at(models[person], win.t_end))
        est = fit_track(win, sc, extra_annuli=[disk])
        if ci == 1:
            est = swap_hypothesis(est)
        working[person] = est
        models[person] = ErrorModel(est.error_bound, sc.alpha, est.t_ref,
                                    sc.slot_duration)
        located.add(person)
        return True

    if working:
        adopt(plan_now(t0))
    else:
        for e in execs:  # nothing to visit: the scan was the mission
            e.mode = DONE
            e.return_slot = t0
    need_replan = False
    t = t0
    while any(e.mode != DONE for e in execs) and t < MISSION_SLOT_CAP:
        t += 1
        world.slot = t
        for e in execs:
            if e.mode == DONE:
                continue
            speed = 0.0
            vx = vy = 0.0
            if e.mode == FLY:
                leg = e.target_leg()
                goal = (np.asarray(leg.waypoint, dtype=float) if leg is not None
                        else e.start)
                gap = float(np.linalg.norm(goal - e.pos))
                if gap <= v_slot + 1e-12:
                    speed = gap / sc.slot_duration
                    if gap > 0:
                        vx, vy = (goal - e.pos) / sc.slot_duration
                    e.pos = goal.copy()
                    if leg is None:
                        e.mode = DONE
                        e.return_slot = t
                    else:
                        # pass through the waypoint sideways: the bend in
                        # the anchor track breaks the mirror symmetry of
                        # the refit window
                        e.mode = DWELL
                        e.arrived_slot = t
                        e.rx_slots = 0
                        center = np.asarray(leg.center, dtype=float)
                        u = center - e.pos
                        nu = float(np.linalg.norm(u))
                        u = u / nu if nu > 1e-9 else np.array([1.0, 0.0])
                        nxt = e.next_point()
                        side = (u[0] * (nxt[1] - e.pos[1])
                                - u[1] * (nxt[0] - e.pos[0]))
                        sign = 1.0 if side >= 0 else -1.0
                        e.dwell_heading = sign * np.array([-u[1], u[0]])
                else:
                    step = (goal - e.pos) * (v_slot / gap)
                    e.pos = e.pos + step
                    speed = sc.uav_vmax
                    vx, vy = step / sc.slot_duration
            elif e.mode == DWELL:
                step = e.dwell_heading * v_slot
                e.pos = e.pos + step
                speed = sc.uav_vmax
                vx, vy = step / sc.slot_duration
            elif e.mode == HOME:
                gap = float(np.linalg.norm(e.start - e.pos))
                if gap <= v_slot + 1e-12:
                    speed = gap / sc.slot_duration
                    if gap > 0:
                        vx, vy = (e.start - e.pos) / sc.slot_duration
                    e.pos = e.start.copy()
                    e.mode = DONE
                    e.return_slot = t
                else:
                    step = (e.start - e.pos) * (v_slot / gap)
                    e.pos = e.pos + step
                    speed = sc.uav_vmax
                    vx, vy = step / sc.slot_duration
            e.energy += (propulsion_power(speed, power) if speed > 0
                         else p_hover) * sc.slot_duration
            world.trace(f"uav{e.uav}", t, e.pos[0], e.pos[1], sc.altitude,
                        vx, vy)
            if e.mode in (FLY, DWELL) and not e.aborted:
                trip = float(np.linalg.norm(e.start - e.pos)) / sc.uav_vmax
                if (e.energy + p_cruise * (trip + sc.slot_duration)
                        >= sc.energy_budget):
                    e.aborted = True
                    e.mode = HOME
                    e.window = []

        _step_people(world)

        for e in execs:
            if e.mode not in (FLY, DWELL):
                continue
            leg = e.target_leg()
            if leg is None:
                continue
            st = world.persons[leg.person]
            dx = e.pos[0] - st.position[0]
            dy = e.pos[1] - st.position[1]
            d = math.sqrt(dx * dx + dy * dy + sc.altitude * sc.altitude)
            if d <= sc.comm_range:
                samples = sample_range(d, params, world.range_rng,
                                       size=sc.samples_per_slot)
                e.window.append((t, (e.pos[0], e.pos[1], sc.altitude),
                                 samples))
                if e.mode == DWELL:
                    e.rx_slots += 1

        for e in execs:
            if e.mode != DWELL:
                continue
            person = e.target_leg().person
            if e.rx_slots >= sc.refine_slots:
                visits[person] += 1
                ok = refit(e, person)
                if _DEBUG:
                    print(f"[{t}] uav{e.uav} refine p{person} ok={ok} "
                          f"win={len(e.window)}")
                e.window = []
                e.leg_i += 1
                e.mode = FLY
            elif t - e.arrived_slot >= sc.hypothesis_timeout:
                visits[person] += 1
                if refit(e, person):
                    if _DEBUG:
                        print(f"[{t}] uav{e.uav} timeout-salvage p{person} "
                              f"win={len(e.window)}")
                    # a partial window was enough after all
                    e.window = []
                    e.leg_i += 1
                    e.mode = FLY
                    continue
                e.window = []
                swaps[person] += 1
                if _DEBUG:
                    print(f"[{t}] uav{e.uav} timeout p{person} "
                          f"swaps={swaps[person]}")
                if swaps[person] > MAX_SWAPS or working[person].mirror is None:
                    lost.add(person)
                elif person not in located:
                    working[person] = swap_hypothesis(working[person])
                need_replan = True
                e.leg_i += 1
                e.mode = FLY

        if need_replan:
            need_replan = False
            # salvage every other receiving visit before tours change
            for e in execs:
                if e.mode == DWELL and e.window:
                    visits[e.target_leg().person] += 1
                    ok = refit(e, e.target_leg().person)
                    if _DEBUG:
                        print(f"[{t}] uav{e.uav} salvage "
                              f"p{e.target_leg().person} ok={ok}")
                    e.window = []
            if any(p not in located and p not in lost for p in working):
                replans += 1
                adopt(plan_now(t))
            else:
                for e in execs:
                    if e.mode not in (DONE, HOME):
                        e.legs = []
                        e.leg_i = 0
                        e.mode = FLY  # no legs left: heads home

    return _assemble_report(sc, planner, world, execs, working, located,
                            lost, visits, t0, planner_time, replans)


def _true_position_at(world: World, person: int, slot: int) -> np.ndarray:
    rows = world.traces.get(f"person{person}", [])
    if 0 <= slot < len(rows) and rows[slot][0] == slot:
        rec = rows[slot]
        return np.array([rec[1], rec[2]])
    for rec in rows:
        if rec[0] == slot:
            return np.array([rec[1], rec[2]])
    return np.array(world.persons[person].position[:2], dtype=float)


def _assemble_report(sc, planner, world, execs, working, located, lost,
                     visits, t0, planner_time, replans) -> MissionReport:
    persons = []
    for p in sorted(working):
        est = working[p]
        truth = _true_position_at(world, p, est.t_ref)
        err = float(np.linalg.norm(np.asarray(est.position) - truth))
        persons.append(PersonReport(
            person=p, estimate=est, final_error=err,
            final_bound=float(est.error_bound), located=p in located,
            met_e_th=bool(est.error_bound <= sc.e_th), visits=visits[p],
            lost=p in lost))
    uavs = []
    for e in execs:
        end = e.return_slot if e.return_slot >= 0 else world.slot
        uavs.append(UavReport(uav=e.uav, makespan=end * sc.slot_duration,
                              energy=float(e.energy),
                              within_budget=bool(e.energy <= sc.energy_budget),
                              aborted=e.aborted))
    return MissionReport(scenario=sc, planner=planner, persons=persons,
                         uavs=uavs, makespan=max(u.makespan for u in uavs),
                         planner_time=planner_time, replans=replans,
                         phase1_end=t0, traces=world.packed_traces())


def run_mission(scenario: Scenario, s_count: int, planner: str,
                seed: int | None = None,
                swarm: SwarmParams | None = None) -> MissionReport:
    """Full two-phase mission, bit-reproducible for a given seed."""
    world = make_world(scenario, s_count, seed)
    log, estimates = simulate_phase1(scenario, scan_paths(scenario), world)
    return simulate_phase2(scenario, estimates, planner, world, swarm, log)


METRIC_FIELDS = ("seed", "persons", "planner", "makespan_s", "max_error_m",
                 "mean_error_m", "frac_met_eth", "total_energy_j",
                 "planner_time_s", "replans")


def collect_metrics(report: MissionReport, seed: int | None = None) -> dict:
    """One summary row per mission; the field order is a stable contract."""
    errs = [p.final_error for p in report.persons]
    met = [p.met_e_th for p in report.persons]
    return {
        "seed": report.scenario.seed if seed is None else seed,
        "persons": len(report.persons),
        "planner": report.planner,
        "makespan_s": report.makespan,
        "max_error_m": max(errs) if errs else 0.0,
        "mean_error_m": float(np.mean(errs)) if errs else 0.0,
        "frac_met_eth": float(np.mean(met)) if met else 0.0,
        "total_energy_j": float(sum(u.energy for u in report.uavs)),
        "planner_time_s": report.planner_time,
        "replans": report.replans,
    }
