"""Batch front-end: missions, sweeps, standalone planning, self-checks.

Subcommands:

  run       one mission; writes traces.jsonl, report.json, metrics.csv
  sweep     cross-product of person counts x seeds x planners into one
            metrics table; rows that fail are recorded and skipped
  plan      run a tour planner on an estimates file and print the tours
  validate  Monte-Carlo and brute-force cross-checks of the numerics,
            plus calibration of the error-prediction factor kappa

Exit codes: 0 success, 1 configuration error, 2 accuracy target
infeasible.  The metrics column set and order (METRIC_FIELDS) is a
stable contract; traces are line-delimited JSON records with keys
slot, entity, x, y, z, vx, vy.

Mission seeds in a sweep derive from (master seed, person count, seed
index, planner), so any subset of the sweep grid reproduces the same
rows as the full run.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import multiprocessing
import os
import sys
from dataclasses import asdict

import numpy as np

from .core import Scenario, ScenarioError, load_scenario
from .errorbound import Annulus, farthest_point_error
from .mle import RangeWindow, TrackEstimate, fit_track
from .planner import (SOLVERS, SwarmParams, make_context, predicted_error,
                      solve)
from .ranging import RangingParams, log_std, mean_range_error, sample_range
from .scan import ground_coverage_radius
from .sim import METRIC_FIELDS, MissionReport, collect_metrics, run_mission

PLANNERS = tuple(sorted(SOLVERS))


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def _load_scenario(path) -> Scenario:
    if path is None:
        return Scenario()
    return load_scenario(path)


def accuracy_floor(scenario: Scenario) -> float:
    """Predicted error when ranging from directly overhead.

    No waypoint can beat this; if it already exceeds e_th the accuracy
    target is unreachable for every person in the scenario.
    """
    params = RangingParams(scenario.eta, scenario.sigma_psi)
    return float(predicted_error(0.0, scenario.altitude, params,
                                 scenario.kappa))


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_traces(report: MissionReport, path) -> None:
    """Line-delimited trace records, one per (entity, slot)."""
    with open(path, "w") as fh:
        for entity in sorted(report.traces):
            for slot, x, y, z, vx, vy in report.traces[entity]:
                fh.write(json.dumps({"slot": int(slot), "entity": entity,
                                     "x": x, "y": y, "z": z,
                                     "vx": vx, "vy": vy}) + "\n")


def report_dict(report: MissionReport) -> dict:
    """Structured mission report without the bulky traces."""
    persons = []
    for p in report.persons:
        d = asdict(p)
        d["estimate"] = _jsonable({
            "person": p.estimate.person, "t_ref": p.estimate.t_ref,
            "position": p.estimate.position, "velocity": p.estimate.velocity,
            "error_bound": p.estimate.error_bound,
            "converged": p.estimate.converged,
        })
        persons.append(_jsonable(d))
    return {
        "scenario": _jsonable(asdict(report.scenario)),
        "planner": report.planner,
        "makespan_s": report.makespan,
        "phase1_end_slot": report.phase1_end,
        "planner_time_s": report.planner_time,
        "replans": report.replans,
        "persons": persons,
        "uavs": [_jsonable(asdict(u)) for u in report.uavs],
    }


def write_report(report: MissionReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report_dict(report), fh, indent=2)
        fh.write("\n")


def write_metrics(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRIC_FIELDS)
        writer.writeheader()
        writer.writerows(rows)


def mission_seed(master: int, persons: int, seed_index: int,
                 planner: str) -> int:
    """Per-mission seed from the sweep cell coordinates.

    Hashing the full coordinate keeps cells independent of which other
    cells run, so re-running any subset reproduces the same rows.
    """
    code = PLANNERS.index(planner)
    ss = np.random.SeedSequence([master, persons, seed_index, code])
    return int(ss.generate_state(1, np.uint64)[0])


def cmd_run(args) -> int:
    try:
        scenario = _load_scenario(args.scenario)
    except (ScenarioError, OSError) as exc:
        return _fail(str(exc))
    if args.persons < 1:
        return _fail(f"--persons must be >= 1, got {args.persons}")
    floor = accuracy_floor(scenario)
    if floor > scenario.e_th:
        print(f"error: accuracy target infeasible: predicted error from "
              f"directly overhead is {floor:.2f} m > e_th = "
              f"{scenario.e_th:.2f} m", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    report = run_mission(scenario, args.persons, args.planner, seed=args.seed)
    row = collect_metrics(report, seed=args.seed)
    write_traces(report, os.path.join(args.out, "traces.jsonl"))
    write_report(report, os.path.join(args.out, "report.json"))
    write_metrics([row], os.path.join(args.out, "metrics.csv"))
    print(f"makespan {row['makespan_s']:.2f} s   "
          f"max error {row['max_error_m']:.2f} m   "
          f"located {sum(p.located for p in report.persons)}/"
          f"{len(report.persons)}")
    print(f"artifacts in {args.out}")
    return 0


def _sweep_cell(job):
    """One sweep row; runs in a worker process."""
    scenario, persons, seed_index, planner, master = job
    try:
        seed = mission_seed(master, persons, seed_index, planner)
        report = run_mission(scenario, persons, planner, seed=seed)
        row = collect_metrics(report, seed=seed_index)
        return row, None
    except Exception as exc:  # recorded per-row, sweep continues
        return None, f"{type(exc).__name__}: {exc}"


def _worker_count(n_jobs: int) -> int:
    env = os.environ.get("UAVLOC_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, min(os.cpu_count() or 1, n_jobs))


def cmd_sweep(args) -> int:
    try:
        scenario = _load_scenario(args.scenario)
        persons = [int(v) for v in args.persons.split(",") if v]
        planners = [v.strip() for v in args.planners.split(",") if v.strip()]
    except (ScenarioError, OSError, ValueError) as exc:
        return _fail(str(exc))
    if not persons or any(s < 1 for s in persons):
        return _fail(f"bad person counts {persons}")
    if args.seeds < 1:
        return _fail(f"--seeds must be >= 1, got {args.seeds}")
    unknown = [p for p in planners if p not in SOLVERS]
    if unknown or not planners:
        return _fail(f"unknown planners {unknown}; choose from {PLANNERS}")
    floor = accuracy_floor(scenario)
    if floor > scenario.e_th:
        print(f"error: accuracy target infeasible: predicted error from "
              f"directly overhead is {floor:.2f} m > e_th = "
              f"{scenario.e_th:.2f} m", file=sys.stderr)
        return 2

    master = scenario.seed if args.seed is None else args.seed
    jobs = [(scenario, s, k, p, master)
            for s, k, p in itertools.product(persons, range(args.seeds),
                                             planners)]
    os.makedirs(args.out, exist_ok=True)
    workers = _worker_count(len(jobs))
    rows, failures = [], []
    with open(os.path.join(args.out, "metrics.csv"), "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRIC_FIELDS)
        writer.writeheader()

        def record(job, row, err):
            _, s, k, p, _ = job
            if err is None:
                rows.append(row)
                writer.writerow(row)
                fh.flush()
                print(f"[{len(rows) + len(failures)}/{len(jobs)}] "
                      f"S={s} seed={k} {p}: makespan "
                      f"{row['makespan_s']:.2f} s")
            else:
                failures.append({"persons": s, "seed": k, "planner": p,
                                 "error": err})
                print(f"[{len(rows) + len(failures)}/{len(jobs)}] "
                      f"S={s} seed={k} {p}: FAILED ({err})")

        if workers == 1:
            for job in jobs:
                row, err = _sweep_cell(job)
                record(job, row, err)
        else:
            with multiprocessing.Pool(workers) as pool:
                for job, (row, err) in zip(jobs,
                                           pool.imap(_sweep_cell, jobs)):
                    record(job, row, err)

    if failures:
        fail_path = os.path.join(args.out, "failures.csv")
        with open(fail_path, "w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["persons", "seed", "planner", "error"])
            writer.writeheader()
            writer.writerows(failures)
        print(f"{len(failures)} of {len(jobs)} rows failed; "
              f"details in {fail_path}", file=sys.stderr)
        return 1
    print(f"{len(rows)} rows in {os.path.join(args.out, 'metrics.csv')}")
    return 0


def load_estimates(path) -> list[TrackEstimate]:
    """Parse an estimates file: a JSON array of target records.

    Each record needs "position" [x, y] and "error_bound" > 0;
    "person" (default: array index), "velocity" (default [0, 0]) and
    "t_ref" (default 0) are optional.
    """
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, list) or not raw:
        raise ValueError(f"{path}: expected a non-empty JSON array")
    out = []
    for i, rec in enumerate(raw):
        if not isinstance(rec, dict):
            raise ValueError(f"{path}: record {i} is not an object")
        try:
            pos = [float(v) for v in rec["position"]]
            bound = float(rec["error_bound"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}: record {i}: {exc}") from exc
        vel = [float(v) for v in rec.get("velocity", (0.0, 0.0))]
        if len(pos) != 2 or len(vel) != 2:
            raise ValueError(f"{path}: record {i}: position and velocity "
                             f"must have 2 components")
        if bound <= 0:
            raise ValueError(f"{path}: record {i}: error_bound must be > 0")
        out.append(TrackEstimate(
            person=int(rec.get("person", i)), t_ref=int(rec.get("t_ref", 0)),
            position=np.array(pos), velocity=np.array(vel),
            error_bound=bound, log_likelihood=0.0))
    return out


def cmd_plan(args) -> int:
    try:
        scenario = _load_scenario(args.scenario)
        estimates = load_estimates(args.estimates)
    except (ScenarioError, OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    swarm = SwarmParams(seed=0 if args.seed is None else args.seed)
    plan = solve(args.planner, estimates, scenario, swarm)
    dt = scenario.slot_duration
    for m, legs in enumerate(plan.legs):
        sx, sy = plan.waypoints[m][0]
        print(f"uav {m}: start ({sx:.1f}, {sy:.1f})")
        for leg in legs:
            print(f"  person {leg.person}: waypoint "
                  f"({leg.waypoint[0]:.1f}, {leg.waypoint[1]:.1f})  "
                  f"target ({leg.center[0]:.1f}, {leg.center[1]:.1f})  "
                  f"rho {leg.rho:.1f} m  arrival {leg.arrival * dt:.2f} s")
    print(f"makespan {plan.makespan:.2f} s")
    if plan.infeasible:
        print(f"accuracy target infeasible for persons {plan.infeasible}",
              file=sys.stderr)
        return 2
    return 0


def brute_force_makespan(estimates, scenario: Scenario,
                         swarm: SwarmParams) -> float:
    """Exact MTSP optimum by enumeration, for small instances only.

    Tours are independent given the assignment, so the best makespan of
    an assignment is the max over vehicles of each vehicle's own best
    order.  Shares the planner's tour evaluation.
    """
    n, m = len(estimates), scenario.uav_count
    if n > 8:
        raise ValueError(f"enumeration over {n} targets is not sensible")
    ctx = make_context(estimates, scenario, swarm)

    def best_order_time(group, uav):
        if not group:
            return ctx.tour([], uav)[1]
        return min(ctx.tour(list(p), uav)[1]
                   for p in itertools.permutations(group))

    best = np.inf
    for assign in itertools.product(range(m), repeat=n):
        groups = [[i for i, a in enumerate(assign) if a == j]
                  for j in range(m)]
        best = min(best, max(best_order_time(g, j)
                             for j, g in enumerate(groups)))
    return float(best)


def _check_ranging() -> tuple[bool, str]:
    params = RangingParams()
    rng = np.random.default_rng(2026)
    d = 100.0
    r = sample_range(d, params, rng, size=1_000_000)
    s = log_std(params)
    mean_des = d * np.exp(s * s / 2.0)
    rel_mean = abs(float(np.mean(r)) - mean_des) / mean_des
    mexi = float(mean_range_error(d, params))
    rel_err = abs(float(np.mean(r)) - d - mexi) / mexi
    ok = rel_mean < 0.01 and rel_err < 0.05
    return ok, (f"sample mean off by {rel_mean * 100:.3f}% "
                f"(limit 1%), mean bias off by {rel_err * 100:.2f}% "
                f"(limit 5%)")


def _check_mtsp() -> tuple[bool, str]:
    rng = np.random.default_rng(100)
    pos = rng.uniform((0.0, 0.0), (1120.0, 640.0), size=(6, 2))
    estimates = [TrackEstimate(person=i, t_ref=0, position=pos[i],
                               velocity=np.zeros(2), error_bound=10.0,
                               log_likelihood=0.0)
                 for i in range(6)]
    scenario = Scenario(uav_count=2, edge_access=False)
    swarm = SwarmParams(seed=0)
    plan = solve("epso", estimates, scenario, swarm)
    opt = brute_force_makespan(estimates, scenario, swarm)
    gap = (plan.makespan - opt) / opt
    return gap <= 0.02 + 1e-12, (f"epso {plan.makespan:.3f} s vs optimum "
                                 f"{opt:.3f} s, gap {gap * 100:.2f}% "
                                 f"(limit 2%)")


def grid_farthest_point(annuli, w_hat, steps: int = 1200) -> float:
    """Brute-force farthest feasible point on a dense bounding-box grid."""
    lo = np.min([np.asarray(a.center) - a.outer for a in annuli], axis=0)
    hi = np.max([np.asarray(a.center) + a.outer for a in annuli], axis=0)
    xs = np.linspace(lo[0], hi[0], steps)
    ys = np.linspace(lo[1], hi[1], steps)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    keep = np.ones(len(pts), dtype=bool)
    for a in annuli:
        d = np.linalg.norm(pts - np.asarray(a.center), axis=1)
        keep &= (d >= a.inner) & (d <= a.outer)
    if not np.any(keep):
        return 0.0
    return float(np.max(np.linalg.norm(pts[keep] - np.asarray(w_hat),
                                       axis=1)))


def _check_annulus() -> tuple[bool, str]:
    annuli = [Annulus(center=np.array([0.0, 0.0]), inner=80.0, outer=120.0),
              Annulus(center=np.array([60.0, 10.0]), inner=70.0, outer=130.0),
              Annulus(center=np.array([30.0, -40.0]), inner=0.0,
                      outer=150.0)]
    w_hat = (10.0, 5.0)
    fast = farthest_point_error(annuli, w_hat)
    ref = grid_farthest_point(annuli, w_hat)
    gap = abs(fast.error - ref) / ref
    ok = not fast.empty_region and gap <= 0.02
    return ok, (f"sampled bound {fast.error:.2f} m vs grid oracle "
                f"{ref:.2f} m, gap {gap * 100:.2f}% (limit 2%)")


def calibrate_kappa(scenario: Scenario, trials: int = 25,
                    ground_offset: float = 80.0,
                    quantile: float = 0.95) -> dict:
    """Fit the error-prediction factor from straight-flyby localizations.

    A UAV crosses the communication footprint of a static person at the
    given ground offset; the per-trial localization error (best of the
    two mirror hypotheses) is compared against the mean ranging error at
    the closest-approach distance.  kappa is the quantile of that ratio
    rounded up by taking the error quantile first.
    """
    params = RangingParams(scenario.eta, scenario.sigma_psi)
    g = ground_coverage_radius(scenario.comm_range, scenario.altitude)
    half = float(np.sqrt(g * g - ground_offset * ground_offset))
    v_slot = scenario.uav_vmax * scenario.slot_duration
    n_slots = int(2.0 * half / v_slot)
    xs = -half + v_slot * np.arange(n_slots)
    uav = np.stack([xs, np.full(n_slots, ground_offset),
                    np.full(n_slots, scenario.altitude)], axis=1)
    d = np.linalg.norm(uav, axis=1)
    errs = []
    for i in range(trials):
        rng = np.random.default_rng(3000 + i)
        samples = sample_range(d[:, None], params, rng,
                               size=(n_slots, scenario.samples_per_slot))
        win = RangeWindow(uav=0, person=0, t_start=0, t_end=n_slots - 1,
                          uav_positions=uav, samples=samples)
        est = fit_track(win, scenario)
        cands = [np.asarray(est.position)]
        if est.mirror is not None:
            cands.append(np.asarray(est.mirror[0]))
        errs.append(min(float(np.linalg.norm(c)) for c in cands))
    base = float(mean_range_error(np.hypot(ground_offset,
                                           scenario.altitude), params))
    kappa = float(np.quantile(errs, quantile)) / base
    return {"kappa": kappa, "trials": trials,
            "ground_offset_m": ground_offset, "quantile": quantile,
            "mean_range_error_m": base,
            "error_quantile_m": float(np.quantile(errs, quantile))}


def cmd_validate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    checks = [("ranging moments", _check_ranging),
              ("tour optimum", _check_mtsp),
              ("annulus bound", _check_annulus)]
    all_ok = True
    for name, fn in checks:
        ok, detail = fn()
        all_ok &= ok
        print(f"{name}: {'PASS' if ok else 'FAIL'}  ({detail})")
    cal = calibrate_kappa(Scenario())
    ok = 0.0 < cal["kappa"] < 10.0
    all_ok &= ok
    path = os.path.join(args.out, "kappa.json")
    with open(path, "w") as fh:
        json.dump(cal, fh, indent=2)
        fh.write("\n")
    print(f"kappa calibration: {'PASS' if ok else 'FAIL'}  "
          f"(kappa = {cal['kappa']:.3f}, written to {path})")
    return 0 if all_ok else 1


class _Parser(argparse.ArgumentParser):
    """Exit code 1 on usage errors; 2 is reserved for infeasibility."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="uavloc",
                     description="Two-phase UAV localization missions: "
                                 "scan, estimate, plan, refine.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one mission and write artifacts")
    run.add_argument("--scenario", help="scenario JSON file (default: "
                                        "built-in defaults)")
    run.add_argument("--planner", choices=PLANNERS, default="epso")
    run.add_argument("--persons", type=int, default=10,
                     help="number of persons to place (default 10)")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--out", default="out", help="output directory")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="metrics table over a grid of "
                                         "(persons, seeds, planners)")
    sweep.add_argument("--scenario")
    sweep.add_argument("--persons", default="6,8,10",
                       help="comma-separated person counts")
    sweep.add_argument("--seeds", type=int, default=10,
                       help="number of seed indices per cell")
    sweep.add_argument("--planners", default=",".join(PLANNERS),
                       help="comma-separated planner names")
    sweep.add_argument("--seed", type=int,
                       help="master seed (default: scenario seed)")
    sweep.add_argument("--out", default="out", help="output directory")
    sweep.set_defaults(func=cmd_sweep)

    plan = sub.add_parser("plan", help="plan tours for an estimates file")
    plan.add_argument("--estimates", required=True,
                      help="JSON array of {person, position, velocity, "
                           "error_bound, t_ref}")
    plan.add_argument("--scenario")
    plan.add_argument("--planner", choices=PLANNERS, default="epso")
    plan.add_argument("--seed", type=int, help="swarm seed (default 0)")
    plan.set_defaults(func=cmd_plan)

    val = sub.add_parser("validate", help="cross-check the numerics "
                                          "against independent oracles")
    val.add_argument("--out", default=".",
                     help="directory for kappa.json (default: cwd)")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse exits; keep main() a code return
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
