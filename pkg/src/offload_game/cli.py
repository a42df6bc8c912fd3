"""Command-line front end.

Exit codes: 0 success, 1 validation or usage error, 2 runtime error
(oracle budget, I/O).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import dynamics, equilibrium, experiment
from .errors import OracleBudgetError, OffloadGameError, ValidationError
from .game import sir_all
from .scenario_file import (ScenarioFile, ScenarioFileError, dump_scenario,
                            format_float, load_scenario)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
SEED_ENV = "OFFLOAD_GAME_SEED"
DEFAULT_RESOLUTION = 0.02


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _vec(x) -> str:
    return "(" + ", ".join(f"{v:.6g}" for v in np.asarray(x)) + ")"


def _resolve(args) -> ScenarioFile:
    if getattr(args, "scenario", None):
        try:
            s = experiment.get_scenario(args.scenario)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        return ScenarioFile(config=s.config, name=s.name, description=s.description)
    if not args.path:
        raise UsageError("give a scenario file or --scenario NAME")
    return load_scenario(args.path)


def cmd_validate(args) -> int:
    sf = load_scenario(args.path)
    c = sf.config
    dev = c.alpha + c.beta.sum() - 1.0
    print(f"{args.path}: OK ({c.num_players} players, alpha + sum(beta) - 1 = {dev:.3g})")
    return EXIT_OK


def _solve_payload(sf: ScenarioFile, resolution: float, max_cells: int) -> dict:
    config = sf.config
    K = config.num_players
    if K == 2:
        cls = equilibrium.classify_two_player(config)
        payload = {"method": "two-player classification", "kind": cls.kind.value,
                   "equilibria": [e.tolist() for e in cls.equilibria]}
        if cls.segment is not None:
            payload["segment"] = [p.tolist() for p in cls.segment]
        return payload
    weak = equilibrium.weak_interference_holds(config)
    if weak.all():
        system = equilibrium.build_linear_system(config)
        x = equilibrium.solve_linear_ne(config)
        return {"method": "linear solve", "equilibria": [x.tolist()],
                "gershgorin_bound": equilibrium.gershgorin_bound(system),
                "residual": system.residual(x),
                "ne_residual": equilibrium.ne_residual(config, x)}
    reps = equilibrium.brute_force_ne(config, resolution, max_cells)
    return {"method": "grid oracle", "resolution": resolution,
            "weak_interference": weak.tolist(),
            "warning": "weak interference fails for players "
                       f"{[int(k) + 1 for k in np.flatnonzero(~weak)]}; "
                       "equilibria are grid approximations",
            "equilibria": [r.tolist() for r in reps]}


def cmd_solve(args) -> int:
    sf = _resolve(args)
    try:
        payload = _solve_payload(sf, args.resolution, args.max_cells)
    except OracleBudgetError as exc:
        print(f"error: {exc} (pass e.g. --resolution 0.05)", file=sys.stderr)
        return EXIT_RUNTIME
    if args.json:
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print(f"method: {payload['method']}")
    if "kind" in payload:
        print(f"class: {payload['kind']}")
    if "warning" in payload:
        print(f"warning: {payload['warning']}", file=sys.stderr)
    for i, eq in enumerate(payload["equilibria"], 1):
        print(f"NE {i}: {_vec(eq)}")
    if "segment" in payload:
        a, b = payload["segment"]
        print(f"segment of equilibria from {_vec(a)} to {_vec(b)}")
    if "gershgorin_bound" in payload:
        print(f"gershgorin bound: {payload['gershgorin_bound']:.6g}")
        print(f"residual |x - Ax - b|_inf: {payload['residual']:.3g}")
    return EXIT_OK


def _run_settings(args, sf: ScenarioFile) -> dict:
    run = sf.run
    K = sf.config.num_players
    x0 = _floats(args.x0) if args.x0 is not None else run.get("x0")
    if x0 is None:
        raise UsageError("no initial profile: pass --x0 or set run.x0 in the scenario file")
    if len(x0) != K:
        raise UsageError(f"--x0 needs {K} values, got {len(x0)}")
    order = None
    if args.order is not None:
        order = [int(v) - 1 for v in _floats(args.order)]
    elif "order" in run:
        order = [int(v) - 1 for v in run["order"]]
    return {
        "dynamic": experiment.Dynamic.parse(args.dynamic or run.get("dynamic", "smbrd")),
        "x0": np.array(x0),
        "order": order,
        "tol": args.tol if args.tol is not None else run.get("tol", dynamics.DEFAULT_TOL),
        "max_steps": args.max_steps if args.max_steps is not None
        else run.get("max_steps", dynamics.DEFAULT_MAX_STEPS),
        "max_period": args.max_period if args.max_period is not None
        else run.get("max_period", dynamics.DEFAULT_MAX_PERIOD),
    }


def run_from_settings(sf: ScenarioFile, settings: dict) -> dynamics.DynamicsTrace:
    kw = dict(tol=settings["tol"], max_steps=settings["max_steps"],
              max_period=settings["max_period"])
    if settings["dynamic"] is experiment.Dynamic.SIMULTANEOUS:
        return dynamics.run_smbrd(sf.config, settings["x0"], **kw)
    return dynamics.run_ambrd(sf.config, settings["x0"], order=settings["order"], **kw)


def write_trace_csv(trace: dynamics.DynamicsTrace, path) -> None:
    K = len(trace.states[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "player_updated", *[f"x_{k + 1}" for k in range(K)], "max_delta"])
        prev = None
        for t, who, x in zip(trace.times, trace.updated, trace.states):
            if prev is None:
                label, delta = "init", 0.0
            else:
                label = "all" if who is None else str(who + 1)
                delta = float(np.max(np.abs(x - prev)))
            w.writerow([t, label, *[format_float(v) for v in x], format_float(delta)])
            prev = x


def cmd_run(args) -> int:
    sf = _resolve(args)
    settings = _run_settings(args, sf)
    trace = run_from_settings(sf, settings)
    out = trace.outcome
    print(f"dynamic: {settings['dynamic'].value}")
    print(f"outcome: {out.kind}")
    if isinstance(out, dynamics.Converged):
        print(f"steps: {out.steps}")
    elif isinstance(out, dynamics.Cycled):
        print(f"period: {out.period}")
        for s in out.cycle_states:
            print(f"  cycle state: {_vec(s)}")
    else:
        print(f"steps: {out.max_steps} (limit reached)")
    print(f"final profile: {_vec(trace.final)}")
    print(f"final SIR: {_vec(sir_all(sf.config, trace.final))}")
    if args.trace:
        write_trace_csv(trace, args.trace)
    return EXIT_OK


def write_montecarlo(result: experiment.ExperimentResult, out: Path) -> Path:
    """Write per-trial records to ``out`` and the CDF to ``<stem>_cdf.csv``; return the latter."""
    K = len(result.records[0].x0)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", *[f"x0_{k + 1}" for k in range(K)], "outcome", "steps"])
        for r in result.records:
            steps = "inf" if r.steps == float("inf") else str(int(r.steps))
            w.writerow([r.trial, *[format_float(v) for v in r.x0], r.outcome, steps])
    cdf_path = out.with_name(out.stem + "_cdf.csv")
    with open(cdf_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["steps", "cumulative_fraction"])
        for s, f in result.cdf:
            w.writerow([s, format_float(f)])
    return cdf_path


def cmd_montecarlo(args) -> int:
    sf = _resolve(args)
    run = sf.run
    seed = args.seed
    if seed is None:
        seed = int(os.environ[SEED_ENV]) if os.environ.get(SEED_ENV) else run.get("seed", 0)
    scenario = experiment.Scenario(sf.name or "scenario", sf.config)
    result = experiment.monte_carlo(
        scenario, args.dynamic or run.get("dynamic", "smbrd"),
        trials=args.trials if args.trials is not None else run.get("trials", 1000),
        seed=seed,
        tol=args.tol if args.tol is not None else run.get("tol", dynamics.DEFAULT_TOL),
        max_steps=args.max_steps if args.max_steps is not None
        else run.get("max_steps", dynamics.DEFAULT_MAX_STEPS),
        workers=args.workers)
    print(f"scenario: {result.scenario}  dynamic: {result.dynamic.value}  "
          f"trials: {result.trials}  seed: {result.seed}")
    print(f"converged: {result.fraction_converged:.4f}  cycled: {result.fraction_cycled:.4f}  "
          f"exhausted: {result.fraction_exhausted:.4f}")
    print(f"median steps (converged): {result.median_steps:g}")
    if args.out:
        try:
            cdf_path = write_montecarlo(result, Path(args.out))
        except OSError as exc:
            print(f"error: cannot write {exc.filename}: {exc.strerror}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"wrote {args.out} and {cdf_path}")
    return EXIT_OK


def cmd_catalog(args) -> int:
    for s in experiment.catalog():
        print(f"{s.name:12s} K={s.config.num_players}  {s.expected_class:18s} {s.description}")
        if args.write:
            d = Path(args.write)
            d.mkdir(parents=True, exist_ok=True)
            sf = ScenarioFile(config=s.config, name=s.name, description=s.description)
            (d / f"{s.name}.json").write_text(dump_scenario(sf), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="offload-game",
                description="Capacity offload game: equilibria and best-response dynamics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)

    def scenario_args(sp):
        sp.add_argument("path", nargs="?", help="scenario JSON file")
        sp.add_argument("--scenario", help="use a built-in scenario instead of a file")

    s = sub.add_parser("solve", help="compute the Nash equilibria")
    scenario_args(s)
    s.add_argument("--resolution", type=float, default=DEFAULT_RESOLUTION,
                   help="grid step of the brute-force oracle (used outside the linear regime)")
    s.add_argument("--max-cells", type=int, default=equilibrium.DEFAULT_MAX_CELLS)
    s.add_argument("--json", action="store_true", help="machine-readable output")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("run", help="run one best-response dynamic")
    scenario_args(r)
    r.add_argument("--dynamic", choices=["smbrd", "ambrd"])
    r.add_argument("--x0", help="initial profile, comma separated")
    r.add_argument("--order", help="AMBRD update order, 1-based, comma separated")
    r.add_argument("--tol", type=float)
    r.add_argument("--max-steps", type=int)
    r.add_argument("--max-period", type=int)
    r.add_argument("--trace", help="write the per-step trace to this CSV file")
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("montecarlo", help="Monte Carlo over uniform random initial profiles")
    scenario_args(m)
    m.add_argument("--dynamic", choices=["smbrd", "ambrd"])
    m.add_argument("--trials", type=int)
    m.add_argument("--seed", type=int, help=f"default: ${SEED_ENV}, then run.seed, then 0")
    m.add_argument("--tol", type=float)
    m.add_argument("--max-steps", type=int)
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--out", help="per-trial CSV; the CDF goes to <stem>_cdf.csv")
    m.set_defaults(func=cmd_montecarlo)

    c = sub.add_parser("catalog", help="list built-in scenarios")
    c.add_argument("--write", metavar="DIR", help="also write each scenario as JSON into DIR")
    c.set_defaults(func=cmd_catalog)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except ScenarioFileError as exc:
        print(f"{exc.source}: invalid scenario", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OffloadGameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
