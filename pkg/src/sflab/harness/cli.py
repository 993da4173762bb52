"""Command-line interface.

Subcommands: run, verify, sweep, pep, export.  Exit codes: 0 when every
evaluated check passes, 1 when any check fails, 2 for configuration
errors.  SF_LAB_WORKERS caps the worker pool for curve solves.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import ConfigError, SfLabError
from ..lyapunov import potential
from ..optimizers import run_sf
from ..pep import PepSolverConfig, Scenario, dec_c, inc_c
from .config import RunConfig
from .reporting import Report, curve_csv, export, potential_csv, trajectory_csv, trajectory_dump
from .runner import DEFAULT_CAMPAIGN, pep_campaign, sweep, sweep_csv, verify

__all__ = ["main"]


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _print_report(report: Report) -> None:
    for c in report.checks:
        parts = [f"CHECK {c.check}: {c.status.upper()}"]
        if c.measured is not None:
            parts.append(f"measured={c.measured:.6g}")
        if c.bound is not None:
            parts.append(f"bound={c.bound:.6g}")
        if c.status == "fail" and c.first_violation_t is not None:
            parts.append(f"first_violation_t={c.first_violation_t}")
        if c.status == "skip" and "cause" in c.detail:
            parts.append(f"cause: {c.detail['cause']}")
        print("  ".join(parts))


def _exit_code(reports: list[Report]) -> int:
    return 1 if any(r.overall == "fail" for r in reports) else 0


def _cmd_run(args) -> int:
    cfg = _load_json(args.config)
    config = RunConfig.from_dict(cfg, unsafe=args.unsafe_schedule)
    traj = run_sf(config.problem, config.noise, config.schedule, config.x0, config.T,
                  unsafe=args.unsafe_schedule)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trajectory.csv").write_text(trajectory_csv(traj))
    if args.dump_vectors:
        trajectory_dump(traj, out / "trajectory.bin")
    try:
        trace = potential(traj, config.problem)
        (out / "potential.csv").write_text(potential_csv(trace))
    except SfLabError as exc:
        print(f"potential trace unavailable: {exc}", file=sys.stderr)
    print(f"wrote {out / 'trajectory.csv'}")
    return 0


def _cmd_verify(args) -> int:
    cfg = _load_json(args.config)
    report = verify(cfg, unsafe=args.unsafe_schedule)
    _print_report(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        export(report, out / "report.json", "json")
        print(f"wrote {out / 'report.json'}")
    return _exit_code([report])


def _cmd_sweep(args) -> int:
    grid = _load_json(args.grid)
    reports = sweep(grid, unsafe=args.unsafe_schedule)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, rep in enumerate(reports):
        export(rep, out / f"report_{i:04d}.json", "json")
    (out / "aggregate.csv").write_text(sweep_csv(reports))
    print(f"wrote {len(reports)} reports and {out / 'aggregate.csv'}")
    return _exit_code(reports)


def _scenarios_from_args(args) -> list[Scenario]:
    if args.scenario == "all":
        return list(DEFAULT_CAMPAIGN)
    if args.scenario in ("dec_c", "inc_c"):
        if args.alpha is None:
            raise ConfigError(f"--scenario {args.scenario} needs --alpha")
        return [dec_c(args.alpha) if args.scenario == "dec_c" else inc_c(args.alpha)]
    return [Scenario(args.scenario)]


def _cmd_pep(args) -> int:
    solver_cfg = PepSolverConfig.from_config(_load_json(args.config) if args.config else None)
    if args.n_max > solver_cfg.max_n:
        raise ConfigError(
            f"--n-max {args.n_max} exceeds pep.max_n = {solver_cfg.max_n}; raise it in the config"
        )
    scenarios = _scenarios_from_args(args)
    curves, report = pep_campaign(
        scenarios, args.n_max, args.L, args.D, metric=args.metric,
        solver_config=solver_cfg, workers=args.workers, out_dir=args.out,
    )
    _print_report(report)
    print(f"wrote curves for {len(curves)} scenario(s) to {args.out}")
    return _exit_code([report])


def _cmd_export(args) -> int:
    data = _load_json(args.input)
    if args.format not in ("csv", "json"):
        raise ConfigError(f"unknown export format {args.format!r}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, dict) and "checks" in data:
        if args.format == "json":
            from .reporting import canonical_json

            out.write_text(canonical_json(data))
        else:
            lines = ["check,status,measured,bound"]
            for c in data["checks"]:
                lines.append(",".join([
                    str(c.get("check")), str(c.get("status")),
                    "" if c.get("measured") is None else repr(c["measured"]),
                    "" if c.get("bound") is None else repr(c["bound"]),
                ]))
            out.write_text("\n".join(lines) + "\n")
    elif isinstance(data, list):
        from ..pep.curve import CurvePoint

        points = [CurvePoint(int(r["t"]), r.get("tau"), r.get("weighted_tau"), r.get("status", ""))
                  for r in data]
        out.write_text(curve_csv(points) if args.format == "csv" else
                       json.dumps(data, sort_keys=True))
    else:
        raise ConfigError("input is neither a report nor a curve record")
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sf-lab",
                                     description="schedule-free optimizer laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one run config and export its trajectory")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--dump-vectors", action="store_true")
    p_run.add_argument("--unsafe-schedule", action="store_true")
    p_run.set_defaults(fn=_cmd_run)

    p_ver = sub.add_parser("verify", help="run a config and evaluate its checks")
    p_ver.add_argument("--config", required=True)
    p_ver.add_argument("--out")
    p_ver.add_argument("--unsafe-schedule", action="store_true")
    p_ver.set_defaults(fn=_cmd_verify)

    p_sweep = sub.add_parser("sweep", help="cross-product grid of verify runs")
    p_sweep.add_argument("--grid", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--unsafe-schedule", action="store_true")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_pep = sub.add_parser("pep", help="worst-case curve campaign")
    p_pep.add_argument("--scenario", default="all",
                       choices=["all", "dec_c", "inc_c", "lin_step_grad", "lin_step_dist"])
    p_pep.add_argument("--alpha", type=float)
    p_pep.add_argument("--n-max", type=int, default=30, dest="n_max")
    p_pep.add_argument("--L", type=float, default=1.0)
    p_pep.add_argument("--D", type=float, default=1.0)
    p_pep.add_argument("--metric")
    p_pep.add_argument("--workers", type=int)
    p_pep.add_argument("--config", help="JSON with pep.solver / pep.tol / pep.max_n keys")
    p_pep.add_argument("--out", required=True)
    p_pep.set_defaults(fn=_cmd_pep)

    p_exp = sub.add_parser("export", help="re-serialize a stored report or curve")
    p_exp.add_argument("--in", dest="input", required=True)
    p_exp.add_argument("--format", required=True)
    p_exp.add_argument("--out", required=True)
    p_exp.set_defaults(fn=_cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SfLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
