"""
Run Command

Runs a scenario file and writes the trajectory CSV and a JSON report.
"""

import argparse
import logging
import math
from pathlib import Path

from cli.output import output_dir, write_report, write_trajectory_csv
from cli.scenario_file import load_scenario
from models.errors import IntegrationAborted, ScenarioFileError
from models.schemas import ConvergenceReport, ExitCode, RunArtifacts, Scenario
from simulation.runner import simulate, simulate_errors

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("run", help="run a scenario file")
    parser.add_argument("scenario", type=Path, help="path to a TOML scenario file")
    parser.set_defaults(handler=execute)


def run_scenario(sc: Scenario, out: Path, stem: str) -> RunArtifacts:
    """Simulate ``sc`` and write ``<stem>.csv`` and ``<stem>.json`` into ``out``."""
    csv_path = out / f"{stem}.csv"
    report_path = out / f"{stem}.json"
    meta = {"scenario": stem, "variant": sc.spec.variant.value}

    try:
        if sc.initial_errors is not None:
            traj = simulate_errors(sc)
            report = None
        else:
            traj, report = simulate(sc)
    except IntegrationAborted as e:
        logger.error(f"Run {stem} aborted at t={e.time:g}: {e.__cause__}")
        print(f"aborted at t={e.time:g}: {e.__cause__}")
        write_report(
            report_path,
            {"aborted_at": e.time, "reason": str(e.__cause__)},
            ok=False,
            meta=meta,
        )
        return RunArtifacts(report_path=report_path, exit_status=ExitCode.ABORTED)

    rows = write_trajectory_csv(csv_path, traj)
    if report is None:
        final = traj.final
        write_report(
            report_path,
            {"final_time": float(traj.times[-1]), "final_errors": final.tolist()},
            meta=meta,
        )
        print(f"final errors: {', '.join(f'{v:.6g}' for v in final)}")
    else:
        write_report(report_path, report, meta=meta)
        print_summary(report)
    return RunArtifacts(csv_path=csv_path, report_path=report_path, samples=rows)


def print_summary(report: ConvergenceReport) -> None:
    e1, e2, e3 = report.final_errors
    vx, vy = report.steady_velocity
    print(f"classification: {report.classified.kind.value}")
    print(f"final errors: e1={e1:.6g} e2={e2:.6g} e3={e3:.6g}")
    print(f"final angle: {math.degrees(report.final_gamma):.6f} deg")
    print(f"steady velocity: ({vx:.6g}, {vy:.6g}) speed {report.steady_speed:.6g}")
    print(f"agent speeds: {', '.join(f'{s:.6g}' for s in report.agent_speeds)}")
    print(f"min link distance: {report.min_link_distance:.6g}")


def execute(args: argparse.Namespace) -> int:
    try:
        sc = load_scenario(args.scenario)
    except ScenarioFileError as e:
        logger.error(f"Invalid scenario {args.scenario}: {e}")
        print(f"error: {e}")
        return ExitCode.CONFIG_ERROR

    artifacts = run_scenario(sc, output_dir(args.out), args.scenario.stem)
    if artifacts.csv_path:
        print(f"wrote {artifacts.csv_path} ({artifacts.samples} samples)")
    return artifacts.exit_status
