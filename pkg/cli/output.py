"""
Output Writers

CSV writers and readers for trajectories and sweeps, plus the JSON report
envelope shared by every command.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from simulation.integrator import Trajectory

logger = logging.getLogger(__name__)

TRAJECTORY_HEADER = [
    "t",
    "p1x",
    "p1y",
    "p2x",
    "p2y",
    "p3x",
    "p3y",
    "e1",
    "e2",
    "e3",
    "gamma",
    "cross",
    "speed1",
    "speed2",
    "speed3",
]
ERROR_TRAJECTORY_HEADER = ["t", "e1", "e2", "e3"]
SWEEP_HEADER = ["theta", "max_real", "hurwitz"]


def fmt(value: float) -> str:
    """Shortest text that round-trips a double."""
    return f"{float(value):.17g}"


def create_envelope(data: Any = None, ok: bool = True, meta: Dict = None) -> Dict:
    """Create standardized report envelope."""
    return {"ok": ok, "meta": meta or {}, "data": data}


def write_report(path: Path, data: Any, ok: bool = True, meta: Dict = None) -> Path:
    """Write a JSON report; ``data`` may be a pydantic model."""
    path.parent.mkdir(parents=True, exist_ok=True)
    if hasattr(data, "json"):
        data = json.loads(data.json())
    with open(path, "w") as f:
        json.dump(create_envelope(data=data, ok=ok, meta=meta), f, indent=2)
    logger.info(f"Wrote report {path}")
    return path


def write_trajectory_csv(path: Path, traj: Trajectory) -> int:
    """Write a position-space or error-space trajectory; returns the row count."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        if traj.samples.ndim == 3:
            writer.writerow(TRAJECTORY_HEADER)
            rows = _position_rows(traj)
        else:
            writer.writerow(ERROR_TRAJECTORY_HEADER)
            rows = (
                [fmt(t)] + [fmt(v) for v in x] for t, x in zip(traj.times, traj.samples)
            )
        count = 0
        for row in rows:
            writer.writerow(row)
            count += 1
    logger.info(f"Wrote {count} samples to {path}")
    return count


def _position_rows(traj: Trajectory) -> Iterable[List[str]]:
    derived = traj.derived
    if derived is None:
        raise ValueError("position trajectories need derived signals for CSV output")
    for k, t in enumerate(traj.times):
        yield (
            [fmt(t)]
            + [fmt(v) for v in traj.samples[k].reshape(-1)]
            + [fmt(v) for v in derived.errors[k]]
            + [fmt(derived.gamma[k]), fmt(derived.cross[k])]
            + [fmt(v) for v in derived.speeds[k]]
        )


def read_csv_columns(path: Path) -> Dict[str, np.ndarray]:
    """Read a numeric CSV into one array per column."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        rows = list(reader)
        names = reader.fieldnames or []
    return {
        name: np.array([_parse(row[name]) for row in rows], dtype=float)
        for name in names
    }


def _parse(text: str) -> float:
    if text in ("true", "false"):
        return 1.0 if text == "true" else 0.0
    return float(text)


def write_sweep_csv(path: Path, rows: Iterable[Dict[str, Any]]) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {
                    "theta": fmt(row["theta"]),
                    "max_real": fmt(row["max_real"]),
                    "hurwitz": "true" if row["hurwitz"] else "false",
                }
            )
            count += 1
    logger.info(f"Wrote {count} sweep rows to {path}")
    return count


def format_matrix(m: np.ndarray, digits: int = 5) -> str:
    return "\n".join(
        "  [" + ", ".join(f"{v: .{digits}f}" for v in row) + "]" for row in m
    )


def format_eigenvalues(values: np.ndarray, digits: int = 5) -> str:
    parts: List[str] = []
    for v in values:
        if v.imag == 0:
            parts.append(f"{v.real:.{digits}f}")
        else:
            parts.append(f"{v.real:.{digits}f}{v.imag:+.{digits}f}j")
    return ", ".join(parts)


def output_dir(base: Optional[str]) -> Path:
    path = Path(base or "out")
    path.mkdir(parents=True, exist_ok=True)
    return path
