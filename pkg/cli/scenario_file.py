"""
Scenario Files

Flat TOML documents describing one simulation run. Every key is optional
except d1 and d2; unknown keys are rejected and errors cite line numbers.
"""

import logging
import math
import re
import tomllib
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from models.errors import ScenarioFileError
from models.schemas import DEFAULT_CLASSIFY_TOL, FormationSpec, Scenario, Variant

logger = logging.getLogger(__name__)

SPEC_KEYS = {"variant", "d1", "d2", "theta", "theta_deg", "c", "mu1", "mu2"}
RUN_KEYS = {
    "dt",
    "horizon",
    "record_every",
    "seed",
    "spread",
    "collinear_start",
    "classify_tol",
    "e0",
}
POSITION_KEYS = ("p1", "p2", "p3")
ALLOWED_KEYS = SPEC_KEYS | RUN_KEYS | set(POSITION_KEYS)

_LINE_RE = re.compile(r"line (\d+)")


def key_lines(text: str) -> Dict[str, int]:
    """1-based line number of each top-level key assignment."""
    lines = {}
    for number, line in enumerate(text.splitlines(), start=1):
        match = re.match(r"\s*([A-Za-z0-9_\-]+)\s*=", line)
        if match and match.group(1) not in lines:
            lines[match.group(1)] = number
    return lines


def parse_scenario(text: str) -> Scenario:
    """
    Parse and validate scenario text.

    Args:
        text: TOML document

    Returns:
        Validated Scenario

    Raises:
        ScenarioFileError: on syntax errors, unknown keys or invalid values
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = _LINE_RE.search(str(e))
        raise ScenarioFileError(
            f"invalid TOML: {e}", int(match.group(1)) if match else None
        ) from e

    lines = key_lines(text)
    for key, value in doc.items():
        if key not in ALLOWED_KEYS:
            raise ScenarioFileError(f"unknown key '{key}'", lines.get(key))
        if isinstance(value, dict):
            raise ScenarioFileError(
                f"tables are not supported ('{key}')", lines.get(key)
            )

    if "theta" in doc and "theta_deg" in doc:
        raise ScenarioFileError(
            "give either theta or theta_deg, not both", lines.get("theta_deg")
        )
    present = [k for k in POSITION_KEYS if k in doc]
    if present and len(present) != len(POSITION_KEYS):
        missing = next(k for k in POSITION_KEYS if k not in doc)
        raise ScenarioFileError(
            f"p1, p2 and p3 must be given together (missing {missing})",
            lines.get(present[0]),
        )
    if present and "e0" in doc:
        raise ScenarioFileError(
            "give either p1, p2, p3 or e0, not both", lines.get("e0")
        )

    spec_fields: Dict[str, Any] = {
        k: doc[k] for k in ("variant", "d1", "d2", "c", "mu1", "mu2") if k in doc
    }
    if "theta_deg" in doc:
        degrees = _number(doc["theta_deg"], "theta_deg", lines)
        spec_fields["theta"] = math.radians(degrees)
    elif "theta" in doc:
        spec_fields["theta"] = doc["theta"]

    run_fields: Dict[str, Any] = {k: doc[k] for k in RUN_KEYS - {"e0"} if k in doc}
    if present:
        run_fields["initial"] = [doc[k] for k in POSITION_KEYS]
    if "e0" in doc:
        run_fields["initial_errors"] = doc["e0"]

    try:
        spec = FormationSpec(**spec_fields)
    except ValidationError as e:
        raise _translate(e, lines) from e
    try:
        return Scenario(spec=spec, **run_fields)
    except ValidationError as e:
        raise _translate(e, lines, {"initial": "p1", "initial_errors": "e0"}) from e


def load_scenario(path: Path) -> Scenario:
    """Read and parse a scenario file."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ScenarioFileError(f"cannot read {path}: {e}") from e
    logger.debug(f"Parsing scenario {path}")
    return parse_scenario(text)


def _number(value: Any, key: str, lines: Dict[str, int]) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFileError(f"{key} must be a number", lines.get(key))
    return float(value)


def _translate(
    error: ValidationError,
    lines: Dict[str, int],
    aliases: Optional[Dict[str, str]] = None,
) -> ScenarioFileError:
    """Turn the first pydantic error into a message naming key and line."""
    first = error.errors()[0]
    field = str(first["loc"][0]) if first["loc"] else "scenario"
    key = (aliases or {}).get(field, field)
    if key == "theta" and "theta_deg" in lines:
        key = "theta_deg"
    return ScenarioFileError(f"{key}: {first['msg']}", lines.get(key))


def dump_scenario(sc: Scenario, comment: Optional[str] = None) -> str:
    """
    Render a scenario as TOML that parses back to the same scenario.

    Keys holding their defaults are left out, except the integration
    settings. Explicit positions replace the seed and sampling keys.
    """
    spec = sc.spec
    out = [f"# {comment}"] if comment else []
    out += [
        f'variant = "{spec.variant.value}"',
        f"d1 = {spec.d1!r}",
        f"d2 = {spec.d2!r}",
    ]
    if spec.theta != 0.0:
        degrees = round(math.degrees(spec.theta), 9)
        if math.radians(degrees) == spec.theta:
            out.append(f"theta_deg = {degrees!r}")
        else:
            out.append(f"theta = {spec.theta!r}")
    if spec.c != 0.0 or spec.variant != Variant.UNBIASED:
        out.append(f"c = {spec.c!r}")
    if spec.mu1 is not None:
        out += [f"mu1 = {spec.mu1!r}", f"mu2 = {spec.mu2!r}"]
    out += [
        f"dt = {sc.dt!r}",
        f"horizon = {sc.horizon!r}",
        f"record_every = {sc.record_every}",
    ]
    if sc.initial is not None:
        for name, p in zip(POSITION_KEYS, sc.initial):
            out.append(f"{name} = [{float(p[0])!r}, {float(p[1])!r}]")
    elif sc.initial_errors is not None:
        values = ", ".join(repr(float(v)) for v in sc.initial_errors)
        out.append(f"e0 = [{values}]")
    else:
        out += [f"seed = {sc.seed}", f"spread = {sc.spread!r}"]
        if sc.collinear_start:
            out.append("collinear_start = true")
    if sc.classify_tol != DEFAULT_CLASSIFY_TOL:
        out.append(f"classify_tol = {sc.classify_tol!r}")
    return "\n".join(out) + "\n"
