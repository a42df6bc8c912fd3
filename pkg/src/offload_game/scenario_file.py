"""JSON scenario files.

Example::

    {
      "name": "2p-unique",
      "num_players": 2,
      "alpha": 0.5,
      "beta": [0.25, 0.25],
      "power": [1.0, 1.0],
      "gain": [[1.0, 0.6], [0.4, 1.0]],
      "noise_density": 0.01,
      "run": {"dynamic": "smbrd", "x0": [0.2, 0.9], "tol": 0.01,
              "max_steps": 100, "trials": 1000, "seed": 7}
    }

``gain`` is row-major with row = receiver, column = transmitter.  The
``run`` block is optional and every entry in it is optional.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ValidationError
from .game import NetworkConfig, config_violations

CONFIG_FIELDS = ("num_players", "alpha", "beta", "power", "gain", "noise_density")
RUN_FIELDS = ("dynamic", "x0", "order", "tol", "max_steps", "max_period", "trials", "seed")
TOP_FIELDS = ("name", "description", *CONFIG_FIELDS, "run")


class ScenarioFileError(ValidationError):
    """Scenario file that cannot be turned into a valid configuration."""

    def __init__(self, source: str, problems: list[str]):
        self.source = source
        self.problems = problems
        super().__init__(f"{source}: " + "; ".join(problems))


@dataclass
class ScenarioFile:
    config: NetworkConfig
    name: str = ""
    description: str = ""
    run: dict[str, Any] = field(default_factory=dict)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _number_list(doc, key, problems) -> list[float] | None:
    value = doc[key]
    if not isinstance(value, list):
        problems.append(f"{key}: expected a list of numbers")
        return None
    ok = True
    for i, v in enumerate(value):
        if not _is_number(v):
            problems.append(f"{key}[{i}]: expected a number, got {v!r}")
            ok = False
    return [float(v) for v in value] if ok else None


def _parse_run(run, problems) -> dict[str, Any]:
    if not isinstance(run, dict):
        problems.append("run: expected an object")
        return {}
    out: dict[str, Any] = {}
    for key, value in run.items():
        where = f"run.{key}"
        if key not in RUN_FIELDS:
            problems.append(f"{where}: unknown field")
        elif key == "dynamic":
            if str(value).lower() not in ("smbrd", "ambrd", "simultaneous", "alternating"):
                problems.append(f"{where}: expected smbrd or ambrd, got {value!r}")
            else:
                out[key] = str(value).lower()
        elif key in ("x0", "order"):
            if not isinstance(value, list) or not all(_is_number(v) for v in value):
                problems.append(f"{where}: expected a list of numbers")
            else:
                out[key] = [int(v) for v in value] if key == "order" else [float(v) for v in value]
        elif key == "tol":
            if not _is_number(value) or not value > 0:
                problems.append(f"{where}: expected a positive number, got {value!r}")
            else:
                out[key] = float(value)
        elif key == "seed":
            if not _is_int(value):
                problems.append(f"{where}: expected an integer, got {value!r}")
            else:
                out[key] = value
        else:
            if not _is_int(value) or value < 1:
                problems.append(f"{where}: expected a positive integer, got {value!r}")
            else:
                out[key] = value
    return out


def parse_scenario(text: str, source: str = "<string>") -> ScenarioFile:
    """Parse and validate a scenario document, reporting every problem found."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(source, [f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None
    if not isinstance(doc, dict):
        raise ScenarioFileError(source, ["top level: expected a JSON object"])

    problems: list[str] = []
    for key in doc:
        if key not in TOP_FIELDS:
            problems.append(f"{key}: unknown field")
    for key in CONFIG_FIELDS:
        if key not in doc:
            problems.append(f"{key}: missing required field")
    if problems and any("missing" in p for p in problems):
        raise ScenarioFileError(source, problems)

    K = doc["num_players"]
    if not _is_int(K) or K < 1:
        problems.append(f"num_players: expected a positive integer, got {K!r}")
        raise ScenarioFileError(source, problems)
    for key in ("alpha", "noise_density"):
        if not _is_number(doc[key]):
            problems.append(f"{key}: expected a number, got {doc[key]!r}")
    beta = _number_list(doc, "beta", problems)
    power = _number_list(doc, "power", problems)
    for key, vec in (("beta", beta), ("power", power)):
        if vec is not None and len(vec) != K:
            problems.append(f"{key}: expected {K} entries (one per player), got {len(vec)}")

    gain = doc["gain"]
    if not isinstance(gain, list) or len(gain) != K:
        problems.append(f"gain: expected {K} rows, got "
                        f"{len(gain) if isinstance(gain, list) else type(gain).__name__}")
        gain = None
    else:
        for k, row in enumerate(gain):
            if not isinstance(row, list) or len(row) != K:
                problems.append(f"gain[{k}]: expected a row of {K} numbers")
                gain = None
                continue
            for j, v in enumerate(row):
                if not _is_number(v):
                    problems.append(f"gain[{k}][{j}]: expected a number, got {v!r}")
                    gain = None

    name = doc.get("name", "")
    if not isinstance(name, str):
        problems.append("name: expected a string")
    description = doc.get("description", "")
    run = _parse_run(doc.get("run", {}), problems)
    if "x0" in run and len(run["x0"]) != K:
        problems.append(f"run.x0: expected {K} entries, got {len(run['x0'])}")
    if problems:
        raise ScenarioFileError(source, problems)

    violations = config_violations(float(doc["alpha"]), beta, power, gain,
                                   float(doc["noise_density"]), K)
    if violations:
        raise ScenarioFileError(source, violations)
    config = NetworkConfig(alpha=doc["alpha"], beta=beta, power=power, gain=gain,
                           noise_density=doc["noise_density"])
    return ScenarioFile(config=config, name=name, description=str(description), run=run)


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), str(path))


def scenario_to_dict(sf: ScenarioFile) -> dict[str, Any]:
    c = sf.config
    doc: dict[str, Any] = {}
    if sf.name:
        doc["name"] = sf.name
    if sf.description:
        doc["description"] = sf.description
    doc.update(num_players=c.num_players, alpha=c.alpha, beta=c.beta.tolist(),
               power=c.power.tolist(), gain=c.gain.tolist(), noise_density=c.noise_density)
    if sf.run:
        doc["run"] = dict(sf.run)
    return doc


def dump_scenario(sf: ScenarioFile) -> str:
    """Serialize to JSON; floats use the shortest repr that round-trips exactly."""
    return json.dumps(scenario_to_dict(sf), indent=2) + "\n"


def format_float(value: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")
