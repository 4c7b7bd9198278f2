"""Scenario files: strict JSON loading, canonical saving, round-tripping.

A scenario file is a JSON document with an integer ``version``, a
``globals`` block, an ``athletes`` array, and optional ``graph`` and
``solver`` blocks.  Loading is strict: unknown fields, missing fields, and
out-of-range values are rejected with the offending path in the message.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .contest import SolverSettings
from .model import (
    AthleteRecord,
    DomainError,
    DraftingGraph,
    GlobalParams,
    Scenario,
)

__all__ = ["SCHEMA_VERSION", "ScenarioError", "load_scenario", "parse_scenario",
           "scenario_to_dict", "save_scenario"]

SCHEMA_VERSION = 1

_TOP_KEYS = {"version", "globals", "athletes", "graph", "solver"}
_GLOBAL_KEYS = {"alpha", "beta", "eta", "psi_bounds"}
_ATHLETE_KEYS = {"id", "t_swim", "r_swim", "draft_share", "base_cost",
                 "prize_diff", "weight", "theta"}
_ATHLETE_REQUIRED = {"id", "t_swim", "r_swim", "draft_share", "base_cost",
                     "prize_diff"}
_SOLVER_KEYS = {"abs_tol", "max_iter"}


class ScenarioError(ValueError):
    """A scenario file failed validation; ``path`` points at the offender."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _object(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(path, f"expected an object, got {type(value).__name__}")
    return value


def _no_unknown(block: dict, allowed: set[str], path: str) -> None:
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ScenarioError(f"{path}.{unknown[0]}" if path else unknown[0],
                            "unknown field")


def _number(block: dict, key: str, path: str) -> float:
    if key not in block:
        raise ScenarioError(f"{path}.{key}" if path else key, "missing field")
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}.{key}" if path else key,
                            f"expected a number, got {value!r}")
    return float(value)


def _integer(block: dict, key: str, path: str) -> int:
    if key not in block:
        raise ScenarioError(f"{path}.{key}" if path else key, "missing field")
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}.{key}" if path else key,
                            f"expected an integer, got {value!r}")
    return value


def _string(block: dict, key: str, path: str) -> str:
    if key not in block:
        raise ScenarioError(f"{path}.{key}" if path else key, "missing field")
    value = block[key]
    if not isinstance(value, str):
        raise ScenarioError(f"{path}.{key}" if path else key,
                            f"expected a string, got {value!r}")
    return value


def parse_scenario(data: Any) -> Scenario:
    """Build a validated :class:`Scenario` from decoded JSON data."""
    top = _object(data, "")
    _no_unknown(top, _TOP_KEYS, "")
    version = _integer(top, "version", "")
    if version != SCHEMA_VERSION:
        raise ScenarioError("version", f"unsupported version {version}; this "
                                       f"build reads version {SCHEMA_VERSION}")

    globals_block = _object(top.get("globals"), "globals")
    _no_unknown(globals_block, _GLOBAL_KEYS, "globals")
    bounds = None
    if "psi_bounds" in globals_block:
        raw = globals_block["psi_bounds"]
        if (not isinstance(raw, list) or len(raw) != 2
                or any(isinstance(b, bool) or not isinstance(b, (int, float))
                       for b in raw)):
            raise ScenarioError("globals.psi_bounds",
                                f"expected a [low, high] pair of numbers, got {raw!r}")
        bounds = (float(raw[0]), float(raw[1]))
    try:
        params = GlobalParams(alpha=_number(globals_block, "alpha", "globals"),
                              beta=_number(globals_block, "beta", "globals"),
                              eta=_number(globals_block, "eta", "globals"),
                              psi_bounds=bounds)
    except DomainError as err:
        raise ScenarioError(f"globals.{err.field}", str(err)) from err

    athletes_raw = top.get("athletes")
    if not isinstance(athletes_raw, list):
        raise ScenarioError("athletes", "expected an array of athletes")
    athletes = []
    for i, entry in enumerate(athletes_raw):
        path = f"athletes[{i}]"
        block = _object(entry, path)
        _no_unknown(block, _ATHLETE_KEYS, path)
        missing = sorted(_ATHLETE_REQUIRED - set(block))
        if missing:
            raise ScenarioError(f"{path}.{missing[0]}", "missing field")
        try:
            athletes.append(AthleteRecord(
                id=_string(block, "id", path),
                t_swim=_number(block, "t_swim", path),
                r_swim=_integer(block, "r_swim", path),
                draft_share=_number(block, "draft_share", path),
                base_cost=_number(block, "base_cost", path),
                prize_diff=_number(block, "prize_diff", path),
                weight=_number(block, "weight", path) if "weight" in block else 1.0,
                theta=_number(block, "theta", path) if "theta" in block else 0.0,
            ))
        except DomainError as err:
            raise ScenarioError(f"{path}.{err.field}", str(err)) from err

    graph = DraftingGraph()
    if "graph" in top:
        raw_graph = top["graph"]
        if not isinstance(raw_graph, list):
            raise ScenarioError("graph", "expected an array of [from, to] pairs")
        pairs = []
        for i, edge in enumerate(raw_graph):
            if (not isinstance(edge, list) or len(edge) != 2
                    or not all(isinstance(e, str) for e in edge)):
                raise ScenarioError(f"graph[{i}]",
                                    f"expected a [from, to] pair of ids, got {edge!r}")
            pairs.append((edge[0], edge[1]))
        try:
            graph = DraftingGraph.from_pairs(pairs)
        except DomainError as err:
            raise ScenarioError("graph", str(err)) from err

    settings = None
    if "solver" in top:
        solver_block = _object(top["solver"], "solver")
        _no_unknown(solver_block, _SOLVER_KEYS, "solver")
        kwargs = {}
        if "abs_tol" in solver_block:
            kwargs["abs_tol"] = _number(solver_block, "abs_tol", "solver")
        if "max_iter" in solver_block:
            kwargs["max_iter"] = _integer(solver_block, "max_iter", "solver")
        try:
            settings = SolverSettings(**kwargs)
        except DomainError as err:
            raise ScenarioError(f"solver.{err.field}", str(err)) from err

    try:
        return Scenario(athletes=tuple(athletes), globals=params, graph=graph,
                        settings=settings)
    except DomainError as err:
        raise ScenarioError(err.field, str(err)) from err


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ScenarioError(str(path), f"cannot read scenario file: {err}") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioError(str(path), f"invalid JSON: {err}") from err
    return parse_scenario(data)


def scenario_to_dict(scenario: Scenario) -> dict:
    """Canonical JSON-ready form of a scenario; inverse of :func:`parse_scenario`."""
    data: dict[str, Any] = {
        "version": SCHEMA_VERSION,
        "globals": {
            "alpha": scenario.globals.alpha,
            "beta": scenario.globals.beta,
            "eta": scenario.globals.eta,
            "psi_bounds": list(scenario.globals.psi_bounds),
        },
        "athletes": [
            {
                "id": rec.id,
                "t_swim": rec.t_swim,
                "r_swim": rec.r_swim,
                "draft_share": rec.draft_share,
                "base_cost": rec.base_cost,
                "prize_diff": rec.prize_diff,
                "weight": rec.weight,
                "theta": rec.theta,
            }
            for rec in scenario.athletes
        ],
    }
    if scenario.graph.edges:
        data["graph"] = [list(edge) for edge in sorted(scenario.graph.edges)]
    if scenario.settings is not None:
        data["solver"] = {"abs_tol": scenario.settings.abs_tol,
                          "max_iter": scenario.settings.max_iter}
    return data


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    """Write a scenario file that :func:`load_scenario` reads back equal."""
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")
