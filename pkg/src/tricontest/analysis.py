"""Comparative statics, welfare accounting, grid sweeps, and prediction checks.

Derivatives of the solved contest come from the implicit function theorem
applied to the aggregate equation, cross-checked against central finite
differences.  Sweeps re-solve scenarios along a parameter grid, optionally
with the continuation stage in the loop, and the prediction report bundles
the canonical monotonicity checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .contest import (
    DEFAULT_SETTINGS,
    ContestInstance,
    SolverSettings,
    solve_contest,
    solve_total_effort,
)
from .entry import CONTINUE, Members, assemble_spe, subset_equilibrium
from .model import DomainError, GlobalParams, Scenario

__all__ = [
    "PARAM_KINDS",
    "REL_ERR_PASS",
    "SensitivityReport",
    "WelfareReport",
    "SweepRecord",
    "PredictionSection",
    "PredictionReport",
    "total_effort_derivative",
    "sensitivity_report",
    "welfare_report",
    "sweep",
    "prediction_report",
]

PARAM_KINDS = ("psi", "delta", "cost")
TARGET_KINDS = ("total", "prob", "effort")

#: Relative disagreement between analytic and finite-difference derivatives
#: below which a sensitivity check counts as passing.
REL_ERR_PASS = 1e-4

# Finite differences re-solve the aggregate root; the residual tolerance is
# tightened to keep solver noise out of the difference quotient.
_FD_ABS_TOL = 1e-14


@dataclass(frozen=True)
class SensitivityReport:
    """Analytic derivative versus central finite difference for one target."""

    target: tuple[str, str | None]
    parameter: tuple[str, str]
    analytic: float
    finite_diff: float
    rel_err: float

    @property
    def passed(self) -> bool:
        return self.rel_err <= REL_ERR_PASS


@dataclass(frozen=True)
class WelfareReport:
    """Aggregate surplus accounting for one solved field."""

    members: Members
    total_welfare: float
    aggregate_cost: float
    aggregate_prize_intake: float
    rent_ratio: float


@dataclass(frozen=True)
class SweepRecord:
    """Solved quantities at one grid point of a parameter sweep."""

    param: str
    value: float
    total_effort: float
    efforts: Mapping[str, float]
    probs: Mapping[str, float]
    continuation_values: Mapping[str, float]
    members: Members | None = None
    actions: Mapping[str, str] | None = None


@dataclass(frozen=True)
class PredictionSection:
    """One monotonicity check inside a prediction report."""

    name: str
    status: str  # "pass" | "fail" | "reported" | "skipped"
    detail: str


@dataclass(frozen=True)
class PredictionReport:
    """Bundle of the canonical comparative-statics checks."""

    sections: tuple[PredictionSection, ...]

    @property
    def passed(self) -> bool:
        return all(section.status != "fail" for section in self.sections)

    def section(self, name: str) -> PredictionSection:
        for section in self.sections:
            if section.name == name:
                return section
        raise KeyError(name)


# ---------------------------------------------------------------------------
# Implicit derivatives
# ---------------------------------------------------------------------------


def _check_param(instance: ContestInstance,
                 param: tuple[str, str]) -> tuple[str, int]:
    kind, aid = param
    if kind not in PARAM_KINDS:
        raise ValueError(f"parameter kind must be one of {PARAM_KINDS}, got {kind!r}")
    return kind, instance.index(aid)


def _gap_param_partial(instance: ContestInstance, x: float, kind: str,
                       idx: int) -> float:
    """Partial of the aggregate equation in one member's parameter."""
    de = float(instance._delta_eff[idx])
    k = float(instance._k[idx])
    den = k * x * x + de
    if kind == "psi":
        return de * k * x * x / (instance.psi[idx] * den * den)
    if kind == "delta":
        w = instance.weight[idx]
        return w * w * k * x * x / (den * den)
    # cost: the effective slope scales one-for-one with the baseline cost
    return -de * x * x * (k / instance.cost[idx]) / (den * den)


def _gap_total_partial(instance: ContestInstance, x: float) -> float:
    de = instance._delta_eff
    k = instance._k
    den = k * (x * x) + de
    return float(-np.sum(2.0 * de * k * x / (den * den)))


def total_effort_derivative(instance: ContestInstance, param: tuple[str, str],
                            settings: SolverSettings | None = None) -> float:
    """Derivative of the equilibrium aggregate effort in one parameter.

    ``param`` is a ``(kind, athlete_id)`` pair with kind ``"psi"``,
    ``"delta"``, or ``"cost"``.  Raising a multiplier or a prize pushes the
    aggregate up; raising a cost pushes it down.
    """
    kind, idx = _check_param(instance, param)
    if instance.m < 2:
        raise ValueError("comparative statics need a contested field (m >= 2)")
    x = solve_total_effort(instance, settings)
    g_x = _gap_total_partial(instance, x)
    g_p = _gap_param_partial(instance, x, kind, idx)
    return -g_p / g_x


def _target_value(instance: ContestInstance, target: tuple[str, str | None],
                  settings: SolverSettings) -> float:
    kind, aid = target
    x = solve_total_effort(instance, settings)
    if kind == "total":
        return x
    idx = instance.index(aid)
    de = float(instance._delta_eff[idx])
    k = float(instance._k[idx])
    p = de / (k * x * x + de)
    if kind == "prob":
        return p
    return p * x / instance.weight[idx]


def sensitivity_report(instance: ContestInstance,
                       target: tuple[str, str | None],
                       param: tuple[str, str], step: float = 1e-5,
                       settings: SolverSettings | None = None) -> SensitivityReport:
    """Analytic derivative of a solved quantity against a central difference.

    ``target`` is ``("total", None)``, ``("prob", id)``, or
    ``("effort", id)``.  The finite difference re-solves the contest at the
    perturbed parameter values, so the step must keep them positive.
    """
    t_kind = target[0]
    if t_kind not in TARGET_KINDS:
        raise ValueError(f"target kind must be one of {TARGET_KINDS}, got {t_kind!r}")
    p_kind, p_idx = _check_param(instance, param)
    if instance.m < 2:
        raise ValueError("comparative statics need a contested field (m >= 2)")
    if not (step > 0.0 and math.isfinite(step)):
        raise ValueError(f"step must be positive, got {step}")
    settings = settings or DEFAULT_SETTINGS

    # Analytic chain rule through the aggregate root.
    x = solve_total_effort(instance, settings)
    g_x = _gap_total_partial(instance, x)
    g_p = _gap_param_partial(instance, x, p_kind, p_idx)
    dx = -g_p / g_x
    if t_kind == "total":
        analytic = dx
    else:
        t_idx = instance.index(target[1])
        de = float(instance._delta_eff[t_idx])
        k = float(instance._k[t_idx])
        den = k * x * x + de
        p = de / den
        dh_dx = -2.0 * k * x * de / (den * den)
        direct = g_p if t_idx == p_idx else 0.0
        dp = direct + dh_dx * dx
        if t_kind == "prob":
            analytic = dp
        else:
            analytic = (dp * x + p * dx) / instance.weight[t_idx]

    # Central difference at a tightened residual tolerance.
    base = getattr(instance, p_kind)[p_idx]
    if base - step <= 0.0:
        raise DomainError("step", f"step {step} drives {p_kind} of athlete "
                                  f"{param[1]!r} out of its positive domain")
    tight = replace(settings, abs_tol=min(settings.abs_tol, _FD_ABS_TOL))
    mutate = getattr(instance, f"with_{p_kind}")
    hi = _target_value(mutate(param[1], base + step), target, tight)
    lo = _target_value(mutate(param[1], base - step), target, tight)
    finite = (hi - lo) / (2.0 * step)
    rel_err = abs(analytic - finite) / max(abs(analytic), 1e-12)
    return SensitivityReport(target=target, parameter=param, analytic=analytic,
                             finite_diff=finite, rel_err=rel_err)


# ---------------------------------------------------------------------------
# Welfare
# ---------------------------------------------------------------------------


def welfare_report(scenario: Scenario, members: Sequence[str],
                   settings: SolverSettings | None = None,
                   cache=None) -> WelfareReport:
    """Surplus accounting for the contest among ``members``.

    ``rent_ratio`` is aggregate effort cost over aggregate expected prize
    intake; for a symmetric field of size ``m`` it equals ``(m-1)/(2m)``.
    """
    equilibrium = subset_equilibrium(scenario, members, settings, cache)
    instance = ContestInstance.from_scenario(scenario, equilibrium.probs.keys())
    cost = 0.0
    intake = 0.0
    welfare = 0.0
    for idx, aid in enumerate(instance.ids):
        k = instance.cost[idx] / instance.psi[idx]
        effort = equilibrium.efforts[aid]
        cost += 0.5 * k * effort * effort
        intake += equilibrium.probs[aid] * instance.delta[idx]
        welfare += equilibrium.continuation_values[aid]
    return WelfareReport(members=tuple(sorted(instance.ids)),
                         total_welfare=welfare, aggregate_cost=cost,
                         aggregate_prize_intake=intake,
                         rent_ratio=cost / intake)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

_ATHLETE_FIELDS = ("t_swim", "r_swim", "draft_share", "base_cost",
                   "prize_diff", "weight", "theta")
_GLOBAL_FIELDS = ("alpha", "beta", "eta")


def _point_scenario(scenario: Scenario, param: str, value: float,
                    point: int) -> Scenario:
    """Scenario with one swept field replaced; errors name the grid point."""
    def fail(reason: str) -> DomainError:
        return DomainError("grid", f"grid point {point} ({value!r}) for "
                                   f"parameter {param!r}: {reason}")

    parts = param.split(".")
    try:
        if parts[0] == "m" and len(parts) == 1:
            size = round(value)
            if abs(value - size) > 1e-9:
                raise fail("field size must be an integer")
            if size < 2:
                raise fail("field size must be at least 2")
            template = scenario.athletes[0]
            clones = tuple(replace(template, id=f"{template.id}{i}")
                           for i in range(1, size + 1))
            return Scenario(athletes=clones, globals=scenario.globals,
                            settings=scenario.settings)
        if parts[0] == "globals" and len(parts) == 2:
            field = parts[1]
            if field not in _GLOBAL_FIELDS:
                raise ValueError(f"unknown sweep parameter {param!r}; global "
                                 f"fields are {_GLOBAL_FIELDS}")
            new_globals = GlobalParams(**{
                "alpha": scenario.globals.alpha,
                "beta": scenario.globals.beta,
                "eta": scenario.globals.eta,
                "psi_bounds": None if field == "eta" else scenario.globals.psi_bounds,
                field: float(value),
            })
            return replace(scenario, globals=new_globals)
        if parts[0] == "athletes" and len(parts) == 3:
            aid, field = parts[1], parts[2]
            if field not in _ATHLETE_FIELDS:
                raise ValueError(f"unknown sweep parameter {param!r}; athlete "
                                 f"fields are {_ATHLETE_FIELDS}")
            record = scenario.record(aid)
            if field == "r_swim":
                rank = round(value)
                if abs(value - rank) > 1e-9:
                    raise fail("r_swim must be an integer")
                new_record = replace(record, r_swim=int(rank))
            else:
                new_record = replace(record, **{field: float(value)})
            athletes = tuple(new_record if rec.id == aid else rec
                             for rec in scenario.athletes)
            return replace(scenario, athletes=athletes)
    except DomainError as err:
        if err.field == "grid":
            raise
        raise fail(str(err)) from err
    raise ValueError(f"unknown sweep parameter {param!r}; expected "
                     f"'athletes.<id>.<field>', 'globals.<field>', or 'm'")


def sweep(scenario: Scenario, param: str, grid: Sequence[float],
          stage: str = "contest",
          settings: SolverSettings | None = None) -> list[SweepRecord]:
    """Re-solve the scenario along a strictly increasing parameter grid.

    ``param`` addresses either one athlete's field
    (``"athletes.<id>.<field>"``), a global field (``"globals.<field>"``),
    or the symmetric field size ``"m"``, which replicates the first athlete.
    With ``stage="contest"`` everybody plays; with ``stage="full"`` the
    continuation stage picks the field at every grid point.
    """
    if stage not in ("contest", "full"):
        raise ValueError(f"stage must be 'contest' or 'full', got {stage!r}")
    values = [float(v) for v in grid]
    if not values:
        raise ValueError("the sweep grid must not be empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("the sweep grid must be strictly increasing")
    records: list[SweepRecord] = []
    for point, value in enumerate(values):
        local = _point_scenario(scenario, param, value, point)
        if stage == "contest":
            equilibrium = subset_equilibrium(local, local.ids, settings)
            members = None
            actions = None
        else:
            result = assemble_spe(local, mode="iterative", settings=settings)[0]
            equilibrium = result.equilibrium
            members = result.members
            actions = result.actions
        records.append(SweepRecord(
            param=param, value=value, total_effort=equilibrium.total_effort,
            efforts=dict(equilibrium.efforts), probs=dict(equilibrium.probs),
            continuation_values=dict(equilibrium.continuation_values),
            members=members, actions=actions))
    return records


# ---------------------------------------------------------------------------
# Prediction report
# ---------------------------------------------------------------------------


def _strictly(values: Sequence[float], increasing: bool) -> bool:
    pairs = zip(values, values[1:])
    if increasing:
        return all(b > a for a, b in pairs)
    return all(b < a for a, b in pairs)


def _series(values: Sequence[float]) -> str:
    return ", ".join(f"{v:.6g}" for v in values)


def prediction_report(scenario: Scenario, athlete_id: str | None = None,
                      draft_grid: Sequence[float] | None = None,
                      size_grid: Sequence[int] | None = None,
                      psi_by_size: Mapping[int, float] | None = None,
                      settings: SolverSettings | None = None) -> PredictionReport:
    """Run the canonical sweeps and report the observed monotonicities.

    Three sections always appear: win odds and effort rising in the own
    drafting share (asserted), symmetric effort falling in the field size
    (asserted), and the continuation action across a drafting sweep
    (reported, flagged when the field never reaches two members).  A
    ``psi_by_size`` table adds a descriptive section tracing symmetric
    effort when the multiplier grows with the field.
    """
    if athlete_id is None:
        athlete_id = scenario.athletes[0].id
    else:
        scenario.record(athlete_id)
    if draft_grid is None:
        draft_grid = [0.0, 0.25, 0.5, 0.75]
    if size_grid is None:
        size_grid = list(range(2, 11))
    sections: list[PredictionSection] = []

    # Drafting share up: own odds and effort up.
    param = f"athletes.{athlete_id}.draft_share"
    records = sweep(scenario, param, draft_grid, stage="contest",
                    settings=settings)
    probs = [r.probs[athlete_id] for r in records]
    efforts = [r.efforts[athlete_id] for r in records]
    ok = _strictly(probs, True) and _strictly(efforts, True)
    sections.append(PredictionSection(
        name="drafting_gain", status="pass" if ok else "fail",
        detail=f"p({athlete_id}): {_series(probs)}; "
               f"e({athlete_id}): {_series(efforts)}"))

    # Field size up: symmetric effort down.
    size_values = [float(m) for m in size_grid]
    records = sweep(scenario, "m", size_values, stage="contest",
                    settings=settings)
    per_head = [next(iter(r.efforts.values())) for r in records]
    ok = _strictly(per_head, False)
    sections.append(PredictionSection(
        name="field_size", status="pass" if ok else "fail",
        detail=f"e*: {_series(per_head)}"))

    # Drafting share up with the continuation stage in the loop.
    records = sweep(scenario, param, draft_grid, stage="full",
                    settings=settings)
    if all(len(r.members or ()) < 2 for r in records):
        sections.append(PredictionSection(
            name="entry_response", status="skipped",
            detail="insufficient contest size: the continuation field never "
                   "reaches two members"))
    else:
        acts = [r.actions[athlete_id] for r in records]
        flags = "".join("C" if a == CONTINUE else "W" for a in acts)
        monotone = "W" not in flags.lstrip("W")
        flips = sum(1 for a, b in zip(flags, flags[1:]) if a != b)
        sections.append(PredictionSection(
            name="entry_response", status="pass" if monotone else "fail",
            detail=f"actions: {flags} ({flips} flips)"))

    # Optional: multiplier growing with the field size.
    if psi_by_size is not None:
        template = scenario.athletes[0]
        trail: list[tuple[int, float]] = []
        for m in size_grid:
            if m not in psi_by_size:
                continue
            instance = ContestInstance(
                ids=tuple(f"{template.id}{i}" for i in range(1, m + 1)),
                delta=(template.prize_diff,) * m,
                cost=(template.base_cost,) * m,
                psi=(float(psi_by_size[m]),) * m,
                weight=(1.0,) * m)
            solved = solve_contest(instance, settings)
            trail.append((m, next(iter(solved.efforts.values()))))
        efforts = [e for _, e in trail]
        shape = ("strictly decreasing" if _strictly(efforts, False)
                 else "strictly increasing" if _strictly(efforts, True)
                 else "non-monotone")
        sections.append(PredictionSection(
            name="size_tradeoff", status="reported",
            detail=f"e* with size-dependent multiplier is {shape}: "
                   f"{_series(efforts)}"))
    return PredictionReport(sections=tuple(sections))
