"""Equilibria of a two-stage race contest with drafting-discounted costs.

The package solves the effort lottery among athletes who stayed in
contention, evaluates each athlete's stay-or-leave decision against their
outside option, and layers comparative statics, welfare accounting, and a
deterministic CLI on top.
"""

from .analysis import (
    PredictionReport,
    PredictionSection,
    SensitivityReport,
    SweepRecord,
    WelfareReport,
    prediction_report,
    sensitivity_report,
    sweep,
    total_effort_derivative,
    welfare_report,
)
from .contest import (
    ContestEquilibrium,
    ContestInstance,
    ConvergenceError,
    CurvatureReport,
    NashCheck,
    SolverSettings,
    SymmetricEquilibrium,
    aggregate_equation,
    payoff_curvature,
    solve_contest,
    solve_total_effort,
    symmetric_equilibrium,
    two_player_equilibrium,
    verify_nash,
)
from .entry import (
    CutoffResult,
    EntryIteration,
    EntryIterationError,
    NetBenefit,
    SpeResult,
    assemble_spe,
    continuation_value,
    cutoff_psi,
    enumerate_equilibrium_sets,
    is_equilibrium_set,
    iterate_continuation_operator,
    net_benefit,
    net_benefit_curve,
    subset_equilibrium,
)
from .model import (
    AthleteRecord,
    DegenerateProfileError,
    DomainError,
    DraftingGraph,
    EffortProfile,
    GlobalParams,
    Scenario,
    contest_payoff,
    drafting_multiplier,
    effective_cost,
    outside_option,
    reduced_drag_map,
    win_probabilities,
)
from .scenario_io import (
    SCHEMA_VERSION,
    ScenarioError,
    load_scenario,
    parse_scenario,
    save_scenario,
    scenario_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "AthleteRecord",
    "ContestEquilibrium",
    "ContestInstance",
    "ConvergenceError",
    "CurvatureReport",
    "CutoffResult",
    "DegenerateProfileError",
    "DomainError",
    "DraftingGraph",
    "EffortProfile",
    "EntryIteration",
    "EntryIterationError",
    "GlobalParams",
    "NashCheck",
    "NetBenefit",
    "PredictionReport",
    "PredictionSection",
    "SCHEMA_VERSION",
    "Scenario",
    "ScenarioError",
    "SensitivityReport",
    "SolverSettings",
    "SpeResult",
    "SweepRecord",
    "SymmetricEquilibrium",
    "WelfareReport",
    "aggregate_equation",
    "assemble_spe",
    "contest_payoff",
    "continuation_value",
    "cutoff_psi",
    "drafting_multiplier",
    "effective_cost",
    "enumerate_equilibrium_sets",
    "is_equilibrium_set",
    "iterate_continuation_operator",
    "load_scenario",
    "net_benefit",
    "net_benefit_curve",
    "outside_option",
    "parse_scenario",
    "payoff_curvature",
    "prediction_report",
    "reduced_drag_map",
    "save_scenario",
    "scenario_to_dict",
    "sensitivity_report",
    "solve_contest",
    "solve_total_effort",
    "subset_equilibrium",
    "sweep",
    "symmetric_equilibrium",
    "total_effort_derivative",
    "two_player_equilibrium",
    "verify_nash",
    "welfare_report",
]
