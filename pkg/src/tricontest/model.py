"""Core types and primitive maps for the drafting-contest model.

The model covers a race decided in two phases.  During the swim leg each
athlete accumulates a drafting share ``D`` in ``[0, 1]`` that discounts the
effort cost of the remaining legs through the multiplier
``psi = 1 / (1 - eta * D)``.  Athletes who stay in contention then compete
for a prize differential in a lottery whose win odds are proportional to
weighted effort; leaving instead pays a fixed outside option built from the
swim time, the swim rank, and a taste shifter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterable, Mapping

if TYPE_CHECKING:  # pragma: no cover - only used for annotations
    from .contest import SolverSettings

__all__ = [
    "DomainError",
    "DegenerateProfileError",
    "AthleteRecord",
    "GlobalParams",
    "DraftingGraph",
    "Scenario",
    "EffortProfile",
    "MultiplierMap",
    "drafting_multiplier",
    "effective_cost",
    "reduced_drag_map",
    "outside_option",
    "win_probabilities",
    "contest_payoff",
]


class DomainError(ValueError):
    """An input lies outside its documented domain.

    ``field`` names the offending parameter so callers (for example the
    scenario loader) can attach a precise path to the message.
    """

    def __init__(self, field: str, message: str) -> None:
        super().__init__(message)
        self.field = field


class DegenerateProfileError(ValueError):
    """Win odds were requested at the all-zero effort profile."""


def _require(condition: bool, field: str, message: str) -> None:
    if not condition:
        raise DomainError(field, message)


def _finite(value: float, field: str, label: str) -> float:
    value = float(value)
    _require(math.isfinite(value), field, f"{label} must be finite, got {value}")
    return value


# ---------------------------------------------------------------------------
# Primitive maps
# ---------------------------------------------------------------------------


def drafting_multiplier(draft_share: float, eta: float) -> float:
    """Cost-reduction multiplier earned by drafting: ``1 / (1 - eta * draft_share)``."""
    draft_share = _finite(draft_share, "draft_share", "draft_share")
    eta = _finite(eta, "eta", "eta")
    _require(0.0 <= draft_share <= 1.0, "draft_share",
             f"draft_share must lie in [0, 1], got {draft_share}")
    _require(0.0 < eta < 1.0, "eta", f"eta must lie in (0,1), got {eta}")
    return 1.0 / (1.0 - eta * draft_share)


def effective_cost(base_cost: float, draft_share: float, eta: float) -> float:
    """Quadratic-cost slope after the drafting discount: ``base_cost * (1 - eta * draft_share)``.

    Equals ``base_cost / drafting_multiplier(draft_share, eta)``.
    """
    base_cost = _finite(base_cost, "base_cost", "base_cost")
    draft_share = _finite(draft_share, "draft_share", "draft_share")
    eta = _finite(eta, "eta", "eta")
    _require(base_cost > 0.0, "base_cost", f"base_cost must be positive, got {base_cost}")
    _require(0.0 <= draft_share <= 1.0, "draft_share",
             f"draft_share must lie in [0, 1], got {draft_share}")
    _require(0.0 < eta < 1.0, "eta", f"eta must lie in (0,1), got {eta}")
    return base_cost * (1.0 - eta * draft_share)


#: Extension hook for richer drag models.  A multiplier map receives the
#: drafting share, the continuation field size, the athlete's swim rank, and
#: the drafting graph, and returns the cost multiplier.  Only the reduced
#: drag form ships; it ignores everything except the share.
MultiplierMap = Callable[[float, int, int, "DraftingGraph"], float]


def reduced_drag_map(eta: float) -> MultiplierMap:
    """Return the shipped multiplier map.

    The returned callable has the full hook signature but depends only on
    the drafting share; field size, swim rank, and the graph are carried for
    forward compatibility and ignored.
    """
    _require(0.0 < float(eta) < 1.0, "eta", f"eta must lie in (0,1), got {eta}")

    def psi(draft_share: float, field_size: int, swim_rank: int,
            graph: "DraftingGraph") -> float:
        return drafting_multiplier(draft_share, eta)

    return psi


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AthleteRecord:
    """Post-swim state and economic parameters for one athlete."""

    id: str
    t_swim: float
    r_swim: int
    draft_share: float
    base_cost: float
    prize_diff: float
    weight: float = 1.0
    theta: float = 0.0

    def __post_init__(self) -> None:
        _require(isinstance(self.id, str) and len(self.id) > 0, "id",
                 "athlete id must be a nonempty string")
        _finite(self.t_swim, "t_swim", "t_swim")
        _require(self.t_swim >= 0.0, "t_swim",
                 f"t_swim must be nonnegative, got {self.t_swim} (athlete {self.id!r})")
        _require(isinstance(self.r_swim, int) and not isinstance(self.r_swim, bool),
                 "r_swim", f"r_swim must be an integer, got {self.r_swim!r} (athlete {self.id!r})")
        _require(self.r_swim >= 1, "r_swim",
                 f"r_swim must be a positive rank, got {self.r_swim} (athlete {self.id!r})")
        _finite(self.draft_share, "draft_share", "draft_share")
        _require(0.0 <= self.draft_share <= 1.0, "draft_share",
                 f"draft_share must lie in [0, 1], got {self.draft_share} (athlete {self.id!r})")
        for name, value in (("base_cost", self.base_cost),
                            ("prize_diff", self.prize_diff),
                            ("weight", self.weight)):
            _finite(value, name, name)
            _require(value > 0.0, name,
                     f"{name} must be positive, got {value} (athlete {self.id!r})")
        _finite(self.theta, "theta", "theta")


@dataclass(frozen=True)
class GlobalParams:
    """Race-wide penalty and drag parameters.

    ``psi_bounds`` is the closed interval searched by cutoff routines; it
    must contain the reduced-drag range ``[1, 1/(1 - eta)]``.  When omitted
    it defaults to exactly that range.
    """

    alpha: float
    beta: float
    eta: float
    psi_bounds: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        for name, value in (("alpha", self.alpha), ("beta", self.beta)):
            _finite(value, name, name)
            _require(value > 0.0, name, f"{name} must be positive, got {value}")
        _finite(self.eta, "eta", "eta")
        _require(0.0 < self.eta < 1.0, "eta", f"eta must lie in (0,1), got {self.eta}")
        top = 1.0 / (1.0 - self.eta)
        if self.psi_bounds is None:
            object.__setattr__(self, "psi_bounds", (1.0, top))
            return
        bounds = tuple(float(b) for b in self.psi_bounds)
        _require(len(bounds) == 2, "psi_bounds",
                 f"psi_bounds must be a (low, high) pair, got {self.psi_bounds!r}")
        lo, hi = bounds
        _finite(lo, "psi_bounds", "psi_bounds low")
        _finite(hi, "psi_bounds", "psi_bounds high")
        _require(0.0 < lo <= hi, "psi_bounds",
                 f"psi_bounds must satisfy 0 < low <= high, got {bounds}")
        _require(lo <= 1.0 and hi >= top, "psi_bounds",
                 f"psi_bounds {bounds} must contain the reduced-drag range [1, {top}]")
        object.__setattr__(self, "psi_bounds", bounds)


@dataclass(frozen=True)
class DraftingGraph:
    """Directed who-drafted-whom edges.  Carried with scenarios, not consumed."""

    edges: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self) -> None:
        edges = frozenset((str(a), str(b)) for a, b in self.edges)
        for a, b in edges:
            _require(a != b, "edges", f"drafting edge ({a!r}, {b!r}) is a self-loop")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "DraftingGraph":
        return cls(frozenset(tuple(p) for p in pairs))


@dataclass(frozen=True)
class Scenario:
    """Full description of one race: athletes, global parameters, graph, settings."""

    athletes: tuple[AthleteRecord, ...]
    globals: GlobalParams
    graph: DraftingGraph = DraftingGraph()
    settings: "SolverSettings | None" = None

    def __post_init__(self) -> None:
        athletes = tuple(self.athletes)
        object.__setattr__(self, "athletes", athletes)
        _require(len(athletes) >= 2, "athletes",
                 f"a scenario needs at least 2 athletes, got {len(athletes)}")
        seen: set[str] = set()
        for record in athletes:
            _require(record.id not in seen, "athletes",
                     f"duplicate athlete id {record.id!r}")
            seen.add(record.id)
        for a, b in self.graph.edges:
            _require(a in seen and b in seen, "graph",
                     f"drafting edge ({a!r}, {b!r}) references an unknown athlete")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(record.id for record in self.athletes)

    def record(self, athlete_id: str) -> AthleteRecord:
        for record in self.athletes:
            if record.id == athlete_id:
                return record
        raise ValueError(f"unknown athlete id {athlete_id!r}")


@dataclass(frozen=True)
class EffortProfile:
    """A nonnegative effort level per athlete id."""

    efforts: Mapping[str, float]

    def __post_init__(self) -> None:
        frozen: dict[str, float] = {}
        for aid, effort in self.efforts.items():
            effort = _finite(effort, "efforts", f"effort of athlete {aid!r}")
            _require(effort >= 0.0, "efforts",
                     f"efforts must be nonnegative, got {effort} (athlete {aid!r})")
            frozen[str(aid)] = effort
        object.__setattr__(self, "efforts", frozen)

    def __getitem__(self, athlete_id: str) -> float:
        return self.efforts[athlete_id]


# ---------------------------------------------------------------------------
# Payoff primitives
# ---------------------------------------------------------------------------


def outside_option(athlete: AthleteRecord, params: GlobalParams) -> float:
    """Value of leaving after the swim: ``-alpha*t_swim - beta*r_swim + theta``."""
    return -params.alpha * athlete.t_swim - params.beta * athlete.r_swim + athlete.theta


def win_probabilities(profile: EffortProfile,
                      weights: Mapping[str, float]) -> dict[str, float]:
    """Weighted-lottery win odds for every athlete in the profile.

    Odds are proportional to ``weight * effort`` and sum to one.  The
    all-zero profile has no well-defined odds and raises
    :class:`DegenerateProfileError`.
    """
    total = 0.0
    for aid, effort in profile.efforts.items():
        weight = weights.get(aid)
        if weight is None:
            raise DomainError("weight", f"missing contest weight for athlete {aid!r}")
        _require(weight > 0.0, "weight",
                 f"weight must be positive, got {weight} (athlete {aid!r})")
        total += weight * effort
    if total <= 0.0:
        raise DegenerateProfileError(
            "win odds are undefined when every effort is zero")
    return {aid: weights[aid] * effort / total
            for aid, effort in profile.efforts.items()}


def contest_payoff(athlete_id: str, profile: EffortProfile, prize: float,
                   cost_slope: float, weights: Mapping[str, float]) -> float:
    """Expected prize minus quadratic effort cost for one athlete.

    ``prize`` is the athlete's prize differential and ``cost_slope`` the
    effective quadratic cost coefficient.
    """
    _require(prize > 0.0, "prize", f"prize must be positive, got {prize}")
    _require(cost_slope > 0.0, "cost_slope",
             f"cost_slope must be positive, got {cost_slope}")
    probs = win_probabilities(profile, weights)
    if athlete_id not in probs:
        raise ValueError(f"athlete {athlete_id!r} is not in the effort profile")
    effort = profile.efforts[athlete_id]
    return probs[athlete_id] * prize - 0.5 * cost_slope * effort * effort
