"""Equilibrium of the weighted effort lottery for a fixed field of starters.

Solving reduces to one scalar equation: at aggregate weighted effort ``X``
each athlete's implied win probability is ``de_i / (k_i X^2 + de_i)`` with
``de_i = prize_i * weight_i^2``, and the probabilities sum to one exactly at
the equilibrium aggregate.  The excess mass is strictly decreasing in ``X``
and equals ``m - 1`` at zero, so a sign-change bracket plus bisection pins
the unique root, after which odds, efforts, and payoffs follow in closed
form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Iterable, Mapping

import numpy as np

from .model import (
    DegenerateProfileError,
    DomainError,
    EffortProfile,
    Scenario,
    drafting_multiplier,
)

__all__ = [
    "SolverSettings",
    "ConvergenceError",
    "ContestInstance",
    "ContestEquilibrium",
    "SymmetricEquilibrium",
    "NashCheck",
    "CurvatureReport",
    "aggregate_equation",
    "solve_total_effort",
    "solve_contest",
    "two_player_equilibrium",
    "symmetric_equilibrium",
    "verify_nash",
    "payoff_curvature",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances and budgets for the aggregate root search."""

    abs_tol: float = 1e-12
    max_iter: int = 200
    bracket_growth: float = 4.0

    def __post_init__(self) -> None:
        if not (isinstance(self.max_iter, int) and not isinstance(self.max_iter, bool)):
            raise DomainError("max_iter", f"max_iter must be an integer, got {self.max_iter!r}")
        if self.max_iter < 1:
            raise DomainError("max_iter", f"max_iter must be at least 1, got {self.max_iter}")
        if not (self.abs_tol > 0.0 and math.isfinite(self.abs_tol)):
            raise DomainError("abs_tol", f"abs_tol must be positive, got {self.abs_tol}")
        if not (self.bracket_growth > 1.0 and math.isfinite(self.bracket_growth)):
            raise DomainError("bracket_growth",
                              f"bracket_growth must exceed 1, got {self.bracket_growth}")


DEFAULT_SETTINGS = SolverSettings()


class ConvergenceError(RuntimeError):
    """The root search exhausted its iteration budget.

    Carries the best bracket seen so callers can inspect or retry with a
    larger budget.
    """

    def __init__(self, message: str, bracket: tuple[float, float],
                 residual: float) -> None:
        super().__init__(f"{message} (bracket [{bracket[0]}, {bracket[1]}], "
                         f"residual {residual})")
        self.bracket = bracket
        self.residual = residual


@dataclass(frozen=True)
class ContestInstance:
    """Parameters of one effort lottery over an ordered field of athletes.

    ``delta`` holds prize differentials, ``cost`` the baseline quadratic
    cost slopes, ``psi`` the drafting multipliers, and ``weight`` the
    lottery weights.  The effective cost slope is ``cost / psi`` and the
    effective prize is ``delta * weight^2``.
    """

    ids: tuple[str, ...]
    delta: tuple[float, ...]
    cost: tuple[float, ...]
    psi: tuple[float, ...]
    weight: tuple[float, ...]

    def __post_init__(self) -> None:
        ids = tuple(str(aid) for aid in self.ids)
        object.__setattr__(self, "ids", ids)
        if len(ids) < 1:
            raise DomainError("ids", "a contest instance needs at least one member")
        if len(set(ids)) != len(ids):
            raise DomainError("ids", "contest member ids must be unique")
        for name in ("delta", "cost", "psi", "weight"):
            raw = getattr(self, name)
            values = tuple(float(v) for v in raw)
            if len(values) != len(ids):
                raise DomainError(name, f"{name} needs one entry per member "
                                        f"({len(ids)}), got {len(values)}")
            for aid, value in zip(ids, values):
                if not (math.isfinite(value) and value > 0.0):
                    raise DomainError(name, f"{name} must be positive and finite, "
                                            f"got {value} (athlete {aid!r})")
            object.__setattr__(self, name, values)

    @property
    def m(self) -> int:
        return len(self.ids)

    def index(self, athlete_id: str) -> int:
        try:
            return self.ids.index(athlete_id)
        except ValueError:
            raise ValueError(f"athlete {athlete_id!r} is not a contest member") from None

    @cached_property
    def _delta(self) -> np.ndarray:
        return np.asarray(self.delta, dtype=float)

    @cached_property
    def _w(self) -> np.ndarray:
        return np.asarray(self.weight, dtype=float)

    @cached_property
    def _k(self) -> np.ndarray:
        return np.asarray(self.cost, dtype=float) / np.asarray(self.psi, dtype=float)

    @cached_property
    def _delta_eff(self) -> np.ndarray:
        return self._delta * self._w * self._w

    def _with_field(self, name: str, athlete_id: str, value: float) -> "ContestInstance":
        idx = self.index(athlete_id)
        values = list(getattr(self, name))
        values[idx] = float(value)
        return replace(self, **{name: tuple(values)})

    def with_psi(self, athlete_id: str, value: float) -> "ContestInstance":
        return self._with_field("psi", athlete_id, value)

    def with_delta(self, athlete_id: str, value: float) -> "ContestInstance":
        return self._with_field("delta", athlete_id, value)

    def with_cost(self, athlete_id: str, value: float) -> "ContestInstance":
        return self._with_field("cost", athlete_id, value)

    @classmethod
    def from_scenario(cls, scenario: Scenario,
                      members: Iterable[str] | None = None) -> "ContestInstance":
        """Build the contest among ``members`` (defaults to the full field).

        Members keep the scenario's athlete order regardless of the order
        they are passed in.
        """
        if members is None:
            wanted = set(scenario.ids)
        else:
            wanted = set()
            known = set(scenario.ids)
            for aid in members:
                if aid not in known:
                    raise ValueError(f"unknown athlete id {aid!r}")
                if aid in wanted:
                    raise ValueError(f"duplicate member id {aid!r}")
                wanted.add(aid)
            if not wanted:
                raise ValueError("the member set must not be empty")
        eta = scenario.globals.eta
        chosen = [rec for rec in scenario.athletes if rec.id in wanted]
        return cls(
            ids=tuple(rec.id for rec in chosen),
            delta=tuple(rec.prize_diff for rec in chosen),
            cost=tuple(rec.base_cost for rec in chosen),
            psi=tuple(drafting_multiplier(rec.draft_share, eta) for rec in chosen),
            weight=tuple(rec.weight for rec in chosen),
        )


@dataclass(frozen=True)
class ContestEquilibrium:
    """Solved lottery: aggregate weighted effort plus per-athlete quantities.

    ``total_effort`` is the weighted aggregate (equal to the plain sum of
    efforts when every weight is one); ``residual`` is the absolute excess
    probability mass left at the returned root.
    """

    total_effort: float
    efforts: Mapping[str, float]
    probs: Mapping[str, float]
    continuation_values: Mapping[str, float]
    residual: float


@dataclass(frozen=True)
class SymmetricEquilibrium:
    """Closed-form solution of the symmetric contest."""

    effort: float
    total_effort: float
    prob: float


@dataclass(frozen=True)
class NashCheck:
    """Outcome of the best-response verification oracle."""

    max_gain: float
    worst: str | None
    passed: bool


@dataclass(frozen=True)
class CurvatureReport:
    """Exact second-order terms of one athlete's payoff at a profile."""

    second: float
    cross: Mapping[str, float]


# ---------------------------------------------------------------------------
# Aggregate equation and root search
# ---------------------------------------------------------------------------


def aggregate_equation(total: float, instance: ContestInstance) -> float:
    """Excess win-probability mass implied by aggregate effort ``total``.

    Strictly decreasing in ``total`` and equal to ``m - 1`` at zero; its
    unique nonnegative root is the equilibrium aggregate.
    """
    total = float(total)
    if not (math.isfinite(total) and total >= 0.0):
        raise DomainError("total", f"total effort must be nonnegative, got {total}")
    de = instance._delta_eff
    k = instance._k
    return float(np.sum(de / (k * (total * total) + de)) - 1.0)


def solve_total_effort(instance: ContestInstance,
                       settings: SolverSettings | None = None) -> float:
    """Root of the aggregate equation by bracket growth plus bisection.

    The bracket starts at ``[0, 1]`` and the upper end grows geometrically
    until the excess mass turns negative; bisection then runs until the
    absolute residual drops below ``settings.abs_tol``.  Raises
    :class:`ConvergenceError` when the iteration budget runs out.
    """
    settings = settings or DEFAULT_SETTINGS
    if instance.m < 2:
        raise ValueError("the aggregate root search needs at least two members; "
                         "singleton fields are handled by solve_contest")
    de = instance._delta_eff
    k = instance._k

    def gap(x: float) -> float:
        return float(np.sum(de / (k * (x * x) + de)) - 1.0)

    budget = settings.max_iter
    lo, hi = 0.0, 1.0
    ghi = gap(hi)
    while ghi > 0.0:
        if ghi <= settings.abs_tol:
            return hi
        budget -= 1
        if budget <= 0:
            raise ConvergenceError("failed to bracket the aggregate root",
                                   (lo, hi), ghi)
        lo, hi = hi, hi * settings.bracket_growth
        ghi = gap(hi)
    if abs(ghi) <= settings.abs_tol:
        return hi
    # gap(lo) > 0 > gap(hi)
    for _ in range(budget):
        mid = 0.5 * (lo + hi)
        gm = gap(mid)
        if abs(gm) <= settings.abs_tol:
            return mid
        if mid <= lo or mid >= hi:
            raise ConvergenceError("bisection stalled at floating point resolution",
                                   (lo, hi), gm)
        if gm > 0.0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError("bisection exhausted its iteration budget",
                           (lo, hi), gap(0.5 * (lo + hi)))


def solve_contest(instance: ContestInstance,
                  settings: SolverSettings | None = None) -> ContestEquilibrium:
    """Equilibrium odds, efforts, and expected payoffs for the field.

    A singleton field wins outright at zero effort by convention.  For two
    or more members the aggregate root is solved first; each athlete's win
    probability, effort, and continuation value then follow directly.
    """
    if instance.m == 1:
        aid = instance.ids[0]
        return ContestEquilibrium(
            total_effort=0.0,
            efforts={aid: 0.0},
            probs={aid: 1.0},
            continuation_values={aid: instance.delta[0]},
            residual=0.0,
        )
    x = solve_total_effort(instance, settings)
    de = instance._delta_eff
    k = instance._k
    w = instance._w
    probs = de / (k * (x * x) + de)
    efforts = probs * x / w
    values = probs * instance._delta - 0.5 * k * efforts * efforts
    residual = abs(float(probs.sum()) - 1.0)
    ids = instance.ids
    return ContestEquilibrium(
        total_effort=x,
        efforts=dict(zip(ids, efforts.tolist())),
        probs=dict(zip(ids, probs.tolist())),
        continuation_values=dict(zip(ids, values.tolist())),
        residual=residual,
    )


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def two_player_equilibrium(instance: ContestInstance) -> ContestEquilibrium:
    """Closed-form duel equilibrium.

    With advantage ratio ``R = (delta_1/k_1) / (delta_2/k_2)`` and odds
    ratio ``rho = sqrt(R) * w_1 / w_2`` the first athlete wins with
    probability ``rho / (1 + rho)`` and efforts scale with
    ``sqrt(delta * psi / cost)``.
    """
    if instance.m != 2:
        raise ValueError(f"the duel closed form needs exactly 2 members, "
                         f"got {instance.m}")
    adv = [instance.delta[i] * instance.psi[i] / instance.cost[i] for i in (0, 1)]
    rho = math.sqrt(adv[0] / adv[1]) * instance.weight[0] / instance.weight[1]
    p = (rho / (1.0 + rho), 1.0 / (1.0 + rho))
    scale = math.sqrt(rho) / (1.0 + rho)
    e = (math.sqrt(adv[0]) * scale, math.sqrt(adv[1]) * scale)
    x = instance.weight[0] * e[0] + instance.weight[1] * e[1]
    k = [instance.cost[i] / instance.psi[i] for i in (0, 1)]
    values = tuple(p[i] * instance.delta[i] - 0.5 * k[i] * e[i] * e[i] for i in (0, 1))
    ids = instance.ids
    return ContestEquilibrium(
        total_effort=x,
        efforts=dict(zip(ids, e)),
        probs=dict(zip(ids, p)),
        continuation_values=dict(zip(ids, values)),
        residual=abs(aggregate_equation(x, instance)),
    )


def symmetric_equilibrium(m: int, delta: float, cost: float,
                          psi: float) -> SymmetricEquilibrium:
    """Closed form for ``m`` identical athletes with unit weights."""
    if not (isinstance(m, int) and not isinstance(m, bool)) or m < 2:
        raise ValueError(f"the symmetric closed form needs an integer field "
                         f"size of at least 2, got {m!r}")
    for name, value in (("delta", delta), ("cost", cost), ("psi", psi)):
        if not (math.isfinite(value) and value > 0.0):
            raise DomainError(name, f"{name} must be positive, got {value}")
    effort = math.sqrt(delta * psi / cost) * math.sqrt((m - 1.0) / (m * m))
    return SymmetricEquilibrium(effort=effort, total_effort=m * effort, prob=1.0 / m)


# ---------------------------------------------------------------------------
# Verification oracles
# ---------------------------------------------------------------------------


def _golden_max(fn: Callable[[float], float], lo: float, hi: float,
                x_tol: float) -> tuple[float, float]:
    """Golden-section maximum of a unimodal function on ``[lo, hi]``."""
    best_x, best_f = lo, fn(lo)
    f_hi = fn(hi)
    if f_hi > best_f:
        best_x, best_f = hi, f_hi
    h = hi - lo
    if h <= x_tol:
        return best_x, best_f
    steps = int(math.ceil(math.log(x_tol / h) / math.log(_INVPHI)))
    steps = max(1, min(steps, 200))
    c = lo + _INVPHI2 * h
    d = lo + _INVPHI * h
    fc, fd = fn(c), fn(d)
    for _ in range(steps):
        if fc > best_f:
            best_x, best_f = c, fc
        if fd > best_f:
            best_x, best_f = d, fd
        if fc >= fd:
            hi, d, fd = d, c, fc
            h = hi - lo
            c = lo + _INVPHI2 * h
            fc = fn(c)
        else:
            lo, c, fc = c, d, fd
            h = hi - lo
            d = lo + _INVPHI * h
            fd = fn(d)
    return best_x, best_f


def verify_nash(instance: ContestInstance, equilibrium: ContestEquilibrium,
                deviation_tol: float = 1e-6) -> NashCheck:
    """Best-response check: largest unilateral payoff improvement found.

    For every member a golden-section search maximises the own payoff over
    deviations in ``[0, 4 * aggregate]`` holding rivals fixed.  The check
    passes when no member improves by more than ``deviation_tol``.
    """
    if instance.m == 1:
        # The lone member takes the prize at zero cost; effort only hurts.
        return NashCheck(max_gain=0.0, worst=None, passed=True)
    efforts = []
    for aid in instance.ids:
        if aid not in equilibrium.efforts:
            raise ValueError(f"equilibrium efforts are missing athlete {aid!r}")
        efforts.append(float(equilibrium.efforts[aid]))
    w = instance._w
    x_parts = w * np.asarray(efforts)
    x_all = float(x_parts.sum())
    if x_all <= 0.0:
        raise DegenerateProfileError("the equilibrium profile must carry positive "
                                     "total effort")
    span = 4.0 * x_all
    max_gain = -math.inf
    worst: str | None = None
    for idx, aid in enumerate(instance.ids):
        rivals = x_all - float(x_parts[idx])
        delta_i = instance.delta[idx]
        k_i = instance.cost[idx] / instance.psi[idx]
        w_i = instance.weight[idx]
        own = float(efforts[idx])
        if rivals <= 0.0:
            # Rivals are idle: the win is safe at any positive effort, so the
            # only improvement is shedding the current cost.
            gain = 0.5 * k_i * own * own
        else:
            def payoff(e: float, rivals: float = rivals, delta_i: float = delta_i,
                       k_i: float = k_i, w_i: float = w_i) -> float:
                return delta_i * (w_i * e) / (w_i * e + rivals) - 0.5 * k_i * e * e

            current = payoff(own)
            _, best = _golden_max(payoff, 0.0, span, x_tol=1e-12 * span)
            gain = best - current
        if gain > max_gain:
            max_gain = gain
            worst = aid
    return NashCheck(max_gain=max_gain, worst=worst, passed=max_gain <= deviation_tol)


def payoff_curvature(instance: ContestInstance, profile: EffortProfile,
                     athlete_id: str) -> CurvatureReport:
    """Exact own-second derivative and cross partials of one athlete's payoff.

    At weighted aggregate ``X`` with own share ``x_i`` the second derivative
    is ``-2 delta_i w_i^2 (X - x_i) / X^3 - k_i`` and the cross partial with
    athlete ``j`` is ``delta_i w_i w_j (2 x_i - X) / X^3``; the cross terms
    change sign with the athlete's win probability.
    """
    idx = instance.index(athlete_id)
    efforts = []
    for aid in instance.ids:
        if aid not in profile.efforts:
            raise ValueError(f"profile is missing athlete {aid!r}")
        efforts.append(profile.efforts[aid])
    w = instance._w
    x_parts = w * np.asarray(efforts)
    x_all = float(x_parts.sum())
    if x_all <= 0.0:
        raise DegenerateProfileError("curvature is undefined at the all-zero profile")
    delta_i = instance.delta[idx]
    k_i = instance.cost[idx] / instance.psi[idx]
    w_i = instance.weight[idx]
    x_i = float(x_parts[idx])
    cube = x_all ** 3
    second = -2.0 * delta_i * w_i * w_i * (x_all - x_i) / cube - k_i
    cross = {}
    for jdx, aid in enumerate(instance.ids):
        if jdx == idx:
            continue
        cross[aid] = delta_i * w_i * instance.weight[jdx] * (2.0 * x_i - x_all) / cube
    return CurvatureReport(second=second, cross=cross)
