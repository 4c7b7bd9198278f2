"""Post-swim continuation decisions: net benefits, cutoffs, equilibrium fields.

An athlete continues when the contest value of staying beats the outside
option.  The module evaluates those net benefits for arbitrary candidate
fields, finds the drafting-multiplier cutoff that makes an athlete
indifferent, and assembles self-consistent continuation sets either by
exhaustive enumeration or by iterating the best-reply set operator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, MutableMapping, Sequence

from .contest import (
    DEFAULT_SETTINGS,
    ContestEquilibrium,
    ContestInstance,
    SolverSettings,
    solve_contest,
    verify_nash,
)
from .model import Scenario, outside_option

__all__ = [
    "Members",
    "NetBenefit",
    "CutoffResult",
    "EntryIteration",
    "SpeResult",
    "EntryIterationError",
    "CONTINUE",
    "WITHDRAW",
    "INTERIOR",
    "ALWAYS_CONTINUE",
    "ALWAYS_WITHDRAW",
    "subset_equilibrium",
    "continuation_value",
    "net_benefit",
    "net_benefit_curve",
    "cutoff_psi",
    "enumerate_equilibrium_sets",
    "iterate_continuation_operator",
    "assemble_spe",
    "is_equilibrium_set",
]

Members = tuple[str, ...]
SubsetCache = MutableMapping[Members, ContestEquilibrium]

CONTINUE = "continue"
WITHDRAW = "withdraw"

INTERIOR = "interior"
ALWAYS_CONTINUE = "always_continue"
ALWAYS_WITHDRAW = "always_withdraw"


class EntryIterationError(RuntimeError):
    """The set operator failed to settle and no fallback applies."""

    def __init__(self, message: str, trace: tuple[Members, ...]) -> None:
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class NetBenefit:
    """Stay-versus-leave comparison for one athlete in one candidate field.

    ``members`` is the field the contest was actually evaluated on; for an
    athlete outside the queried set this is the set extended by them.
    """

    athlete_id: str
    members: Members
    continuation: float
    outside: float
    value: float


@dataclass(frozen=True)
class CutoffResult:
    """Indifference point of the net benefit in the drafting multiplier."""

    athlete_id: str
    members: Members
    verdict: str
    psi_star: float | None


@dataclass(frozen=True)
class EntryIteration:
    """Outcome of the set-operator iteration, with the visited trace."""

    members: Members
    trace: tuple[Members, ...]
    method: str


@dataclass(frozen=True)
class SpeResult:
    """One self-consistent continuation outcome with its solved contest."""

    members: Members
    equilibrium: ContestEquilibrium
    actions: dict[str, str]
    payoffs: dict[str, float]
    method: str


def _settings_for(scenario: Scenario,
                  settings: SolverSettings | None) -> SolverSettings:
    if settings is not None:
        return settings
    if scenario.settings is not None:
        return scenario.settings
    return DEFAULT_SETTINGS


def _canonical(scenario: Scenario, members: Iterable[str]) -> Members:
    known = set(scenario.ids)
    seen: set[str] = set()
    for aid in members:
        if aid not in known:
            raise ValueError(f"unknown athlete id {aid!r}")
        seen.add(aid)
    if not seen:
        raise ValueError("the member set must not be empty")
    return tuple(sorted(seen))


def subset_equilibrium(scenario: Scenario, members: Iterable[str],
                       settings: SolverSettings | None = None,
                       cache: SubsetCache | None = None) -> ContestEquilibrium:
    """Solve the contest among ``members``, memoised under the sorted id tuple.

    A cache passed in belongs to one scenario; reusing it across scenarios
    returns stale results.
    """
    key = _canonical(scenario, members)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    equilibrium = solve_contest(ContestInstance.from_scenario(scenario, key),
                                _settings_for(scenario, settings))
    if cache is not None:
        cache[key] = equilibrium
    return equilibrium


def continuation_value(scenario: Scenario, members: Iterable[str],
                       athlete_id: str,
                       settings: SolverSettings | None = None,
                       cache: SubsetCache | None = None) -> float:
    """Expected contest payoff of ``athlete_id`` inside the field ``members``."""
    key = _canonical(scenario, members)
    if athlete_id not in key:
        raise ValueError(f"athlete {athlete_id!r} is not in the member set")
    return subset_equilibrium(scenario, key, settings, cache) \
        .continuation_values[athlete_id]


def net_benefit(scenario: Scenario, members: Iterable[str], athlete_id: str,
                settings: SolverSettings | None = None,
                cache: SubsetCache | None = None) -> NetBenefit:
    """Continuation value minus outside option for one athlete.

    An athlete outside ``members`` is judged on the field extended by them,
    which is the payoff relevant to their own entry decision.
    """
    key = _canonical(scenario, members)
    if athlete_id not in key:
        if athlete_id not in scenario.ids:
            raise ValueError(f"unknown athlete id {athlete_id!r}")
        key = tuple(sorted(key + (athlete_id,)))
    stay = continuation_value(scenario, key, athlete_id, settings, cache)
    leave = outside_option(scenario.record(athlete_id), scenario.globals)
    return NetBenefit(athlete_id=athlete_id, members=key, continuation=stay,
                      outside=leave, value=stay - leave)


def _psi_value_fn(scenario: Scenario, members: Members, athlete_id: str,
                  settings: SolverSettings) -> Callable[[float], float]:
    """Net benefit of ``athlete_id`` as a function of their own multiplier."""
    base = ContestInstance.from_scenario(scenario, members)
    leave = outside_option(scenario.record(athlete_id), scenario.globals)

    def value(psi: float) -> float:
        instance = base.with_psi(athlete_id, psi)
        stay = solve_contest(instance, settings).continuation_values[athlete_id]
        return stay - leave

    return value


def net_benefit_curve(scenario: Scenario, members: Iterable[str],
                      athlete_id: str, psi_grid: Sequence[float],
                      settings: SolverSettings | None = None) -> list[float]:
    """Net benefit of ``athlete_id`` across a grid of own multipliers."""
    key = _canonical(scenario, members)
    if athlete_id not in key:
        raise ValueError(f"athlete {athlete_id!r} is not in the member set")
    value = _psi_value_fn(scenario, key, athlete_id,
                          _settings_for(scenario, settings))
    return [value(float(psi)) for psi in psi_grid]


def cutoff_psi(scenario: Scenario, members: Iterable[str], athlete_id: str,
               tol: float = 1e-10,
               settings: SolverSettings | None = None) -> CutoffResult:
    """Indifference multiplier of one athlete, holding everyone else fixed.

    The net benefit is strictly increasing in the own multiplier, so the
    search space splits cleanly: a nonnegative value at the lower bound
    means the athlete always continues, a negative value at the upper bound
    means they always withdraw, and otherwise bisection finds the interior
    root of the net benefit.
    """
    key = _canonical(scenario, members)
    if athlete_id not in key:
        raise ValueError(f"athlete {athlete_id!r} is not in the member set")
    value = _psi_value_fn(scenario, key, athlete_id,
                          _settings_for(scenario, settings))
    lo, hi = scenario.globals.psi_bounds
    if value(lo) >= 0.0:
        return CutoffResult(athlete_id, key, ALWAYS_CONTINUE, None)
    if value(hi) < 0.0:
        return CutoffResult(athlete_id, key, ALWAYS_WITHDRAW, None)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        vm = value(mid)
        if abs(vm) <= tol:
            return CutoffResult(athlete_id, key, INTERIOR, mid)
        if vm < 0.0:
            lo = mid
        else:
            hi = mid
    return CutoffResult(athlete_id, key, INTERIOR, 0.5 * (lo + hi))


# ---------------------------------------------------------------------------
# Equilibrium continuation sets
# ---------------------------------------------------------------------------


def is_equilibrium_set(scenario: Scenario, members: Iterable[str],
                       settings: SolverSettings | None = None,
                       cache: SubsetCache | None = None) -> bool:
    """Direct check of the two stability conditions for a candidate field.

    Every member must weakly prefer staying, and every outsider must weakly
    prefer staying out of the field extended by themselves.
    """
    key = _canonical(scenario, members)
    inside = set(key)
    for aid in scenario.ids:
        benefit = net_benefit(scenario, key, aid, settings, cache)
        if aid in inside:
            if benefit.value < 0.0:
                return False
        elif benefit.value > 0.0:
            return False
    return True


def enumerate_equilibrium_sets(scenario: Scenario, max_n: int = 12,
                               settings: SolverSettings | None = None,
                               cache: SubsetCache | None = None) -> list[Members]:
    """All stable continuation sets, in lexicographic order of sorted ids.

    Exhaustive over the ``2^n - 1`` nonempty subsets, so the field size is
    capped at ``max_n``; larger fields should use the iterative operator.
    """
    n = len(scenario.athletes)
    if n > max_n:
        raise ValueError(f"enumeration over {n} athletes needs 2^{n} subset "
                         f"solves; raise max_n or use "
                         f"iterate_continuation_operator")
    if cache is None:
        cache = {}
    ids_sorted = sorted(scenario.ids)
    found: list[Members] = []
    for size in range(1, n + 1):
        for combo in itertools.combinations(ids_sorted, size):
            if is_equilibrium_set(scenario, combo, settings, cache):
                found.append(combo)
    found.sort()
    return found


def _singleton_fallback(scenario: Scenario, settings: SolverSettings | None,
                        cache: SubsetCache | None) -> Members:
    """Most attractive lone continuation: best net benefit, ties to lower id."""
    best_id: str | None = None
    best_value = -float("inf")
    for aid in sorted(scenario.ids):
        value = net_benefit(scenario, (aid,), aid, settings, cache).value
        if value > best_value:
            best_id, best_value = aid, value
    assert best_id is not None
    return (best_id,)


def iterate_continuation_operator(scenario: Scenario,
                                  start: Iterable[str] | None = None,
                                  max_rounds: int | None = None,
                                  settings: SolverSettings | None = None,
                                  cache: SubsetCache | None = None,
                                  enum_max_n: int = 12) -> EntryIteration:
    """Iterate the best-reply set operator until it settles.

    Starting from ``start`` (default: the full field) each round keeps the
    athletes whose net benefit against the current set is nonnegative.  A
    fixed point is returned directly.  An empty round falls back to the
    best singleton.  A revisited set or an exhausted round budget signals a
    cycle; small fields then fall back to enumeration, larger ones raise
    :class:`EntryIterationError` with the visited trace.
    """
    all_ids = sorted(scenario.ids)
    current = _canonical(scenario, start if start is not None else all_ids)
    if max_rounds is None:
        max_rounds = 2 * len(all_ids)
    if max_rounds < 1:
        raise ValueError(f"max_rounds must be positive, got {max_rounds}")
    if cache is None:
        cache = {}
    trace: list[Members] = [current]
    visited = {current}
    cycled = False
    for _ in range(max_rounds):
        nxt = tuple(aid for aid in all_ids
                    if net_benefit(scenario, current, aid, settings, cache)
                    .value >= 0.0)
        trace.append(nxt)
        if nxt == current:
            return EntryIteration(current, tuple(trace), "fixed_point")
        if not nxt:
            chosen = _singleton_fallback(scenario, settings, cache)
            return EntryIteration(chosen, tuple(trace), "singleton_fallback")
        if nxt in visited:
            cycled = True
            break
        visited.add(nxt)
        current = nxt
    if len(all_ids) <= enum_max_n:
        sets = enumerate_equilibrium_sets(scenario, enum_max_n, settings, cache)
        if sets:
            return EntryIteration(sets[0], tuple(trace), "enumeration")
        chosen = _singleton_fallback(scenario, settings, cache)
        return EntryIteration(chosen, tuple(trace), "singleton_fallback")
    reason = "cycled" if cycled else "exhausted its round budget"
    raise EntryIterationError(f"the set operator {reason} over {len(all_ids)} "
                              f"athletes and the field is too large to "
                              f"enumerate", tuple(trace))


def assemble_spe(scenario: Scenario, mode: str = "first",
                 settings: SolverSettings | None = None,
                 cache: SubsetCache | None = None,
                 nash_tol: float = 1e-6) -> list[SpeResult]:
    """Full continuation outcomes: stable sets, actions, and payoffs.

    ``mode`` selects the stable set: ``"first"`` takes the lexicographically
    first enumerated set, ``"all"`` keeps every enumerated set, and
    ``"iterative"`` runs the set operator.  When no stable set exists the
    best singleton is returned, flagged ``singleton_fallback``.  Every
    non-fallback result is re-verified against both stability conditions
    and the best-response oracle.
    """
    if mode not in ("first", "all", "iterative"):
        raise ValueError(f"mode must be 'first', 'all', or 'iterative', got {mode!r}")
    if cache is None:
        cache = {}
    if mode == "iterative":
        outcome = iterate_continuation_operator(scenario, settings=settings,
                                                cache=cache)
        method = "iteration" if outcome.method == "fixed_point" else outcome.method
        chosen = [(outcome.members, method)]
    else:
        sets = enumerate_equilibrium_sets(scenario, settings=settings, cache=cache)
        if sets:
            if mode == "first":
                sets = sets[:1]
            chosen = [(members, "enumeration") for members in sets]
        else:
            chosen = [(_singleton_fallback(scenario, settings, cache),
                       "singleton_fallback")]
    results: list[SpeResult] = []
    for members, method in chosen:
        equilibrium = subset_equilibrium(scenario, members, settings, cache)
        if method != "singleton_fallback":
            if not is_equilibrium_set(scenario, members, settings, cache):
                raise RuntimeError(f"internal error: set {members} failed its "
                                   f"stability re-check")
        check = verify_nash(ContestInstance.from_scenario(scenario, members),
                            equilibrium, nash_tol)
        if not check.passed:
            raise RuntimeError(f"internal error: contest on {members} failed "
                               f"the best-response check "
                               f"(gain {check.max_gain})")
        inside = set(members)
        actions = {aid: (CONTINUE if aid in inside else WITHDRAW)
                   for aid in scenario.ids}
        payoffs = {}
        for aid in scenario.ids:
            if aid in inside:
                payoffs[aid] = equilibrium.continuation_values[aid]
            else:
                payoffs[aid] = outside_option(scenario.record(aid),
                                              scenario.globals)
        results.append(SpeResult(members=members, equilibrium=equilibrium,
                                 actions=actions, payoffs=payoffs,
                                 method=method))
    return results
