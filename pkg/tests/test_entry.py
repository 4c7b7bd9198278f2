"""Continuation values, cutoffs, and stable-field search."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from tricontest import (
    AthleteRecord,
    GlobalParams,
    Scenario,
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

from helpers import pair_scenario, random_scenario, reference_equilibrium

ALPHA, BETA, T_SWIM = 0.001, 0.01, 1800.0


def theta_for(outside: float, rank: int) -> float:
    """theta that pins the outside option of an athlete at ``outside``."""
    return outside + ALPHA * T_SWIM + BETA * rank


def pair_with_outside(u_ada: float, u_bea: float, **kwargs) -> Scenario:
    return pair_scenario(theta=(theta_for(u_ada, 1), theta_for(u_bea, 2)),
                         **kwargs)


def triple_scenario() -> Scenario:
    athletes = (
        AthleteRecord(id="ada", t_swim=T_SWIM, r_swim=1, draft_share=0.0,
                      base_cost=1.0, prize_diff=1.0),
        AthleteRecord(id="bea", t_swim=T_SWIM, r_swim=2, draft_share=0.0,
                      base_cost=1.0, prize_diff=2.0),
        AthleteRecord(id="cal", t_swim=T_SWIM, r_swim=3, draft_share=0.0,
                      base_cost=2.0, prize_diff=1.0),
    )
    return Scenario(athletes=athletes,
                    globals=GlobalParams(alpha=ALPHA, beta=BETA, eta=0.5))


def cutoff_scenario(u_ada: float) -> Scenario:
    """Symmetric pair with search bounds wider than the drag range."""
    athletes = (
        AthleteRecord(id="ada", t_swim=T_SWIM, r_swim=1, draft_share=0.0,
                      base_cost=1.0, prize_diff=1.0,
                      theta=theta_for(u_ada, 1)),
        AthleteRecord(id="bea", t_swim=T_SWIM, r_swim=2, draft_share=0.0,
                      base_cost=1.0, prize_diff=1.0),
    )
    params = GlobalParams(alpha=ALPHA, beta=BETA, eta=0.5,
                          psi_bounds=(0.5, 2.0))
    return Scenario(athletes=athletes, globals=params)


# ---------------------------------------------------------------------------
# Continuation values and net benefits
# ---------------------------------------------------------------------------


def test_pair_continuation_value():
    scenario = pair_with_outside(0.0, 0.0)
    assert continuation_value(scenario, ("ada", "bea"), "ada") == \
        pytest.approx(0.375, abs=1e-12)


def test_singleton_continuation_value_is_the_prize():
    scenario = pair_with_outside(0.0, 0.0)
    assert continuation_value(scenario, ("ada",), "ada") == 1.0


def test_triple_continuation_value_matches_reference():
    scenario = triple_scenario()
    value = continuation_value(scenario, scenario.ids, "bea")
    assert value == pytest.approx(0.7236, abs=1e-3)

    total, efforts, probs = reference_equilibrium(
        delta=[1.0, 2.0, 1.0], cost=[1.0, 1.0, 2.0], psi=[1.0, 1.0, 1.0])
    expected = probs[1] * 2.0 - 0.5 * 1.0 * efforts[1] ** 2
    assert value == pytest.approx(expected, abs=1e-9)


def test_net_benefit_values():
    scenario = pair_with_outside(0.1, 0.0)
    report = net_benefit(scenario, ("ada", "bea"), "ada")
    assert report.outside == pytest.approx(0.1, abs=1e-12)
    assert report.value == pytest.approx(0.275, abs=1e-12)

    boundary = pair_with_outside(0.375, 0.0)
    report = net_benefit(boundary, ("ada", "bea"), "ada")
    assert report.value == pytest.approx(0.0, abs=1e-12)


def test_net_benefit_extends_the_field_for_outsiders():
    """An outsider is judged on the field that would include them."""
    scenario = pair_with_outside(0.0, 0.2)
    report = net_benefit(scenario, ("ada",), "bea")
    assert report.members == ("ada", "bea")
    assert report.continuation == pytest.approx(0.375, abs=1e-12)
    assert report.value == pytest.approx(0.175, abs=1e-12)


def test_net_benefit_unknown_athlete():
    scenario = pair_with_outside(0.0, 0.0)
    with pytest.raises(ValueError):
        net_benefit(scenario, ("ada",), "zed")


def test_subset_equilibrium_memoisation():
    scenario = pair_with_outside(0.0, 0.0)
    cache: dict = {}
    first = subset_equilibrium(scenario, ("bea", "ada"), cache=cache)
    assert ("ada", "bea") in cache
    again = subset_equilibrium(scenario, ("ada", "bea"), cache=cache)
    assert again is first
    with pytest.raises(ValueError):
        subset_equilibrium(scenario, (), cache=cache)
    with pytest.raises(ValueError):
        subset_equilibrium(scenario, ("zed",))


# ---------------------------------------------------------------------------
# Cutoffs
# ---------------------------------------------------------------------------


def test_cutoff_interior_at_symmetry():
    """Outside option pinned at the symmetric payoff puts the cutoff at 1."""
    result = cutoff_psi(cutoff_scenario(0.375), ("ada", "bea"), "ada")
    assert result.verdict == "interior"
    assert result.psi_star == pytest.approx(1.0, abs=1e-6)


def test_cutoff_always_continue():
    result = cutoff_psi(cutoff_scenario(-10.0), ("ada", "bea"), "ada")
    assert result.verdict == "always_continue"
    assert result.psi_star is None


def test_cutoff_always_withdraw():
    result = cutoff_psi(cutoff_scenario(10.0), ("ada", "bea"), "ada")
    assert result.verdict == "always_withdraw"
    assert result.psi_star is None


def test_cutoff_requires_membership():
    with pytest.raises(ValueError):
        cutoff_psi(cutoff_scenario(0.375), ("bea",), "ada")


def test_cutoff_moves_with_prize_and_cost():
    """A better prize lowers the indifference point; a worse cost raises it."""
    base = cutoff_scenario(0.375)
    at_one = cutoff_psi(base, ("ada", "bea"), "ada").psi_star

    def tweak(**fields) -> Scenario:
        ada = dataclasses.replace(base.athletes[0], **fields)
        return dataclasses.replace(base, athletes=(ada, base.athletes[1]))

    richer = cutoff_psi(tweak(prize_diff=1.1), ("ada", "bea"), "ada")
    assert richer.verdict == "interior"
    assert richer.psi_star < at_one

    slower = cutoff_psi(tweak(base_cost=1.1), ("ada", "bea"), "ada")
    assert slower.verdict == "interior"
    assert slower.psi_star > at_one


def test_net_benefit_curve_nondecreasing():
    """The stay-versus-leave margin never falls as drafting improves."""
    rng = np.random.default_rng(89)
    for _ in range(10):
        scenario = random_scenario(rng)
        lo, hi = scenario.globals.psi_bounds
        grid = np.linspace(lo, hi, 50)
        curve = net_benefit_curve(scenario, scenario.ids,
                                  scenario.athletes[0].id, grid)
        assert all(b - a >= -1e-9 for a, b in zip(curve, curve[1:]))
        assert curve[-1] > curve[0]


# ---------------------------------------------------------------------------
# Stable fields
# ---------------------------------------------------------------------------


def test_is_equilibrium_set_direct_checks():
    low = pair_with_outside(0.0, 0.0)
    assert is_equilibrium_set(low, ("ada", "bea"))
    # A lone field is unstable: the outsider would profit from entering.
    assert not is_equilibrium_set(low, ("ada",))

    skewed = pair_with_outside(0.0, 10.0)
    assert is_equilibrium_set(skewed, ("ada",))
    assert not is_equilibrium_set(skewed, ("ada", "bea"))


def test_enumerate_low_outside_pair():
    assert enumerate_equilibrium_sets(pair_with_outside(0.0, 0.0)) == \
        [("ada", "bea")]


def test_enumerate_high_outside_rival():
    assert enumerate_equilibrium_sets(pair_with_outside(0.0, 10.0)) == \
        [("ada",)]


def test_enumerate_everyone_out():
    assert enumerate_equilibrium_sets(pair_with_outside(10.0, 10.0)) == []


def test_enumerate_two_singletons_in_order():
    """Middling outside options make each lone field stable, nothing else."""
    scenario = pair_with_outside(0.5, 0.5)
    assert enumerate_equilibrium_sets(scenario) == [("ada",), ("bea",)]


def test_enumerate_respects_size_cap():
    rng = np.random.default_rng(3)
    scenario = random_scenario(rng, n=4)
    with pytest.raises(ValueError):
        enumerate_equilibrium_sets(scenario, max_n=3)


def test_iterate_fixed_point_in_one_round():
    outcome = iterate_continuation_operator(pair_with_outside(0.0, 0.0))
    assert outcome.method == "fixed_point"
    assert outcome.members == ("ada", "bea")
    assert outcome.trace[0] == ("ada", "bea")
    assert len(outcome.trace) == 2


def test_iterate_sheds_the_reluctant_rival():
    outcome = iterate_continuation_operator(pair_with_outside(0.0, 10.0))
    assert outcome.method == "fixed_point"
    assert outcome.members == ("ada",)
    assert len(outcome.trace) <= 3


def test_iterate_singleton_fallback_tie_breaks_low():
    outcome = iterate_continuation_operator(pair_with_outside(10.0, 10.0))
    assert outcome.method == "singleton_fallback"
    assert outcome.members == ("ada",)


def test_iterate_singleton_fallback_prefers_best_prize():
    scenario = pair_with_outside(10.0, 10.0, delta=(1.0, 2.0))
    outcome = iterate_continuation_operator(scenario)
    assert outcome.method == "singleton_fallback"
    assert outcome.members == ("bea",)


def test_iterate_budget_exhaustion_falls_back_to_enumeration():
    outcome = iterate_continuation_operator(pair_with_outside(0.0, 10.0),
                                            max_rounds=1)
    assert outcome.method == "enumeration"
    assert outcome.members == ("ada",)


def test_iterate_rejects_bad_round_budget():
    with pytest.raises(ValueError):
        iterate_continuation_operator(pair_with_outside(0.0, 0.0),
                                      max_rounds=0)


# ---------------------------------------------------------------------------
# Assembled outcomes
# ---------------------------------------------------------------------------


def test_assemble_low_outside_pair():
    results = assemble_spe(pair_with_outside(0.0, 0.0))
    assert len(results) == 1
    spe = results[0]
    assert spe.members == ("ada", "bea")
    assert spe.method == "enumeration"
    assert spe.actions == {"ada": "continue", "bea": "continue"}
    assert spe.payoffs["ada"] == pytest.approx(0.375, abs=1e-12)
    assert spe.payoffs["bea"] == pytest.approx(0.375, abs=1e-12)


def test_assemble_high_outside_rival():
    results = assemble_spe(pair_with_outside(0.0, 10.0))
    spe = results[0]
    assert spe.members == ("ada",)
    assert spe.actions == {"ada": "continue", "bea": "withdraw"}
    assert spe.payoffs["ada"] == 1.0
    assert spe.payoffs["bea"] == pytest.approx(10.0, abs=1e-12)


def test_assemble_flags_the_fallback():
    results = assemble_spe(pair_with_outside(10.0, 10.0))
    assert [r.method for r in results] == ["singleton_fallback"]


def test_assemble_all_returns_every_stable_set():
    results = assemble_spe(pair_with_outside(0.5, 0.5), mode="all")
    assert [r.members for r in results] == [("ada",), ("bea",)]


def test_assemble_iterative_mode():
    results = assemble_spe(pair_with_outside(0.0, 0.0), mode="iterative")
    assert results[0].members == ("ada", "bea")
    assert results[0].method == "iteration"


def test_assemble_rejects_unknown_mode():
    with pytest.raises(ValueError):
        assemble_spe(pair_with_outside(0.0, 0.0), mode="everything")


# ---------------------------------------------------------------------------
# Cross-checks on random scenarios
# ---------------------------------------------------------------------------


def test_iterate_lands_inside_the_enumerated_sets():
    rng = np.random.default_rng(101)
    for _ in range(25):
        scenario = random_scenario(rng, n=int(rng.integers(2, 7)))
        cache: dict = {}
        outcome = iterate_continuation_operator(scenario, cache=cache)
        stable = enumerate_equilibrium_sets(scenario, cache=cache)
        if outcome.method == "fixed_point":
            assert outcome.members in stable
        for members in stable:
            # Independent re-check of both stability conditions.
            for aid in scenario.ids:
                value = net_benefit(scenario, members, aid, cache=cache).value
                if aid in members:
                    assert value >= 0.0
                else:
                    assert value <= 0.0


def test_assembled_results_recheck_on_random_scenarios():
    rng = np.random.default_rng(131)
    for _ in range(20):
        scenario = random_scenario(rng, n=int(rng.integers(2, 6)))
        for spe in assemble_spe(scenario, mode="all"):
            if spe.method == "singleton_fallback":
                continue
            assert is_equilibrium_set(scenario, spe.members)
            for aid in scenario.ids:
                if spe.actions[aid] == "continue":
                    assert spe.payoffs[aid] == \
                        spe.equilibrium.continuation_values[aid]


def test_cache_is_transparent():
    """The memo changes cost, never answers."""
    rng = np.random.default_rng(151)
    for _ in range(10):
        scenario = random_scenario(rng, n=4)
        cache: dict = {}
        with_cache = assemble_spe(scenario, mode="all", cache=cache)
        without = assemble_spe(scenario, mode="all", cache=None)
        assert with_cache == without
        assert len(cache) > 0
