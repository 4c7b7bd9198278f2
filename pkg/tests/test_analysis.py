"""Comparative statics, welfare accounting, sweeps, and prediction reports."""

from __future__ import annotations

import numpy as np
import pytest

from tricontest import (
    ContestInstance,
    DomainError,
    prediction_report,
    sensitivity_report,
    solve_contest,
    sweep,
    total_effort_derivative,
    welfare_report,
)

from helpers import pair_scenario, random_instance, random_scenario

ALPHA, BETA, T_SWIM = 0.001, 0.01, 1800.0


def theta_for(outside: float, rank: int) -> float:
    return outside + ALPHA * T_SWIM + BETA * rank


def unit_pair() -> ContestInstance:
    return ContestInstance(ids=("ada", "bea"), delta=(1.0, 1.0),
                           cost=(1.0, 1.0), psi=(1.0, 1.0), weight=(1.0, 1.0))


# ---------------------------------------------------------------------------
# Implicit derivatives
# ---------------------------------------------------------------------------


def test_derivative_values_at_the_unit_pair():
    pair = unit_pair()
    assert total_effort_derivative(pair, ("psi", "ada")) == \
        pytest.approx(0.25, abs=1e-12)
    assert total_effort_derivative(pair, ("cost", "ada")) == \
        pytest.approx(-0.25, abs=1e-12)
    assert total_effort_derivative(pair, ("delta", "ada")) == \
        pytest.approx(0.25, abs=1e-12)


def test_derivative_signs_on_random_instances():
    """More drafting or prize raises total effort; higher cost lowers it."""
    rng = np.random.default_rng(211)
    for _ in range(50):
        instance = random_instance(rng, weighted=True)
        aid = instance.ids[int(rng.integers(instance.m))]
        assert total_effort_derivative(instance, ("psi", aid)) > 0.0
        assert total_effort_derivative(instance, ("delta", aid)) > 0.0
        assert total_effort_derivative(instance, ("cost", aid)) < 0.0


def test_derivative_rejects_uncontested_fields():
    lone = ContestInstance(ids=("a",), delta=(1.0,), cost=(1.0,),
                           psi=(1.0,), weight=(1.0,))
    with pytest.raises(ValueError):
        total_effort_derivative(lone, ("psi", "a"))


def test_derivative_rejects_unknown_parameter():
    with pytest.raises(ValueError):
        total_effort_derivative(unit_pair(), ("weight", "ada"))
    with pytest.raises(ValueError):
        total_effort_derivative(unit_pair(), ("psi", "zed"))


# ---------------------------------------------------------------------------
# Sensitivity reports
# ---------------------------------------------------------------------------


def test_sensitivity_total_wrt_psi():
    report = sensitivity_report(unit_pair(), ("total", None), ("psi", "ada"))
    assert report.analytic == pytest.approx(0.25, abs=1e-12)
    assert report.finite_diff == pytest.approx(0.25, abs=1e-5)
    assert report.rel_err <= 1e-4
    assert report.passed


def test_sensitivity_own_prob_wrt_prize_is_positive():
    report = sensitivity_report(unit_pair(), ("prob", "ada"), ("delta", "ada"))
    assert report.analytic > 0.0
    assert report.passed


def test_sensitivity_rival_prob_wrt_psi_is_nonpositive():
    report = sensitivity_report(unit_pair(), ("prob", "bea"), ("psi", "ada"))
    assert report.analytic <= 0.0
    assert report.analytic == pytest.approx(-0.125, abs=1e-12)
    assert report.passed


def test_sensitivity_agrees_with_central_differences():
    rng = np.random.default_rng(223)
    for _ in range(40):
        instance = random_instance(rng)
        aid = instance.ids[int(rng.integers(instance.m))]
        kind = ("psi", "delta", "cost")[int(rng.integers(3))]
        target = (("total", None), ("prob", aid), ("effort", aid))[
            int(rng.integers(3))]
        report = sensitivity_report(instance, target, (kind, aid))
        assert report.rel_err <= 1e-4, report


def test_rival_odds_never_rise_with_a_rivals_multiplier():
    rng = np.random.default_rng(227)
    for _ in range(25):
        instance = random_instance(rng)
        aid = instance.ids[0]
        for other in instance.ids[1:]:
            report = sensitivity_report(instance, ("prob", other), ("psi", aid))
            assert report.analytic <= 1e-15


def test_sensitivity_input_validation():
    pair = unit_pair()
    with pytest.raises(ValueError):
        sensitivity_report(pair, ("odds", None), ("psi", "ada"))
    with pytest.raises(ValueError):
        sensitivity_report(pair, ("total", None), ("psi", "ada"), step=0.0)
    with pytest.raises(DomainError):
        # The centred stencil would step out of the positive domain.
        sensitivity_report(pair, ("total", None), ("psi", "ada"), step=2.0)
    lone = ContestInstance(ids=("a",), delta=(1.0,), cost=(1.0,),
                           psi=(1.0,), weight=(1.0,))
    with pytest.raises(ValueError):
        sensitivity_report(lone, ("total", None), ("psi", "a"))


# ---------------------------------------------------------------------------
# Welfare
# ---------------------------------------------------------------------------


def test_welfare_symmetric_pair():
    scenario = pair_scenario()
    report = welfare_report(scenario, scenario.ids)
    assert report.total_welfare == pytest.approx(0.75, abs=1e-12)
    assert report.aggregate_cost == pytest.approx(0.25, abs=1e-12)
    assert report.aggregate_prize_intake == pytest.approx(1.0, abs=1e-12)
    assert report.rent_ratio == pytest.approx(0.25, abs=1e-12)


def test_welfare_symmetric_ten():
    """Ten identical athletes dissipate 45 percent of the prize mass."""
    base = pair_scenario()
    athletes = tuple(
        base.athletes[0].__class__(id=f"r{i}", t_swim=T_SWIM, r_swim=i + 1,
                                   draft_share=0.0, base_cost=1.0,
                                   prize_diff=1.0)
        for i in range(10)
    )
    scenario = base.__class__(athletes=athletes, globals=base.globals)
    report = welfare_report(scenario, scenario.ids)
    assert report.rent_ratio == pytest.approx(0.45, abs=1e-9)


def test_welfare_singleton():
    scenario = pair_scenario(delta=(3.0, 1.0))
    report = welfare_report(scenario, ("ada",))
    assert report.total_welfare == 3.0
    assert report.aggregate_cost == 0.0
    assert report.aggregate_prize_intake == 3.0
    assert report.rent_ratio == 0.0


def test_welfare_identity_on_random_scenarios():
    """Realised welfare plus effort cost is exactly the expected intake."""
    rng = np.random.default_rng(233)
    for _ in range(25):
        scenario = random_scenario(rng)
        report = welfare_report(scenario, scenario.ids)
        assert report.total_welfare + report.aggregate_cost == \
            pytest.approx(report.aggregate_prize_intake, abs=1e-10)
        assert 0.0 <= report.rent_ratio < 0.5


def test_symmetric_rent_ratio_formula():
    base = pair_scenario()
    for m in (2, 3, 5, 10, 25):
        athletes = tuple(
            base.athletes[0].__class__(id=f"r{i}", t_swim=T_SWIM, r_swim=i + 1,
                                       draft_share=0.0, base_cost=1.0,
                                       prize_diff=1.0)
            for i in range(m)
        )
        scenario = base.__class__(athletes=athletes, globals=base.globals)
        report = welfare_report(scenario, scenario.ids)
        assert report.rent_ratio == pytest.approx((m - 1) / (2 * m), abs=1e-9)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def test_draft_share_sweep_raises_own_odds_and_effort():
    scenario = pair_scenario()
    grid = [0.0, 0.25, 0.5, 0.75]
    records = sweep(scenario, "athletes.ada.draft_share", grid)
    assert [r.value for r in records] == grid
    probs = [r.probs["ada"] for r in records]
    efforts = [r.efforts["ada"] for r in records]
    assert all(b > a for a, b in zip(probs, probs[1:]))
    assert all(b > a for a, b in zip(efforts, efforts[1:]))
    assert all(r.members is None and r.actions is None for r in records)


def test_field_size_sweep_lowers_per_head_effort():
    records = sweep(pair_scenario(), "m", [float(m) for m in range(2, 11)])
    per_head = [next(iter(r.efforts.values())) for r in records]
    assert all(b < a for a, b in zip(per_head, per_head[1:]))
    assert len(records[-1].efforts) == 10


def test_full_sweep_flips_the_entry_decision_once():
    """Drafting carries the marginal athlete across their indifference point.

    With the outside option pinned between the undrafted and fully drafted
    continuation values, the action column reads withdraw, withdraw,
    continue, continue over the canonical grid.
    """
    scenario = pair_scenario(theta=(theta_for(0.40, 1), theta_for(0.0, 2)))
    records = sweep(scenario, "athletes.ada.draft_share",
                    [0.0, 0.25, 0.5, 0.75], stage="full")
    actions = [r.actions["ada"] for r in records]
    assert actions == ["withdraw", "withdraw", "continue", "continue"]
    assert all(r.actions["bea"] == "continue" for r in records)
    flips = sum(1 for a, b in zip(actions, actions[1:]) if a != b)
    assert flips == 1


def test_sweep_grid_validation():
    scenario = pair_scenario()
    with pytest.raises(ValueError):
        sweep(scenario, "athletes.ada.draft_share", [])
    with pytest.raises(ValueError):
        sweep(scenario, "athletes.ada.draft_share", [0.5, 0.25])
    with pytest.raises(ValueError):
        sweep(scenario, "athletes.ada.draft_share", [0.0, 0.5], stage="both")


def test_sweep_parameter_validation():
    scenario = pair_scenario()
    with pytest.raises(ValueError):
        sweep(scenario, "athletes.ada.shoe_size", [0.0, 0.5])
    with pytest.raises(ValueError):
        sweep(scenario, "globals.gamma", [0.1, 0.2])
    with pytest.raises(ValueError):
        sweep(scenario, "prize", [0.1, 0.2])


def test_sweep_errors_name_the_grid_point():
    scenario = pair_scenario()
    with pytest.raises(DomainError) as err:
        sweep(scenario, "m", [2.0, 2.5])
    assert err.value.field == "grid"
    assert "grid point 1" in str(err.value)
    with pytest.raises(DomainError) as err:
        sweep(scenario, "athletes.ada.draft_share", [0.5, 1.5])
    assert err.value.field == "grid"


def test_sweep_of_global_drag():
    records = sweep(pair_scenario(draft=(0.5, 0.0)), "globals.eta",
                    [0.2, 0.4, 0.6])
    probs = [r.probs["ada"] for r in records]
    # Stronger drag amplifies the drafting advantage.
    assert all(b > a for a, b in zip(probs, probs[1:]))


# ---------------------------------------------------------------------------
# Prediction reports
# ---------------------------------------------------------------------------


def test_prediction_report_passes_on_the_default_pair():
    report = prediction_report(pair_scenario(theta=(theta_for(0.0, 1),
                                                    theta_for(0.0, 2))))
    assert report.passed
    assert report.section("drafting_gain").status == "pass"
    assert report.section("field_size").status == "pass"
    assert report.section("entry_response").status == "pass"


def test_prediction_report_counts_the_entry_flip():
    scenario = pair_scenario(theta=(theta_for(0.40, 1), theta_for(0.0, 2)))
    report = prediction_report(scenario)
    section = report.section("entry_response")
    assert section.status == "pass"
    assert "WWCC" in section.detail
    assert "1 flips" in section.detail


def test_prediction_report_flags_empty_contests():
    scenario = pair_scenario(theta=(theta_for(10.0, 1), theta_for(10.0, 2)))
    report = prediction_report(scenario)
    section = report.section("entry_response")
    assert section.status == "skipped"
    assert "insufficient contest size" in section.detail
    # The contest-stage sections are unaffected by outside options.
    assert report.section("drafting_gain").status == "pass"
    assert report.passed


def test_prediction_report_traces_the_size_tradeoff():
    """A multiplier that improves with the field can bend effort upward."""
    table = {2: 1.0, 3: 1.9, 4: 1.99, 5: 1.999}
    report = prediction_report(pair_scenario(), size_grid=[2, 3, 4, 5],
                               psi_by_size=table)
    section = report.section("size_tradeoff")
    assert section.status == "reported"
    assert "non-monotone" in section.detail


def test_prediction_report_rejects_unknown_athlete():
    with pytest.raises(ValueError):
        prediction_report(pair_scenario(), athlete_id="zed")
    with pytest.raises(KeyError):
        prediction_report(pair_scenario()).section("mystery")
