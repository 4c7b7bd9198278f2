"""Shared fixtures: an independent equilibrium oracle and random inputs.

The oracle below re-derives the aggregate-effort equation from the
first-order conditions and solves it with its own bisection loop
(interval-width stopping rule, bracket growth factor 2), so it shares no
code path with the package solver.  Agreement between the two is evidence,
not tautology.
"""

from __future__ import annotations

import numpy as np

from tricontest import (
    AthleteRecord,
    ContestInstance,
    DraftingGraph,
    GlobalParams,
    Scenario,
)


def reference_shares(total: float, k, delta_eff) -> list[float]:
    """Win probabilities implied by the first-order conditions at ``total``."""
    return [d / (kk * total * total + d) for kk, d in zip(k, delta_eff)]


def reference_equilibrium(delta, cost, psi, weight=None):
    """Solve the contest from scratch, returning (total, efforts, probs).

    Each athlete's first-order condition pins the win probability as a
    function of the weighted aggregate, and probabilities must sum to one.
    The root of that excess-probability function is bracketed by doubling
    and then bisected until the interval collapses.
    """
    m = len(delta)
    if weight is None:
        weight = [1.0] * m
    k = [c / s for c, s in zip(cost, psi)]
    delta_eff = [d * w * w for d, w in zip(delta, weight)]

    def excess(total: float) -> float:
        return sum(reference_shares(total, k, delta_eff)) - 1.0

    hi = 1.0
    while excess(hi) > 0.0:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    total = 0.5 * (lo + hi)
    probs = reference_shares(total, k, delta_eff)
    efforts = [p * total / w for p, w in zip(probs, weight)]
    return total, efforts, probs


def random_instance(rng: np.random.Generator, m: int | None = None,
                    weighted: bool = False) -> ContestInstance:
    """Draw one contest; sizes and ranges cover the supported domain."""
    if m is None:
        m = int(rng.integers(2, 9))
    ids = tuple(f"a{i:02d}" for i in range(m))
    delta = tuple(float(x) for x in rng.uniform(0.1, 10.0, size=m))
    cost = tuple(float(x) for x in rng.uniform(0.1, 10.0, size=m))
    psi = tuple(float(x) for x in rng.uniform(1.0, 2.0, size=m))
    if weighted:
        weight = tuple(float(x) for x in rng.uniform(0.5, 2.0, size=m))
    else:
        weight = tuple(1.0 for _ in range(m))
    return ContestInstance(ids=ids, delta=delta, cost=cost, psi=psi,
                           weight=weight)


def pair_scenario(theta=(0.0, 0.0), draft=(0.0, 0.0), delta=(1.0, 1.0),
                  cost=(1.0, 1.0), eta=0.5, alpha=0.001, beta=0.01,
                  t_swim=1800.0) -> Scenario:
    """Two-athlete scenario with flat swim stats; tune the knobs per test."""
    athletes = tuple(
        AthleteRecord(id=aid, t_swim=t_swim, r_swim=i + 1,
                      draft_share=draft[i], base_cost=cost[i],
                      prize_diff=delta[i], theta=theta[i])
        for i, aid in enumerate(("ada", "bea"))
    )
    return Scenario(athletes=athletes,
                    globals=GlobalParams(alpha=alpha, beta=beta, eta=eta))


def random_scenario(rng: np.random.Generator, n: int | None = None,
                    eta: float = 0.5) -> Scenario:
    """Scenario whose outside options straddle the continuation values.

    theta is chosen so the outside option lands between -0.3 and +0.9
    times the own prize differential, which makes the continuation stage
    genuinely selective instead of trivially keeping everyone in.
    """
    if n is None:
        n = int(rng.integers(2, 7))
    alpha, beta = 0.001, 0.01
    athletes = []
    for i in range(n):
        t_swim = float(rng.uniform(1700.0, 1900.0))
        rank = i + 1
        prize = float(rng.uniform(0.5, 2.0))
        target_outside = prize * float(rng.uniform(-0.3, 0.9))
        athletes.append(AthleteRecord(
            id=f"a{i:02d}",
            t_swim=t_swim,
            r_swim=rank,
            draft_share=float(rng.uniform(0.0, 1.0)),
            base_cost=float(rng.uniform(0.5, 2.0)),
            prize_diff=prize,
            theta=target_outside + alpha * t_swim + beta * rank,
        ))
    return Scenario(athletes=tuple(athletes),
                    globals=GlobalParams(alpha=alpha, beta=beta, eta=eta),
                    graph=DraftingGraph())
