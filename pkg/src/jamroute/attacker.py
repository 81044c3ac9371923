"""Jammer-side logic: victim selection, jamming allocation, and the game loop.

The attacker wants traffic steered into the compromised relay without touching
it directly: it jams the link a victim currently prefers until the victim's
delay-minimizing protocol reroutes through a neighbor whose path crosses the
compromised node. Victim choice is greedy by the least jamming power that
causes such a flip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .defender import DefenderStrategy, TrafficMap, traffic_map, update_routes, waterfill
from .netmodel import (
    LinkGains,
    PowerAllocation,
    Scenario,
    draw_gains,
    interference_at,
    link_delay,
    neighbors,
)

__all__ = [
    "AttackerStrategy",
    "AttackOutcome",
    "NetworkState",
    "select_target",
    "jam_allocation",
    "run_iteration",
    "route_reaches",
]


@dataclass(frozen=True)
class AttackerStrategy:
    alloc: PowerAllocation
    target_link: tuple[int, int]


@dataclass(frozen=True)
class AttackOutcome:
    attack_gain_bps: float  # mean input rate at the compromised node
    baseline_first_period_bps: float
    per_period_gain_bps: tuple[float, ...]
    periods_elapsed: int


@dataclass(frozen=True)
class NetworkState:
    """Everything in force during one strategy-updating period."""

    period: int
    gains: LinkGains
    strategy: DefenderStrategy
    traffic: TrafficMap
    jam: AttackerStrategy | None


def route_reaches(strategy: DefenderStrategy, start: int, via: int, sink: int) -> bool:
    """True when ``start``'s next-hop chain passes through ``via``."""
    seen = set()
    node = start
    while node is not None and node not in seen:
        if node == via:
            return True
        if node == sink:
            return False
        seen.add(node)
        node = strategy.next_hop.get(node)
    return False


def jam_allocation(budget_w: float, target_link: tuple[int, int],
                   num_channels: int) -> AttackerStrategy:
    """Uniform power split over every channel of the victim link.

    Spreading thin keeps each channel's interference small relative to the
    signal (the attack should look like channel quality drift, not a blackout).
    """
    if budget_w < 0:
        raise ValueError("budget must be nonnegative")
    alloc = PowerAllocation.uniform(budget_w, num_channels) if budget_w > 0 \
        else PowerAllocation.zero(num_channels)
    return AttackerStrategy(alloc=alloc, target_link=target_link)


def _argmin_next_hop(scenario: Scenario, state: NetworkState, node: int,
                     jam_power_w: float, budget_w: float = 1.0) -> int | None:
    """The victim's delay-minimizing next hop if the jammer spends ``jam_power_w``.

    Downstream delays are frozen at the current period's values (the victim
    recomputes only its own link, which is what one protocol round sees). The
    candidate jamming replaces any jamming currently in force, and its splash
    interference lands on every receiver.
    """
    model = scenario.channel
    f = model.num_channels
    per_ch = jam_power_w / f
    arrival = state.strategy.arrival_bps.get(node, 0.0)
    best_t, best_m = math.inf, None
    for m in neighbors(scenario, node):
        t_m = state.strategy.delay_s.get(m, math.inf)
        if math.isinf(t_m) or route_reaches(state.strategy, m, node, scenario.sink_id):
            continue  # unreachable or would loop back through the victim
        i_m = per_ch * state.gains.jammer(m)
        g_eff = state.gains.link(node, m) / (i_m + model.noise_watts)
        if not np.any(g_eff > 0):
            continue
        p = waterfill(budget_w, g_eff)
        thr = float(model.bandwidth_hz * np.sum(np.log2(1.0 + p * g_eff)))
        t = link_delay(thr, arrival, model) + t_m
        if t < best_t:
            best_t, best_m = t, m
    return best_m


def _flip_power(scenario: Scenario, state: NetworkState, node: int,
                budget_w: float, ladder_points: int = 24) -> float | None:
    """Least jamming power (within budget) that steers ``node`` into the trap.

    Scans a log-spaced power ladder from a thousandth of the budget upward and
    returns the first level whose argmin next hop leads through the compromised
    node; None when even the full budget fails.
    """
    for p in np.geomspace(budget_w * 1e-3, budget_w, ladder_points):
        hop = _argmin_next_hop(scenario, state, node, float(p))
        if hop is None:
            continue
        trial = _with_hop(state.strategy, node, hop)
        if route_reaches(trial, hop, scenario.compromised_id, scenario.sink_id):
            return float(p)
    return None


def _with_hop(strategy: DefenderStrategy, node: int, hop: int) -> DefenderStrategy:
    nh = dict(strategy.next_hop)
    nh[node] = hop
    return DefenderStrategy(next_hop=nh, alloc=strategy.alloc,
                            delay_s=strategy.delay_s, arrival_bps=strategy.arrival_bps)


def select_target(state: NetworkState, scenario: Scenario) -> tuple[int, tuple[int, int]] | None:
    """Pick the victim whose route flip needs the least jamming power.

    Eligible victims route around the compromised node, carry traffic, and have
    at least one reachable neighbor whose path crosses it. Returns (victim,
    victim link) or None when nobody qualifies (the attacker idles).
    """
    if not scenario.jammer.enabled:
        raise ValueError("target selection requires an enabled jammer")
    budget = scenario.jammer.power_budget_w
    c, sink = scenario.compromised_id, scenario.sink_id
    best: tuple[float, int, tuple[int, int]] | None = None
    for n in sorted(scenario.positions):
        if n in (c, sink):
            continue
        m = state.strategy.next_hop.get(n)
        if m is None:
            continue
        if route_reaches(state.strategy, n, c, sink):
            continue  # already feeding the compromised node
        carried = (scenario.source_rates.get(n, 0.0)
                   + state.traffic.node_input.get(n, 0.0))
        if carried <= 0:
            continue
        has_trap = any(
            l != m and not math.isinf(state.strategy.delay_s.get(l, math.inf))
            and route_reaches(state.strategy, l, c, sink)
            for l in neighbors(scenario, n)
        )
        if not has_trap:
            continue
        p = _flip_power(scenario, state, n, budget)
        if p is None:
            continue
        if best is None or p < best[0] - 1e-15:
            best = (p, n, (n, m))
    if best is None:
        return None
    _, n, link = best
    return n, link


def _jam_still_working(state: NetworkState, scenario: Scenario) -> bool:
    """Persistence test: the current jam holds its victim on a trapped route.

    Keep the target while (a) the victim currently routes through the
    compromised node and (b) switching the jammer off would free it. Without
    this the attacker re-targets every period and undoes its own work.
    """
    if state.jam is None:
        return False
    victim = state.jam.target_link[0]
    c, sink = scenario.compromised_id, scenario.sink_id
    if not route_reaches(state.strategy, victim, c, sink):
        return False
    unjammed_hop = _argmin_next_hop(scenario, state, victim, 0.0)
    if unjammed_hop is None:
        return True
    trial = _with_hop(state.strategy, victim, unjammed_hop)
    return not route_reaches(trial, unjammed_hop, c, sink)


def run_iteration(scenario: Scenario, periods: int) -> tuple[list[NetworkState], AttackOutcome]:
    """Alternating defend/attack rounds over block-fading periods.

    Each period the defender re-solves routing and power against the jamming in
    force; the attacker moves only after observing a defender update, keeping a
    still-effective target and otherwise re-selecting. The recorded gain is the
    compromised node's input rate under the routes of that period.
    """
    if periods < 1:
        raise ValueError("periods must be >= 1")
    model = scenario.channel
    jam: AttackerStrategy | None = None
    last_defender_sig = None
    history: list[NetworkState] = []
    gains_per_period: list[float] = []
    jamming_on = scenario.jammer.enabled and scenario.jammer.power_budget_w > 0

    for t in range(periods):
        gains = draw_gains(scenario, t)
        alloc = jam.alloc if jam is not None else None
        interference = {
            node: interference_at(alloc, gains, node, model.num_channels)
            for node in scenario.positions
        }
        strategy = update_routes(scenario, gains, interference)
        traffic = traffic_map(strategy, scenario)
        state = NetworkState(t, gains, strategy, traffic, jam)
        history.append(state)
        gains_per_period.append(traffic.node_input.get(scenario.compromised_id, 0.0))

        if not jamming_on:
            continue
        sig = tuple(sorted((k, v) for k, v in strategy.next_hop.items()))
        if sig == last_defender_sig:
            continue  # no defender update observed; the attacker waits
        last_defender_sig = sig
        if _jam_still_working(state, scenario):
            continue
        picked = select_target(state, scenario)
        jam = (jam_allocation(scenario.jammer.power_budget_w, picked[1],
                              model.num_channels)
               if picked is not None else None)

    outcome = AttackOutcome(
        attack_gain_bps=float(np.mean(gains_per_period)),
        baseline_first_period_bps=gains_per_period[0],
        per_period_gain_bps=tuple(gains_per_period),
        periods_elapsed=periods,
    )
    return history, outcome
