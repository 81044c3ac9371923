"""Defender protocol: per-link waterfilling and delay-minimizing next-hop choice.

Each node picks the neighbor minimizing its expected delay to the sink plus the
local queueing delay, with transmit power waterfilled across channels against
the interference currently in force. Routing is a distance-vector fixed point
over that delay metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netmodel import (
    ChannelModel,
    LinkGains,
    PowerAllocation,
    Scenario,
    link_delay,
    link_throughput,
    neighbors,
)

__all__ = [
    "DefenderStrategy",
    "TrafficMap",
    "waterfill",
    "waterfill_batch",
    "best_strategy",
    "update_routes",
    "traffic_map",
]


@dataclass(frozen=True)
class DefenderStrategy:
    """Network-wide snapshot of next hops, power allocations, and delays.

    ``next_hop[n]`` is None for the sink and for nodes with no feasible route;
    ``delay_s[n]`` is the end-to-end delay estimate under the arrivals in force.
    """

    next_hop: dict[int, int | None]
    alloc: dict[int, PowerAllocation | None]
    delay_s: dict[int, float]
    arrival_bps: dict[int, float]


@dataclass(frozen=True)
class TrafficMap:
    link_rates: dict[tuple[int, int], float]  # directed link -> carried bit/s
    node_input: dict[int, float]  # node -> total incoming bit/s


def waterfill(budget_w: float, effective_gains) -> np.ndarray:
    """Power allocation maximizing sum log2(1 + P*g) under a sum budget.

    ``effective_gains`` are H/(I + noise) per channel. Standard KKT solution:
    P_f = max(0, nu - 1/g_f) with the water level nu set by the budget.
    """
    g = np.asarray(effective_gains, dtype=float)
    if budget_w <= 0:
        raise ValueError("budget must be > 0")
    if np.any(g < 0):
        raise ValueError("effective gains must be nonnegative")
    usable = g > 0
    if not np.any(usable):
        raise ValueError("no usable channel (all gains zero)")
    inv = np.where(usable, 1.0 / np.where(usable, g, 1.0), np.inf)
    order = np.argsort(inv)
    inv_sorted = inv[order]
    # Find the largest active set whose water level clears its worst channel.
    k = int(np.sum(usable))
    while k > 1:
        nu = (budget_w + np.sum(inv_sorted[:k])) / k
        if nu > inv_sorted[k - 1]:
            break
        k -= 1
    nu = (budget_w + np.sum(inv_sorted[:k])) / k
    p = np.maximum(0.0, nu - inv)
    total = float(np.sum(p))
    if total <= 0.0:
        # Channels so weak that adding the budget to the water level is lost to
        # rounding; the KKT limit is the whole budget on the best channel.
        p = np.zeros_like(inv)
        p[order[0]] = budget_w
        return p
    # Exact budget, up to rounding.
    p *= budget_w / total
    return p


def waterfill_batch(budget_w: float, gains_matrix: np.ndarray) -> np.ndarray:
    """Row-wise waterfilling for many instances at once.

    ``gains_matrix`` has one row per instance. Vectorized over rows because the
    routing fixed point evaluates every (node, neighbor) pair each round.
    """
    g = np.asarray(gains_matrix, dtype=float)
    n, f = g.shape
    inv = np.where(g > 0, 1.0 / np.where(g > 0, g, 1.0), np.inf)
    inv_sorted = np.sort(inv, axis=1)
    csum = np.cumsum(np.where(np.isfinite(inv_sorted), inv_sorted, 0.0), axis=1)
    ks = np.arange(1, f + 1)
    nu_candidates = (budget_w + csum) / ks  # water level if exactly k channels active
    feasible = np.isfinite(inv_sorted) & (nu_candidates > inv_sorted)
    any_usable = feasible.any(axis=1)
    # Largest feasible k per row; rows with no usable channel get all zeros.
    k_idx = np.where(any_usable, f - 1 - np.argmax(feasible[:, ::-1], axis=1), 0)
    nu = nu_candidates[np.arange(n), k_idx]
    p = np.where(any_usable[:, None], np.maximum(0.0, nu[:, None] - inv), 0.0)
    p = np.nan_to_num(p, nan=0.0, posinf=0.0)
    totals = p.sum(axis=1)
    ok = totals > 0
    p[ok] *= budget_w / totals[ok, None]
    return p


def _link_metrics(budget_w: float, gains: np.ndarray, interference: np.ndarray,
                  arrival_bps: float, model: ChannelModel) -> tuple[np.ndarray, float, float]:
    g_eff = np.asarray(gains) / (np.asarray(interference) + model.noise_watts)
    if not np.any(g_eff > 0):
        return np.zeros_like(g_eff), 0.0, math.inf
    p = waterfill(budget_w, g_eff)
    thr = float(model.bandwidth_hz * np.sum(np.log2(1.0 + p * g_eff)))
    return p, thr, link_delay(thr, arrival_bps, model)


def best_strategy(node: int, neighbor_delays: dict[int, float],
                  gains_by_neighbor: dict[int, np.ndarray],
                  interference: np.ndarray, arrival_bps: float,
                  model: ChannelModel, budget_w: float = 1.0):
    """Waterfill toward each neighbor and pick the delay-minimizing next hop.

    Returns (PowerAllocation, next_hop, expected_delay). Ties break toward the
    lowest neighbor id; if every neighbor is infeasible the node is disconnected
    (None hop, +inf delay).
    """
    if not neighbor_delays:
        raise ValueError("neighbor set must be nonempty")
    best = (math.inf, None, None)
    for m in sorted(neighbor_delays):
        t_m = neighbor_delays[m]
        if math.isinf(t_m):
            continue
        p, _, d = _link_metrics(budget_w, gains_by_neighbor[m], interference,
                                arrival_bps, model)
        total = d + t_m
        if total < best[0]:
            best = (total, m, p)
    total, hop, p = best
    if hop is None:
        return None, None, math.inf
    alloc = PowerAllocation(tuple(p), budget_w)
    return alloc, hop, total


def _relax_once(scenario: Scenario, gains: LinkGains,
                interference: dict[int, np.ndarray], arrivals: dict[int, float],
                budget_w: float) -> tuple[dict[int, int | None], dict[int, float],
                                          dict[int, PowerAllocation | None]]:
    """Bellman-Ford over the delay metric with arrival rates frozen."""
    model = scenario.channel
    ids = sorted(scenario.positions)
    delay = {n: math.inf for n in ids}
    delay[scenario.sink_id] = 0.0
    hop: dict[int, int | None] = {n: None for n in ids}
    alloc: dict[int, PowerAllocation | None] = {n: None for n in ids}

    nbr = {n: neighbors(scenario, n) for n in ids}
    # Per-node link delay toward each neighbor is fixed within a relaxation pass,
    # so precompute it once (waterfilled against the receiver's interference).
    link_d: dict[int, dict[int, tuple[float, np.ndarray]]] = {}
    for n in ids:
        if n == scenario.sink_id:
            continue
        rows = []
        for m in nbr[n]:
            rows.append(gains.link(n, m) / (interference[m] + model.noise_watts))
        if not rows:
            link_d[n] = {}
            continue
        p_all = waterfill_batch(budget_w, np.asarray(rows))
        entry = {}
        for j, m in enumerate(nbr[n]):
            g_eff = rows[j]
            thr = float(model.bandwidth_hz * np.sum(np.log2(1.0 + p_all[j] * g_eff)))
            entry[m] = (link_delay(thr, arrivals[n], model), p_all[j])
        link_d[n] = entry

    for _ in range(len(ids)):
        changed = False
        for n in ids:
            if n == scenario.sink_id:
                continue
            best_t, best_m = delay[n], hop[n]
            for m in nbr[n]:
                d_link, _ = link_d[n].get(m, (math.inf, None))
                t = d_link + delay[m]
                if t < best_t - 1e-15 or (abs(t - best_t) <= 1e-15 and best_m is not None
                                          and m < best_m):
                    best_t, best_m = t, m
                    changed = True
            if best_m != hop[n]:
                delay[n], hop[n] = best_t, best_m
                alloc[n] = (PowerAllocation(tuple(link_d[n][best_m][1]), budget_w)
                            if best_m is not None else None)
            elif best_t < delay[n]:
                delay[n] = best_t
                changed = True
        if not changed:
            break
    return hop, delay, alloc


def _propagate(scenario: Scenario, hop: dict[int, int | None]) -> dict[int, float]:
    """Arrival rate per node (own generation plus routed inflow) under ``hop``."""
    ids = sorted(scenario.positions)
    arrivals = {n: scenario.source_rates.get(n, 0.0) for n in ids}
    # Push flow along next hops; routes from a relaxation pass are acyclic, so
    # |N| sweeps in any order converge.
    inflow = {n: 0.0 for n in ids}
    for _ in range(len(ids)):
        new_inflow = {n: 0.0 for n in ids}
        for n in ids:
            m = hop.get(n)
            if m is None or n == scenario.sink_id:
                continue
            new_inflow[m] += scenario.source_rates.get(n, 0.0) + inflow[n]
        if new_inflow == inflow:
            break
        inflow = new_inflow
    return {n: scenario.source_rates.get(n, 0.0) + inflow[n] for n in ids}


def update_routes(scenario: Scenario, gains: LinkGains,
                  interference: dict[int, np.ndarray],
                  budget_w: float = 1.0) -> DefenderStrategy:
    """Network-wide routing/power fixed point for one period.

    Alternates delay relaxation with arrival recomputation until the carried
    rates stop changing, then keeps the last relaxation's tree (acyclic: link
    delays are positive, so delay strictly decreases toward the sink).
    """
    ids = sorted(scenario.positions)
    arrivals = {n: scenario.source_rates.get(n, 0.0) for n in ids}
    hop: dict[int, int | None] = {}
    delay: dict[int, float] = {}
    alloc: dict[int, PowerAllocation | None] = {}
    for _ in range(len(ids)):
        hop, delay, alloc = _relax_once(scenario, gains, interference, arrivals, budget_w)
        new_arrivals = _propagate(scenario, hop)
        if all(abs(new_arrivals[n] - arrivals[n]) <= 1e-9 * max(1.0, arrivals[n])
               for n in ids):
            arrivals = new_arrivals
            break
        arrivals = new_arrivals
    return DefenderStrategy(next_hop=hop, alloc=alloc, delay_s=delay,
                            arrival_bps=arrivals)


def traffic_map(strategy: DefenderStrategy, scenario: Scenario) -> TrafficMap:
    """Carried rate per directed link and total input rate per node.

    Disconnected nodes (no next hop) contribute nothing. Raises on a routing
    cycle, which would violate the strategy invariant upstream.
    """
    ids = sorted(scenario.positions)
    order: list[int] = []
    state: dict[int, int] = {}  # 0 visiting, 1 done

    def visit(n: int) -> None:
        if state.get(n) == 1:
            return
        if state.get(n) == 0:
            raise ValueError("routing cycle detected")
        state[n] = 0
        m = strategy.next_hop.get(n)
        if m is not None:
            visit(m)
        state[n] = 1
        order.append(n)

    for n in ids:
        visit(n)

    inflow = {n: 0.0 for n in ids}
    link_rates: dict[tuple[int, int], float] = {}
    # DFS finish order lists sink-side nodes first; walking it in reverse
    # processes every upstream contributor before the node it feeds.
    for n in reversed(order):
        m = strategy.next_hop.get(n)
        if m is None or n == scenario.sink_id:
            continue
        rate = scenario.source_rates.get(n, 0.0) + inflow[n]
        if rate <= 0:
            continue
        link_rates[(n, m)] = rate
        inflow[m] += rate
    return TrafficMap(link_rates=link_rates, node_input=inflow)
