import heapq
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jamroute.defender import (
    DefenderStrategy,
    best_strategy,
    traffic_map,
    update_routes,
    waterfill,
    waterfill_batch,
)
from jamroute.harness import ExperimentConfig, generate_scenario
from jamroute.netmodel import (
    ChannelModel,
    Jammer,
    Scenario,
    mean_gains,
    neighbors,
)

MODEL = ChannelModel()


def delay_oracle(gain_vec, interference_vec, arrival_bps, model=MODEL,
                 budget_w=1.0) -> float:
    """Waterfilled M/M/1 link delay, written independently of defender code."""
    g_eff = np.asarray(gain_vec) / (np.asarray(interference_vec) + model.noise_watts)
    p = waterfill(budget_w, g_eff)
    thr = model.bandwidth_hz * float(np.sum(np.log2(1.0 + p * g_eff)))
    mu = thr / model.packet_size_bits
    lam = arrival_bps / model.packet_size_bits
    return math.inf if mu <= lam else 1.0 / (mu - lam)


def line_scenario() -> Scenario:
    nodes = ((0, (0.0, 0.0)), (1, (100.0, 0.0)), (2, (200.0, 0.0)))
    return Scenario(
        nodes=nodes,
        sink_id=2,
        source_rates={0: 80e3},
        compromised_id=1,
        jammer=Jammer(position=(100.0, 50.0), power_budget_w=0.0, enabled=False),
        rng_seed=5,
    )


# --- waterfill ---------------------------------------------------------------


def test_waterfill_two_channels_closed_form():
    p = waterfill(1.0, [2.0, 1.0])
    assert p == pytest.approx([0.75, 0.25], abs=1e-9)


def test_waterfill_equal_gains_uniform():
    p = waterfill(2.0, [5.0, 5.0, 5.0, 5.0])
    assert p == pytest.approx([0.5] * 4, abs=1e-12)


def test_waterfill_drops_hopeless_channel():
    p = waterfill(1.0, [1.0, 1e-9])
    assert p == pytest.approx([1.0, 0.0], abs=1e-12)


def test_waterfill_rejects_bad_inputs():
    with pytest.raises(ValueError):
        waterfill(0.0, [1.0])
    with pytest.raises(ValueError):
        waterfill(1.0, [1.0, -0.5])
    with pytest.raises(ValueError):
        waterfill(1.0, [0.0, 0.0])


def test_waterfill_absorbed_water_level_goes_to_best_channel():
    # Gains so small that budget + 1/g rounds to 1/g: the KKT limit is the
    # whole budget on the single best channel.
    p = waterfill(1.0, np.full(10, 1e-34))
    assert p[0] == 1.0 and float(np.sum(p)) == 1.0


def test_waterfill_beats_random_allocations():
    rng = np.random.default_rng(17)
    g = rng.lognormal(0.0, 1.5, size=10)
    p_star = waterfill(1.0, g)
    obj_star = float(np.sum(np.log2(1.0 + p_star * g)))
    rand = rng.dirichlet(np.ones(10), size=1000)
    objs = np.sum(np.log2(1.0 + rand * g), axis=1)
    assert obj_star >= float(objs.max()) - 1e-12


def test_waterfill_batch_matches_scalar():
    rng = np.random.default_rng(17)
    g = rng.lognormal(0.0, 2.0, size=(50, 10))
    batch = waterfill_batch(0.7, g)
    for row, expect in zip(batch, (waterfill(0.7, r) for r in g)):
        np.testing.assert_allclose(row, expect, atol=1e-12)


def test_waterfill_batch_unusable_rows_are_zero():
    # The batch solver flags hopeless rows with an all-zero allocation so the
    # routing pass can treat the link as unusable.
    rows = np.vstack([np.zeros(10), np.full(10, 1e-34)])
    batch = waterfill_batch(1.0, rows)
    assert not batch.any()


@given(st.lists(st.floats(min_value=1e-6, max_value=1e6), min_size=2, max_size=12),
       st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=60, deadline=None)
def test_waterfill_spends_budget_and_beats_uniform(gains, budget):
    g = np.asarray(gains)
    p = waterfill(budget, g)
    assert float(np.sum(p)) == pytest.approx(budget, rel=1e-9)
    assert np.all(p >= 0)
    uniform = np.full(g.size, budget / g.size)
    assert (np.sum(np.log2(1.0 + p * g))
            >= np.sum(np.log2(1.0 + uniform * g)) - 1e-9)


# --- best_strategy -----------------------------------------------------------


def test_best_strategy_single_neighbor():
    gains = {3: np.full(10, 4e-8)}
    alloc, hop, total = best_strategy(0, {3: 0.002}, gains, np.zeros(10),
                                      30e3, MODEL)
    assert hop == 3
    assert total == pytest.approx(delay_oracle(gains[3], np.zeros(10), 30e3) + 0.002)
    assert sum(alloc.per_channel_w) == pytest.approx(1.0, rel=1e-9)


def test_best_strategy_argmin_over_neighbors():
    gains = {1: np.full(10, 4e-8), 2: np.full(10, 9e-8)}
    alloc, hop, total = best_strategy(0, {1: 0.001, 2: 0.001}, gains,
                                      np.zeros(10), 30e3, MODEL)
    assert hop == 2
    assert total == pytest.approx(delay_oracle(gains[2], np.zeros(10), 30e3) + 0.001)


def test_best_strategy_tie_breaks_to_lowest_id():
    gains = {4: np.full(10, 3e-8), 7: np.full(10, 3e-8)}
    _, hop, _ = best_strategy(0, {7: 0.002, 4: 0.002}, gains, np.zeros(10),
                              10e3, MODEL)
    assert hop == 4


def test_best_strategy_jamming_flips_next_hop():
    # Neighbor 1 rides one strong channel; neighbor 2 spreads across all ten.
    # Jamming that one channel makes the previously better link infeasible.
    gains = {1: np.array([1e-6] + [1e-12] * 9), 2: np.full(10, 4e-8)}
    delays = {1: 0.001, 2: 0.001}
    _, hop_clean, t_clean = best_strategy(9, delays, gains, np.zeros(10),
                                          30e3, MODEL)
    jam = np.array([1e-6] + [0.0] * 9)
    _, hop_jam, t_jam = best_strategy(9, delays, gains, jam, 30e3, MODEL)
    assert (hop_clean, hop_jam) == (1, 2)
    assert t_clean == pytest.approx(delay_oracle(gains[1], np.zeros(10), 30e3) + 0.001)
    assert t_jam == pytest.approx(delay_oracle(gains[2], jam, 30e3) + 0.001)
    assert delay_oracle(gains[1], jam, 30e3) == math.inf


def test_best_strategy_all_neighbors_infeasible():
    alloc, hop, total = best_strategy(0, {1: math.inf}, {1: np.full(10, 4e-8)},
                                      np.zeros(10), 10e3, MODEL)
    assert (alloc, hop, total) == (None, None, math.inf)


def test_best_strategy_requires_neighbors():
    with pytest.raises(ValueError):
        best_strategy(0, {}, {}, np.zeros(10), 10e3, MODEL)


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_best_strategy_hop_invariant_under_metric_scaling(data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    k = int(rng.integers(2, 5))
    gains = {m: rng.lognormal(-18.0, 1.5, size=10) for m in range(k)}
    delays = {m: float(rng.uniform(0.001, 0.05)) for m in range(k)}
    interference = rng.uniform(0.0, 2e-8, size=10)
    arrival = float(rng.uniform(0.0, 30e3))
    c = float(rng.uniform(0.3, 8.0))
    # Scaling the packet size scales every link delay by c; scaling the
    # downstream delays by the same c leaves the argmin unchanged.
    scaled_model = ChannelModel(packet_size_bits=MODEL.packet_size_bits * c)
    _, hop, _ = best_strategy(0, delays, gains, interference, arrival, MODEL)
    _, hop_scaled, _ = best_strategy(0, {m: c * d for m, d in delays.items()},
                                     gains, interference, arrival, scaled_model)
    assert hop == hop_scaled


# --- update_routes -----------------------------------------------------------


def test_update_routes_line_topology():
    scn = line_scenario()
    gains = mean_gains(scn)
    zero = {n: np.zeros(10) for n in (0, 1, 2)}
    strat = update_routes(scn, gains, zero)
    assert strat.next_hop == {0: 1, 1: 2, 2: None}
    assert strat.arrival_bps == {0: 80e3, 1: 80e3, 2: 80e3}
    d12 = delay_oracle(gains.link(1, 2), zero[2], 80e3)
    d01 = delay_oracle(gains.link(0, 1), zero[1], 80e3)
    assert strat.delay_s[1] == pytest.approx(d12, rel=1e-12)
    assert strat.delay_s[0] == pytest.approx(d01 + d12, rel=1e-12)


def test_update_routes_equal_link_delays_degenerate_to_hop_count():
    # Every in-range link spans exactly 100 m and carries no traffic, so the
    # delay metric collapses to a hop count.
    nodes = ((0, (400.0, 200.0)), (1, (300.0, 200.0)), (2, (200.0, 200.0)),
             (3, (300.0, 100.0)))
    scn = Scenario(nodes=nodes, sink_id=0, source_rates={}, compromised_id=1,
                   jammer=Jammer(position=(0.0, 0.0), power_budget_w=0.0,
                                 enabled=False),
                   rng_seed=0, comm_radius_m=120.0)
    gains = mean_gains(scn)
    zero = {n: np.zeros(10) for n in range(4)}
    strat = update_routes(scn, gains, zero)
    assert strat.next_hop == {0: None, 1: 0, 2: 1, 3: 1}
    unit = delay_oracle(gains.link(1, 0), zero[0], 0.0)
    hops = {1: 1, 2: 2, 3: 2}
    for n, count in hops.items():
        assert strat.delay_s[n] == pytest.approx(count * unit, rel=1e-12)


@pytest.mark.parametrize("seed", [0, 3])
def test_update_routes_matches_dijkstra_oracle(seed):
    # Light sources keep the arrival/route recursion at an exact fixed point,
    # so the returned delays must solve the shortest-path problem on the
    # per-link delays computed from the converged arrivals.
    config = replace(ExperimentConfig(), mean_source_rate_bps=1.0)
    scn = generate_scenario(config, seed=seed)
    gains = mean_gains(scn)
    ids = sorted(scn.positions)
    zero = {n: np.zeros(config.num_channels) for n in ids}
    strat = update_routes(scn, gains, zero)

    reverse_edges: dict[int, list[tuple[int, float]]] = {}
    for n in ids:
        if n == scn.sink_id:
            continue
        for m in neighbors(scn, n):
            d = delay_oracle(gains.link(n, m), zero[m], strat.arrival_bps[n])
            if math.isfinite(d):
                reverse_edges.setdefault(m, []).append((n, d))

    dist = {n: math.inf for n in ids}
    dist[scn.sink_id] = 0.0
    heap = [(0.0, scn.sink_id)]
    done: set[int] = set()
    while heap:
        d, m = heapq.heappop(heap)
        if m in done:
            continue
        done.add(m)
        for n, w in reverse_edges.get(m, ()):
            if d + w < dist[n]:
                dist[n] = d + w
                heapq.heappush(heap, (d + w, n))

    for n in ids:
        assert strat.delay_s[n] == pytest.approx(dist[n], abs=1e-12)
        hop = strat.next_hop[n]
        if hop is not None:
            link = delay_oracle(gains.link(n, hop), zero[hop],
                                strat.arrival_bps[n])
            assert strat.delay_s[n] == pytest.approx(link + strat.delay_s[hop],
                                                     abs=1e-12)


def test_update_routes_is_acyclic_on_full_config():
    config = ExperimentConfig()
    scn = generate_scenario(config, seed=1)
    strat = update_routes(scn, mean_gains(scn),
                          {n: np.zeros(config.num_channels)
                           for n in scn.positions})
    for start in scn.positions:
        seen = set()
        node: int | None = start
        while node is not None:
            assert node not in seen
            seen.add(node)
            node = strat.next_hop[node]


# --- traffic_map -------------------------------------------------------------


def test_traffic_map_two_hop_path():
    scn = line_scenario()
    strat = update_routes(scn, mean_gains(scn), {n: np.zeros(10) for n in (0, 1, 2)})
    traffic = traffic_map(strat, scn)
    assert traffic.link_rates == {(0, 1): 80e3, (1, 2): 80e3}
    assert traffic.node_input == {0: 0.0, 1: 80e3, 2: 80e3}


def test_traffic_map_merging_sources_sum_at_relay():
    nodes = ((0, (0.0, 0.0)), (1, (0.0, 120.0)), (2, (100.0, 60.0)),
             (3, (240.0, 60.0)))
    scn = Scenario(nodes=nodes, sink_id=3, source_rates={0: 80e3, 1: 50e3},
                   compromised_id=2,
                   jammer=Jammer(position=(100.0, 100.0), power_budget_w=0.0,
                                 enabled=False),
                   rng_seed=5)
    strat = update_routes(scn, mean_gains(scn), {n: np.zeros(10) for n in range(4)})
    traffic = traffic_map(strat, scn)
    assert traffic.link_rates == {(0, 2): 80e3, (1, 2): 50e3, (2, 3): 130e3}
    assert traffic.node_input[2] == 130e3
    assert traffic.node_input[3] == 130e3


def test_traffic_map_conserves_flow_on_full_config():
    config = ExperimentConfig()
    scn = generate_scenario(config, seed=0)
    strat = update_routes(scn, mean_gains(scn),
                          {n: np.zeros(config.num_channels)
                           for n in scn.positions})
    traffic = traffic_map(strat, scn)
    generated = sum(scn.source_rates.values())
    assert traffic.node_input[scn.sink_id] == pytest.approx(generated, rel=1e-9)
    for n in scn.positions:
        if n == scn.sink_id or strat.next_hop[n] is None:
            continue
        outflow = traffic.link_rates.get((n, strat.next_hop[n]), 0.0)
        inflow = traffic.node_input[n] + scn.source_rates.get(n, 0.0)
        assert outflow == pytest.approx(inflow, rel=1e-9)


def test_traffic_map_rejects_routing_cycle():
    scn = line_scenario()
    strat = DefenderStrategy(next_hop={0: 1, 1: 0, 2: None}, alloc={},
                             delay_s={}, arrival_bps={})
    with pytest.raises(ValueError, match="cycle"):
        traffic_map(strat, scn)
