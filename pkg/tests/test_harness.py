"""Tests for scenario generation, studies, and output files."""
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from jamroute.attacker import run_iteration
from jamroute.detection import BerModel, InterferenceGrid, Posterior
from jamroute.harness import (
    ExperimentConfig,
    RocCurve,
    TradeoffRow,
    attack_gain_study,
    collect_mitigation_traces,
    generate_scenario,
    geometry_detection_study,
    roc_curve_from_scores,
    scenario_detection_study,
    synthesize_bits,
    tradeoff_study,
    victim_link,
    write_csv,
    write_json,
    write_posteriors,
    write_roc,
    write_tradeoff,
    write_traces,
    write_traffic,
)
from jamroute.netmodel import distance, scenario_to_json

CONFIG = ExperimentConfig()


@pytest.fixture(scope="module")
def scenario():
    return generate_scenario(CONFIG, 0)


# configuration

def test_config_json_round_trip():
    cfg = replace(CONFIG, seeds=(3, 4), p_th=0.8)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg


def test_config_rejects_unknown_field():
    with pytest.raises(ValueError, match="num_jammers"):
        ExperimentConfig.from_json('{"num_jammers": 2}')


def test_config_validates_steps_and_seeds():
    with pytest.raises(ValueError, match="grid_step_w"):
        ExperimentConfig(grid_step_w=0.0)
    with pytest.raises(ValueError, match="seeds"):
        ExperimentConfig(seeds=())


# scenario generation

def test_generation_is_deterministic(scenario):
    again = generate_scenario(CONFIG, 0)
    assert scenario_to_json(again) == scenario_to_json(scenario)


def test_roles_follow_the_left_to_right_layout(scenario):
    pos = scenario.positions
    by_x = sorted(range(CONFIG.num_nodes), key=lambda i: pos[i][0])
    assert set(scenario.source_rates) == set(by_x[: CONFIG.num_sources])
    assert scenario.sink_id == by_x[-1]
    assert scenario.compromised_id not in scenario.source_rates
    assert scenario.compromised_id != scenario.sink_id


def test_topology_is_connected_and_spread_out(scenario):
    pos = scenario.positions
    n = CONFIG.num_nodes
    assert all(0.0 <= c <= CONFIG.area_m for p in pos.values() for c in p)
    assert min(
        distance(pos[i], pos[j]) for i in range(n) for j in range(i + 1, n)
    ) > 1.0
    seen, todo = {0}, [0]
    while todo:
        u = todo.pop()
        for v in range(n):
            if v not in seen and v != u and distance(pos[u], pos[v]) <= CONFIG.comm_radius_m:
                seen.add(v)
                todo.append(v)
    assert len(seen) == n


def test_jammer_sits_at_the_configured_distance(scenario):
    tx, rx = victim_link(scenario)
    assert victim_link(scenario) == (tx, rx)
    assert tx != rx
    d = distance(scenario.jammer.position, scenario.positions[rx])
    assert abs(d - CONFIG.jammer_distance_m) < 1e-6
    assert not scenario.jammer.enabled


def test_different_seeds_give_different_worlds():
    a = generate_scenario(CONFIG, 0)
    b = generate_scenario(CONFIG, 1)
    assert scenario_to_json(a) != scenario_to_json(b)


# bit synthesis

def test_synthesized_bits_match_the_error_rate():
    rng = np.random.default_rng(5)
    events = synthesize_bits([0.0], 1_000_000, BerModel("bpsk"), rng)
    errors = sum(1 for e in events if not e.correct)
    assert errors == 499_504  # p = 0.5 at zero SINR
    assert abs(errors - 500_000) < 1_500


def test_synthesized_bits_tag_channels_and_respect_snr():
    events = synthesize_bits([0.0, 1e6], 100, BerModel("bpsk"),
                             np.random.default_rng(5))
    assert {e.channel for e in events} == {0, 1}
    assert all(e.correct for e in events if e.channel == 1)


def test_synthesize_bits_is_seeded():
    a = synthesize_bits([1.0], 500, BerModel("bpsk"), np.random.default_rng(9))
    b = synthesize_bits([1.0], 500, BerModel("bpsk"), np.random.default_rng(9))
    assert [e.correct for e in a] == [e.correct for e in b]
    with pytest.raises(ValueError, match="k"):
        synthesize_bits([1.0], 0, BerModel("bpsk"), np.random.default_rng(0))


# ROC assembly

def test_roc_endpoints_anchor_the_curve():
    rng = np.random.default_rng(123)
    scores = rng.random(400)
    curve = roc_curve_from_scores(scores[:200], scores[200:], np.linspace(0, 1, 101))
    assert curve.points[0] == (0.0, 1.0, 1.0)
    assert curve.points[-1] == (1.0, 0.0, 0.0)
    assert curve.auc == pytest.approx(0.4794125)
    assert 0.45 < curve.auc < 0.55  # shuffled scores carry no signal


def test_roc_separable_scores_reach_full_area():
    curve = roc_curve_from_scores([0.8, 0.9], [0.1, 0.2], np.linspace(0, 1, 11))
    assert curve.auc == pytest.approx(1.0)


def test_roc_requires_both_classes():
    with pytest.raises(ValueError, match="both classes"):
        roc_curve_from_scores([], [0.1], [0.5])


# detection studies

def test_scenario_study_monitors_the_victim_link(scenario):
    tiny = replace(CONFIG, detection_periods=3, k_bits_per_period=400)
    jammed = scenario_detection_study(tiny, scenario, 100.0)
    assert jammed.monitored_link == victim_link(scenario)
    assert jammed.budget_mw == 100.0
    assert jammed.n_total == 16_000
    assert 0.0 <= jammed.empirical_ber <= 1.0
    assert set(jammed.posteriors) <= set(range(CONFIG.num_channels))
    for post in jammed.posteriors.values():
        assert post.mass.sum() == pytest.approx(1.0)


def test_scenario_study_is_deterministic(scenario):
    tiny = replace(CONFIG, detection_periods=2, k_bits_per_period=300)
    a = scenario_detection_study(tiny, scenario, 50.0)
    b = scenario_detection_study(tiny, scenario, 50.0)
    assert a.n_incorrect == b.n_incorrect
    for ch in a.posteriors:
        assert np.array_equal(a.posteriors[ch].mass, b.posteriors[ch].mass)


def test_geometry_study_runs_without_a_topology():
    tiny = replace(CONFIG, detection_periods=3, k_bits_per_period=400)
    geo = geometry_detection_study(tiny, 100.0, seed=0)
    assert geo.monitored_link is None
    assert geo.n_total == 11_200
    assert set(geo.posteriors) <= set(range(CONFIG.num_channels))


# attack and mitigation studies

def test_attack_gain_study_reports_both_arms():
    cfg = replace(CONFIG, attack_periods=10)
    gains = attack_gain_study(cfg, 10.0, seeds=[1])
    assert set(gains) == {1}
    jammed, clean = gains[1]
    assert jammed == pytest.approx(176_000.0)
    assert clean == pytest.approx(128_000.0)
    assert jammed > clean


def test_tradeoff_rows_cover_every_pair_and_trace():
    cfg = replace(CONFIG, seeds=(0, 1), tradeoff_budgets_mw=(10.0,),
                  attack_periods=30)
    traces = collect_mitigation_traces(cfg)
    assert len(traces) == 2
    assert all(math.isfinite(t.t_l_s) and math.isfinite(t.t_m_s) for t in traces)
    assert all(t.lam_msgs_per_s > 0 for t in traces)
    rows = tradeoff_study(cfg, traces)
    assert len(rows) == len(cfg.alpha_beta_pairs) * len(traces)
    for row in rows:
        assert row.chosen in ("reroute_l", "stay_m", "snc")
        for h in (row.h_reroute, row.h_stay, row.h_snc):
            assert -(row.alpha + row.beta) - 1e-9 <= h <= 1e-12
    risk_only = [r for r in rows if (r.alpha, r.beta) == (0.0, 1.0)]
    assert risk_only and all(r.chosen == "snc" for r in risk_only)


def test_tradeoff_study_rejects_empty_traces():
    with pytest.raises(ValueError, match="no jammed traces"):
        tradeoff_study(CONFIG, traces=[])


# output files

def test_csv_and_json_writers_are_deterministic(tmp_path):
    rows = [(1, 2.5, "x"), (3, 0.1234567890123, "y")]
    for name in ("a.csv", "b.csv"):
        write_csv(tmp_path / name, ("i", "v", "tag"), rows)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    text = (tmp_path / "a.csv").read_text()
    assert text.splitlines()[0] == "i,v,tag"

    for name in ("a.json", "b.json"):
        write_json(tmp_path / name, {"z": 1, "a": [2, 3]})
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert json.loads((tmp_path / "a.json").read_text()) == {"z": 1, "a": [2, 3]}


def test_posterior_files_one_per_channel(tmp_path):
    grid = InterferenceGrid(0.0, 4e-9, 1e-9)
    mass = np.full(grid.size, 1.0 / grid.size)
    posteriors = {2: Posterior(grid, mass, 10), 0: Posterior(grid, mass, 5)}
    paths = write_posteriors(tmp_path, "jam", posteriors)
    assert [p.name for p in paths] == ["posterior_jam_0.csv", "posterior_jam_2.csv"]
    lines = paths[0].read_text().splitlines()
    assert lines[0] == "interference_watts,mass"
    assert len(lines) == 1 + grid.size


def test_roc_and_tradeoff_files(tmp_path):
    curve = RocCurve(points=((0.0, 1.0, 1.0), (1.0, 0.0, 0.0)), auc=0.5)
    write_roc(tmp_path, curve, curve)
    assert (tmp_path / "roc_proposed.csv").exists()
    assert (tmp_path / "roc_ber.csv").exists()
    write_tradeoff(tmp_path, [TradeoffRow(1.0, 0.0, -0.1, -0.2, -0.3, "reroute_l")])
    lines = (tmp_path / "tradeoff.csv").read_text().splitlines()
    assert lines[0] == "alpha,beta,h_Sl,h_Sm,h_SNC,chosen"
    assert lines[1].endswith("reroute_l")


def test_traffic_file_sorted_by_link(tmp_path):
    p = write_traffic(tmp_path, "clean", {(3, 1): 10.0, (0, 2): 5.0})
    assert p.read_text() == "src,dst,rate_bps\n0,2,5\n3,1,10\n"


def test_trace_file_is_one_json_object_per_period(tmp_path, scenario):
    jammed = scenario.with_jammer(power_budget_w=0.01, enabled=True)
    history, _ = run_iteration(jammed, 2)
    p = write_traces(tmp_path, history, scenario)
    docs = [json.loads(line) for line in p.read_text().splitlines()]
    assert [d["period"] for d in docs] == [0, 1]
    for doc in docs:
        assert set(doc) == {"period", "target_link", "P_j", "attack_gain"}
        assert doc["attack_gain"] >= 0.0
