"""Experiment orchestration: scenario generation, bit-event synthesis, the
detection and ROC studies, the mitigation trade-off sweep, and file output.

Every experiment is a pure function of (config, seeds): RNG streams are derived
from named seed tuples, outputs are written with fixed formatting, and reruns
are byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .attacker import NetworkState, run_iteration, select_target
from .defender import traffic_map, update_routes, waterfill
from .detection import (
    BerModel,
    BitEvent,
    ConvergenceConfig,
    InterferenceGrid,
    Posterior,
    TransmissionBatch,
    TransmissionContext,
    ber,
    run_detector,
)
from .mitigation import (
    MitigationParams,
    StrategyCandidate,
    _best_snc_split,
    choose_strategy,
    evaluate_h,
)
from .netmodel import (
    ChannelModel,
    Jammer,
    PowerAllocation,
    Scenario,
    distance,
    draw_gains,
    link_delay,
    mean_gains,
    neighbors,
    rayleigh_power_fading,
)

__all__ = [
    "ExperimentConfig",
    "RocCurve",
    "DetectionStudyResult",
    "generate_scenario",
    "victim_link",
    "synthesize_bits",
    "scenario_detection_study",
    "geometry_detection_study",
    "roc_sweep",
    "attack_gain_study",
    "ber_table",
    "collect_mitigation_traces",
    "tradeoff_study",
    "roc_curve_from_scores",
    "write_csv",
    "write_json",
]

# Canonical detection geometry: a relay watched by the detector, its preferred
# upstream transmitter, a nearer second upstream, and the jammer distance that
# every pinned interference number assumes.
GEOMETRY_TARGET_M = 130.0
GEOMETRY_NEIGHBOR_M = 45.0
GEOMETRY_JAMMER_M = 40.2


@dataclass(frozen=True)
class ExperimentConfig:
    """Defaults for the whole evaluation; every study reads from here."""

    num_nodes: int = 25
    area_m: float = 500.0
    num_sources: int = 5
    mean_source_rate_bps: float = 80e3
    node_budget_w: float = 1.0
    comm_radius_m: float = 150.0
    num_channels: int = 10
    bandwidth_hz: float = 10e3
    path_loss_exponent: float = 3.0
    rayleigh_sigma: float = 0.5
    noise_density_w_per_hz: float = 1e-12
    packet_size_bits: int = 1000
    jammer_distance_m: float = 40.2
    jammer_budget_sweep_mw: tuple[float, ...] = tuple(float(b) for b in range(10, 101, 10))
    grid_max_w: float = 1e-7
    grid_step_w: float = 1e-9
    ber_th_max: float = 0.5
    ber_th_step: float = 0.001
    alpha_beta_pairs: tuple[tuple[float, float], ...] = ((1.0, 0.0), (0.0, 1.0), (0.5, 0.5))
    seeds: tuple[int, ...] = tuple(range(20))
    k_bits_per_period: int = 10_000
    detection_periods: int = 250
    roc_periods: int = 40
    attack_periods: int = 60
    tradeoff_budgets_mw: tuple[float, ...] = (10.0, 100.0)
    p_th: float = 0.9
    min_channels_flagged: int = 1
    snc_epsilon: float = 0.1

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        for name in ("grid_step_w", "ber_th_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def channel(self) -> ChannelModel:
        return ChannelModel(
            num_channels=self.num_channels,
            bandwidth_hz=self.bandwidth_hz,
            path_loss_exponent=self.path_loss_exponent,
            rayleigh_sigma=self.rayleigh_sigma,
            noise_density_w_per_hz=self.noise_density_w_per_hz,
            packet_size_bits=self.packet_size_bits,
        )

    @property
    def grid(self) -> InterferenceGrid:
        return InterferenceGrid(0.0, self.grid_max_w, self.grid_step_w)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=list)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        known = set(cls.__dataclass_fields__)
        for key in doc:
            if key not in known:
                raise ValueError(f"unknown config field: {key}")
        for key in ("jammer_budget_sweep_mw", "seeds", "tradeoff_budgets_mw"):
            if key in doc:
                doc[key] = tuple(doc[key])
        if "alpha_beta_pairs" in doc:
            doc["alpha_beta_pairs"] = tuple(tuple(p) for p in doc["alpha_beta_pairs"])
        return cls(**doc)


@dataclass(frozen=True)
class RocCurve:
    points: tuple[tuple[float, float, float], ...]  # (threshold, tpr, fpr)
    auc: float


def _rng(*label) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(tuple(int(x) for x in label)))


# ---------------------------------------------------------------------------
# Scenario generation


def _connected(positions: np.ndarray, radius: float) -> bool:
    n = len(positions)
    seen = {0}
    frontier = [0]
    while frontier:
        a = frontier.pop()
        for b in range(n):
            if b not in seen and np.hypot(*(positions[a] - positions[b])) <= radius:
                seen.add(b)
                frontier.append(b)
    return len(seen) == n


def _placement_victim(scenario: Scenario) -> tuple[int, tuple[int, int]] | None:
    """The attacker's cheapest flip victim in the mean-fading world.

    Evaluated with the jammer co-located with the compromised node at full
    sweep power, which makes the answer independent of where the jammer
    finally ends up.
    """
    probe = replace(
        scenario,
        jammer=Jammer(position=scenario.positions[scenario.compromised_id],
                      power_budget_w=0.1, enabled=True),
    )
    gains = mean_gains(probe)
    zero_i = {n: np.zeros(probe.channel.num_channels) for n in probe.positions}
    strategy = update_routes(probe, gains, zero_i)
    traffic = traffic_map(strategy, probe)
    state = NetworkState(period=-1, gains=gains, strategy=strategy,
                         traffic=traffic, jam=None)
    return select_target(state, probe)


def generate_scenario(config: ExperimentConfig, seed: int) -> Scenario:
    """Random connected topology with sources on the left, sink on the right.

    Rejection-samples until the topology is connected, nodes are more than a
    meter apart, and the mean-fading world contains at least one route flip the
    attacker can afford; the jammer then sits at the configured distance from
    the victim link's receiver, on the side facing the victim transmitter.
    """
    rng = _rng(seed, 101)
    for _ in range(1000):
        positions = rng.uniform(0.0, config.area_m, size=(config.num_nodes, 2))
        d = np.sqrt(((positions[:, None, :] - positions[None, :, :]) ** 2).sum(-1))
        np.fill_diagonal(d, np.inf)
        if d.min() <= 1.0:
            continue
        if not _connected(positions, config.comm_radius_m):
            continue
        order = np.argsort(positions[:, 0])
        source_ids = [int(i) for i in order[:config.num_sources]]
        sink_id = int(order[-1])
        eligible = [i for i in range(config.num_nodes)
                    if i not in source_ids and i != sink_id]
        compromised = int(rng.choice(eligible))
        candidate = Scenario(
            nodes=tuple((i, (float(x), float(y))) for i, (x, y) in enumerate(positions)),
            sink_id=sink_id,
            source_rates={s: config.mean_source_rate_bps for s in source_ids},
            compromised_id=compromised,
            jammer=Jammer(position=(0.0, 0.0), power_budget_w=0.0, enabled=False),
            channel=config.channel,
            rng_seed=seed,
            comm_radius_m=config.comm_radius_m,
            area_m=config.area_m,
        )
        picked = _placement_victim(candidate)
        if picked is None:
            continue
        _, (v_tx, v_rx) = picked
        pos = candidate.positions
        jam_pos = _place_near(pos[v_rx], pos[v_tx], config.jammer_distance_m,
                              config.area_m)
        return replace(candidate, jammer=Jammer(position=jam_pos,
                                                power_budget_w=0.0, enabled=False))
    raise RuntimeError("could not generate a usable topology in 1000 attempts")


def _place_near(anchor: tuple[float, float], toward: tuple[float, float],
                dist_m: float, area_m: float) -> tuple[float, float]:
    """A point exactly ``dist_m`` from the anchor, preferring the direction of
    ``toward``; rotates until it lands inside the area."""
    base = math.atan2(toward[1] - anchor[1], toward[0] - anchor[0])
    for k in range(36):
        ang = base + k * (math.pi / 18.0)
        x = anchor[0] + dist_m * math.cos(ang)
        y = anchor[1] + dist_m * math.sin(ang)
        if 0.0 <= x <= area_m and 0.0 <= y <= area_m:
            return (x, y)
    raise RuntimeError("no in-area jammer position at the requested distance")


def victim_link(scenario: Scenario) -> tuple[int, int]:
    """The monitored link (transmitter, receiver) for detection studies."""
    picked = _placement_victim(scenario)
    if picked is None:
        raise ValueError("scenario has no flippable victim")
    return picked[1]


# ---------------------------------------------------------------------------
# Bit-event synthesis


def synthesize_bits(gammas, k: int, model: BerModel, rng: np.random.Generator,
                    period: int = 0) -> list[BitEvent]:
    """K independent bit outcomes per channel at the given true SINRs."""
    if k < 1:
        raise ValueError("k must be >= 1")
    g = np.atleast_1d(np.asarray(gammas, dtype=float))
    events: list[BitEvent] = []
    for ch, gamma in enumerate(g):
        p = ber(float(gamma), model)
        errs = rng.random(k) < p
        events.extend(BitEvent(correct=not e, channel=ch, period=period)
                      for e in errs)
    return events


# ---------------------------------------------------------------------------
# Detection studies


@dataclass(frozen=True)
class DetectionStudyResult:
    posteriors: dict[int, Posterior]
    n_incorrect: int
    n_total: int
    monitored_link: tuple[int, int] | None
    budget_mw: float

    @property
    def empirical_ber(self) -> float:
        return self.n_incorrect / self.n_total if self.n_total else 0.0


def _bench_batches(period: int, i_true: np.ndarray, tx_gains: Iterable[np.ndarray],
                   arrival_bps: float, model: ChannelModel, k_bits: int,
                   bit_rng: np.random.Generator, ber_model: BerModel,
                   budget_w: float = 1.0) -> list[TransmissionBatch]:
    """Waterfilled, feasibility-gated transmissions of one period.

    A transmitter only uses the link when the waterfilled capacity sustains its
    arrival rate; channels with zero allocated power produce no batches.
    """
    eta = model.noise_watts
    out: list[TransmissionBatch] = []
    for h in tx_gains:
        g_eff = h / (i_true + eta)
        if not np.any(g_eff > 0):
            continue
        p = waterfill(budget_w, g_eff)
        capacity = float(model.bandwidth_hz * np.sum(np.log2(1.0 + p * g_eff)))
        if capacity < arrival_bps:
            continue
        for f in np.nonzero(p > 0)[0]:
            gamma = p[f] * h[f] / (i_true[f] + eta)
            n_err = int(bit_rng.binomial(k_bits, ber(float(gamma), ber_model)))
            ctx = TransmissionContext(power_w=float(p[f]), gain=float(h[f]),
                                      noise_w=eta)
            out.append(TransmissionBatch(channel=int(f), period=period, ctx=ctx,
                                         n_incorrect=n_err,
                                         n_correct=k_bits - n_err))
    return out


_CONSUME_ALL = ConvergenceConfig(target_mass=None, max_events=None)


def scenario_detection_study(config: ExperimentConfig, scenario: Scenario,
                             budget_mw: float, periods: int | None = None,
                             rng_tag: int = 0,
                             monitored: tuple[int, int] | None = None) -> DetectionStudyResult:
    """Monitor the placement victim's receiver in a generated scenario.

    The detector watches the victim link and the receiver's nearest other
    in-range upstream; fading follows the scenario's own per-period streams,
    bits draw from a separate stream so jammed/unjammed runs differ only in
    the jamming.
    """
    periods = config.detection_periods if periods is None else periods
    model = scenario.channel
    v_tx, v_rx = victim_link(scenario) if monitored is None else monitored
    pos = scenario.positions
    others = [n for n in neighbors(scenario, v_rx) if n not in (v_tx, v_rx)]
    second = min(others, key=lambda n: distance(pos[n], pos[v_rx]), default=None)
    transmitters = [v_tx] + ([second] if second is not None else [])

    budget_w = budget_mw * 1e-3
    jam = (PowerAllocation.uniform(budget_w, model.num_channels) if budget_w > 0
           else None)
    bit_rng = _rng(scenario.rng_seed, 211, int(round(budget_mw * 1000)), rng_tag)
    batches: list[TransmissionBatch] = []
    n_err_total = n_total = 0
    for t in range(periods):
        gains = draw_gains(scenario, t)
        i_true = (jam.as_array() * gains.jammer(v_rx) if jam is not None
                  else np.zeros(model.num_channels))
        new = _bench_batches(t, i_true, (gains.link(tx, v_rx) for tx in transmitters),
                             config.mean_source_rate_bps, model,
                             config.k_bits_per_period, bit_rng, BerModel())
        batches.extend(new)
        n_err_total += sum(b.n_incorrect for b in new)
        n_total += sum(b.n_incorrect + b.n_correct for b in new)
    posteriors = run_detector(batches, config.grid, BerModel(), _CONSUME_ALL)
    return DetectionStudyResult(posteriors, n_err_total, n_total,
                                (v_tx, v_rx), budget_mw)


def geometry_detection_study(config: ExperimentConfig, budget_mw: float,
                             seed: int, periods: int | None = None) -> DetectionStudyResult:
    """The canonical fixed-distance bench behind the pinned posterior numbers.

    One receiver, a preferred transmitter 130 m out, a second upstream at 45 m,
    and the jammer at 40.2 m. No routing: just waterfilled, feasibility-gated
    transmissions under per-period Rayleigh fading.
    """
    periods = config.detection_periods if periods is None else periods
    model = config.channel
    budget_w = budget_mw * 1e-3
    per_ch = budget_w / model.num_channels
    rng = _rng(seed, 307, int(round(budget_mw * 1000)))
    exponent = model.path_loss_exponent
    batches: list[TransmissionBatch] = []
    n_err_total = n_total = 0
    for t in range(periods):
        jam_fade = rayleigh_power_fading(rng, model.rayleigh_sigma, model.num_channels)
        i_true = per_ch * jam_fade * GEOMETRY_JAMMER_M ** (-exponent)
        tx_gains = [
            rayleigh_power_fading(rng, model.rayleigh_sigma, model.num_channels)
            * d ** (-exponent)
            for d in (GEOMETRY_TARGET_M, GEOMETRY_NEIGHBOR_M)
        ]
        new = _bench_batches(t, i_true, tx_gains, config.mean_source_rate_bps,
                             model, config.k_bits_per_period, rng, BerModel())
        batches.extend(new)
        n_err_total += sum(b.n_incorrect for b in new)
        n_total += sum(b.n_incorrect + b.n_correct for b in new)
    posteriors = run_detector(batches, config.grid, BerModel(), _CONSUME_ALL)
    return DetectionStudyResult(posteriors, n_err_total, n_total, None, budget_mw)


# ---------------------------------------------------------------------------
# ROC


def _range_score(posteriors: dict[int, Posterior], p_th: float) -> float:
    """Largest lower bound at which some channel still holds p_th of its mass.

    The range classifier flags a channel when mass in [i_lwr, inf) reaches
    p_th; that is monotone in i_lwr, so each run reduces to this scalar score.
    """
    best = -math.inf
    for post in posteriors.values():
        cum = np.cumsum(post.mass[::-1])[::-1]  # mass at or above each grid point
        ok = np.nonzero(cum >= p_th)[0]
        if ok.size:
            best = max(best, float(post.grid.values[ok[-1]]))
    return best


def roc_curve_from_scores(pos_scores: Sequence[float], neg_scores: Sequence[float],
                          thresholds: Sequence[float]) -> RocCurve:
    """Flag-if-score>=threshold ROC with (0,0)/(1,1) anchors and trapezoid AUC."""
    pos = np.asarray(pos_scores, dtype=float)
    neg = np.asarray(neg_scores, dtype=float)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("degenerate sweep: need both classes")
    pts = []
    for th in thresholds:
        tpr = float(np.mean(pos >= th))
        fpr = float(np.mean(neg >= th))
        pts.append((float(th), tpr, fpr))
    xs = [0.0] + sorted(p[2] for p in pts) + [1.0]
    ys = [0.0] + [y for _, y in sorted(((p[2], p[1]) for p in pts))] + [1.0]
    auc = float(np.trapezoid(ys, xs))
    return RocCurve(points=tuple(pts), auc=auc)


def roc_sweep(config: ExperimentConfig) -> tuple[RocCurve, RocCurve]:
    """Jammed-vs-clean classification across topologies and budgets.

    For every (seed, budget) pair one jammed and one clean run are scored by
    the posterior-range statistic and by the empirical BER; both detectors are
    swept over their threshold ranges on the same runs.
    """
    pos_range, neg_range, pos_ber, neg_ber = [], [], [], []
    for seed in config.seeds:
        scenario = generate_scenario(config, seed)
        link = victim_link(scenario)
        for budget in config.jammer_budget_sweep_mw:
            jammed = scenario_detection_study(config, scenario, budget,
                                              config.roc_periods, rng_tag=1,
                                              monitored=link)
            clean = scenario_detection_study(config, scenario, 0.0,
                                             config.roc_periods,
                                             rng_tag=int(round(budget)),
                                             monitored=link)
            pos_range.append(_range_score(jammed.posteriors, config.p_th))
            neg_range.append(_range_score(clean.posteriors, config.p_th))
            pos_ber.append(jammed.empirical_ber)
            neg_ber.append(clean.empirical_ber)
    if len(set(pos_range + neg_range)) < 2:
        raise ValueError("degenerate sweep: all runs scored identically")
    grid_thresholds = config.grid.values
    ber_thresholds = np.arange(0.0, config.ber_th_max + config.ber_th_step / 2,
                               config.ber_th_step)
    proposed = roc_curve_from_scores(pos_range, neg_range, grid_thresholds)
    baseline = roc_curve_from_scores(pos_ber, neg_ber, ber_thresholds)
    return proposed, baseline


# ---------------------------------------------------------------------------
# Attack efficacy, BER table, mitigation traces


def attack_gain_study(config: ExperimentConfig, budget_mw: float,
                      seeds: Sequence[int] | None = None) -> dict[int, tuple[float, float]]:
    """Per seed: (mean compromised-node input with jamming, without)."""
    out: dict[int, tuple[float, float]] = {}
    for seed in (config.seeds if seeds is None else seeds):
        scenario = generate_scenario(config, seed)
        jammed = scenario.with_jammer(power_budget_w=budget_mw * 1e-3, enabled=True)
        clean = scenario.with_jammer(power_budget_w=0.0, enabled=False)
        _, with_jam = run_iteration(jammed, config.attack_periods)
        _, without = run_iteration(clean, config.attack_periods)
        out[seed] = (with_jam.attack_gain_bps, without.attack_gain_bps)
    return out


def ber_table(config: ExperimentConfig, seed: int,
              budgets_mw: Sequence[float] = (0.0, 10.0, 100.0)) -> dict[float, float]:
    """Empirical BER at the victim receiver across a full attack run.

    Counts every transmission the receiver sees (all upstream links, all
    periods), so post-flip periods where the jammed link went quiet still
    contribute through the remaining traffic.
    """
    scenario = generate_scenario(config, seed)
    _, v_rx = victim_link(scenario)
    model = scenario.channel
    out: dict[float, float] = {}
    for budget in budgets_mw:
        run_scn = scenario.with_jammer(power_budget_w=budget * 1e-3,
                                       enabled=budget > 0)
        history, _ = run_iteration(run_scn, config.attack_periods)
        bit_rng = _rng(seed, 499, int(round(budget * 1000)))
        n_err = n_tot = 0
        for state in history:
            jam_alloc = state.jam.alloc.as_array() if state.jam is not None else None
            i_rx = (jam_alloc * state.gains.jammer(v_rx) if jam_alloc is not None
                    else np.zeros(model.num_channels))
            for (src, dst) in sorted(state.traffic.link_rates):
                if dst != v_rx:
                    continue
                alloc = state.strategy.alloc.get(src)
                if alloc is None:
                    continue
                p = alloc.as_array()
                h = state.gains.link(src, v_rx)
                for f in np.nonzero(p > 0)[0]:
                    gamma = p[f] * h[f] / (i_rx[f] + model.noise_watts)
                    k = config.k_bits_per_period
                    n_err += int(bit_rng.binomial(k, ber(float(gamma), BerModel())))
                    n_tot += k
        out[budget] = n_err / n_tot if n_tot else 0.0
    return out


@dataclass(frozen=True)
class MitigationTrace:
    seed: int
    budget_mw: float
    period: int
    t_l_s: float  # best alternative path (the one the attacker steers toward)
    t_m_s: float  # staying on the jammed link
    lam_msgs_per_s: float


def collect_mitigation_traces(config: ExperimentConfig,
                              seeds: Sequence[int] | None = None) -> list[MitigationTrace]:
    """Jammed-victim decision instances harvested from attack runs.

    A trace needs both options finite: the jammed link must still be usable
    (T_m finite) and an alternative route must exist (T_l finite). The message
    rate is the victim's carried traffic in packets/s.
    """
    traces: list[MitigationTrace] = []
    for seed in (config.seeds if seeds is None else seeds):
        scenario = generate_scenario(config, seed)
        for budget in config.tradeoff_budgets_mw:
            jammed_scn = scenario.with_jammer(power_budget_w=budget * 1e-3,
                                              enabled=True)
            history, _ = run_iteration(jammed_scn, config.attack_periods)
            for state in history:
                trace = _trace_from_state(scenario, state, seed, budget)
                if trace is not None:
                    traces.append(trace)
    return traces


def _trace_from_state(scenario: Scenario, state: NetworkState, seed: int,
                      budget_mw: float) -> MitigationTrace | None:
    if state.jam is None:
        return None
    victim, jammed_hop = state.jam.target_link
    model = scenario.channel
    arrival = state.strategy.arrival_bps.get(victim, 0.0)
    if arrival <= 0:
        return None
    jam_vec = state.jam.alloc.as_array()

    def total_delay(hop: int) -> float:
        t_hop = state.strategy.delay_s.get(hop, math.inf)
        if math.isinf(t_hop):
            return math.inf
        i_rx = jam_vec * state.gains.jammer(hop)
        g_eff = state.gains.link(victim, hop) / (i_rx + model.noise_watts)
        if not np.any(g_eff > 0):
            return math.inf
        p = waterfill(1.0, g_eff)
        thr = float(model.bandwidth_hz * np.sum(np.log2(1.0 + p * g_eff)))
        return link_delay(thr, arrival, model) + t_hop

    t_m = total_delay(jammed_hop)
    alts = [total_delay(l) for l in neighbors(scenario, victim) if l != jammed_hop]
    alts = [t for t in alts if math.isfinite(t)]
    if not alts or not math.isfinite(t_m):
        return None
    return MitigationTrace(seed, budget_mw, state.period, min(alts), t_m,
                           arrival / model.packet_size_bits)


@dataclass(frozen=True)
class TradeoffRow:
    alpha: float
    beta: float
    h_reroute: float
    h_stay: float
    h_snc: float
    chosen: str


def tradeoff_study(config: ExperimentConfig,
                   traces: Sequence[MitigationTrace] | None = None) -> list[TradeoffRow]:
    """Score every candidate on every trace for each (alpha, beta) pair."""
    if traces is None:
        traces = collect_mitigation_traces(config)
    if not traces:
        raise ValueError("no jammed traces available for the trade-off study")
    rows: list[TradeoffRow] = []
    for alpha, beta in config.alpha_beta_pairs:
        for tr in traces:
            params = MitigationParams(alpha=alpha, beta=beta,
                                      epsilon=config.snc_epsilon,
                                      lam_msgs_per_s=tr.lam_msgs_per_s)
            chosen = choose_strategy(tr.t_l_s, tr.t_m_s, params)
            by_kind = _all_h(tr, params)
            rows.append(TradeoffRow(alpha, beta, by_kind["reroute_l"],
                                    by_kind["stay_m"], by_kind["snc"], chosen.kind))
    return rows


def _all_h(tr: MitigationTrace, params: MitigationParams) -> dict[str, float]:
    n_l, n_m, t_snc = _best_snc_split(tr.t_l_s, tr.t_m_s, params.lam_msgs_per_s, 16)
    raw = [
        StrategyCandidate("reroute_l", tr.t_l_s, 1.0),
        StrategyCandidate("stay_m", tr.t_m_s, params.epsilon),
        StrategyCandidate("snc", t_snc, 0.0, n_l=n_l, n_m=n_m),
    ]
    t_max = max(c.delay_s for c in raw)
    return {c.kind: evaluate_h(c, params, t_max).h for c in raw}


# ---------------------------------------------------------------------------
# Output files


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_posteriors(out_dir: Path, label: str,
                     posteriors: dict[int, Posterior]) -> list[Path]:
    paths = []
    for ch in sorted(posteriors):
        post = posteriors[ch]
        p = out_dir / f"posterior_{label}_{ch}.csv"
        write_csv(p, ("interference_watts", "mass"),
                  zip(post.grid.values.tolist(), post.mass.tolist()))
        paths.append(p)
    return paths


def write_roc(out_dir: Path, proposed: RocCurve, baseline: RocCurve) -> None:
    write_csv(out_dir / "roc_proposed.csv", ("threshold", "tpr", "fpr"),
              proposed.points)
    write_csv(out_dir / "roc_ber.csv", ("threshold", "tpr", "fpr"),
              baseline.points)


def write_tradeoff(out_dir: Path, rows: Sequence[TradeoffRow]) -> None:
    write_csv(out_dir / "tradeoff.csv",
              ("alpha", "beta", "h_Sl", "h_Sm", "h_SNC", "chosen"),
              ((r.alpha, r.beta, r.h_reroute, r.h_stay, r.h_snc, r.chosen)
               for r in rows))


def write_traffic(out_dir: Path, label: str, link_rates: dict) -> Path:
    p = out_dir / f"traffic_{label}.csv"
    write_csv(p, ("src", "dst", "rate_bps"),
              ((a, b, r) for (a, b), r in sorted(link_rates.items())))
    return p


def write_traces(out_dir: Path, history: Sequence[NetworkState],
                 scenario: Scenario) -> Path:
    p = out_dir / "traces.jsonl"
    lines = []
    for state in history:
        doc = {
            "period": state.period,
            "target_link": list(state.jam.target_link) if state.jam else None,
            "P_j": list(state.jam.alloc.per_channel_w) if state.jam else None,
            "attack_gain": state.traffic.node_input.get(scenario.compromised_id, 0.0),
        }
        lines.append(json.dumps(doc, sort_keys=True))
    p.write_text("\n".join(lines) + "\n")
    return p
