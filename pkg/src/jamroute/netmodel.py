"""Physical and link-layer model.

Positions, distance-power-law path loss, block Rayleigh fading (one realization
per strategy-updating period), per-channel SINR, Shannon-style link throughput,
and a single-server queueing delay per link. Everything here is a pure function
of immutable inputs; randomness enters only through explicitly seeded draws.

Units are SI throughout: meters, watts, Hz, bit/s, seconds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "ChannelModel",
    "Jammer",
    "Scenario",
    "LinkGains",
    "PowerAllocation",
    "path_gain",
    "link_throughput",
    "link_delay",
    "received_interference",
    "interference_at",
    "draw_gains",
    "mean_gains",
    "distance",
    "neighbors",
    "scenario_to_json",
    "scenario_from_json",
]


@dataclass(frozen=True)
class ChannelModel:
    """Channel bookkeeping shared by every link.

    ``noise_density_w_per_hz`` is the one-sided noise spectral density; the
    per-channel noise power is density x bandwidth (1e-8 W with the defaults).
    """

    num_channels: int = 10
    bandwidth_hz: float = 10e3
    path_loss_exponent: float = 3.0
    rayleigh_sigma: float = 0.5
    noise_density_w_per_hz: float = 1e-12
    packet_size_bits: int = 1000

    def __post_init__(self) -> None:
        if self.num_channels < 1:
            raise ValueError("num_channels must be >= 1")
        for name in ("bandwidth_hz", "path_loss_exponent", "rayleigh_sigma",
                     "noise_density_w_per_hz", "packet_size_bits"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def noise_watts(self) -> float:
        """Noise power per channel."""
        return self.noise_density_w_per_hz * self.bandwidth_hz

    @property
    def mean_fading(self) -> float:
        """Mean of the power-domain fading gain, 2*sigma^2."""
        return 2.0 * self.rayleigh_sigma**2


@dataclass(frozen=True)
class Jammer:
    position: tuple[float, float]
    power_budget_w: float
    enabled: bool = True


@dataclass(frozen=True)
class Scenario:
    """The world: topology, traffic endpoints, attacker placement, channel model.

    ``compromised_id`` is simulation ground truth; defender-side logic must not
    read it (only the attacker and the evaluation harness do).
    """

    nodes: tuple[tuple[int, tuple[float, float]], ...]
    sink_id: int
    source_rates: dict[int, float]  # node id -> mean generation rate, bit/s
    compromised_id: int
    jammer: Jammer
    channel: ChannelModel = field(default_factory=ChannelModel)
    rng_seed: int = 0
    comm_radius_m: float = 150.0
    area_m: float = 500.0

    def __post_init__(self) -> None:
        ids = {nid for nid, _ in self.nodes}
        if self.sink_id not in ids or self.compromised_id not in ids:
            raise ValueError("sink_id and compromised_id must be valid node ids")
        if self.compromised_id == self.sink_id:
            raise ValueError("compromised node cannot be the sink")
        for nid, (x, y) in self.nodes:
            if not (0.0 <= x <= self.area_m and 0.0 <= y <= self.area_m):
                raise ValueError(f"node {nid} outside the configured area")
        for nid, rate in self.source_rates.items():
            if nid not in ids:
                raise ValueError(f"source {nid} is not a node")
            if rate <= 0:
                raise ValueError("source rates must be > 0")

    @property
    def positions(self) -> dict[int, tuple[float, float]]:
        return dict(self.nodes)

    @property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(nid for nid, _ in self.nodes)

    def with_jammer(self, **changes) -> "Scenario":
        return replace(self, jammer=replace(self.jammer, **changes))


@dataclass(frozen=True)
class PowerAllocation:
    """Per-channel transmit power under a sum budget."""

    per_channel_w: tuple[float, ...]
    budget_w: float

    def __post_init__(self) -> None:
        if any(p < 0 for p in self.per_channel_w):
            raise ValueError("channel powers must be nonnegative")
        if sum(self.per_channel_w) > self.budget_w * (1 + 1e-9) + 1e-15:
            raise ValueError("allocation exceeds budget")

    @classmethod
    def zero(cls, num_channels: int, budget_w: float = 0.0) -> "PowerAllocation":
        return cls((0.0,) * num_channels, budget_w)

    @classmethod
    def uniform(cls, budget_w: float, num_channels: int) -> "PowerAllocation":
        return cls((budget_w / num_channels,) * num_channels, budget_w)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.per_channel_w, dtype=float)


class LinkGains:
    """Per-channel power gains for one strategy-updating period.

    ``node_pairs[(a, b)]`` holds the gain vector of the directed link a -> b for
    every in-range ordered pair; ``from_jammer[b]`` holds the jammer -> b vector.
    Realizations are deterministic in (scenario seed, period index).
    """

    def __init__(self, node_pairs: dict[tuple[int, int], np.ndarray],
                 from_jammer: dict[int, np.ndarray], period: int):
        self.node_pairs = node_pairs
        self.from_jammer = from_jammer
        self.period = period

    def link(self, src: int, dst: int) -> np.ndarray:
        return self.node_pairs[(src, dst)]

    def jammer(self, dst: int) -> np.ndarray:
        return self.from_jammer[dst]


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def neighbors(scenario: Scenario, node_id: int) -> list[int]:
    """Node ids within communication radius of ``node_id``, ascending."""
    pos = scenario.positions
    here = pos[node_id]
    return sorted(
        other for other, p in pos.items()
        if other != node_id and distance(here, p) <= scenario.comm_radius_m
    )


def path_gain(distance_m: float, fading: float, model: ChannelModel) -> float:
    """Power gain of a link: fading times the distance power law."""
    if distance_m <= 0:
        raise ValueError("co-located or negative-distance nodes are not allowed")
    return fading * distance_m ** (-model.path_loss_exponent)


def rayleigh_power_fading(rng: np.random.Generator, sigma: float, size) -> np.ndarray:
    # Rayleigh amplitude with scale sigma squares to an exponential power gain
    # with mean 2*sigma^2.
    return rng.exponential(2.0 * sigma * sigma, size)


def draw_gains(scenario: Scenario, period: int) -> LinkGains:
    """One block-fading realization of every in-range link and jammer path.

    Pairs are visited in sorted order so the stream layout, and therefore the
    realization, is reproducible for a given (seed, period).
    """
    rng = np.random.default_rng(np.random.SeedSequence((scenario.rng_seed, period)))
    model = scenario.channel
    pos = scenario.positions
    ids = sorted(pos)
    pairs: dict[tuple[int, int], np.ndarray] = {}
    for a in ids:
        for b in ids:
            if a == b:
                continue
            d = distance(pos[a], pos[b])
            if d > scenario.comm_radius_m:
                continue
            fading = rayleigh_power_fading(rng, model.rayleigh_sigma, model.num_channels)
            pairs[(a, b)] = fading * d ** (-model.path_loss_exponent)
    from_jammer: dict[int, np.ndarray] = {}
    for b in ids:
        d = distance(scenario.jammer.position, pos[b])
        fading = rayleigh_power_fading(rng, model.rayleigh_sigma, model.num_channels)
        from_jammer[b] = fading * d ** (-model.path_loss_exponent)
    return LinkGains(pairs, from_jammer, period)


def mean_gains(scenario: Scenario) -> LinkGains:
    """Fading replaced by its mean: the expected-gain world used for placement."""
    model = scenario.channel
    pos = scenario.positions
    ids = sorted(pos)
    f = np.full(model.num_channels, model.mean_fading)
    pairs = {}
    for a in ids:
        for b in ids:
            if a == b:
                continue
            d = distance(pos[a], pos[b])
            if d <= scenario.comm_radius_m:
                pairs[(a, b)] = f * d ** (-model.path_loss_exponent)
    from_jammer = {
        b: f * max(distance(scenario.jammer.position, pos[b]), 1e-9) ** (-model.path_loss_exponent)
        for b in ids
    }
    return LinkGains(pairs, from_jammer, period=-1)


def link_throughput(tx: PowerAllocation, gains_per_channel: np.ndarray,
                    interference_per_channel: np.ndarray, model: ChannelModel) -> float:
    """Sum over channels of W*log2(1 + P*H / (I + noise)), in bit/s."""
    p = tx.as_array()
    h = np.asarray(gains_per_channel, dtype=float)
    i = np.asarray(interference_per_channel, dtype=float)
    if np.any(i < 0):
        raise ValueError("interference must be nonnegative")
    sinr = p * h / (i + model.noise_watts)
    return float(model.bandwidth_hz * np.sum(np.log2(1.0 + sinr)))


def link_delay(throughput_bps: float, arrival_rate_bps: float, model: ChannelModel) -> float:
    """Single-server queueing delay in packet units; inf when unstable.

    Service rate mu and arrival rate lambda are in packets/s (packet size fixed
    by the channel model); the delay 1/(mu - lambda) is finite only for mu > lambda.
    """
    if arrival_rate_bps < 0:
        raise ValueError("arrival rate must be nonnegative")
    mu = throughput_bps / model.packet_size_bits
    lam = arrival_rate_bps / model.packet_size_bits
    if mu <= lam:
        return math.inf
    return 1.0 / (mu - lam)


def received_interference(jammer_alloc: PowerAllocation, gains: LinkGains,
                          at: int, channel: int) -> float:
    """Jamming power seen at a node on one channel: P_j * H_j.

    Legitimate links do not interfere with each other (orthogonal channels);
    only the jammer contributes.
    """
    h = gains.jammer(at)
    if not 0 <= channel < h.size:
        raise ValueError("channel index out of range")
    return float(jammer_alloc.per_channel_w[channel] * h[channel])


def interference_at(jammer_alloc: PowerAllocation | None, gains: LinkGains,
                    at: int, num_channels: int) -> np.ndarray:
    """All-channel interference vector at a node (zeros when the jammer is off)."""
    if jammer_alloc is None:
        return np.zeros(num_channels)
    return jammer_alloc.as_array() * gains.jammer(at)


def scenario_to_json(scenario: Scenario) -> str:
    doc = {
        "nodes": [[nid, [x, y]] for nid, (x, y) in scenario.nodes],
        "sink_id": scenario.sink_id,
        "source_rates": {str(k): v for k, v in sorted(scenario.source_rates.items())},
        "compromised_id": scenario.compromised_id,
        "jammer": {
            "position": list(scenario.jammer.position),
            "power_budget_w": scenario.jammer.power_budget_w,
            "enabled": scenario.jammer.enabled,
        },
        "channel": {
            "num_channels": scenario.channel.num_channels,
            "bandwidth_hz": scenario.channel.bandwidth_hz,
            "path_loss_exponent": scenario.channel.path_loss_exponent,
            "rayleigh_sigma": scenario.channel.rayleigh_sigma,
            "noise_density_w_per_hz": scenario.channel.noise_density_w_per_hz,
            "packet_size_bits": scenario.channel.packet_size_bits,
        },
        "rng_seed": scenario.rng_seed,
        "comm_radius_m": scenario.comm_radius_m,
        "area_m": scenario.area_m,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def scenario_from_json(text: str) -> Scenario:
    doc = json.loads(text)
    try:
        return Scenario(
            nodes=tuple((int(nid), (float(p[0]), float(p[1]))) for nid, p in doc["nodes"]),
            sink_id=int(doc["sink_id"]),
            source_rates={int(k): float(v) for k, v in doc["source_rates"].items()},
            compromised_id=int(doc["compromised_id"]),
            jammer=Jammer(
                position=tuple(doc["jammer"]["position"]),
                power_budget_w=float(doc["jammer"]["power_budget_w"]),
                enabled=bool(doc["jammer"]["enabled"]),
            ),
            channel=ChannelModel(**doc["channel"]),
            rng_seed=int(doc["rng_seed"]),
            comm_radius_m=float(doc["comm_radius_m"]),
            area_m=float(doc.get("area_m", 500.0)),
        )
    except KeyError as exc:
        raise ValueError(f"scenario document missing field {exc}") from exc
