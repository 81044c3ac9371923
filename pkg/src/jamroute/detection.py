"""Bayesian interference estimation from bit-level reception outcomes.

A receiver watches per-channel bit errors, knows the transmit power and channel
gain of each transmission (channel estimation), and maintains a discrete
posterior over a grid of candidate interference levels. A range classifier on
the posterior decides jammed / not jammed; an empirical-BER threshold and an
interference-to-noise-ratio test serve as baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares
from scipy.special import erfc

__all__ = [
    "InterferenceGrid",
    "Posterior",
    "BitEvent",
    "BerModel",
    "TransmissionContext",
    "TransmissionBatch",
    "ConvergenceConfig",
    "ClassifierConfig",
    "ber",
    "fit_ber_curve",
    "log_likelihood",
    "posterior_update",
    "run_detector",
    "classify",
    "classify_ber",
]


@dataclass(frozen=True)
class InterferenceGrid:
    """Candidate interference levels in watts: min, max inclusive, fixed step."""

    min_w: float = 0.0
    max_w: float = 1e-7
    step_w: float = 1e-9

    def __post_init__(self) -> None:
        if self.step_w <= 0 or self.max_w <= self.min_w:
            raise ValueError("grid must be strictly increasing")
        if self.min_w > 0:
            raise ValueError("grid must include zero interference")

    @property
    def values(self) -> np.ndarray:
        n = int(round((self.max_w - self.min_w) / self.step_w)) + 1
        return self.min_w + self.step_w * np.arange(n)

    @property
    def size(self) -> int:
        return int(round((self.max_w - self.min_w) / self.step_w)) + 1


@dataclass(frozen=True, eq=False)
class Posterior:
    grid: InterferenceGrid
    mass: np.ndarray
    event_count: int = 0

    def __post_init__(self) -> None:
        m = np.asarray(self.mass, dtype=float)
        if m.shape != (self.grid.size,):
            raise ValueError("mass length must match the grid")
        if np.any(m < 0) or abs(m.sum() - 1.0) > 1e-12:
            raise ValueError("mass must be a distribution (sum 1 within 1e-12)")
        object.__setattr__(self, "mass", m)

    @classmethod
    def uniform(cls, grid: InterferenceGrid) -> "Posterior":
        n = grid.size
        return cls(grid, np.full(n, 1.0 / n), 0)

    @property
    def mode_w(self) -> float:
        return float(self.grid.values[int(np.argmax(self.mass))])

    @property
    def max_mass(self) -> float:
        return float(self.mass.max())

    def mass_in(self, lo_w: float, hi_w: float) -> float:
        v = self.grid.values
        return float(self.mass[(v >= lo_w) & (v <= hi_w)].sum())


@dataclass(frozen=True)
class BitEvent:
    correct: bool
    channel: int = 0
    period: int = 0


@dataclass(frozen=True)
class BerModel:
    """SINR -> bit error probability.

    ``bpsk`` is the coherent analytic curve Q(sqrt(2*gamma)); ``expfit`` is the
    trained curve a*exp(-b*gamma) + floor, clamped into [0, 0.5]. The floor
    captures the irreducible error rate seen in measured traces.
    """

    variant: str = "bpsk"
    a: float = 0.0
    b: float = 0.0
    floor: float = 0.0

    def __post_init__(self) -> None:
        if self.variant not in ("bpsk", "expfit"):
            raise ValueError("variant must be 'bpsk' or 'expfit'")


def ber(gamma, model: BerModel = BerModel()):
    """Bit error probability at linear SINR ``gamma`` (scalar or array)."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("SINR must be nonnegative")
    if model.variant == "bpsk":
        # Q(sqrt(2g)) written via erfc: Q(x) = erfc(x/sqrt(2))/2.
        out = 0.5 * erfc(np.sqrt(g))
    else:
        out = np.clip(model.a * np.exp(-model.b * g) + model.floor, 0.0, 0.5)
    return float(out) if np.isscalar(gamma) else out


def fit_ber_curve(samples: Sequence[tuple[float, float]]) -> BerModel:
    """Least-squares exponential fit of measured (SINR, BER) points.

    Residuals are taken in the log domain so the fit tracks the curve in
    relative terms across its whole dynamic range (a linear-domain fit ignores
    the tail entirely). Requires at least 3 points spanning 10 dB of SINR.
    """
    pts = [(float(g), float(e)) for g, e in samples]
    if len(pts) < 3:
        raise ValueError("need at least 3 samples")
    gs = np.array([g for g, _ in pts])
    es = np.array([e for _, e in pts])
    if np.all(gs == gs[0]):
        raise ValueError("degenerate samples: all SINRs equal")
    g_pos = gs[gs > 0]
    if g_pos.size < 2 or 10.0 * math.log10(g_pos.max() / g_pos.min()) < 10.0 - 1e-9:
        raise ValueError("samples must span at least 10 dB of SINR")

    def resid(p):
        pred = np.clip(p[0] * np.exp(-p[1] * gs) + p[2], 1e-300, None)
        return np.log(pred) - np.log(np.clip(es, 1e-300, None))

    sol = least_squares(resid, x0=(0.5, 1.0, 1e-6),
                        bounds=([0.0, 0.0, 0.0], [1.0, 50.0, 0.5]),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    a, b, floor = (float(v) for v in sol.x)
    return BerModel(variant="expfit", a=a, b=b, floor=floor)


@dataclass(frozen=True)
class TransmissionContext:
    """What the receiver knows about one transmission: P, H, and noise power."""

    power_w: float
    gain: float
    noise_w: float

    def sinr(self, interference_w) -> np.ndarray:
        return self.power_w * self.gain / (np.asarray(interference_w, dtype=float)
                                           + self.noise_w)


def _event_counts(events: Iterable[BitEvent]) -> tuple[int, int]:
    n_err = n_ok = 0
    for e in events:
        if e.correct:
            n_ok += 1
        else:
            n_err += 1
    return n_err, n_ok


def _log_likelihood_counts(n_err: int, n_ok: int, i_w, ctx: TransmissionContext,
                           model: BerModel) -> np.ndarray:
    """Vectorized over candidate interference values."""
    p = np.asarray(ber(ctx.sinr(i_w), model), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ll = np.where(n_err > 0, n_err * np.log(p), 0.0)
        ll = ll + np.where(n_ok > 0, n_ok * np.log1p(-np.minimum(p, 1.0)), 0.0)
    return ll


def log_likelihood(events: Sequence[BitEvent], i: float, ctx: TransmissionContext,
                   model: BerModel = BerModel()) -> float:
    """Log probability of the bit outcomes at candidate interference ``i``.

    Computed in the log domain; an impossible outcome (error with BER exactly
    zero) yields -inf, which normalizes to zero mass downstream.
    """
    if not events:
        raise ValueError("events must be nonempty")
    if ctx.power_w * ctx.gain <= 0:
        raise ValueError("transmission must have positive P*H")
    n_err, n_ok = _event_counts(events)
    return float(_log_likelihood_counts(n_err, n_ok, i, ctx, model))


def posterior_update(prior: Posterior, events: Sequence[BitEvent],
                     ctx: TransmissionContext, model: BerModel = BerModel()) -> Posterior:
    """One Bayes step over the whole grid; no events returns the prior as-is."""
    if not events:
        return prior
    n_err, n_ok = _event_counts(events)
    return _posterior_update_counts(prior, n_err, n_ok, ctx, model)


def _posterior_update_counts(prior: Posterior, n_err: int, n_ok: int,
                             ctx: TransmissionContext, model: BerModel) -> Posterior:
    if n_err == 0 and n_ok == 0:
        return prior
    values = prior.grid.values
    with np.errstate(divide="ignore"):
        lp = np.log(prior.mass) + _log_likelihood_counts(n_err, n_ok, values, ctx, model)
    top = lp.max()
    if not np.isfinite(top):
        raise ValueError("model inconsistency: zero likelihood on the whole grid")
    mass = np.exp(lp - top)
    mass /= mass.sum()
    return Posterior(prior.grid, mass, prior.event_count + n_err + n_ok)


@dataclass(frozen=True)
class TransmissionBatch:
    """Bit outcomes of one (period, channel) transmission with its context."""

    channel: int
    period: int
    ctx: TransmissionContext
    n_incorrect: int
    n_correct: int

    @classmethod
    def from_events(cls, channel: int, period: int, ctx: TransmissionContext,
                    events: Sequence[BitEvent]) -> "TransmissionBatch":
        n_err, n_ok = _event_counts(events)
        return cls(channel, period, ctx, n_err, n_ok)


@dataclass(frozen=True)
class ConvergenceConfig:
    """Stop rule for the detector loop.

    ``target_mass`` of None disables the confidence stop (consume everything);
    ``max_events`` of None removes the event budget.
    """

    target_mass: float | None = 0.99
    max_events: int | None = 100_000


def run_detector(batches: Iterable[TransmissionBatch],
                 grid: InterferenceGrid = InterferenceGrid(),
                 model: BerModel = BerModel(),
                 convergence: ConvergenceConfig = ConvergenceConfig(),
                 ) -> dict[int, Posterior]:
    """Sequential per-channel posterior updates over an event-batch stream.

    Channels start from the uniform prior and only ever see batches addressed
    to them (transmissions with zero power on a channel produce no batch). A
    channel stops consuming once its posterior max mass reaches the convergence
    target or its event budget is spent; an empty stream returns priors.
    """
    posteriors: dict[int, Posterior] = {}
    done: set[int] = set()
    for batch in batches:
        ch = batch.channel
        post = posteriors.get(ch)
        if post is None:
            post = Posterior.uniform(grid)
            posteriors[ch] = post
        if ch in done:
            continue
        post = _posterior_update_counts(post, batch.n_incorrect, batch.n_correct,
                                        batch.ctx, model)
        posteriors[ch] = post
        if convergence.target_mass is not None and post.max_mass >= convergence.target_mass:
            done.add(ch)
        elif convergence.max_events is not None and post.event_count >= convergence.max_events:
            done.add(ch)
    return posteriors


@dataclass(frozen=True)
class ClassifierConfig:
    """Decision rule over per-channel posteriors (or raw error counts).

    variants: ``interference-range`` flags a channel when the posterior mass
    inside [i_lwr, i_upp] reaches p_th; ``ber-threshold`` compares the empirical
    BER; ``inr-threshold`` tests P{I/noise > inr_th} > p_th.
    """

    i_lwr_w: float = 1e-9
    i_upp_w: float = math.inf
    p_th: float = 0.9
    min_channels_flagged: int = 1
    variant: str = "interference-range"
    inr_th: float = 1.0  # linear, 0 dB

    def __post_init__(self) -> None:
        if self.i_lwr_w > self.i_upp_w:
            raise ValueError("i_lwr must not exceed i_upp")
        if not 0.0 <= self.p_th <= 1.0:
            raise ValueError("p_th must lie in [0, 1]")


def classify(posteriors: dict[int, Posterior], cfg: ClassifierConfig) -> bool:
    """True when the link is called jammed under the configured rule."""
    flagged = 0
    for post in posteriors.values():
        if cfg.variant == "interference-range":
            hit = post.mass_in(cfg.i_lwr_w, cfg.i_upp_w) >= cfg.p_th
        elif cfg.variant == "inr-threshold":
            noise = _grid_noise_hint(post)
            hit = post.mass_in(cfg.inr_th * noise, math.inf) > cfg.p_th
        else:
            raise ValueError(f"classify does not handle variant {cfg.variant!r}")
        flagged += hit
    return flagged >= cfg.min_channels_flagged


def _grid_noise_hint(post: Posterior) -> float:
    # The INR test needs the noise power; the grid convention ties the default
    # grid top to 10x noise, which keeps this variant self-contained.
    return post.grid.max_w / 10.0


def classify_ber(n_incorrect: int, n_total: int, ber_th: float) -> bool:
    """Baseline: flag when the measured error rate reaches the threshold."""
    if n_total <= 0:
        return False
    return n_incorrect / n_total >= ber_th
