"""Renderers for the harness's CSV/JSON output files.

Each figure kind reads only the documented file schemas; anything else is a
SchemaError naming the columns involved. Figures use a fixed size and dpi so
re-rendering the same inputs overwrites the output byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGSIZE = (6.4, 4.8)
DPI = 120

FIGURE_KINDS = ("traffic-map", "posterior", "roc", "tradeoff", "ber-curve")


class SchemaError(ValueError):
    """An input file does not match its documented schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[Path, ...]
    out_path: Path
    scenario: Path | None = None  # optional node positions for traffic maps

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind: {self.kind}")
        if not self.inputs:
            raise SchemaError("figure spec needs at least one input file")


def read_table(path: Path, columns: tuple[str, ...]) -> list[dict[str, str]]:
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        found = tuple(reader.fieldnames or ())
        if found != columns:
            raise SchemaError(
                f"{path.name}: expected columns {list(columns)}, "
                f"found {list(found)}")
        return list(reader)


def to_dbm(watts: np.ndarray) -> np.ndarray:
    out = np.full(watts.shape, -np.inf)
    positive = watts > 0
    out[positive] = 10.0 * np.log10(watts[positive] / 1e-3)
    return out


def dbm_axis(watts: np.ndarray) -> np.ndarray:
    """dBm values with the I=0 grid point pinned just left of the finite range."""
    dbm = to_dbm(watts)
    finite = dbm[np.isfinite(dbm)]
    if finite.size == 0:
        return np.zeros_like(dbm)
    left = finite.min() - 5.0
    return np.where(np.isfinite(dbm), dbm, left)


def _save(fig, out_path: Path) -> Path:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)
    return out_path


def render_posterior(inputs: tuple[Path, ...], out_path: Path) -> Path:
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for path in inputs:
        rows = read_table(path, ("interference_watts", "mass"))
        watts = np.array([float(r["interference_watts"]) for r in rows])
        mass = np.array([float(r["mass"]) for r in rows])
        label = path.stem.split("_")[-1]
        ax.plot(dbm_axis(watts), mass, drawstyle="steps-mid",
                label=f"channel {label}")
    ax.set_xlabel("interference (dBm, leftmost point is zero interference)")
    ax.set_ylabel("posterior mass")
    ax.set_ylim(bottom=0.0)
    if len(inputs) > 1:
        ax.legend(fontsize=7, ncols=2)
    ax.set_title("interference posterior")
    return _save(fig, out_path)


def _roc_points(path: Path) -> tuple[np.ndarray, np.ndarray, float]:
    rows = read_table(path, ("threshold", "tpr", "fpr"))
    tpr = np.array([float(r["tpr"]) for r in rows])
    fpr = np.array([float(r["fpr"]) for r in rows])
    order = np.argsort(fpr)
    xs = np.concatenate(([0.0], fpr[order], [1.0]))
    ys = np.concatenate(([0.0], tpr[order], [1.0]))
    return xs, ys, float(np.trapezoid(ys, xs))


def render_roc(inputs: tuple[Path, ...], out_path: Path) -> Path:
    if len(inputs) != 2:
        raise SchemaError("roc figure needs the proposed and baseline CSVs")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for path, name in zip(inputs, ("interference range", "BER threshold")):
        xs, ys, auc = _roc_points(path)
        ax.plot(xs, ys, marker=".", label=f"{name} (AUC = {auc:.3f})")
    ax.plot([0, 1], [0, 1], linestyle=":", color="grey", linewidth=1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title("jamming detection ROC")
    ax.legend(loc="lower right")
    return _save(fig, out_path)


def render_tradeoff(inputs: tuple[Path, ...], out_path: Path) -> Path:
    rows = read_table(inputs[0], ("alpha", "beta", "h_Sl", "h_Sm", "h_SNC",
                                  "chosen"))
    if not rows:
        raise SchemaError(f"{inputs[0].name}: no data rows")
    groups: dict[tuple[float, float], list[dict[str, str]]] = {}
    for row in rows:
        groups.setdefault((float(row["alpha"]), float(row["beta"])), []).append(row)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    width = 0.25
    centers = np.arange(len(groups))
    strategies = (("h_Sl", "reroute"), ("h_Sm", "stay"), ("h_SNC", "coded split"))
    for i, (col, name) in enumerate(strategies):
        means = [float(np.mean([float(r[col]) for r in grp]))
                 for grp in groups.values()]
        ax.bar(centers + (i - 1) * width, means, width, label=name)
    ax.set_xticks(centers)
    ax.set_xticklabels([f"$\\alpha$={a:g}, $\\beta$={b:g}" for a, b in groups])
    ax.set_ylabel("mean strategy score")
    ax.set_title("mitigation trade-off")
    ax.legend()
    ax.axhline(0.0, color="black", linewidth=0.8)
    return _save(fig, out_path)


def _positions_from_scenario(path: Path) -> tuple[dict[int, tuple[float, float]],
                                                  dict[str, int]]:
    doc = json.loads(path.read_text())
    try:
        nodes = {int(i): (float(x), float(y)) for i, (x, y) in doc["nodes"]}
        roles = {"sink": int(doc["sink_id"]),
                 "compromised": int(doc["compromised_id"])}
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path.name}: not a scenario file ({exc})") from exc
    return nodes, roles


def render_traffic(inputs: tuple[Path, ...], out_path: Path,
                   scenario: Path | None = None) -> Path:
    rows = read_table(inputs[0], ("src", "dst", "rate_bps"))
    links = [(int(r["src"]), int(r["dst"]), float(r["rate_bps"])) for r in rows]
    node_ids = sorted({n for a, b, _ in links for n in (a, b)})
    if scenario is not None and scenario.exists():
        positions, roles = _positions_from_scenario(scenario)
        node_ids = sorted(positions)
    else:
        angles = np.linspace(0.0, 2.0 * math.pi, len(node_ids), endpoint=False)
        positions = {n: (math.cos(t), math.sin(t))
                     for n, t in zip(node_ids, angles)}
        roles = {}
    top = max((r for _, _, r in links), default=1.0) or 1.0
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for a, b, rate in links:
        (x0, y0), (x1, y1) = positions[a], positions[b]
        ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                    arrowprops=dict(arrowstyle="-|>", color="tab:blue",
                                    linewidth=0.5 + 3.0 * rate / top,
                                    shrinkA=8, shrinkB=8))
    xs = [positions[n][0] for n in node_ids]
    ys = [positions[n][1] for n in node_ids]
    ax.scatter(xs, ys, s=90, color="lightgrey", edgecolor="black", zorder=3)
    for n in node_ids:
        ax.annotate(str(n), positions[n], ha="center", va="center",
                    fontsize=7, zorder=4)
    for role, marker, color in (("sink", "s", "tab:green"),
                                ("compromised", "X", "tab:red")):
        if role in roles and roles[role] in positions:
            x, y = positions[roles[role]]
            ax.scatter([x], [y], s=160, marker=marker, facecolor="none",
                       edgecolor=color, linewidth=2, zorder=5, label=role)
    if roles:
        ax.legend(loc="best", fontsize=8)
    ax.set_title("traffic map (edge width scales with rate)")
    ax.set_aspect("equal")
    ax.set_axis_off()
    return _save(fig, out_path)


def render_ber_curve(inputs: tuple[Path, ...], out_path: Path) -> Path:
    doc = json.loads(inputs[0].read_text())
    missing = {"variant", "a", "b", "floor"} - set(doc)
    if missing:
        raise SchemaError(
            f"{inputs[0].name}: missing fields {sorted(missing)}")
    if doc["variant"] != "expfit":
        raise SchemaError(f"{inputs[0].name}: unknown variant {doc['variant']!r}")
    gammas = np.logspace(-2, 2, 300)
    bers = np.minimum(0.5, doc["a"] * np.exp(-doc["b"] * gammas) + doc["floor"])
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.loglog(gammas, bers,
              label=f"{doc['a']:.3g}" r"$\,e^{-" f"{doc['b']:.3g}" r"\gamma}$"
                    f" + {doc['floor']:.2g}")
    ax.set_xlabel("SINR")
    ax.set_ylabel("bit error rate")
    ax.set_title("trained BER curve")
    ax.legend()
    return _save(fig, out_path)


_RENDERERS = {
    "posterior": render_posterior,
    "roc": render_roc,
    "tradeoff": render_tradeoff,
    "ber-curve": render_ber_curve,
}


def render(spec: FigureSpec) -> Path:
    for path in spec.inputs:
        if not path.exists():
            raise SchemaError(f"input file not found: {path}")
    if spec.kind == "traffic-map":
        return render_traffic(spec.inputs, spec.out_path, spec.scenario)
    return _RENDERERS[spec.kind](spec.inputs, spec.out_path)


def discover(results_dir: Path, figures_dir: Path) -> list[FigureSpec]:
    """Figure specs for every renderable harness output below results_dir."""
    specs: list[FigureSpec] = []
    posterior_groups: dict[str, list[Path]] = {}
    for path in sorted(results_dir.glob("posterior_*.csv")):
        m = re.fullmatch(r"posterior_(.+)_(\d+)\.csv", path.name)
        if m:
            posterior_groups.setdefault(m.group(1), []).append(path)
    for label, paths in sorted(posterior_groups.items()):
        specs.append(FigureSpec("posterior", tuple(paths),
                                figures_dir / f"posterior_{label}.png"))
    proposed = results_dir / "roc_proposed.csv"
    baseline = results_dir / "roc_ber.csv"
    if proposed.exists() and baseline.exists():
        specs.append(FigureSpec("roc", (proposed, baseline),
                                figures_dir / "roc.png"))
    tradeoff = results_dir / "tradeoff.csv"
    if tradeoff.exists():
        specs.append(FigureSpec("tradeoff", (tradeoff,),
                                figures_dir / "tradeoff.png"))
    for path in sorted(results_dir.glob("traffic_*.csv")):
        label = path.stem.removeprefix("traffic_")
        specs.append(FigureSpec("traffic-map", (path,),
                                figures_dir / f"traffic_{label}.png",
                                scenario=results_dir / f"scenario_{label}.json"))
    model = results_dir / "ber_model.json"
    if model.exists():
        specs.append(FigureSpec("ber-curve", (model,),
                                figures_dir / "ber_curve.png"))
    return specs


def render_all(results_dir: Path, figures_dir: Path) -> list[Path]:
    specs = discover(results_dir, figures_dir)
    if not specs:
        raise SchemaError(f"no renderable harness outputs in {results_dir}")
    return [render(spec) for spec in specs]
