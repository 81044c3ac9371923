"""Command-line entry point.

Exit codes: 0 success, 2 configuration/usage problems (diagnostic names the
offending field), 1 runtime failure. Every subcommand writes only below --out.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from collections import Counter
from pathlib import Path

from . import __version__
from .detection import fit_ber_curve
from .harness import (
    ExperimentConfig,
    ber_table,
    generate_scenario,
    roc_sweep,
    scenario_detection_study,
    tradeoff_study,
    write_csv,
    write_json,
    write_posteriors,
    write_roc,
    write_tradeoff,
    write_traces,
    write_traffic,
)
from .attacker import run_iteration
from .netmodel import scenario_to_json


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jamroute",
        description="Jamming-aided route-manipulation simulator and detector.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, budget_default: float | None = None,
               periods: bool = True) -> None:
        p.add_argument("--config", type=Path, default=None,
                       help="experiment config JSON (defaults apply when omitted)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory, created if absent")
        if budget_default is not None:
            p.add_argument("--jammer-budget", type=float, default=budget_default,
                           metavar="MW", help="jammer power budget in milliwatts")
        if periods:
            p.add_argument("--periods", type=int, default=None)

    common(sub.add_parser("generate", help="write a scenario JSON"), periods=False)
    common(sub.add_parser("simulate", help="run the attack/defend iteration"),
           budget_default=10.0)
    common(sub.add_parser("detect", help="run the detection study on one scenario"),
           budget_default=10.0)
    common(sub.add_parser("roc", help="full jammed-vs-clean ROC sweep"), periods=False)
    common(sub.add_parser("tradeoff", help="mitigation trade-off study"), periods=False)
    common(sub.add_parser("ber-table", help="victim BER per jammer budget"),
           periods=False)
    fit = sub.add_parser("fit-ber", help="fit the BER-vs-SINR curve from a trace")
    fit.add_argument("--trace", type=Path, required=True,
                     help="JSONL file of {gamma, ber} samples")
    fit.add_argument("--out", type=Path, default=Path("out"))
    return parser


def _load_config(path: Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return ExperimentConfig.from_json(path.read_text())


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own diagnostics
        return int(exc.code or 0)

    try:
        config = _load_config(getattr(args, "config", None))
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        out: Path = args.out
        out.mkdir(parents=True, exist_ok=True)
        handler = _HANDLERS[args.command]
        handler(args, config, out)
        return 0
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _write_effective_config(out: Path, config: ExperimentConfig) -> None:
    (out / "effective_config.json").write_text(config.to_json() + "\n")


def _cmd_generate(args, config: ExperimentConfig, out: Path) -> None:
    scenario = generate_scenario(config, args.seed)
    (out / f"scenario_{args.seed}.json").write_text(scenario_to_json(scenario) + "\n")
    _write_effective_config(out, config)


def _cmd_simulate(args, config: ExperimentConfig, out: Path) -> None:
    periods = args.periods or config.attack_periods
    budget_w = args.jammer_budget * 1e-3
    scenario = generate_scenario(config, args.seed).with_jammer(
        power_budget_w=budget_w, enabled=budget_w > 0)
    history, outcome = run_iteration(scenario, periods)
    (out / f"scenario_{args.seed}.json").write_text(scenario_to_json(scenario) + "\n")
    write_traffic(out, str(args.seed), history[-1].traffic.link_rates)
    write_traces(out, history, scenario)
    write_json(out / "summary.json", {
        "attack_gain_bps": outcome.attack_gain_bps,
        "baseline_first_period_bps": outcome.baseline_first_period_bps,
        "jammer_budget_mw": args.jammer_budget,
        "periods": periods,
        "seed": args.seed,
    })
    _write_effective_config(out, config)


def _cmd_detect(args, config: ExperimentConfig, out: Path) -> None:
    scenario = generate_scenario(config, args.seed)
    result = scenario_detection_study(config, scenario, args.jammer_budget,
                                      periods=args.periods)
    write_posteriors(out, str(args.seed), result.posteriors)
    modes = {str(ch): p.mode_w for ch, p in sorted(result.posteriors.items())}
    write_json(out / "summary.json", {
        "empirical_ber": result.empirical_ber,
        "jammer_budget_mw": args.jammer_budget,
        "median_mode_w": statistics.median(modes.values()),
        "modes_w": modes,
        "monitored_link": list(result.monitored_link),
        "seed": args.seed,
    })
    _write_effective_config(out, config)


def _cmd_roc(args, config: ExperimentConfig, out: Path) -> None:
    proposed, baseline = roc_sweep(config)
    write_roc(out, proposed, baseline)
    write_json(out / "summary.json", {
        "auc_ber": baseline.auc,
        "auc_proposed": proposed.auc,
    })
    _write_effective_config(out, config)


def _cmd_tradeoff(args, config: ExperimentConfig, out: Path) -> None:
    rows = tradeoff_study(config)
    write_tradeoff(out, rows)
    counts = {
        f"{alpha:g},{beta:g}": dict(Counter(
            r.chosen for r in rows if (r.alpha, r.beta) == (alpha, beta)))
        for alpha, beta in config.alpha_beta_pairs
    }
    write_json(out / "summary.json", {"chosen_counts": counts})
    _write_effective_config(out, config)


def _cmd_ber_table(args, config: ExperimentConfig, out: Path) -> None:
    table = ber_table(config, args.seed)
    write_csv(out / "ber_table.csv", ("budget_mw", "ber"),
              sorted(table.items()))
    write_json(out / "summary.json", {
        "ber_table": {f"{b:g}": v for b, v in sorted(table.items())},
        "seed": args.seed,
    })
    _write_effective_config(out, config)


def _cmd_fit_ber(args, config: ExperimentConfig, out: Path) -> None:
    samples = []
    for line in args.trace.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        doc = json.loads(line)
        samples.append((float(doc["gamma"]), float(doc["ber"])))
    model = fit_ber_curve(samples)
    doc = {"variant": model.variant, "a": model.a, "b": model.b,
           "floor": model.floor}
    write_json(out / "ber_model.json", doc)
    print(json.dumps(doc, sort_keys=True))


_HANDLERS = {
    "generate": _cmd_generate,
    "simulate": _cmd_simulate,
    "detect": _cmd_detect,
    "roc": _cmd_roc,
    "tradeoff": _cmd_tradeoff,
    "ber-table": _cmd_ber_table,
    "fit-ber": _cmd_fit_ber,
}


if __name__ == "__main__":
    sys.exit(main())
