"""Cross-layer jamming simulator: a multi-hop network under a route-steering
jammer, a Bayesian interference detector, and coded-path mitigation."""

__version__ = "0.1.0"

from .attacker import (
    AttackerStrategy,
    AttackOutcome,
    NetworkState,
    jam_allocation,
    run_iteration,
    select_target,
)
from .defender import (
    DefenderStrategy,
    TrafficMap,
    best_strategy,
    traffic_map,
    update_routes,
    waterfill,
)
from .detection import (
    BerModel,
    BitEvent,
    ClassifierConfig,
    ConvergenceConfig,
    InterferenceGrid,
    Posterior,
    TransmissionBatch,
    TransmissionContext,
    ber,
    classify,
    classify_ber,
    fit_ber_curve,
    log_likelihood,
    posterior_update,
    run_detector,
)
from .harness import (
    ExperimentConfig,
    RocCurve,
    generate_scenario,
    roc_sweep,
    synthesize_bits,
    tradeoff_study,
)
from .mitigation import (
    InsufficientSymbolsError,
    MitigationParams,
    SecureCode,
    StrategyCandidate,
    choose_strategy,
    decode,
    encode,
    generate_code,
    snc_delay,
)
from .netmodel import (
    ChannelModel,
    Jammer,
    LinkGains,
    PowerAllocation,
    Scenario,
    draw_gains,
    link_delay,
    link_throughput,
    path_gain,
    received_interference,
    scenario_from_json,
    scenario_to_json,
)

__all__ = [
    "__version__",
    "AttackerStrategy", "AttackOutcome", "NetworkState", "jam_allocation",
    "run_iteration", "select_target",
    "DefenderStrategy", "TrafficMap", "best_strategy", "traffic_map",
    "update_routes", "waterfill",
    "BerModel", "BitEvent", "ClassifierConfig", "ConvergenceConfig",
    "InterferenceGrid", "Posterior", "TransmissionBatch", "TransmissionContext",
    "ber", "classify", "classify_ber", "fit_ber_curve", "log_likelihood",
    "posterior_update", "run_detector",
    "ExperimentConfig", "RocCurve", "generate_scenario", "roc_sweep",
    "synthesize_bits", "tradeoff_study",
    "InsufficientSymbolsError", "MitigationParams", "SecureCode",
    "StrategyCandidate", "choose_strategy", "decode", "encode", "generate_code",
    "snc_delay",
    "ChannelModel", "Jammer", "LinkGains", "PowerAllocation", "Scenario",
    "draw_gains", "link_delay", "link_throughput", "path_gain",
    "received_interference", "scenario_from_json", "scenario_to_json",
]
