from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("altbd")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.0.0"

from .model import (
    Phase,
    ChainState,
    Topology,
    RateSet,
    Aggregates,
    constant_rate_set,
    aggregates,
    transitions,
    exit_rate,
)

from .expr import parse_rate_expr, spec_from_config

from .stationary import (
    WeightTable,
    TailCertificate,
    StationaryDistribution,
    ErgodicityVerdict,
    one_sided_weights,
    two_sided_weights,
    finite_weights,
    weights,
    normalize,
    ergodicity,
    dense_balance_solve,
    balance_residual,
    cut_defect,
    criterion_summands,
)

from .series import SeriesEvidence, classify_series

from .regularity import (
    ReuterIterate,
    RegularityVerdict,
    reuter_coeffs,
    reuter_recursion_one_sided,
    reuter_bounds,
    reuter_residual,
    two_sided_recursion,
    regularity_one_sided,
    regularity_two_sided,
    regularity,
)

from .simulate import (
    SimConfig,
    OccupancyReport,
    simulate_path,
    occupancy_distribution,
    compare_tv,
    replicate,
    merge_reports,
)

from .ingress import load_model, model_from_json

from .egress import to_json, write_text

from .errors import AltbdError, ModelError, ConfigError, ParseError, NumericalError


__all__ = [
    "Phase",
    "ChainState",
    "Topology",
    "RateSet",
    "Aggregates",
    "constant_rate_set",
    "aggregates",
    "transitions",
    "exit_rate",
    "parse_rate_expr",
    "spec_from_config",
    "WeightTable",
    "TailCertificate",
    "StationaryDistribution",
    "ErgodicityVerdict",
    "one_sided_weights",
    "two_sided_weights",
    "finite_weights",
    "weights",
    "normalize",
    "ergodicity",
    "dense_balance_solve",
    "balance_residual",
    "cut_defect",
    "criterion_summands",
    "SeriesEvidence",
    "classify_series",
    "ReuterIterate",
    "RegularityVerdict",
    "reuter_coeffs",
    "reuter_recursion_one_sided",
    "reuter_bounds",
    "reuter_residual",
    "two_sided_recursion",
    "regularity_one_sided",
    "regularity_two_sided",
    "regularity",
    "SimConfig",
    "OccupancyReport",
    "simulate_path",
    "occupancy_distribution",
    "compare_tv",
    "replicate",
    "merge_reports",
    "load_model",
    "model_from_json",
    "to_json",
    "write_text",
    "AltbdError",
    "ModelError",
    "ConfigError",
    "ParseError",
    "NumericalError",
]
