"""Mining of generalized origin-destination-time flow patterns.

The package aggregates raw trip records into an atomic support table over a
region graph and timeslot grid, selects the top-supported atomic triples, and
grows them level by level into generalized (origin set, destination set, slot
range) patterns under an exact contained-pattern ratio threshold — with
optional size bounds, domain constraints, and per-level top-k ranking.
"""

from .estimator import ODTPatternMiner
from .ingest import (
    AtomicPatternSet,
    SupportTable,
    TripRecord,
    aggregate,
    aggregate_csv,
    duration_mad,
    load_instance,
    load_support_csv,
    mean_duration_mad,
    read_graph_file,
    select_atomic_patterns,
    write_graph_file,
    write_instance,
    write_support_csv,
)
from .levelwise import (
    OPT_LEVELS,
    MiningCounters,
    MiningResult,
    count_atomic_patterns,
    is_pattern,
    mine_all,
    required_count,
)
from .model import (
    DomainConstraints,
    EvaluatedTriple,
    MiningConfig,
    ODTTriple,
    RankParams,
    RegionGraph,
    SizeBounds,
    ValidationError,
    as_fraction,
    canonical_key,
    format_triple,
    parse_triple,
)
from .oracle import OracleGuard, OracleGuardError, OracleVerifier, oracle_mine
from .synth import HotBox, SyntheticInstance, SyntheticSpec, generate
from .variants import RANK_ALGOS, mine_bounded, mine_constrained, mine_topk

__version__ = "0.1.0"

__all__ = [
    "AtomicPatternSet",
    "DomainConstraints",
    "EvaluatedTriple",
    "HotBox",
    "MiningConfig",
    "MiningCounters",
    "MiningResult",
    "ODTPatternMiner",
    "ODTTriple",
    "OPT_LEVELS",
    "OracleGuard",
    "OracleGuardError",
    "OracleVerifier",
    "RANK_ALGOS",
    "RankParams",
    "RegionGraph",
    "SizeBounds",
    "SupportTable",
    "SyntheticInstance",
    "SyntheticSpec",
    "TripRecord",
    "ValidationError",
    "aggregate",
    "aggregate_csv",
    "as_fraction",
    "canonical_key",
    "count_atomic_patterns",
    "duration_mad",
    "format_triple",
    "generate",
    "is_pattern",
    "load_instance",
    "load_support_csv",
    "mean_duration_mad",
    "mine_all",
    "mine_bounded",
    "mine_constrained",
    "mine_topk",
    "oracle_mine",
    "parse_triple",
    "read_graph_file",
    "required_count",
    "select_atomic_patterns",
    "write_graph_file",
    "write_instance",
    "write_support_csv",
    "__version__",
]
