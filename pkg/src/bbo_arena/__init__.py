"""Benchmark harness and optimizer suite for batch black-box optimization."""

from .analysis import (
    BootstrapConfig,
    RSCurve,
    RSEquivalence,
    bootstrap_scores,
    expected_min_of_m,
    pooled_rs_curve,
    rank_confidence,
    rs_equivalence,
)
from .errors import (
    CalibrationError,
    ConfigError,
    DataError,
    DomainError,
    EvaluationCrash,
    ShapeError,
    SuggestionError,
)
from .harness import EvalTensor, StudyConfig, StudyLog, run_study, run_suite
from .optimizers import ObservationArchive, Optimizer, available_ids, create_optimizer
from .problems import (
    Dataset,
    Problem,
    ProblemSuite,
    build_suite,
    evaluate,
    generate_dataset,
    make_synthetic_problem,
    reference_suite,
    suite_from_manifest,
)
from .scoring import (
    ProblemCalibration,
    calibrate,
    clip_scores,
    cumulative_min,
    leaderboard_score,
    median_score,
    resolve_opt,
)
from .space import (
    AnonymizationMap,
    ParamSpec,
    SearchSpace,
    anonymize,
    parse_space_config,
    space_to_config,
    unwarp_value,
    warp_value,
)

__version__ = "0.1.0"

__all__ = [
    "AnonymizationMap",
    "BootstrapConfig",
    "CalibrationError",
    "ConfigError",
    "DataError",
    "Dataset",
    "DomainError",
    "EvalTensor",
    "EvaluationCrash",
    "ObservationArchive",
    "Optimizer",
    "ParamSpec",
    "Problem",
    "ProblemCalibration",
    "ProblemSuite",
    "RSCurve",
    "RSEquivalence",
    "SearchSpace",
    "ShapeError",
    "StudyConfig",
    "StudyLog",
    "SuggestionError",
    "anonymize",
    "available_ids",
    "bootstrap_scores",
    "build_suite",
    "calibrate",
    "clip_scores",
    "create_optimizer",
    "cumulative_min",
    "evaluate",
    "expected_min_of_m",
    "generate_dataset",
    "leaderboard_score",
    "make_synthetic_problem",
    "median_score",
    "parse_space_config",
    "pooled_rs_curve",
    "rank_confidence",
    "reference_suite",
    "resolve_opt",
    "rs_equivalence",
    "run_study",
    "run_suite",
    "space_to_config",
    "suite_from_manifest",
    "unwarp_value",
    "warp_value",
]
