"""Discrimination-pattern auditing and fair parameter learning for naive Bayes."""

from .model import Assignment, Feature, NaiveBayesModel, Schema, log_likelihood
from .bounds import (
    DeltaTildeExtremum,
    ScoreBound,
    delta_tilde,
    delta_tilde_extremum,
    discrimination_bound,
    divergence_bound_delta,
    divergence_bound_fair_point,
    divergence_score,
    extremal_extension,
)
from .miner import (
    MiningReport,
    Pattern,
    brute_force_patterns,
    mine_all,
    mine_topk,
    search_space_size,
    verify_fair,
)
from .spsolver import (
    Monomial,
    Signomial,
    SignomialProgram,
    Solution,
    SolverConfig,
    evaluate,
    solve,
)
from .learner import (
    FairnessConstraint,
    LearnConfig,
    LearnReport,
    build_program,
    compile_constraint,
    independent_baseline,
    learn_fair,
)
from .data import (
    CVReport,
    Dataset,
    SufficientStatistics,
    accuracy,
    counts,
    cross_validate,
    fit,
    load_csv,
    sample,
)

__all__ = [
    "Assignment",
    "CVReport",
    "Dataset",
    "DeltaTildeExtremum",
    "FairnessConstraint",
    "Feature",
    "LearnConfig",
    "LearnReport",
    "MiningReport",
    "Monomial",
    "NaiveBayesModel",
    "Pattern",
    "Schema",
    "ScoreBound",
    "Signomial",
    "SignomialProgram",
    "Solution",
    "SolverConfig",
    "SufficientStatistics",
    "accuracy",
    "brute_force_patterns",
    "build_program",
    "compile_constraint",
    "counts",
    "cross_validate",
    "delta_tilde",
    "delta_tilde_extremum",
    "discrimination_bound",
    "divergence_bound_delta",
    "divergence_bound_fair_point",
    "divergence_score",
    "evaluate",
    "extremal_extension",
    "fit",
    "independent_baseline",
    "learn_fair",
    "load_csv",
    "log_likelihood",
    "mine_all",
    "mine_topk",
    "sample",
    "search_space_size",
    "solve",
    "verify_fair",
]
