"""Cause/trigger separation for multivariate time series.

Given a panel of aligned series and a target, the algorithm splits the
observation window at the point where the target's mean rises, discovers
Granger parents on both sub-intervals with an MML-scored subset search,
confirms trigger candidates by a moderation F-test, and pairs every
confirmed trigger with the cause whose mean shifted the most.
"""

__version__ = "0.1.0"

from . import errors
from .algorithm import (
    AlgorithmConfig,
    AlgorithmOutput,
    CauseTriggerPair,
    ModerationResult,
    candidate_triggers,
    moderation_test,
    run,
    select_triggered_cause,
)
from .changepoint import SplitResult, find_split, mean_shift
from .estimator import CauseTrigger
from .hmml import (
    CausalParents,
    GeneticConfig,
    SubsetScore,
    infer_parents,
    mml_score,
    search_exhaustive,
    search_genetic,
)
from .panel import (
    CellMeta,
    LagDesign,
    StandardizedPanel,
    TimeSeriesPanel,
    aggregate_design,
    build_lag_design,
    destandardize,
    remove_variable_block,
    standardize,
)
from .pipeline import (
    GridCellKey,
    RunManifest,
    derive_wind_vars,
    ingest_csv,
    read_pairs_csv,
    read_plotdata,
    run_grid,
    write_pairs_csv,
    write_plotdata,
)
from .stats import (
    FittedDistribution,
    FTestResult,
    RegressionFit,
    f_test_nested,
    fit_distribution_ks,
    fit_regression,
    select_lag_aic,
)
from .synth import ScenarioSpec, gen_trigger_scenario, gen_var_panel

__all__ = [
    "__version__",
    "errors",
    "AlgorithmConfig",
    "AlgorithmOutput",
    "CauseTrigger",
    "CauseTriggerPair",
    "ModerationResult",
    "candidate_triggers",
    "moderation_test",
    "run",
    "select_triggered_cause",
    "SplitResult",
    "find_split",
    "mean_shift",
    "CausalParents",
    "GeneticConfig",
    "SubsetScore",
    "infer_parents",
    "mml_score",
    "search_exhaustive",
    "search_genetic",
    "CellMeta",
    "LagDesign",
    "StandardizedPanel",
    "TimeSeriesPanel",
    "aggregate_design",
    "build_lag_design",
    "destandardize",
    "remove_variable_block",
    "standardize",
    "GridCellKey",
    "RunManifest",
    "derive_wind_vars",
    "ingest_csv",
    "read_pairs_csv",
    "read_plotdata",
    "run_grid",
    "write_pairs_csv",
    "write_plotdata",
    "FittedDistribution",
    "FTestResult",
    "RegressionFit",
    "f_test_nested",
    "fit_distribution_ks",
    "fit_regression",
    "select_lag_aic",
    "ScenarioSpec",
    "gen_trigger_scenario",
    "gen_var_panel",
]
