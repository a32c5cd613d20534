"""End-to-end separation of causes from triggers for one target series.

The pipeline per panel: standardize, locate the changepoint splitting the
observation window into a quiet interval I1 and an elevated interval I2,
discover Granger parents on both, filter parents whose own mean rises at the
changepoint into trigger candidates, confirm each candidate by the
moderation F-test on the aggregated non-candidate signal, and pair every
confirmed trigger with the cause whose mean shifted the most.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace
from typing import List, Optional, Set, Tuple

import numpy as np

from . import changepoint as cp
from . import hmml
from .errors import IntervalTooShort, NoEligibleCause
from .panel import (
    CellMeta,
    StandardizedPanel,
    TimeSeriesPanel,
    aggregate_design,
    build_lag_design,
    remove_variable_block,
    restrict,
    standardize,
)
from .stats import FittedDistribution, FTestResult, f_test_nested, fit_regression, select_lag_aic

STOP_NO_SPLIT = "no-split"
STOP_TOO_FEW_PARENTS = "too-few-parents"
STOP_COMPLETED = "completed"


@dataclass(frozen=True)
class AlgorithmConfig:
    """Tuning knobs of the full algorithm.

    ``d=None`` selects the lag order by AIC up to ``d_max``.  The two mean
    thresholds gate how large a rise counts as a shift, for the target
    (``threshold_y``) and for trigger candidates (``threshold_x``).
    """

    d: Optional[int] = None
    d_max: int = 5
    min_size_I2: int = 30
    threshold_y: float = 0.0
    threshold_x: float = 0.0
    alpha: float = 0.05
    aggregation_mode: str = "unit"  # or "coefficient"
    backend: str = "exhaustive"  # or "genetic"
    absolute_split: bool = False
    emit_all_causes: bool = False
    seed: int = 0
    genetic: hmml.GeneticConfig = field(default_factory=hmml.GeneticConfig)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.threshold_y < 0 or self.threshold_x < 0:
            raise ValueError("thresholds must be nonnegative")
        if self.aggregation_mode not in ("unit", "coefficient"):
            raise ValueError(f"unknown aggregation mode {self.aggregation_mode!r}")
        if self.backend not in ("exhaustive", "genetic"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.d is not None and self.d < 1:
            raise ValueError("d must be >= 1")


@dataclass(frozen=True)
class ModerationResult:
    trigger_candidate: str
    f: FTestResult
    is_moderator: bool
    rss_reduced: float
    rss_full: float


@dataclass(frozen=True)
class CauseTriggerPair:
    cause: str
    trigger: str
    cell_meta: Optional[CellMeta]
    moderation: ModerationResult
    cause_mean_shift: float


@dataclass(frozen=True)
class AlgorithmOutput:
    causes: frozenset
    triggers: frozenset
    pairs: Tuple[CauseTriggerPair, ...]
    split: Optional[cp.SplitResult]
    parents_I1: Optional[hmml.CausalParents]
    parents_I2: Optional[hmml.CausalParents]
    stop_reason: str
    # Parents over the whole window; only filled on the no-split path.
    parents_full: Optional[hmml.CausalParents] = None
    d: Optional[int] = None


def candidate_triggers(
    parents_I2: hmml.CausalParents,
    panel: StandardizedPanel,
    split: cp.SplitResult,
    target: str,
    threshold_x: float = 0.0,
) -> Set[str]:
    """Parents on I2 (target excluded) whose mean rises across the split."""
    T = panel.n_steps
    out = set()
    for name in parents_I2.parents:
        if name == target:
            continue
        shift = cp.mean_shift(panel.column(name), (0, split.t1), (split.t1, T))
        if shift > threshold_x:
            out.add(name)
    return out


def moderation_test(
    panel: StandardizedPanel,
    target: str,
    parents_I2: hmml.CausalParents,
    x_s: str,
    config: AlgorithmConfig,
    distribution: Optional[FittedDistribution] = None,
) -> ModerationResult:
    """Decide whether ``x_s`` moderates the aggregated causal signal on I2.

    The reduced model regresses the target on the aggregate V of every
    other parent's lags; the full model adds the interaction V * x_s.  The
    candidate is a moderator when the nested F-test rejects.
    """
    if x_s not in parents_I2.parents:
        raise ValueError(f"{x_s!r} is not a parent on I2")
    start, end = parents_I2.interval
    d = parents_I2.d
    if end - start - d <= 4:
        raise IntervalTooShort(
            f"interval length {end - start} leaves too few rows for lag {d}"
        )
    sub = restrict(panel, start, end)
    order = sorted(parents_I2.parents)
    design = build_lag_design(sub, order, target, d)
    without = remove_variable_block(design, x_s)
    if config.aggregation_mode == "coefficient":
        beta = np.concatenate(
            [parents_I2.coefficients[name] for name in without.variable_order]
        )
        V = aggregate_design(without, "coefficient", beta)
    else:
        V = aggregate_design(without, "unit")
    xs_now = sub.column(x_s)[d:]  # x_s at the predicted time steps
    y = design.target_rows

    if distribution is None:
        distribution = hmml.fit_target_distribution(sub.column(target))
    fit_reduced = fit_regression(y, [V], distribution)
    fit_full = fit_regression(y, [V, V * xs_now], distribution)
    if fit_full.rss > fit_reduced.rss:
        # The models are nested, so any excess is ridge-solver noise (the
        # interaction column was near-collinear with V); treat as no gain.
        fit_full = dataclasses.replace(fit_full, rss=fit_reduced.rss)
    f = f_test_nested(fit_reduced, fit_full, config.alpha)
    return ModerationResult(
        trigger_candidate=x_s,
        f=f,
        is_moderator=f.reject_h0,
        rss_reduced=fit_reduced.rss,
        rss_full=fit_full.rss,
    )


def select_triggered_cause(
    panel: StandardizedPanel,
    parents_I2: hmml.CausalParents,
    trigger: str,
    target: str,
    split: cp.SplitResult,
) -> str:
    """The parent with the largest absolute mean shift across the split.

    The target's own history is eligible; the trigger itself is not.  Ties
    break lexicographically.
    """
    T = panel.n_steps
    candidates = sorted(parents_I2.parents - {trigger})
    if not candidates:
        raise NoEligibleCause(f"no candidate cause besides trigger {trigger!r}")
    shifts = {
        name: abs(
            cp.mean_shift(panel.column(name), (0, split.t1), (split.t1, T))
        )
        for name in candidates
    }
    return min(candidates, key=lambda name: (-shifts[name], name))


def _ranked_causes(panel, parents_I2, trigger, split):
    T = panel.n_steps
    candidates = sorted(parents_I2.parents - {trigger})
    scored = [
        (
            name,
            cp.mean_shift(panel.column(name), (0, split.t1), (split.t1, T)),
        )
        for name in candidates
    ]
    scored.sort(key=lambda item: (-abs(item[1]), item[0]))
    return scored


def run(
    panel: TimeSeriesPanel,
    target: str,
    config: AlgorithmConfig = AlgorithmConfig(),
) -> AlgorithmOutput:
    """Run the full cause/trigger separation on one panel.

    Every stop path returns a structured output: ``no-split`` when the
    target's mean never rises enough to define I1/I2 (causes are then the
    parents over the whole window), ``too-few-parents`` when fewer than two
    parents exist on I2, and ``completed`` otherwise.
    """
    std = standardize(panel)
    panel.index_of(target)
    d = config.d if config.d is not None else select_lag_aic(std, config.d_max)
    T = std.n_steps

    split = cp.find_split(
        std.column(target),
        min_size_I2=config.min_size_I2,
        threshold_y=config.threshold_y,
        absolute=config.absolute_split,
    )
    genetic = replace(config.genetic, seed=config.seed)

    if not split.accepted:
        parents_full = hmml.infer_parents(
            std, target, (0, T), d, config.backend, genetic
        )
        return AlgorithmOutput(
            causes=frozenset(parents_full.parents),
            triggers=frozenset(),
            pairs=(),
            split=split,
            parents_I1=None,
            parents_I2=None,
            stop_reason=STOP_NO_SPLIT,
            parents_full=parents_full,
            d=d,
        )

    t1 = split.t1
    try:
        parents_I1 = hmml.infer_parents(
            std, target, (0, t1), d, config.backend, replace(genetic, seed=config.seed + 1)
        )
    except IntervalTooShort:
        # I1 can be shorter than the lag window; B1 is then undetermined.
        parents_I1 = None
    parents_I2 = hmml.infer_parents(
        std, target, (t1, T), d, config.backend, replace(genetic, seed=config.seed + 2)
    )

    if len(parents_I2.parents) < 2:
        return AlgorithmOutput(
            causes=frozenset(parents_I2.parents),
            triggers=frozenset(),
            pairs=(),
            split=split,
            parents_I1=parents_I1,
            parents_I2=parents_I2,
            stop_reason=STOP_TOO_FEW_PARENTS,
            d=d,
        )

    distribution = hmml.fit_target_distribution(
        restrict(std, t1, T).column(target)
    )
    candidates = candidate_triggers(
        parents_I2, std, split, target, config.threshold_x
    )
    triggers: Set[str] = set()
    pairs: List[CauseTriggerPair] = []
    for x_s in sorted(candidates):
        moderation = moderation_test(
            std, target, parents_I2, x_s, config, distribution
        )
        if not moderation.is_moderator:
            continue
        triggers.add(x_s)
        ranked = _ranked_causes(std, parents_I2, x_s, split)
        chosen = ranked if config.emit_all_causes else ranked[:1]
        for cause, shift in chosen:
            pairs.append(
                CauseTriggerPair(
                    cause=cause,
                    trigger=x_s,
                    cell_meta=panel.cell_meta,
                    moderation=moderation,
                    cause_mean_shift=shift,
                )
            )

    causes = (parents_I2.parents - triggers) | {p.cause for p in pairs}
    return AlgorithmOutput(
        causes=frozenset(causes),
        triggers=frozenset(triggers),
        pairs=tuple(pairs),
        split=split,
        parents_I1=parents_I1,
        parents_I2=parents_I2,
        stop_reason=STOP_COMPLETED,
        d=d,
    )
