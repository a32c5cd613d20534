"""Granger parent discovery by MML-scored subset search over lagged blocks.

A candidate parent set is scored by a two-part codelength: the negative
maximum log-likelihood of the restricted regression, plus
0.5 * (k*d + 1) * ln(r) for the coefficients it had to state, plus
ln C(m, k) for naming which k of the m variables were used.  The subset
minimizing the codelength wins; a variable is a Granger parent of the
target when it survives in the winning subset with at least one
non-negligible lag coefficient.

The search over subsets is exhaustive up to 15 variables and genetic
(bitmask encoding) beyond that.  Any function with the signature of
:func:`infer_parents` can act as a drop-in causal backend for the main
algorithm.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DegreesOfFreedomError,
    IntervalTooShort,
    SingularDesign,
    TooFewSamples,
    TooManyVariables,
)

# Candidate subsets the data cannot identify (exact collinearity or more
# coefficients than rows) are skipped by both searches.
_INFEASIBLE = (SingularDesign, DegreesOfFreedomError)
from .panel import LagDesign, StandardizedPanel, build_lag_design, restrict
from .stats import (
    GAUSSIAN,
    FittedDistribution,
    RegressionFit,
    fit_distribution_ks,
    fit_regression,
)

EXHAUSTIVE_LIMIT = 15
COEF_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SubsetScore:
    subset: frozenset
    codelength: float
    fit: RegressionFit


@dataclass(frozen=True)
class CausalParents:
    """Granger parents of one target on one interval, with lag coefficients."""

    target: str
    parents: frozenset
    coefficients: Dict[str, np.ndarray]  # per parent: d lag coefficients
    d: int
    interval: Tuple[int, int]


@dataclass(frozen=True)
class GeneticConfig:
    population_size: int = 64
    generations: int = 100
    mutation_rate: Optional[float] = None  # None -> 1/m
    tournament_size: int = 3
    seed: int = 0


def _subset_columns(design: LagDesign, subset) -> list:
    """Blocks of the subset in sorted-name order (independent of column order)."""
    cols = []
    for name in sorted(subset):
        block = design.block(name)
        cols.extend(block[:, l] for l in range(design.d))
    return cols


def mml_score(
    target_rows: Sequence[float],
    design: LagDesign,
    subset,
    distribution: FittedDistribution,
) -> SubsetScore:
    """Two-part codelength of the regression restricted to ``subset``."""
    subset = frozenset(subset)
    unknown = subset - set(design.variable_order)
    if unknown:
        raise ValueError(f"subset members {sorted(unknown)} not in the design")
    fit = fit_regression(target_rows, _subset_columns(design, subset), distribution)
    r = fit.n_obs
    k = len(subset)
    m = design.m
    codelength = (
        -fit.loglik
        + 0.5 * (k * design.d + 1) * math.log(r)
        + math.log(math.comb(m, k))
    )
    return SubsetScore(subset=subset, codelength=codelength, fit=fit)


def _iter_subsets(names):
    """All subsets ordered by size then lexicographically (tie-break order)."""
    ordered = sorted(names)
    for k in range(len(ordered) + 1):
        yield from itertools.combinations(ordered, k)


def _parents_from_score(
    score: SubsetScore, design: LagDesign, target: str, interval
) -> CausalParents:
    members = sorted(score.subset)
    coefficients = {}
    for idx, name in enumerate(members):
        coef = np.asarray(
            score.fit.coefficients[1 + idx * design.d : 1 + (idx + 1) * design.d]
        )
        if np.max(np.abs(coef)) > COEF_TOLERANCE:
            coefficients[name] = coef
    return CausalParents(
        target=target,
        parents=frozenset(coefficients),
        coefficients=coefficients,
        d=design.d,
        interval=tuple(interval),
    )


def search_exhaustive(
    target_rows: Sequence[float],
    design: LagDesign,
    distribution: FittedDistribution,
) -> SubsetScore:
    """Score all 2^m subsets; ties go to the smaller, lexicographically
    earlier subset.  Singular subsets (exactly collinear blocks) are skipped.
    """
    m = design.m
    if m > EXHAUSTIVE_LIMIT:
        raise TooManyVariables(m, EXHAUSTIVE_LIMIT)
    best = None
    for subset in _iter_subsets(design.variable_order):
        try:
            score = mml_score(target_rows, design, subset, distribution)
        except _INFEASIBLE:
            continue
        if best is None or score.codelength < best.codelength:
            best = score
    if best is None:
        raise SingularDesign("every candidate subset was rank-deficient")
    return best


def search_genetic(
    target_rows: Sequence[float],
    design: LagDesign,
    distribution: FittedDistribution,
    config: GeneticConfig = GeneticConfig(),
) -> SubsetScore:
    """Bitmask GA: tournament selection, single-point crossover, bit mutation.

    Deterministic for a fixed seed; returns the best subset ever evaluated.
    The all-zeros individual is always seeded into the initial population so
    the intercept-only baseline is never unexamined.
    """
    m = design.m
    if m < 2:
        raise ValueError("genetic search needs at least two variables")
    rng = np.random.default_rng(config.seed)
    mutation_rate = (
        config.mutation_rate if config.mutation_rate is not None else 1.0 / m
    )
    names = np.array(design.variable_order)
    bit_weights = 1 << np.arange(m)
    cache: Dict[int, Optional[SubsetScore]] = {}

    def evaluate(mask: np.ndarray) -> Optional[SubsetScore]:
        key = int(mask @ bit_weights)
        if key not in cache:
            subset = frozenset(names[mask.astype(bool)])
            try:
                cache[key] = mml_score(target_rows, design, subset, distribution)
            except _INFEASIBLE:
                cache[key] = None
        return cache[key]

    pop_size = config.population_size
    population = rng.integers(0, 2, size=(pop_size, m), dtype=np.int8)
    population[0] = 0  # intercept-only baseline

    def fitnesses(pop):
        scores = [evaluate(ind) for ind in pop]
        return np.array(
            [np.inf if s is None else s.codelength for s in scores]
        ), scores

    best: Optional[SubsetScore] = None
    lengths, scores = fitnesses(population)
    for s in scores:
        if s is not None and (best is None or s.codelength < best.codelength):
            best = s

    for _ in range(config.generations):
        children = np.empty_like(population)
        for i in range(0, pop_size, 2):
            p1 = _tournament(population, lengths, config.tournament_size, rng)
            p2 = _tournament(population, lengths, config.tournament_size, rng)
            cut = int(rng.integers(1, m))
            c1 = np.concatenate([p1[:cut], p2[cut:]])
            c2 = np.concatenate([p2[:cut], p1[cut:]])
            children[i] = c1
            if i + 1 < pop_size:
                children[i + 1] = c2
        if mutation_rate > 0:
            flips = rng.random(children.shape) < mutation_rate
            children = np.where(flips, 1 - children, children)
        population = children
        lengths, scores = fitnesses(population)
        for s in scores:
            if s is not None and (best is None or s.codelength < best.codelength):
                best = s

    if best is None:
        raise SingularDesign("every candidate subset was rank-deficient")
    return best


def _tournament(population, lengths, size, rng):
    idx = rng.integers(0, len(population), size=size)
    return population[idx[np.argmin(lengths[idx])]].copy()


def fit_target_distribution(values: np.ndarray) -> FittedDistribution:
    """KS-selected family for the target, with a gaussian fallback when the
    interval is too short for goodness-of-fit testing."""
    try:
        return fit_distribution_ks(values)
    except TooFewSamples:
        return FittedDistribution(
            family=GAUSSIAN,
            params={"mean": float(np.mean(values)), "std": float(np.std(values))},
            ks_statistic=float("nan"),
            ks_pvalue=float("nan"),
        )


def infer_parents(
    panel: StandardizedPanel,
    target: str,
    interval: Tuple[int, int],
    d: int,
    backend: str = "exhaustive",
    genetic_config: Optional[GeneticConfig] = None,
    distribution: Optional[FittedDistribution] = None,
) -> CausalParents:
    """Granger parents of ``target`` on the half-open row interval.

    The design spans every panel variable, the target's own lags included.
    The response distribution defaults to the KS-selected fit of the target
    over the interval.
    """
    start, end = interval
    n = end - start
    if n <= d + 3:
        raise IntervalTooShort(
            f"interval length {n} must exceed d + 3 = {d + 3}"
        )
    sub = restrict(panel, start, end)
    design = build_lag_design(sub, panel.variable_names, target, d)
    if distribution is None:
        distribution = fit_target_distribution(sub.column(target))
    if backend == "exhaustive":
        score = search_exhaustive(design.target_rows, design, distribution)
    elif backend == "genetic":
        score = search_genetic(
            design.target_rows, design, distribution, genetic_config or GeneticConfig()
        )
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return _parents_from_score(score, design, target, interval)
