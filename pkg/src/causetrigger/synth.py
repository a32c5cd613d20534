"""Seeded generators of panels with planted causal and trigger structure.

These are the ground truth for every recovery-rate check: the scenario
plants one cause driving the target throughout and one trigger that switches
on at a known changepoint and multiplies the cause's effect.  The trigger's
onset is a smoothed (logistic) step, not an instantaneous jump, and its
fluctuations are persistent, so it behaves like a continuous process whose
within-interval variation the moderation test can see.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import UnstableSystem
from .panel import TimeSeriesPanel


@dataclass(frozen=True)
class ScenarioSpec:
    """Defines one planted cause/trigger scenario (all randomness seeded)."""

    T: int = 300
    p: int = 5
    d_true: int = 2
    cause_index: int = 1
    trigger_index: int = 2
    t1_true: int = 150
    gamma_interaction: float = 0.8
    noise_sigma: float = 0.1
    seed: int = 0
    cause_strength: float = 0.3
    # The cause's level sets how strongly the trigger's onset lifts the
    # target's mean; its fluctuations decorrelate quickly so the target's
    # own history carries no echo of the interaction term.
    cause_mean: float = 0.6
    ar_coefficient: float = 0.2
    cause_innovation_sigma: float = 0.35
    # Trigger fluctuations are mildly persistent; their within-interval
    # variation is what the moderation test detects once the trigger is on.
    trigger_noise_sigma: float = 0.3
    trigger_noise_rho: float = 0.8
    noise_family: str = "gaussian"  # or "gamma"

    def __post_init__(self):
        if self.p < 3:
            raise ValueError("need at least target, cause and trigger columns")
        if self.cause_index == self.trigger_index:
            raise ValueError("cause and trigger must be distinct variables")
        for idx in (self.cause_index, self.trigger_index):
            if not 1 <= idx <= self.p - 1:
                raise ValueError(f"variable index {idx} out of range 1..{self.p - 1}")
        if not self.d_true < self.t1_true < self.T - 30:
            raise ValueError(
                f"t1_true={self.t1_true} must lie in ({self.d_true}, {self.T - 30})"
            )
        if self.noise_family not in ("gaussian", "gamma"):
            raise ValueError(f"unknown noise family {self.noise_family!r}")

    @property
    def cause_name(self) -> str:
        return f"x{self.cause_index}"

    @property
    def trigger_name(self) -> str:
        return f"x{self.trigger_index}"

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ScenarioSpec":
        """Build a spec from string-valued config keys (CLI config format)."""
        kwargs = {}
        for f in cls.__dataclass_fields__.values():
            if f.name not in mapping:
                continue
            raw = mapping[f.name]
            if f.name == "noise_family":
                kwargs[f.name] = str(raw)
            elif f.type in ("int", int):
                kwargs[f.name] = int(raw)
            else:
                kwargs[f.name] = float(raw)
        unknown = set(mapping) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**kwargs)


def _spectral_radius(coefficient_matrices: np.ndarray) -> float:
    d, p, _ = coefficient_matrices.shape
    companion = np.zeros((p * d, p * d))
    for lag in range(d):
        companion[:p, lag * p : (lag + 1) * p] = coefficient_matrices[lag]
    if d > 1:
        companion[p:, :-p] = np.eye(p * (d - 1))
    return float(np.max(np.abs(np.linalg.eigvals(companion))))


def gen_var_panel(
    p: int,
    T: int,
    d_true: int,
    coefficient_matrix,
    noise_sigma: float = 1.0,
    seed: int = 0,
) -> TimeSeriesPanel:
    """Simulate a stationary VAR(d) panel with gaussian innovations.

    ``coefficient_matrix`` has shape (d_true, p, p); entry [l, i, j] is the
    effect of variable j at lag l+1 on variable i.  A burn-in of 10*d_true
    steps is discarded.
    """
    A = np.asarray(coefficient_matrix, dtype=float)
    if A.shape != (d_true, p, p):
        raise ValueError(f"coefficient matrix must have shape ({d_true}, {p}, {p})")
    radius = _spectral_radius(A)
    if radius >= 1.0:
        raise UnstableSystem(f"companion spectral radius {radius:.4f} >= 1")
    rng = np.random.default_rng(seed)
    burn = 10 * d_true
    total = T + burn + d_true
    values = np.zeros((total, p))
    values[:d_true] = rng.normal(0.0, noise_sigma, size=(d_true, p))
    for t in range(d_true, total):
        acc = rng.normal(0.0, noise_sigma, size=p)
        for lag in range(1, d_true + 1):
            acc = acc + A[lag - 1] @ values[t - lag]
        values[t] = acc
    out = values[burn + d_true :]
    return TimeSeriesPanel(
        variable_names=tuple(f"x{i + 1}" for i in range(p)),
        values=out,
        timestamps=np.arange(T),
    )


def _ar1(rng, length, mean, rho, innovation_sigma):
    x = np.empty(length)
    stationary_sd = innovation_sigma / np.sqrt(1.0 - rho**2)
    x[0] = mean + rng.normal(0.0, stationary_sd)
    for t in range(1, length):
        x[t] = mean + rho * (x[t - 1] - mean) + rng.normal(0.0, innovation_sigma)
    return x


def _smoothed_step(length, t1, scale=0.75):
    t = np.arange(length)
    return 1.0 / (1.0 + np.exp(-(t - t1) / scale))


def gen_trigger_scenario(
    spec: ScenarioSpec,
) -> Tuple[TimeSeriesPanel, Tuple[str, str, int]]:
    """Panel with a planted (cause, trigger, changepoint) ground truth.

    The cause is a persistent positive-mean AR(1); the trigger sits near 0
    before ``t1_true`` and near 1 after, with slowly-varying noise; the
    target is cause-driven throughout and gains the interaction term
    ``gamma_interaction * trigger * cause`` once the trigger is on.  All
    remaining columns are white noise.
    """
    rng = np.random.default_rng(spec.seed)
    T = spec.T
    # One extra leading step supplies the lag-1 values for t = 0.
    n = T + 1

    cause = _ar1(
        rng, n, spec.cause_mean, spec.ar_coefficient, spec.cause_innovation_sigma
    )
    trig_noise = _ar1(
        rng,
        n,
        0.0,
        spec.trigger_noise_rho,
        spec.trigger_noise_sigma * np.sqrt(1.0 - spec.trigger_noise_rho**2),
    )
    # Noise rides on the trigger's level: the process is quiet while off and
    # fluctuates around 1 while on.
    trigger = _smoothed_step(n, spec.t1_true + 1) * (1.0 + trig_noise)

    if spec.noise_family == "gamma":
        shape = 4.0
        theta = spec.noise_sigma / np.sqrt(shape)
        eps = rng.gamma(shape, theta, size=T) - shape * theta
    else:
        eps = rng.normal(0.0, spec.noise_sigma, size=T)

    y = (
        spec.cause_strength * cause[:-1]
        + spec.gamma_interaction * trigger[:-1] * cause[:-1]
        + eps
    )

    columns = {"y": y, spec.cause_name: cause[1:], spec.trigger_name: trigger[1:]}
    for i in range(1, spec.p):
        name = f"x{i}"
        if name not in columns:
            columns[name] = rng.normal(0.0, 1.0, size=T)
    names = ["y"] + [f"x{i}" for i in range(1, spec.p)]
    values = np.column_stack([columns[name] for name in names])
    panel = TimeSeriesPanel(
        variable_names=tuple(names),
        values=values,
        timestamps=np.arange(T),
    )
    return panel, (spec.cause_name, spec.trigger_name, spec.t1_true)
