"""Panel representation, standardization and lag-design construction.

Everything downstream (parent discovery, moderation testing, the full
algorithm) consumes the three types defined here.  All types are immutable
after construction and all operations are pure, so they can be shared freely
across parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConstantSeries,
    DimensionMismatch,
    EmptyDesign,
    LagTooLarge,
    UnknownVariable,
)

STD_FLOOR = 1e-12


@dataclass(frozen=True)
class CellMeta:
    """Grid-cell provenance of a panel (one location at one pressure level)."""

    longitude: float
    latitude: float
    pressure_level: float


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TimeSeriesPanel:
    """Aligned multivariate series: rows are time steps, columns variables."""

    variable_names: tuple
    values: np.ndarray  # (T, p)
    timestamps: np.ndarray  # (T,), strictly increasing
    cell_meta: Optional[CellMeta] = None

    def __post_init__(self):
        names = tuple(str(n) for n in self.variable_names)
        object.__setattr__(self, "variable_names", names)
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        values = _freeze(np.atleast_2d(self.values))
        object.__setattr__(self, "values", values)
        ts = np.asarray(self.timestamps)
        ts = ts.copy()
        ts.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        T, p = values.shape
        if T < 2:
            raise ValueError("panel needs at least two time steps")
        if p != len(names):
            raise ValueError(
                f"{p} columns do not match {len(names)} variable names"
            )
        if len(ts) != T:
            raise ValueError("timestamps must match the number of rows")
        if np.any(ts[1:] <= ts[:-1]):
            raise ValueError("timestamps must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("panel contains missing or non-finite values")

    @property
    def n_steps(self) -> int:
        return self.values.shape[0]

    @property
    def n_variables(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index_of(name)]

    def index_of(self, name: str) -> int:
        try:
            return self.variable_names.index(name)
        except ValueError:
            raise UnknownVariable(name) from None


@dataclass(frozen=True)
class StandardizedPanel(TimeSeriesPanel):
    """A z-scored panel retaining the per-column transform parameters."""

    means: np.ndarray = None
    stds: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        if self.means is None or self.stds is None:
            raise ValueError("StandardizedPanel requires means and stds")
        object.__setattr__(self, "means", _freeze(self.means))
        object.__setattr__(self, "stds", _freeze(self.stds))
        if self.means.shape != (self.n_variables,) or self.stds.shape != (
            self.n_variables,
        ):
            raise ValueError("means/stds must hold one value per column")


def standardize(panel: TimeSeriesPanel) -> StandardizedPanel:
    """Z-score every column (population convention: divisor is T).

    Raises ConstantSeries for any column whose standard deviation is at or
    below the degeneracy floor; such a column carries no usable signal.
    """
    means = panel.values.mean(axis=0)
    stds = panel.values.std(axis=0)  # ddof=0
    for name, s in zip(panel.variable_names, stds):
        if s <= STD_FLOOR:
            raise ConstantSeries(name)
    return StandardizedPanel(
        variable_names=panel.variable_names,
        values=(panel.values - means) / stds,
        timestamps=panel.timestamps,
        cell_meta=panel.cell_meta,
        means=means,
        stds=stds,
    )


def destandardize(panel: StandardizedPanel) -> TimeSeriesPanel:
    """Invert :func:`standardize` using the retained transform parameters."""
    return TimeSeriesPanel(
        variable_names=panel.variable_names,
        values=panel.values * panel.stds + panel.means,
        timestamps=panel.timestamps,
        cell_meta=panel.cell_meta,
    )


def restrict(panel, start: int, end: int):
    """Return the sub-panel over the half-open row range [start, end)."""
    if not (0 <= start < end <= panel.n_steps):
        raise ValueError(f"invalid interval ({start}, {end})")
    kwargs = dict(
        variable_names=panel.variable_names,
        values=panel.values[start:end],
        timestamps=panel.timestamps[start:end],
        cell_meta=panel.cell_meta,
    )
    if isinstance(panel, StandardizedPanel):
        return StandardizedPanel(means=panel.means, stds=panel.stds, **kwargs)
    return TimeSeriesPanel(**kwargs)


@dataclass(frozen=True)
class LagDesign:
    """Lagged design matrix with per-variable contiguous column blocks.

    The row predicting time step t (t = d+1 .. n, one-based) holds, for each
    variable in ``variable_order``, the values at t-1, t-2, ..., t-d.  Column
    j*d + (l-1) therefore carries lag l of variable j.
    """

    matrix: np.ndarray  # (n - d, m * d)
    n: int
    d: int
    variable_order: tuple
    target_rows: np.ndarray  # (n - d,)

    def __post_init__(self):
        object.__setattr__(self, "matrix", _freeze(self.matrix))
        object.__setattr__(self, "target_rows", _freeze(self.target_rows))
        object.__setattr__(self, "variable_order", tuple(self.variable_order))
        m = len(self.variable_order)
        if self.matrix.shape != (self.n - self.d, m * self.d):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match "
                f"(n-d, m*d) = ({self.n - self.d}, {m * self.d})"
            )
        if self.target_rows.shape != (self.n - self.d,):
            raise ValueError("target_rows must have n-d entries")

    @property
    def m(self) -> int:
        return len(self.variable_order)

    def block(self, name: str) -> np.ndarray:
        """The d columns belonging to one variable."""
        j = self.block_index(name)
        return self.matrix[:, j * self.d : (j + 1) * self.d]

    def block_index(self, name: str) -> int:
        try:
            return self.variable_order.index(name)
        except ValueError:
            raise UnknownVariable(name) from None

    def columns_for(self, names: Sequence[str]) -> np.ndarray:
        """Concatenated blocks for a subset, in variable_order order."""
        order = [v for v in self.variable_order if v in set(names)]
        if not order:
            return np.empty((self.n - self.d, 0))
        return np.hstack([self.block(v) for v in order])


def build_lag_design(
    panel: TimeSeriesPanel,
    variables: Sequence[str],
    target: str,
    d: int,
) -> LagDesign:
    """Assemble the (n-d) x (m*d) lag matrix over the panel's full extent."""
    if d < 1:
        raise ValueError("lag order d must be >= 1")
    n = panel.n_steps
    if d >= n:
        raise LagTooLarge(f"lag {d} >= series length {n}")
    if not variables:
        raise ValueError("variables must be nonempty")
    variables = tuple(variables)
    cols = []
    for name in variables:
        series = panel.column(name)
        for lag in range(1, d + 1):
            cols.append(series[d - lag : n - lag])
    matrix = np.column_stack(cols)
    target_rows = panel.column(target)[d:]
    return LagDesign(
        matrix=matrix,
        n=n,
        d=d,
        variable_order=variables,
        target_rows=target_rows,
    )


def remove_variable_block(design: LagDesign, s: str) -> LagDesign:
    """Drop one variable's d columns, preserving the remaining order."""
    j = design.block_index(s)
    if design.m == 1:
        raise EmptyDesign(
            f"removing {s!r} would leave an empty design (m=1)"
        )
    keep = np.ones(design.matrix.shape[1], dtype=bool)
    keep[j * design.d : (j + 1) * design.d] = False
    order = tuple(v for v in design.variable_order if v != s)
    return LagDesign(
        matrix=design.matrix[:, keep],
        n=design.n,
        d=design.d,
        variable_order=order,
        target_rows=design.target_rows,
    )


def aggregate_design(
    design: LagDesign,
    mode: str = "unit",
    coefficients: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Collapse the design into a single (n-d)-vector.

    ``unit`` multiplies by a vector of ones (plain row sums); ``coefficient``
    multiplies by the supplied per-column coefficients.
    """
    if mode == "unit":
        return design.matrix.sum(axis=1)
    if mode == "coefficient":
        if coefficients is None:
            raise DimensionMismatch("coefficient mode requires coefficients")
        beta = np.asarray(coefficients, dtype=float)
        if beta.shape != (design.matrix.shape[1],):
            raise DimensionMismatch(
                f"{beta.shape[0] if beta.ndim else 0} coefficients for "
                f"{design.matrix.shape[1]} columns"
            )
        return design.matrix @ beta
    raise ValueError(f"unknown aggregation mode {mode!r}")
