"""Scikit-learn style estimator wrapping the full algorithm.

``CauseTrigger`` follows the fit/attributes convention: construct with
hyperparameters, call ``fit`` on a (T, p) array or a TimeSeriesPanel, then
read ``causes_``, ``triggers_`` and ``pairs_``.  ``get_params`` and
``set_params`` come from sklearn's BaseEstimator, so the class clones and
grid-searches like any other estimator.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .algorithm import AlgorithmConfig, run
from .hmml import GeneticConfig
from .panel import TimeSeriesPanel


class CauseTrigger(BaseEstimator):
    """Separates causal from triggering variables of one target series.

    Parameters mirror :class:`~causetrigger.algorithm.AlgorithmConfig`;
    ``target`` names the effect variable (default ``"y"``; for array input
    without ``variable_names`` the columns are named x0, x1, ... and
    ``target`` must name one of them).
    """

    def __init__(
        self,
        target: str = "y",
        variable_names: Optional[Sequence[str]] = None,
        d: Optional[int] = None,
        d_max: int = 5,
        min_size_I2: int = 30,
        threshold_y: float = 0.0,
        threshold_x: float = 0.0,
        alpha: float = 0.05,
        aggregation_mode: str = "unit",
        backend: str = "exhaustive",
        emit_all_causes: bool = False,
        seed: int = 0,
    ):
        self.target = target
        self.variable_names = variable_names
        self.d = d
        self.d_max = d_max
        self.min_size_I2 = min_size_I2
        self.threshold_y = threshold_y
        self.threshold_x = threshold_x
        self.alpha = alpha
        self.aggregation_mode = aggregation_mode
        self.backend = backend
        self.emit_all_causes = emit_all_causes
        self.seed = seed

    def _config(self) -> AlgorithmConfig:
        return AlgorithmConfig(
            d=self.d,
            d_max=self.d_max,
            min_size_I2=self.min_size_I2,
            threshold_y=self.threshold_y,
            threshold_x=self.threshold_x,
            alpha=self.alpha,
            aggregation_mode=self.aggregation_mode,
            backend=self.backend,
            emit_all_causes=self.emit_all_causes,
            seed=self.seed,
            genetic=GeneticConfig(seed=self.seed),
        )

    def _as_panel(self, X) -> TimeSeriesPanel:
        if isinstance(X, TimeSeriesPanel):
            return X
        values = np.asarray(X, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"expected a 2D array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("input contains NaN or infinite values")
        names = self.variable_names
        if names is None:
            names = [f"x{i}" for i in range(values.shape[1])]
        return TimeSeriesPanel(
            variable_names=tuple(names),
            values=values,
            timestamps=np.arange(values.shape[0]),
        )

    def fit(self, X, y=None):
        """Run the algorithm; X is a (T, p) array or a TimeSeriesPanel."""
        panel = self._as_panel(X)
        output = run(panel, self.target, self._config())
        self.output_ = output
        self.causes_ = set(output.causes)
        self.triggers_ = set(output.triggers)
        self.pairs_ = [(p.cause, p.trigger) for p in output.pairs]
        self.split_ = output.split
        self.stop_reason_ = output.stop_reason
        self.n_features_in_ = panel.n_variables
        self.feature_names_in_ = np.asarray(panel.variable_names, dtype=object)
        return self

    def fit_predict(self, X, y=None):
        """Fit and return the (cause, trigger) pairs."""
        return self.fit(X).pairs_
