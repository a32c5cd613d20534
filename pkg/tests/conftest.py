import csv

import numpy as np
import pandas as pd
import pytest

from causetrigger import TimeSeriesPanel, gen_trigger_scenario
from causetrigger.synth import ScenarioSpec


def make_panel(columns: dict, cell_meta=None) -> TimeSeriesPanel:
    names = tuple(columns)
    values = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    return TimeSeriesPanel(
        variable_names=names,
        values=values,
        timestamps=np.arange(values.shape[0]),
        cell_meta=cell_meta,
    )


def write_grid_csv(path, cells):
    """cells: list of (lon, lat, level, columns-dict); hourly timestamps."""
    names = list(next(iter(cells))[3])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "longitude", "latitude", "pressure_level"] + names)
        for lon, lat, level, columns in cells:
            T = len(next(iter(columns.values())))
            times = pd.date_range("2023-02-04", periods=T, freq="h", tz="UTC")
            for t in range(T):
                writer.writerow(
                    [times[t].isoformat(), lon, lat, level]
                    + [repr(float(columns[n][t])) for n in names]
                )


def scenario_columns(seed, gamma=0.8):
    spec = ScenarioSpec(seed=seed, gamma_interaction=gamma)
    panel, truth = gen_trigger_scenario(spec)
    return {n: panel.column(n) for n in panel.variable_names}, truth


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
