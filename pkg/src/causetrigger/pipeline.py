"""CSV ingestion, derived wind variables, grid batching and file emission.

The input CSV carries one row per (time, location, pressure level); rows are
grouped into one panel per grid cell and each cell is analyzed independently,
so a failure in one cell never poisons the rest of the grid.  Emission
covers the cause/trigger pairs CSV, the 2D and 3D plot-data files consumed
by the renderers, and a JSON run manifest with one status per attempted
cell.
"""

from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .algorithm import AlgorithmConfig, AlgorithmOutput, run
from .errors import MissingComponent, NonUniformSampling, SchemaError
from .panel import CellMeta, TimeSeriesPanel

PRESSURE_LEVELS = (500.0, 700.0, 975.0)
HEIGHT_KM = {500.0: 5.5, 700.0: 3.0, 975.0: 0.6}

REQUIRED_COLUMNS = ("time", "longitude", "latitude", "pressure_level")

# Stable color ids: canonical variables first, anything else appended in
# sorted order by the emitter.  The table is also embedded in every
# plot-data header, so consumers never have to reproduce this list.
CANONICAL_VARIABLES = (
    "d", "z", "o3", "pv", "r", "w", "t", "u", "v", "ws", "wd", "sin_wd",
)

PLOTDATA_2D_FORMAT = "cause-trigger-plotdata-2d"
PLOTDATA_3D_FORMAT = "cause-trigger-plotdata-3d"


@dataclass(frozen=True)
class GridCellKey:
    longitude: float
    latitude: float
    pressure_level: float

    def __post_init__(self):
        if float(self.pressure_level) not in PRESSURE_LEVELS:
            raise ValueError(
                f"pressure level {self.pressure_level} not one of {PRESSURE_LEVELS}"
            )

    @property
    def sort_key(self):
        return (self.pressure_level, self.latitude, self.longitude)

    def label(self) -> str:
        return f"{self.longitude!r},{self.latitude!r},{self.pressure_level!r}"


@dataclass
class RunManifest:
    """One status line per attempted cell plus the run's provenance."""

    input_path: str
    variables: Tuple[str, ...]
    config: AlgorithmConfig
    seed: int
    version: str
    cell_status: Dict[GridCellKey, str] = field(default_factory=dict)

    def mark(self, key: GridCellKey, status: str):
        self.cell_status[key] = status

    def to_dict(self) -> dict:
        return {
            "input_path": self.input_path,
            "variables": list(self.variables),
            "config": dataclasses.asdict(self.config),
            "seed": self.seed,
            "version": self.version,
            "cells": {
                key.label(): status
                for key, status in sorted(
                    self.cell_status.items(), key=lambda kv: kv[0].sort_key
                )
            },
        }

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


def ingest_csv(
    path,
    schema: Optional[Sequence[str]] = None,
) -> Tuple[List[Tuple[GridCellKey, TimeSeriesPanel]], List[Tuple[GridCellKey, str]]]:
    """Group rows by grid cell into time-sorted panels.

    ``schema`` optionally names the variable columns that must be present;
    by default every non-key column is taken as a variable.  Cells holding
    missing values are skipped (second return value carries the reasons);
    non-uniform time spacing, including duplicated timestamps, is a data
    defect and raises.
    """
    frame = pd.read_csv(path)
    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f"missing required columns: {missing}")
    variable_cols = [c for c in frame.columns if c not in REQUIRED_COLUMNS]
    if schema is not None:
        absent = [c for c in schema if c not in variable_cols]
        if absent:
            raise SchemaError(f"missing variable columns: {absent}")
        variable_cols = list(schema)
    if not variable_cols:
        raise SchemaError("no variable columns found")

    try:
        frame["time"] = pd.to_datetime(frame["time"], utc=True, format="ISO8601")
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"unparseable time column: {exc}") from exc

    cells: List[Tuple[GridCellKey, TimeSeriesPanel]] = []
    skipped: List[Tuple[GridCellKey, str]] = []
    grouped = frame.groupby(["longitude", "latitude", "pressure_level"], sort=True)
    for (lon, lat, level), group in grouped:
        key = GridCellKey(float(lon), float(lat), float(level))
        group = group.sort_values("time")
        times = group["time"].astype("int64").to_numpy()  # ns since epoch
        diffs = np.diff(times)
        if len(diffs) == 0:
            skipped.append((key, "fewer than two rows"))
            continue
        if np.any(diffs != diffs[0]) or diffs[0] <= 0:
            raise NonUniformSampling(
                f"cell {key.label()} is not uniformly sampled"
            )
        data = group[variable_cols].to_numpy(dtype=float)
        if np.isnan(data).any():
            skipped.append((key, "missing values"))
            continue
        panel = TimeSeriesPanel(
            variable_names=tuple(variable_cols),
            values=data,
            timestamps=times,
            cell_meta=CellMeta(key.longitude, key.latitude, key.pressure_level),
        )
        cells.append((key, panel))
    cells.sort(key=lambda kv: kv[0].sort_key)
    return cells, skipped


# ---------------------------------------------------------------------------
# Derived wind variables
# ---------------------------------------------------------------------------


def derive_wind_vars(panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """Add wind speed, meteorological direction and its sine from u and v.

    Direction is the bearing the wind comes from (0 = north); calm air
    (u = v = 0) gets direction 0 by convention.  Columns already present
    are left untouched.
    """
    for component in ("u", "v"):
        if component not in panel.variable_names:
            raise MissingComponent(f"wind component {component!r} missing")
    u = panel.column("u")
    v = panel.column("v")
    calm = (u == 0.0) & (v == 0.0)

    derived = {}
    derived["ws"] = np.hypot(u, v)
    wd = np.mod(180.0 + np.degrees(np.arctan2(u, v)), 360.0)
    wd = np.where(calm, 0.0, wd)
    derived["wd"] = wd
    derived["sin_wd"] = np.sin(np.radians(wd))

    names = list(panel.variable_names)
    columns = [panel.values]
    for name in ("ws", "wd", "sin_wd"):
        if name not in panel.variable_names:
            names.append(name)
            columns.append(derived[name][:, None])
    return TimeSeriesPanel(
        variable_names=tuple(names),
        values=np.hstack(columns),
        timestamps=panel.timestamps,
        cell_meta=panel.cell_meta,
    )


# ---------------------------------------------------------------------------
# Grid execution
# ---------------------------------------------------------------------------


def cell_seed(base_seed: int, key: GridCellKey) -> int:
    """Deterministic per-cell seed, independent of worker scheduling."""
    entropy = (
        int(base_seed),
        int(round(key.longitude * 1e6)) & 0xFFFFFFFF,
        int(round(key.latitude * 1e6)) & 0xFFFFFFFF,
        int(key.pressure_level),
    )
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def _run_cell(args):
    key, panel, target, config = args
    try:
        output = run(panel, target, config)
        return key, output, None
    except Exception as exc:  # isolate the cell, whatever went wrong
        return key, None, f"{type(exc).__name__}: {exc}"


def run_grid(
    cells: Sequence[Tuple[GridCellKey, TimeSeriesPanel]],
    target: str = "ws",
    config: AlgorithmConfig = AlgorithmConfig(),
    parallelism: int = 1,
    manifest: Optional[RunManifest] = None,
) -> Tuple[List[Tuple[GridCellKey, AlgorithmOutput]], RunManifest]:
    """Run the algorithm on every cell, isolating per-cell failures.

    Results come back sorted by cell key, and each cell's seed depends only
    on the configured seed and the cell coordinates, so output is identical
    for any worker count.
    """
    if manifest is None:
        variables = cells[0][1].variable_names if cells else ()
        manifest = RunManifest(
            input_path="",
            variables=tuple(variables),
            config=config,
            seed=config.seed,
            version=_version(),
        )
    jobs = [
        (key, panel, target, dataclasses.replace(config, seed=cell_seed(config.seed, key)))
        for key, panel in cells
    ]
    if parallelism > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(job) for job in jobs]

    outputs = []
    for key, output, error in sorted(results, key=lambda r: r[0].sort_key):
        if error is not None:
            manifest.mark(key, f"error({error})")
        else:
            manifest.mark(key, "ok")
            outputs.append((key, output))
    return outputs, manifest


def _version() -> str:
    from . import __version__

    return __version__


# ---------------------------------------------------------------------------
# Pairs CSV
# ---------------------------------------------------------------------------

PAIRS_FIELDS = (
    "longitude",
    "latitude",
    "pressure_level",
    "cause",
    "trigger",
    "f_statistic",
    "p_value",
)


@dataclass(frozen=True)
class PairRecord:
    longitude: float
    latitude: float
    pressure_level: float
    cause: str
    trigger: str
    f_statistic: float
    p_value: float


def pair_records(
    outputs: Sequence[Tuple[GridCellKey, AlgorithmOutput]],
) -> List[PairRecord]:
    records = []
    for key, output in sorted(outputs, key=lambda kv: kv[0].sort_key):
        for pair in output.pairs:
            records.append(
                PairRecord(
                    longitude=key.longitude,
                    latitude=key.latitude,
                    pressure_level=key.pressure_level,
                    cause=pair.cause,
                    trigger=pair.trigger,
                    f_statistic=pair.moderation.f.statistic,
                    p_value=pair.moderation.f.p_value,
                )
            )
    return records


def _format_float(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return repr(float(x))


def write_pairs_csv(
    outputs: Sequence[Tuple[GridCellKey, AlgorithmOutput]], path
) -> None:
    """One row per (cause, trigger) pair, sorted by (level, lat, lon)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PAIRS_FIELDS)
        for rec in pair_records(outputs):
            writer.writerow(
                [
                    _format_float(rec.longitude),
                    _format_float(rec.latitude),
                    _format_float(rec.pressure_level),
                    rec.cause,
                    rec.trigger,
                    _format_float(rec.f_statistic),
                    _format_float(rec.p_value),
                ]
            )


def read_pairs_csv(path) -> List[PairRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != PAIRS_FIELDS:
            raise SchemaError(f"unexpected pairs-CSV header: {reader.fieldnames}")
        for row in reader:
            records.append(
                PairRecord(
                    longitude=float(row["longitude"]),
                    latitude=float(row["latitude"]),
                    pressure_level=float(row["pressure_level"]),
                    cause=row["cause"],
                    trigger=row["trigger"],
                    f_statistic=float(row["f_statistic"]),
                    p_value=float(row["p_value"]),
                )
            )
    return records


# ---------------------------------------------------------------------------
# Plot data
# ---------------------------------------------------------------------------


def color_table(names: Sequence[str]) -> Dict[str, int]:
    """Stable variable -> color id mapping shared by both plot files."""
    table = {name: i for i, name in enumerate(CANONICAL_VARIABLES)}
    extras = sorted(set(names) - set(CANONICAL_VARIABLES))
    for offset, name in enumerate(extras):
        table[name] = len(CANONICAL_VARIABLES) + offset
    return {name: table[name] for name in sorted(set(names), key=lambda n: table[n])}


def _active_cells(outputs):
    for key, output in sorted(outputs, key=lambda kv: kv[0].sort_key):
        triggers = sorted(output.triggers)
        if triggers:
            yield key, triggers


def write_plotdata(
    outputs: Sequence[Tuple[GridCellKey, AlgorithmOutput]], path_2d, path_3d
) -> None:
    """Emit the 2D (pie-per-location) and 3D (cube-per-trigger) files.

    Both are JSON-lines with a self-describing header record carrying the
    format name, version and the color table; only cells with at least one
    trigger appear.
    """
    all_triggers = sorted({t for _, out in outputs for t in out.triggers})
    colors = color_table(all_triggers)

    with open(path_2d, "w", encoding="utf-8") as fh:
        header = {
            "record": "header",
            "format": PLOTDATA_2D_FORMAT,
            "version": 1,
            "colors": colors,
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for key, triggers in _active_cells(outputs):
            fh.write(
                json.dumps(
                    {
                        "record": "cell",
                        "longitude": key.longitude,
                        "latitude": key.latitude,
                        "pressure_level": key.pressure_level,
                        "triggers": triggers,
                    },
                    sort_keys=True,
                )
                + "\n"
            )

    with open(path_3d, "w", encoding="utf-8") as fh:
        header = {
            "record": "header",
            "format": PLOTDATA_3D_FORMAT,
            "version": 1,
            "colors": colors,
            "heights_km": {str(int(k)): v for k, v in HEIGHT_KM.items()},
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for key, triggers in _active_cells(outputs):
            for trigger in triggers:
                fh.write(
                    json.dumps(
                        {
                            "record": "cube",
                            "longitude": key.longitude,
                            "latitude": key.latitude,
                            "height_km": HEIGHT_KM[key.pressure_level],
                            "trigger": trigger,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )


def read_plotdata(path) -> Tuple[dict, List[dict]]:
    """Parse a plot-data file into (header, records)."""
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("record") != "header":
        raise SchemaError(f"{path}: missing plot-data header")
    return lines[0], lines[1:]
