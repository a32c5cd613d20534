"""Command-line entry points: analyze, synth-validate, split, version.

Exit codes: 0 success, 1 fatal configuration or I/O error, 2 completed with
per-cell errors (outputs are still written).  Diagnostics go to stderr with
machine-readable reason codes; stdout is stable line-oriented key=value
output intended for scripting.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .algorithm import AlgorithmConfig, moderation_test, run
from .changepoint import find_split
from .panel import standardize
from .configfile import build_algorithm_config, parse_kv_file
from .errors import CauseTriggerError
from .pipeline import (
    RunManifest,
    derive_wind_vars,
    ingest_csv,
    run_grid,
    write_pairs_csv,
    write_plotdata,
)
from .synth import ScenarioSpec, gen_trigger_scenario

ENV_WORKERS = "CAUSETRIGGER_WORKERS"
ENV_SEED = "CAUSETRIGGER_SEED"


def _fail(code: str, message: str) -> int:
    print(f"error: {code}: {message}", file=sys.stderr)
    return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causetrigger",
        description="Separate causal from triggering variables in "
        "multivariate time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run the algorithm over a grid CSV")
    analyze.add_argument("--config", required=True, help="key=value config file")
    analyze.add_argument("--seed", type=int, default=None)
    analyze.add_argument("--workers", type=int, default=None)
    analyze.add_argument("--output-dir", default=None)
    analyze.add_argument("--alpha", type=float, default=None)
    analyze.add_argument("--lag", type=int, default=None)
    analyze.add_argument("--min-i2", type=int, default=None)
    analyze.add_argument("--aggregation", choices=("unit", "coefficient"), default=None)
    analyze.add_argument("--backend", choices=("exhaustive", "genetic"), default=None)

    synth = sub.add_parser(
        "synth-validate", help="recovery and false-pair rates on a scenario"
    )
    synth.add_argument("scenario", help="scenario spec file (key=value)")
    synth.add_argument("--repetitions", type=int, default=100)
    synth.add_argument("--seed", type=int, default=None)

    split = sub.add_parser("split", help="changepoint diagnostic on one column")
    split.add_argument("csv", help="CSV file with a header row")
    split.add_argument("--column", required=True)
    split.add_argument("--min-size", type=int, default=30)
    split.add_argument("--threshold", type=float, default=0.0)

    sub.add_parser("version", help="print the package version")
    return parser


def _flag_overrides(args) -> dict:
    flags = {
        "seed": args.seed,
        "alpha": args.alpha,
        "lag": args.lag,
        "min_i2": args.min_i2,
        "aggregation": args.aggregation,
        "backend": args.backend,
    }
    return {k: str(v) for k, v in flags.items() if v is not None}


def cmd_analyze(args) -> int:
    config_path = Path(args.config)
    if not config_path.is_file():
        return _fail("config.not-found", str(config_path))
    try:
        mapping = parse_kv_file(config_path)
    except ValueError as exc:
        return _fail("config.parse", str(exc))

    if "input" not in mapping:
        return _fail("config.input-missing", "config.input missing")
    input_path = Path(mapping["input"])

    # Precedence: flags > environment > config file > defaults.
    if ENV_SEED in os.environ:
        mapping["seed"] = os.environ[ENV_SEED]
    mapping.update(_flag_overrides(args))
    try:
        config = build_algorithm_config(mapping)
    except ValueError as exc:
        return _fail("config.invalid", str(exc))

    workers = int(mapping.get("workers", "1"))
    if ENV_WORKERS in os.environ:
        workers = int(os.environ[ENV_WORKERS])
    if args.workers is not None:
        workers = args.workers

    output_dir = Path(args.output_dir or mapping.get("output_dir", "."))
    target = mapping.get("target", "ws")

    schema = None
    if "schema" in mapping:
        schema = [c.strip() for c in mapping["schema"].split(",") if c.strip()]

    if not input_path.is_file():
        return _fail("input.not-found", str(input_path))
    try:
        cells, skipped = ingest_csv(input_path, schema=schema)
    except CauseTriggerError as exc:
        return _fail("input.invalid", str(exc))

    prepared = []
    derive_failures = []
    wind_vars = ("ws", "wd", "sin_wd")
    for key, panel in cells:
        has_components = {"u", "v"} <= set(panel.variable_names)
        needs_derived = any(v not in panel.variable_names for v in wind_vars)
        if has_components and needs_derived:
            try:
                panel = derive_wind_vars(panel)
            except CauseTriggerError as exc:
                derive_failures.append((key, f"{type(exc).__name__}: {exc}"))
                continue
        prepared.append((key, panel))

    manifest = RunManifest(
        input_path=str(input_path),
        variables=prepared[0][1].variable_names if prepared else (),
        config=config,
        seed=config.seed,
        version=__version__,
    )
    for key, reason in skipped:
        manifest.mark(key, f"skipped({reason})")
    for key, reason in derive_failures:
        manifest.mark(key, f"error({reason})")

    outputs, manifest = run_grid(
        prepared, target=target, config=config, parallelism=workers, manifest=manifest
    )

    output_dir.mkdir(parents=True, exist_ok=True)
    try:
        write_pairs_csv(outputs, output_dir / "pairs.csv")
        write_plotdata(
            outputs, output_dir / "plotdata_2d.jsonl", output_dir / "plotdata_3d.jsonl"
        )
        manifest.write(output_dir / "manifest.json")
    except OSError as exc:
        return _fail("output.io", str(exc))

    n_pairs = sum(len(out.pairs) for _, out in outputs)
    print(f"cells_ok={len(outputs)}")
    print(f"cells_skipped={len(skipped)}")
    errors = [s for s in manifest.cell_status.values() if s.startswith("error")]
    print(f"cells_error={len(errors)}")
    print(f"pairs={n_pairs}")
    print(f"output_dir={output_dir}")
    return 2 if errors else 0


def cmd_synth_validate(args) -> int:
    if args.repetitions < 1:
        return _fail("repetitions.invalid", "repetitions must be >= 1")
    scenario_path = Path(args.scenario)
    if not scenario_path.is_file():
        return _fail("scenario.not-found", str(scenario_path))
    try:
        mapping = parse_kv_file(scenario_path)
        base = ScenarioSpec.from_mapping(mapping)
    except ValueError as exc:
        return _fail("scenario.parse", str(exc))
    seed0 = args.seed if args.seed is not None else base.seed

    def rates(spec_template, planted_gamma, exact_pair=True):
        """(hit rate, F rejections, F tests run on the planted trigger).

        A hit is a repetition whose pairs contain the planted
        (cause, trigger); on the null (g=0) any pair naming the planted
        trigger counts, since no trigger claim is justified there.
        """
        spec0 = dataclasses.replace(spec_template, gamma_interaction=planted_gamma)
        hits = 0
        f_rejections = 0
        f_total = 0
        for rep in range(args.repetitions):
            spec = dataclasses.replace(spec0, seed=seed0 + rep)
            panel, (cause, trigger, _) = gen_trigger_scenario(spec)
            config = AlgorithmConfig(d=spec.d_true, seed=seed0 + rep)
            output = run(panel, "y", config)
            if any(
                p.trigger == trigger and (p.cause == cause or not exact_pair)
                for p in output.pairs
            ):
                hits += 1
            if (
                output.parents_I2 is not None
                and trigger in output.parents_I2.parents
            ):
                moderation = moderation_test(
                    standardize(panel), "y", output.parents_I2, trigger, config
                )
                f_total += 1
                if moderation.f.reject_h0:
                    f_rejections += 1
        return hits / args.repetitions, f_rejections, f_total

    recovery, f_rej, f_tot = rates(base, base.gamma_interaction)
    null_rate, _, _ = rates(base, 0.0, exact_pair=False)
    print(f"recovery_rate={recovery:.4f}")
    print(f"null_false_pair_rate={null_rate:.4f}")
    print(f"f_rejection_rate={f_rej / f_tot if f_tot else 0.0:.4f}")
    return 0


def cmd_split(args) -> int:
    path = Path(args.csv)
    if not path.is_file():
        return _fail("input.not-found", str(path))
    try:
        frame = pd.read_csv(path)
    except Exception as exc:
        return _fail("input.invalid", str(exc))
    if args.column not in frame.columns:
        return _fail("column.not-found", args.column)
    series = frame[args.column].to_numpy(dtype=float)
    if np.isnan(series).any():
        return _fail("column.invalid", "column contains missing values")
    try:
        result = find_split(series, args.min_size, args.threshold)
    except CauseTriggerError as exc:
        return _fail("split.failed", str(exc))
    print(f"t1={result.t1}")
    print(f"mean_I1={result.mean_I1!r}")
    print(f"mean_I2={result.mean_I2!r}")
    print(f"delta={result.delta!r}")
    print(f"accepted={'true' if result.accepted else 'false'}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "version":
        print(__version__)
        return 0
    if args.command == "analyze":
        return cmd_analyze(args)
    if args.command == "synth-validate":
        return cmd_synth_validate(args)
    if args.command == "split":
        return cmd_split(args)
    return 1


if __name__ == "__main__":
    sys.exit(main())
