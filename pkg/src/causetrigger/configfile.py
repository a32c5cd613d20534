"""Plain-text key=value configuration files (runs and synthetic scenarios)."""

from __future__ import annotations

import dataclasses
from typing import Dict, Optional

from .algorithm import AlgorithmConfig
from .hmml import GeneticConfig


def parse_kv_file(path) -> Dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, blanks ignored."""
    mapping: Dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            mapping[key.strip()] = value.strip()
    return mapping


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def parse_bool(value: str) -> bool:
    low = value.lower()
    if low in _BOOL_TRUE:
        return True
    if low in _BOOL_FALSE:
        return False
    raise ValueError(f"not a boolean: {value!r}")


# Keys consumed by the runner rather than by AlgorithmConfig.
RUN_KEYS = ("input", "output_dir", "target", "workers", "schema")

_CONFIG_PARSERS = {
    "d": lambda v: None if v.lower() in ("auto", "none") else int(v),
    "d_max": int,
    "min_size_I2": int,
    "threshold_y": float,
    "threshold_x": float,
    "alpha": float,
    "aggregation_mode": str,
    "backend": str,
    "absolute_split": parse_bool,
    "emit_all_causes": parse_bool,
    "seed": int,
    "genetic_population_size": int,
    "genetic_generations": int,
    "genetic_mutation_rate": lambda v: None if v.lower() == "auto" else float(v),
    "genetic_tournament_size": int,
}

# Accepted aliases so CLI flag names map onto config keys one-to-one.
_ALIASES = {"lag": "d", "min_i2": "min_size_I2", "aggregation": "aggregation_mode"}


def build_algorithm_config(
    mapping: Dict[str, str], base: Optional[AlgorithmConfig] = None
) -> AlgorithmConfig:
    """AlgorithmConfig from string-valued keys (unknown keys rejected)."""
    config = base or AlgorithmConfig()
    plain: Dict[str, object] = {}
    genetic = dataclasses.asdict(config.genetic)
    for key, raw in mapping.items():
        key = _ALIASES.get(key, key)
        if key in RUN_KEYS:
            continue
        if key not in _CONFIG_PARSERS:
            raise ValueError(f"unknown configuration key {key!r}")
        value = _CONFIG_PARSERS[key](raw)
        if key.startswith("genetic_"):
            genetic[key[len("genetic_") :]] = value
        else:
            plain[key] = value
    return dataclasses.replace(
        config, genetic=GeneticConfig(**genetic), **plain
    )
