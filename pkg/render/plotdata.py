"""Parser for the cause-trigger plot-data files (JSON lines).

The first line is a header record carrying the format name, version and the
variable -> color-id table; every following line is one data record.  This
module is deliberately self-contained: the renderers depend only on the
documented file format, not on the analysis package.
"""

import json

FORMAT_2D = "cause-trigger-plotdata-2d"
FORMAT_3D = "cause-trigger-plotdata-3d"

# Fixed palette indexed by color id; wraps for ids beyond its length.
PALETTE = (
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
    "#937860", "#da8bc3", "#8c8c8c", "#ccb974", "#64b5cd",
    "#2f4b7c", "#ffa600", "#a05195", "#f95d6a", "#003f5c",
)


class PlotDataError(ValueError):
    """The input file does not follow the documented plot-data format."""


def load(path, expected_format):
    """Return (header, records); raise PlotDataError on schema mismatch."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [json.loads(line) for line in fh if line.strip()]
    except json.JSONDecodeError as exc:
        raise PlotDataError(f"{path}: not JSON lines ({exc})") from exc
    if not lines:
        raise PlotDataError(f"{path}: empty file, header record missing")
    header = lines[0]
    if header.get("record") != "header":
        raise PlotDataError(f"{path}: first record is not a header")
    if header.get("format") != expected_format:
        raise PlotDataError(
            f"{path}: format {header.get('format')!r}, expected {expected_format!r}"
        )
    if "colors" not in header:
        raise PlotDataError(f"{path}: header has no color table")
    return header, lines[1:]


def color_for(name, colors):
    if name not in colors:
        raise PlotDataError(f"trigger {name!r} missing from the color table")
    return PALETTE[colors[name] % len(PALETTE)]
