#!/usr/bin/env python3
"""Pie-grid maps of triggering variables per location and pressure level.

Reads a 2D plot-data file and draws, for each pressure level, one panel with
longitude on x and latitude on y; every active location gets a pie with one
equal slice per triggering variable detected there.  A shared legend maps
colors to variable names.

Usage:
    python render_2d.py --input plotdata_2d.jsonl --output pies.png
    python render_2d.py --input plotdata_2d.jsonl --output pies.png --level 700
    python render_2d.py --input plotdata_2d.jsonl --dump-counts
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Patch, Wedge

from plotdata import FORMAT_2D, PlotDataError, color_for, load


def pie_radius(cells):
    """A pie radius small enough that neighbouring grid cells stay distinct."""
    lons = sorted({c["longitude"] for c in cells})
    lats = sorted({c["latitude"] for c in cells})
    spacings = [b - a for a, b in zip(lons, lons[1:])]
    spacings += [b - a for a, b in zip(lats, lats[1:])]
    if not spacings:
        return 0.2
    return 0.35 * min(spacings)


def draw_level(ax, cells, colors, radius):
    for cell in cells:
        triggers = cell["triggers"]
        span = 360.0 / len(triggers)
        for i, name in enumerate(triggers):
            ax.add_patch(
                Wedge(
                    (cell["longitude"], cell["latitude"]),
                    radius,
                    i * span,
                    (i + 1) * span,
                    facecolor=color_for(name, colors),
                    edgecolor="black",
                    linewidth=0.3,
                )
            )
    lons = [c["longitude"] for c in cells]
    lats = [c["latitude"] for c in cells]
    ax.set_xlim(min(lons) - 2 * radius, max(lons) + 2 * radius)
    ax.set_ylim(min(lats) - 2 * radius, max(lats) + 2 * radius)
    ax.set_aspect("equal")
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")


def render(header, cells, output):
    colors = header["colors"]
    levels = sorted({c["pressure_level"] for c in cells})
    if not levels:
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.set_axis_off()
        ax.text(0.5, 0.5, "no triggers", ha="center", va="center")
        legend_names = sorted(colors)
    else:
        fig, axes = plt.subplots(
            1, len(levels), figsize=(5 * len(levels), 4.5), squeeze=False
        )
        radius = pie_radius(cells)
        for ax, level in zip(axes[0], levels):
            at_level = [c for c in cells if c["pressure_level"] == level]
            draw_level(ax, at_level, colors, radius)
            ax.set_title(f"{level:g} hPa")
        legend_names = sorted({t for c in cells for t in c["triggers"]})
    handles = [
        Patch(facecolor=color_for(name, colors), label=name)
        for name in legend_names
    ]
    fig.legend(handles=handles, loc="lower center", ncol=max(len(handles), 1))
    fig.tight_layout(rect=(0, 0.08, 1, 1))
    fig.savefig(output, dpi=150)
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--input", required=True, help="2D plot-data file")
    parser.add_argument("--output", help="output image path")
    parser.add_argument("--level", type=float, help="render only this pressure level")
    parser.add_argument(
        "--dump-counts",
        action="store_true",
        help="print the number of pies that would be drawn",
    )
    args = parser.parse_args(argv)
    if not args.output and not args.dump_counts:
        parser.error("--output or --dump-counts required")

    try:
        header, cells = load(args.input, FORMAT_2D)
        if args.level is not None:
            cells = [c for c in cells if c["pressure_level"] == args.level]
        if args.dump_counts:
            print(f"pies={len(cells)}")
        if args.output:
            render(header, cells, args.output)
    except (PlotDataError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
