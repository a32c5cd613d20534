#!/usr/bin/env python3
"""3D voxel view of triggering variables: one cube per detection.

Reads a 3D plot-data file and places a colored cube at (longitude,
latitude, height_km) for every trigger record; only active locations
appear.  Multiple triggers at one location and level sit side by side.

Usage:
    python render_3d.py --input plotdata_3d.jsonl --output cubes.png
    python render_3d.py --input plotdata_3d.jsonl --dump-counts
"""

import argparse
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Patch

from plotdata import FORMAT_3D, PlotDataError, color_for, load


def cube_size(records):
    lons = sorted({r["longitude"] for r in records})
    lats = sorted({r["latitude"] for r in records})
    spacings = [b - a for a, b in zip(lons, lons[1:])]
    spacings += [b - a for a, b in zip(lats, lats[1:])]
    base = min(spacings) if spacings else 0.5
    return 0.6 * base


def render(header, records, output):
    colors = header["colors"]
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")
    names = sorted({r["trigger"] for r in records})
    if records:
        size = cube_size(records)
        grouped = defaultdict(list)
        for rec in records:
            grouped[(rec["longitude"], rec["latitude"], rec["height_km"])].append(
                rec["trigger"]
            )
        for (lon, lat, height), triggers in sorted(grouped.items()):
            width = size / len(triggers)
            for i, name in enumerate(sorted(triggers)):
                ax.bar3d(
                    lon - size / 2 + i * width,
                    lat - size / 2,
                    height,
                    width,
                    size,
                    0.35,
                    color=color_for(name, colors),
                    edgecolor="black",
                    linewidth=0.2,
                    shade=True,
                )
        heights = sorted({r["height_km"] for r in records})
        ax.set_zlim(0, max(heights) + 1.0)
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_zlabel("height [km]")
    handles = [
        Patch(facecolor=color_for(name, colors), label=name)
        for name in (names or sorted(colors))
    ]
    fig.legend(handles=handles, loc="lower center", ncol=max(len(handles), 1))
    fig.savefig(output, dpi=150)
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--input", required=True, help="3D plot-data file")
    parser.add_argument("--output", help="output image path")
    parser.add_argument(
        "--level", type=float,
        help="render only the height this pressure level maps to",
    )
    parser.add_argument(
        "--dump-counts",
        action="store_true",
        help="print the number of cubes that would be drawn",
    )
    args = parser.parse_args(argv)
    if not args.output and not args.dump_counts:
        parser.error("--output or --dump-counts required")

    try:
        header, records = load(args.input, FORMAT_3D)
        if args.level is not None:
            heights = header.get("heights_km", {})
            key = str(int(args.level))
            if key not in heights:
                raise PlotDataError(
                    f"level {args.level:g} not in the file's height table"
                )
            records = [r for r in records if r["height_km"] == heights[key]]
        if args.dump_counts:
            print(f"cubes={len(records)}")
        if args.output:
            render(header, records, args.output)
    except (PlotDataError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
