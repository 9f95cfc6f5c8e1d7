"""Boundary traces u(t, 0) and u(t, L) of two runs, overlaid.

Intended for the dynamic vs reflecting boundary comparison: the traces agree
until the wave reaches the ends and separate afterwards.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import DPI, FIGSIZE, FigureSpec
from .csvio import CsvFormatError, read_snapshots


def render(spec: FigureSpec) -> None:
    fig, (ax_left, ax_right) = plt.subplots(2, 1, figsize=FIGSIZE, dpi=DPI, sharex=True)
    for path in spec.inputs:
        t, _x, u = read_snapshots(path)
        label = Path(path).parent.name or Path(path).stem
        ax_left.plot(t, u[:, 0], label=label)
        ax_right.plot(t, u[:, -1], label=label)
    ax_left.set_ylabel("u(t, 0)")
    ax_right.set_ylabel("u(t, L)")
    ax_right.set_xlabel("t")
    ax_left.legend()
    fig.savefig(spec.output)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-compare",
        description="Overlay the boundary traces of two snapshots.csv files.",
    )
    parser.add_argument("first", help="snapshots.csv of the first run")
    parser.add_argument("second", help="snapshots.csv of the second run")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(
            FigureSpec(
                inputs=(args.first, args.second), kind="boundary-comparison", output=args.output
            )
        )
    except CsvFormatError as exc:
        print(f"plot-compare: {exc}", file=sys.stderr)
        return 1
    return 0


def console_main() -> None:
    raise SystemExit(main())
