"""Space-time waterfall of one run's snapshots."""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import DPI, FIGSIZE, FigureSpec
from .csvio import CsvFormatError, read_snapshots


def render(spec: FigureSpec) -> None:
    t, x, u = read_snapshots(spec.inputs[0])
    fig = plt.figure(figsize=FIGSIZE, dpi=DPI)
    ax = fig.add_subplot(projection="3d")
    xx, tt = np.meshgrid(x, t)
    ax.plot_surface(xx, tt, u, cmap="viridis", rstride=1, cstride=1, linewidth=0)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_zlabel("u")
    fig.savefig(spec.output)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-waterfall", description="Space-time surface of a snapshots.csv file."
    )
    parser.add_argument("snapshots", help="snapshots.csv written by `dynwave run`")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(FigureSpec(inputs=(args.snapshots,), kind="waterfall", output=args.output))
    except CsvFormatError as exc:
        print(f"plot-waterfall: {exc}", file=sys.stderr)
        return 1
    return 0


def console_main() -> None:
    raise SystemExit(main())
