"""Energy series of one or more runs on shared axes."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import DPI, FIGSIZE, FigureSpec
from .csvio import CsvFormatError, read_energy


def render(spec: FigureSpec) -> None:
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    for path in spec.inputs:
        t, j = read_energy(path)
        ax.plot(t, j, label=Path(path).parent.name or Path(path).stem)
    ax.set_xlabel("t")
    ax.set_ylabel("J")
    ax.set_title("discrete energy over time")
    ax.legend()
    fig.savefig(spec.output)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-energy", description="Energy series of one or more energy.csv files."
    )
    parser.add_argument("energy", nargs="+", help="energy.csv files written by `dynwave run`")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(FigureSpec(inputs=tuple(args.energy), kind="energy-series", output=args.output))
    except CsvFormatError as exc:
        print(f"plot-energy: {exc}", file=sys.stderr)
        return 1
    return 0


def console_main() -> None:
    raise SystemExit(main())
