"""Log-log convergence plot with a slope-2 guide and the fitted slope.

The annotated slope is the least-squares slope of log(err) vs log(dx) over
the rows with positive composite error; it is also printed to stdout so the
fit can be checked without parsing the image.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import DPI, FIGSIZE, FigureSpec
from .csvio import CsvFormatError, read_convergence


def fitted_slope(dx: np.ndarray, err: np.ndarray) -> float:
    """Least-squares slope of log(err) vs log(dx) over positive errors."""
    mask = err > 0
    if np.count_nonzero(mask) < 2:
        raise CsvFormatError("convergence table needs at least two rows with positive error")
    slope, _intercept = np.polyfit(np.log(dx[mask]), np.log(err[mask]), 1)
    return float(slope)


def render(spec: FigureSpec) -> float:
    cols = read_convergence(spec.inputs[0])
    dx = cols["dx"]
    err = cols["err_composite"]
    slope = fitted_slope(dx, err)
    mask = err > 0

    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.loglog(dx[mask], err[mask], "o-", label="composite error")
    guide = err[mask][0] * (dx[mask] / dx[mask][0]) ** 2
    ax.loglog(dx[mask], guide, "k--", label="slope 2 guide")
    ax.set_xlabel("dx")
    ax.set_ylabel("error")
    ax.annotate(
        f"fitted slope {slope:.6f}",
        xy=(0.05, 0.9),
        xycoords="axes fraction",
    )
    ax.legend()
    fig.savefig(spec.output)
    plt.close(fig)
    return slope


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-convergence",
        description="Log-log error plot of a convergence.csv file.",
    )
    parser.add_argument("convergence", help="convergence.csv written by `dynwave converge`")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        slope = render(
            FigureSpec(inputs=(args.convergence,), kind="convergence-loglog", output=args.output)
        )
    except CsvFormatError as exc:
        print(f"plot-convergence: {exc}", file=sys.stderr)
        return 1
    print(f"fitted slope {slope:.6f}")
    return 0


def console_main() -> None:
    raise SystemExit(main())
