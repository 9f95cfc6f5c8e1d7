"""Figure scripts for dynwave CSV outputs.

Four standalone commands, one per figure kind: ``plot-waterfall`` (space-time
surface of a run), ``plot-energy`` (energy series, visually flat for a
conservative run), ``plot-compare`` (boundary traces of two runs overlaid)
and ``plot-convergence`` (log-log error plot with a slope-2 guide and the
fitted slope annotated).  Each consumes the CSV files exactly as the solver
CLI writes them, never modifies them, and exits 0 on success, 1 on any
malformed input.
"""

from dataclasses import dataclass

FIGSIZE = (8.0, 6.0)
DPI = 150


@dataclass(frozen=True)
class FigureSpec:
    """Inputs, figure kind and output path of one figure command."""

    inputs: tuple
    kind: str
    output: str
