"""Experiment presets, trajectory recording and convergence studies.

``run`` drives a full simulation: sample the initial data, build the Taylor
first level, then march the implicit scheme while recording snapshots, the
per-step discrete energy (whose flatness is the whole point) and solver
diagnostics.

``convergence_study`` estimates the scheme's order by self-convergence:
each requested level halves dx and dt simultaneously, and errors are taken
against a reference trajectory two refinements finer than the finest level,
restricted to shared nodes and steps (the restriction is exact because the
grids nest).  Errors are measured in the composite norm

    max_n ( ||d- e^(n)||_2 + ||e^(n)||_H1 + |d- e^(n)_0| + |d- e^(n)_K| ),

the norm in which the scheme is second-order accurate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import general as general_mod
from . import linsys, semilinear
from .mesh import Grid, StatePair, norm_h1, norm_l2
from .quotients import flux_density, nonlinearity
from .semilinear import NoConvergence, SolverParams


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: grid, problem, initial data source, solver, output."""

    L: float = 6.0
    T: float = 5.0
    K: int = 100
    N: int = 2000
    kind: str = "semilinear"          # "semilinear" | "general"
    nonlinearity: str = "cubic"       # catalog name; for kind="general" the flux name
    bc: str = "dynamic"               # "dynamic" | "neumann" (semilinear only)
    preset: Optional[str] = "case1"
    initial_csv: Optional[str] = None
    tol: float = 1e-13
    max_iter: int = 100
    check_radius: bool = False
    outdir: Optional[str] = None
    snapshot_stride: int = 10

    def grid(self) -> Grid:
        return Grid(L=self.L, T=self.T, K=self.K, N=self.N)

    def solver_params(self) -> SolverParams:
        return SolverParams(tol=self.tol, max_iter=self.max_iter, check_radius=self.check_radius)


@dataclass(frozen=True)
class EnergySample:
    """Energy of the pair (U^(n+1), U^(n)) and its backward time difference."""

    n: int
    t: float
    J: float
    delta: float


@dataclass
class TrajectoryRecord:
    config: ExperimentConfig
    grid: Grid
    snapshots: list          # (n, level) pairs at the configured stride
    energies: list           # EnergySample for n = 1..N-1
    diagnostics: list        # StepDiagnostics for steps n = 1..N-1
    energy_initial: float    # J of the pair (U^(1), U^(0))
    states: Optional[np.ndarray] = None  # (N+1, K+1) when recorded in full


_PRESET_FORMULAS = {
    "case1": ("exp(-(x - L/2)^2)", "0"),
    "case2": (
        "exp(-4 (x - L/3)^2) + exp(-4 (x - 2L/3)^2)",
        "-4 (x - L/3) exp(-4 (x - L/3)^2)",
    ),
    "case3": (
        "5 exp(-4 (x - L/3)^2) + exp(-4 (x - 2L/3)^2)",
        "-4 (x - L/3) exp(-4 (x - L/3)^2)",
    ),
}


def preset_names() -> list[str]:
    return sorted(_PRESET_FORMULAS)


def preset_formulas() -> dict[str, tuple[str, str]]:
    """Preset name -> (u0 formula, v0 formula), for the CLI listing."""
    return dict(_PRESET_FORMULAS)


def preset(name: str, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Sample a named initial-data set on the grid nodes."""
    x = grid.nodes
    L = grid.L
    if name == "case1":
        return np.exp(-((x - L / 2.0) ** 2)), np.zeros_like(x)
    if name == "case2":
        u0 = np.exp(-4.0 * (x - L / 3.0) ** 2) + np.exp(-4.0 * (x - 2.0 * L / 3.0) ** 2)
        v0 = -4.0 * (x - L / 3.0) * np.exp(-4.0 * (x - L / 3.0) ** 2)
        return u0, v0
    if name == "case3":
        u0 = 5.0 * np.exp(-4.0 * (x - L / 3.0) ** 2) + np.exp(-4.0 * (x - 2.0 * L / 3.0) ** 2)
        v0 = -4.0 * (x - L / 3.0) * np.exp(-4.0 * (x - L / 3.0) ** 2)
        return u0, v0
    raise ValueError(f"unknown preset {name!r}; known: {preset_names()}")


def read_initial_csv(path, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Read initial data with header x,u0,v0; exactly K+1 rows.

    The x column must match the grid nodes to 1e-12 relative.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["x", "u0", "v0"]:
            raise ValueError(f"{path}: expected header x,u0,v0, got {header}")
        for row in reader:
            if row:
                rows.append(row)
    if len(rows) != grid.K + 1:
        raise ValueError(f"{path}: expected {grid.K + 1} rows, got {len(rows)}")
    data = np.array([[float(v) for v in row] for row in rows])
    nodes = grid.nodes
    tol = 1e-12 * np.maximum(1.0, np.abs(nodes))
    if np.any(np.abs(data[:, 0] - nodes) > tol):
        k = int(np.argmax(np.abs(data[:, 0] - nodes) - tol))
        raise ValueError(f"{path}: x at row {k} is {data[k, 0]!r}, grid node is {nodes[k]!r}")
    return data[:, 1], data[:, 2]


def load_initial(config: ExperimentConfig, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    if config.initial_csv is not None:
        return read_initial_csv(config.initial_csv, grid)
    if config.preset is None:
        raise ValueError("config needs either a preset or an initial_csv")
    return preset(config.preset, grid)


def _problem(config: ExperimentConfig, grid: Grid):
    """Resolve the config into (first_step, step, energy) closures."""
    params = config.solver_params()
    if config.kind == "semilinear":
        nl = nonlinearity(config.nonlinearity)
        if config.bc == "dynamic":
            fac = linsys.factor(linsys.assemble(grid))
            return (
                lambda u0, v0: semilinear.first_step(u0, v0, grid, nl),
                lambda pair: semilinear.step(pair, grid, nl, params, fac=fac),
                lambda unext, ucurr: semilinear.discrete_energy(unext, ucurr, grid, nl),
            )
        if config.bc == "neumann":
            fac = linsys.factor(linsys.assemble_neumann(grid))
            return (
                lambda u0, v0: semilinear.first_step(u0, v0, grid, nl),
                lambda pair: semilinear.neumann_step(pair, grid, nl, params, fac=fac),
                lambda unext, ucurr: semilinear.neumann_energy(unext, ucurr, grid, nl),
            )
        raise ValueError(f"unknown bc {config.bc!r}")
    if config.kind == "general":
        if config.bc != "dynamic":
            raise ValueError("kind='general' supports only bc='dynamic'")
        prob = general_mod.GeneralProblem(
            flux=flux_density(config.nonlinearity), nl=nonlinearity("zero"), grid=grid
        )
        fac = linsys.factor(linsys.assemble(grid))
        return (
            lambda u0, v0: general_mod.general_first_step(u0, v0, prob),
            lambda pair: general_mod.general_step(pair, prob, params, fac=fac),
            lambda unext, ucurr: general_mod.general_energy(unext, ucurr, prob),
        )
    raise ValueError(f"unknown kind {config.kind!r}")


def run(config: ExperimentConfig, record_all: bool = False) -> TrajectoryRecord:
    """Run a full simulation and record snapshots, energies and diagnostics.

    Raises ``NoConvergence`` (carrying the failing step index) when a step's
    fixed-point iteration does not converge.
    """
    grid = config.grid()
    first_step_fn, step_fn, energy_fn = _problem(config, grid)
    u0, v0 = load_initial(config, grid)
    u1 = first_step_fn(u0, v0)

    stride = max(1, int(config.snapshot_stride))
    states = np.empty((grid.N + 1, grid.K + 1)) if record_all else None
    snapshots: list = []
    energies: list = []
    diagnostics: list = []

    def record(n, level):
        if states is not None:
            states[n] = level
        if n % stride == 0 or n == grid.N:
            snapshots.append((n, level.copy()))

    record(0, u0)
    record(1, u1)
    energy_initial = energy_fn(u1, u0)
    j_prev = energy_initial

    prev, curr = u0, u1
    for n in range(1, grid.N):
        pair = StatePair(prev=prev, curr=curr, n=n)
        try:
            unext, diag = step_fn(pair)
        except NoConvergence as exc:
            exc.step_index = n
            raise
        j_n = energy_fn(unext, curr)
        energies.append(EnergySample(n=n, t=n * grid.dt, J=j_n, delta=(j_n - j_prev) / grid.dt))
        diagnostics.append(diag)
        j_prev = j_n
        record(n + 1, unext)
        prev, curr = curr, unext

    return TrajectoryRecord(
        config=config,
        grid=grid,
        snapshots=snapshots,
        energies=energies,
        diagnostics=diagnostics,
        energy_initial=energy_initial,
        states=states,
    )


def energy_drift(series: list) -> float:
    """max_n |J_n - J_first| / max(1, |J_first|) over an energy series."""
    if not series:
        raise ValueError("energy series is empty")
    j_first = series[0].J
    dev = max(abs(s.J - j_first) for s in series)
    return dev / max(1.0, abs(j_first))


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    K: int
    N: int
    dx: float
    dt: float
    err_l2: float
    err_h1: float
    err_composite: float
    observed_order: Optional[float]  # log2 ratio vs the previous level


def trajectory_errors(
    coarse_states: np.ndarray, coarse_grid: Grid, fine_states: np.ndarray, ratio: int
) -> tuple[float, float, float]:
    """Errors of a coarse trajectory against a finer one on nested grids.

    ``ratio`` is the refinement factor; the fine trajectory is restricted by
    taking every ratio-th node and step, which is exact.  Returns
    (max_n ||e||_2, max_n ||e||_H1, composite norm).
    """
    if ratio < 1:
        raise ValueError("ratio must be >= 1")
    restricted = fine_states[::ratio, ::ratio]
    if restricted.shape != coarse_states.shape:
        raise ValueError(
            f"restriction shape {restricted.shape} does not match coarse {coarse_states.shape}"
        )
    e = coarse_states - restricted
    err_l2 = err_h1 = err_comp = 0.0
    for n in range(1, coarse_states.shape[0]):
        de = (e[n] - e[n - 1]) / coarse_grid.dt
        l2 = norm_l2(e[n], coarse_grid)
        h1 = norm_h1(e[n], coarse_grid)
        comp = norm_l2(de, coarse_grid) + h1 + abs(de[0]) + abs(de[-1])
        err_l2 = max(err_l2, l2)
        err_h1 = max(err_h1, h1)
        err_comp = max(err_comp, comp)
    return err_l2, err_h1, err_comp


def convergence_study(
    config: ExperimentConfig, levels: int, ref_extra: int = 2
) -> list[ConvergenceRow]:
    """Self-convergence study over simultaneous (dx, dt) halvings.

    Level l runs at (K*2^l, N*2^l) for l = 0..levels-1; errors are measured
    against a reference trajectory ``ref_extra`` refinements beyond the
    finest level (far enough that the finest ratio is uncontaminated by the
    reference's own error).  observed_order on row l is
    log2(err_{l-1} / err_l) in the composite norm.
    """
    if levels < 3:
        raise ValueError("a convergence study needs at least 3 levels")
    if ref_extra < 1:
        raise ValueError("ref_extra must be >= 1")
    level_runs = []
    for lev in range(levels):
        cfg = replace(config, K=config.K * 2**lev, N=config.N * 2**lev)
        level_runs.append(run(cfg, record_all=True))
    ref_level = levels - 1 + ref_extra
    ref_cfg = replace(config, K=config.K * 2**ref_level, N=config.N * 2**ref_level)
    ref = run(ref_cfg, record_all=True)

    rows: list[ConvergenceRow] = []
    prev_comp = None
    for lev, rec in enumerate(level_runs):
        ratio = 2 ** (ref_level - lev)
        err_l2, err_h1, err_comp = trajectory_errors(rec.states, rec.grid, ref.states, ratio)
        order = None
        if prev_comp is not None and err_comp > 0.0:
            order = math.log2(prev_comp / err_comp)
        rows.append(
            ConvergenceRow(
                level=lev,
                K=rec.grid.K,
                N=rec.grid.N,
                dx=rec.grid.dx,
                dt=rec.grid.dt,
                err_l2=err_l2,
                err_h1=err_h1,
                err_composite=err_comp,
                observed_order=order,
            )
        )
        prev_comp = err_comp
    return rows
