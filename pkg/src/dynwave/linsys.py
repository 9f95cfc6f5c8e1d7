"""Boundary-eliminated tridiagonal system of the implicit update.

Eliminating the ghost averages through the two dynamic boundary rows turns
each fixed-point sweep into a (K+1)-dimensional tridiagonal solve

    {(1 + dt^2/2) E - A} u = g,

where A has alpha = dt^2/(2 dx^2) on the interior three-point stencil and
corner rows (-2 alpha - beta, 2 alpha), beta = 2/dx.  A is negative definite
in the trapezoidal inner product, so the full matrix is positive definite
and strictly diagonally dominant for any dt, dx > 0: the Thomas algorithm
needs no pivoting.  The matrix depends only on the grid, so its elimination
sweep is exposed separately (``factor``) and reused across iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Grid, trapz_sum


class SingularSystemError(ArithmeticError):
    """Raised on a vanishing pivot; unreachable for systems from ``assemble``."""


@dataclass
class TridiagonalSystem:
    """Three-band storage of (1 + dt^2/2) E - A plus a right-hand side."""

    sub: np.ndarray   # length K, entries below the diagonal
    diag: np.ndarray  # length K+1
    sup: np.ndarray   # length K, entries above the diagonal
    rhs: np.ndarray   # length K+1
    alpha: float      # dt^2 / (2 dx^2)
    beta: float       # 2 / dx


def assemble(grid: Grid) -> TridiagonalSystem:
    """Build the dynamic-boundary matrix for ``grid`` with a zero rhs."""
    alpha = grid.dt**2 / (2.0 * grid.dx**2)
    beta = 2.0 / grid.dx
    base = 1.0 + grid.dt**2 / 2.0 + 2.0 * alpha
    diag = np.full(grid.K + 1, base)
    diag[0] += beta
    diag[-1] += beta
    sub = np.full(grid.K, -alpha)
    sup = np.full(grid.K, -alpha)
    sup[0] = -2.0 * alpha
    sub[-1] = -2.0 * alpha
    return TridiagonalSystem(sub, diag, sup, np.zeros(grid.K + 1), alpha, beta)


def assemble_neumann(grid: Grid) -> TridiagonalSystem:
    """Homogeneous-Neumann closure variant: same stencil, no beta corners.

    Used by the boundary-condition comparison solver; the dynamic-boundary
    contract is ``assemble``.
    """
    sys = assemble(grid)
    sys.diag[0] -= sys.beta
    sys.diag[-1] -= sys.beta
    return TridiagonalSystem(sys.sub, sys.diag, sys.sup, sys.rhs, sys.alpha, 0.0)


@dataclass
class TridiagonalFactor:
    """Elimination sweep of the matrix: lower multipliers and modified diagonal."""

    lower: np.ndarray  # length K
    diag: np.ndarray   # length K+1, pivots
    sup: np.ndarray    # length K


_PIVOT_FLOOR = 1e-300


def factor(sys: TridiagonalSystem) -> TridiagonalFactor:
    """Forward elimination without pivoting (matrix is diagonally dominant)."""
    n = len(sys.diag)
    d = np.empty(n)
    lower = np.empty(n - 1)
    d[0] = sys.diag[0]
    for k in range(1, n):
        piv = d[k - 1]
        if abs(piv) < _PIVOT_FLOOR:
            raise SingularSystemError(f"vanishing pivot at row {k - 1}: {piv!r}")
        w = sys.sub[k - 1] / piv
        lower[k - 1] = w
        d[k] = sys.diag[k] - w * sys.sup[k - 1]
    if abs(d[-1]) < _PIVOT_FLOOR:
        raise SingularSystemError(f"vanishing pivot at row {n - 1}: {d[-1]!r}")
    return TridiagonalFactor(lower, d, sys.sup.copy())


def solve_factored(fac: TridiagonalFactor, rhs: np.ndarray) -> np.ndarray:
    """Forward/back substitution with a precomputed elimination sweep."""
    n = len(fac.diag)
    y = np.empty(n)
    y[0] = rhs[0]
    lower = fac.lower
    for k in range(1, n):
        y[k] = rhs[k] - lower[k - 1] * y[k - 1]
    x = np.empty(n)
    d = fac.diag
    sup = fac.sup
    x[-1] = y[-1] / d[-1]
    for k in range(n - 2, -1, -1):
        x[k] = (y[k] - sup[k] * x[k + 1]) / d[k]
    return x


def solve(sys: TridiagonalSystem) -> np.ndarray:
    """Thomas algorithm solve of sys.rhs; deterministic, no pivoting."""
    return solve_factored(factor(sys), sys.rhs)


def matvec(sys: TridiagonalSystem, x: np.ndarray) -> np.ndarray:
    """Apply the three-band matrix to x (residual checks in tests)."""
    out = sys.diag * x
    out[:-1] += sys.sup * x[1:]
    out[1:] += sys.sub * x[:-1]
    return out


def apply_a(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Apply the boundary-eliminated operator A (not the full matrix)."""
    alpha = grid.dt**2 / (2.0 * grid.dx**2)
    beta = 2.0 / grid.dx
    out = np.empty_like(u)
    out[1:-1] = alpha * (u[2:] - 2.0 * u[1:-1] + u[:-2])
    out[0] = (-2.0 * alpha - beta) * u[0] + 2.0 * alpha * u[1]
    out[-1] = 2.0 * alpha * u[-2] + (-2.0 * alpha - beta) * u[-1]
    return out


def trapz_inner(u: np.ndarray, v: np.ndarray, grid: Grid) -> float:
    """Trapezoidal inner product, the one in which A is negative definite."""
    if u.shape != v.shape:
        raise ValueError("inner product needs equal lengths")
    return trapz_sum(u * v, grid)


@dataclass(frozen=True)
class DefinitenessReport:
    trials: int
    max_quadform: float
    all_negative: bool


def definiteness_check(grid: Grid, trials: int, seed: int = 0) -> DefinitenessReport:
    """Sample <A u, u>'' over random nonzero u; the maximum must be negative."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        u = rng.standard_normal(grid.K + 1)
        while not np.any(u):
            u = rng.standard_normal(grid.K + 1)
        worst = max(worst, trapz_inner(apply_a(u, grid), u, grid))
    return DefinitenessReport(trials=trials, max_quadform=worst, all_negative=worst < 0.0)
