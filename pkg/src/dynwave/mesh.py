"""Uniform space-time grids, discrete operators, trapezoidal sums and norms.

A field is one time level of the solution, stored as a plain float array on
the nodes x_k = k*dx, k = 0..K.  Ghost nodes at k = -1 and k = K+1 are never
stored; operators that reach them take the ghost values as explicit
arguments, because in the boundary-eliminated schemes ghosts exist only as
averaged combinations determined by the dynamic boundary rows.

The trapezoidal sum (half weights at both endpoints) plays the role of the
discrete integral.  It is the inner product in which the summation-by-parts
identity

    sum_{k=0}^{K-1} f_k (d+ g)_k dx  +  trapz((d- f) g)  =  [(mu- f) g]_0^K

holds exactly, with d+/d- the one-sided difference quotients and mu- the
backward mean; ``sbp_defect`` evaluates both sides so tests can pin the
identity at rounding level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, L] x [0, T] with K space intervals and N time steps.

    K >= 2 is required: the boundary elimination references nodes 1 and K-1.
    """

    L: float
    T: float
    K: int
    N: int

    def __post_init__(self) -> None:
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"domain length L must be positive, got {self.L}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"final time T must be positive, got {self.T}")
        if int(self.K) != self.K or self.K < 2:
            raise ValueError(f"K must be an integer >= 2, got {self.K}")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")

    @property
    def dx(self) -> float:
        return self.L / self.K

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def nodes(self) -> np.ndarray:
        """Node coordinates x_k = k*dx, k = 0..K."""
        return np.arange(self.K + 1) * self.dx

    @property
    def times(self) -> np.ndarray:
        """Time levels t_n = n*dt, n = 0..N."""
        return np.arange(self.N + 1) * self.dt


def as_field(values, grid: Grid) -> np.ndarray:
    """Validate and return one time level as a float array of length K+1."""
    f = np.asarray(values, dtype=float)
    if f.shape != (grid.K + 1,):
        raise ValueError(f"field must have length K+1 = {grid.K + 1}, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("field contains non-finite entries")
    return f


@dataclass(frozen=True)
class StatePair:
    """Two consecutive time levels (U^(n-1), U^(n)); the state of the scheme.

    ``n`` is the time index of ``curr``.
    """

    prev: np.ndarray
    curr: np.ndarray
    n: int

    def __post_init__(self) -> None:
        if self.prev.shape != self.curr.shape:
            raise ValueError("prev and curr must share the same grid length")


def forward_diff(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Face values (f_{k+1} - f_k)/dx for k = 0..K-1."""
    return (f[1:] - f[:-1]) / grid.dx


def backward_diff(f: np.ndarray, grid: Grid, ghost_left: float) -> np.ndarray:
    """(f_k - f_{k-1})/dx for k = 0..K, with f_{-1} supplied explicitly."""
    out = np.empty(len(f))
    out[0] = (f[0] - ghost_left) / grid.dx
    out[1:] = (f[1:] - f[:-1]) / grid.dx
    return out


def second_diff(f: np.ndarray, grid: Grid, ghost_left: float, ghost_right: float) -> np.ndarray:
    """(f_{k+1} - 2 f_k + f_{k-1})/dx^2 on all nodes k = 0..K.

    Ghost values for indices -1 and K+1 are explicit arguments.
    """
    ext = np.empty(len(f) + 2)
    ext[0] = ghost_left
    ext[1:-1] = f
    ext[-1] = ghost_right
    return (ext[2:] - 2.0 * ext[1:-1] + ext[:-2]) / grid.dx**2


def trapz_sum(f: np.ndarray, grid: Grid) -> float:
    """Trapezoidal sum (f_0/2 + f_1 + ... + f_{K-1} + f_K/2) * dx."""
    return float((0.5 * f[0] + f[1:-1].sum() + 0.5 * f[-1]) * grid.dx)


def sbp_defect(f: np.ndarray, g: np.ndarray, grid: Grid, f_ghost_left: float) -> float:
    """Left minus right side of the summation-by-parts identity.

    The backward-difference and backward-mean terms at k = 0 use the supplied
    ghost value f_{-1}.  The identity is algebraic, so the result is zero up
    to rounding for any inputs.
    """
    dx = grid.dx
    lhs = float(np.sum(f[:-1] * (g[1:] - g[:-1]) / dx) * dx)
    lhs += trapz_sum(backward_diff(f, grid, f_ghost_left) * g, grid)
    boundary = 0.5 * (f[-1] + f[-2]) * g[-1] - 0.5 * (f[0] + f_ghost_left) * g[0]
    return lhs - boundary


def norm_l2(f: np.ndarray, grid: Grid) -> float:
    """Trapezoidal L2 norm."""
    return math.sqrt(trapz_sum(f * f, grid))


def seminorm_d(f: np.ndarray, grid: Grid) -> float:
    """Gradient seminorm ||Df|| = (sum_{k<K} |(d+ f)_k|^2 dx)^(1/2)."""
    d = forward_diff(f, grid)
    return math.sqrt(float(np.sum(d * d)) * grid.dx)


def norm_h1(f: np.ndarray, grid: Grid) -> float:
    """Discrete H1 norm: (||f||_2^2 + ||Df||^2)^(1/2)."""
    return math.sqrt(trapz_sum(f * f, grid) + float(np.sum(forward_diff(f, grid) ** 2)) * grid.dx)


def norm_inf(f: np.ndarray) -> float:
    return float(np.max(np.abs(f)))


def sobolev_constant(L: float) -> float:
    """Constant C_S with ||f||_inf <= C_S ||f||_H1 on any grid over [0, L]."""
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    return math.sqrt((math.sqrt(1.0 + 4.0 * L * L) + 1.0) / (2.0 * L))
