"""Energy-conserving solver for the semilinear wave equation with dynamic
boundary conditions.

The scheme advances three levels implicitly:

    d2t U_k = d2x mean(U+, U-)_k - dF/d(U+_k, U-_k),        k = 0..K,
    d2t U_0 = d1x mean(U+, U-)_0,     d2t U_K = -d1x mean(U+, U-)_K,

with mean(U+, U-) = (U^(n+1) + U^(n-1))/2, the centered boundary differences
reaching ghost nodes whose averaged values the boundary rows determine
(``ghost_average``).  Each step is solved by Picard iteration on a coercively
split map: a +dt^2/2 shift is added to the unknown side and its counterpart,
evaluated at the current iterate, to the right-hand side.  The linear part is
the fixed tridiagonal matrix of :mod:`dynwave.linsys`; at the fixed point the
shifts cancel and the iterate satisfies the scheme, which is what
``scheme_residual`` verifies.

The conserved quantity is the discrete energy J of a level pair: trapezoidal
kinetic term, face-averaged gradient term, trapezoidal potential term and the
two boundary kinetic terms.  Along scheme trajectories J is constant up to
solver tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linsys
from .mesh import (
    Grid,
    StatePair,
    forward_diff,
    norm_h1,
    norm_l2,
    second_diff,
    sobolev_constant,
    trapz_sum,
)
from .quotients import Nonlinearity, two_point_quotient


class NoConvergence(RuntimeError):
    """Fixed-point iteration did not converge; the time step is too large."""

    def __init__(self, message: str, step_index: Optional[int] = None):
        super().__init__(message)
        self.step_index = step_index


@dataclass(frozen=True)
class SolverParams:
    """Fixed-point stopping tolerance and iteration cap.

    The iteration stops when the relative l2 increment of the iterates drops
    below ``tol``.  Measuring the increment in the combined pair norm instead
    would only rescale it by fixed 1/dt factors, so the l2 criterion is
    equivalent up to that constant.
    """

    tol: float = 1e-13
    max_iter: int = 100
    check_radius: bool = False

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class StepDiagnostics:
    iterations: int
    final_increment: float
    M_n: float
    radius_ok: Optional[bool] = None
    increments: tuple = ()


def xnorm(pair: StatePair, grid: Grid) -> float:
    """Combined H1 + scaled-increment norm of a state pair.

    ||(U, V)||_X with U = prev and V = curr - prev: the H1 norm of U plus
    the l2 norm and the two boundary values of V, each scaled by 1/dt.
    """
    v = pair.curr - pair.prev
    dt2 = grid.dt**2
    return math.sqrt(
        norm_h1(pair.prev, grid) ** 2
        + trapz_sum(v * v, grid) / dt2
        + (v[0] ** 2 + v[-1] ** 2) / dt2
    )


def _pair_f(nl: Nonlinearity, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Symmetrized potential F(a, b) = (F(a) + F(b))/2."""
    return 0.5 * (nl.potential(a) + nl.potential(b))


def discrete_energy(unext: np.ndarray, ucurr: np.ndarray, grid: Grid, nl: Nonlinearity) -> float:
    """Discrete energy J of the pair (U^(n+1), U^(n)), simplified form.

    Kinetic trapezoidal term + face-averaged gradient term + trapezoidal
    symmetrized potential + the two boundary kinetic terms.
    """
    v = (unext - ucurr) / grid.dt
    kinetic = 0.5 * trapz_sum(v * v, grid)
    dn = forward_diff(unext, grid)
    dc = forward_diff(ucurr, grid)
    gradient = 0.25 * float(np.sum(dn * dn + dc * dc)) * grid.dx
    potential = trapz_sum(_pair_f(nl, unext, ucurr), grid)
    boundary = 0.5 * (v[0] ** 2 + v[-1] ** 2)
    return kinetic + gradient + potential + boundary


def discrete_energy_density_form(
    unext: np.ndarray, ucurr: np.ndarray, grid: Grid, nl: Nonlinearity
) -> float:
    """J evaluated through the forward/backward energy densities.

    Sums G+ over k = 0..K-1 and G- over k = 1..K with half weights, where G+
    holds the face gradient at k and G- the one at k-1, both plus F.  Agrees
    with ``discrete_energy`` to rounding; kept as an independent evaluation
    path for tests.
    """
    dx = grid.dx
    v = (unext - ucurr) / grid.dt
    kinetic = 0.5 * trapz_sum(v * v, grid)
    face = 0.25 * (forward_diff(unext, grid) ** 2 + forward_diff(ucurr, grid) ** 2)
    f = _pair_f(nl, unext, ucurr)
    g_plus = face + f[:-1]          # k = 0..K-1
    g_minus = face + f[1:]          # k = 1..K, gradient part shifted down
    boundary = 0.5 * (v[0] ** 2 + v[-1] ** 2)
    return kinetic + 0.5 * float(np.sum(g_plus)) * dx + 0.5 * float(np.sum(g_minus)) * dx + boundary


def ghost_average(unext: np.ndarray, pair: StatePair, grid: Grid) -> tuple[float, float]:
    """Averaged ghost values W_{-1}, W_{K+1} of W = (U^(n+1) + U^(n-1))/2.

    The two boundary rows equate d2t U at the endpoints to the centered
    difference of W, which pins the ghosts:

        W_{-1}  = W_1     - 2 dx * d2t U_0,
        W_{K+1} = W_{K-1} - 2 dx * d2t U_K.
    """
    w = 0.5 * (unext + pair.prev)
    dt2 = grid.dt**2
    d2t_0 = (unext[0] - 2.0 * pair.curr[0] + pair.prev[0]) / dt2
    d2t_k = (unext[-1] - 2.0 * pair.curr[-1] + pair.prev[-1]) / dt2
    w_left = w[1] - 2.0 * grid.dx * d2t_0
    w_right = w[-2] - 2.0 * grid.dx * d2t_k
    return float(w_left), float(w_right)


def scheme_residual(
    unext: np.ndarray, pair: StatePair, grid: Grid, nl: Nonlinearity
) -> np.ndarray:
    """Defect of the scheme at (U^(n+1); U^(n), U^(n-1)), eliminated form.

    The ghost averages are substituted from the boundary rows, so the
    endpoint entries carry the combined interior+boundary equation:
    (1 + 2/dx) d2t U_0 - 2 (W_1 - W_0)/dx^2 + dF/d(U+_0, U-_0), mirrored
    at K.  A fixed point of the step map has residual at solver tolerance.
    """
    w = 0.5 * (unext + pair.prev)
    d2t = (unext - 2.0 * pair.curr + pair.prev) / grid.dt**2
    gl, gr = ghost_average(unext, pair, grid)
    lap = second_diff(w, grid, gl, gr)
    return d2t - lap + two_point_quotient(nl, unext, pair.prev)


def _phi_rhs(
    guess: np.ndarray,
    pair: StatePair,
    grid: Grid,
    nl: Nonlinearity,
    alpha: float,
    beta: float,
) -> np.ndarray:
    prev, curr = pair.prev, pair.curr
    dt2 = grid.dt**2
    q = two_point_quotient(nl, guess, prev)
    g = 2.0 * curr - prev + 0.5 * dt2 * guess - dt2 * q
    g[1:-1] += alpha * (prev[2:] - 2.0 * prev[1:-1] + prev[:-2])
    g[0] += 2.0 * alpha * (prev[1] - prev[0]) + beta * (2.0 * curr[0] - prev[0])
    g[-1] += 2.0 * alpha * (prev[-2] - prev[-1]) + beta * (2.0 * curr[-1] - prev[-1])
    return g


def phi_apply(
    guess: np.ndarray,
    pair: StatePair,
    grid: Grid,
    nl: Nonlinearity,
    fac: Optional[linsys.TridiagonalFactor] = None,
) -> np.ndarray:
    """One sweep of the coercively split fixed-point map.

    Assembles the eliminated right-hand side for the current iterate and
    solves the fixed tridiagonal system; the unique fixed point is U^(n+1).
    """
    sys = linsys.assemble(grid)
    if fac is None:
        fac = linsys.factor(sys)
    rhs = _phi_rhs(guess, pair, grid, nl, sys.alpha, sys.beta)
    return linsys.solve_factored(fac, rhs)


def _phi_rhs_neumann(guess, pair, grid, nl, alpha):
    prev, curr = pair.prev, pair.curr
    dt2 = grid.dt**2
    q = two_point_quotient(nl, guess, prev)
    g = 2.0 * curr - prev + 0.5 * dt2 * guess - dt2 * q
    g[1:-1] += alpha * (prev[2:] - 2.0 * prev[1:-1] + prev[:-2])
    g[0] += 2.0 * alpha * (prev[1] - prev[0])
    g[-1] += 2.0 * alpha * (prev[-2] - prev[-1])
    return g


def contraction_constant(nl: Nonlinearity, m: float, L: float) -> float:
    """C_contr(m) = sqrt(1/2 + C_F''(sqrt(3) C_S m)^2 / 2).

    The step map contracts when dt * C_contr(M_n) < 1.
    """
    rho = math.sqrt(3.0) * sobolev_constant(L) * m
    cf2 = nl.second_derivative_bound(rho)
    return math.sqrt(0.5 + 0.5 * cf2 * cf2)


@dataclass(frozen=True)
class RadiusDiagnostics:
    c_into: float
    c_contr: float
    r1: float


def contraction_radius(nl: Nonlinearity, m: float, L: float) -> RadiusDiagnostics:
    """Self-mapping and contraction constants and the step-size radius R1.

    R1(m) = min(1/C_contr, m/(sqrt(6) C_into)); reported only, never
    enforced, since the bound is far from sharp in practice.
    """
    rho = math.sqrt(3.0) * sobolev_constant(L) * m
    cf1 = nl.derivative_bound(rho)
    cf2 = nl.second_derivative_bound(rho)
    f1_at_0 = float(np.abs(nl.derivative(0.0)))
    quot_bound = min(
        cf1 * math.sqrt(L),
        f1_at_0 * math.sqrt(L) + (1.0 + math.sqrt(3.0)) * cf2 * m,
    )
    c_into = math.sqrt(4.0 * m * m + 2.0 * quot_bound**2)
    c_contr = math.sqrt(0.5 + 0.5 * cf2 * cf2)
    if c_into > 0.0:
        r1 = min(1.0 / c_contr, m / (math.sqrt(6.0) * c_into))
    else:
        r1 = 1.0 / c_contr
    return RadiusDiagnostics(c_into=c_into, c_contr=c_contr, r1=r1)


def _iterate(rhs_fn, solve_fn, pair: StatePair, grid: Grid, params: SolverParams):
    """Shared Picard loop: start at U^(n), sweep until the relative l2
    increment drops below tol, guard against blow-up."""
    u = pair.curr.copy()
    increments = []
    for _ in range(params.max_iter):
        with np.errstate(over="ignore", invalid="ignore"):
            unew = solve_fn(rhs_fn(u))
            finite = bool(np.all(np.isfinite(unew)))
            if finite:
                inc = norm_l2(unew - u, grid)
                base = norm_l2(u, grid)
                finite = math.isfinite(inc)
        if not finite:
            raise NoConvergence(
                "fixed-point iterate diverged; reduce dt (the step map contracts "
                "only for dt below the radius R1(M_n))"
            )
        increments.append(inc)
        u = unew
        if inc <= params.tol * (1.0 + base):
            return u, increments
    raise NoConvergence(
        f"no convergence in {params.max_iter} iterations "
        f"(last increment {increments[-1]:.3e}); reduce dt below R1(M_n)"
    )


def step(
    pair: StatePair,
    grid: Grid,
    nl: Nonlinearity,
    params: Optional[SolverParams] = None,
    fac: Optional[linsys.TridiagonalFactor] = None,
) -> tuple[np.ndarray, StepDiagnostics]:
    """Advance one time level: U^(n+1) from (U^(n-1), U^(n)).

    Iterates the split map from the guess U^(n).  Raises ``NoConvergence``
    when the iteration cap is hit, which signals that dt is too large.
    """
    if params is None:
        params = SolverParams()
    sys = linsys.assemble(grid)
    if fac is None:
        fac = linsys.factor(sys)
    rhs_fn = lambda u: _phi_rhs(u, pair, grid, nl, sys.alpha, sys.beta)
    solve_fn = lambda rhs: linsys.solve_factored(fac, rhs)
    u, increments = _iterate(rhs_fn, solve_fn, pair, grid, params)
    m_n = xnorm(pair, grid)
    radius_ok = None
    if params.check_radius:
        radius_ok = grid.dt < 1.0 / contraction_constant(nl, m_n, grid.L)
    diag = StepDiagnostics(
        iterations=len(increments),
        final_increment=increments[-1],
        M_n=m_n,
        radius_ok=radius_ok,
        increments=tuple(increments),
    )
    return u, diag


def neumann_step(
    pair: StatePair,
    grid: Grid,
    nl: Nonlinearity,
    params: Optional[SolverParams] = None,
    fac: Optional[linsys.TridiagonalFactor] = None,
) -> tuple[np.ndarray, StepDiagnostics]:
    """Same interior scheme with reflecting ghosts W_{-1} = W_1, W_{K+1} = W_{K-1}.

    Comparison variant: no boundary kinetic terms in its conserved energy.
    """
    if params is None:
        params = SolverParams()
    sys = linsys.assemble_neumann(grid)
    if fac is None:
        fac = linsys.factor(sys)
    rhs_fn = lambda u: _phi_rhs_neumann(u, pair, grid, nl, sys.alpha)
    solve_fn = lambda rhs: linsys.solve_factored(fac, rhs)
    u, increments = _iterate(rhs_fn, solve_fn, pair, grid, params)
    m_n = xnorm(pair, grid)
    radius_ok = None
    if params.check_radius:
        radius_ok = grid.dt < 1.0 / contraction_constant(nl, m_n, grid.L)
    diag = StepDiagnostics(
        iterations=len(increments),
        final_increment=increments[-1],
        M_n=m_n,
        radius_ok=radius_ok,
        increments=tuple(increments),
    )
    return u, diag


def neumann_energy(unext: np.ndarray, ucurr: np.ndarray, grid: Grid, nl: Nonlinearity) -> float:
    """Conserved energy of the Neumann variant: J without the boundary kinetic terms."""
    v = (unext - ucurr) / grid.dt
    return discrete_energy(unext, ucurr, grid, nl) - 0.5 * (v[0] ** 2 + v[-1] ** 2)


def first_step(u0: np.ndarray, v0: np.ndarray, grid: Grid, nl: Nonlinearity) -> np.ndarray:
    """Taylor start U^(1) = u0 + dt v0 + dt^2/2 a from sampled initial data.

    The acceleration a is the equation's right-hand side at t = 0: the
    interior uses the centered second difference minus F'(u0); the endpoints
    use the one-sided second-order slope, since there the acceleration is the
    boundary flux itself.  Second-order consistent, which keeps the scheme's
    overall rate.
    """
    dx = grid.dx
    a = np.empty_like(u0)
    a[1:-1] = (u0[2:] - 2.0 * u0[1:-1] + u0[:-2]) / dx**2 - nl.derivative(u0[1:-1])
    a[0] = (-3.0 * u0[0] + 4.0 * u0[1] - u0[2]) / (2.0 * dx)
    a[-1] = -(3.0 * u0[-1] - 4.0 * u0[-2] + u0[-3]) / (2.0 * dx)
    return u0 + grid.dt * v0 + 0.5 * grid.dt**2 * a
