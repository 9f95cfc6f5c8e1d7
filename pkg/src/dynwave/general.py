"""Energy-conserving scheme for quasilinear wave equations.

The gradient part of the energy density is a general face function
X(d+ U^(n+1), d+ U^(n)) instead of the quadratic mean, and the equation of
motion replaces the averaged Laplacian by the backward difference of the face
flux

    Q_k = dX/d(d+ U^(n+1)_k, d+ U^(n-1)_k)        (time-diagonal quotient),

with boundary rows d2t U_0 = mean(Q_0, Q_-1) and d2t U_K = -mean(Q_K, Q_K-1).
Eliminating the ghost fluxes through those rows gives, at the endpoints,
(1 + 2/dx) d2t U_0 = (2/dx) Q_0 - Fq_0 and the mirror at K.

Steps are solved by damped Picard iteration around the same coercive linear
operator as the semilinear solver: the quadratic part of the flux lives in
the fixed tridiagonal matrix and the remainder Q - d+ mean(U~, U^(n-1)) is
evaluated at the current iterate and moved to the right-hand side.  With the
quadratic flux the remainder vanishes and every output reproduces the
semilinear module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linsys
from .mesh import Grid, StatePair, forward_diff, norm_l2, trapz_sum
from .quotients import FluxDensity, Nonlinearity, two_point_quotient
from .semilinear import (
    NoConvergence,
    SolverParams,
    StepDiagnostics,
    _pair_f,
    contraction_constant,
    xnorm,
)


@dataclass(frozen=True)
class GeneralProblem:
    flux: FluxDensity
    nl: Nonlinearity
    grid: Grid


def general_energy(unext: np.ndarray, ucurr: np.ndarray, prob: GeneralProblem) -> float:
    """Discrete energy with the flux density on faces, simplified form."""
    grid = prob.grid
    v = (unext - ucurr) / grid.dt
    kinetic = 0.5 * trapz_sum(v * v, grid)
    flux = float(np.sum(prob.flux.density(forward_diff(unext, grid), forward_diff(ucurr, grid)))) * grid.dx
    potential = trapz_sum(_pair_f(prob.nl, unext, ucurr), grid)
    boundary = 0.5 * (v[0] ** 2 + v[-1] ** 2)
    return kinetic + flux + potential + boundary


def flux_values(unext: np.ndarray, uprev: np.ndarray, prob: GeneralProblem) -> np.ndarray:
    """Face fluxes Q_k, k = 0..K-1.

    The middle arguments of the four-point quotient cancel for the factored
    catalog densities, leaving the stable two-point form on the face slopes
    of the outer levels.
    """
    grid = prob.grid
    return np.asarray(
        prob.flux.stable_quotient(forward_diff(unext, grid), forward_diff(uprev, grid)),
        dtype=float,
    )


def general_residual(unext: np.ndarray, pair: StatePair, prob: GeneralProblem) -> np.ndarray:
    """Scheme defect in eliminated form (ghost fluxes removed)."""
    grid = prob.grid
    dx = grid.dx
    d2t = (unext - 2.0 * pair.curr + pair.prev) / grid.dt**2
    q = flux_values(unext, pair.prev, prob)
    fq = two_point_quotient(prob.nl, unext, pair.prev)
    res = np.empty_like(unext)
    res[1:-1] = d2t[1:-1] - (q[1:] - q[:-1]) / dx + fq[1:-1]
    res[0] = (1.0 + 2.0 / dx) * d2t[0] - (2.0 / dx) * q[0] + fq[0]
    res[-1] = (1.0 + 2.0 / dx) * d2t[-1] + (2.0 / dx) * q[-1] + fq[-1]
    return res


def _general_rhs(guess, pair, prob, alpha, beta):
    grid = prob.grid
    prev, curr = pair.prev, pair.curr
    dt2 = grid.dt**2
    dx = grid.dx
    q = two_point_quotient(prob.nl, guess, prev)
    g = 2.0 * curr - prev + 0.5 * dt2 * guess - dt2 * q
    g[1:-1] += alpha * (prev[2:] - 2.0 * prev[1:-1] + prev[:-2])
    g[0] += 2.0 * alpha * (prev[1] - prev[0]) + beta * (2.0 * curr[0] - prev[0])
    g[-1] += 2.0 * alpha * (prev[-2] - prev[-1]) + beta * (2.0 * curr[-1] - prev[-1])
    # flux remainder beyond the quadratic part, lagged at the iterate
    w = 0.5 * (guess + prev)
    rq = flux_values(guess, prev, prob) - forward_diff(w, grid)
    g[1:-1] += dt2 * (rq[1:] - rq[:-1]) / dx
    g[0] += dt2 * (2.0 / dx) * rq[0]
    g[-1] -= dt2 * (2.0 / dx) * rq[-1]
    return g


def general_step(
    pair: StatePair,
    prob: GeneralProblem,
    params: Optional[SolverParams] = None,
    theta: float = 1.0,
    fac: Optional[linsys.TridiagonalFactor] = None,
) -> tuple[np.ndarray, StepDiagnostics]:
    """Advance one level by damped fixed-point iteration.

    The update u <- u + theta*(sweep(u) - u) keeps the same fixed point for
    any theta in (0, 1]; theta starts at the given value and halves (at most
    four times) whenever the undamped increment grows, which rescues plain
    Picard on steep gradients.
    """
    if params is None:
        params = SolverParams()
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")
    grid = prob.grid
    sys = linsys.assemble(grid)
    if fac is None:
        fac = linsys.factor(sys)
    u = pair.curr.copy()
    increments = []
    last_raw = np.inf
    halvings = 0
    for _ in range(params.max_iter):
        with np.errstate(over="ignore", invalid="ignore"):
            cand = linsys.solve_factored(fac, _general_rhs(u, pair, prob, sys.alpha, sys.beta))
            finite = bool(np.all(np.isfinite(cand)))
            raw = norm_l2(cand - u, grid) if finite else np.inf
        if not (finite and np.isfinite(raw)):
            raise NoConvergence(
                "fixed-point iterate diverged; reduce dt or the damping factor theta"
            )
        if raw > last_raw and halvings < 4:
            theta *= 0.5
            halvings += 1
        unew = cand if theta == 1.0 else u + theta * (cand - u)
        inc = norm_l2(unew - u, grid)
        base = norm_l2(u, grid)
        increments.append(inc)
        u = unew
        last_raw = raw
        if inc <= params.tol * (1.0 + base):
            break
    else:
        raise NoConvergence(
            f"no convergence in {params.max_iter} iterations "
            f"(last increment {increments[-1]:.3e}); reduce dt or theta"
        )
    m_n = xnorm(pair, grid)
    radius_ok = None
    if params.check_radius and prob.nl.second_derivative is not None:
        radius_ok = grid.dt < 1.0 / contraction_constant(prob.nl, m_n, grid.L)
    diag = StepDiagnostics(
        iterations=len(increments),
        final_increment=increments[-1],
        M_n=m_n,
        radius_ok=radius_ok,
        increments=tuple(increments),
    )
    return u, diag


def general_first_step(u0: np.ndarray, v0: np.ndarray, prob: GeneralProblem) -> np.ndarray:
    """Taylor start with the flux-divergence acceleration.

    Interior: a_k = d-(flux(d+ u0)) - F'(u0); endpoints use the continuous
    boundary flux at the one-sided second-order slope.
    """
    grid = prob.grid
    dx = grid.dx
    g = forward_diff(u0, grid)
    qface = np.asarray(prob.flux.stable_quotient(g, g), dtype=float)
    a = np.empty_like(u0)
    a[1:-1] = (qface[1:] - qface[:-1]) / dx - prob.nl.derivative(u0[1:-1])
    slope_0 = (-3.0 * u0[0] + 4.0 * u0[1] - u0[2]) / (2.0 * dx)
    slope_k = (3.0 * u0[-1] - 4.0 * u0[-2] + u0[-3]) / (2.0 * dx)
    a[0] = float(prob.flux.stable_quotient(slope_0, slope_0))
    a[-1] = -float(prob.flux.stable_quotient(slope_k, slope_k))
    return u0 + grid.dt * v0 + 0.5 * grid.dt**2 * a
