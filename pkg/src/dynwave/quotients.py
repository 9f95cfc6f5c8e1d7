"""Difference quotients and the catalog of nonlinearities and flux densities.

The two-point quotient

    dF/d(a, c) = (F(a) - F(c)) / (a - c),      dF/d(a, a) = F'(a)

is the discrete chain-rule device of the energy-conserving schemes: summing
it against the centered time difference telescopes the potential part of the
discrete energy.  The raw ratio cancels catastrophically for a ~ c, so the
generic evaluation switches to the derivative branch below a relative
threshold; catalog entries instead carry closed-form quotients that are
stable for all arguments and bypass the switch entirely.

The four-point quotient generalizes this to two-variable densities f(a, b)
along midpoints loc(a, b) = (a + b)/2; for the factored densities in the
catalog it collapses to the two-point form.  The averaged second-order
quotient Fbar''(xi, xit; eta, etat) is the discrete analogue of F'' that
makes differences of quotients exactly decomposable, see
``quotient_decomposition_defect``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

# Relative switch to the derivative branch, ~sqrt(machine eps).  Closed-form
# stable quotients bypass it entirely.
EPS_SWITCH = 1e-8

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Nonlinearity:
    """Potential F, its derivatives, and a numerically stable quotient.

    ``stable_quotient(a, c)`` must equal (F(a) - F(c))/(a - c) exactly
    (analytically), including the diagonal limit F'(a).  All callables accept
    scalars and arrays.
    """

    name: str
    potential: Callable
    derivative: Callable
    second_derivative: Optional[Callable] = None
    stable_quotient: Optional[Callable] = None

    def derivative_bound(self, rho: float, samples: int = 2001) -> float:
        """max |F'| on [-rho, rho], by dense sampling."""
        xs = np.linspace(-rho, rho, samples)
        return float(np.max(np.abs(self.derivative(xs))))

    def second_derivative_bound(self, rho: float, samples: int = 2001) -> float:
        """max |F''| on [-rho, rho], by dense sampling."""
        if self.second_derivative is None:
            raise ValueError(f"nonlinearity {self.name!r} has no second derivative")
        xs = np.linspace(-rho, rho, samples)
        return float(np.max(np.abs(self.second_derivative(xs))))


@dataclass(frozen=True)
class FluxDensity:
    """Gradient-energy density X(a, b) with its time-diagonal quotient.

    ``density`` is symmetric (catalog entries have the factored form
    (Xt(a) + Xt(b))/2) and ``stable_quotient(a, c)`` implements the
    four-point quotient of X along the time diagonal, i.e.
    (X(a, b) - X(b, c)) / ((a - c)/2) with the shared middle argument
    cancelled; its diagonal value stable_quotient(a, a) is d/dx X(x, x).
    """

    name: str
    density: Callable
    stable_quotient: Callable


def _scalar_like(out, *inputs):
    if all(np.isscalar(v) or np.ndim(v) == 0 for v in inputs):
        return float(out)
    return out


def two_point_quotient(nl: Nonlinearity, a, c):
    """dF/d(a, c), elementwise on arrays.

    Uses the catalog's closed form when present; otherwise the ratio, with
    the derivative-at-midpoint branch when |a - c| <= EPS_SWITCH*(1+|a|+|c|).
    """
    if nl.stable_quotient is not None:
        return _scalar_like(nl.stable_quotient(a, c), a, c)
    aa = np.asarray(a, dtype=float)
    cc = np.asarray(c, dtype=float)
    diff = aa - cc
    degenerate = np.abs(diff) <= EPS_SWITCH * (1.0 + np.abs(aa) + np.abs(cc))
    safe = np.where(degenerate, 1.0, diff)
    ratio = (nl.potential(aa) - nl.potential(cc)) / safe
    out = np.where(degenerate, nl.derivative(0.5 * (aa + cc)), ratio)
    return _scalar_like(out, a, c)


def four_point_quotient(f: Callable, a, b, c, d, diagonal_derivative: Optional[Callable] = None):
    """d(f, loc)/d(a, b : c, d) for a two-variable density f.

    Degenerate midpoints (loc(a,b) ~ loc(c,d)) require the diagonal
    derivative x -> d/dx f(x, x) as a callback; omitting it there is a
    contract violation.
    """
    loc_ab = 0.5 * (a + b)
    loc_cd = 0.5 * (c + d)
    if abs(loc_ab - loc_cd) > EPS_SWITCH * (1.0 + abs(loc_ab) + abs(loc_cd)):
        return (f(a, b) - f(c, d)) / (loc_ab - loc_cd)
    if diagonal_derivative is None:
        raise ValueError("degenerate four-point quotient needs a diagonal-derivative callback")
    return diagonal_derivative(loc_ab)


def averaged_second_quotient(nl: Nonlinearity, xi, xit, eta, etat):
    """Fbar''(xi, xit; eta, etat), a second-order difference quotient of F.

    Off the diagonal this is the first-order quotient, in xi, of
    g(x) = dF/d(x, eta) + dF/d(x, etat); on it, g'(xi), computed by centered
    numerical differentiation with step eps^(1/3)*(1+|xi|) since no closed
    form exists for general F.
    """

    def g(x):
        return two_point_quotient(nl, x, eta) + two_point_quotient(nl, x, etat)

    if abs(xi - xit) > EPS_SWITCH * (1.0 + abs(xi) + abs(xit)):
        return (g(xi) - g(xit)) / (xi - xit)
    x0 = 0.5 * (xi + xit)
    h = _EPS ** (1.0 / 3.0) * (1.0 + abs(xi))
    return (g(x0 + h) - g(x0 - h)) / (2.0 * h)


def quotient_decomposition_defect(nl: Nonlinearity, xi, xit, eta, etat):
    """Defect of the exact decomposition of a difference of quotients:

        dF/d(xi, eta) - dF/d(xit, etat)
            = Fbar''(xi, xit; eta, etat) (xi - xit)/2
            + Fbar''(eta, etat; xi, xit) (eta - etat)/2.

    Returns left minus right side; zero up to rounding.
    """
    lhs = two_point_quotient(nl, xi, eta) - two_point_quotient(nl, xit, etat)
    rhs = 0.5 * averaged_second_quotient(nl, xi, xit, eta, etat) * (xi - xit)
    rhs += 0.5 * averaged_second_quotient(nl, eta, etat, xi, xit) * (eta - etat)
    return lhs - rhs


def sinc(x):
    """sin(x)/x with sinc(0) = 1; Taylor fallback 1 - x^2/6 + x^4/120 for |x| < 1e-4."""
    xx = np.asarray(x, dtype=float)
    small = np.abs(xx) < 1e-4
    safe = np.where(small, 1.0, xx)
    out = np.where(small, 1.0 - xx * xx / 6.0 + xx**4 / 120.0, np.sin(safe) / safe)
    return _scalar_like(out, x)


def cubic() -> Nonlinearity:
    """Defocusing quartic potential u^4/4 (cubic restoring force)."""
    return Nonlinearity(
        name="cubic",
        potential=lambda u: 0.25 * u**4,
        derivative=lambda u: u**3,
        second_derivative=lambda u: 3.0 * u**2,
        stable_quotient=lambda a, c: 0.25 * (a**3 + a**2 * c + a * c**2 + c**3),
    )


def sine_gordon() -> Nonlinearity:
    """Pendulum potential 1 - cos(u); quotient sinc((a-c)/2) sin((a+c)/2)."""
    return Nonlinearity(
        name="sine_gordon",
        potential=lambda u: 1.0 - np.cos(u),
        derivative=np.sin,
        second_derivative=np.cos,
        stable_quotient=lambda a, c: sinc(0.5 * (a - c)) * np.sin(0.5 * (a + c)),
    )


def klein_gordon() -> Nonlinearity:
    """u^4/4 + u^2/2; coercive enough for unconditional global existence."""
    return Nonlinearity(
        name="klein_gordon",
        potential=lambda u: 0.25 * u**4 + 0.5 * u**2,
        derivative=lambda u: u**3 + u,
        second_derivative=lambda u: 3.0 * u**2 + 1.0,
        stable_quotient=lambda a, c: 0.25 * (a**3 + a**2 * c + a * c**2 + c**3) + 0.5 * (a + c),
    )


def zero() -> Nonlinearity:
    """No potential: the linear wave equation (the actuator model)."""
    return Nonlinearity(
        name="zero",
        potential=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
        derivative=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
        second_derivative=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
        stable_quotient=lambda a, c: np.zeros_like(np.asarray(a, dtype=float) + np.asarray(c, dtype=float)),
    )


def string_flux() -> FluxDensity:
    """Arclength density of the quasilinear vibrating string.

    X(a, b) = (sqrt(1+a^2) + sqrt(1+b^2))/2, with time-diagonal quotient
    (a + c)/(sqrt(1+a^2) + sqrt(1+c^2)); the diagonal value a/sqrt(1+a^2)
    is the continuous flux, bounded by 1 in modulus.
    """
    return FluxDensity(
        name="string",
        density=lambda a, b: 0.5 * (np.sqrt(1.0 + a**2) + np.sqrt(1.0 + b**2)),
        stable_quotient=lambda a, c: (a + c) / (np.sqrt(1.0 + a**2) + np.sqrt(1.0 + c**2)),
    )


def quadratic_flux() -> FluxDensity:
    """X(a, b) = (a^2 + b^2)/4: the gradient density of the semilinear case.

    With this flux the general scheme reduces to the semilinear one, which
    the cross-module tests exploit.
    """
    return FluxDensity(
        name="quadratic",
        density=lambda a, b: 0.25 * (a**2 + b**2),
        stable_quotient=lambda a, c: 0.5 * (a + c),
    )


_NONLINEARITIES = {
    "cubic": cubic,
    "sine_gordon": sine_gordon,
    "klein_gordon": klein_gordon,
    "zero": zero,
}

_FLUX_DENSITIES = {
    "string": string_flux,
    "quadratic": quadratic_flux,
}


def nonlinearity(name: str) -> Nonlinearity:
    """Look up a catalog nonlinearity by name."""
    try:
        return _NONLINEARITIES[name]()
    except KeyError:
        raise ValueError(
            f"unknown nonlinearity {name!r}; known: {sorted(_NONLINEARITIES)}"
        ) from None


def flux_density(name: str) -> FluxDensity:
    """Look up a catalog flux density by name."""
    try:
        return _FLUX_DENSITIES[name]()
    except KeyError:
        raise ValueError(
            f"unknown flux density {name!r}; known: {sorted(_FLUX_DENSITIES)}"
        ) from None


def nonlinearity_names() -> list[str]:
    return sorted(_NONLINEARITIES)


def flux_density_names() -> list[str]:
    return sorted(_FLUX_DENSITIES)
