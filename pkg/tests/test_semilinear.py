import math

import numpy as np
import pytest

from dynwave.mesh import Grid, StatePair, norm_h1, norm_inf, trapz_sum
from dynwave.quotients import cubic, klein_gordon, nonlinearity, sine_gordon, two_point_quotient, zero
from dynwave.semilinear import (
    NoConvergence,
    SolverParams,
    contraction_constant,
    contraction_radius,
    discrete_energy,
    discrete_energy_density_form,
    first_step,
    ghost_average,
    neumann_energy,
    neumann_step,
    phi_apply,
    scheme_residual,
    step,
    xnorm,
)
from dynwave.harness import preset
from oracles import dense_phi_oracle, energy_oracle

EPS = np.finfo(float).eps


def random_pair(rng, grid, scale=1.0):
    prev = scale * rng.standard_normal(grid.K + 1)
    curr = prev + scale * grid.dt * rng.standard_normal(grid.K + 1)
    return StatePair(prev=prev, curr=curr, n=1)


def test_xnorm_constant_prev():
    g = Grid(L=6.0, T=1.0, K=10, N=10)
    pair = StatePair(prev=np.ones(11), curr=np.ones(11), n=1)
    assert xnorm(pair, g) == pytest.approx(math.sqrt(6.0), rel=1e-14)


def test_xnorm_boundary_increment_contribution():
    g = Grid(L=2.0, T=1.0, K=4, N=10)
    v = np.zeros(5)
    v[0] = g.dt
    pair = StatePair(prev=np.zeros(5), curr=v, n=1)
    # boundary term contributes 1, the l2 term (dt^2 * dx/2) / dt^2 = dx/2
    assert xnorm(pair, g) == pytest.approx(math.sqrt(1.0 + g.dx / 2.0), rel=1e-13)


def test_xnorm_matches_definition_small_case():
    g = Grid(L=1.0, T=1.0, K=3, N=7)
    rng = np.random.default_rng(0)
    pair = random_pair(rng, g)
    v = pair.curr - pair.prev
    expected = math.sqrt(
        norm_h1(pair.prev, g) ** 2
        + trapz_sum(v * v, g) / g.dt**2
        + (v[0] ** 2 + v[-1] ** 2) / g.dt**2
    )
    assert xnorm(pair, g) == pytest.approx(expected, rel=1e-14)


def test_discrete_energy_zero_and_constant_states():
    g = Grid(L=2.0, T=1.0, K=8, N=10)
    nl = cubic()
    z = np.zeros(9)
    assert discrete_energy(z, z, g, nl) == 0.0
    c = np.full(9, 1.7)
    assert discrete_energy(c, c, g, zero()) == 0.0


def test_discrete_energy_matches_quadrature_oracle():
    g = Grid(L=6.0, T=5.0, K=100, N=2000)
    nl = cubic()
    u0, _ = preset("case1", g)
    got = discrete_energy(u0, u0, g, nl)
    assert got == pytest.approx(energy_oracle(u0, u0, g, nl), rel=1e-13)
    rng = np.random.default_rng(1)
    un = u0 + 0.1 * rng.standard_normal(101)
    assert discrete_energy(un, u0, g, nl) == pytest.approx(
        energy_oracle(un, u0, g, nl), rel=1e-12
    )


def test_energy_density_form_agrees_with_simplified_form():
    rng = np.random.default_rng(2)
    for nl in [cubic(), sine_gordon(), klein_gordon(), zero()]:
        for _ in range(20):
            K = int(rng.integers(2, 33))
            g = Grid(L=float(rng.uniform(0.5, 6)), T=1.0, K=K, N=int(rng.integers(5, 50)))
            un = rng.standard_normal(K + 1)
            uc = rng.standard_normal(K + 1)
            a = discrete_energy(un, uc, g, nl)
            b = discrete_energy_density_form(un, uc, g, nl)
            assert abs(a - b) <= 10 * EPS * max(1.0, abs(a))


def test_phi_apply_zero_fixed_point():
    g = Grid(L=2.0, T=1.0, K=6, N=10)
    z = np.zeros(7)
    pair = StatePair(prev=z, curr=z, n=1)
    out = phi_apply(z, pair, g, zero())
    np.testing.assert_allclose(out, 0.0, atol=1e-15)


@pytest.mark.parametrize("K", [2, 4, 8])
@pytest.mark.parametrize("nl_name", ["cubic", "sine_gordon", "zero"])
def test_phi_apply_matches_dense_rederivation(K, nl_name):
    nl = nonlinearity(nl_name)
    g = Grid(L=1.5, T=1.0, K=K, N=9)
    rng = np.random.default_rng(K)
    pair = random_pair(rng, g, scale=0.7)
    guess = pair.curr + 0.1 * rng.standard_normal(K + 1)
    got = phi_apply(guess, pair, g, nl)
    expected = dense_phi_oracle(guess, pair, g, nl)
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-13)


def test_step_zero_state_converges_immediately():
    g = Grid(L=2.0, T=1.0, K=6, N=10)
    z = np.zeros(7)
    unext, diag = step(StatePair(prev=z, curr=z, n=1), g, zero())
    np.testing.assert_array_equal(unext, z)
    assert diag.iterations == 1
    assert diag.final_increment == 0.0
    assert diag.M_n == 0.0


def test_step_output_satisfies_scheme():
    g = Grid(L=6.0, T=5.0, K=50, N=1000)
    nl = cubic()
    u0, v0 = preset("case1", g)
    u1 = first_step(u0, v0, g, nl)
    pair = StatePair(prev=u0, curr=u1, n=1)
    unext, diag = step(pair, g, nl)
    res = scheme_residual(unext, pair, g, nl)
    assert norm_inf(res) <= 1e-10
    assert diag.iterations <= 10


def test_step_residual_scales_with_tolerance():
    g = Grid(L=6.0, T=5.0, K=50, N=1000)
    nl = cubic()
    u0, v0 = preset("case1", g)
    u1 = first_step(u0, v0, g, nl)
    pair = StatePair(prev=u0, curr=u1, n=1)
    unext, _ = step(pair, g, nl, SolverParams(tol=1e-13))
    bound = 100 * 1e-13 / g.dt**2
    assert norm_inf(scheme_residual(unext, pair, g, nl)) <= bound


def test_constant_state_is_a_fixed_point_of_the_linear_scheme():
    # a resting constant solves the scheme; the boundary rows scale with the
    # state but do so consistently, and the residual vanishes at the output
    g = Grid(L=2.0, T=1.0, K=8, N=16)
    c = np.full(9, 1.3)
    pair = StatePair(prev=c, curr=c.copy(), n=1)
    unext, _ = step(pair, g, zero())
    np.testing.assert_allclose(unext, c, rtol=1e-12)
    assert norm_inf(scheme_residual(unext, pair, g, zero())) <= 1e-10


def test_scheme_residual_zero_data():
    g = Grid(L=2.0, T=1.0, K=5, N=10)
    z = np.zeros(6)
    res = scheme_residual(z, StatePair(prev=z, curr=z, n=1), g, zero())
    np.testing.assert_array_equal(res, 0.0)


def test_scheme_residual_linear_response_to_perturbation():
    g = Grid(L=3.0, T=2.0, K=12, N=20)
    nl = cubic()
    rng = np.random.default_rng(3)
    pair = random_pair(rng, g, scale=0.5)
    unext = pair.curr + g.dt * rng.standard_normal(13)
    k = 6
    res0 = scheme_residual(unext, pair, g, nl)
    bumped = unext.copy()
    bumped[k] += 1.0
    res1 = scheme_residual(bumped, pair, g, nl)
    dq = two_point_quotient(nl, bumped[k], pair.prev[k]) - two_point_quotient(
        nl, unext[k], pair.prev[k]
    )
    expected = 1.0 / g.dt**2 + 1.0 / g.dx**2 + dq
    assert res1[k] - res0[k] == pytest.approx(expected, rel=1e-10)
    # neighbours move only through the averaged level: -(1/2)/dx^2 each
    assert res1[k + 1] - res0[k + 1] == pytest.approx(-0.5 / g.dx**2, rel=1e-10)


def test_ghost_average_trivial_and_constant():
    g = Grid(L=2.0, T=1.0, K=5, N=10)
    z = np.zeros(6)
    assert ghost_average(z, StatePair(prev=z, curr=z, n=1), g) == (0.0, 0.0)
    c = np.full(6, 2.5)
    wl, wr = ghost_average(c, StatePair(prev=c, curr=c, n=1), g)
    # spatially constant averaged level with zero time curvature: ghosts copy
    # the inner neighbours
    assert wl == pytest.approx(2.5)
    assert wr == pytest.approx(2.5)


def test_ghost_average_matches_formula():
    g = Grid(L=1.0, T=1.0, K=4, N=7)
    rng = np.random.default_rng(4)
    pair = random_pair(rng, g)
    unext = pair.curr + g.dt * rng.standard_normal(5)
    w = 0.5 * (unext + pair.prev)
    d2t = (unext - 2 * pair.curr + pair.prev) / g.dt**2
    wl, wr = ghost_average(unext, pair, g)
    assert wl == pytest.approx(w[1] - 2 * g.dx * d2t[0], rel=1e-13)
    assert wr == pytest.approx(w[-2] - 2 * g.dx * d2t[-1], rel=1e-13)


def test_first_step_trivial_data():
    g = Grid(L=2.0, T=1.0, K=6, N=10)
    z = np.zeros(7)
    np.testing.assert_array_equal(first_step(z, z, g, cubic()), z)


def test_first_step_affine_data_linear_wave():
    g = Grid(L=2.0, T=1.0, K=8, N=10)
    slope = 0.75
    u0 = 1.0 + slope * g.nodes
    v0 = np.zeros(9)
    u1 = first_step(u0, v0, g, zero())
    a = 2.0 * (u1 - u0) / g.dt**2
    # interior acceleration vanishes; the ends feel +/- the slope
    np.testing.assert_allclose(a[1:-1], 0.0, atol=1e-10)
    assert a[0] == pytest.approx(slope, rel=1e-10)
    assert a[-1] == pytest.approx(-slope, rel=1e-10)


def test_fixed_point_increments_decrease_after_first():
    g = Grid(L=6.0, T=5.0, K=100, N=2000)
    nl = cubic()
    u0, v0 = preset("case1", g)
    u1 = first_step(u0, v0, g, nl)
    prev, curr = u0, u1
    for n in range(1, 6):
        unext, diag = step(StatePair(prev, curr, n), g, nl, SolverParams(check_radius=True))
        incs = diag.increments
        assert all(incs[i + 1] < incs[i] for i in range(len(incs) - 1))
        assert diag.radius_ok is True
        prev, curr = curr, unext


def test_step_raises_no_convergence_for_huge_dt():
    g = Grid(L=6.0, T=5.0, K=100, N=5)  # dt = 1
    nl = cubic()
    u0, v0 = preset("case3", g)
    u1 = first_step(u0, v0, g, nl)
    with pytest.raises(NoConvergence, match="reduce dt"):
        step(StatePair(prev=u0, curr=u1, n=1), g, nl)


def test_energy_bound_along_trajectory():
    # kinetic part stays below twice the conserved energy (B_F = 0 here)
    g = Grid(L=6.0, T=2.0, K=50, N=200)
    nl = klein_gordon()
    u0, v0 = preset("case2", g)
    u1 = first_step(u0, v0, g, nl)
    j0 = discrete_energy(u1, u0, g, nl)
    prev, curr = u0, u1
    for n in range(1, g.N):
        unext, _ = step(StatePair(prev, curr, n), g, nl)
        kin = trapz_sum(((unext - curr) / g.dt) ** 2, g)
        assert kin <= 2.0 * j0 * (1 + 1e-9)
        prev, curr = curr, unext


def test_contraction_radius_diagnostics():
    nl = cubic()
    diag = contraction_radius(nl, m=1.6, L=6.0)
    rho = math.sqrt(3.0) * 1.0424968 * 1.6
    assert diag.c_contr == pytest.approx(
        math.sqrt(0.5 + 0.5 * (3 * rho**2) ** 2), rel=1e-4
    )
    assert diag.r1 <= 1.0 / diag.c_contr
    assert diag.c_into > 0
    assert contraction_constant(nl, 1.6, 6.0) == pytest.approx(diag.c_contr, rel=1e-12)
    # zero state: radius degenerates to the contraction bound alone
    z = contraction_radius(zero(), m=0.0, L=6.0)
    assert z.r1 == pytest.approx(1.0 / z.c_contr, rel=1e-12)


def test_neumann_step_zero_data_and_energy_conservation():
    g = Grid(L=6.0, T=2.0, K=50, N=400)
    nl = cubic()
    z = np.zeros(51)
    out, _ = neumann_step(StatePair(prev=z, curr=z, n=1), g, nl)
    np.testing.assert_array_equal(out, z)

    u0, v0 = preset("case1", g)
    u1 = first_step(u0, v0, g, nl)
    prev, curr = u0, u1
    j0 = neumann_energy(u1, u0, g, nl)
    worst = 0.0
    for n in range(1, g.N):
        unext, _ = neumann_step(StatePair(prev, curr, n), g, nl)
        worst = max(worst, abs(neumann_energy(unext, curr, g, nl) - j0))
        prev, curr = curr, unext
    assert worst / max(1.0, abs(j0)) <= 1e-10


def test_neumann_differs_from_dynamic_after_reflection():
    g = Grid(L=6.0, T=5.0, K=50, N=500)
    nl = cubic()
    u0, v0 = preset("case1", g)
    u1 = first_step(u0, v0, g, nl)
    dyn_prev, dyn_curr = u0, u1
    neu_prev, neu_curr = u0.copy(), u1.copy()
    max_boundary_gap = 0.0
    for n in range(1, g.N):
        dyn_next, _ = step(StatePair(dyn_prev, dyn_curr, n), g, nl)
        neu_next, _ = neumann_step(StatePair(neu_prev, neu_curr, n), g, nl)
        max_boundary_gap = max(max_boundary_gap, abs(dyn_next[0] - neu_next[0]))
        dyn_prev, dyn_curr = dyn_curr, dyn_next
        neu_prev, neu_curr = neu_curr, neu_next
    assert max_boundary_gap > 0.05


def test_solver_params_validation():
    with pytest.raises(ValueError):
        SolverParams(tol=0.0)
    with pytest.raises(ValueError):
        SolverParams(max_iter=0)
