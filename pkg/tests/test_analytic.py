from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import solve_bvp

from uphill import analytic
from uphill.analytic import (BoundaryDensities, classify_uphill, integrate,
                             max_stable_dt, ode_rhs, stationary_continuum,
                             stationary_discrete, weak_coupling_solution)
from uphill.rates import REFERENCE_PARAMS, MacroParams

from conftest import draw_valid_params

REF_BC = replace(REFERENCE_PARAMS, rhoL1=0.2, rhoL2=0.6, rhoR1=0.3, rhoR2=0.1)
DECOUPLED = MacroParams(sigma11=1.0, sigma12=0.0, sigma21=0.0, sigma22=1.0,
                        upsilon=0.0, rhoL1=0.1, rhoL2=0.5, rhoR1=0.6, rhoR2=0.2)


def bvp_oracle(params, bc, x):
    """Independent two-point boundary-value solve of the stationary system."""
    s11, s12, s21, s22 = (params.sigma11, params.sigma12, params.sigma21,
                          params.sigma22)
    U = params.upsilon
    det = s11 * s22 - s12 * s21

    def rhs(xx, y):
        f1 = U * (y[1] - y[0])
        f2 = U * (y[0] - y[1])
        return np.vstack([y[2], y[3],
                          -(s22 * f1 - s12 * f2) / det,
                          -(-s21 * f1 + s11 * f2) / det])

    def bcfun(ya, yb):
        return np.array([ya[0] - bc.rhoL1, ya[1] - bc.rhoL2,
                         yb[0] - bc.rhoR1, yb[1] - bc.rhoR2])

    grid = np.linspace(0.0, 1.0, 101)
    y0 = np.zeros((4, grid.size))
    y0[0] = np.linspace(bc.rhoL1, bc.rhoR1, grid.size)
    y0[1] = np.linspace(bc.rhoL2, bc.rhoR2, grid.size)
    sol = solve_bvp(rhs, bcfun, grid, y0, tol=1e-10, max_nodes=200_000)
    assert sol.success
    vals = sol.sol(x)
    J1 = -s11 * vals[2] - s12 * vals[3]
    J2 = -s21 * vals[2] - s22 * vals[3]
    return vals[0], vals[1], J1, J2


def test_ode_rhs_linear_profiles_are_harmonic():
    N = 6
    x = np.arange(1, N + 1) / (N + 1)
    rho = np.column_stack([
        DECOUPLED.rhoL1 + (DECOUPLED.rhoR1 - DECOUPLED.rhoL1) * x,
        DECOUPLED.rhoL2 + (DECOUPLED.rhoR2 - DECOUPLED.rhoL2) * x])
    assert np.abs(ode_rhs(DECOUPLED, rho)).max() <= 1e-13


def test_ode_rhs_constant_profile_leaves_boundary_terms():
    rho = np.full((5, 2), 0.25)
    out = ode_rhs(REF_BC, rho)
    assert np.abs(out[1:-1]).max() <= 1e-14
    assert np.abs(out[0]).max() > 0 and np.abs(out[-1]).max() > 0


def test_integrate_zero_time_returns_initial(rng):
    rho0 = rng.uniform(0, 0.5, size=(4, 2))
    times, traj = integrate(REF_BC, rho0, t_end=0.0, dt=0.001)
    assert times.shape == (1,)
    assert np.array_equal(traj[0], rho0)


def test_integrate_converges_to_stationary():
    N = 5
    rho0 = np.full((N, 2), 0.3)
    dt = max_stable_dt(REF_BC, N)
    _, traj = integrate(REF_BC, rho0, t_end=60.0, dt=dt)
    target = stationary_discrete(REF_BC, N)
    assert np.abs(traj[-1] - target).max() <= 1e-8


def test_integrate_fourth_order(rng):
    N = 4
    rho0 = rng.uniform(0, 0.4, size=(N, 2))
    t_end = 0.256
    base = max_stable_dt(REF_BC, N)
    _, ref = integrate(REF_BC, rho0, t_end, dt=base / 64)
    err = []
    for div in (2, 4):
        _, traj = integrate(REF_BC, rho0, t_end, dt=base / div)
        err.append(np.abs(traj[-1] - ref[-1]).max())
    ratio = err[0] / err[1]
    assert 10.0 <= ratio <= 24.0   # fourth order: halving dt cuts error ~16x


def test_integrate_refuses_unstable_dt():
    with pytest.raises(ValueError, match="dt"):
        integrate(REF_BC, np.zeros((10, 2)), t_end=1.0, dt=1.0)


def test_stationary_discrete_flat_for_balanced_equal_reservoirs():
    p = replace(REFERENCE_PARAMS, rhoL1=0.25, rhoL2=0.25, rhoR1=0.25,
                rhoR2=0.25)
    rho = stationary_discrete(p, 7)
    assert np.allclose(rho, 0.25, atol=1e-12)


def test_stationary_discrete_equal_reservoirs_flat_total():
    # with unbalanced species the reaction bends each profile, but the total
    # density still interpolates the (equal) reservoir totals
    p = replace(REFERENCE_PARAMS, rhoL1=0.2, rhoL2=0.3, rhoR1=0.2, rhoR2=0.3)
    rho = stationary_discrete(p, 7)
    assert np.allclose(rho.sum(axis=1), 0.5, atol=1e-12)
    assert np.abs(rho[:, 0] - 0.2).max() > 1e-3


def test_stationary_discrete_decoupled_is_linear():
    rho = stationary_discrete(DECOUPLED, 9)
    x = np.arange(1, 10) / 10.0
    assert np.allclose(rho[:, 0], 0.1 + 0.5 * x, atol=1e-12)
    assert np.allclose(rho[:, 1], 0.5 - 0.3 * x, atol=1e-12)


def test_stationary_discrete_converges_to_continuum():
    # the unit-spacing chain matches the [0,1] continuum system once its
    # reaction is slowed by the squared lattice spacing
    sol = stationary_continuum(REF_BC)
    errs = []
    for N in (25, 50, 100):
        scaled = replace(REF_BC, upsilon=REF_BC.upsilon / (N + 1) ** 2)
        rho = stationary_discrete(scaled, N)
        x = np.arange(1, N + 1) / (N + 1)
        errs.append(max(np.abs(rho[:, 0] - sol.rho1(x)).max(),
                        np.abs(rho[:, 1] - sol.rho2(x)).max()))
    assert errs[2] < errs[1] < errs[0]
    assert errs[0] <= 1.0 / 25          # comfortably within O(1/N)
    assert errs[2] <= errs[0] * 25 / 100 * 4


def test_stationary_discrete_unscaled_reaction_dominates():
    # at fixed parameters the chain's effective reaction grows like N^2, so
    # the species gap closes in the interior; only the total density tracks
    # the continuum
    rho = stationary_discrete(REF_BC, 200)
    assert np.abs(rho[90:110, 0] - rho[90:110, 1]).max() <= 1e-3
    sol = stationary_continuum(REF_BC)
    x = np.arange(1, 201) / 201.0
    total = sol.rho1(x) + sol.rho2(x)
    assert np.abs(rho.sum(axis=1) - total).max() <= 5e-3


def test_continuum_reference_constants():
    sol = stationary_continuum(REF_BC)
    assert np.isclose(sol.A, 2.0) and np.isclose(sol.B, -2.0)
    assert np.isclose(sol.decay_rate, 2.0)
    assert np.isclose(sol.rho1(0.0), 0.2, atol=1e-10)
    assert np.isclose(sol.rho2(0.0), 0.6, atol=1e-10)
    assert np.isclose(sol.rho1(1.0), 0.3, atol=1e-10)
    assert np.isclose(sol.rho2(1.0), 0.1, atol=1e-10)


def test_continuum_flat_for_balanced_equal_reservoirs():
    p = replace(REFERENCE_PARAMS, rhoL1=0.2, rhoL2=0.2, rhoR1=0.2, rhoR2=0.2)
    sol = stationary_continuum(p)
    assert abs(sol.C) <= 1e-12 and abs(sol.D) <= 1e-12 and abs(sol.F) <= 1e-12
    x = np.linspace(0, 1, 11)
    assert np.allclose(sol.rho1(x), 0.2, atol=1e-12)
    assert np.allclose(sol.rho2(x), 0.2, atol=1e-12)


def test_continuum_against_bvp_oracle():
    bc = BoundaryDensities.from_params(REF_BC)
    sol = stationary_continuum(REF_BC)
    x = np.linspace(0, 1, 21)
    r1, r2, J1, J2 = bvp_oracle(REF_BC, bc, x)
    assert np.abs(sol.rho1(x) - r1).max() <= 1e-6
    assert np.abs(sol.J1(x) - J1).max() <= 1e-3
    assert abs(sol.J1(0.0) - 0.065) <= 1e-3
    assert sol.J1(0.0) > 0


def test_bvp_residual_for_random_draws(rng):
    x = np.linspace(0.0, 1.0, 101)
    for _ in range(1000):
        p = draw_valid_params(rng)
        sol = stationary_continuum(p)
        d1, d2 = sol.second_derivatives(x)
        res1 = (p.sigma11 * d1 + p.sigma12 * d2
                + p.upsilon * (sol.rho2(x) - sol.rho1(x)))
        res2 = (p.sigma21 * d1 + p.sigma22 * d2
                + p.upsilon * (sol.rho1(x) - sol.rho2(x)))
        scale = max(1.0, p.upsilon, sol.A - sol.B)
        assert max(np.abs(res1).max(), np.abs(res2).max()) <= 1e-8 * scale
        assert np.isclose(sol.rho1(0.0), p.rhoL1, atol=1e-10)
        assert np.isclose(sol.rho2(1.0), p.rhoR2, atol=1e-10)


def test_total_density_affine_and_current_constant(rng):
    x = np.linspace(0.0, 1.0, 101)
    for _ in range(100):
        p = draw_valid_params(rng)
        sol = stationary_continuum(p)
        assert np.isclose(sol.A + sol.B, 0.0, atol=1e-10 * max(1.0, abs(sol.A)))
        total = sol.rho1(x) + sol.rho2(x)
        fitted = total[0] + (total[-1] - total[0]) * x
        assert np.abs(total - fitted).max() <= 1e-10
        # the conserved conductance is the (equal) column sum of the
        # diffusivity matrix; it coincides with sigma11+sigma12 only when
        # the matrix is symmetric
        J = sol.total_current(x)
        expected = ((p.sigma11 + p.sigma21)
                    * (p.rhoL1 + p.rhoL2 - p.rhoR1 - p.rhoR2))
        assert np.abs(J - expected).max() <= 1e-10 * max(1.0, abs(expected) * 10)


def test_degenerate_branches():
    sol = stationary_continuum(DECOUPLED)
    x = np.linspace(0, 1, 11)
    assert np.allclose(sol.rho1(x), 0.1 + 0.5 * x, atol=1e-14)
    with pytest.raises(ValueError, match="cross-diffusion"):
        stationary_continuum(replace(DECOUPLED, sigma12=0.1))
    with pytest.raises(ValueError, match="singular"):
        stationary_continuum(MacroParams(sigma11=1.0, sigma12=1.0, sigma21=1.0,
                                         sigma22=1.0, upsilon=4.0))


def test_weak_coupling_matches_general_form():
    bc = BoundaryDensities(0.2, 0.6, 0.3, 0.1)
    for s11, U in ((1.0, 1.0), (0.7, 2.3), (1.3, 0.2)):
        weak = weak_coupling_solution(s11, U, bc)
        general = stationary_continuum(
            MacroParams(sigma11=s11, sigma12=0.0, sigma21=0.0, sigma22=s11,
                        upsilon=U), bc)
        x = np.linspace(0, 1, 41)
        assert np.abs(weak.rho1(x) - general.rho1(x)).max() <= 1e-10
        assert np.abs(weak.J1(x) - general.J1(x)).max() <= 1e-10


def test_weak_coupling_linear_when_species_balanced():
    bc = BoundaryDensities(0.3, 0.3, 0.1, 0.1)
    sol = weak_coupling_solution(1.0, 2.0, bc)
    x = np.linspace(0, 1, 21)
    assert np.allclose(sol.rho1(x), 0.3 - 0.2 * x, atol=1e-12)
    assert np.allclose(sol.rho2(x), 0.3 - 0.2 * x, atol=1e-12)


def test_weak_coupling_sharp_reaction_limit():
    # strong reaction: boundary layers, interior slope -> half the total gap
    bc = BoundaryDensities(0.1, 0.5, 0.4, 0.0)
    sol = weak_coupling_solution(1.0, 2500.0, bc)
    slope = (sol.rho1(0.5 + 1e-4) - sol.rho1(0.5 - 1e-4)) / 2e-4
    total_gap = (0.4 + 0.0) - (0.1 + 0.5)
    assert abs(slope - total_gap / 2) <= 1e-3


def test_classify_uphill_figure_tuples():
    for tup, monotone in (((0.2, 0.6, 0.3, 0.1), False),
                          ((0.3, 0.5, 0.4, 0.1), False),
                          ((0.01, 0.1, 0.02, 0.02), True),
                          ((0.08, 0.08, 0.09, 0.01), True)):
        bc = BoundaryDensities(*tup)
        sol = stationary_continuum(REFERENCE_PARAMS, bc)
        v = classify_uphill(sol, bc)
        assert v.local1, tup
        assert v.global_uphill is None
        assert v.min_J1[1] > 0
        x = np.linspace(0, 1, 2001)
        dJ = np.diff(sol.J1(x))
        is_monotone = bool(np.all(dJ <= 1e-12) or np.all(dJ >= -1e-12))
        assert is_monotone == monotone, tup


def test_classify_uphill_downhill_case():
    bc = BoundaryDensities(0.1, 0.1, 0.4, 0.4)
    sol = stationary_continuum(REFERENCE_PARAMS, bc)
    v = classify_uphill(sol, bc)
    assert not v.local1 and not v.local2
    assert v.global_uphill is None


def test_no_global_uphill_for_random_draws(rng):
    for _ in range(100):
        p = draw_valid_params(rng)
        bc = BoundaryDensities.from_params(p)
        sol = stationary_continuum(p)
        assert classify_uphill(sol, bc).global_uphill is None
