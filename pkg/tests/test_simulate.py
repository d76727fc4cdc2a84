from dataclasses import replace

import numpy as np
import pytest

from uphill.exact import full_generator, stationary_distribution
from uphill.model import (Configuration, EdgeRateMatrix, Graph, ProcessModel,
                          SiteRateMatrix, pair_index)
from uphill.rates import REFERENCE_PARAMS, build_model
from uphill.simulate import (SimConfig, empirical_pair_distribution,
                             fick_current, initial_configuration, run,
                             run_ensemble, total_current)
from uphill import analytic

REF_BC = replace(REFERENCE_PARAMS, rhoL1=0.2, rhoL2=0.6, rhoR1=0.3, rhoR2=0.1)


def stirring_model(n_sites):
    G = np.zeros((9, 9))
    for g in range(3):
        for d in range(3):
            if g != d:
                G[pair_index(g, d), pair_index(d, g)] = 1.0
    return ProcessModel(graph=Graph.chain(n_sites),
                        bulk=EdgeRateMatrix(n=2, entries=G))


def test_zero_rate_model_is_absorbing():
    model = ProcessModel(graph=Graph.chain(3),
                         bulk=EdgeRateMatrix(n=2, entries=np.zeros((9, 9))))
    eta0 = Configuration((1, 0, 2))
    stats = run(model, eta0, SimConfig(seed=0, sample_time=5.0))
    assert stats.absorbed
    assert stats.event_count == 0
    expected = np.zeros((3, 3))
    for z, v in enumerate(eta0.occupation):
        expected[z, v] = 1.0
    assert np.allclose(stats.mu, expected, atol=1e-12)
    assert np.abs(stats.current).max() == 0.0


def test_two_site_stirring_equilibrates():
    model = stirring_model(2)
    stats = run(model, Configuration((1, 0)),
                SimConfig(seed=3, burn_in_time=10.0, sample_time=4000.0))
    for z in (0, 1):
        err = max(stats.stderr[z, 1], 1e-4)
        assert abs(stats.mu[z, 1] - 0.5) <= 3 * err


def test_simulation_matches_discrete_stationary_profile():
    model = build_model(REF_BC, 8)
    eta0 = initial_configuration(model, seed=5)
    stats = run_ensemble(model, eta0, SimConfig(
        seed=5, burn_in_time=100.0, sample_time=1500.0, replicas=8))
    assert np.abs(stats.mu.sum(axis=1) - 1.0).max() <= 1e-12
    target = analytic.stationary_discrete(REF_BC, 8)
    diff = np.abs(stats.species_mu() - target)
    se = np.maximum(stats.stderr[:, 1:3], 1e-4)
    assert (diff / se).max() <= 3.5


def test_thread_cap_preserves_results(monkeypatch):
    model = build_model(REF_BC, 4)
    eta0 = initial_configuration(model, seed=61)
    cfg = SimConfig(seed=61, burn_in_time=5.0, sample_time=100.0, replicas=4)
    wide = run_ensemble(model, eta0, cfg)
    monkeypatch.setenv("UPHILL_THREADS", "1")
    narrow = run_ensemble(model, eta0, cfg)
    assert np.array_equal(wide.mu, narrow.mu)
    assert np.array_equal(wide.crossings, narrow.crossings)


def test_ensemble_single_replica_equals_run():
    model = build_model(REF_BC, 4)
    eta0 = initial_configuration(model, seed=9)
    cfg = SimConfig(seed=9, burn_in_time=5.0, sample_time=50.0, replicas=1)
    a = run(model, eta0, cfg)
    b = run_ensemble(model, eta0, cfg)
    assert np.array_equal(a.mu, b.mu)
    assert a.event_count == b.event_count


def test_determinism_bitwise():
    model = build_model(REF_BC, 6)
    eta0 = initial_configuration(model, seed=11)
    cfg = SimConfig(seed=11, burn_in_time=10.0, sample_time=200.0, replicas=3)
    a = run_ensemble(model, eta0, cfg)
    b = run_ensemble(model, eta0, cfg)
    assert np.array_equal(a.mu, b.mu)
    assert np.array_equal(a.stderr, b.stderr)
    assert np.array_equal(a.crossings, b.crossings)
    assert a.event_count == b.event_count


def test_replica_error_scaling():
    model = build_model(REF_BC, 5)
    eta0 = initial_configuration(model, seed=21)
    one = run_ensemble(model, eta0, SimConfig(
        seed=21, burn_in_time=50.0, sample_time=400.0, replicas=1))
    sixteen = run_ensemble(model, eta0, SimConfig(
        seed=21, burn_in_time=50.0, sample_time=400.0, replicas=16))
    ratio = (np.median(one.stderr[:, 1:] / np.maximum(sixteen.stderr[:, 1:],
                                                      1e-12)))
    assert 2.0 <= ratio <= 8.0   # ~4x shrink at 16 replicas


def test_fick_current_flat_and_linear():
    sigma = np.array([[1.0, 0.0], [0.0, 2.0]])
    flat = np.tile([0.2, 0.3], (6, 1))
    assert np.abs(fick_current(flat, sigma)).max() == 0.0
    s = 0.05
    lin = np.column_stack([0.1 + s * np.arange(6), 0.4 - 0.0 * np.arange(6)])
    J = fick_current(lin, sigma)
    assert np.allclose(J[:, 0], -1.0 * s, atol=1e-14)
    assert np.allclose(J[:, 1], 0.0, atol=1e-14)


def test_fick_current_matches_continuum():
    # reaction slowed by the squared spacing so the chain discretises the
    # continuum system; fick currents (x lattice factor) track J(x)
    N = 60
    scaled = replace(REF_BC, upsilon=REF_BC.upsilon / (N + 1) ** 2)
    rho = analytic.stationary_discrete(scaled, N)
    sol = analytic.stationary_continuum(REF_BC)
    J = fick_current(rho, REF_BC.sigma) * (N + 1)
    mid = np.arange(1, N) / (N + 1) + 0.5 / (N + 1)
    assert np.abs(J[:, 0] - sol.J1(mid)).max() <= 0.5 / N
    assert np.abs(J[:, 1] - sol.J2(mid)).max() <= 0.5 / N


def test_total_current_zero_for_balanced_totals():
    p = replace(REFERENCE_PARAMS, rhoL1=0.4, rhoL2=0.2, rhoR1=0.1, rhoR2=0.5)
    model = build_model(p, 6)
    eta0 = initial_configuration(model, seed=31)
    stats = run_ensemble(model, eta0, SimConfig(
        seed=31, burn_in_time=100.0, sample_time=1000.0, replicas=32))
    J = total_current(stats)
    se = np.maximum(stats.current_stderr, 1e-4)
    assert np.abs(J / se).max() <= 3.5


def test_total_current_uniform_and_signed():
    model = build_model(REF_BC, 8)
    eta0 = initial_configuration(model, seed=33)
    stats = run_ensemble(model, eta0, SimConfig(
        seed=33, burn_in_time=200.0, sample_time=2500.0, replicas=8))
    J = total_current(stats)
    se = np.maximum(stats.current_stderr, 1e-4)
    expected = (REF_BC.sigma11 + REF_BC.sigma21) * (0.8 - 0.4) / 9.0
    assert np.all(J > 0)                      # flow toward the emptier side
    assert np.abs((J - expected) / se).max() <= 3.5


def test_empirical_pair_distribution_matches_exact_solve():
    model = build_model(REF_BC, 2)
    eta0 = Configuration((0, 0))
    stats = run(model, eta0, SimConfig(seed=41, burn_in_time=50.0,
                                       sample_time=30_000.0))
    emp = empirical_pair_distribution(stats)
    pi = stationary_distribution(full_generator(model))
    tv = 0.5 * np.abs(emp - pi).sum()
    assert tv <= 0.03


def test_debug_rate_audit_passes(monkeypatch):
    monkeypatch.setenv("UPHILL_DEBUG_CHECKS", "1")
    model = build_model(REF_BC, 5)
    eta0 = initial_configuration(model, seed=51)
    stats = run(model, eta0, SimConfig(seed=51, burn_in_time=0.0,
                                       sample_time=60_000.0))
    assert stats.event_count > 300_000   # several audits happened


def test_initial_configuration_deterministic():
    model = build_model(REF_BC, 12)
    a = initial_configuration(model, seed=7)
    b = initial_configuration(model, seed=7)
    assert a == b
    c = initial_configuration(model, seed=8)
    assert len(c) == 12


def test_simconfig_validation():
    with pytest.raises(ValueError):
        SimConfig(seed=1, sample_time=0.0)
    with pytest.raises(ValueError):
        SimConfig(seed=1, sample_time=1.0, measurement_stride=2.0)
    assert SimConfig(seed=1, sample_time=10.0,
                     measurement_stride=0.1).n_batches == 100
