"""Orchestrated reproductions: simulation vs mean ODE, diffusive-scaling
convergence, and the stationary uphill figure set."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import analytic
from .analytic import BoundaryDensities, classify_uphill, stationary_continuum
from .model import Configuration, Graph, ProcessModel, SiteRateMatrix
from .rates import REFERENCE_PARAMS, MacroParams, build_boundary, build_bulk, build_model
from .simulate import SimConfig, initial_configuration, run, run_ensemble

FIGURE_BOUNDARY_TUPLES = (
    (0.2, 0.6, 0.3, 0.1),
    (0.3, 0.5, 0.4, 0.1),
    (0.01, 0.1, 0.02, 0.02),
    (0.08, 0.08, 0.09, 0.01),
)


def _thread_count(jobs: int) -> int:
    workers = min(jobs, os.cpu_count() or 1)
    cap = os.environ.get("UPHILL_THREADS")
    if cap:
        workers = max(1, min(workers, int(cap)))
    return workers


@dataclass(frozen=True)
class SimVsOdeReport:
    mu_sim: np.ndarray       # (N, 2)
    mu_ode: np.ndarray       # (N, 2)
    stderr: np.ndarray       # (N, 2)
    max_abs_diff: float
    max_sigma_units: float   # max |diff| / stderr
    event_count: int


def sim_vs_ode(params: MacroParams, n_sites: int, cfg: SimConfig) -> SimVsOdeReport:
    """Ensemble-simulate the built chain and compare against the stationary
    mean profile of the discrete system."""
    model = build_model(params, n_sites)
    eta0 = initial_configuration(
        model, seed=cfg.seed,
        densities=(0.5 * (params.rhoL1 + params.rhoR1),
                   0.5 * (params.rhoL2 + params.rhoR2)))
    stats = run_ensemble(model, eta0, cfg)
    mu_sim = stats.species_mu()
    se = np.maximum(stats.stderr[:, 1:3], 1e-12)
    mu_ode = analytic.stationary_discrete(params, n_sites)
    diff = mu_sim - mu_ode
    return SimVsOdeReport(mu_sim=mu_sim, mu_ode=mu_ode, stderr=se,
                          max_abs_diff=float(np.abs(diff).max()),
                          max_sigma_units=float(np.abs(diff / se).max()),
                          event_count=stats.event_count)


@dataclass(frozen=True)
class HydroReport:
    epsilons: tuple
    errors: tuple            # middle-80% L1 profile distances
    noise_floors: tuple      # expected L1 contribution of sampling noise
    monotone_flag: bool

    def to_json(self) -> dict:
        return {"epsilons": list(self.epsilons), "errors": list(self.errors),
                "noise_floors": list(self.noise_floors),
                "monotone": self.monotone_flag}


def step_profile(a1, b1, a2, b2, edge: float = 0.5):
    """Piecewise-constant initial macroscopic profiles for the two species."""
    def rho1(x):
        return np.where(np.asarray(x, dtype=float) < edge, a1, b1)

    def rho2(x):
        return np.where(np.asarray(x, dtype=float) < edge, a2, b2)

    return rho1, rho2


def _pde_reference(params, rho1_0, rho2_0, t, cells: int = 512):
    """Method-of-lines reference solution of the macroscopic equations on
    [0, 1] with Dirichlet values pinned to the initial endpoint values."""
    M = cells
    xs = (np.arange(M) + 0.5) / M
    s = params.sigma
    U = params.upsilon
    rho = np.column_stack([rho1_0(xs), rho2_0(xs)])
    left = np.array([float(rho1_0(0.0)), float(rho2_0(0.0))])
    right = np.array([float(rho1_0(1.0)), float(rho2_0(1.0))])
    smax = float(np.max(s))
    dt = 0.2 / (smax * M * M + 2 * U)
    steps = max(1, int(np.ceil(t / dt)))
    dt = t / steps
    K = U * np.array([[-1.0, 1.0], [1.0, -1.0]])

    def rhs(r):
        padded = np.vstack([2 * left - r[0], r, 2 * right - r[-1]])
        lap = (padded[:-2] - 2 * padded[1:-1] + padded[2:]) * (M * M)
        return lap @ s.T + r @ K.T

    for _ in range(steps):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * dt * k1)
        k3 = rhs(rho + 0.5 * dt * k2)
        k4 = rhs(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    def interp(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.column_stack([np.interp(x, xs, rho[:, 0]),
                                np.interp(x, xs, rho[:, 1])])

    return interp


def scaled_params(params: MacroParams, eps: float) -> MacroParams:
    """Family member with the total reaction slowed to upsilon * eps^2.

    Every reaction channel scales together: the mutation offsets (h, m) and
    the stirring-with-mutation rate each carry part of the local reaction
    (an SM event at rate r contributes 2r), so keeping the table a valid
    generator forces sigma12, sigma21, h, m to scale with eps^2 alongside
    upsilon.  The cross-diffusion of the slowed model is then O(eps^2) and
    drops out of the macroscopic equations.
    """
    e2 = eps * eps
    return replace(params,
                   sigma12=params.sigma12 * e2, sigma21=params.sigma21 * e2,
                   sigma22=params.sigma11 + (params.sigma21 - params.sigma12) * e2,
                   upsilon=params.upsilon * e2,
                   h=params.h * e2, m=params.m * e2)


def _scaled_model(params: MacroParams, eps: float, left_bc, right_bc) -> ProcessModel:
    """Microscopic chain for lattice spacing eps: 1/eps sites, reaction
    slowed to upsilon * eps^2, reservoirs pinned to the profile endpoints."""
    n_sites = int(round(1.0 / eps))
    micro = replace(scaled_params(params, eps),
                    rhoL1=left_bc[0], rhoL2=left_bc[1],
                    rhoR1=right_bc[0], rhoR2=right_bc[1])
    graph = Graph.chain(n_sites)
    left = build_boundary(micro, "left", check=False)
    right = build_boundary(micro, "right", check=False)
    return ProcessModel(graph=graph, bulk=build_bulk(micro, check=False),
                        boundary={1: SiteRateMatrix(left.entries, vertex=1),
                                  n_sites: SiteRateMatrix(right.entries,
                                                          vertex=n_sites)})


def hydro_convergence(params: MacroParams,
                      epsilons=(1 / 32, 1 / 64, 1 / 128),
                      t: float = 0.05,
                      initial=None,
                      replicas: int = 300,
                      seed: int = 2024,
                      window: float = 0.005) -> HydroReport:
    """Diffusive-scaling convergence of the empirical profile to the PDE.

    For each lattice spacing eps, a chain of 1/eps sites runs to the
    microscopic time t/eps^2 with the reaction rate slowed by eps^2.
    Per-replica profiles are time-averaged over a trailing window of
    macroscopic length ``window`` (cutting the sampling noise an order of
    magnitude at fixed replica count) and compared, L1 over the middle 80%
    of sites, with a fine-grid PDE solution at the window midpoint.
    """
    if not params.is_symmetric_family:
        raise ValueError("the scaling experiment uses the symmetric family")
    if initial is None:
        initial = step_profile(0.1, 0.5, 0.6, 0.1)
    rho1_0, rho2_0 = initial
    left_bc = (float(rho1_0(0.0)), float(rho2_0(0.0)))
    right_bc = (float(rho1_0(1.0)), float(rho2_0(1.0)))
    window = min(window, t) if t > 0 else 0.0
    errors = []
    floors = []
    for eps in epsilons:
        # macroscopic coefficients matched to this eps: the slowed model's
        # residual cross-diffusion is sigma12 * eps^2
        macro = replace(scaled_params(params, eps), upsilon=params.upsilon)
        if t > 0:
            reference = _pde_reference(macro, rho1_0, rho2_0, t - 0.5 * window)
        model = _scaled_model(params, eps, left_bc, right_bc)
        N = model.graph.vertex_count
        xs = (np.arange(1, N + 1) - 0.5) / N
        p1 = rho1_0(xs)
        p2 = rho2_0(xs)
        burn = (t - window) / eps ** 2
        sample = window / eps ** 2

        def one(seq):
            rg = np.random.Generator(np.random.PCG64(seq))
            draw = rg.random(N)
            occ = np.where(draw < p1, 1, np.where(draw < p1 + p2, 2, 0))
            if t <= 0:   # no dynamics: score the sampled initial state
                return np.column_stack([occ == 1, occ == 2]).astype(float)
            stats = run(model, Configuration(tuple(int(v) for v in occ)),
                        SimConfig(seed=0, burn_in_time=burn, sample_time=sample),
                        _rng=rg)
            return stats.species_mu()

        seeds = np.random.SeedSequence(seed + N).spawn(replicas)
        if t <= 0:
            reference = lambda x: np.column_stack([rho1_0(x), rho2_0(x)])
        with ThreadPoolExecutor(max_workers=_thread_count(replicas)) as pool:
            profiles = np.array(list(pool.map(one, seeds)))
        mu = profiles.mean(axis=0)
        se = profiles.std(axis=0, ddof=1) / np.sqrt(replicas)
        lo, hi = int(np.floor(0.1 * N)), int(np.ceil(0.9 * N))
        target = reference(xs)
        errors.append(float(np.abs(mu - target)[lo:hi].mean()))
        floors.append(float(np.mean(se[lo:hi]) * np.sqrt(2.0 / np.pi)))
    monotone = all(errors[i + 1] <= errors[i] for i in range(len(errors) - 1))
    return HydroReport(epsilons=tuple(float(e) for e in epsilons),
                       errors=tuple(errors), noise_floors=tuple(floors),
                       monotone_flag=monotone)


@dataclass(frozen=True)
class FigurePanel:
    boundary: tuple
    samples: np.ndarray      # columns x, rho1, rho2, J1, J2
    verdict: object


def reproduce_figures(params: MacroParams = REFERENCE_PARAMS, n_points: int = 201):
    """Stationary profile/current panels for the four boundary tuples that
    exhibit local uphill of species 1 (two with a non-monotone current, two
    with a monotone one)."""
    panels = []
    for tup in FIGURE_BOUNDARY_TUPLES:
        bc = BoundaryDensities(*tup)
        sol = stationary_continuum(params, bc)
        verdict = classify_uphill(sol, bc)
        panels.append(FigurePanel(boundary=tup, samples=sol.sample(n_points),
                                  verdict=verdict))
    return panels
