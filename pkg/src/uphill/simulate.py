"""Event-driven continuous-time Monte Carlo with stationary measurement.

Exact (Gillespie) simulation of a ProcessModel: exponential waiting times at
the total active rate, events picked proportionally to their rates, local
rate-table updates after every event.  Occupations and bond pair-products
are averaged with time weights over the sampling window; standard errors
come from batch means.  Occupancy crossings are counted per bond for events
that move an occupied state across it.

Randomness: numpy PCG64 streams; replica streams are spawned from
``SeedSequence(seed)``, so results are reproducible bit-for-bit for a given
seed and replica count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import Configuration, ProcessModel

DEFAULT_BATCHES = 50
MAX_BATCHES = 4096
AUDIT_INTERVAL = 100_000
AUDIT_TOL = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """Simulation window and reproducibility settings."""
    seed: int
    burn_in_time: float = 0.0
    sample_time: float = 1.0
    measurement_stride: float | None = None   # batch length; sample_time/50 if None
    replicas: int = 1

    def __post_init__(self):
        if self.burn_in_time < 0 or self.sample_time <= 0:
            raise ValueError("burn_in_time must be >= 0 and sample_time > 0")
        if self.replicas < 1:
            raise ValueError("replicas must be positive")
        stride = self.measurement_stride
        if stride is not None and not 0 < stride <= self.sample_time:
            raise ValueError("need 0 < measurement_stride <= sample_time")

    @property
    def n_batches(self) -> int:
        stride = self.measurement_stride
        if stride is None:
            return DEFAULT_BATCHES
        return int(min(MAX_BATCHES, max(DEFAULT_BATCHES,
                                        round(self.sample_time / stride))))


@dataclass(frozen=True)
class SimStats:
    """Time-averaged measurements of one run or a merged ensemble."""
    mu: np.ndarray               # (N, 3) occupation fractions incl. empty
    stderr: np.ndarray           # (N, 3)
    pair_corr: np.ndarray        # (E, 3, 3) bond joint occupation fractions
    crossings: np.ndarray        # (E,) signed crossing counts
    current: np.ndarray          # (E,) crossings / sample_time
    current_stderr: np.ndarray   # (E,)
    elapsed_process_time: float
    event_count: int
    absorbed: bool
    replicas: int = 1

    def species_mu(self) -> np.ndarray:
        """Occupation fractions of the two particle species, shape (N, 2)."""
        return self.mu[:, 1:3]


def compile_model(model: ProcessModel):
    """Flatten a ProcessModel into the arrays the kernel consumes."""
    graph = model.graph
    N = graph.vertex_count
    E = len(graph.edges)
    ex = np.array([x - 1 for x, _ in graph.edges], dtype=np.int64)
    ey = np.array([y - 1 for _, y in graph.edges], dtype=np.int64)
    ew = np.array(graph.edge_weights, dtype=np.float64)
    bulk = np.array(model.bulk.entries, dtype=np.float64)
    np.fill_diagonal(bulk, 0.0)
    bulk_tot = bulk.sum(axis=1)
    site_r = np.zeros((N, 3, 3))
    for v, w in model.boundary.items():
        a = graph.site_weights[v - 1]
        if a == 0.0:
            continue
        m = a * np.array(w.entries, dtype=np.float64)
        np.fill_diagonal(m, 0.0)
        site_r[v - 1] = m
    site_tot = site_r.sum(axis=2)
    # incidence lists in CSR form
    counts = np.zeros(N, dtype=np.int64)
    for e in range(E):
        counts[ex[e]] += 1
        counts[ey[e]] += 1
    vptr = np.zeros(N + 1, dtype=np.int64)
    np.cumsum(counts, out=vptr[1:])
    vedges = np.zeros(vptr[-1], dtype=np.int64)
    fill = vptr[:-1].copy()
    for e in range(E):
        for v in (ex[e], ey[e]):
            vedges[fill[v]] = e
            fill[v] += 1
    return ex, ey, ew, bulk, bulk_tot, site_r, site_tot, vptr, vedges


@njit(cache=True, nogil=True)
def _flush_site(occ, last_site, x, species, t_now, burn_in, t_end,
                batch_len, n_batches):
    a = last_site[x]
    if a < burn_in:
        a = burn_in
    b = t_now
    if b > t_end:
        b = t_end
    while a < b:
        bi = int((a - burn_in) / batch_len)
        if bi >= n_batches:
            bi = n_batches - 1
        seg = burn_in + (bi + 1) * batch_len
        if seg > b or bi == n_batches - 1:
            seg = b
        if seg <= a:
            seg = b
        occ[bi, x, species] += seg - a
        a = seg
    last_site[x] = t_now


@njit(cache=True, nogil=True)
def _flush_edge(corr, last_edge, e, gx, gy, t_now, burn_in, t_end):
    a = last_edge[e]
    if a < burn_in:
        a = burn_in
    b = t_now
    if b > t_end:
        b = t_end
    if b > a:
        corr[e, gx, gy] += b - a
    last_edge[e] = t_now


@njit(cache=True, nogil=True)
def _gillespie(eta, ex, ey, ew, bulk, bulk_tot, site_r, site_tot,
               vptr, vedges, burn_in, t_end, n_batches, batch_len,
               occ, corr, cross, cross_b, rg, audit_every):
    N = eta.shape[0]
    E = ex.shape[0]
    r_edge = np.zeros(E)
    for e in range(E):
        r_edge[e] = ew[e] * bulk_tot[3 * eta[ex[e]] + eta[ey[e]]]
    r_site = np.zeros(N)
    for v in range(N):
        r_site[v] = site_tot[v, eta[v]]
    total = r_edge.sum() + r_site.sum()
    last_site = np.zeros(N)
    last_edge = np.zeros(E)
    t = 0.0
    events = 0
    audit_max = 0.0
    absorbed = False
    while True:
        if total <= 1e-300:
            absorbed = True
            break
        u = rg.random()
        dt = -np.log1p(-u) / total
        t_new = t + dt
        if t_new >= t_end:
            break
        # linear scan over per-edge aggregated rates; first optimisation
        # target (a partial-sum tree) if chains grow past a few thousand sites
        target = rg.random() * total
        acc = 0.0
        eid = -1
        for e in range(E):
            acc += r_edge[e]
            if target < acc:
                eid = e
                break
        if eid >= 0:
            x = ex[eid]
            y = ey[eid]
            row = 3 * eta[x] + eta[y]
            pick = rg.random() * bulk_tot[row]
            acc2 = 0.0
            col = -1
            for c in range(9):
                if c == row:
                    continue
                if bulk[row, c] <= 0.0:
                    continue
                acc2 += bulk[row, c]
                col = c
                if pick < acc2:
                    break
            a_new = col // 3
            b_new = col % 3
            # crossing bookkeeping: occupancy moved across the bond
            if t_new >= burn_in:
                ox = eta[x] != 0
                oy = eta[y] != 0
                nx = a_new != 0
                ny = b_new != 0
                step = 0
                if ox and not oy and not nx and ny:
                    step = 1
                elif not ox and oy and nx and not ny:
                    step = -1
                if step != 0:
                    cross[eid] += step
                    bi = int((t_new - burn_in) / batch_len)
                    if bi >= n_batches:
                        bi = n_batches - 1
                    cross_b[bi, eid] += step
            _flush_site(occ, last_site, x, eta[x], t_new, burn_in, t_end,
                        batch_len, n_batches)
            _flush_site(occ, last_site, y, eta[y], t_new, burn_in, t_end,
                        batch_len, n_batches)
            for v in (x, y):
                for k in range(vptr[v], vptr[v + 1]):
                    e2 = vedges[k]
                    if last_edge[e2] < t_new:
                        _flush_edge(corr, last_edge, e2, eta[ex[e2]], eta[ey[e2]],
                                    t_new, burn_in, t_end)
            eta[x] = a_new
            eta[y] = b_new
            delta = 0.0
            for v in (x, y):
                for k in range(vptr[v], vptr[v + 1]):
                    e2 = vedges[k]
                    new_r = ew[e2] * bulk_tot[3 * eta[ex[e2]] + eta[ey[e2]]]
                    delta += new_r - r_edge[e2]
                    r_edge[e2] = new_r
                new_s = site_tot[v, eta[v]]
                delta += new_s - r_site[v]
                r_site[v] = new_s
            total += delta
        else:
            # a site event: continue the cumulative scan over vertices
            sid = -1
            for v in range(N):
                acc += r_site[v]
                if target < acc:
                    sid = v
                    break
            if sid < 0:
                sid = N - 1   # float-edge fallback: last active vertex
                while sid > 0 and r_site[sid] <= 0.0:
                    sid -= 1
            g = eta[sid]
            pick = rg.random() * site_tot[sid, g]
            acc2 = 0.0
            a_new = -1
            for c in range(3):
                if c == g:
                    continue
                if site_r[sid, g, c] <= 0.0:
                    continue
                acc2 += site_r[sid, g, c]
                a_new = c
                if pick < acc2:
                    break
            if a_new < 0:
                # float-edge no-op: the scan exhausted an inactive vertex
                t = t_new
                events += 1
                continue
            _flush_site(occ, last_site, sid, g, t_new, burn_in, t_end,
                        batch_len, n_batches)
            for k in range(vptr[sid], vptr[sid + 1]):
                e2 = vedges[k]
                _flush_edge(corr, last_edge, e2, eta[ex[e2]], eta[ey[e2]],
                            t_new, burn_in, t_end)
            eta[sid] = a_new
            delta = site_tot[sid, a_new] - r_site[sid]
            r_site[sid] = site_tot[sid, a_new]
            for k in range(vptr[sid], vptr[sid + 1]):
                e2 = vedges[k]
                new_r = ew[e2] * bulk_tot[3 * eta[ex[e2]] + eta[ey[e2]]]
                delta += new_r - r_edge[e2]
                r_edge[e2] = new_r
            total += delta
        t = t_new
        events += 1
        if audit_every > 0 and events % audit_every == 0:
            scratch = 0.0
            dev = 0.0
            for e in range(E):
                true_r = ew[e] * bulk_tot[3 * eta[ex[e]] + eta[ey[e]]]
                d = abs(true_r - r_edge[e])
                if d > dev:
                    dev = d
                scratch += true_r
            for v in range(N):
                true_s = site_tot[v, eta[v]]
                d = abs(true_s - r_site[v])
                if d > dev:
                    dev = d
                scratch += true_s
            d = abs(scratch - total)
            if d > dev:
                dev = d
            if dev > audit_max:
                audit_max = dev
            total = scratch
        elif events % 1_048_576 == 0:
            # tame float drift of the incrementally maintained total
            scratch = 0.0
            for e in range(E):
                scratch += r_edge[e]
            for v in range(N):
                scratch += r_site[v]
            total = scratch
    # final flush up to the end of the window
    for v in range(N):
        _flush_site(occ, last_site, v, eta[v], t_end, burn_in, t_end,
                    batch_len, n_batches)
    for e in range(E):
        _flush_edge(corr, last_edge, e, eta[ex[e]], eta[ey[e]], t_end,
                    burn_in, t_end)
    return events, absorbed, audit_max


def _debug_audit_interval() -> int:
    return AUDIT_INTERVAL if os.environ.get("UPHILL_DEBUG_CHECKS") == "1" else 0


def run(model: ProcessModel, eta0: Configuration, cfg: SimConfig,
        _rng: np.random.Generator | None = None) -> SimStats:
    """Simulate one trajectory and return time-averaged statistics.

    The chain is simulated exactly over [0, burn_in + sample_time];
    observables are accumulated with time weights over the sampling window.
    If every rate vanishes the state is absorbing: remaining time is spent
    in place and the stats carry ``absorbed=True``.
    """
    if len(eta0) != model.graph.vertex_count:
        raise ValueError("initial configuration length does not match the graph")
    arrays = compile_model(model)
    ex, ey, ew, bulk, bulk_tot, site_r, site_tot, vptr, vedges = arrays
    n_batches = cfg.n_batches
    batch_len = cfg.sample_time / n_batches
    N = model.graph.vertex_count
    E = len(model.graph.edges)
    occ = np.zeros((n_batches, N, 3))
    corr = np.zeros((E, 3, 3))
    cross = np.zeros(E, dtype=np.int64)
    cross_b = np.zeros((n_batches, E), dtype=np.int64)
    rg = _rng if _rng is not None else np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    eta = eta0.as_array().copy()
    t_end = cfg.burn_in_time + cfg.sample_time
    events, absorbed, audit_max = _gillespie(
        eta, ex, ey, ew, bulk, bulk_tot, site_r, site_tot, vptr, vedges,
        cfg.burn_in_time, t_end, n_batches, batch_len, occ, corr, cross,
        cross_b, rg, _debug_audit_interval())
    if audit_max > AUDIT_TOL:
        raise AssertionError(f"rate bookkeeping drifted by {audit_max:.3e}")
    mu = occ.sum(axis=0) / cfg.sample_time
    batch_means = occ / batch_len
    stderr = batch_means.std(axis=0, ddof=1) / np.sqrt(n_batches)
    rates_b = cross_b / batch_len
    return SimStats(
        mu=mu, stderr=stderr, pair_corr=corr / cfg.sample_time,
        crossings=cross, current=cross / cfg.sample_time,
        current_stderr=rates_b.std(axis=0, ddof=1) / np.sqrt(n_batches),
        elapsed_process_time=t_end, event_count=int(events), absorbed=absorbed)


def replica_seeds(seed: int, replicas: int):
    """Deterministic replica seed states (SeedSequence spawning)."""
    return np.random.SeedSequence(seed).spawn(replicas)


def run_ensemble(model: ProcessModel, eta0: Configuration, cfg: SimConfig) -> SimStats:
    """Run independent replicas and merge their statistics.

    Replica streams derive from cfg.seed by SeedSequence spawning; the merge
    averages replica means and reports the standard error across replicas
    (falling back to batch-means errors for a single replica).  Replicas run
    on a thread pool; cap the width with UPHILL_THREADS.
    """
    if cfg.replicas == 1:
        return run(model, eta0, cfg)
    seeds = replica_seeds(cfg.seed, cfg.replicas)
    jobs = [(np.random.Generator(np.random.PCG64(s))) for s in seeds]
    max_workers = min(cfg.replicas, os.cpu_count() or 1)
    env_cap = os.environ.get("UPHILL_THREADS")
    if env_cap:
        max_workers = max(1, min(max_workers, int(env_cap)))
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        stats = list(pool.map(lambda rg: run(model, eta0, cfg, _rng=rg), jobs))
    R = cfg.replicas
    mu = np.mean([s.mu for s in stats], axis=0)
    stderr = np.std([s.mu for s in stats], axis=0, ddof=1) / np.sqrt(R)
    current = np.mean([s.current for s in stats], axis=0)
    cur_err = np.std([s.current for s in stats], axis=0, ddof=1) / np.sqrt(R)
    return SimStats(
        mu=mu, stderr=stderr,
        pair_corr=np.mean([s.pair_corr for s in stats], axis=0),
        crossings=np.sum([s.crossings for s in stats], axis=0),
        current=current, current_stderr=cur_err,
        elapsed_process_time=sum(s.elapsed_process_time for s in stats),
        event_count=sum(s.event_count for s in stats),
        absorbed=any(s.absorbed for s in stats), replicas=R)


def initial_configuration(model: ProcessModel, seed: int,
                          densities=None) -> Configuration:
    """Default initial state with independent sites.

    With ``densities=(p1, p2)`` every site draws species 1/2 with those
    probabilities (e.g. the mean of the two reservoir densities).  Without
    them the per-site law linearly interpolates the boundary matrices'
    single-site equilibria, which is derivable from the model alone.
    """
    N = model.graph.vertex_count
    if densities is not None:
        p1, p2 = densities
        rg = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        draws = rg.random(N)
        occ = np.where(draws < p1, 1, np.where(draws < p1 + p2, 2, 0))
        return Configuration(tuple(int(v) for v in occ))
    dists = {}
    for v, w in model.boundary.items():
        W = np.array(w.entries)
        A = np.vstack([W.T, np.ones(3)])
        b = np.zeros(4)
        b[-1] = 1.0
        pi, *_ = np.linalg.lstsq(A, b, rcond=None)
        dists[v] = np.clip(pi, 0.0, None)
    left = dists.get(1, np.array([1.0, 0.0, 0.0]))
    right = dists.get(N, left)
    rg = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    occ = []
    for z in range(N):
        lam = 0.5 if N == 1 else z / (N - 1)
        p = (1 - lam) * left + lam * right
        p = p / p.sum()
        occ.append(int(rg.choice(3, p=p)))
    return Configuration(tuple(occ))


def fick_current(mu, sigma: np.ndarray) -> np.ndarray:
    """Per-bond species currents from discrete density gradients.

    J^(a)_{z+1/2} = -sigma_a1 (mu1_{z+1}-mu1_z) - sigma_a2 (mu2_{z+1}-mu2_z),
    in lattice units (multiply by N+1 to compare with continuum currents).
    """
    mu = np.asarray(mu, dtype=float)
    if mu.ndim != 2:
        raise ValueError("mu must be 2-dimensional")
    species = mu[:, 1:3] if mu.shape[1] == 3 else mu
    grad = np.diff(species, axis=0)
    return -grad @ np.asarray(sigma, dtype=float).T


def total_current(stats: SimStats) -> np.ndarray:
    """Net occupancy flux per bond: signed crossings over the sample window."""
    return stats.current


def empirical_pair_distribution(stats: SimStats, bond: int = 0) -> np.ndarray:
    """Joint occupation distribution of one bond's two sites (9 entries)."""
    return stats.pair_corr[bond].reshape(9)
