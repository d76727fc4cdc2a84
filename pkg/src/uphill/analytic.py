"""Deterministic counterparts: discrete mean ODE system, continuum
stationary profiles and currents, uphill classification.

The mean occupations of a matched chain follow a linear finite-difference
reaction-diffusion system with ghost densities at the reservoirs.  Its
continuum stationary solution is available in closed form; the currents it
carries decide local/global uphill behaviour.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .rates import DET_TOL, MacroParams

BVP_TOL = 1e-10


@dataclass(frozen=True)
class BoundaryDensities:
    rhoL1: float
    rhoL2: float
    rhoR1: float
    rhoR2: float

    def __post_init__(self):
        for name in ("rhoL1", "rhoL2", "rhoR1", "rhoR2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.rhoL1 + self.rhoL2 > 1.0 or self.rhoR1 + self.rhoR2 > 1.0:
            raise ValueError("reservoir densities must sum to at most 1 per side")

    @classmethod
    def from_params(cls, params: MacroParams) -> "BoundaryDensities":
        return cls(params.rhoL1, params.rhoL2, params.rhoR1, params.rhoR2)

    def as_tuple(self):
        return (self.rhoL1, self.rhoL2, self.rhoR1, self.rhoR2)


def _sigma_and_upsilon(params):
    return (params.sigma11, params.sigma12, params.sigma21, params.sigma22,
            params.upsilon)


# ---------------------------------------------------------------------------
# Discrete system


def rd_system(params: MacroParams, n_sites: int):
    """Linear system d rho/dt = M rho + r for the chain mean equations.

    State ordering: rho = (rho_1^(1), rho_1^(2), ..., rho_N^(1), rho_N^(2)).
    Reservoir densities enter the affine part r through the ghost terms.
    """
    if n_sites < 2:
        raise ValueError("need at least 2 sites")
    s11, s12, s21, s22, U = _sigma_and_upsilon(params)
    S = np.array([[s11, s12], [s21, s22]])
    K = U * np.array([[-1.0, 1.0], [1.0, -1.0]])
    N = n_sites
    M = np.zeros((2 * N, 2 * N))
    r = np.zeros(2 * N)
    for z in range(N):
        i = 2 * z
        M[i:i + 2, i:i + 2] += -2.0 * S + K
        if z > 0:
            M[i:i + 2, i - 2:i] += S
        else:
            r[i:i + 2] += S @ np.array([params.rhoL1, params.rhoL2])
        if z < N - 1:
            M[i:i + 2, i + 2:i + 4] += S
        else:
            r[i:i + 2] += S @ np.array([params.rhoR1, params.rhoR2])
    return M, r


def ode_rhs(params: MacroParams, rho: np.ndarray) -> np.ndarray:
    """Finite-difference reaction-diffusion right-hand side, shape (N, 2)."""
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 2 or rho.shape[1] != 2:
        raise ValueError("rho must have shape (N, 2)")
    M, r = rd_system(params, rho.shape[0])
    flat = rho.reshape(-1)
    return (M @ flat + r).reshape(rho.shape)


def stationary_discrete(params: MacroParams, n_sites: int) -> np.ndarray:
    """Stationary mean profile of the discrete system, shape (N, 2)."""
    M, r = rd_system(params, n_sites)
    rho = np.linalg.solve(M, -r)
    resid = np.abs(M @ rho + r).max()
    if resid > BVP_TOL:
        raise ArithmeticError(f"stationary solve residual {resid:.2e} too large")
    return rho.reshape(n_sites, 2)


def max_stable_dt(params: MacroParams, n_sites: int) -> float:
    """Step-size bound enforced by :func:`integrate`."""
    s_max = max(params.sigma11, params.sigma12, params.sigma21, params.sigma22)
    bound = 0.1 / (s_max * n_sites ** 2) if s_max > 0 else np.inf
    # the advertised bound does not cover reaction-dominated spectra
    stiff = 4.0 * s_max + 2.0 * params.upsilon + 2.0 * (params.sigma11 + params.sigma21)
    if stiff > 0:
        bound = min(bound, 1.0 / stiff)
    return bound


def integrate(params: MacroParams, rho0: np.ndarray, t_end: float, dt: float):
    """Classical fourth-order Runge-Kutta trajectory of the discrete system.

    Returns (times, states) with states of shape (steps+1, N, 2).  Refuses a
    step size above :func:`max_stable_dt`.
    """
    rho0 = np.asarray(rho0, dtype=float)
    if dt <= 0:
        raise ValueError("dt must be positive")
    N = rho0.shape[0]
    dt_max = max_stable_dt(params, N)
    if dt > dt_max:
        raise ValueError(f"dt={dt:g} unstable for N={N}; use dt <= {dt_max:g}")
    M, r = rd_system(params, N)
    steps = int(np.ceil(t_end / dt - 1e-12)) if t_end > 0 else 0
    y = rho0.reshape(-1).copy()
    out = np.empty((steps + 1, y.size))
    out[0] = y
    times = np.empty(steps + 1)
    times[0] = 0.0
    t = 0.0
    for k in range(steps):
        step = min(dt, t_end - t)
        k1 = M @ y + r
        k2 = M @ (y + 0.5 * step * k1) + r
        k3 = M @ (y + 0.5 * step * k2) + r
        k4 = M @ (y + step * k3) + r
        y = y + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += step
        out[k + 1] = y
        times[k + 1] = t
    return times, out.reshape(steps + 1, N, 2)


# ---------------------------------------------------------------------------
# Continuum stationary solution


@dataclass(frozen=True)
class StationarySolution:
    """Stationary continuum profiles and currents on [0, 1].

    rho2 carries the pure two-exponential part; rho1 carries it scaled by
    A/B.  With the row-sum equality A + B = 0, so the total density is
    affine and the total current constant.  The exponentials are evaluated
    as boundary layers C e^{-kx} + D# e^{-k(1-x)} (D# = D e^k), which stays
    finite for arbitrarily stiff decay rates.
    """
    A: float
    B: float
    C: float
    D: float
    E: float
    F: float
    sigma: tuple         # ((s11, s12), (s21, s22))
    D_layer: float = 0.0   # D e^k, the right-boundary-layer amplitude

    @property
    def decay_rate(self) -> float:
        return float(np.sqrt(self.A - self.B))

    def _exp_parts(self, x):
        k = self.decay_rate
        x = np.asarray(x, dtype=float)
        return self.C * np.exp(-k * x), self.D_layer * np.exp(-k * (1.0 - x))

    def rho1(self, x):
        lo, hi = self._exp_parts(x)
        q = self.A / self.B if self.B != 0 else 0.0
        return self.E + self.F * np.asarray(x, dtype=float) + q * (lo + hi)

    def rho2(self, x):
        lo, hi = self._exp_parts(x)
        return self.E + self.F * np.asarray(x, dtype=float) + lo + hi

    def _gradients(self, x):
        k = self.decay_rate
        lo, hi = self._exp_parts(x)
        osc = k * (hi - lo)
        q = self.A / self.B if self.B != 0 else 0.0
        return self.F + q * osc, self.F + osc

    def second_derivatives(self, x):
        k = self.decay_rate
        lo, hi = self._exp_parts(x)
        osc = k * k * (lo + hi)
        q = self.A / self.B if self.B != 0 else 0.0
        return q * osc, osc

    def J1(self, x):
        d1, d2 = self._gradients(x)
        (s11, s12), _ = self.sigma
        return -s11 * d1 - s12 * d2

    def J2(self, x):
        d1, d2 = self._gradients(x)
        _, (s21, s22) = self.sigma
        return -s21 * d1 - s22 * d2

    def total_current(self, x):
        return self.J1(x) + self.J2(x)

    def sample(self, n_points: int = 201) -> np.ndarray:
        """Columns: x, rho1, rho2, J1, J2."""
        x = np.linspace(0.0, 1.0, n_points)
        return np.column_stack([x, self.rho1(x), self.rho2(x),
                                self.J1(x), self.J2(x)])


@dataclass(frozen=True)
class _LinearSolution(StationarySolution):
    """Degenerate reaction-free branch: two independent linear profiles."""
    bc: tuple = (0.0, 0.0, 0.0, 0.0)

    def rho1(self, x):
        rL1, _, rR1, _ = self.bc
        return rL1 + (rR1 - rL1) * np.asarray(x, dtype=float)

    def rho2(self, x):
        _, rL2, _, rR2 = self.bc
        return rL2 + (rR2 - rL2) * np.asarray(x, dtype=float)

    def _gradients(self, x):
        rL1, rL2, rR1, rR2 = self.bc
        shape = np.shape(np.asarray(x, dtype=float))
        return np.full(shape, rR1 - rL1), np.full(shape, rR2 - rL2)

    def second_derivatives(self, x):
        shape = np.shape(np.asarray(x, dtype=float))
        return np.zeros(shape), np.zeros(shape)


def stationary_continuum(params: MacroParams, bc: BoundaryDensities | None = None
                         ) -> StationarySolution:
    """Closed-form stationary solution of the coupled stationary equations.

    Requires a nonsingular diffusivity matrix.  A vanishing reaction rate is
    admitted only in the decoupled (diagonal) case, where the profiles are
    straight lines; with cross terms and no reaction no valid process exists.
    """
    if bc is None:
        bc = BoundaryDensities.from_params(params)
    s11, s12, s21, s22, U = _sigma_and_upsilon(params)
    det = s11 * s22 - s12 * s21
    if det <= DET_TOL:
        raise ValueError(f"diffusivity matrix is (near-)singular: det={det:g}")
    rL1, rL2, rR1, rR2 = bc.as_tuple()
    sigma = ((s11, s12), (s21, s22))
    if U == 0.0:
        if s12 != 0.0 or s21 != 0.0:
            raise ValueError("no reaction with cross-diffusion admits no valid process")
        return _LinearSolution(A=0.0, B=0.0, C=0.0, D=0.0,
                               E=rL1, F=rR1 - rL1, sigma=sigma, bc=bc.as_tuple())
    A = U * (s12 + s22) / det
    B = -U * (s11 + s21) / det
    k = np.sqrt(A - B)
    em1, em2 = np.exp(-k), np.exp(-2.0 * k)
    E = (A * rL2 - B * rL1) / (A - B)
    F = -(A * rL2 - A * rR2 - B * rL1 + B * rR1) / (A - B)
    # boundary-layer amplitudes: the displayed constants with numerator and
    # denominator divided by e^{2k} where needed, so only e^{-k} appears
    C = B * ((rL1 - rL2) - em1 * (rR1 - rR2)) / ((A - B) * (1.0 - em2))
    D_layer = B * ((rR1 - rR2) - em1 * (rL1 - rL2)) / ((A - B) * (1.0 - em2))
    return StationarySolution(A=A, B=B, C=C, D=D_layer * em1, E=E, F=F,
                              sigma=sigma, D_layer=D_layer)


def weak_coupling_solution(sigma11: float, upsilon: float, bc: BoundaryDensities
                           ) -> StationarySolution:
    """Diagonal-diffusivity branch with equal diffusivities.

    Specialises the closed form to sigma12 = sigma21 = 0, sigma22 = sigma11;
    the decay rate reduces to sqrt(2) * k with k^2 = upsilon / sigma11.
    """
    if sigma11 <= 0 or upsilon <= 0:
        raise ValueError("weak-coupling branch needs sigma11 > 0 and upsilon > 0")
    params = MacroParams(sigma11=sigma11, sigma12=0.0, sigma21=0.0,
                         sigma22=sigma11, upsilon=upsilon)
    return stationary_continuum(params, bc)


def _extremum(fun, sign: float, step: float = 1e-4, xtol: float = 1e-10):
    """Location and value of the minimum of sign*fun on [0, 1]."""
    xs = np.arange(0.0, 1.0 + 0.5 * step, step)
    xs[-1] = 1.0
    vals = sign * fun(xs)
    i = int(np.argmin(vals))
    if 0 < i < len(xs) - 1:
        try:
            res = minimize_scalar(lambda x: float(sign * fun(x)), method="golden",
                                  bracket=(xs[i - 1], xs[i], xs[i + 1]),
                                  options={"xtol": xtol})
        except ValueError:   # flat bracket, grid point already optimal
            res = None
        if res is not None and res.fun <= vals[i]:
            return float(res.x), float(sign * res.fun)
    return float(xs[i]), float(sign * vals[i])


@dataclass(frozen=True)
class UphillVerdict:
    """Uphill classification of a stationary solution."""
    global_uphill: str | None      # None, 'left' or 'right' (flow direction)
    local1: bool
    local2: bool
    min_J1: tuple                  # (x*, value)
    min_J2: tuple
    max_J1: tuple
    max_J2: tuple

    def to_json(self) -> dict:
        return {"global": self.global_uphill, "local1": self.local1,
                "local2": self.local2,
                "min_J1": list(self.min_J1), "min_J2": list(self.min_J2),
                "max_J1": list(self.max_J1), "max_J2": list(self.max_J2)}


def classify_uphill(sol: StationarySolution, bc: BoundaryDensities) -> UphillVerdict:
    """Global and per-species uphill verdicts.

    A species runs uphill when its current everywhere opposes its own
    boundary-density gap; the total mass runs uphill when the constant total
    current points from the lower-total-density reservoir to the higher one.
    """
    rL1, rL2, rR1, rR2 = bc.as_tuple()
    mins = {}
    maxs = {}
    for name, fun in (("J1", sol.J1), ("J2", sol.J2)):
        mins[name] = _extremum(fun, 1.0)
        maxs[name] = _extremum(fun, -1.0)

    def local_verdict(gap, jmin, jmax):
        if gap < 0.0:   # density increases to the right
            return jmin[1] > 0.0
        if gap > 0.0:
            return jmax[1] < 0.0
        return False

    local1 = local_verdict(rL1 - rR1, mins["J1"], maxs["J1"])
    local2 = local_verdict(rL2 - rR2, mins["J2"], maxs["J2"])

    total_gap = (rL1 + rL2) - (rR1 + rR2)
    tot = lambda x: sol.total_current(x)
    tmin = _extremum(tot, 1.0)
    tmax = _extremum(tot, -1.0)
    global_uphill = None
    if total_gap < 0.0 and tmin[1] > 0.0:
        global_uphill = "right"
    elif total_gap > 0.0 and tmax[1] < 0.0:
        global_uphill = "left"
    return UphillVerdict(global_uphill=global_uphill, local1=local1, local2=local2,
                         min_J1=mins["J1"], min_J2=mins["J2"],
                         max_J1=maxs["J1"], max_J2=maxs["J2"])
