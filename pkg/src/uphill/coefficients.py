"""Coefficient extraction and mean-occupation evolution.

Applying the edge generator to a single-site occupation indicator yields an
affine expression in neighbour indicators: a zero-order part (A terms),
first-order parts (B, C, F terms) and second-order parts (G terms) whose
coefficients are short sums of transition rates.  The site generator
contributes A and F terms only.  These coefficients determine the evolution
of the mean occupations, which closes whenever all G terms vanish.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .model import EdgeRateMatrix, ProcessModel, SiteRateMatrix

MATCH_TOL = 1e-12


@dataclass(frozen=True)
class CoefficientSet:
    """Edge-generator coefficients, indexed by species 1..n (stored 0-based)."""
    n: int
    A1: np.ndarray          # (n,)   zero-order, watched site on the left slot
    A2: np.ndarray          # (n,)   zero-order, watched site on the right slot
    B1: np.ndarray          # (n,n)  first-order in the watched (left) site
    C2: np.ndarray          # (n,n)  first-order in the watched (right) site
    F_plus: np.ndarray      # (n,n)  first-order in the right neighbour
    F_minus: np.ndarray     # (n,n)  first-order in the left neighbour
    G_plus: np.ndarray      # (n,n,n) second-order, watched site on the left
    G_minus: np.ndarray     # (n,n,n) second-order, watched site on the right

    @property
    def E(self) -> np.ndarray:
        """Combined zero-order term A1 + A2."""
        return self.A1 + self.A2

    @property
    def F0(self) -> np.ndarray:
        """Combined on-site first-order term B1 + C2."""
        return self.B1 + self.C2

    def max_abs_G(self) -> float:
        return float(max(np.abs(self.G_plus).max(), np.abs(self.G_minus).max()))


@dataclass(frozen=True)
class SiteCoefficientSet:
    """Site-generator coefficients: creation term A and linear term F."""
    n: int
    A: np.ndarray   # (n,)
    F: np.ndarray   # (n,n)


def extract_edge_coefficients(gamma: EdgeRateMatrix) -> CoefficientSet:
    """Extract the A/B/C/F/G families from an edge rate table (any n >= 1)."""
    n = gamma.n
    P = n + 1
    G = gamma.entries

    def g(a, b, c, d):
        return G[a * P + b, c * P + d]

    def row_sum_first(a, b, k):
        # sum_beta Gamma_{ab}^{k beta}, skipping the diagonal entry
        return sum(g(a, b, k, bb) for bb in range(P) if (k, bb) != (a, b))

    def row_sum_second(a, b, k):
        # sum_beta Gamma_{ab}^{beta k}, skipping the diagonal entry
        return sum(g(a, b, bb, k) for bb in range(P) if (bb, k) != (a, b))

    # Diagonal entries never fall inside these sums for the index patterns used
    # below, but the guard keeps the helpers honest for arbitrary (a, b, k).
    A1 = np.array([row_sum_first(0, 0, z) for z in range(1, n + 1)])
    A2 = np.array([row_sum_second(0, 0, z) for z in range(1, n + 1)])
    B1 = np.zeros((n, n))
    C2 = np.zeros((n, n))
    Fp = np.zeros((n, n))
    Fm = np.zeros((n, n))
    Gp = np.zeros((n, n, n))
    Gm = np.zeros((n, n, n))
    for z in range(1, n + 1):
        for gam in range(1, n + 1):
            if z != gam:
                B1[z - 1, gam - 1] = row_sum_first(gam, 0, z) - A1[z - 1]
            else:
                B1[z - 1, gam - 1] = -(
                    sum(row_sum_first(z, 0, zp) for zp in range(P) if zp != z)
                    + A1[z - 1])
            Fm[z - 1, gam - 1] = row_sum_second(gam, 0, z) - A2[z - 1]
        for dlt in range(1, n + 1):
            if z != dlt:
                C2[z - 1, dlt - 1] = row_sum_second(0, dlt, z) - A2[z - 1]
            else:
                C2[z - 1, dlt - 1] = -(
                    sum(row_sum_second(0, z, zp) for zp in range(P) if zp != z)
                    + A2[z - 1])
            Fp[z - 1, dlt - 1] = row_sum_first(0, dlt, z) - A1[z - 1]
        # G arrays are stored in the pairing the mean evolution consumes:
        # G_plus[zeta, gamma, delta] multiplies P(neighbour=gamma, site=delta),
        # G_minus[zeta, gamma, delta] multiplies P(site=gamma, neighbour=delta).
        # The defining rate sums run over the pair (site occupant, neighbour
        # occupant) = (own, other), hence the transposed write index.
        for own in range(1, n + 1):
            for other in range(1, n + 1):
                if z != own:
                    gp = (row_sum_first(own, other, z) - row_sum_first(own, 0, z)
                          - row_sum_first(0, other, z) + A1[z - 1])
                else:
                    gp = (
                        -(sum(row_sum_first(z, other, zp) for zp in range(P) if zp != z)
                          + row_sum_first(0, other, z))
                        + (sum(row_sum_first(z, 0, zp) for zp in range(P) if zp != z)
                           + A1[z - 1]))
                Gp[z - 1, other - 1, own - 1] = gp
                if z != own:
                    gm = (row_sum_second(other, own, z) - row_sum_second(other, 0, z)
                          - row_sum_second(0, own, z) + A2[z - 1])
                else:
                    gm = (
                        -(sum(row_sum_second(other, z, zp) for zp in range(P) if zp != z)
                          + row_sum_second(other, 0, z))
                        + (sum(row_sum_second(0, z, zp) for zp in range(P) if zp != z)
                           + A2[z - 1]))
                Gm[z - 1, own - 1, other - 1] = gm
    return CoefficientSet(n=n, A1=A1, A2=A2, B1=B1, C2=C2,
                          F_plus=Fp, F_minus=Fm, G_plus=Gp, G_minus=Gm)


def extract_site_coefficients(w: SiteRateMatrix) -> SiteCoefficientSet:
    """Extract the zero- and first-order site coefficients from W."""
    n = w.n
    W = w.entries
    A = np.array([W[0, z] for z in range(1, n + 1)])
    F = np.zeros((n, n))
    for z in range(1, n + 1):
        for b in range(1, n + 1):
            if z != b:
                F[z - 1, b - 1] = W[b, z] - W[0, z]
            else:
                F[z - 1, b - 1] = -sum(W[z, zp] for zp in range(n + 1) if zp != z) - W[0, z]
    return SiteCoefficientSet(n=n, A=A, F=F)


@dataclass(frozen=True)
class MeanState:
    """Mean occupations (and optional pair correlations) over the graph.

    ``mu[z-1, zeta-1]`` is the mean occupation of species ``zeta`` at vertex
    ``z``.  Correlations are keyed by an ordered vertex pair ``(z, z')`` and
    hold an (n, n) array ``c[zeta-1, zeta'-1]``; the reversed key is looked
    up transposed.
    """
    mu: np.ndarray
    correlations: dict = field(default_factory=dict)

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim != 2:
            raise ValueError("mu must be a (sites, species) array")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    @property
    def n(self) -> int:
        return self.mu.shape[1]

    def corr(self, z1: int, z2: int) -> np.ndarray:
        """Correlation block c_{z1,z2}; zeros if unknown."""
        if (z1, z2) in self.correlations:
            return np.asarray(self.correlations[(z1, z2)], dtype=float)
        if (z2, z1) in self.correlations:
            return np.asarray(self.correlations[(z2, z1)], dtype=float).T
        return np.zeros((self.n, self.n))


def mean_rhs(model: ProcessModel, state: MeanState) -> np.ndarray:
    """Time derivative of the mean occupations under the model's generator.

    Second-order (G) terms use the state's correlations, taken as zero when
    absent; with a closed rate table the result is exact and affine in mu.
    """
    graph = model.graph
    N = graph.vertex_count
    coeff = extract_edge_coefficients(model.bulk)
    n = coeff.n
    mu = state.mu
    if mu.shape != (N, n):
        raise ValueError(f"state has shape {mu.shape}, expected ({N}, {n})")
    out = np.zeros((N, n))
    for (x, y), a_xy in zip(graph.edges, graph.edge_weights):
        mux, muy = mu[x - 1], mu[y - 1]
        c_yx = state.corr(y, x)   # first index at y, second at x
        out[x - 1] += a_xy * (coeff.A1 + coeff.F_plus @ muy + coeff.B1 @ mux
                              + np.einsum("zgd,gd->z", coeff.G_plus, c_yx))
        out[y - 1] += a_xy * (coeff.A2 + coeff.F_minus @ mux + coeff.C2 @ muy
                              + np.einsum("zgd,gd->z", coeff.G_minus, c_yx))
    for v, w in model.boundary.items():
        a_v = graph.site_weights[v - 1]
        sc = extract_site_coefficients(w)
        out[v - 1] += a_v * (sc.A + sc.F @ mu[v - 1])
    return out


@dataclass(frozen=True)
class ClosureReport:
    closed: bool
    max_abs_G: float


def check_closure(gamma: EdgeRateMatrix, tol: float = MATCH_TOL) -> ClosureReport:
    """True iff every second-order coefficient vanishes within ``tol``."""
    coeff = extract_edge_coefficients(gamma)
    m = coeff.max_abs_G()
    return ClosureReport(closed=m <= tol, max_abs_G=m)


@dataclass(frozen=True)
class MatchCondition:
    name: str
    target: float
    computed: float

    @property
    def residual(self) -> float:
        return abs(self.computed - self.target)


@dataclass(frozen=True)
class MatchReport:
    """Residuals of the bulk and boundary coefficient conditions."""
    conditions: tuple
    tol: float = MATCH_TOL

    @property
    def passed(self) -> bool:
        return all(c.residual <= self.tol for c in self.conditions)

    @property
    def max_residual(self) -> float:
        return max(c.residual for c in self.conditions)

    def failures(self) -> list:
        return [c for c in self.conditions if c.residual > self.tol]

    def to_json(self) -> list:
        return [{"condition": c.name, "target": c.target, "computed": c.computed,
                 "residual": c.residual} for c in self.conditions]

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)


def check_matching(model: ProcessModel, params) -> MatchReport:
    """Check that a chain model's coefficients reproduce the target
    discrete reaction-diffusion structure for the given macroscopic params.

    30 bulk conditions (16 closure + 12 discrete-Laplacian + 2 zero-order)
    plus 6 conditions per boundary.
    """
    if not model.graph.is_chain:
        raise ValueError("matching conditions are defined on a chain")
    if model.bulk.n != 2:
        raise ValueError("matching conditions are defined for two species")
    N = model.graph.vertex_count
    s = np.array([[params.sigma11, params.sigma12],
                  [params.sigma21, params.sigma22]])
    U = params.upsilon
    coeff = extract_edge_coefficients(model.bulk)
    conds = []

    def lap_target(z, b):
        return -2.0 * s[z, b] - U if z == b else -2.0 * s[z, b] + U

    for z in range(2):
        for b in range(2):
            conds.append(MatchCondition(f"bulk F_minus[{z+1}{b+1}]", s[z, b],
                                        coeff.F_minus[z, b]))
            conds.append(MatchCondition(f"bulk F_plus[{z+1}{b+1}]", s[z, b],
                                        coeff.F_plus[z, b]))
            conds.append(MatchCondition(f"bulk F_0[{z+1}{b+1}]", lap_target(z, b),
                                        coeff.F0[z, b]))
    for z in range(2):
        for g in range(2):
            for d in range(2):
                conds.append(MatchCondition(f"closure G_plus[{z+1}{g+1}{d+1}]",
                                            0.0, coeff.G_plus[z, g, d]))
                conds.append(MatchCondition(f"closure G_minus[{z+1}{g+1}{d+1}]",
                                            0.0, coeff.G_minus[z, g, d]))
    conds.append(MatchCondition("bulk E[1]", 0.0, coeff.E[0]))
    conds.append(MatchCondition("bulk E[2]", 0.0, coeff.E[1]))

    for side, vertex, rr, first_order in (
            ("left", 1, (params.rhoL1, params.rhoL2), coeff.B1),
            ("right", N, (params.rhoR1, params.rhoR2), coeff.C2)):
        w = model.site_matrix(vertex)
        if w is None:
            raise ValueError(f"chain model lacks a boundary matrix at site {vertex}")
        sc = extract_site_coefficients(w)
        for z in range(2):
            conds.append(MatchCondition(
                f"{side} injection A[{z+1}]",
                s[z, 0] * rr[0] + s[z, 1] * rr[1], sc.A[z]))
            for b in range(2):
                conds.append(MatchCondition(
                    f"{side} F[{z+1}{b+1}]",
                    lap_target(z, b) - first_order[z, b], sc.F[z, b]))
    return MatchReport(conditions=tuple(conds))
