"""Exact small-chain tools: full generators and stationary distributions.

Configurations of an N-site chain are enumerated base-3 with site 1 as the
most significant digit, so index([a, b, c]) = 9a + 3b + c.
"""
from __future__ import annotations

import numpy as np

from .model import ProcessModel


def config_index(occupation) -> int:
    idx = 0
    for v in occupation:
        idx = 3 * idx + int(v)
    return idx


def index_config(idx: int, n_sites: int) -> tuple:
    occ = []
    for _ in range(n_sites):
        occ.append(idx % 3)
        idx //= 3
    return tuple(occ[::-1])


def full_generator_arrays(n_sites: int, bulk_entries: np.ndarray,
                          site_entries: dict, edge_weights=None,
                          site_weights=None) -> np.ndarray:
    """Dense generator on 3^n_sites states for a chain model.

    ``site_entries`` maps 1-based vertices to 3x3 rate tables.  Weights
    default to 1 on every bond and listed site.
    """
    S = 3 ** n_sites
    Q = np.zeros((S, S))
    n_bonds = n_sites - 1
    if edge_weights is None:
        edge_weights = np.ones(n_bonds)
    for c in range(S):
        occ = list(index_config(c, n_sites))
        for z in range(n_bonds):
            row = 3 * occ[z] + occ[z + 1]
            w = edge_weights[z]
            if w == 0.0:
                continue
            for a in range(3):
                for b in range(3):
                    col = 3 * a + b
                    if col == row:
                        continue
                    rate = bulk_entries[row, col]
                    if rate == 0.0:
                        continue
                    occ2 = list(occ)
                    occ2[z], occ2[z + 1] = a, b
                    Q[c, config_index(occ2)] += w * rate
        for vertex, W in site_entries.items():
            w = 1.0 if site_weights is None else site_weights[vertex - 1]
            if w == 0.0:
                continue
            g = occ[vertex - 1]
            for a in range(3):
                if a == g:
                    continue
                rate = W[g, a]
                if rate == 0.0:
                    continue
                occ2 = list(occ)
                occ2[vertex - 1] = a
                Q[c, config_index(occ2)] += w * rate
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return Q


def full_generator(model: ProcessModel) -> np.ndarray:
    """Dense generator of a chain ProcessModel (small N only)."""
    if not model.graph.is_chain:
        raise ValueError("full generator helper supports chain graphs")
    n = model.graph.vertex_count
    if 3 ** n > 200_000:
        raise ValueError(f"state space 3^{n} too large for a dense generator")
    sites = {v: w.entries for v, w in model.boundary.items()}
    return full_generator_arrays(n, model.bulk.entries, sites,
                                 edge_weights=np.array(model.graph.edge_weights),
                                 site_weights=np.array(model.graph.site_weights))


def stationary_distribution(Q: np.ndarray) -> np.ndarray:
    """Solve pi Q = 0 with sum(pi) = 1 (least squares on the padded system)."""
    S = Q.shape[0]
    A = np.vstack([Q.T, np.ones(S)])
    b = np.zeros(S + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = np.abs(pi @ Q).max()
    if resid > 1e-9:
        raise ArithmeticError(f"stationary distribution residual {resid:.2e}")
    return pi
