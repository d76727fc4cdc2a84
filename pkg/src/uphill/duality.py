"""Triplet representation, edge operators and self-duality verification.

Sites are one-hot triplets (n0, n1, n2); a bond supports four elementary
moves: stirring S, stirring-with-mutation SM, and single-site mutations LM
(left) and RM (right).  The symmetric one-parameter family is the
superposition s11*S + s12*SM + (U-2*s12-m)*LM + m*RM, and it is self-dual
for the indicator-product duality function, which we verify exhaustively on
small chains.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Configuration, EdgeRateMatrix, mutation_map, pair_index
from .rates import MacroParams, build_bulk

DUALITY_TOL = 1e-12

EDGE_OPERATOR_KINDS = ("S", "SM", "LM", "RM")


def to_triplet(eta: Configuration) -> tuple:
    """One-hot view of a configuration: per site (n0, n1, n2)."""
    out = []
    for v in eta.occupation:
        if v not in (0, 1, 2):
            raise ValueError(f"species label {v} outside 0..2")
        t = [0, 0, 0]
        t[v] = 1
        out.append(tuple(t))
    return tuple(out)


def from_triplet(n: tuple) -> Configuration:
    """Inverse of :func:`to_triplet`."""
    occ = []
    for site in n:
        if tuple(sorted(site)) != (0, 0, 1):
            raise ValueError(f"site {site} is not one-hot")
        occ.append(int(np.argmax(site)))
    return Configuration(tuple(occ))


def duality_value(n: tuple, ell: tuple) -> int:
    """Indicator-product duality function on triplet configurations.

    1 iff every site of ``ell`` that carries a particle is matched by the
    same species in ``n``.
    """
    if len(n) != len(ell):
        raise ValueError("configurations must have equal length")
    for sn, sl in zip(n, ell):
        if (sn[1] < sl[1]) or (sn[2] < sl[2]):
            return 0
    return 1


def _edge_move(kind: str, g: int, d: int) -> tuple:
    if kind == "S":
        return d, g
    if kind == "SM":
        return mutation_map(d), mutation_map(g)
    if kind == "LM":
        return mutation_map(g), d
    if kind == "RM":
        return g, mutation_map(d)
    raise ValueError(f"unknown edge operator kind {kind!r}")


def edge_operator_matrix(kind: str, rate: float = 1.0) -> EdgeRateMatrix:
    """9x9 rate table of one elementary edge operator."""
    G = np.zeros((9, 9))
    for g in range(3):
        for d in range(3):
            a, b = _edge_move(kind, g, d)
            G[pair_index(g, d), pair_index(a, b)] += rate
    return EdgeRateMatrix(n=2, entries=G)


def apply_edge_operator(kind: str, f, n: tuple, bond: int) -> float:
    """Evaluate one unit-rate edge operator on a function of configurations.

    ``bond`` is 1-based: the operator acts on sites (bond, bond+1).
    """
    if not 1 <= bond <= len(n) - 1:
        raise ValueError(f"bond {bond} out of range for {len(n)} sites")
    eta = from_triplet(n)
    g, d = eta[bond], eta[bond + 1]
    a, b = _edge_move(kind, g, d)
    occ = list(eta.occupation)
    occ[bond - 1], occ[bond] = a, b
    moved = to_triplet(Configuration(tuple(occ)))
    return float(f(moved) - f(n))


def _enumerate_triplets(n_sites: int):
    configs = []
    for c in range(3 ** n_sites):
        occ = []
        for _ in range(n_sites):
            occ.append(c % 3)
            c //= 3
        configs.append(to_triplet(Configuration(tuple(occ[::-1]))))
    return configs


def duality_matrix(n_sites: int) -> np.ndarray:
    """D[i, j] over all configuration pairs, base-3 enumeration order."""
    configs = _enumerate_triplets(n_sites)
    S = len(configs)
    D = np.zeros((S, S))
    for i, n in enumerate(configs):
        for j, ell in enumerate(configs):
            D[i, j] = duality_value(n, ell)
    return D


def bulk_chain_generator(n_sites: int, gamma: EdgeRateMatrix) -> np.ndarray:
    """Exact generator of the bulk-only chain on all 3^N configurations."""
    from .exact import full_generator_arrays
    return full_generator_arrays(n_sites, gamma.entries, {})


@dataclass(frozen=True)
class DualityReport:
    n_sites: int
    per_operator: dict       # kind -> max residual of the one-operator identity
    combined: float          # max residual for the weighted family generator

    @property
    def max_residual(self) -> float:
        return max(self.combined, *self.per_operator.values())

    @property
    def passed(self) -> bool:
        return self.max_residual <= DUALITY_TOL


def check_self_duality(params: MacroParams, n_sites: int,
                       exploratory: bool = False) -> DualityReport:
    """Exhaustively verify the two-sided generator identity on a small chain.

    For every configuration pair (n, ell):  (L D(., ell))(n) = (L D(n, .))(ell),
    checked per elementary operator and for the full weighted superposition.
    Proven only for the symmetric family (equal diagonal, equal cross terms,
    h = m); other parameters are refused unless ``exploratory`` is set.
    """
    if n_sites < 2 or 3 ** n_sites > 100_000:
        raise ValueError("exhaustive check is meant for small chains (N in 2..9)")
    if not params.is_symmetric_family and not exploratory:
        raise ValueError("self-duality holds for the symmetric family "
                         "(sigma12 == sigma21, sigma11 == sigma22, h == m); "
                         "pass exploratory=True to probe other parameters")
    D = duality_matrix(n_sites)
    per_op = {}
    for kind in EDGE_OPERATOR_KINDS:
        Q = bulk_chain_generator(n_sites, edge_operator_matrix(kind))
        per_op[kind] = float(np.abs(Q @ D - D @ Q.T).max())
    Q = bulk_chain_generator(n_sites, build_bulk(params, check=False))
    combined = float(np.abs(Q @ D - D @ Q.T).max())
    return DualityReport(n_sites=n_sites, per_operator=per_op, combined=combined)
