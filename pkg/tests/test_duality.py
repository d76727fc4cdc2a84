from dataclasses import replace
from itertools import product

import numpy as np
import pytest
from scipy.linalg import expm

from uphill.duality import (DualityReport, apply_edge_operator,
                            bulk_chain_generator, check_self_duality,
                            duality_matrix, duality_value, edge_operator_matrix,
                            from_triplet, to_triplet)
from uphill.exact import config_index, index_config
from uphill.model import Configuration, EdgeRateMatrix, pair_index
from uphill.rates import REFERENCE_PARAMS, build_bulk

from conftest import draw_valid_params


def test_triplet_round_trip():
    eta = Configuration((1, 0, 2))
    n = to_triplet(eta)
    assert n == ((0, 1, 0), (1, 0, 0), (0, 0, 1))
    assert from_triplet(n) == eta
    for occ in product(range(3), repeat=3):
        eta = Configuration(occ)
        assert from_triplet(to_triplet(eta)) == eta
    with pytest.raises(ValueError):
        from_triplet(((1, 1, 0),))


def test_duality_value():
    empty = to_triplet(Configuration((0, 0)))
    for occ in product(range(3), repeat=2):
        n = to_triplet(Configuration(occ))
        assert duality_value(n, empty) == 1
        assert duality_value(n, n) == 1
    ell = to_triplet(Configuration((1, 0)))
    assert duality_value(empty, ell) == 0
    with pytest.raises(ValueError):
        duality_value(empty, to_triplet(Configuration((0, 0, 0))))


def test_edge_operator_kills_constants(rng):
    n = to_triplet(Configuration((1, 2, 0)))
    for kind in ("S", "SM", "LM", "RM"):
        assert apply_edge_operator(kind, lambda _: 3.7, n, 1) == 0.0
        assert apply_edge_operator(kind, lambda _: 3.7, n, 2) == 0.0


def test_left_mutation_operator_on_site_function():
    def f(n):
        return float(n[0][1])   # indicator: species 1 at site 1

    n = to_triplet(Configuration((1, 0)))
    flipped = to_triplet(Configuration((2, 0)))
    assert apply_edge_operator("LM", f, n, 1) == f(flipped) - f(n) == -1.0
    n2 = to_triplet(Configuration((0, 2)))
    assert apply_edge_operator("LM", f, n2, 1) == 0.0


def test_operator_superposition_equals_rate_table(rng):
    for _ in range(10):
        p = draw_valid_params(rng, symmetric=True)
        gamma = build_bulk(p)
        weights = {"S": p.sigma11, "SM": p.sigma12,
                   "LM": p.upsilon - 2 * p.sigma12 - p.m, "RM": p.m}
        combined = sum(w * edge_operator_matrix(kind).entries
                       for kind, w in weights.items())
        assert np.abs(combined - gamma.entries).max() <= 1e-12

        # and as applied operators on a random function over 3 sites
        rng2 = np.random.default_rng(1)
        table = rng2.normal(size=27)

        def f(n):
            return float(table[config_index(from_triplet(n).occupation)])

        Q = bulk_chain_generator(3, gamma)
        for c in range(27):
            n = to_triplet(Configuration(index_config(c, 3)))
            total = sum(w * sum(apply_edge_operator(kind, f, n, bond)
                                for bond in (1, 2))
                        for kind, w in weights.items())
            assert abs(total - (Q @ table)[c]) <= 1e-12


def test_self_duality_symmetric_family(rng):
    for n_sites in (2, 3):
        for _ in range(5):
            p = draw_valid_params(rng, symmetric=True)
            report = check_self_duality(p, n_sites)
            assert report.passed
            assert report.max_residual <= 1e-12
            assert set(report.per_operator) == {"S", "SM", "LM", "RM"}


def test_self_duality_detects_broken_symmetry():
    gamma = build_bulk(REFERENCE_PARAMS)
    entries = np.array(gamma.entries)
    entries[pair_index(0, 1), pair_index(1, 0)] = 1.1   # one stirring rate
    broken = EdgeRateMatrix(n=2, entries=entries)
    D = duality_matrix(2)
    Q = bulk_chain_generator(2, broken)
    residual = np.abs(Q @ D - D @ Q.T).max()
    assert residual > 0.05


def test_self_duality_refuses_asymmetric_params():
    p = replace(REFERENCE_PARAMS, h=0.3, upsilon=3.0)
    with pytest.raises(ValueError, match="symmetric"):
        check_self_duality(p, 2)
    report = check_self_duality(p, 2, exploratory=True)
    assert isinstance(report, DualityReport)
    assert report.combined > 0.05   # h != m genuinely breaks the identity


def test_moment_identity_via_matrix_exponential():
    n_sites = 3
    D = duality_matrix(n_sites)
    Q = bulk_chain_generator(n_sites, build_bulk(REFERENCE_PARAMS))
    single_particle = [config_index(occ) for occ in product(range(3), repeat=3)
                       if sum(v != 0 for v in occ) == 1]
    for t in (0.1, 1.0):
        Et = expm(t * Q)
        lhs = Et @ D          # evolve the first argument
        rhs = D @ Et.T        # evolve the second argument
        assert np.abs((lhs - rhs)[:, single_particle]).max() <= 1e-8
        assert np.abs(lhs - rhs).max() <= 1e-8
