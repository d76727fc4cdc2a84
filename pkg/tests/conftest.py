"""Shared parameter-draw helpers for randomized tests."""
from __future__ import annotations

import numpy as np
import pytest

from uphill.rates import MacroParams


def draw_densities(rng):
    r1 = rng.uniform(0.0, 0.95)
    r2 = rng.uniform(0.0, 0.95 - r1)
    return r1, r2


def draw_valid_params(rng, with_densities=True, symmetric=False) -> MacroParams:
    """A parameter tuple satisfying every construction condition."""
    while True:
        s11 = rng.uniform(0.05, 2.0)
        if symmetric:
            s12 = s21 = rng.uniform(0.0, 1.0)
            s22 = s11
        else:
            s12 = rng.uniform(0.0, 1.0)
            s21 = rng.uniform(0.0, 1.0)
            s22 = s11 + s21 - s12
            if s22 < 0.05:
                continue
        if s11 * s22 <= s12 * s21 + 1e-12:
            continue
        if symmetric:
            h = m = rng.uniform(0.0, 0.5)
        else:
            h = rng.uniform(0.0, 0.5)
            m = rng.uniform(0.0, 0.5)
        need = max(2 * s21 + h, 2 * s12 + m, s12 + s21 + h, s12 + s21 + m)
        upsilon = need + rng.uniform(0.01, 2.0)
        rL1, rL2 = draw_densities(rng) if with_densities else (0.0, 0.0)
        rR1, rR2 = draw_densities(rng) if with_densities else (0.0, 0.0)
        return MacroParams(sigma11=s11, sigma12=s12, sigma21=s21, sigma22=s22,
                           upsilon=upsilon, h=h, m=m,
                           rhoL1=rL1, rhoL2=rL2, rhoR1=rR1, rhoR2=rR2)


def draw_raw_params(rng) -> MacroParams:
    """Unconstrained draw: entries in [0, 2], densities valid; the row-sum
    equality fails almost surely."""
    s = rng.uniform(0.0, 2.0, size=7)
    rL1, rL2 = draw_densities(rng)
    rR1, rR2 = draw_densities(rng)
    return MacroParams(sigma11=s[0], sigma12=s[1], sigma21=s[2], sigma22=s[3],
                       upsilon=s[4], h=s[5], m=s[6],
                       rhoL1=rL1, rhoL2=rL2, rhoR1=rR1, rhoR2=rR2)


def draw_equality_params(rng) -> MacroParams:
    """Row-sum equality holds; the inequality conditions may or may not."""
    while True:
        s11 = rng.uniform(0.0, 2.0)
        s12 = rng.uniform(0.0, 2.0)
        s21 = rng.uniform(0.0, 2.0)
        s22 = s11 + s21 - s12
        if s22 >= 0.0:
            break
    rL1, rL2 = draw_densities(rng)
    rR1, rR2 = draw_densities(rng)
    return MacroParams(sigma11=s11, sigma12=s12, sigma21=s21, sigma22=s22,
                       upsilon=rng.uniform(0.0, 2.0), h=rng.uniform(0.0, 2.0),
                       m=rng.uniform(0.0, 2.0),
                       rhoL1=rL1, rhoL2=rL2, rhoR1=rR1, rhoR2=rR2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)
