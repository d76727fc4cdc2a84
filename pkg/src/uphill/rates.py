"""Macroscopic parameters and explicit rate construction.

Given a diffusivity matrix, a reaction rate and two free parameters (h, m),
this module decides whether a boundary-driven two-species chain with the
linear reaction-diffusion mean structure exists, solves the reduced linear
system in the 36 triple-rate sums, and emits the explicit bulk and boundary
rate matrices of the two-parameter family.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .model import EdgeRateMatrix, Graph, ProcessModel, SiteRateMatrix, pair_index

EQUALITY_TOL = 1e-12
DET_TOL = 1e-14


class InvalidParametersError(ValueError):
    """Raised when a construction is requested for invalid parameters."""

    def __init__(self, verdict):
        self.verdict = verdict
        names = ", ".join(v.name for v in verdict.violations)
        super().__init__(f"invalid macroscopic parameters: {names}")


@dataclass(frozen=True)
class MacroParams:
    """Diffusivity matrix entries, reaction rate, free parameters and
    reservoir densities."""
    sigma11: float
    sigma12: float
    sigma21: float
    sigma22: float
    upsilon: float
    h: float = 0.0
    m: float = 0.0
    rhoL1: float = 0.0
    rhoL2: float = 0.0
    rhoR1: float = 0.0
    rhoR2: float = 0.0

    @property
    def sigma(self) -> np.ndarray:
        return np.array([[self.sigma11, self.sigma12],
                         [self.sigma21, self.sigma22]])

    @property
    def is_symmetric_family(self) -> bool:
        return (self.sigma12 == self.sigma21 and self.sigma11 == self.sigma22
                and self.h == self.m)

    def to_json(self) -> dict:
        return {"sigma11": self.sigma11, "sigma12": self.sigma12,
                "sigma21": self.sigma21, "sigma22": self.sigma22,
                "upsilon": self.upsilon, "h": self.h, "m": self.m,
                "rhoL1": self.rhoL1, "rhoL2": self.rhoL2,
                "rhoR1": self.rhoR1, "rhoR2": self.rhoR2}

    @classmethod
    def from_json(cls, doc: dict) -> "MacroParams":
        required = ["sigma11", "sigma12", "sigma21", "sigma22", "upsilon",
                    "rhoL1", "rhoL2", "rhoR1", "rhoR2"]
        missing = [k for k in required if k not in doc]
        if missing:
            raise KeyError(f"missing parameter fields: {', '.join(missing)}")
        return cls(**{k: float(doc[k]) for k in required},
                   h=float(doc.get("h", 0.0)), m=float(doc.get("m", 0.0)))


REFERENCE_PARAMS = MacroParams(sigma11=1.0, sigma12=0.5, sigma21=0.5,
                               sigma22=1.0, upsilon=1.0)


@dataclass(frozen=True)
class Violation:
    name: str
    margin: float   # >= 0 means satisfied; the amount by which it fails if < 0

    def __post_init__(self):
        object.__setattr__(self, "margin", float(self.margin))


@dataclass(frozen=True)
class ValidityVerdict:
    valid: bool
    violations: tuple
    margins: tuple   # every checked condition, satisfied or not

    def margin(self, name: str) -> float:
        for v in self.margins:
            if v.name == name:
                return v.margin
        raise KeyError(name)

    @property
    def theorem_conditions_ok(self) -> bool:
        """Parameter nonnegativity, the row-sum equality and the two rate
        inequalities: exactly the conditions equivalent to a nonnegative
        triple-sum vector."""
        return not any(v.name.startswith(("nonneg", "equality", "bound"))
                       for v in self.violations)

    def to_json(self) -> dict:
        return {"valid": self.valid,
                "conditions": [{"name": v.name, "margin": v.margin,
                                "satisfied": v.margin >= 0.0}
                               for v in self.margins]}


def validate(params: MacroParams, equality_tol: float = EQUALITY_TOL) -> ValidityVerdict:
    """Check all conditions for the explicit construction to exist.

    The margins of the rate-bound conditions are the same floating-point
    expressions that appear as entries of the built matrices, so a failed
    bound is exactly a negative matrix entry.
    """
    p = params
    checks = [
        Violation("nonneg sigma11", p.sigma11),
        Violation("nonneg sigma12", p.sigma12),
        Violation("nonneg sigma21", p.sigma21),
        Violation("nonneg sigma22", p.sigma22),
        Violation("nonneg upsilon", p.upsilon),
        Violation("nonneg h", p.h),
        Violation("nonneg m", p.m),
        Violation("equality s11+s21 == s12+s22",
                  equality_tol - abs(p.sigma11 + p.sigma21 - p.sigma12 - p.sigma22)),
        Violation("bound 2*s21+h <= upsilon", p.upsilon - 2.0 * p.sigma21 - p.h),
        Violation("bound 2*s12+m <= upsilon", p.upsilon - 2.0 * p.sigma12 - p.m),
        # cross-entry conditions of the explicit max-zeros table; the
        # triple-sum solution stays nonnegative without them
        Violation("realizable s12+s21+h <= upsilon",
                  p.upsilon - p.sigma12 - p.sigma21 - p.h),
        Violation("realizable s12+s21+m <= upsilon",
                  p.upsilon - p.sigma12 - p.sigma21 - p.m),
        Violation("pd sigma11 > 0", p.sigma11 - np.nextafter(0.0, 1.0)),
        Violation("pd sigma22 > 0", p.sigma22 - np.nextafter(0.0, 1.0)),
        Violation("pd det(sigma) > 0",
                  p.sigma11 * p.sigma22 - p.sigma12 * p.sigma21 - DET_TOL),
        Violation("bc left density sum <= 1", 1.0 - p.rhoL1 - p.rhoL2),
        Violation("bc right density sum <= 1", 1.0 - p.rhoR1 - p.rhoR2),
        Violation("bc rhoL1 >= 0", p.rhoL1),
        Violation("bc rhoL2 >= 0", p.rhoL2),
        Violation("bc rhoR1 >= 0", p.rhoR1),
        Violation("bc rhoR2 >= 0", p.rhoR2),
    ]
    violations = tuple(v for v in checks if v.margin < 0.0)
    return ValidityVerdict(valid=not violations, violations=violations,
                           margins=tuple(checks))


def _require_valid(params: MacroParams) -> None:
    verdict = validate(params)
    if not verdict.valid:
        raise InvalidParametersError(verdict)


# ---------------------------------------------------------------------------
# Triple-rate sums.  Each variable is the sum over beta of a fixed row's
# rates with one target index pinned: pattern "first" pins the target pair's
# first label, "second" its second label.
Y_DEFINITIONS = (
    ((1, 0), "second", 1), ((0, 0), "second", 1), ((0, 1), "first", 1), ((0, 0), "first", 1),
    ((1, 0), "first", 0), ((1, 0), "first", 2), ((0, 1), "second", 0), ((0, 1), "second", 2),
    ((2, 0), "second", 1), ((0, 2), "first", 1), ((0, 2), "second", 1), ((2, 0), "first", 1),
    ((2, 0), "second", 2), ((0, 0), "second", 2), ((0, 2), "first", 2), ((0, 0), "first", 2),
    ((2, 0), "first", 0), ((0, 2), "second", 0), ((1, 0), "second", 2), ((0, 1), "first", 2),
    ((1, 1), "second", 0), ((2, 1), "second", 0), ((2, 2), "second", 1), ((1, 1), "first", 0),
    ((1, 2), "first", 0), ((1, 2), "second", 1), ((2, 1), "first", 1), ((2, 2), "first", 1),
    ((1, 1), "second", 2), ((1, 2), "second", 0), ((2, 1), "second", 2), ((2, 2), "second", 0),
    ((1, 1), "first", 2), ((1, 2), "first", 2), ((2, 1), "first", 0), ((2, 2), "first", 0),
)


def triple_sums(gamma: EdgeRateMatrix) -> np.ndarray:
    """Evaluate the 36 triple-rate sums on an explicit 9x9 rate table."""
    if gamma.n != 2:
        raise ValueError("triple sums are defined for two species")
    G = gamma.entries
    y = np.zeros(36)
    for j, ((a, b), pattern, k) in enumerate(Y_DEFINITIONS):
        row = pair_index(a, b)
        if pattern == "first":
            y[j] = sum(G[row, pair_index(k, bb)] for bb in range(3))
        else:
            y[j] = sum(G[row, pair_index(bb, k)] for bb in range(3))
    return y


def closed_form_y(params: MacroParams) -> np.ndarray:
    """Closed-form solution of the reduced system in the triple sums.

    Valid parameters give the nonnegative solution; outside the existence
    region at least one component is negative.  The row-sum equality enters
    through the defect d = s11+s21-s12-s22 (components 22, 25, 30, 32, 36).
    """
    p = params
    s11, s12, s21, s22 = p.sigma11, p.sigma12, p.sigma21, p.sigma22
    U, h, m = p.upsilon, p.h, p.m
    d = s11 + s21 - s12 - s22
    return np.array([
        s11, 0.0, s11, 0.0,
        s11 + s21, U - 2 * s21 - h, s11 + s21, h,
        s12, s12, m, U - 2 * s12 - m,
        s22, 0.0, s22, 0.0,
        s11 + s21, 2 * s12 + 2 * s22 - s11 - s21, s21, s21,
        0.0, d, s12 + m, 0.0,
        d, s11 + m, s11 - 2 * s12 + U - m, U - s12 - m,
        s21 + h, -2.0 * d, s22 + h, -d,
        U - s21 - h, s22 - 2 * s21 + U - h, 0.0, d,
    ])


def _condition_functional(y: np.ndarray):
    """The 30 matching conditions as linear functionals of the triple sums.

    Row order follows the target vector: four (F_minus, F_plus, F_0) blocks
    for species pairs 11, 12, 22, 21, then the 16 second-order conditions,
    then the two zero-order conditions.
    """
    Fm = {(1, 1): y[0] - y[1], (1, 2): y[8] - y[1],
          (2, 1): y[18] - y[13], (2, 2): y[12] - y[13]}
    Fp = {(1, 1): y[2] - y[3], (1, 2): y[9] - y[3],
          (2, 1): y[19] - y[15], (2, 2): y[14] - y[15]}
    B1 = {(1, 1): -(y[4] + y[5] + y[3]), (1, 2): y[11] - y[3],
          (2, 1): y[5] - y[15], (2, 2): -(y[16] + y[11] + y[15])}
    C2 = {(1, 1): -(y[6] + y[7] + y[1]), (1, 2): y[10] - y[1],
          (2, 1): y[7] - y[13], (2, 2): -(y[17] + y[10] + y[13])}
    Gp = [
        -(y[23] + y[32] + y[2]) + (y[4] + y[5] + y[3]),    # (1,1,1)
        -(y[24] + y[33] + y[9]) + (y[4] + y[5] + y[3]),    # (1,1,2)
        y[26] - y[11] - y[2] + y[3],                        # (1,2,1)
        y[27] - y[11] - y[9] + y[3],                        # (1,2,2)
        y[32] - y[5] - y[19] + y[15],                       # (2,1,1)
        y[33] - y[5] - y[14] + y[15],                       # (2,1,2)
        -(y[34] + y[26] + y[19]) + (y[16] + y[11] + y[15]), # (2,2,1)
        -(y[35] + y[27] + y[14]) + (y[16] + y[11] + y[15]), # (2,2,2)
    ]
    Gm = [
        -(y[20] + y[28] + y[0]) + (y[6] + y[7] + y[1]),     # (1,1,1)
        y[25] - y[0] - y[10] + y[1],                        # (1,1,2)
        -(y[21] + y[30] + y[8]) + (y[6] + y[7] + y[1]),     # (1,2,1)
        y[22] - y[8] - y[10] + y[1],                        # (1,2,2)
        y[28] - y[18] - y[7] + y[13],                       # (2,1,1)
        -(y[29] + y[25] + y[18]) + (y[17] + y[10] + y[13]), # (2,1,2)
        y[30] - y[12] - y[7] + y[13],                       # (2,2,1)
        -(y[31] + y[22] + y[12]) + (y[17] + y[10] + y[13]), # (2,2,2)
    ]
    rows = []
    for zb in ((1, 1), (1, 2), (2, 2), (2, 1)):
        rows += [Fm[zb], Fp[zb], B1[zb] + C2[zb]]
    rows += Gp + Gm
    rows += [y[3] + y[1], y[15] + y[13]]   # zero-order E terms
    return np.array(rows)


def assemble_xi_system(params: MacroParams):
    """Coefficient matrix and right-hand side of the reduced linear system.

    Returns (Xi, b) with Xi of shape (30, 36) and full rank 30; a rate table
    has the target mean structure iff its triple sums solve Xi y = b.
    """
    p = params
    U = p.upsilon
    b = np.array([p.sigma11, p.sigma11, -2 * p.sigma11 - U,
                  p.sigma12, p.sigma12, -2 * p.sigma12 + U,
                  p.sigma22, p.sigma22, -2 * p.sigma22 - U,
                  p.sigma21, p.sigma21, -2 * p.sigma21 + U]
                 + [0.0] * 18)
    xi = np.zeros((30, 36))
    for j in range(36):
        e = np.zeros(36)
        e[j] = 1.0
        xi[:, j] = _condition_functional(e)
    return xi, b


def solve_y(params: MacroParams, check: bool = True) -> np.ndarray:
    """Nonnegative closed-form solution of Xi y = b for valid parameters.

    Postcondition-checked: residual <= 1e-12 and y >= 0.  With ``check``
    false the closed form is returned as-is (useful to exhibit the negative
    components outside the existence region).
    """
    if check:
        _require_valid(params)
    y = closed_form_y(params)
    if check:
        xi, b = assemble_xi_system(params)
        res = np.abs(xi @ y - b).max()
        if res > 1e-12 or y.min() < 0.0:
            raise AssertionError(
                f"closed form violated its postcondition: residual={res:.3e}, "
                f"min component={y.min():.3e}")
    return y


def build_bulk(params: MacroParams, check: bool = True) -> EdgeRateMatrix:
    """Explicit 9x9 bulk rate table of the two-parameter family."""
    if check:
        _require_valid(params)
    p = params
    s11, s12, s21, s22 = p.sigma11, p.sigma12, p.sigma21, p.sigma22
    U, h, m = p.upsilon, p.h, p.m
    G = np.zeros((9, 9))

    def put(frm, to, rate):
        G[pair_index(*frm), pair_index(*to)] = rate

    put((0, 1), (0, 2), h)
    put((0, 1), (1, 0), s11)
    put((0, 1), (2, 0), s21)
    put((0, 2), (0, 1), m)
    put((0, 2), (1, 0), s12)
    put((0, 2), (2, 0), s22)
    put((1, 0), (0, 1), s11)
    put((1, 0), (0, 2), s21)
    put((1, 0), (2, 0), U - 2 * s21 - h)
    put((1, 1), (1, 2), h)
    put((1, 1), (2, 1), U - 2 * s21 - h)
    put((1, 1), (2, 2), s21)
    put((1, 2), (1, 1), m)
    put((1, 2), (2, 1), s11)
    put((1, 2), (2, 2), U - s12 - s21 - h)
    put((2, 0), (0, 1), s12)
    put((2, 0), (0, 2), s22)
    put((2, 0), (1, 0), U - 2 * s12 - m)
    put((2, 1), (1, 1), U - s12 - s21 - m)
    put((2, 1), (1, 2), s22)
    put((2, 1), (2, 2), h)
    put((2, 2), (1, 1), s12)
    put((2, 2), (1, 2), U - 2 * s12 - m)
    put((2, 2), (2, 1), m)
    return EdgeRateMatrix(n=2, entries=G)


def build_boundary(params: MacroParams, side: str, check: bool = True) -> SiteRateMatrix:
    """Reservoir rate matrix for the ``'left'`` or ``'right'`` end of the chain.

    Both ends inject at the Fick rates and absorb at the exclusion-weighted
    total conductance.  The cross-species rows differ: the left end carries
    the bond's right-mutation offsets (h, m), the right end the left-mutation
    offsets (upsilon-2*s21-h, upsilon-2*s12-m), because the end site plays
    the opposite bond role with respect to its missing neighbour.
    """
    if check:
        _require_valid(params)
    p = params
    s11, s12, s21, s22 = p.sigma11, p.sigma12, p.sigma21, p.sigma22
    if side == "left":
        r1, r2 = p.rhoL1, p.rhoL2
        mut12, mut21 = p.h, p.m
        vertex = 1
    elif side == "right":
        r1, r2 = p.rhoR1, p.rhoR2
        mut12 = p.upsilon - 2 * s21 - p.h
        mut21 = p.upsilon - 2 * s12 - p.m
        vertex = -1
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    W = np.zeros((3, 3))
    W[0, 1] = s11 * r1 + s12 * r2
    W[0, 2] = s21 * r1 + s22 * r2
    W[1, 0] = s11 + s21 - (s11 + s21) * r1 - (s12 + s22) * r2
    W[1, 2] = mut12 + s21 * r1 + s22 * r2
    W[2, 0] = s22 + s12 - (s22 + s12) * r2 - (s21 + s11) * r1
    W[2, 1] = mut21 + s11 * r1 + s12 * r2
    return SiteRateMatrix(entries=W, vertex=vertex)


def build_model(params: MacroParams, n_sites: int) -> ProcessModel:
    """Boundary-driven chain with the explicit bulk and reservoir matrices."""
    _require_valid(params)
    if n_sites < 2:
        raise ValueError("n_sites must be at least 2")
    graph = Graph.chain(n_sites)
    left = build_boundary(params, "left", check=False)
    right = build_boundary(params, "right", check=False)
    return ProcessModel(graph=graph, bulk=build_bulk(params, check=False),
                        boundary={1: SiteRateMatrix(left.entries, vertex=1),
                                  n_sites: SiteRateMatrix(right.entries, vertex=n_sites)})


def load_params(path) -> MacroParams:
    with open(path) as fh:
        return MacroParams.from_json(json.load(fh))
