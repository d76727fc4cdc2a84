"""Graphs, rate matrices and particle configurations.

Sites hold at most one particle; the occupant's species is an integer in
{0, ..., n} with 0 meaning empty.  Two-site moves are encoded by an
(n+1)^2 x (n+1)^2 edge rate matrix whose rows/columns are ordered pairs
in row-major base-(n+1) order (for n=2: 00,01,02,10,11,12,20,21,22); a
single-site rate matrix per vertex models particle reservoirs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

GENERATOR_ROWSUM_TOL = 1e-12
PAIR_ORDER_LABEL = "row-major base-3"


def pair_index(alpha: int, beta: int) -> int:
    """Index of the ordered pair (alpha, beta) in the 9x9 two-species tables."""
    if not (0 <= alpha <= 2 and 0 <= beta <= 2):
        raise ValueError(f"species labels must lie in 0..2, got ({alpha}, {beta})")
    return 3 * alpha + beta


def mutation_map(alpha: int) -> int:
    """Swap the two particle species; the empty state is fixed (1<->2, 0->0)."""
    if alpha not in (0, 1, 2):
        raise ValueError(f"species label must lie in 0..2, got {alpha}")
    return (0, 2, 1)[alpha]


def _recompute_diagonal(entries: np.ndarray) -> np.ndarray:
    """Return a copy with the diagonal set to minus the off-diagonal row sums."""
    out = np.array(entries, dtype=float)
    np.fill_diagonal(out, 0.0)
    np.fill_diagonal(out, -out.sum(axis=1))
    return out


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of a generator-matrix check."""
    negative_entries: tuple  # ((row, col, value), ...)
    row_sum_violations: tuple  # ((row, sum), ...)

    @property
    def valid(self) -> bool:
        return not self.negative_entries and not self.row_sum_violations

    def __bool__(self) -> bool:
        return self.valid


def check_generator_matrix(matrix) -> ValidityReport:
    """Check that a square rate table is a Markov generator.

    Off-diagonal entries must be nonnegative and every row must sum to zero
    within ``GENERATOR_ROWSUM_TOL``.  Accepts a plain array or one of the
    rate-matrix types.
    """
    entries = np.asarray(getattr(matrix, "entries", matrix), dtype=float)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError(f"generator matrix must be square, got shape {entries.shape}")
    neg = []
    for i, j in zip(*np.nonzero(entries < 0.0)):
        if i != j:
            neg.append((int(i), int(j), float(entries[i, j])))
    sums = entries.sum(axis=1)
    bad_rows = [(int(i), float(s)) for i, s in enumerate(sums)
                if abs(s) > GENERATOR_ROWSUM_TOL]
    return ValidityReport(tuple(neg), tuple(bad_rows))


@dataclass(frozen=True)
class EdgeRateMatrix:
    """Rate table for simultaneous two-site transitions on a bond.

    ``entries[pair_index(g, d), pair_index(a, b)]`` is the rate of
    (g, d) -> (a, b).  The diagonal is recomputed on construction so rows
    sum to zero exactly.
    """
    n: int
    entries: np.ndarray

    def __post_init__(self):
        size = (self.n + 1) ** 2
        entries = np.asarray(self.entries, dtype=float)
        if entries.shape != (size, size):
            raise ValueError(f"expected {size}x{size} entries for n={self.n}, "
                             f"got {entries.shape}")
        entries = _recompute_diagonal(entries)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def rate(self, frm: tuple[int, int], to: tuple[int, int]) -> float:
        p = self.n + 1
        return float(self.entries[frm[0] * p + frm[1], to[0] * p + to[1]])

    def to_json(self) -> dict:
        return {"n": self.n, "pair_order": PAIR_ORDER_LABEL,
                "entries": self.entries.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "EdgeRateMatrix":
        return cls(n=int(doc["n"]), entries=np.array(doc["entries"], dtype=float))


@dataclass(frozen=True)
class SiteRateMatrix:
    """Rate table for single-site transitions at one vertex (reservoir coupling)."""
    entries: np.ndarray
    vertex: int = 0

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"site rate matrix must be square, got {entries.shape}")
        entries = _recompute_diagonal(entries)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0] - 1

    def rate(self, frm: int, to: int) -> float:
        return float(self.entries[frm, to])

    def to_json(self) -> dict:
        return {"n": self.n, "vertex": self.vertex, "entries": self.entries.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "SiteRateMatrix":
        return cls(entries=np.array(doc["entries"], dtype=float),
                   vertex=int(doc.get("vertex", 0)))


@dataclass(frozen=True)
class Graph:
    """Vertices 1..N with directed weighted edges and per-site weights."""
    vertex_count: int
    edges: tuple  # ((x, y), ...) with 1-based vertex ids
    edge_weights: tuple
    site_weights: tuple

    def __post_init__(self):
        n = self.vertex_count
        if n < 1:
            raise ValueError("vertex_count must be positive")
        edges = tuple((int(x), int(y)) for x, y in self.edges)
        if len(self.edge_weights) != len(edges):
            raise ValueError("one weight per edge required")
        if len(self.site_weights) != n:
            raise ValueError("one site weight per vertex required")
        for (x, y) in edges:
            if x == y:
                raise ValueError(f"self-edge at vertex {x}")
            if not (1 <= x <= n and 1 <= y <= n):
                raise ValueError(f"edge ({x},{y}) out of range 1..{n}")
        if any(w < 0 for w in self.edge_weights) or any(w < 0 for w in self.site_weights):
            raise ValueError("weights must be nonnegative")
        if not self._connected(n, edges):
            raise ValueError("graph must be connected")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "edge_weights", tuple(float(w) for w in self.edge_weights))
        object.__setattr__(self, "site_weights", tuple(float(w) for w in self.site_weights))

    @staticmethod
    def _connected(n, edges) -> bool:
        if n == 1:
            return True
        adj = {v: set() for v in range(1, n + 1)}
        for x, y in edges:
            adj[x].add(y)
            adj[y].add(x)
        seen = {1}
        stack = [1]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == n

    @classmethod
    def chain(cls, n_sites: int) -> "Graph":
        """Nearest-neighbour chain: unit conductances, unit site weight at the ends."""
        if n_sites < 2:
            raise ValueError("a chain needs at least 2 sites")
        edges = tuple((z, z + 1) for z in range(1, n_sites))
        site_w = tuple(1.0 if z in (1, n_sites) else 0.0 for z in range(1, n_sites + 1))
        return cls(vertex_count=n_sites, edges=edges,
                   edge_weights=(1.0,) * len(edges), site_weights=site_w)

    @property
    def is_chain(self) -> bool:
        expect = tuple((z, z + 1) for z in range(1, self.vertex_count))
        return self.edges == expect

    def to_json(self) -> dict:
        return {"vertex_count": self.vertex_count,
                "edges": [list(e) for e in self.edges],
                "edge_weights": list(self.edge_weights),
                "site_weights": list(self.site_weights)}

    @classmethod
    def from_json(cls, doc: dict) -> "Graph":
        return cls(vertex_count=int(doc["vertex_count"]),
                   edges=tuple(tuple(e) for e in doc["edges"]),
                   edge_weights=tuple(doc["edge_weights"]),
                   site_weights=tuple(doc["site_weights"]))


@dataclass(frozen=True)
class Configuration:
    """Occupation vector over vertices, values in {0, ..., n}."""
    occupation: tuple

    def __post_init__(self):
        occ = tuple(int(v) for v in self.occupation)
        if any(v < 0 for v in occ):
            raise ValueError("occupation values must be nonnegative species labels")
        object.__setattr__(self, "occupation", occ)

    def __len__(self) -> int:
        return len(self.occupation)

    def __getitem__(self, vertex: int) -> int:
        """Occupant of 1-based ``vertex``."""
        return self.occupation[vertex - 1]

    def as_array(self) -> np.ndarray:
        return np.array(self.occupation, dtype=np.int64)

    def to_json(self) -> list:
        return list(self.occupation)

    @classmethod
    def from_json(cls, doc) -> "Configuration":
        return cls(tuple(int(v) for v in doc))


def apply_edge_event(eta: Configuration, edge: tuple[int, int],
                     target: tuple[int, int]) -> Configuration:
    """Return ``eta`` with the occupants of ``edge`` replaced by ``target``."""
    x, y = edge
    if not (1 <= x <= len(eta) and 1 <= y <= len(eta)):
        raise ValueError(f"edge ({x},{y}) out of range for {len(eta)} sites")
    occ = list(eta.occupation)
    occ[x - 1], occ[y - 1] = target
    return Configuration(tuple(occ))


def apply_site_event(eta: Configuration, x: int, target: int) -> Configuration:
    """Return ``eta`` with the occupant of site ``x`` replaced by ``target``."""
    if not 1 <= x <= len(eta):
        raise ValueError(f"site {x} out of range for {len(eta)} sites")
    occ = list(eta.occupation)
    occ[x - 1] = target
    return Configuration(tuple(occ))


@dataclass(frozen=True)
class ProcessModel:
    """A bulk edge rate table on a graph plus reservoir matrices at chosen sites."""
    graph: Graph
    bulk: EdgeRateMatrix
    boundary: dict = field(default_factory=dict)  # vertex -> SiteRateMatrix

    def __post_init__(self):
        for v in self.boundary:
            if not 1 <= v <= self.graph.vertex_count:
                raise ValueError(f"boundary vertex {v} out of range")

    @property
    def n_sites(self) -> int:
        return self.graph.vertex_count

    def site_matrix(self, vertex: int):
        return self.boundary.get(vertex)

    def to_json(self) -> dict:
        return {"graph": self.graph.to_json(),
                "bulk": self.bulk.to_json(),
                "boundary": {str(v): w.to_json() for v, w in sorted(self.boundary.items())}}

    @classmethod
    def from_json(cls, doc: dict) -> "ProcessModel":
        return cls(graph=Graph.from_json(doc["graph"]),
                   bulk=EdgeRateMatrix.from_json(doc["bulk"]),
                   boundary={int(v): SiteRateMatrix.from_json(w)
                             for v, w in doc.get("boundary", {}).items()})

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "ProcessModel":
        with open(path) as fh:
            return cls.from_json(json.load(fh))
