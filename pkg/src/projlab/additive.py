"""δ-grid arithmetic: snapping, sumsets, iterated sumsets, doubling
reports, and a constructive graph extractor for dense pair graphs with
small restricted sumsets.

All set arithmetic happens on integer grid coordinates (k representing
kδ), so sumset cardinalities are exact; reals only appear at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BsgHypothesisError


class GridSet:
    """Finite subset of the grid δZ, stored as sorted distinct integers."""

    __slots__ = ("members", "step")

    def __init__(self, members, step):
        step = float(step)
        if step <= 0:
            raise ValueError("grid step must be positive")
        self.members = np.unique(np.asarray(members, dtype=np.int64))
        self.members.setflags(write=False)
        self.step = step

    @classmethod
    def from_values(cls, values, step) -> "GridSet":
        return cls([snap(v, step) for v in values], step)

    def values(self):
        return self.members * self.step

    def __len__(self):
        return int(self.members.size)

    def __iter__(self):
        return iter(self.members.tolist())

    def __repr__(self):
        return f"GridSet(n={len(self)}, step={self.step:.4g})"

    def __eq__(self, other):
        return (
            isinstance(other, GridSet)
            and self.step == other.step
            and np.array_equal(self.members, other.members)
        )

    def __hash__(self):
        return hash((self.step, self.members.tobytes()))


def snap(x, delta) -> int:
    """Largest integer k with kδ <= x.  Exact for dyadic δ."""
    return int(math.floor(float(x) / float(delta)))


def _require_same_step(a: GridSet, b: GridSet):
    if a.step != b.step:
        raise ValueError(f"grid steps differ: {a.step} vs {b.step}")


def sumset(a: GridSet, b: GridSet, sign="+") -> GridSet:
    """Minkowski sum {x ± y}, exact on grid coordinates."""
    _require_same_step(a, b)
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    if len(a) == 0 or len(b) == 0:
        return GridSet([], a.step)
    sgn = 1 if sign == "+" else -1
    out = np.unique(np.add.outer(a.members, sgn * b.members).ravel())
    return GridSet(out, a.step)


def iterated_sumset(b: GridSet, m: int, n: int) -> GridSet:
    """mB - nB with 0-fold sums equal to {0}; m = n = 0 is rejected."""
    if m < 0 or n < 0:
        raise ValueError("fold counts must be nonnegative")
    if m + n == 0:
        raise ValueError("at least one fold is required")

    def fold(k):
        acc = GridSet([0], b.step)
        for _ in range(k):
            acc = sumset(acc, b, "+")
        return acc

    return sumset(fold(m), fold(n), "-")


@dataclass(frozen=True)
class PlunneckeReport:
    c: int
    lhs: int
    rhs: int
    holds: bool


def plunnecke_report(a: GridSet, b: GridSet, m: int, n: int) -> PlunneckeReport:
    """Doubling constant C = ceil(|A+B|/|A|) and the iterated-sumset check
    |mB - nB| <= C^(m+n) |A|, all in exact integer arithmetic."""
    if len(a) == 0:
        raise ValueError("A must be nonempty")
    c = -((-len(sumset(a, b, "+"))) // len(a))
    lhs = len(iterated_sumset(b, m, n))
    rhs = c ** (m + n) * len(a)
    return PlunneckeReport(c=c, lhs=lhs, rhs=rhs, holds=lhs <= rhs)


class PairGraph:
    """Bipartite edge set G ⊆ A × B over two grid sets."""

    __slots__ = ("a_set", "b_set", "edges")

    def __init__(self, a_set: GridSet, b_set: GridSet, edges):
        self.a_set = a_set
        self.b_set = b_set
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        arr = np.unique(arr, axis=0) if arr.size else arr
        if arr.size:
            if arr[:, 0].min() < 0 or arr[:, 0].max() >= len(a_set):
                raise ValueError("edge a_index out of range")
            if arr[:, 1].min() < 0 or arr[:, 1].max() >= len(b_set):
                raise ValueError("edge b_index out of range")
        self.edges = arr
        self.edges.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def adjacency(self):
        adj = np.zeros((len(self.a_set), len(self.b_set)), dtype=bool)
        if self.edge_count:
            adj[self.edges[:, 0], self.edges[:, 1]] = True
        return adj

    def restricted_sums(self):
        """Distinct values {a + b : (a, b) ∈ G}, exact from the edge list."""
        if self.edge_count == 0:
            return np.empty(0, dtype=np.int64)
        vals = self.a_set.members[self.edges[:, 0]] + self.b_set.members[self.edges[:, 1]]
        return np.unique(vals)


@dataclass(frozen=True)
class BsgResult:
    a_sub: GridSet
    b_sub: GridSet
    achieved_density: float
    achieved_sumset: int
    achieved_edge_fraction: float
    edges_in_block: int
    measured_exponent: float
    k: float


def _median_threshold(values):
    pos = values[values > 0]
    if pos.size == 0:
        return None
    return float(np.median(pos))


def bsg_extract(graph: PairGraph, k: float) -> BsgResult:
    """Extract dense subsets with small full sumset from a pair graph.

    Constructive path-of-length-3 scheme: keep right vertices of at least
    median positive degree, link left-vertex pairs with at least median
    positive codegree over those, keep left vertices with at least median
    many linked partners, then re-select popular right vertices.  All
    thresholds are medians of the positive values, so the extraction is
    deterministic; achieved statistics are recomputed from the output.
    """
    if k < 1.0:
        raise ValueError("K must be >= 1")
    n_a, n_b = len(graph.a_set), len(graph.b_set)
    m = graph.edge_count
    if m == 0:
        raise BsgHypothesisError("pair graph has no edges")
    if m * k < n_a * n_b * (1.0 - 1e-12):
        raise BsgHypothesisError(
            f"density hypothesis fails: |G| = {m} < |A||B|/K = {n_a * n_b / k:.4g}"
        )
    rs = int(graph.restricted_sums().size)
    if rs > k * math.sqrt(n_a * n_b) * (1.0 + 1e-12):
        raise BsgHypothesisError(
            f"restricted sumset too large: {rs} > K sqrt(|A||B|) = {k * math.sqrt(n_a * n_b):.4g}"
        )

    adj = graph.adjacency()
    deg_b = adj.sum(axis=0)
    thr_b = _median_threshold(deg_b)
    b1 = deg_b >= thr_b

    restricted = adj[:, b1].astype(np.int64)
    codeg = restricted @ restricted.T
    np.fill_diagonal(codeg, 0)
    thr_link = _median_threshold(codeg[np.triu_indices(n_a, 1)]) if n_a > 1 else None
    if thr_link is not None:
        linked = codeg >= thr_link
        partners = linked.sum(axis=1)
        thr_a = _median_threshold(partners)
        a_keep = partners >= thr_a if thr_a is not None else restricted.sum(axis=1) > 0
    else:
        a_keep = restricted.sum(axis=1) > 0
    if not a_keep.any():
        a_keep = adj.sum(axis=1) > 0

    deg_into_a = adj[a_keep].sum(axis=0) * b1
    thr_b2 = _median_threshold(deg_into_a)
    b_keep = deg_into_a >= thr_b2 if thr_b2 is not None else b1 & (adj[a_keep].sum(axis=0) > 0)

    a_sub = GridSet(graph.a_set.members[a_keep], graph.a_set.step)
    b_sub = GridSet(graph.b_set.members[b_keep], graph.b_set.step)
    block = adj[np.ix_(a_keep, b_keep)]
    edges_in = int(block.sum())
    full_sum = len(sumset(a_sub, b_sub, "+"))
    density = edges_in / (len(a_sub) * len(b_sub)) if len(a_sub) and len(b_sub) else 0.0
    fraction = edges_in / (n_a * n_b)

    ratios = [
        n_a / max(len(a_sub), 1),
        n_b / max(len(b_sub), 1),
        full_sum / math.sqrt(n_a * n_b),
        (n_a * n_b) / max(edges_in, 1),
    ]
    if k > 1.0 + 1e-12:
        exponent = max(math.log(max(r, 1.0)) / math.log(k) for r in ratios)
    else:
        exponent = 0.0 if max(ratios) <= 1.0 + 1e-12 else math.inf

    return BsgResult(
        a_sub=a_sub,
        b_sub=b_sub,
        achieved_density=density,
        achieved_sumset=full_sum,
        achieved_edge_fraction=fraction,
        edges_in_block=edges_in,
        measured_exponent=exponent,
        k=float(k),
    )
