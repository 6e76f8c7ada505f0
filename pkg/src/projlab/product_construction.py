"""Product-like sets (an s-dimensional fiber over each base point), the
tube relation p ~ q, per-pair canonical tubes, triple intersections with
their endpoint-pair extraction, the projection-like maps (x, y) ↦
x + c·y, and the exhaustive projection-growth sweep.

Tube identity is discrete: two tubes are equal iff they carry the same
direction index and the same grid offset.  Tie-breaking is deterministic
everywhere: lowest direction index first, then lowest offset.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .delta_core import (
    Direction,
    DirectionSet,
    PointSet2D,
    ScalarSet,
    as_delta,
    check_delta_t,
    covering_number,
)
from .errors import NonConcentrationError


class ProductLikeSet:
    """Base set B with one fiber A_b per base point, realizing
    ⋃_b A_b × {b} (fiber value = x coordinate, base value = y)."""

    __slots__ = ("base", "fibers", "delta", "s", "tau")

    def __init__(self, base: ScalarSet, fibers, delta, s, tau):
        self.delta = as_delta(delta)
        self.s = float(s)
        self.tau = float(tau)
        self.base = base if isinstance(base, ScalarSet) else ScalarSet(base)
        coerced = {}
        for b in self.base:
            if b not in fibers:
                raise ValueError(f"missing fiber for base point {b}")
            f = fibers[b]
            coerced[b] = f if isinstance(f, ScalarSet) else ScalarSet(f)
        if len(coerced) != len(fibers):
            raise ValueError("fibers keyed off the base set")
        self.fibers = coerced

    def __len__(self):
        return sum(len(f) for f in self.fibers.values())

    def point_rows(self):
        """(a, b) rows sorted by (b, a); the serialization order."""
        rows = []
        for b in self.base:
            for a in self.fibers[b]:
                rows.append((a, b))
        return np.asarray(rows, dtype=np.float64).reshape(-1, 2)

    def points(self) -> PointSet2D:
        return PointSet2D(self.point_rows())

    def fiber_sizes(self):
        return {b: len(f) for b, f in self.fibers.items()}

    def validate(self, max_ratio=8.0):
        """Run the non-concentration checks the type promises: base at
        exponent tau, each fiber at s, the assembled set at s + tau.
        Returns the reports; raises NonConcentrationError on failure."""
        reports = {}
        rep = check_delta_t(self.base, self.delta, self.tau)
        if rep.worst_ratio > max_ratio:
            raise NonConcentrationError("base set", rep, max_ratio)
        reports["base"] = rep
        for b, f in self.fibers.items():
            if len(f) == 1:
                warnings.warn(f"degenerate single-point fiber at b = {b}", stacklevel=2)
            rep = check_delta_t(f, self.delta, self.s)
            if rep.worst_ratio > max_ratio:
                raise NonConcentrationError(f"fiber at b = {b}", rep, max_ratio)
            reports[f"fiber:{b!r}"] = rep
        rep = check_delta_t(self.points(), self.delta, min(self.s + self.tau, 2.0))
        if rep.worst_ratio > max_ratio:
            raise NonConcentrationError("assembled product-like set", rep, max_ratio)
        reports["assembled"] = rep
        return reports


def build_product_like(base, fibers, delta, s, tau, max_ratio=8.0) -> ProductLikeSet:
    """Assemble and validate a product-like set; any failed check raises
    with the witness ball named."""
    p = ProductLikeSet(base, fibers, delta, s, tau)
    p.validate(max_ratio=max_ratio)
    return p


def affine_renormalize(P: ProductLikeSet, e0: Direction) -> ProductLikeSet:
    """Shear the fibers (A_b -> e0_x·A_b + e0_y·b) so that projecting the
    result onto (1, 0) reproduces the e0-projection of the input; covering
    numbers transfer up to grid-boundary rounding, at most a factor 2."""
    if abs(e0.ex) < 1e-12:
        raise ValueError("renormalization needs a direction with nonzero horizontal part")
    fibers = {b: ScalarSet(e0.ex * f.values + e0.ey * b) for b, f in P.fibers.items()}
    return ProductLikeSet(P.base, fibers, P.delta, P.s, P.tau)


def renormalized_directions(E: DirectionSet, e0: Direction):
    """The (generally non-unit) direction vectors that act on a
    renormalized set the way E acts on the original:
    (ex/e0_x, ey - ex·e0_y/e0_x), one row per direction."""
    if abs(e0.ex) < 1e-12:
        raise ValueError("renormalization needs a direction with nonzero horizontal part")
    vecs = E.vectors()
    return np.column_stack([vecs[:, 0] / e0.ex, vecs[:, 1] - vecs[:, 0] * e0.ey / e0.ex])


@dataclass(frozen=True)
class FilterResult:
    product: ProductLikeSet
    directions: DirectionSet
    degenerate: bool


def roughly_horizontal_filter(P: ProductLikeSet, E: DirectionSet, cos_min=0.5) -> FilterResult:
    """Restrict to near-horizontal directions and thin fibers so that any
    δ-tube perpendicular to a kept direction meets each fiber at most once.

    Keeps |cos θ| >= cos_min and, per fiber, a greedy subsequence with
    gaps >= δ/min|cos θ|; for δ-separated fibers this keeps at least every
    other point.  E drained empty (all directions near-vertical) is
    flagged, not an error.
    """
    d = P.delta
    kept_thetas = [t for t in E.thetas.tolist() if abs(math.cos(t)) >= cos_min]
    degenerate = len(kept_thetas) < max(1, len(E) / 2)
    if not kept_thetas:
        return FilterResult(product=P, directions=DirectionSet([]), degenerate=True)
    cos_floor = min(abs(math.cos(t)) for t in kept_thetas)
    needed_gap = d / cos_floor * (1.0 + 1e-9)
    new_fibers = {}
    for b, f in P.fibers.items():
        vals = f.values
        if len(vals) < 2 or float(np.diff(vals).min()) >= needed_gap:
            new_fibers[b] = f
            continue
        kept = [vals[0]]
        for v in vals[1:]:
            if v - kept[-1] >= needed_gap:
                kept.append(v)
        new_fibers[b] = ScalarSet(kept)
    thinned = ProductLikeSet(P.base, new_fibers, d, P.s, P.tau)
    return FilterResult(product=thinned, directions=DirectionSet(kept_thetas), degenerate=degenerate)


@dataclass(frozen=True)
class RelationGraph:
    """Per-direction same-tube pair sets and their union Q.

    Edges are stored unordered (i < j); ordered counts double them.
    cs_bounds carries the per-direction |P|²/M - |P| diagnostic and
    q_ratio the measured ordered |Q| / |P|².
    """

    rows: np.ndarray
    fiber_ids: np.ndarray
    per_direction: dict
    union_edges: frozenset
    cs_bounds: dict
    q_ratio: float
    same_fiber_edges: int

    def ordered_union_count(self) -> int:
        return 2 * len(self.union_edges)


def _direction_cells(rows, E: DirectionSet, delta):
    """Grid cell index of every point's projection, per direction."""
    d = as_delta(delta)
    vecs = E.vectors()
    proj = rows @ vecs.T  # (n_points, n_directions)
    return np.floor(proj / d).astype(np.int64)


def relation_graph(P: ProductLikeSet, E: DirectionSet, delta=None) -> RelationGraph:
    d = as_delta(delta) if delta is not None else P.delta
    rows = P.point_rows()
    base_index = {b: i for i, b in enumerate(P.base)}
    fiber_ids = np.asarray([base_index[b] for (a, b) in rows.tolist()], dtype=np.int64)
    n = rows.shape[0]
    cells = _direction_cells(rows, E, d)
    per_direction = {}
    cs_bounds = {}
    union: set = set()
    same_fiber = 0
    for di in range(len(E)):
        col = cells[:, di]
        order = np.argsort(col, kind="stable")
        edges = set()
        start = 0
        sorted_cells = col[order]
        for stop in range(1, n + 1):
            if stop == n or sorted_cells[stop] != sorted_cells[start]:
                group = sorted(order[start:stop].tolist())
                for ii in range(len(group)):
                    for jj in range(ii + 1, len(group)):
                        i, j = group[ii], group[jj]
                        edges.add((i, j))
                        if fiber_ids[i] == fiber_ids[j]:
                            same_fiber += 1
                start = stop
        per_direction[di] = frozenset(edges)
        union.update(edges)
        m = int(np.unique(col).size)
        cs_bounds[di] = n * n / m - n if m else 0.0
    q_ratio = (2 * len(union)) / (n * n) if n else 0.0
    return RelationGraph(
        rows=rows,
        fiber_ids=fiber_ids,
        per_direction=per_direction,
        union_edges=frozenset(union),
        cs_bounds=cs_bounds,
        q_ratio=q_ratio,
        same_fiber_edges=same_fiber,
    )


class PairTubeIndex:
    """Canonical tube for every related cross-fiber point pair.

    The tube chosen for a pair is the one with the lowest direction index
    containing both points (the offset is then determined), so families
    and intersections are deterministic.
    """

    def __init__(self, P: ProductLikeSet, E: DirectionSet, delta=None):
        self.product = P
        self.directions = E
        self.delta = as_delta(delta) if delta is not None else P.delta
        self.rows = P.point_rows()
        base_index = {b: i for i, b in enumerate(P.base)}
        self.fiber_ids = np.asarray(
            [base_index[b] for (a, b) in self.rows.tolist()], dtype=np.int64
        )
        self.base_values = list(P.base)
        cells = _direction_cells(self.rows, E, self.delta)
        n = self.rows.shape[0]
        canonical: dict = {}
        for di in range(len(E)):
            col = cells[:, di]
            order = np.argsort(col, kind="stable")
            sorted_cells = col[order]
            start = 0
            for stop in range(1, n + 1):
                if stop == n or sorted_cells[stop] != sorted_cells[start]:
                    group = sorted(order[start:stop].tolist())
                    k = int(sorted_cells[start])
                    for ii in range(len(group)):
                        for jj in range(ii + 1, len(group)):
                            i, j = group[ii], group[jj]
                            if self.fiber_ids[i] != self.fiber_ids[j]:
                                canonical.setdefault((i, j), (di, k))
                    start = stop
        self.pair_tube = canonical

    def family(self, b1, b2) -> "TubePairFamily":
        if b1 == b2:
            return TubePairFamily(b1=b1, b2=b2, pair_to_tube={}, tube_to_pair={})
        for b in (b1, b2):
            if b not in self.product.fibers:
                raise ValueError(f"{b} is not a base point")
        f1 = self.base_values.index(b1)
        f2 = self.base_values.index(b2)
        pair_to_tube = {}
        tube_to_pair = {}
        for (i, j), tube in self.pair_tube.items():
            fi, fj = self.fiber_ids[i], self.fiber_ids[j]
            if {fi, fj} != {f1, f2}:
                continue
            p, q = (i, j) if fi == f1 else (j, i)
            pair_to_tube[(p, q)] = tube
            if tube in tube_to_pair:
                raise ValueError(
                    f"pair-to-tube map not injective at tube {tube}; "
                    "roughly-horizontal condition violated"
                )
            tube_to_pair[tube] = (p, q)
        return TubePairFamily(b1=b1, b2=b2, pair_to_tube=pair_to_tube, tube_to_pair=tube_to_pair)


@dataclass(frozen=True)
class TubePairFamily:
    b1: float
    b2: float
    pair_to_tube: dict
    tube_to_pair: dict

    @property
    def tubes(self) -> frozenset:
        return frozenset(self.tube_to_pair)

    def __len__(self):
        return len(self.tube_to_pair)


def tube_pair_family(P: ProductLikeSet, b1, b2, E: DirectionSet, delta=None) -> TubePairFamily:
    return PairTubeIndex(P, E, delta).family(b1, b2)


@dataclass(frozen=True)
class TriplePairData:
    triple: tuple
    shared_tubes: tuple
    pairs: tuple  # distinct (a1, a3) endpoint pairs, sorted
    middles: tuple  # the a2 value witnessing each shared tube

    @property
    def count_identity_holds(self) -> bool:
        return len(self.pairs) == len(self.shared_tubes)


def triple_intersections(P: ProductLikeSet, b1, b2, b3, E: DirectionSet, delta=None,
                         index: PairTubeIndex | None = None) -> TriplePairData:
    """Shared tubes of the (b1,b2) and (b2,b3) families and the endpoint
    pairs (a1, a3) they generate through their unique decompositions."""
    if len({b1, b2, b3}) != 3:
        raise ValueError("triple must have three distinct base points")
    idx = index if index is not None else PairTubeIndex(P, E, delta)
    f12 = idx.family(b1, b2)
    f23 = idx.family(b2, b3)
    shared = sorted(f12.tubes & f23.tubes)
    pairs = set()
    middles = []
    for tube in shared:
        i1, j1 = f12.tube_to_pair[tube]
        i2, j2 = f23.tube_to_pair[tube]
        if j1 != i2:
            raise ValueError(
                f"tube {tube} holds two distinct middle-fiber points; "
                "roughly-horizontal condition violated"
            )
        pairs.add((float(idx.rows[i1, 0]), float(idx.rows[j2, 0])))
        middles.append(float(idx.rows[j1, 0]))
    return TriplePairData(
        triple=(b1, b2, b3),
        shared_tubes=tuple(shared),
        pairs=tuple(sorted(pairs)),
        middles=tuple(middles),
    )


def triple_projection(x, y, b1, b2, b3) -> float:
    """The map x + ((b2 - b1)/(b3 - b2))·y; undefined when b3 = b2."""
    if b3 == b2:
        raise ZeroDivisionError("triple projection undefined for b3 == b2")
    return x + (b2 - b1) / (b3 - b2) * y


@dataclass(frozen=True)
class GoodTripleScan:
    triples: tuple  # (b1, b2, b3, intersection_size) meeting both filters
    total_intersections: int  # sum over all scanned separated triples


def good_triple_scan(P: ProductLikeSet, E: DirectionSet, delta=None,
                     separation_min=0.25, threshold=1.0,
                     index: PairTubeIndex | None = None) -> GoodTripleScan:
    """All ordered pairwise-distinct base triples with pairwise separation
    >= separation_min, keeping those whose tube families share at least
    `threshold` tubes; also the global intersection sum over the scanned
    triples (the Cauchy-Schwarz diagnostic)."""
    idx = index if index is not None else PairTubeIndex(P, E, delta)
    base = list(P.base)
    families = {}

    def fam(bi, bj):
        if (bi, bj) not in families:
            families[(bi, bj)] = idx.family(bi, bj).tubes
        return families[(bi, bj)]

    hits = []
    total = 0
    for b1 in base:
        for b2 in base:
            if b2 == b1:
                continue
            for b3 in base:
                if b3 == b1 or b3 == b2:
                    continue
                if min(abs(b1 - b2), abs(b1 - b3), abs(b2 - b3)) < separation_min:
                    continue
                size = len(fam(b1, b2) & fam(b2, b3))
                total += size
                if size >= threshold:
                    hits.append((b1, b2, b3, size))
    return GoodTripleScan(triples=tuple(hits), total_intersections=total)


def compression_check(g_prime, b1, b2, b3, delta, s):
    """Covering number of the triple-projected endpoint pairs against the
    δ^-s benchmark; returns (N, bound) for ratio reporting."""
    d = as_delta(delta)
    pairs = list(g_prime)
    if not pairs:
        return 0, d ** -float(s)
    vals = [triple_projection(a1, a3, b1, b2, b3) for a1, a3 in pairs]
    return covering_number(ScalarSet(vals), d), d ** -float(s)


@dataclass(frozen=True)
class ProductExperiment:
    witness: Direction | None
    max_n: int
    profile: tuple  # (theta, N) rows in direction order
    target: float


def product_experiment(P: ProductLikeSet, E: DirectionSet, delta=None, s=None,
                       epsilon=0.0) -> ProductExperiment:
    """Exhaustive projection sweep over E: the first direction whose
    projection occupies at least δ^-(s+ε) cells (None when absent) and the
    exact maximum, with the full (theta, N) profile."""
    d = as_delta(delta) if delta is not None else P.delta
    s_val = float(s) if s is not None else P.s
    if len(E) == 0:
        warnings.warn("empty direction set; experiment is vacuous", stacklevel=2)
    pts = P.points()
    target = d ** -(s_val + float(epsilon))
    witness = None
    max_n = 0
    profile = []
    for i in range(len(E)):
        e = E[i]
        n = covering_number(
            ScalarSet(pts.points @ np.array([e.ex, e.ey])) if len(pts) else ScalarSet([]), d
        )
        profile.append((float(E.thetas[i]), n))
        if n > max_n:
            max_n = n
        if witness is None and n >= target:
            witness = e
    return ProductExperiment(witness=witness, max_n=max_n, profile=tuple(profile), target=target)
