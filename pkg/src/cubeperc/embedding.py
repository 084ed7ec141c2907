"""Super-critical machinery: good-vertex detection, construction of the
neighbor map f, open-path search over path families, analytic moments of
open-path counts, and neighbor-distance statistics.

A vertex is good when at least 2m vertices, each differing from it in
exactly two A-coordinates, are reachable by open 2-paths whose edges
both lie along A-coordinates.  The map f sends each vertex to a good
vertex one B-coordinate away.  At small n good vertices are rare (the
asymptotics need (1-2alpha)l > 9alpha to bite), so build failure is an
expected outcome and is returned as a report, not raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.sparse import coo_matrix

from .errors import GiantTooSmall
from .hypercube import (
    CoordinatePartition,
    GoodPairSpec,
    NeighborRetraceSpec,
    PathFamilySpec,
    bit_indices,
    enumerate_paths,
    path_edge_indices,
)
from .metrics import VertexMap, bounded_distance, components
from .percolation import (
    ALWAYS,
    CounterStream,
    PercModel,
    PercolationSample,
    _mix64_grid,
    mix64,
    vertex_draw_offset,
)

SECOND_MOMENT_CAP = 10_000


@dataclass(frozen=True)
class GoodnessCertificate:
    """Witnesses that a vertex is good: each is reachable by an open
    2-path along A-coordinates and differs in exactly two A-bits."""

    vertex: int
    witnesses: frozenset[int]


@dataclass
class FailureReport:
    """Vertices with no good neighbor one B-coordinate away."""

    bad_vertices: np.ndarray

    def __post_init__(self) -> None:
        self.bad_vertices = np.asarray(self.bad_vertices, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.bad_vertices)


def _coord_mask(coords) -> int:
    mask = 0
    for c in coords:
        mask |= 1 << c
    return mask


def is_good(
    sample: PercolationSample, v: int, partition: CoordinatePartition
) -> Optional[GoodnessCertificate]:
    """Certificate when v is good, else None.  Absent vertices are
    never good (they have no open edges)."""
    if not sample.vertex_present(v):
        return None
    a_bits = _coord_mask(partition.a_coords)
    witnesses = set()
    first = sample.open_neighbor_mask(v) & a_bits
    for a1 in bit_indices(first):
        mid = v ^ (1 << a1)
        second = sample.open_neighbor_mask(mid) & a_bits & ~(1 << a1)
        for a2 in bit_indices(second):
            witnesses.add(mid ^ (1 << a2))
    if len(witnesses) < 2 * partition.m:
        return None
    return GoodnessCertificate(v, frozenset(witnesses))


def build_good_map(
    sample: PercolationSample, partition: CoordinatePartition
) -> Union[VertexMap, FailureReport]:
    """f(x) = the good vertex differing from x in exactly one
    B-coordinate, lowest coordinate winning; x itself is not a
    candidate.  Returns the bad-vertex report when any x has none."""
    nv = sample.shape.vertex_count
    b_coords = sorted(partition.b_coords)
    cache = np.full(nv, -1, dtype=np.int8)
    image = np.zeros(nv, dtype=np.int64)
    bad = []
    for x in range(nv):
        chosen = -1
        for b in b_coords:
            cand = x ^ (1 << b)
            state = cache[cand]
            if state < 0:
                state = 1 if is_good(sample, cand, partition) else 0
                cache[cand] = state
            if state:
                chosen = cand
                break
        if chosen < 0:
            bad.append(x)
        else:
            image[x] = chosen
    if bad:
        return FailureReport(np.array(bad, dtype=np.int64))
    return VertexMap(image)


def find_open_path(
    sample: PercolationSample, spec: PathFamilySpec
) -> Optional[tuple[int, ...]]:
    """First fully open path of the family in enumeration order."""
    for path in enumerate_paths(spec):
        if all(sample.edge_open(path[i], path[i + 1]) for i in range(len(path) - 1)):
            return path
    return None


@dataclass(frozen=True)
class MomentEstimate:
    """First and second moments of the open-path count of a family.

    second_moment_exact is None when the family was too large for the
    pairwise shared-edge census; ratio_bound is the analytic bound on
    (second moment)/(mean^2) and is always available.
    """

    family_size: int
    path_length: int
    mean: float
    second_moment_exact: Optional[float]
    ratio_bound: float


def _ratio_bound(spec: PathFamilySpec, p: float) -> float:
    if p <= 0.0:
        return math.inf
    n = spec.shape.n
    if isinstance(spec, NeighborRetraceSpec):
        return 1.0 + 1.0 / (n * p * p)
    if isinstance(spec, GoodPairSpec):
        m, l = spec.partition.m, spec.partition.l
        series = sum((p * p * m) ** (-k) for k in range(l))
        return series + m ** (-l) * p ** (-spec.path_length)
    raise TypeError(f"unknown path family {type(spec).__name__}")


def analytic_moments(
    spec: PathFamilySpec, p: float, *, census_cap: int = SECOND_MOMENT_CAP
) -> MomentEstimate:
    """Exact mean, and exact second moment by pairwise shared-edge
    census when the family size is within census_cap."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    size = spec.family_size
    length = spec.path_length
    mean = size * p**length
    if p == 0.0:
        return MomentEstimate(size, length, 0.0, 0.0, _ratio_bound(spec, p))
    if size > census_cap:
        return MomentEstimate(size, length, mean, None, _ratio_bound(spec, p))

    shape = spec.shape
    rows, cols = [], []
    edge_ids: dict[int, int] = {}
    for pi, path in enumerate(enumerate_paths(spec)):
        for e in path_edge_indices(shape, path):
            rows.append(pi)
            cols.append(edge_ids.setdefault(e, len(edge_ids)))
    member = coo_matrix(
        (np.ones(len(rows), dtype=np.int32), (rows, cols)),
        shape=(size, len(edge_ids)),
    ).tocsr()
    shared = member @ member.T  # pairwise shared-edge counts, sparse
    s = shared.tocoo().data
    second = float(
        (size * size - len(s)) * p ** (2 * length)
        + np.power(p, 2 * length - s.astype(np.float64)).sum()
    )
    return MomentEstimate(size, length, mean, second, _ratio_bound(spec, p))


def mc_open_path_count(
    spec: PathFamilySpec,
    model: PercModel,
    trials: int,
    base_seed: int,
    *,
    chunk: int = 512,
) -> np.ndarray:
    """Open-path count of the family across independent samples.

    Trial t uses seed mix64(base_seed, t), so any single trial can be
    reproduced as a full percolation sample with that seed.  Only the
    draws the family actually touches are evaluated.
    """
    shape = spec.shape
    paths = list(enumerate_paths(spec))
    per_path_edges = [path_edge_indices(shape, path) for path in paths]
    edge_ids = np.unique(np.array(per_path_edges, dtype=np.int64).ravel())
    edge_pos = {int(e): k for k, e in enumerate(edge_ids)}
    epaths = np.array(
        [[edge_pos[e] for e in row] for row in per_path_edges], dtype=np.int64
    )

    if model.has_site_draws:
        offset = vertex_draw_offset(shape)
        vert_ids = np.unique(np.array(paths, dtype=np.int64).ravel())
        vert_pos = {int(v): k for k, v in enumerate(vert_ids)}
        vpaths = np.array(
            [[vert_pos[v] for v in row] for row in paths], dtype=np.int64
        )
        vdraw_ids = vert_ids + offset

    seeds = np.array([mix64(base_seed, t) for t in range(trials)], dtype=np.uint64)
    counts = np.empty(trials, dtype=np.int64)
    for start in range(0, trials, chunk):
        stop = min(start + chunk, trials)
        block = seeds[start:stop]
        open_edges = _open_grid(block, edge_ids, model.bond_threshold)
        ok = open_edges[:, epaths].all(axis=2)
        if model.has_site_draws:
            present = _open_grid(block, vdraw_ids, model.site_threshold)
            ok &= present[:, vpaths].all(axis=2)
        counts[start:stop] = ok.sum(axis=1)
    return counts


def _open_grid(seeds: np.ndarray, indices: np.ndarray, threshold: int) -> np.ndarray:
    if threshold >= ALWAYS:
        return np.ones((len(seeds), len(indices)), dtype=bool)
    if threshold <= 0:
        return np.zeros((len(seeds), len(indices)), dtype=bool)
    return _mix64_grid(seeds, indices) < np.uint64(threshold)


@dataclass
class NeighborDistanceStats:
    """Histogram of open-graph distances between cube-adjacent pairs
    drawn from the giant component.  Distances above the cutoff land in
    overflow; the median uses cutoff+1 as the overflow sentinel."""

    requested: int
    pairs: int
    cutoff: int
    hist: tuple[int, ...]
    overflow: int
    frac_le_cutoff: float
    median: int
    exhaustive: bool


def neighbor_distance_stats(
    sample: PercolationSample,
    num_pairs: int,
    cutoff: int,
    seed: int,
    *,
    giant: Optional[np.ndarray] = None,
) -> NeighborDistanceStats:
    """Distances between uniformly drawn adjacent pairs whose endpoints
    both lie in the giant component.

    When fewer eligible pairs exist than requested, every eligible pair
    is measured once instead (flagged exhaustive).  No eligible pairs at
    all raises GiantTooSmall.  Pass giant (a boolean membership mask) to
    reuse an existing component labeling.
    """
    if num_pairs <= 0:
        raise ValueError("num_pairs must be positive")
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    shape = sample.shape
    nv, n = shape.vertex_count, shape.n
    if giant is None:
        giant = components(sample).giant_mask()

    idx = np.arange(nv)
    eligible_count = 0
    for c in range(n):
        base = idx[(idx >> c) & 1 == 0]
        eligible_count += int((giant[base] & giant[base | (1 << c)]).sum())
    if eligible_count == 0:
        raise GiantTooSmall("no cube edge has both endpoints in the giant component")

    pairs: list[tuple[int, int]] = []
    if eligible_count < num_pairs:
        exhaustive = True
        for c in range(n):
            base = idx[(idx >> c) & 1 == 0]
            ok = giant[base] & giant[base | (1 << c)]
            for u in base[ok]:
                pairs.append((int(u), int(u) ^ (1 << c)))
    else:
        exhaustive = False
        stream = CounterStream(seed)
        while len(pairs) < num_pairs:
            u = stream.below(nv)
            w = u ^ (1 << stream.below(n))
            if giant[u] and giant[w]:
                pairs.append((u, w))

    hist = [0] * (cutoff + 1)
    overflow = 0
    values = []
    for u, w in pairs:
        d = bounded_distance(sample, u, w, cutoff=cutoff)
        if d is None:
            overflow += 1
            values.append(cutoff + 1)
        else:
            hist[d] += 1
            values.append(d)
    total = len(pairs)
    values.sort()
    return NeighborDistanceStats(
        requested=num_pairs,
        pairs=total,
        cutoff=cutoff,
        hist=tuple(hist),
        overflow=overflow,
        frac_le_cutoff=(total - overflow) / total,
        median=values[(total - 1) // 2],
        exhaustive=exhaustive,
    )
