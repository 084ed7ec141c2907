"""Graph metrics over percolation samples: BFS distances, connected
components, and metric distortion of vertex maps.

Distortion here is the non-symmetric kind: for f mapping the full cube
into a sample, D+ is the worst stretch max(1, sup d_Y/d_X) and, because
d_Y is subadditive along cube paths, the supremum over adjacent source
pairs equals the supremum over all pairs, so D+ is computed on edges
only.  D- is the worst contraction inf max(1, d_Y)/d_X over distinct
pairs.  D = D+ / D-.  Maps whose images straddle several components get
an infinite report rather than an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _scipy_components

from .errors import CapExceeded, GiantTooSmall, SourceAbsent, TooLarge
from .hypercube import CubeShape, hamming
from .percolation import CounterStream, PercolationSample

EXACT_CAP_DEFAULT = 12
BRUTE_FORCE_CAP = 3


@dataclass
class DistanceField:
    """BFS distances from one source; -1 marks not reached (within cutoff)."""

    source: int
    cutoff: Optional[int]
    dist: np.ndarray

    def distance(self, v: int) -> Optional[int]:
        d = int(self.dist[v])
        return None if d < 0 else d

    @property
    def reached_count(self) -> int:
        return int((self.dist >= 0).sum())


def bfs(sample: PercolationSample, source: int, cutoff: Optional[int] = None) -> DistanceField:
    if not sample.vertex_present(source):
        raise SourceAbsent(f"vertex {source} is not present in the sample")
    masks = sample.open_neighbor_masks_array()
    dist = np.full(sample.shape.vertex_count, -1, dtype=np.int32)
    dist[source] = 0
    frontier = [source]
    d = 0
    while frontier and (cutoff is None or d < cutoff):
        nxt = []
        for w in frontier:
            m = int(masks[w])
            while m:
                low = m & -m
                m ^= low
                x = w ^ low
                if dist[x] < 0:
                    dist[x] = d + 1
                    nxt.append(x)
        frontier = nxt
        d += 1
    return DistanceField(source, cutoff, dist)


def bounded_distance(
    sample: PercolationSample,
    u: int,
    v: int,
    cutoff: Optional[int] = None,
) -> Optional[int]:
    """Open-graph distance between u and v, or None when it exceeds the
    cutoff (or no path exists).  Bidirectional ball growing."""
    if u == v:
        return 0
    if not (sample.vertex_present(u) and sample.vertex_present(v)):
        return None
    masks = sample.open_neighbor_masks_array()
    du = {u: 0}
    dv = {v: 0}
    fu, fv = [u], [v]
    ru = rv = 0
    best = math.inf
    while fu and fv:
        if best <= ru + rv + 1:
            break
        if cutoff is not None and ru + rv + 1 > cutoff:
            break
        if len(fu) <= len(fv):
            frontier, dthis, dother, r = fu, du, dv, ru
        else:
            frontier, dthis, dother, r = fv, dv, du, rv
        nxt = []
        for w in frontier:
            m = int(masks[w])
            base = dthis[w]
            while m:
                low = m & -m
                m ^= low
                x = w ^ low
                if x in dthis:
                    continue
                dthis[x] = base + 1
                other = dother.get(x)
                if other is not None and base + 1 + other < best:
                    best = base + 1 + other
                nxt.append(x)
        if dthis is du:
            fu, ru = nxt, ru + 1
        else:
            fv, rv = nxt, rv + 1
    if not math.isfinite(best):
        return None
    if cutoff is not None and best > cutoff:
        return None
    return int(best)


@dataclass
class ComponentLabeling:
    """Canonical component labels: each component is named by its
    smallest vertex.  Absent vertices carry label -1."""

    labels: np.ndarray
    comp_ids: np.ndarray
    comp_sizes: np.ndarray
    giant_label: int

    @property
    def n_components(self) -> int:
        return len(self.comp_ids)

    def size_of(self, label: int) -> int:
        k = np.searchsorted(self.comp_ids, label)
        if k >= len(self.comp_ids) or self.comp_ids[k] != label:
            raise KeyError(f"no component labeled {label}")
        return int(self.comp_sizes[k])

    @property
    def giant_size(self) -> int:
        return self.size_of(self.giant_label) if self.giant_label >= 0 else 0

    def giant_mask(self) -> np.ndarray:
        return self.labels == self.giant_label


def _component_roots(sample: PercolationSample) -> np.ndarray:
    """int32 per-vertex root, each component rooted at its smallest vertex.

    A streaming union-find when the jit kernel is available (the peak
    footprint is one parent array); otherwise a hand-packed csr for
    scipy's labeling, float64 data so no cast copy happens inside,
    renamed to smallest-member roots afterwards.
    """
    nv = sample.shape.vertex_count
    if _numba is not None:
        parent = np.arange(nv, dtype=np.int64)
        for base, other in sample.open_edge_endpoints():
            _union_edges_jit(parent, base, other)
        _flatten_parents_jit(parent)
        return parent.astype(np.int32)
    total = sample.open_edge_count()
    row = np.empty(total, dtype=np.int32)
    col = np.empty(total, dtype=np.int32)
    k = 0
    for base, other in sample.open_edge_endpoints():
        row[k : k + len(base)] = base
        col[k : k + len(base)] = other
        k += len(base)
    graph = coo_matrix(
        (np.ones(total, dtype=np.float64), (row, col)), shape=(nv, nv)
    ).tocsr()
    del row, col
    ncomp, raw = _scipy_components(graph, directed=False)
    del graph
    # reversed assignment leaves each id's first (smallest) vertex
    canon = np.empty(ncomp, dtype=np.int32)
    canon[raw[::-1]] = np.arange(nv - 1, -1, -1, dtype=np.int32)
    return canon[raw]


def components(sample: PercolationSample) -> ComponentLabeling:
    """Exact labeling of the open graph's connected components."""
    nv = sample.shape.vertex_count
    present = sample.present_array()
    if not present.any():
        return ComponentLabeling(
            np.full(nv, -1, dtype=np.int32),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            -1,
        )
    labels = _component_roots(sample)
    if sample.model.has_site_draws:
        labels = np.where(present, labels, np.int32(-1))
        sizes_full = np.bincount(labels[labels >= 0], minlength=nv)
    else:
        sizes_full = np.bincount(labels, minlength=nv)
    comp_ids = np.nonzero(sizes_full)[0].astype(np.int64)
    comp_sizes = sizes_full[comp_ids]
    biggest = comp_sizes.max()
    giant = int(comp_ids[comp_sizes == biggest].min())
    return ComponentLabeling(labels, comp_ids, comp_sizes, giant)


@dataclass
class VertexMap:
    """Total map from cube vertices to sample vertices, as an array."""

    image: np.ndarray

    def __post_init__(self) -> None:
        self.image = np.asarray(self.image, dtype=np.int64)

    def __getitem__(self, v: int) -> int:
        return int(self.image[v])

    def __len__(self) -> int:
        return len(self.image)

    @classmethod
    def identity(cls, shape: CubeShape) -> "VertexMap":
        return cls(np.arange(shape.vertex_count, dtype=np.int64))

    @classmethod
    def constant(cls, shape: CubeShape, v: int) -> "VertexMap":
        return cls(np.full(shape.vertex_count, v, dtype=np.int64))


@dataclass
class DistortionReport:
    d_plus: float
    d_minus: float
    distortion: float
    witness_plus: Optional[tuple[int, int]]
    witness_minus: Optional[tuple[int, int]]
    exactness: str  # "exact" or "sampled"
    pairs_evaluated: Optional[int]
    infinite: bool = False


def _infinite_report(exactness: str, witness: tuple[int, int]) -> DistortionReport:
    return DistortionReport(
        d_plus=math.inf,
        d_minus=0.0,
        distortion=math.inf,
        witness_plus=witness,
        witness_minus=None,
        exactness=exactness,
        pairs_evaluated=None,
        infinite=True,
    )


def _disconnection_witness(labeling: ComponentLabeling, images: np.ndarray):
    """A pair of source vertices whose images live in different components,
    or None when all images share one component."""
    labs = labeling.labels[images]
    first = labs[0]
    bad = np.nonzero(labs != first)[0]
    if len(bad) == 0 and first >= 0:
        return None
    other = int(bad[0]) if len(bad) else 0
    return (0, other)


def evaluate_distortion(
    sample: PercolationSample,
    vmap: VertexMap,
    mode: str = "exact",
    *,
    pair_count: int = 2048,
    seed: int = 0,
    exact_cap: int = EXACT_CAP_DEFAULT,
) -> DistortionReport:
    """Distortion of vmap from the full cube metric into the sample.

    Exact mode runs BFS from every distinct image and scans all pairs;
    it is capped at n <= exact_cap.  Sampled mode evaluates pair_count
    adjacent pairs for the stretch side and pair_count arbitrary pairs
    for the contraction side, giving a valid lower bound on D.
    """
    n = sample.shape.n
    nv = sample.shape.vertex_count
    img = vmap.image
    if len(img) != nv:
        raise ValueError("map length does not match the cube")
    present = sample.present_array()
    if not present[img].all():
        missing = int(np.nonzero(~present[img])[0][0])
        raise ValueError(f"image of vertex {missing} is not present in the sample")

    labeling = components(sample)
    witness = _disconnection_witness(labeling, img)
    if witness is not None:
        return _infinite_report(mode, witness)

    if mode == "exact":
        if n > exact_cap:
            raise CapExceeded(f"exact mode capped at n={exact_cap}, got n={n}")
        return _evaluate_exact(sample, img)
    if mode == "sampled":
        return _evaluate_sampled(sample, img, pair_count, seed)
    raise ValueError(f"unknown mode {mode!r}")


def _evaluate_exact(sample: PercolationSample, img: np.ndarray) -> DistortionReport:
    n = sample.shape.n
    nv = sample.shape.vertex_count
    distinct = np.unique(img)
    dmat = np.empty((len(distinct), nv), dtype=np.int32)
    for k, src in enumerate(distinct):
        dmat[k] = bfs(sample, int(src)).dist
    img_idx = np.searchsorted(distinct, img)

    # stretch over cube edges only
    all_v = np.arange(nv)
    best_plus = -1
    wit_plus = (0, 0)
    for c in range(n):
        base = all_v[(all_v >> c) & 1 == 0]
        other = base | (1 << c)
        dvals = dmat[img_idx[base], img[other]]
        k = int(np.argmax(dvals))
        if int(dvals[k]) > best_plus:
            best_plus = int(dvals[k])
            wit_plus = (int(base[k]), int(other[k]))

    # contraction over all pairs
    best_minus = math.inf
    wit_minus = (0, 1)
    for a in range(nv - 1):
        b = np.arange(a + 1, nv)
        dy = dmat[img_idx[a], img[b]].astype(np.float64)
        np.maximum(dy, 1.0, out=dy)
        dx = np.bitwise_count(np.uint64(a) ^ b.astype(np.uint64)).astype(np.float64)
        ratios = dy / dx
        k = int(np.argmin(ratios))
        if float(ratios[k]) < best_minus:
            best_minus = float(ratios[k])
            wit_minus = (a, int(b[k]))

    d_plus = max(1.0, float(best_plus))
    d_minus = float(best_minus)
    return DistortionReport(
        d_plus=d_plus,
        d_minus=d_minus,
        distortion=d_plus / d_minus,
        witness_plus=wit_plus,
        witness_minus=wit_minus,
        exactness="exact",
        pairs_evaluated=None,
    )


def _evaluate_sampled(
    sample: PercolationSample, img: np.ndarray, pair_count: int, seed: int
) -> DistortionReport:
    n = sample.shape.n
    nv = sample.shape.vertex_count
    stream = CounterStream(seed)

    best_plus = 0
    wit_plus = None
    for _ in range(pair_count):
        a = stream.below(nv)
        c = stream.below(n)
        b = a ^ (1 << c)
        dy = bounded_distance(sample, int(img[a]), int(img[b]))
        if dy is None:  # same component is pre-checked; defensive only
            return _infinite_report("sampled", (a, b))
        if dy > best_plus:
            best_plus = dy
            wit_plus = (a, b)

    best_minus = math.inf
    wit_minus = None
    for _ in range(pair_count):
        a = stream.below(nv)
        b = stream.below(nv)
        while b == a:
            b = stream.below(nv)
        dy = bounded_distance(sample, int(img[a]), int(img[b]))
        if dy is None:
            return _infinite_report("sampled", (a, b))
        ratio = max(1.0, float(dy)) / float(hamming(a, b))
        if ratio < best_minus:
            best_minus = ratio
            wit_minus = (a, b)

    d_plus = max(1.0, float(best_plus))
    d_minus = float(best_minus)
    return DistortionReport(
        d_plus=d_plus,
        d_minus=d_minus,
        distortion=d_plus / d_minus,
        witness_plus=wit_plus,
        witness_minus=wit_minus,
        exactness="sampled",
        pairs_evaluated=2 * pair_count,
    )


def diameter_lower_bound(sample: PercolationSample, label: Optional[int] = None) -> int:
    """Double-sweep BFS eccentricity bound inside one component
    (the giant by default)."""
    labeling = components(sample)
    comp = labeling.giant_label if label is None else label
    if comp < 0:
        raise GiantTooSmall("sample has no present vertices")
    inside = labeling.labels == comp
    first = bfs(sample, int(comp))
    d1 = np.where(inside, first.dist, -1)
    far = int(np.argmax(d1))
    second = bfs(sample, far)
    d2 = np.where(inside, second.dist, -1)
    return int(d2.max())


# ---------------------------------------------------------------------------
# exhaustive search for the least-distortion map into the giant component


def _try_import_numba():
    try:
        import numba

        return numba
    except ImportError:
        return None


_numba = _try_import_numba()

if _numba is not None:

    @_numba.njit(cache=False)
    def _scan_maps_jit(total, T, V, dy_raw, dy_clamped, hamm, ea, eb):  # pragma: no cover
        digits = np.zeros(V, dtype=np.int64)
        best_d = 1.0e300
        best_idx = -1
        best_plus = 0.0
        best_minus = 0.0
        for mid in range(total):
            mx = 1.0
            for k in range(len(ea)):
                d = dy_raw[digits[ea[k]] * T + digits[eb[k]]]
                if d > mx:
                    mx = d
            mn = 1.0e300
            for a in range(V):
                for b in range(a + 1, V):
                    r = dy_clamped[digits[a] * T + digits[b]] / hamm[a * V + b]
                    if r < mn:
                        mn = r
            D = mx / mn
            if D < best_d:
                best_d = D
                best_idx = mid
                best_plus = mx
                best_minus = mn
            v = V - 1
            while v >= 0:
                digits[v] += 1
                if digits[v] < T:
                    break
                digits[v] = 0
                v -= 1
        return best_idx, best_d, best_plus, best_minus

    @_numba.njit(cache=False)
    def _union_edges_jit(parent, base, other):  # pragma: no cover
        for i in range(len(base)):
            x = base[i]
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            y = other[i]
            while parent[y] != y:
                parent[y] = parent[parent[y]]
                y = parent[y]
            if x < y:
                parent[y] = x
            elif y < x:
                parent[x] = y

    @_numba.njit(cache=False)
    def _flatten_parents_jit(parent):  # pragma: no cover
        # links always point at smaller ids, so one ascending sweep
        # leaves every entry naming its root
        for v in range(len(parent)):
            parent[v] = parent[parent[v]]


def _scan_maps_numpy(total, T, V, dy_raw, dy_clamped, hamm, ea, eb, chunk=1 << 18):
    """Chunked vectorized scan; identical arithmetic to the jit path."""
    powers = T ** np.arange(V - 1, -1, -1, dtype=np.int64)
    best = (math.inf, -1, 0.0, 0.0)
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        ids = np.arange(start, stop, dtype=np.int64)
        digits = (ids[:, None] // powers[None, :]) % T
        mx = np.ones(len(ids))
        for k in range(len(ea)):
            np.maximum(mx, dy_raw[digits[:, ea[k]] * T + digits[:, eb[k]]], out=mx)
        mn = np.full(len(ids), math.inf)
        for a in range(V):
            for b in range(a + 1, V):
                np.minimum(
                    mn, dy_clamped[digits[:, a] * T + digits[:, b]] / hamm[a * V + b], out=mn
                )
        D = mx / mn
        k = int(np.argmin(D))
        if float(D[k]) < best[0]:
            best = (float(D[k]), start + k, float(mx[k]), float(mn[k]))
    return best[1], best[0], best[2], best[3]


def brute_force_min_distortion(
    sample: PercolationSample,
) -> tuple[VertexMap, DistortionReport]:
    """Exhaustive minimum-distortion map into the giant component.

    Enumerates every map from the cube into the giant in lexicographic
    order and keeps the first optimum.  Enforced for n <= 3 only.
    """
    n = sample.shape.n
    if n > BRUTE_FORCE_CAP:
        raise TooLarge(f"exhaustive map search capped at n={BRUTE_FORCE_CAP}")
    nv = sample.shape.vertex_count
    labeling = components(sample)
    if labeling.giant_label < 0:
        raise GiantTooSmall("sample has no present vertices")
    target = np.nonzero(labeling.labels == labeling.giant_label)[0].astype(np.int64)
    T = len(target)

    dy = np.empty((T, T), dtype=np.float64)
    for k, src in enumerate(target):
        field = bfs(sample, int(src))
        dy[k] = field.dist[target]
    dy_raw = dy.ravel().copy()
    dy_clamped = np.maximum(dy, 1.0).ravel()

    hamm = np.empty(nv * nv, dtype=np.float64)
    for a in range(nv):
        for b in range(nv):
            hamm[a * nv + b] = hamming(a, b) or 1
    ea, eb = [], []
    for a in range(nv):
        for c in range(n):
            b = a | (1 << c)
            if b != a and (a >> c) & 1 == 0:
                ea.append(a)
                eb.append(b)
    ea = np.array(ea, dtype=np.int64)
    eb = np.array(eb, dtype=np.int64)

    total = T**nv
    if _numba is not None:
        idx, best_d, best_plus, best_minus = _scan_maps_jit(
            total, T, nv, dy_raw, dy_clamped, hamm, ea, eb
        )
    else:
        idx, best_d, best_plus, best_minus = _scan_maps_numpy(
            total, T, nv, dy_raw, dy_clamped, hamm, ea, eb
        )

    digits = np.empty(nv, dtype=np.int64)
    rem = int(idx)
    for v in range(nv - 1, -1, -1):
        digits[v] = rem % T
        rem //= T
    best_map = VertexMap(target[digits])
    report = evaluate_distortion(sample, best_map, "exact")
    return best_map, report
