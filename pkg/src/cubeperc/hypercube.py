"""Hypercube structure: vertices, canonical edge indexing, coordinate
layouts, geodesic cycles, and the retrace path families.

Vertices of the n-cube are integers in [0, 2^n) read as bit masks, one
bit per coordinate.  Edges join vertices differing in exactly one bit.
Every edge has a canonical form (coord, base) where base has bit coord
clear, and a linear index that is bijective onto [0, n * 2^(n-1)).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import (
    AlphaOutOfRange,
    DimensionOutOfRange,
    DimensionTooSmall,
    DuplicateCoordinate,
    InvalidSpec,
    NotAdjacent,
)

HARD_DIMENSION_CAP = 30


@dataclass(frozen=True)
class CubeShape:
    """Dimension of the cube, with the hard validity cap applied."""

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or not (1 <= self.n <= HARD_DIMENSION_CAP):
            raise DimensionOutOfRange(
                f"n must be an integer in [1, {HARD_DIMENSION_CAP}], got {self.n!r}"
            )

    @property
    def vertex_count(self) -> int:
        return 1 << self.n

    @property
    def edge_count(self) -> int:
        return self.n << (self.n - 1)


def hamming(u: int, v: int) -> int:
    return (u ^ v).bit_count()


def neighbors(shape: CubeShape, v: int) -> Iterator[int]:
    """All cube neighbors of v in ascending coordinate order."""
    for c in range(shape.n):
        yield v ^ (1 << c)


def bit_indices(mask: int) -> list[int]:
    """Positions of set bits, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class EdgeId:
    """Canonical edge: coordinate flipped, plus the endpoint with that bit clear."""

    coord: int
    base: int

    def endpoints(self) -> tuple[int, int]:
        return self.base, self.base | (1 << self.coord)

    def index(self, shape: CubeShape) -> int:
        """Linear index coord * 2^(n-1) + compress(base, coord)."""
        return self.coord * (1 << (shape.n - 1)) + _compress(self.base, self.coord)


def edge_between(u: int, v: int) -> EdgeId:
    """Canonical edge joining two adjacent vertices."""
    d = u ^ v
    if d == 0 or d & (d - 1):
        raise NotAdjacent(f"vertices {u} and {v} differ in {d.bit_count()} coordinates")
    coord = d.bit_length() - 1
    return EdgeId(coord, u & ~d)


def edge_index(shape: CubeShape, u: int, v: int) -> int:
    return edge_between(u, v).index(shape)


def edge_from_index(shape: CubeShape, idx: int) -> EdgeId:
    half = 1 << (shape.n - 1)
    if not (0 <= idx < shape.n * half):
        raise ValueError(f"edge index {idx} out of range for n={shape.n}")
    coord, comp = divmod(idx, half)
    return EdgeId(coord, _expand(comp, coord))


def _compress(base: int, coord: int) -> int:
    """Delete bit `coord` from base, shifting higher bits down."""
    low = base & ((1 << coord) - 1)
    return ((base >> (coord + 1)) << coord) | low


def _expand(comp: int, coord: int) -> int:
    """Inverse of _compress: insert a zero bit at position `coord`."""
    low = comp & ((1 << coord) - 1)
    return ((comp >> coord) << (coord + 1)) | low


@dataclass(frozen=True)
class CoordinatePartition:
    """Disjoint coordinate blocks A, B, C_1..C_l plus a nonempty spare set.

    All of A, B, and each C_k have exactly m coordinates.  The blocks
    drive the good-vertex machinery: A carries the distance-2 witness
    moves, B carries the image offsets, and the C_k parameterize the
    connecting path families.
    """

    n: int
    l: int
    m: int
    a_coords: tuple[int, ...]
    b_coords: tuple[int, ...]
    c_blocks: tuple[tuple[int, ...], ...]
    spare: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise DimensionTooSmall(f"block size m={self.m} must be at least 1")
        if self.l < 1:
            raise InvalidSpec(f"need at least one C block, got l={self.l}")
        blocks = [self.a_coords, self.b_coords, *self.c_blocks]
        if len(self.c_blocks) != self.l:
            raise InvalidSpec("number of C blocks must equal l")
        for blk in blocks:
            if len(blk) != self.m:
                raise InvalidSpec("blocks A, B, C_k must all have m coordinates")
        if not self.spare:
            raise DimensionTooSmall("spare coordinate set must be nonempty")
        everything = [c for blk in blocks for c in blk] + list(self.spare)
        if len(set(everything)) != len(everything):
            raise DuplicateCoordinate("partition blocks overlap")
        if set(everything) != set(range(self.n)):
            raise InvalidSpec("partition must cover coordinates [0, n) exactly")

    @property
    def all_c_coords(self) -> frozenset[int]:
        return frozenset(c for blk in self.c_blocks for c in blk)


def choose_block_count(alpha: float) -> int:
    """Smallest l with (1 - 2*alpha) * l > 9 * alpha."""
    if not (0.0 < alpha < 0.5):
        raise AlphaOutOfRange(f"alpha must lie in (0, 1/2), got {alpha}")
    l = 1
    while (1.0 - 2.0 * alpha) * l <= 9.0 * alpha:
        l += 1
    return l


def make_partition(shape: "CubeShape | int", alpha: float) -> CoordinatePartition:
    """Ascending-coordinate layout for a given exponent alpha.

    l is the smallest integer with (1-2a)l > 9a and m = floor((n-1)/(l+2)),
    so at least one spare coordinate always remains.  Raises
    DimensionTooSmall when m would be zero.  Accepts a plain dimension in
    place of a shape: the layout arithmetic is meaningful far beyond the
    dimensions that fit in memory.
    """
    n = shape.n if isinstance(shape, CubeShape) else int(shape)
    if n < 1:
        raise DimensionOutOfRange(f"dimension must be positive, got {n}")
    l = choose_block_count(alpha)
    m = (n - 1) // (l + 2)
    if m < 1:
        raise DimensionTooSmall(
            f"n={n} cannot host l={l} blocks: m=floor((n-1)/(l+2))=0"
        )
    a = tuple(range(0, m))
    b = tuple(range(m, 2 * m))
    cs = tuple(tuple(range((k + 1) * m, (k + 2) * m)) for k in range(1, l + 1))
    spare = tuple(range((l + 2) * m, n))
    return CoordinatePartition(n, l, m, a, b, cs, spare)


def geodesic_cycle(shape: CubeShape, v: int, coords: Sequence[int]) -> list[int]:
    """Closed walk applying `coords` twice; an isometric cycle of length 2l.

    Returned as a vertex list of length 2l+1 whose last entry repeats the
    first.  Cycle distance between positions equals Hamming distance.
    """
    l = len(coords)
    if not (2 <= l <= shape.n):
        raise InvalidSpec(f"need 2 <= l <= n coordinates, got l={l}")
    if len(set(coords)) != l:
        raise DuplicateCoordinate(f"coordinates must be distinct: {coords!r}")
    for c in coords:
        if not (0 <= c < shape.n):
            raise InvalidSpec(f"coordinate {c} out of range for n={shape.n}")
    out = [v]
    cur = v
    for c in itertools.chain(coords, coords):
        cur ^= 1 << c
        out.append(cur)
    return out


def count_doubled_geodesic_cycles(shape: CubeShape, l: int) -> int:
    """Number of doubled-sequence geodesic cycles of length 2l through a vertex.

    Ordered coordinate choices n(n-1)...(n-l+1), halved for direction.
    """
    if not (2 <= l <= shape.n):
        raise InvalidSpec(f"need 2 <= l <= n, got l={l}")
    return math.perm(shape.n, l) // 2


@dataclass(frozen=True)
class NeighborRetraceSpec:
    """Paths between adjacent x, y: l fresh coordinate steps, one step in
    the differing coordinate, then the fresh steps retraced in reverse.

    Family size (n-1)(n-2)...(n-l); every path is simple with length 2l+1.
    """

    shape: CubeShape
    x: int
    y: int
    l: int

    def __post_init__(self) -> None:
        d = self.x ^ self.y
        if d == 0 or d & (d - 1):
            raise NotAdjacent(f"endpoints {self.x}, {self.y} are not adjacent")
        if not (1 <= self.l <= self.shape.n - 1):
            raise InvalidSpec(f"need 1 <= l <= n-1, got l={self.l}")

    @property
    def differing_coord(self) -> int:
        return (self.x ^ self.y).bit_length() - 1

    @property
    def path_length(self) -> int:
        return 2 * self.l + 1

    @property
    def family_size(self) -> int:
        return math.perm(self.shape.n - 1, self.l)

    def step_sequences(self) -> Iterator[tuple[int, ...]]:
        d = self.differing_coord
        avail = [c for c in range(self.shape.n) if c != d]
        for combo in itertools.permutations(avail, self.l):
            yield combo + (d,) + tuple(reversed(combo))


@dataclass(frozen=True)
class GoodPairSpec:
    """Connecting paths between two good images x and y.

    For each choice c = (c_1..c_l) drawn from the C blocks the path makes
    the l steps of c, one step in the block-B coordinate assigned to index
    i, one step in each coordinate where x and y differ (ascending), then
    retraces the l+1 leading steps in reverse.  If the distinguished
    coordinate e lands in B or in some C_k it is replaced by the
    lowest-index spare coordinate.

    x and y must differ in an odd number of coordinates, at most 7 (the
    worst case gives length 2l+9), and the differing set must avoid the
    step coordinates, otherwise the generated walks would self-intersect.
    """

    shape: CubeShape
    x: int
    y: int
    i: int
    partition: CoordinatePartition
    e: int

    def __post_init__(self) -> None:
        part = self.partition
        if part.n != self.shape.n:
            raise InvalidSpec("partition dimension does not match shape")
        if not (0 <= self.i < part.m):
            raise InvalidSpec(f"index i={self.i} out of range [0, m={part.m})")
        if not (0 <= self.e < part.n):
            raise InvalidSpec(f"coordinate e={self.e} out of range")
        diff = self.x ^ self.y
        k = diff.bit_count()
        if k == 0 or k > 7 or k % 2 == 0:
            raise InvalidSpec(
                f"endpoints must differ in an odd number of coordinates <= 7, got {k}"
            )
        step_coords = {self.b_coord()}
        for blk in self.effective_c_blocks():
            step_coords.update(blk)
        if step_coords & set(bit_indices(diff)):
            raise InvalidSpec(
                "differing coordinates collide with the step coordinates of the family"
            )

    def _substitute(self, coords: Sequence[int]) -> tuple[int, ...]:
        sub = self.partition.spare[0]
        return tuple(sub if c == self.e else c for c in coords)

    def b_coord(self) -> int:
        return self._substitute(sorted(self.partition.b_coords))[self.i]

    def effective_c_blocks(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self._substitute(sorted(blk)) for blk in self.partition.c_blocks)

    @property
    def l(self) -> int:
        return self.partition.l

    @property
    def path_length(self) -> int:
        return 2 * self.l + 2 + (self.x ^ self.y).bit_count()

    @property
    def family_size(self) -> int:
        return self.partition.m ** self.partition.l

    def step_sequences(self) -> Iterator[tuple[int, ...]]:
        b = self.b_coord()
        mid = tuple(bit_indices(self.x ^ self.y))
        for combo in itertools.product(*self.effective_c_blocks()):
            lead = combo + (b,)
            yield lead + mid + tuple(reversed(lead))


PathFamilySpec = NeighborRetraceSpec | GoodPairSpec


def enumerate_paths(spec: PathFamilySpec) -> Iterator[tuple[int, ...]]:
    """All paths of the family as vertex tuples, deterministic order.

    Each path starts at spec.x, ends at spec.y, is simple, and has
    spec.path_length edges.
    """
    for steps in spec.step_sequences():
        cur = spec.x
        path = [cur]
        for c in steps:
            cur ^= 1 << c
            path.append(cur)
        yield tuple(path)


def path_edge_indices(shape: CubeShape, path: Sequence[int]) -> tuple[int, ...]:
    """Canonical edge indices along a vertex path."""
    return tuple(edge_index(shape, path[k], path[k + 1]) for k in range(len(path) - 1))
