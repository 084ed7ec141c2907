"""Seeded Bernoulli percolation on the hypercube.

Openness is a pure function of (seed, index): an edge with linear index
k is open when mix64(seed, k) < floor(p * 2^64), where mix64 is the
SplitMix64 finalizer applied to (seed XOR golden-ratio-scrambled index).
Vertex draws for site and mixed models use the disjoint index space
starting at n * 2^(n-1).  Everything is bit-exact across platforms and
identical between the materialized and lazy query paths; p = 1 yields
threshold 2^64 which no 64-bit draw can reach, i.e. always open.

Serialized form (little-endian):

    magic "CPRC" | version u16 | n u8 | model tag u8 (0 bond, 1 site,
    2 mixed) | threshold u64 per p field (bond: p_bond; site: p_site;
    mixed: p_bond then p_site; 0xFFFFFFFFFFFFFFFF denotes p = 1) |
    seed u64 | edge-draw bitset | vertex bitset (site/mixed only)

Bitsets are packed ascending-index, least significant bit first within
each byte.  The edge bitset records draw outcomes; effective openness
for site/mixed also requires both endpoints present.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import (
    BadMagic,
    DimensionOverCap,
    LengthMismatch,
    NotAdjacent,
    VersionMismatch,
)
from .hypercube import CubeShape, edge_between, edge_from_index

M64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB

ALWAYS = 1 << 64  # threshold that every draw is below
THRESHOLD_SENTINEL = M64  # wire encoding of ALWAYS

DEFAULT_DIMENSION_CAP = 26

FORMAT_MAGIC = b"CPRC"
FORMAT_VERSION = 1

_CHUNK = 1 << 21  # draws per vectorized block; keeps peak memory modest


def mix64(seed: int, index: int) -> int:
    z = (seed ^ ((index * GOLDEN) & M64)) & M64
    z = ((z ^ (z >> 30)) * MIX_A) & M64
    z = ((z ^ (z >> 27)) * MIX_B) & M64
    return z ^ (z >> 31)


def _mix64_array(seed: int, indices: np.ndarray) -> np.ndarray:
    z = (indices.astype(np.uint64) * np.uint64(GOLDEN)) ^ np.uint64(seed & M64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_A)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_B)
    return z ^ (z >> np.uint64(31))


def _mix64_grid(seeds: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """mix64 over the outer product: rows are seeds, columns are indices."""
    z = (indices.astype(np.uint64) * np.uint64(GOLDEN))[None, :] ^ seeds.astype(
        np.uint64
    )[:, None]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_A)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_B)
    return z ^ (z >> np.uint64(31))


def draws_below(seed: int, indices: np.ndarray, threshold: int) -> np.ndarray:
    """Boolean array: draw at each index succeeds against threshold."""
    if threshold >= ALWAYS:
        return np.ones(len(indices), dtype=bool)
    if threshold <= 0:
        return np.zeros(len(indices), dtype=bool)
    return _mix64_array(seed, indices) < np.uint64(threshold)


def quantize_probability(p: float) -> int:
    """floor(p * 2^64), exact: scaling a double by 2^64 is lossless."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return int(p * (2.0**64)) if p < 1.0 else ALWAYS


class CounterStream:
    """Deterministic value stream; draw k is mix64(seed, k).

    Used wherever an experiment needs auxiliary randomness (pair
    sampling, random maps) so results depend only on the seed.
    """

    def __init__(self, seed: int):
        self.seed = seed & M64
        self.counter = 0

    def next_u64(self) -> int:
        v = mix64(self.seed, self.counter)
        self.counter += 1
        return v

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), exact via rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        if bound & (bound - 1) == 0:
            return self.next_u64() & (bound - 1)
        limit = (ALWAYS // bound) * bound
        while True:
            v = self.next_u64()
            if v < limit:
                return v % bound

    def chance(self, p: float) -> bool:
        t = quantize_probability(p)
        return self.next_u64() < t


@dataclass(frozen=True)
class PercModel:
    """Percolation model: bond, site, or mixed, with quantized thresholds.

    Thresholds are the source of truth (floor(p * 2^64), with 2^64 for
    p = 1); the float accessors are for display.
    """

    kind: str
    bond_threshold: int
    site_threshold: int

    _KINDS = ("bond", "site", "mixed")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        for t in (self.bond_threshold, self.site_threshold):
            if not (0 <= t <= ALWAYS):
                raise ValueError("threshold out of range")

    @classmethod
    def bond(cls, p: float) -> "PercModel":
        return cls("bond", quantize_probability(p), ALWAYS)

    @classmethod
    def site(cls, p: float) -> "PercModel":
        return cls("site", ALWAYS, quantize_probability(p))

    @classmethod
    def mixed(cls, p_bond: float, p_site: float) -> "PercModel":
        return cls("mixed", quantize_probability(p_bond), quantize_probability(p_site))

    @property
    def p_bond(self) -> float:
        return 1.0 if self.bond_threshold >= ALWAYS else self.bond_threshold / 2.0**64

    @property
    def p_site(self) -> float:
        return 1.0 if self.site_threshold >= ALWAYS else self.site_threshold / 2.0**64

    @property
    def has_site_draws(self) -> bool:
        return self.kind in ("site", "mixed")

    @property
    def tag(self) -> int:
        return self._KINDS.index(self.kind)


def vertex_draw_offset(shape: CubeShape) -> int:
    return shape.edge_count


class PercolationSample:
    """One percolation outcome for (shape, model, seed).

    Materialized samples hold packed draw bitsets; lazy samples answer
    each query by hashing.  Both give identical answers.
    """

    def __init__(
        self,
        shape: CubeShape,
        model: PercModel,
        seed: int,
        edge_bits: Optional[np.ndarray] = None,
        vertex_bits: Optional[np.ndarray] = None,
    ):
        self.shape = shape
        self.model = model
        self.seed = seed & M64
        self._edge_bits = edge_bits
        self._vertex_bits = vertex_bits
        self._present_cache: Optional[np.ndarray] = None
        self._mask_cache: Optional[np.ndarray] = None

    # -- construction -------------------------------------------------

    @property
    def mode(self) -> str:
        return "materialized" if self._edge_bits is not None else "lazy"

    def materialize(self) -> "PercolationSample":
        if self.mode == "materialized":
            return self
        return _materialize(self.shape, self.model, self.seed)

    # -- single queries ------------------------------------------------

    def _edge_draw(self, idx: int) -> bool:
        if self._edge_bits is not None:
            return bool((self._edge_bits[idx >> 3] >> (idx & 7)) & 1)
        t = self.model.bond_threshold
        return t >= ALWAYS or mix64(self.seed, idx) < t

    def _vertex_draw(self, v: int) -> bool:
        if not self.model.has_site_draws:
            return True
        if self._vertex_bits is not None:
            return bool((self._vertex_bits[v >> 3] >> (v & 7)) & 1)
        t = self.model.site_threshold
        return t >= ALWAYS or mix64(self.seed, vertex_draw_offset(self.shape) + v) < t

    def vertex_present(self, v: int) -> bool:
        return self._vertex_draw(v)

    def edge_open_index(self, idx: int) -> bool:
        if not self._edge_draw(idx):
            return False
        if self.model.has_site_draws:
            u, w = edge_from_index(self.shape, idx).endpoints()
            return self._vertex_draw(u) and self._vertex_draw(w)
        return True

    def edge_open(self, u: int, v: int) -> bool:
        e = edge_between(u, v)  # raises NotAdjacent when it must
        if not self._edge_draw(e.index(self.shape)):
            return False
        return self._vertex_draw(u) and self._vertex_draw(v)

    def open_neighbor_mask(self, v: int) -> int:
        """Bit c set iff the edge from v along coordinate c is open."""
        if self._mask_cache is not None:
            return int(self._mask_cache[v])
        if not self._vertex_draw(v):
            return 0
        mask = 0
        for c in range(self.shape.n):
            if self.edge_open(v, v ^ (1 << c)):
                mask |= 1 << c
        return mask

    def open_degree(self, v: int, coords: Optional[frozenset] = None) -> int:
        mask = self.open_neighbor_mask(v)
        if coords is not None:
            filt = 0
            for c in coords:
                filt |= 1 << c
            mask &= filt
        return mask.bit_count()

    # -- bulk views ----------------------------------------------------

    def present_array(self) -> np.ndarray:
        """Boolean presence per vertex (all True for bond)."""
        if self._present_cache is not None:
            return self._present_cache
        nv = self.shape.vertex_count
        if not self.model.has_site_draws:
            out = np.ones(nv, dtype=bool)
        elif self._vertex_bits is not None:
            out = np.unpackbits(self._vertex_bits, count=nv, bitorder="little").astype(bool)
        else:
            out = np.empty(nv, dtype=bool)
            off = vertex_draw_offset(self.shape)
            for s in range(0, nv, _CHUNK):
                e = min(s + _CHUNK, nv)
                idx = np.arange(off + s, off + e, dtype=np.uint64)
                out[s:e] = draws_below(self.seed, idx, self.model.site_threshold)
        self._present_cache = out
        return out

    def edge_draw_slice(self, coord: int) -> np.ndarray:
        """Boolean draw outcomes for all edges along one coordinate,
        indexed by compressed base id."""
        half = 1 << (self.shape.n - 1)
        start = coord * half
        if self._edge_bits is not None:
            lo, hi = start >> 3, (start + half + 7) >> 3
            bits = np.unpackbits(self._edge_bits[lo:hi], bitorder="little")
            skip = start - (lo << 3)
            return bits[skip : skip + half].astype(bool)
        out = np.empty(half, dtype=bool)
        for s in range(0, half, _CHUNK):
            e = min(s + _CHUNK, half)
            idx = np.arange(start + s, start + e, dtype=np.uint64)
            out[s:e] = draws_below(self.seed, idx, self.model.bond_threshold)
        return out

    def open_edge_endpoints(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Per coordinate, (base, other) vertex arrays of the open edges."""
        n = self.shape.n
        half = 1 << (n - 1)
        present = self.present_array() if self.model.has_site_draws else None
        for c in range(n):
            bits = self.edge_draw_slice(c)
            comp = np.nonzero(bits)[0]
            low = comp & ((1 << c) - 1)
            base = ((comp >> c) << (c + 1)) | low
            other = base | (1 << c)
            if present is not None:
                keep = present[base] & present[other]
                base, other = base[keep], other[keep]
            yield base.astype(np.int64), other.astype(np.int64)

    def open_neighbor_masks_array(self) -> np.ndarray:
        """uint32 per-vertex masks of open incident edges, cached."""
        if self._mask_cache is None:
            masks = np.zeros(self.shape.vertex_count, dtype=np.uint32)
            for c, (base, other) in enumerate(self.open_edge_endpoints()):
                bit = np.uint32(1 << c)
                masks[base] |= bit
                masks[other] |= bit
            self._mask_cache = masks
        return self._mask_cache

    def open_edge_count(self) -> int:
        total = 0
        for base, _ in self.open_edge_endpoints():
            total += len(base)
        return total

    # -- serialization ---------------------------------------------------

    def serialize(self) -> bytes:
        mat = self.materialize()
        model = mat.model
        head = bytearray()
        head += FORMAT_MAGIC
        head += struct.pack("<H", FORMAT_VERSION)
        head += struct.pack("<B", mat.shape.n)
        head += struct.pack("<B", model.tag)
        fields = {
            "bond": (model.bond_threshold,),
            "site": (model.site_threshold,),
            "mixed": (model.bond_threshold, model.site_threshold),
        }[model.kind]
        for t in fields:
            head += struct.pack("<Q", THRESHOLD_SENTINEL if t >= ALWAYS else t)
        head += struct.pack("<Q", mat.seed)
        out = bytes(head) + mat._edge_bits.tobytes()
        if model.has_site_draws:
            out += mat._vertex_bits.tobytes()
        return out


def _materialize(shape: CubeShape, model: PercModel, seed: int) -> PercolationSample:
    ne = shape.edge_count
    edge_bits = _draw_bitset(seed, 0, ne, model.bond_threshold)
    vertex_bits = None
    if model.has_site_draws:
        off = vertex_draw_offset(shape)
        vertex_bits = _draw_bitset(seed, off, shape.vertex_count, model.site_threshold)
    return PercolationSample(shape, model, seed, edge_bits, vertex_bits)


def _draw_bitset(seed: int, offset: int, count: int, threshold: int) -> np.ndarray:
    out = np.empty((count + 7) // 8, dtype=np.uint8)
    step = _CHUNK  # multiple of 8 so chunks pack on byte boundaries
    for s in range(0, count, step):
        e = min(s + step, count)
        idx = np.arange(offset + s, offset + e, dtype=np.uint64)
        bits = draws_below(seed, idx, threshold)
        out[s >> 3 : (e + 7) >> 3] = np.packbits(bits, bitorder="little")
    return out


def sample(
    shape: CubeShape,
    model: PercModel,
    seed: int,
    mode: str = "materialized",
    max_n: int = DEFAULT_DIMENSION_CAP,
) -> PercolationSample:
    """Draw one percolation sample.

    The runtime dimension cap (default 26) guards against accidental
    huge allocations; the hard cap of 30 lives in CubeShape.
    """
    if shape.n > max_n:
        raise DimensionOverCap(f"n={shape.n} exceeds runtime cap {max_n}")
    if mode == "materialized":
        return _materialize(shape, model, seed)
    if mode == "lazy":
        return PercolationSample(shape, model, seed)
    raise ValueError(f"unknown mode {mode!r}")


def deserialize(data: bytes) -> PercolationSample:
    if data[:4] != FORMAT_MAGIC:
        raise BadMagic(f"expected {FORMAT_MAGIC!r}, got {data[:4]!r}")
    if len(data) < 8:
        raise LengthMismatch("truncated header")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"unsupported version {version}")
    n = data[6]
    tag = data[7]
    if tag not in (0, 1, 2):
        raise LengthMismatch(f"unknown model tag {tag}")
    shape = CubeShape(n)
    pos = 8
    nfields = 2 if tag == 2 else 1
    if len(data) < pos + 8 * (nfields + 1):
        raise LengthMismatch("truncated thresholds")
    raw = struct.unpack_from(f"<{nfields}Q", data, pos)
    pos += 8 * nfields
    (seed,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    decode = lambda t: ALWAYS if t == THRESHOLD_SENTINEL else t
    if tag == 0:
        model = PercModel("bond", decode(raw[0]), ALWAYS)
    elif tag == 1:
        model = PercModel("site", ALWAYS, decode(raw[0]))
    else:
        model = PercModel("mixed", decode(raw[0]), decode(raw[1]))
    ne_bytes = (shape.edge_count + 7) // 8
    nv_bytes = (shape.vertex_count + 7) // 8 if tag != 0 else 0
    if len(data) != pos + ne_bytes + nv_bytes:
        raise LengthMismatch(
            f"payload is {len(data) - pos} bytes, expected {ne_bytes + nv_bytes}"
        )
    edge_bits = np.frombuffer(data, dtype=np.uint8, count=ne_bytes, offset=pos).copy()
    vertex_bits = None
    if nv_bytes:
        vertex_bits = np.frombuffer(
            data, dtype=np.uint8, count=nv_bytes, offset=pos + ne_bytes
        ).copy()
    return PercolationSample(shape, model, seed, edge_bits, vertex_bits)
