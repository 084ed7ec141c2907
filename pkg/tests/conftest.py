"""Shared fixtures and independent oracles.

The oracles here are deliberately naive (dict BFS, flood fill, networkx
cycle enumeration) so library results are checked against code that
shares no implementation with the package.
"""

from __future__ import annotations

from collections import deque

import networkx as nx
import pytest

from cubeperc.hypercube import CubeShape
from cubeperc.percolation import PercModel, sample

# one line per acceptance gate, echoed at the end of the run so the
# verdicts survive pytest's output capture
GATE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if GATE_LINES:
        terminalreporter.section("acceptance gates")
        for line in GATE_LINES:
            terminalreporter.write_line(line)


def open_edge_set(sm) -> set[tuple[int, int]]:
    """All open edges as (min, max) vertex pairs, via the scalar API."""
    out = set()
    n = sm.shape.n
    for v in range(sm.shape.vertex_count):
        for c in range(n):
            w = v ^ (1 << c)
            if v < w and sm.edge_open(v, w):
                out.add((v, w))
    return out


def oracle_bfs(sm, source: int) -> dict[int, int]:
    """Plain dict BFS over the open graph."""
    dist = {source: 0}
    q = deque([source])
    n = sm.shape.n
    while q:
        v = q.popleft()
        for c in range(n):
            w = v ^ (1 << c)
            if w not in dist and sm.edge_open(v, w):
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def oracle_components(sm) -> list[set[int]]:
    """Flood fill over present vertices; singletons included."""
    seen = set()
    comps = []
    for v in range(sm.shape.vertex_count):
        if v in seen or not sm.vertex_present(v):
            continue
        comp = {v}
        q = deque([v])
        while q:
            u = q.popleft()
            for c in range(sm.shape.n):
                w = u ^ (1 << c)
                if w not in comp and sm.edge_open(u, w):
                    comp.add(w)
                    q.append(w)
        seen |= comp
        comps.append(comp)
    return comps


def open_graph(sm) -> nx.Graph:
    g = nx.Graph()
    for v in range(sm.shape.vertex_count):
        if sm.vertex_present(v):
            g.add_node(v)
    g.add_edges_from(open_edge_set(sm))
    return g


def oracle_cycles_through(g: nx.Graph, v: int, max_length: int) -> set[tuple[int, ...]]:
    """Canonical forms of every simple cycle through v, via networkx."""
    found = set()
    for cyc in nx.simple_cycles(g, length_bound=max_length):
        if v in cyc and len(cyc) >= 3:
            best = None
            for seq in (cyc, cyc[::-1]):
                for r in range(len(seq)):
                    rot = tuple(seq[r:] + seq[:r])
                    if best is None or rot < best:
                        best = rot
            found.add(best)
    return found


@pytest.fixture
def full3():
    return sample(CubeShape(3), PercModel.bond(1.0), 0)


@pytest.fixture
def full4():
    return sample(CubeShape(4), PercModel.bond(1.0), 0)


@pytest.fixture
def broken_square():
    """n=2, p=0.9, seed 6: the 4-cycle with exactly edge {2,3} closed."""
    sm = sample(CubeShape(2), PercModel.bond(0.9), 6)
    assert not sm.edge_open(2, 3) and sm.edge_open(0, 1)
    return sm


@pytest.fixture
def forest4():
    """n=4, p=0.25, seed 0: acyclic open graph, largest component 5 vertices."""
    sm = sample(CubeShape(4), PercModel.bond(0.25), 0)
    assert nx.is_forest(open_graph(sm))
    return sm
