"""Routing in the local query model: a route may only query edges
incident to vertices already reached from one of the endpoints.

The router grows balls from both endpoints (a one-sided mode grows only
from the start, the strictest reading of the model).  Every distinct
edge-oracle call is counted exactly once; repeats hit a cache.  The
full query/settle event sequence is recorded so locality can be audited
after the fact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import SourceAbsent
from .hypercube import edge_index
from .percolation import PercolationSample

FOUND = "found"
NOT_FOUND = "not_found"
BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass
class RouteTrace:
    """Outcome of one local-model route.

    events holds ("query", side, u, w, open) and ("settle", side, w, d)
    tuples in execution order; queries counts distinct oracle calls.
    """

    x: int
    y: int
    outcome: str
    path: Optional[tuple[int, ...]]
    queries: int
    explored: int
    one_sided: bool
    radius_budget: int
    query_budget: int
    events: list[tuple] = field(default_factory=list)


def local_route(
    sample: PercolationSample,
    x: int,
    y: int,
    radius_budget: int,
    query_budget: int,
    *,
    one_sided: bool = False,
) -> RouteTrace:
    """Shortest discovered open path from x to y under the local model.

    Expansion proceeds level by level, smaller frontier first; each
    side's ball radius is capped by radius_budget.  Returns Found with
    the shortest discovered path, NotFound when a reachable set is
    exhausted without contact, or BudgetExhausted."""
    if not sample.vertex_present(x):
        raise SourceAbsent(f"route start {x} is not present")
    shape = sample.shape
    n = shape.n
    events: list[tuple] = []
    if x == y:
        return RouteTrace(
            x, y, FOUND, (x,), 0, 1, one_sided, radius_budget, query_budget, events
        )

    dist_x = {x: 0}
    dist_y = {y: 0}
    parent_x: dict[int, int] = {}
    parent_y: dict[int, int] = {}
    frontier_x, frontier_y = [x], [y]
    radius_x = radius_y = 0
    cache: dict[int, bool] = {}
    queries = 0
    best: Optional[tuple[int, int]] = None  # (length, meet vertex)
    out_of_queries = False

    def expand(side: str) -> None:
        nonlocal queries, best, out_of_queries
        nonlocal frontier_x, frontier_y, radius_x, radius_y
        if side == "x":
            frontier, dist_this, dist_other, parents = (
                frontier_x, dist_x, dist_y, parent_x,
            )
        else:
            frontier, dist_this, dist_other, parents = (
                frontier_y, dist_y, dist_x, parent_y,
            )
        nxt = []
        for u in frontier:
            for c in range(n):
                w = u ^ (1 << c)
                key = edge_index(shape, u, w)
                if key in cache:
                    is_open = cache[key]
                else:
                    if queries >= query_budget:
                        out_of_queries = True
                        break
                    is_open = sample.edge_open(u, w)
                    cache[key] = is_open
                    queries += 1
                    events.append(("query", side, u, w, is_open))
                if not is_open or w in dist_this:
                    continue
                dist_this[w] = dist_this[u] + 1
                parents[w] = u
                nxt.append(w)
                events.append(("settle", side, w, dist_this[w]))
                other = dist_other.get(w)
                if other is not None:
                    cand = dist_this[w] + other
                    if best is None or cand < best[0]:
                        best = (cand, w)
            if out_of_queries:
                break
        if side == "x":
            frontier_x = nxt
            radius_x += 1
        else:
            frontier_y = nxt
            radius_y += 1

    while True:
        if best is not None and best[0] <= radius_x + radius_y + 1:
            outcome = FOUND
            break
        can_x = bool(frontier_x) and radius_x < radius_budget
        can_y = (
            not one_sided and bool(frontier_y) and radius_y < radius_budget
        )
        if not can_x and not can_y:
            if best is not None:
                outcome = FOUND
            elif not frontier_x or (not one_sided and not frontier_y):
                outcome = NOT_FOUND  # a reachable set was exhausted
            else:
                outcome = BUDGET_EXHAUSTED
            break
        if can_x and (not can_y or len(frontier_x) <= len(frontier_y)):
            side = "x"
        else:
            side = "y"
        expand(side)
        if out_of_queries:
            outcome = FOUND if best is not None else BUDGET_EXHAUSTED
            break
        if not (frontier_x if side == "x" else frontier_y):
            # this side's reachable set is fully settled: conclusive
            outcome = FOUND if best is not None else NOT_FOUND
            break

    path = None
    if outcome == FOUND:
        meet = best[1]
        left = [meet]
        while left[-1] != x:
            left.append(parent_x[left[-1]])
        left.reverse()
        right = []
        cur = meet
        while cur != y:
            cur = parent_y[cur]
            right.append(cur)
        path = tuple(left + right)
    explored = len(dist_x) + len(dist_y)
    return RouteTrace(
        x, y, outcome, path, queries, explored,
        one_sided, radius_budget, query_budget, events,
    )


def audit_locality(trace: RouteTrace) -> bool:
    """Replay the event log: every queried edge must touch a vertex
    already settled on the querying side."""
    settled = {"x": {trace.x}, "y": {trace.y}}
    for ev in trace.events:
        if ev[0] == "query":
            _, side, u, _, _ = ev
            if u not in settled[side]:
                return False
        elif ev[0] == "settle":
            _, side, w, _ = ev
            settled[side].add(w)
    return True
