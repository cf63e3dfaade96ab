"""Unit-capacity vertex-disjoint path engine (Menger via max flow).

Vertices are split into in/out copies with unit capacity; edge arcs get
large capacity so minimum cuts consist of vertices only.  Augmentation is
BFS with sorted adjacency, so results are deterministic.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Optional

from .core import AnnotatedGraph

_S = ("S",)
_T = ("T",)


def _build_network(g: AnnotatedGraph, X: frozenset[int], Y: frozenset[int],
                   usable: frozenset[int]):
    big = len(g.vertices) + 2
    cap: dict[tuple, dict[tuple, int]] = {}

    def arc(a, b, c):
        cap.setdefault(a, {})[b] = cap.get(a, {}).get(b, 0) + c
        cap.setdefault(b, {}).setdefault(a, 0)

    for v in sorted(usable):
        arc((v, 0), (v, 1), 1)
    for x in sorted(X):
        arc(_S, (x, 0), 1)
    for y in sorted(Y):
        arc((y, 1), _T, 1)
    for u, v in sorted(g.edges):
        if u not in usable or v not in usable:
            continue
        # terminals may not be interior vertices of paths
        if u not in Y and v not in X:
            arc((u, 1), (v, 0), big)
        if v not in Y and u not in X:
            arc((v, 1), (u, 0), big)
    return cap


def _bfs_augment(cap, flow) -> bool:
    parent = {_S: None}
    dq = deque([_S])
    while dq:
        a = dq.popleft()
        if a == _T:
            break
        for b in sorted(cap.get(a, {}), key=repr):
            residual = cap[a][b] - flow.get((a, b), 0)
            if residual > 0 and b not in parent:
                parent[b] = a
                dq.append(b)
    if _T not in parent:
        return False
    b = _T
    while parent[b] is not None:
        a = parent[b]
        flow[(a, b)] = flow.get((a, b), 0) + 1
        flow[(b, a)] = flow.get((b, a), 0) - 1
        b = a
    return True


def max_vertex_disjoint(g: AnnotatedGraph, sources: Iterable[int],
                        sinks: Iterable[int], *,
                        forbidden: Iterable[int] = (),
                        limit: Optional[int] = None
                        ) -> tuple[tuple[tuple[int, ...], ...], frozenset[int]]:
    """Maximum family of vertex-disjoint X-Y paths plus a minimum vertex cut.

    Paths are internally disjoint from X ∪ Y; a vertex of X ∩ Y yields a
    one-vertex path.  When ``limit`` is given, augmentation stops early and
    the returned cut is empty.
    """
    banned = frozenset(forbidden)
    usable = g.vertices - banned
    X = frozenset(sources) & usable
    Y = frozenset(sinks) & usable
    if not X or not Y:
        return (), frozenset()
    cap = _build_network(g, X, Y, usable)
    flow: dict[tuple[tuple, tuple], int] = {}
    value = 0
    while limit is None or value < limit:
        if not _bfs_augment(cap, flow):
            break
        value += 1
    final_flow = dict(flow)

    # decompose the integral flow into paths
    paths = []
    for x in sorted(X):
        if flow.get((_S, (x, 0)), 0) <= 0:
            continue
        path = [x]
        node = (x, 0)
        while True:
            nxt = None
            for b in sorted(cap.get(node, {}), key=repr):
                if flow.get((node, b), 0) > 0:
                    nxt = b
                    flow[(node, b)] -= 1
                    break
            if nxt is None or nxt == _T:
                break
            if nxt[1] == 0 and nxt[0] != path[-1]:
                path.append(nxt[0])
            node = nxt
        paths.append(tuple(path))
    paths.sort()

    cut: set[int] = set()
    if limit is None:
        reach = {_S}
        dq = deque([_S])
        while dq:
            a = dq.popleft()
            for b in cap.get(a, {}):
                if b not in reach and cap[a][b] - final_flow.get((a, b), 0) > 0:
                    reach.add(b)
                    dq.append(b)
        for v in sorted(usable):
            if (v, 0) in reach and (v, 1) not in reach:
                cut.add(v)
        for x in sorted(X):
            if (x, 0) not in reach:
                cut.add(x)
        for y in sorted(Y):
            if (y, 1) in reach:
                cut.add(y)
    return tuple(paths), frozenset(cut)


def menger_paths_value(g: AnnotatedGraph, X: Iterable[int], Y: Iterable[int],
                       forbidden: Iterable[int] = ()) -> int:
    paths, _ = max_vertex_disjoint(g, X, Y, forbidden=forbidden)
    return len(paths)
