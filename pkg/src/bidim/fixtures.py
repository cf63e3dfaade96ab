"""Parametric fixture builders: cylindrical renditions with nests, vortex
cells, through-going transactions, and red placements.

The cylinder is a polar grid (rings x rails) drawn in a disk whose boundary
is the outer ring.  Optional extras:

* chords: paths through the inner disk joining inner-ring vertices, one
  rendition cell per chord; rails + chords yield exposed transactions
  orthogonal to the rings.
* vortex cells attached to an arc of the inner ring, with arbitrary
  society content (depth, red interior).
* bumps: single extra vertices dipping inward off a ring, the raw material
  for tightening steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .core import AnnotatedGraph, norm_edge
from .rendition import (Cell, Nest, RadialLinkage, Rendition, Society,
                        Transaction, build_rendition, cell)


@dataclass
class Cylinder:
    g: AnnotatedGraph
    rho: Rendition
    society: Society
    nest: Nest
    radial: RadialLinkage
    transaction: Optional[Transaction]
    rings: int
    rails: int
    vortex_cells: tuple[int, ...] = ()
    bump_vertices: dict = field(default_factory=dict)

    def vid(self, ring: int, rail: int) -> int:
        return (ring - 1) * self.rails + ((rail - 1) % self.rails) + 1

    def ring(self, i: int) -> tuple[int, ...]:
        return tuple(self.vid(i, j) for j in range(1, self.rails + 1))

    def rail(self, j: int, lo: int = 1, hi: Optional[int] = None) -> tuple[int, ...]:
        hi = self.rings if hi is None else hi
        return tuple(self.vid(i, j) for i in range(lo, hi + 1))


def cylinder(rails: int, rings: int, *,
             chords: int = 0,
             chord_inner: int = 1,
             vortex_spans: Sequence[tuple[int, int]] = (),
             vortex_depth: int = 0,
             vortex_interior: int = 0,
             red_vortex: bool = False,
             red_chords: Iterable[int] = (),
             red_vertices: Iterable[int] = (),
             bumps: Sequence[tuple[int, int, int]] = (),
             nest_rings: Optional[int] = None,
             radial_rails: Optional[Sequence[int]] = None) -> Cylinder:
    """Build a cylindrical fixture.

    vortex_spans: (start_rail, span) arcs of the inner ring carrying a
    vortex cell each.  vortex_depth adds that many disjoint chords inside
    each vortex cell; vortex_interior adds isolated interior vertices.
    bumps: (ring, rail_a, rail_b) inward detours with one fresh vertex.
    """
    if chords * 2 >= rails:
        raise ValueError("too many chords for the rail count")

    def vid(ring, rail):
        return (ring - 1) * rails + ((rail - 1) % rails) + 1

    nxt = rings * rails + 1
    cells: list[Cell] = []
    red: set[int] = set(red_vertices)

    for i in range(1, rings + 1):
        for j in range(1, rails + 1):
            cells.append(cell((vid(i, j), vid(i, j + 1)),
                              edges=[(vid(i, j), vid(i, j + 1))]))
    for i in range(1, rings):
        for j in range(1, rails + 1):
            cells.append(cell((vid(i, j), vid(i + 1, j)),
                              edges=[(vid(i, j), vid(i + 1, j))]))

    chord_paths: list[tuple[int, ...]] = []
    red_chord_set = set(red_chords)
    for k in range(1, chords + 1):
        a, b = vid(1, k), vid(1, rails - k)
        inner = list(range(nxt, nxt + chord_inner))
        nxt += chord_inner
        pts = [a] + inner + [b]
        cells.append(cell((a, b), edges=list(zip(pts, pts[1:]))))
        chord_paths.append(tuple(pts))
        if k in red_chord_set:
            if inner:
                red.add(inner[0])
            else:
                red.add(a)

    vortex_cells: list[int] = []
    for start, span in vortex_spans:
        nodes = tuple(vid(1, start + d) for d in range(span))
        es: list[tuple[int, int]] = []
        vs: set[int] = set(nodes)
        for d in range(vortex_depth):
            a, b = nodes[d], nodes[span - 1 - d]
            if a == b:
                break
            w = nxt
            nxt += 1
            vs.add(w)
            es += [(a, w), (w, b)]
            if red_vortex and d == 0:
                red.add(w)
        extra = list(range(nxt, nxt + vortex_interior))
        nxt += vortex_interior
        if extra:
            anchor = nodes[0]
            prev = anchor
            for w in extra:
                es.append((prev, w))
                prev = w
            if red_vortex and vortex_depth == 0:
                red.add(extra[0])
            vs.update(extra)
        elif red_vortex and vortex_depth == 0:
            red.add(nodes[0])
        vortex_cells.append(len(cells))
        cells.append(cell(nodes, edges=es, vertices=vs, vortex=True))

    bump_vertices: dict[tuple[int, int, int], int] = {}
    for (ring_i, ra, rb) in bumps:
        w = nxt
        nxt += 1
        a, b = vid(ring_i, ra), vid(ring_i, rb)
        cells.append(cell((a, b), edges=[(a, w), (w, b)]))
        bump_vertices[(ring_i, ra, rb)] = w

    boundary = tuple(vid(rings, j) for j in range(1, rails + 1))
    rho = build_rendition(cells, surface="disk", boundary=boundary)
    vs: set[int] = set()
    es: set[tuple[int, int]] = set()
    for c in cells:
        vs |= c.vertices
        es |= c.edges
    g = AnnotatedGraph(frozenset(vs), frozenset(es), frozenset(red & vs))
    society = Society(g, boundary)

    n_nest = (rings - 1) if nest_rings is None else nest_rings
    nest = Nest(tuple(tuple(vid(i, j) for j in range(1, rails + 1))
                      for i in range(1, n_nest + 1)))
    rr = radial_rails if radial_rails is not None else range(1, rails + 1)
    radial = RadialLinkage(tuple(
        tuple(vid(i, j) for i in range(rings, 0, -1)) for j in rr))

    transaction = None
    if chords:
        paths = []
        for k in range(1, chords + 1):
            down = [vid(i, k) for i in range(rings, 1, -1)]
            up = [vid(i, rails - k) for i in range(2, rings + 1)]
            paths.append(tuple(down) + chord_paths[k - 1] + tuple(up))
        transaction = Transaction(tuple(paths))
    fx = Cylinder(g, rho, society, nest, radial, transaction, rings, rails,
                  tuple(vortex_cells), bump_vertices)
    return fx


def vortex_crossing_cylinder(rails: int, rings: int, crossings: int, *,
                             red_crossings: Iterable[int] = ()) -> Cylinder:
    """Cylinder whose inner disk holds one vortex cell crossed by
    ``crossings`` disjoint chords; the transaction runs through the vortex.

    Chord d joins inner-ring rails d and rails+1-d through one interior
    vertex, so the transaction is orthogonal to every ring and exposed in
    the cylindrical sense.
    """
    if 2 * crossings >= rails:
        raise ValueError("too many crossings for the rail count")

    def vid(ring, rail):
        return (ring - 1) * rails + ((rail - 1) % rails) + 1

    nxt = rings * rails + 1
    cells: list[Cell] = []
    red: set[int] = set()
    for i in range(1, rings + 1):
        for j in range(1, rails + 1):
            cells.append(cell((vid(i, j), vid(i, j + 1)),
                              edges=[(vid(i, j), vid(i, j + 1))]))
    for i in range(1, rings):
        for j in range(1, rails + 1):
            cells.append(cell((vid(i, j), vid(i + 1, j)),
                              edges=[(vid(i, j), vid(i + 1, j))]))
    # vortex cell: nodes are the chord endpoints, in cyclic order along the
    # inner ring through the seam
    lefts = [vid(1, d) for d in range(1, crossings + 1)]
    rights = [vid(1, rails - d) for d in range(1, crossings + 1)]
    nodes = tuple(reversed(rights)) + tuple(lefts)
    es: list[tuple[int, int]] = []
    chord_mids: list[int] = []
    red_set = set(red_crossings)
    for d in range(1, crossings + 1):
        w = nxt
        nxt += 1
        chord_mids.append(w)
        es += [(vid(1, d), w), (w, vid(1, rails - d))]
        if d in red_set:
            red.add(w)
    vortex_idx = len(cells)
    cells.append(cell(nodes, edges=es, vortex=True))
    boundary = tuple(vid(rings, j) for j in range(1, rails + 1))
    rho = build_rendition(cells, surface="disk", boundary=boundary)
    vs: set[int] = set()
    eall: set[tuple[int, int]] = set()
    for c in cells:
        vs |= c.vertices
        eall |= c.edges
    g = AnnotatedGraph(frozenset(vs), frozenset(eall), frozenset(red))
    society = Society(g, boundary)
    nest = Nest(tuple(tuple(vid(i, j) for j in range(1, rails + 1))
                      for i in range(1, rings)))
    radial = RadialLinkage(tuple(
        tuple(vid(i, j) for i in range(rings, 0, -1))
        for j in range(crossings + 1, rails + 1 - crossings)))
    paths = []
    for d in range(1, crossings + 1):
        down = [vid(i, d) for i in range(rings, 0, -1)]
        up = [vid(i, rails - d) for i in range(1, rings + 1)]
        paths.append(tuple(down) + (chord_mids[d - 1],) + tuple(up))
    transaction = Transaction(tuple(paths))
    return Cylinder(g, rho, society, nest, radial, transaction, rings, rails,
                    (vortex_idx,))


def planar_society(edges: Iterable[tuple[int, int]], omega: Sequence[int],
                   red: Iterable[int] = ()) -> Society:
    g = AnnotatedGraph.build([], edges, red)
    g = AnnotatedGraph(g.vertices | frozenset(omega), g.edges,
                       g.red | (frozenset(red) & frozenset(omega)))
    return Society(g, tuple(omega))


def ladder_society(n: int, *, rung_inner: int = 0,
                   red_rungs: Iterable[int] = ()) -> tuple[Society, Transaction]:
    """Society of n parallel chords across a disk: omega is a cycle
    x_1..x_n, y_n..y_1 and path i joins x_i to y_i."""
    xs = list(range(1, n + 1))
    ys = list(range(n + 1, 2 * n + 1))
    nxt = 2 * n + 1
    edges = []
    paths = []
    reds = []
    red_idx = set(red_rungs)
    for i in range(n):
        inner = list(range(nxt, nxt + rung_inner))
        nxt += rung_inner
        pts = [xs[i]] + inner + [ys[i]]
        edges += list(zip(pts, pts[1:]))
        paths.append(tuple(pts))
        if (i + 1) in red_idx:
            reds.append(inner[0] if inner else xs[i])
    omega = tuple(xs) + tuple(reversed(ys))
    soc = planar_society(edges, omega, reds)
    return soc, Transaction(tuple(paths))
