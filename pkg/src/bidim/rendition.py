"""Combinatorial disk/sphere renditions and everything that lives on them:
societies, transactions, strips, nests, radial linkages, and region queries.

A rendition stores cells (boundary-node lists plus their subgraphs), an
injective node-to-vertex map, and for disk renditions the cyclic boundary.
Traces of grounded cycles/paths are realized as walks in the *frame graph*
(nodes, cell centers, and boundary-arc vertices); disks are computed by
removing the trace from the frame and flood-filling.  Pieces whose side is
not determined by the combinatorial data (pendant cells hanging on a trace
node) are assigned to the inner side, deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Union

from .core import (AnnotatedGraph, Edge, ValidityReport, _Collector, norm_edge)
from .errors import (NotATransaction, NotGrounded, NotMonotone, OutOfRange,
                     UnknownNode)
from .grids import Path, path_edges, cycle_edges

# ---------------------------------------------------------------------------
# Data types


@dataclass(frozen=True)
class Cell:
    nodes: tuple[int, ...]
    edges: frozenset[Edge]
    vertices: frozenset[int]
    vortex: bool = False
    tiebreak: int = 0

    def __post_init__(self):
        vs = self.vertices | frozenset(v for e in self.edges for v in e)
        object.__setattr__(self, "vertices", vs)


def cell(nodes: Sequence[int], edges: Iterable[tuple[int, int]] = (),
         vertices: Iterable[int] = (), vortex: bool = False,
         tiebreak: int = 0) -> Cell:
    return Cell(tuple(nodes), frozenset(norm_edge(u, v) for u, v in edges),
                frozenset(vertices), vortex, tiebreak)


@dataclass(frozen=True)
class Rendition:
    cells: tuple[Cell, ...]
    pi: tuple[tuple[int, int], ...]          # (node id, vertex id), sorted
    surface: str = "disk"                    # "disk" | "sphere"
    boundary: tuple[int, ...] = ()           # node ids, cyclic, disk only

    @cached_property
    def node_vertex(self) -> dict[int, int]:
        return dict(self.pi)

    @cached_property
    def vertex_node(self) -> dict[int, int]:
        return {v: n for n, v in self.pi}

    @cached_property
    def node_set(self) -> frozenset[int]:
        return frozenset(self.node_vertex)

    @cached_property
    def node_vertices(self) -> frozenset[int]:
        return frozenset(self.node_vertex.values())

    @cached_property
    def edge_cell(self) -> dict[Edge, int]:
        out: dict[Edge, int] = {}
        for i, c in enumerate(self.cells):
            for e in c.edges:
                out.setdefault(e, i)
        return out

    @cached_property
    def vortex_cells(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.cells) if c.vortex)

    @cached_property
    def frame(self) -> dict[tuple, tuple]:
        """Adjacency of the frame graph: nodes, cell centers, arc vertices,
        and for disks an outside hub behind the boundary arcs."""
        adj: dict[tuple, set] = {}

        def add(a, b):
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)

        for i, c in enumerate(self.cells):
            center = ("c", i)
            adj.setdefault(center, set())
            k = len(c.nodes)
            for j, n in enumerate(c.nodes):
                add(center, ("n", n))
                if k >= 2:
                    arc = ("a", i, j)
                    add(center, arc)
                    add(arc, ("n", n))
                    add(arc, ("n", c.nodes[(j + 1) % k]))
        if self.surface == "disk" and self.boundary:
            hub = ("X",)
            r = len(self.boundary)
            if r == 1:
                add(hub, ("n", self.boundary[0]))
            else:
                for j, n in enumerate(self.boundary):
                    arc = ("o", j)
                    add(arc, ("n", n))
                    add(arc, ("n", self.boundary[(j + 1) % r]))
                    add(hub, arc)
        return {a: tuple(sorted(bs, key=repr)) for a, bs in adj.items()}

    def graph(self) -> AnnotatedGraph:
        vs: set[int] = set(self.node_vertices)
        es: set[Edge] = set()
        for c in self.cells:
            vs |= c.vertices
            es |= c.edges
        return AnnotatedGraph.build(vs, es)


def build_rendition(cells: Sequence[Cell], pi: Optional[Mapping[int, int]] = None,
                    surface: str = "disk",
                    boundary: Sequence[int] = ()) -> Rendition:
    """Assemble a rendition; ``pi`` defaults to the identity on all node ids."""
    cells = tuple(cells)
    if pi is None:
        nodes = sorted({n for c in cells for n in c.nodes} | set(boundary))
        pi = {n: n for n in nodes}
    return Rendition(cells, tuple(sorted(pi.items())), surface, tuple(boundary))


@dataclass(frozen=True)
class Society:
    graph: AnnotatedGraph
    omega: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.omega)) != len(self.omega):
            raise ValueError("omega repeats a vertex")
        if not set(self.omega) <= self.graph.vertices:
            raise UnknownNode("omega contains vertices outside the graph")


@dataclass(frozen=True)
class Transaction:
    paths: tuple[Path, ...]

    @property
    def order(self) -> int:
        return len(self.paths)


@dataclass(frozen=True)
class Nest:
    cycles: tuple[Path, ...]             # innermost first
    around: Optional[int] = None         # optional vortex cell index

    @property
    def order(self) -> int:
        return len(self.cycles)

    def inner(self) -> Path:
        return self.cycles[0]

    def outer(self) -> Path:
        return self.cycles[-1]


@dataclass(frozen=True)
class RadialLinkage:
    paths: tuple[Path, ...]

    @property
    def order(self) -> int:
        return len(self.paths)


@dataclass(frozen=True)
class Trace:
    segments: tuple[tuple, ...]          # (node, cell idx, arc idx, node)
    nodes: tuple[int, ...]               # node ids in walk order
    blocked: frozenset                   # frame vertices on the curve
    closed: bool


@dataclass(frozen=True)
class Region:
    cells: frozenset[int]
    boundary_nodes: tuple[int, ...]
    blocked: frozenset = frozenset()


# ---------------------------------------------------------------------------
# Validation


def validate_rendition(g: AnnotatedGraph, rho: Rendition) -> ValidityReport:
    c = _Collector()
    nv = rho.node_vertex
    if len(set(nv.values())) != len(nv):
        c.add("PiInjective", "pi maps two nodes to one vertex")
    for n, v in nv.items():
        if v not in g.vertices:
            c.add("UnknownVertex", f"pi({n}) = {v} not in graph")
    covered_e: set[Edge] = set()
    covered_v: set[int] = set(rho.node_vertices)
    for i, cl in enumerate(rho.cells):
        for n in cl.nodes:
            if n not in nv:
                c.add("UnknownNode", f"cell {i} names unknown node {n}")
        if len(set(cl.nodes)) != len(cl.nodes):
            c.add("NodeRepeat", f"cell {i} repeats a boundary node")
        if not cl.vortex and len(cl.nodes) > 3:
            c.add("VortexFlag", f"cell {i} has {len(cl.nodes)} nodes but is not a vortex")
        if len(cl.nodes) == 2 and cl.tiebreak not in (0, 1):
            c.add("TieBreak", f"cell {i} needs a tie-break in {{0,1}}")
        # R3
        want = {nv[n] for n in cl.nodes if n in nv}
        if not want <= cl.vertices:
            c.add("R3", f"cell {i} misses boundary vertices {sorted(want - cl.vertices)}")
        covered_e |= cl.edges
        covered_v |= cl.vertices
    # R1
    if covered_e != g.edges:
        missing = g.edges - covered_e
        extra = covered_e - g.edges
        if missing:
            c.add("R1", f"edges not covered: {sorted(missing)}")
        if extra:
            c.add("R1", f"cells use foreign edges: {sorted(extra)}")
    if covered_v != g.vertices:
        missing_v = g.vertices - covered_v
        if missing_v:
            c.add("R1", f"vertices not covered: {sorted(missing_v)}")
    # R2
    seen: dict[Edge, int] = {}
    for i, cl in enumerate(rho.cells):
        for e in cl.edges:
            if e in seen:
                c.add("R2", f"edge {e} in cells {seen[e]} and {i}")
            else:
                seen[e] = i
    # R4
    owner: dict[int, list[int]] = {}
    for i, cl in enumerate(rho.cells):
        for v in cl.vertices:
            owner.setdefault(v, []).append(i)
    for v, cs in sorted(owner.items()):
        if len(cs) > 1 and v not in rho.vertex_node:
            c.add("R4", f"vertex {v} shared by cells {cs} but is not a node")
        if len(cs) > 1:
            n = rho.vertex_node.get(v)
            if n is not None:
                for i in cs:
                    if n not in rho.cells[i].nodes:
                        c.add("R4", f"vertex {v} in cell {i} but node {n} not on its boundary")
    if rho.surface == "disk":
        for n in rho.boundary:
            if n not in nv:
                c.add("UnknownNode", f"boundary names unknown node {n}")
        if len(set(rho.boundary)) != len(rho.boundary):
            c.add("Boundary", "boundary repeats a node")
    elif rho.surface != "sphere":
        c.add("Surface", f"unknown surface tag {rho.surface!r}")
    # realizability: the frame graph must be planar
    try:
        import networkx as nx
        fg = nx.Graph()
        for a, bs in rho.frame.items():
            fg.add_node(a)
            for b in bs:
                fg.add_edge(a, b)
        ok, _ = nx.check_planarity(fg)
        if not ok:
            c.add("Realizability", "frame graph of cells and nodes is not planar")
    except ImportError:                                  # pragma: no cover
        pass
    c.stats["cells"] = len(rho.cells)
    c.stats["vortices"] = len(rho.vortex_cells)
    return c.report()


def validate_society_rendition(s: Society, rho: Rendition) -> ValidityReport:
    rep = validate_rendition(s.graph, rho)
    c = _Collector()
    c.items.extend(rep.violations)
    bverts = tuple(rho.node_vertex.get(n) for n in rho.boundary)
    if set(bverts) != set(s.omega):
        c.add("OmegaBoundary", "boundary nodes do not map onto V(omega)")
    else:
        if not _cyclic_equal(bverts, s.omega):
            c.add("OmegaOrder", "boundary order disagrees with omega")
    c.stats.update(rep.stats)
    return c.report()


def _cyclic_equal(a: Sequence, b: Sequence) -> bool:
    if len(a) != len(b):
        return False
    n = len(a)
    if n == 0:
        return True
    doubled = list(a) + list(a)
    fb = list(b)
    for s in range(n):
        if doubled[s:s + n] == fb or doubled[s:s + n] == fb[::-1]:
            return True
    return False


def is_blank(rho: Rendition, g: AnnotatedGraph) -> bool:
    """True iff nodes and non-vortex cells avoid the red set."""
    bad = set(rho.node_vertices)
    for c in rho.cells:
        if not c.vortex:
            bad |= c.vertices
    return not (bad & g.red)


def vertex_in_vortex_interior(rho: Rendition, v: int) -> bool:
    if v in rho.node_vertices:
        return False
    return any(v in rho.cells[i].vertices for i in rho.vortex_cells)


def breadth(rho: Rendition) -> int:
    return len(rho.vortex_cells)


def vortex_society(rho: Rendition, idx: int) -> Society:
    c = rho.cells[idx]
    omega = tuple(rho.node_vertex[n] for n in c.nodes)
    return Society(AnnotatedGraph.build(c.vertices, c.edges), omega)


def rendition_depth(rho: Rendition) -> int:
    return max((society_depth(vortex_society(rho, i)) for i in rho.vortex_cells),
               default=0)


# ---------------------------------------------------------------------------
# Traces and regions


def trace_of(rho: Rendition, walk: Sequence[int], closed: bool) -> Trace:
    """Trace of a grounded cycle (closed) or node-to-node path (open)."""
    if closed:
        edges = [norm_edge(walk[i], walk[(i + 1) % len(walk)])
                 for i in range(len(walk))]
    else:
        edges = path_edges(walk)
    if not edges:
        raise NotGrounded("empty walk has no trace")
    cells = []
    for e in edges:
        ci = rho.edge_cell.get(e)
        if ci is None:
            raise NotGrounded(f"edge {e} not drawn in any cell")
        if rho.cells[ci].vortex:
            raise NotGrounded(f"edge {e} lies in vortex cell {ci}")
        cells.append(ci)
    if closed:
        if len(set(cells)) < 2:
            raise NotGrounded("cycle stays inside a single cell")
        # rotate so a cell change happens at position 0
        start = next(i for i in range(len(edges))
                     if cells[i - 1] != cells[i])
        edges = edges[start:] + edges[:start]
        cells = cells[start:] + cells[:start]
        verts = list(walk[start:]) + list(walk[:start])
    else:
        verts = list(walk)

    segments = []
    i = 0
    while i < len(edges):
        j = i
        while j + 1 < len(edges) and cells[j + 1] == cells[i]:
            j += 1
        v_in = verts[i]
        v_out = verts[(j + 1) % len(verts)] if closed else verts[j + 1]
        n_in = rho.vertex_node.get(v_in)
        n_out = rho.vertex_node.get(v_out)
        if n_in is None or n_out is None:
            raise NotGrounded(
                f"walk crosses cell {cells[i]} between non-node vertices "
                f"{v_in}, {v_out}")
        segments.append((n_in, cells[i], _arc_for(rho, cells[i], n_in, n_out), n_out))
        i = j + 1
    nodes = tuple(s[0] for s in segments) + (() if closed else (segments[-1][3],))
    blocked = {("n", n) for n in nodes}
    for n_in, ci, arc, n_out in segments:
        blocked.add(("a", ci, arc))
    return Trace(tuple(segments), nodes, frozenset(blocked), closed)


def _arc_for(rho: Rendition, ci: int, n1: int, n2: int) -> int:
    c = rho.cells[ci]
    k = len(c.nodes)
    if k < 2:
        raise NotGrounded(f"cell {ci} has a single node but is crossed")
    if k == 2:
        return c.tiebreak
    if k == 3:
        for j in range(3):
            if {c.nodes[j], c.nodes[(j + 1) % 3]} == {n1, n2}:
                return j
        raise NotGrounded(f"cell {ci} boundary does not join {n1} and {n2}")
    raise NotGrounded(f"cell {ci} is a vortex")


def frame_components(rho: Rendition, blocked: frozenset,
                     drop_hub: bool = False) -> dict[tuple, int]:
    """Component index of every unblocked frame vertex."""
    comp: dict[tuple, int] = {}
    nxt = 0
    skip = set(blocked)
    if drop_hub:
        skip.add(("X",))
    for a in sorted(rho.frame, key=repr):
        if a in comp or a in skip:
            continue
        stack = [a]
        comp[a] = nxt
        while stack:
            u = stack.pop()
            for w in rho.frame[u]:
                if w not in comp and w not in skip:
                    comp[w] = nxt
                    stack.append(w)
        nxt += 1
    return comp


def _classify_cells(rho: Rendition, comp: dict[tuple, int],
                    outer_comps: set[int]) -> frozenset[int]:
    inside = set()
    for i in range(len(rho.cells)):
        c = comp.get(("c", i))
        if c is None or c not in outer_comps:
            if c is None:
                # fully blocked center cannot happen; treat as inside
                inside.add(i)
            else:
                inside.add(i)
    return frozenset(inside)


def cycle_disk(rho: Rendition, cycle: Sequence[int], *,
               avoid_cells: Iterable[int] = (),
               avoid_vertices: Iterable[int] = ()) -> Region:
    """Cells inside the trace of a grounded cycle.

    On a disk the outside is anchored at the boundary hub; on a sphere an
    anchor (cells or vertices that must stay outside) is required.
    """
    tr = trace_of(rho, tuple(cycle), closed=True)
    comp = frame_components(rho, tr.blocked)
    outer: set[int] = set()
    if rho.surface == "disk" and rho.boundary:
        hub = comp.get(("X",))
        if hub is not None:
            outer.add(hub)
    for i in avoid_cells:
        c = comp.get(("c", i))
        if c is not None:
            outer.add(c)
    av = set(avoid_vertices)
    if av:
        for i, cl in enumerate(rho.cells):
            if cl.vertices & av:
                c = comp.get(("c", i))
                if c is not None:
                    outer.add(c)
    if not outer and rho.surface == "sphere":
        raise OutOfRange("sphere rendition needs an outside anchor")
    inside = _classify_cells(rho, comp, outer)
    return Region(inside, tr.nodes, tr.blocked)


def path_side(rho: Rendition, path: Sequence[int], *,
              contain_cells: Iterable[int] = (),
              contain_vertices: Iterable[int] = ()) -> Region:
    """Side of an open grounded node-to-node path containing an anchor."""
    tr = trace_of(rho, tuple(path), closed=False)
    comp = frame_components(rho, tr.blocked, drop_hub=True)
    want: set[int] = set()
    for i in contain_cells:
        c = comp.get(("c", i))
        if c is not None:
            want.add(c)
    cv = set(contain_vertices)
    if cv:
        for i, cl in enumerate(rho.cells):
            if cl.vertices & cv:
                c = comp.get(("c", i))
                if c is not None:
                    want.add(c)
    cells = frozenset(i for i in range(len(rho.cells))
                      if comp.get(("c", i)) in want)
    return Region(cells, tr.nodes, tr.blocked)


def region_crop(g: AnnotatedGraph, rho: Rendition, region: Region) -> Society:
    """The society of a region: its cells' subgraphs plus boundary vertices,
    with the boundary cyclic order read off the trace walk."""
    vs: set[int] = set()
    es: set[Edge] = set()
    for i in sorted(region.cells):
        c = rho.cells[i]
        vs |= c.vertices
        es |= c.edges
    omega = tuple(rho.node_vertex[n] for n in region.boundary_nodes)
    vs |= set(omega)
    graph = AnnotatedGraph(frozenset(vs), frozenset(es), g.red & frozenset(vs))
    return Society(graph, omega)


def region_interior_vertices(g: AnnotatedGraph, rho: Rendition,
                             region: Region) -> frozenset[int]:
    soc = region_crop(g, rho, region)
    border = {rho.node_vertex[n] for n in region.boundary_nodes}
    return frozenset(soc.graph.vertices - border)


def restrict(g: AnnotatedGraph, rho: Rendition, region: Region
             ) -> tuple[Society, Rendition]:
    """Materialize the restriction of rho to a region as a disk rendition."""
    soc = region_crop(g, rho, region)
    cells = [rho.cells[i] for i in sorted(region.cells)]
    covered = set()
    for c in cells:
        covered |= c.vertices
    for n in region.boundary_nodes:
        v = rho.node_vertex[n]
        if v not in covered:
            cells.append(Cell((n,), frozenset(), frozenset([v])))
    pi = {n: v for n, v in rho.pi
          if any(n in c.nodes for c in cells) or n in region.boundary_nodes}
    sub = Rendition(tuple(cells), tuple(sorted(pi.items())), "disk",
                    tuple(region.boundary_nodes))
    return soc, sub


def cycle_arc(cycle: Sequence[int], a: int, b: int,
              avoid: Iterable[int] = ()) -> Path:
    """Arc of a cycle from a to b whose interior avoids the given vertices;
    the forward arc wins if both qualify."""
    cyc = tuple(cycle)
    L = len(cyc)
    ia, ib = cyc.index(a), cyc.index(b)
    av = set(avoid) - {a, b}

    def walk(step):
        out = [cyc[ia]]
        k = ia
        while cyc[k] != b:
            k = (k + step) % L
            out.append(cyc[k])
        return tuple(out)

    fwd, bwd = walk(1), walk(-1)
    if not av & set(fwd[1:-1]):
        return fwd
    if not av & set(bwd[1:-1]):
        return bwd
    raise OutOfRange("no arc avoids the given vertices")


def is_grounded_cycle(rho: Rendition, cycle: Sequence[int]) -> bool:
    try:
        trace_of(rho, tuple(cycle), closed=True)
        return True
    except NotGrounded:
        return False


def is_grounded_path(rho: Rendition, path: Sequence[int]) -> bool:
    try:
        trace_of(rho, tuple(path), closed=False)
        return True
    except NotGrounded:
        return False


def is_grounded_subgraph(rho: Rendition, edges: Iterable[Edge],
                         vertices: Iterable[int]) -> bool:
    """Grounded: no vortex material, and no cycle inside a single cell."""
    per_cell: dict[int, list[Edge]] = {}
    for e in edges:
        ci = rho.edge_cell.get(e)
        if ci is None or rho.cells[ci].vortex:
            return False
        per_cell.setdefault(ci, []).append(e)
    for v in vertices:
        if vertex_in_vortex_interior(rho, v):
            return False
    for ci, es in per_cell.items():
        # forest check inside each cell
        parent: dict[int, int] = {}

        def find(x):
            while parent.get(x, x) != x:
                parent[x] = parent.get(parent[x], parent[x])
                x = parent[x]
            return x

        for u, v in es:
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent.setdefault(u, u)
            parent.setdefault(v, v)
            parent[ru] = rv
    return True


# ---------------------------------------------------------------------------
# Societies: segments, depth, transactions


def omega_segment(omega: Sequence[int], start: int, length: int) -> tuple[int, ...]:
    n = len(omega)
    return tuple(omega[(start + i) % n] for i in range(length))


def society_depth(s: Society) -> int:
    depth, _ = max_transaction(s)
    return depth


def max_transaction(s: Society) -> tuple[int, Optional[Transaction]]:
    """Maximum transaction order plus a witness, via disjoint-path search
    over complementary segment pairs."""
    from ._flow import max_vertex_disjoint
    n = len(s.omega)
    if n < 2:
        return 0, None
    best = 0
    witness: Optional[Transaction] = None
    for start in range(n):
        for length in range(1, n // 2 + 1):
            A = omega_segment(s.omega, start, length)
            B = tuple(v for v in s.omega if v not in set(A))
            if not B:
                continue
            forbidden = ()
            paths, _ = max_vertex_disjoint(s.graph, A, B, forbidden=forbidden)
            if len(paths) > best:
                best = len(paths)
                witness = Transaction(tuple(paths))
    return best, witness


def transaction_endpoints(s: Society, t: Transaction) -> list[tuple[int, int]]:
    om = set(s.omega)
    out = []
    for p in t.paths:
        if len(p) == 0 or p[0] not in om or p[-1] not in om:
            raise NotATransaction(f"path {p} does not join omega to omega")
        if any(v in om for v in p[1:-1]):
            raise NotATransaction(f"path {p} passes through omega internally")
        out.append((p[0], p[-1]))
    return out


def end_segments(s: Society, t: Transaction
                 ) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Minimal end segments (X, Y) plus the path order by X-position.

    Returns (X, Y, order) where order[i] is the index of the path whose
    X-endpoint comes i-th along X.
    """
    if t.order == 0:
        raise NotATransaction("empty transaction")
    eps = transaction_endpoints(s, t)
    pos = {v: i for i, v in enumerate(s.omega)}
    n = len(s.omega)
    items = []   # (position, path index, endpoint)
    for i, (a, b) in enumerate(eps):
        items.append((pos[a], i, a))
        items.append((pos[b], i, b))
    items.sort()
    m = len(items)
    for shift in range(m):
        block = [items[(shift + i) % m] for i in range(t.order)]
        seen = [it[1] for it in block]
        if len(set(seen)) != t.order:
            continue
        xs = {it[2] for it in block}
        # minimal X segment: positions from block[0] to block[-1] cyclically
        lo = block[0][0]
        hi = block[-1][0]
        length = (hi - lo) % n + 1
        X = omega_segment(s.omega, lo, length)
        rest = [items[(shift + t.order + i) % m] for i in range(m - t.order)]
        lo2, hi2 = rest[0][0], rest[-1][0]
        length2 = (hi2 - lo2) % n + 1
        Y = omega_segment(s.omega, lo2, length2)
        if set(X) & set(Y):
            continue
        order = [it[1] for it in block]
        return X, Y, tuple(order)
    raise NotATransaction("endpoints do not split into two disjoint segments")


@dataclass(frozen=True)
class TransactionClass:
    monotone: bool
    kind: str                     # "planar" | "crosscap" | "neither"
    order: tuple[int, ...]        # natural indexing (path indices by X)
    handle_parts: Optional[tuple[tuple[int, ...], tuple[int, ...]]] = None


def classify_transaction(s: Society, t: Transaction) -> TransactionClass:
    X, Y, order = end_segments(s, t)
    eps = transaction_endpoints(s, t)
    posY = {v: i for i, v in enumerate(Y)}
    xset = set(X)
    y_seq = []
    for i in order:
        a, b = eps[i]
        y = b if a in xset else a
        y_seq.append(posY[y])
    inc = all(y_seq[i] < y_seq[i + 1] for i in range(len(y_seq) - 1))
    dec = all(y_seq[i] > y_seq[i + 1] for i in range(len(y_seq) - 1))
    monotone = inc or dec or len(y_seq) == 1
    if len(y_seq) == 1:
        kind = "planar"
    elif dec:
        # x_1..x_n then y_n..y_1 around the circle
        kind = "planar"
    elif inc:
        kind = "crosscap"
    else:
        kind = "neither"
    handle = _handle_partition(s, t) if t.order >= 2 and t.order % 2 == 0 else None
    return TransactionClass(monotone, kind, order, handle)


def _handle_partition(s: Society, t: Transaction
                      ) -> Optional[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Split into two planar transactions with interleaved segment blocks."""
    eps = transaction_endpoints(s, t)
    pos = {v: i for i, v in enumerate(s.omega)}
    m = 2 * t.order
    items = []
    for i, (a, b) in enumerate(eps):
        items.append((pos[a], i))
        items.append((pos[b], i))
    items.sort()
    half = t.order // 2
    for shift in range(m):
        blocks = [[items[(shift + q * half + i) % m] for i in range(half)]
                  for q in range(4)]
        r_idx = sorted({i for _, i in blocks[0]})
        q_idx = sorted({i for _, i in blocks[1]})
        if sorted({i for _, i in blocks[2]}) != r_idx:
            continue
        if sorted({i for _, i in blocks[3]}) != q_idx:
            continue
        if len(r_idx) != half or len(q_idx) != half:
            continue
        sub_r = Transaction(tuple(t.paths[i] for i in r_idx))
        sub_q = Transaction(tuple(t.paths[i] for i in q_idx))
        try:
            cr = _basic_kind(s, sub_r)
            cq = _basic_kind(s, sub_q)
        except NotATransaction:
            continue
        if cr == "planar" and cq == "planar":
            return tuple(r_idx), tuple(q_idx)
    return None


def _basic_kind(s: Society, t: Transaction) -> str:
    X, Y, order = end_segments(s, t)
    eps = transaction_endpoints(s, t)
    posY = {v: i for i, v in enumerate(Y)}
    y_seq = []
    for i in order:
        a, b = eps[i]
        y = b if a in set(X) else a
        y_seq.append(posY[y])
    if len(y_seq) == 1 or all(y_seq[i] > y_seq[i + 1] for i in range(len(y_seq) - 1)):
        return "planar"
    if all(y_seq[i] < y_seq[i + 1] for i in range(len(y_seq) - 1)):
        return "crosscap"
    return "neither"


# ---------------------------------------------------------------------------
# Strips


def _bridges(g: AnnotatedGraph, h_vertices: frozenset[int],
             h_edges: frozenset[Edge]) -> list[tuple[frozenset[int], frozenset[Edge], frozenset[int]]]:
    """H-bridges as (vertices, edges, attachments)."""
    out = []
    rest = g.without(h_vertices)
    for comp in rest.components():
        vs = set(comp)
        es = {e for e in g.edges if e[0] in comp and e[1] in comp}
        att = set()
        for v in comp:
            for w in g.adj[v]:
                if w in h_vertices:
                    att.add(w)
                    es.add(norm_edge(v, w))
        out.append((frozenset(vs | att), frozenset(es), frozenset(att)))
    for e in sorted(g.edges - h_edges):
        if e[0] in h_vertices and e[1] in h_vertices:
            out.append((frozenset(e), frozenset([e]), frozenset(e)))
    return out


def natural_paths(s: Society, t: Transaction) -> tuple[tuple[Path, ...],
                                                       tuple[int, ...], tuple[int, ...]]:
    """Paths renumbered naturally, oriented X to Y; raises if not monotone."""
    cls = classify_transaction(s, t)
    if not cls.monotone:
        raise NotMonotone("transaction is not monotone")
    X, Y, order = end_segments(s, t)
    xset = set(X)
    out = []
    for i in order:
        p = t.paths[i]
        out.append(p if p[0] in xset else tuple(reversed(p)))
    return tuple(out), X, Y


def strip(s: Society, t: Transaction, i: int) -> AnnotatedGraph:
    """The i-th strip of a monotone transaction."""
    paths, X, Y = natural_paths(s, t)
    n = len(paths)
    if not (1 <= i <= n - 1):
        raise OutOfRange(f"strip index {i} outside [1, {n - 1}]")
    g = s.graph
    h_vertices = frozenset(v for p in paths for v in p) | frozenset(s.omega)
    h_edges = frozenset(e for p in paths for e in path_edges(p))
    p_i, p_i1 = paths[i - 1], paths[i]
    xi = _between(X, p_i[0], p_i1[0])
    yi = _between(Y, p_i[-1], p_i1[-1])
    outer = set(paths[0]) | set(paths[-1])
    allowed_att = (set(xi) | set(yi) | set(p_i) | set(p_i1)) - outer
    keep_att = set(v for p in paths for v in p) | set(X) | set(Y)
    vs = set(p_i) | set(p_i1) | set(xi) | set(yi)
    es = set(path_edges(p_i)) | set(path_edges(p_i1))
    for bv, be, batt in _bridges(g, h_vertices, h_edges):
        if not (batt & allowed_att):
            continue
        drop = batt - keep_att
        bvs = bv - drop
        bes = {e for e in be if e[0] not in drop and e[1] not in drop}
        vs |= bvs
        es |= bes
    return AnnotatedGraph(frozenset(vs), frozenset(es), g.red & frozenset(vs))


def _between(segment: Sequence[int], a: int, b: int) -> tuple[int, ...]:
    seg = list(segment)
    ia, ib = seg.index(a), seg.index(b)
    if ia > ib:
        ia, ib = ib, ia
    return tuple(seg[ia:ib + 1])


def strip_society(s: Society, t: Transaction) -> Society:
    paths, X, Y = natural_paths(s, t)
    g = s.graph
    h_vertices = frozenset(v for p in paths for v in p) | frozenset(s.omega)
    h_edges = frozenset(e for p in paths for e in path_edges(p))
    hp_vertices = frozenset(v for p in paths for v in p) | frozenset(X) | frozenset(Y)
    outer = set(paths[0]) | set(paths[-1])
    vs = set(hp_vertices)
    es = set(h_edges)
    for bv, be, batt in _bridges(g, h_vertices, h_edges):
        if not (batt & (hp_vertices - outer)):
            continue
        drop = batt - hp_vertices
        vs |= bv - drop
        es |= {e for e in be if e[0] not in drop and e[1] not in drop}
    x0 = list(X)
    if x0 and paths and paths[0][0] != x0[0]:
        x0 = list(reversed(x0))
    y0 = list(Y)
    if y0 and paths and paths[-1][-1] != y0[0]:
        y0 = list(reversed(y0))
    omega1 = tuple(x0) + tuple(y0)
    graph = AnnotatedGraph(frozenset(vs), frozenset(es), g.red & frozenset(vs))
    return Society(graph, omega1)


def is_flat_transaction(s: Society, t: Transaction) -> bool:
    """Flat: the strip society admits a vortex-free rendition in a disk."""
    try:
        soc = strip_society(s, t)
    except (NotMonotone, NotATransaction):
        return False
    return society_is_disk_realizable(soc)


def society_is_disk_realizable(soc: Society) -> bool:
    import networkx as nx
    g = nx.Graph()
    g.add_nodes_from(soc.graph.vertices)
    g.add_edges_from(soc.graph.edges)
    hub = ("hub",)
    prev = None
    first = None
    for v in soc.omega:
        g.add_edge(hub, ("spoke", v))
        g.add_edge(("spoke", v), v)
        if prev is not None:
            g.add_edge(("ring", prev, v), prev)
            g.add_edge(("ring", prev, v), v)
        if first is None:
            first = v
        prev = v
    if prev is not None and first is not None and prev != first:
        g.add_edge(("ring", prev, first), prev)
        g.add_edge(("ring", prev, first), first)
    ok, _ = nx.check_planarity(g)
    return ok


# ---------------------------------------------------------------------------
# Rendition-relative transaction predicates


def is_exposed(rho: Rendition, nest: Nest, t: Transaction,
               g: Optional[AnnotatedGraph] = None) -> bool:
    """Every path has an edge drawn inside the inner-cycle disk and not on
    the inner cycle itself."""
    inner = nest.inner()
    disk = cycle_disk(rho, inner)
    inner_e = set(cycle_edges(inner))
    inside_edges: set[Edge] = set()
    for i in disk.cells:
        inside_edges |= rho.cells[i].edges
    inside_edges -= inner_e
    for p in t.paths:
        if not any(e in inside_edges for e in path_edges(p)):
            return False
    return True


def container(rho: Rendition, s: Society, t: Transaction) -> Region:
    """Cells between the traces of the two boundary paths."""
    paths, X, Y = natural_paths(s, t)
    first, last = paths[0], paths[-1]
    if len(paths) == 1:
        tr = trace_of(rho, first, closed=False)
        return Region(frozenset(), tr.nodes, tr.blocked)
    side_a = path_side(rho, first, contain_vertices=set(last) - set(s.omega))
    side_b = path_side(rho, last, contain_vertices=set(first) - set(s.omega))
    cells = side_a.cells & side_b.cells
    tr_a = trace_of(rho, first, closed=False)
    tr_b = trace_of(rho, last, closed=False)
    return Region(frozenset(cells), tr_a.nodes + tuple(reversed(tr_b.nodes)),
                  tr_a.blocked | tr_b.blocked)


def is_rho_flat(rho: Rendition, s: Society, t: Transaction) -> bool:
    reg = container(rho, s, t)
    own = set()
    for p in t.paths:
        for e in path_edges(p):
            ci = rho.edge_cell.get(e)
            if ci is not None:
                own.add(ci)
    if any(rho.cells[i].vortex for i in own):
        return False
    return not any(rho.cells[i].vortex for i in reg.cells)


def inner_subpath(inner: Path, p: Path) -> Path:
    """Maximal subpath of p between its first and last inner-cycle hits."""
    sp = frozenset(inner)
    pos = [k for k, v in enumerate(p) if v in sp]
    if not pos:
        raise OutOfRange("path misses the inner cycle")
    return p[min(pos):max(pos) + 1]


def side_cycle(inner: Path, p: Path, avoid: Iterable[int]) -> Path:
    """Closed cycle from the inner subpath of p and the inner-cycle arc
    between its endpoints whose interior avoids the given vertices."""
    sub = inner_subpath(inner, p)
    arc = cycle_arc(inner, sub[-1], sub[0], avoid)
    if len(sub) == 1:
        raise OutOfRange("degenerate inner subpath")
    out = list(sub) + list(arc[1:-1])
    return tuple(out)


def residual_vortices(rho: Rendition, s: Society, nest: Nest, t: Transaction
                      ) -> tuple[Region, Region]:
    """The two regions left in the inner-cycle disk after removing the
    container of the transaction: each is the disk of the closed cycle made
    of one boundary path's inner subpath and the far inner-cycle arc."""
    paths, _, _ = natural_paths(s, t)
    inner = nest.inner()
    others: set[int] = set()
    for p in paths:
        others |= set(inner_subpath(inner, p))
    out = []
    for q in (paths[0], paths[-1]):
        sub = inner_subpath(inner, q)
        cyc = side_cycle(inner, q, avoid=others - set(sub))
        reg = cycle_disk(rho, cyc)
        out.append(Region(reg.cells, reg.boundary_nodes, reg.blocked))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# Nests and radial linkages


def validate_nest(g: AnnotatedGraph, rho: Rendition, nest: Nest) -> ValidityReport:
    c = _Collector()
    seen: set[int] = set()
    for i, cyc in enumerate(nest.cycles):
        if set(cyc) & seen:
            c.add("NestOverlap", f"cycle {i + 1} shares vertices with another")
        seen |= set(cyc)
        if not is_grounded_cycle(rho, cyc):
            c.add("NotGrounded", f"nest cycle {i + 1} is not grounded")
    disks = []
    for i, cyc in enumerate(nest.cycles):
        try:
            disks.append(cycle_disk(rho, cyc).cells)
        except (NotGrounded, OutOfRange) as e:
            c.add("Disk", f"cycle {i + 1}: {e}")
            disks.append(frozenset())
    for i in range(len(disks) - 1):
        if not disks[i] <= disks[i + 1]:
            c.add("Nesting", f"disk {i + 1} is not inside disk {i + 2}")
    if disks:
        for vi in rho.vortex_cells:
            if vi not in disks[0]:
                c.add("VortexOutside", f"vortex cell {vi} outside the inner disk")
    return c.report()


def validate_radial(g: AnnotatedGraph, rho: Rendition, s: Society, nest: Nest,
                    r: RadialLinkage) -> ValidityReport:
    c = _Collector()
    om = set(s.omega)
    inner = set(nest.inner())
    seen: set[int] = set()
    for i, p in enumerate(r.paths):
        if set(p) & seen:
            c.add("LinkageOverlap", f"radial path {i + 1} reuses vertices")
        seen |= set(p)
        starts_om = p[0] in om
        ends_inner = p[-1] in inner
        if not (starts_om and ends_inner) and not (p[0] in inner and p[-1] in om):
            c.add("Endpoints", f"radial path {i + 1} does not join omega to the inner cycle")
        interior = p[1:-1]
        if any(v in om for v in interior):
            c.add("OmegaInternal", f"radial path {i + 1} meets omega internally")
        if not is_grounded_path(rho, p):
            c.add("NotGrounded", f"radial path {i + 1} is not grounded")
    return c.report()


def _intersection_components(cyc: Path, p: Path) -> int:
    """Number of components of the intersection subgraph of a cycle and a
    path (components counted on common vertices via shared edges)."""
    common = set(cyc) & set(p)
    if not common:
        return 0
    ce = set(cycle_edges(cyc)) & set(path_edges(p))
    parent = {v: v for v in common}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in ce:
        parent[find(u)] = find(v)
    return len({find(v) for v in common})


def is_orthogonal_radial(nest: Nest, r: RadialLinkage) -> bool:
    return all(_intersection_components(cyc, p) == 1
               for cyc in nest.cycles for p in r.paths)


def is_orthogonal_transaction(nest: Nest, t: Transaction) -> bool:
    return all(_intersection_components(cyc, p) == 2
               for cyc in nest.cycles for p in t.paths)


# ---------------------------------------------------------------------------
# Fixture generator: rendition of a vortex-free plane graph


def rendition_from_planar(g: AnnotatedGraph, outer: Sequence[int] = ()
                          ) -> Rendition:
    """One 2-node cell per edge; nodes are all vertices.  For a planar graph
    this is a valid rendition; ``outer`` fixes the disk boundary order
    (otherwise a sphere rendition is produced)."""
    cells = []
    for u, v in sorted(g.edges):
        cells.append(cell((u, v), edges=[(u, v)]))
    for v in sorted(g.vertices):
        if not g.adj[v]:
            cells.append(cell((v,), vertices=[v]))
    surface = "disk" if outer else "sphere"
    return build_rendition(cells, {v: v for v in g.vertices}, surface,
                           tuple(outer))
