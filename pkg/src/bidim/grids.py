"""Meshes, walls, annulus walls, cylindrical meshes, and surface walls.

Constructors allocate vertex ids 1..N deterministically; structures are
stored as explicit vertex sequences and re-validated rather than trusted.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .core import AnnotatedGraph, Edge, norm_edge, ValidityReport, _Collector
from .errors import OutOfRange, ParameterRange

Path = tuple[int, ...]


def path_edges(p: Sequence[int]) -> list[Edge]:
    return [norm_edge(p[i], p[i + 1]) for i in range(len(p) - 1)]


def cycle_edges(c: Sequence[int]) -> list[Edge]:
    out = path_edges(c)
    if len(c) > 2:
        out.append(norm_edge(c[-1], c[0]))
    return out


def paths_graph(paths: Iterable[Sequence[int]],
                cycles: Iterable[Sequence[int]] = ()) -> AnnotatedGraph:
    vs: set[int] = set()
    es: set[Edge] = set()
    for p in paths:
        vs.update(p)
        es.update(path_edges(p))
    for c in cycles:
        vs.update(c)
        es.update(cycle_edges(c))
    return AnnotatedGraph.build(vs, es)


# ---------------------------------------------------------------------------
# Meshes


@dataclass(frozen=True)
class Mesh:
    horizontal: tuple[Path, ...]
    vertical: tuple[Path, ...]

    @property
    def n(self) -> int:
        return len(self.horizontal)

    @property
    def m(self) -> int:
        return len(self.vertical)

    @cached_property
    def graph(self) -> AnnotatedGraph:
        return paths_graph(self.horizontal + self.vertical)

    @cached_property
    def vertices(self) -> frozenset[int]:
        return self.graph.vertices

    def perimeter(self) -> tuple[int, ...]:
        cyc = _unique_cycle(
            [self.horizontal[0], self.horizontal[-1],
             self.vertical[0], self.vertical[-1]])
        return cyc


@dataclass(frozen=True)
class Brick:
    cycle: tuple[int, ...]
    coords: tuple[int, int]

    def edges(self) -> frozenset[Edge]:
        return frozenset(cycle_edges(self.cycle))


def _contiguous_positions(path: Path, shared: set[int]) -> Optional[tuple[int, int]]:
    pos = [i for i, v in enumerate(path) if v in shared]
    if not pos:
        return None
    if pos[-1] - pos[0] + 1 != len(pos):
        return None
    return pos[0], pos[-1]


def validate_mesh(m: Mesh, host: Optional[AnnotatedGraph] = None) -> ValidityReport:
    c = _Collector()
    for name, fam in (("horizontal", m.horizontal), ("vertical", m.vertical)):
        seen: set[int] = set()
        for i, p in enumerate(fam):
            if len(set(p)) != len(p):
                c.add("PathRepeat", f"{name} path {i + 1} repeats a vertex")
            if seen & set(p):
                c.add("FamilyOverlap", f"{name} path {i + 1} reuses vertices")
            seen |= set(p)
    if host is not None:
        for p in m.horizontal + m.vertical:
            for e in path_edges(p):
                if e not in host.edges:
                    c.add("HostEdge", f"edge {e} not in host graph")
    for i, p in enumerate(m.horizontal):
        order = []
        for j, q in enumerate(m.vertical):
            span = _contiguous_positions(p, set(q))
            if span is None:
                c.add("Crossing",
                      f"P{i + 1} and Q{j + 1} do not cross in a contiguous path")
                continue
            order.append((span[0], j))
        order.sort()
        idxs = [j for _, j in order]
        if idxs != sorted(idxs) and idxs != sorted(idxs, reverse=True):
            c.add("CrossOrder", f"P{i + 1} meets verticals out of order: {idxs}")
    for j, q in enumerate(m.vertical):
        order = []
        for i, p in enumerate(m.horizontal):
            span = _contiguous_positions(q, set(p))
            if span is None:
                continue
            order.append((span[0], i))
        order.sort()
        idxs = [i for _, i in order]
        if idxs != sorted(idxs) and idxs != sorted(idxs, reverse=True):
            c.add("CrossOrder", f"Q{j + 1} meets horizontals out of order: {idxs}")
    # endpoints: each horizontal path spans from the first to the last vertical
    for i, p in enumerate(m.horizontal):
        if m.vertical and not (p[0] in set(m.vertical[0]) | set(m.vertical[-1])
                               and p[-1] in set(m.vertical[0]) | set(m.vertical[-1])):
            c.add("Endpoint", f"P{i + 1} does not end on the outer verticals")
    for j, q in enumerate(m.vertical):
        if m.horizontal and not (q[0] in set(m.horizontal[0]) | set(m.horizontal[-1])
                                 and q[-1] in set(m.horizontal[0]) | set(m.horizontal[-1])):
            c.add("Endpoint", f"Q{j + 1} does not end on the outer horizontals")
    c.stats["n"] = m.n
    c.stats["m"] = m.m
    return c.report()


def make_grid(n: int, m: int) -> Mesh:
    """The (n x m)-grid as a mesh; rows are horizontal paths."""
    if n < 2 or m < 2:
        raise ParameterRange("grid needs n, m >= 2")

    def vid(i, j):
        return (i - 1) * m + j

    horizontal = tuple(tuple(vid(i, j) for j in range(1, m + 1))
                       for i in range(1, n + 1))
    vertical = tuple(tuple(vid(i, j) for i in range(1, n + 1))
                     for j in range(1, m + 1))
    return Mesh(horizontal, vertical)


def _wall_rows(n: int, cols: int, vid) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(vid(i, j) for j in range(1, cols + 1))
                 for i in range(1, n + 1))


def _wall_edges(n: int, cols: int, vid, wrap: bool = False) -> set[Edge]:
    es: set[Edge] = set()
    for i in range(1, n + 1):
        for j in range(1, cols + 1):
            if j < cols:
                es.add(norm_edge(vid(i, j), vid(i, j + 1)))
            elif wrap:
                es.add(norm_edge(vid(i, cols), vid(i, 1)))
            if i < n and i % 2 == j % 2:
                es.add(norm_edge(vid(i, j), vid(i + 1, j)))
    return es


def _wall_verticals(n: int, cols: int, vid) -> tuple[Path, ...]:
    """Zigzag vertical paths of a wall over column pairs (2k-1, 2k)."""
    out = []
    for k in range(1, cols // 2 + 1):
        a, b = 2 * k - 1, 2 * k
        path: list[int] = []
        col = a if (1 % 2 == a % 2) else b
        path.append(vid(1, col))
        for i in range(1, n):
            # descend where parity matches, then step sideways
            down_col = a if (i % 2 == a % 2) else b
            if path[-1] != vid(i, down_col):
                path.append(vid(i, down_col))
            path.append(vid(i + 1, down_col))
        out.append(tuple(path))
    return tuple(out)


def make_elementary_wall(n: int, m: Optional[int] = None) -> Mesh:
    """Elementary (n x m)-wall: (n x 2m)-grid minus alternating rungs.

    Horizontal paths are the rows; vertical paths are the 2-column zigzags,
    so the result is a mesh of maximum degree 3.
    """
    m = n if m is None else m
    if n < 2 or m < 2:
        raise ParameterRange("wall needs n, m >= 2")
    cols = 2 * m

    def vid(i, j):
        return (i - 1) * cols + j

    rows = _wall_rows(n, cols, vid)
    verticals = _wall_verticals(n, cols, vid)
    first_q, last_q = set(verticals[0]), set(verticals[-1])

    def trim(row):
        lo = min(i for i, v in enumerate(row) if v in first_q)
        hi = max(i for i, v in enumerate(row) if v in last_q)
        return row[lo:hi + 1]

    return Mesh(tuple(trim(r) for r in rows), verticals)


# ---------------------------------------------------------------------------
# Annulus walls and cylindrical meshes


@dataclass(frozen=True)
class AnnulusWall:
    base_cycles: tuple[Path, ...]     # innermost first unless stated otherwise
    verticals: tuple[Path, ...]

    @property
    def n(self) -> int:
        return len(self.base_cycles)

    @property
    def m(self) -> int:
        return len(self.verticals)

    @cached_property
    def graph(self) -> AnnotatedGraph:
        return paths_graph(self.verticals, cycles=self.base_cycles)


@dataclass(frozen=True)
class CylindricalMesh:
    cycles: tuple[Path, ...]
    rails: tuple[Path, ...]

    @cached_property
    def graph(self) -> AnnotatedGraph:
        return paths_graph(self.rails, cycles=self.cycles)


def make_annulus_wall(n: int, m: Optional[int] = None) -> AnnulusWall:
    """Elementary (n x m)-annulus wall from the (n x 2m)-annulus grid."""
    m = n if m is None else m
    if n < 2 or m < 2:
        raise ParameterRange("annulus wall needs n, m >= 2")
    cols = 2 * m

    def vid(i, j):
        return (i - 1) * cols + j

    cycles = _wall_rows(n, cols, vid)
    verticals = _wall_verticals(n, cols, vid)
    return AnnulusWall(cycles, verticals)


def make_cylindrical_mesh(n: int, m: int) -> CylindricalMesh:
    """Polar (n x m)-cylindrical mesh: n rails, m concentric cycles."""
    if n < 3 or m < 1:
        raise ParameterRange("cylindrical mesh needs n >= 3 rails")

    def vid(i, j):   # cycle i, rail j
        return (i - 1) * n + j

    cycles = tuple(tuple(vid(i, j) for j in range(1, n + 1))
                   for i in range(1, m + 1))
    rails = tuple(tuple(vid(i, j) for i in range(1, m + 1))
                  for j in range(1, n + 1))
    return CylindricalMesh(cycles, rails)


def validate_cylindrical_mesh(cm: CylindricalMesh,
                              host: Optional[AnnotatedGraph] = None) -> ValidityReport:
    c = _Collector()
    seen: set[int] = set()
    for i, cyc in enumerate(cm.cycles):
        if seen & set(cyc):
            c.add("FamilyOverlap", f"cycle {i + 1} reuses vertices")
        seen |= set(cyc)
        if len(cyc) < 3:
            c.add("ShortCycle", f"cycle {i + 1} has fewer than 3 vertices")
    seen = set()
    for j, r in enumerate(cm.rails):
        if seen & set(r):
            c.add("FamilyOverlap", f"rail {j + 1} reuses vertices")
        seen |= set(r)
    for i, cyc in enumerate(cm.cycles):
        for j, r in enumerate(cm.rails):
            shared = set(cyc) & set(r)
            if not shared:
                c.add("Crossing", f"cycle {i + 1} misses rail {j + 1}")
                continue
            span = _contiguous_positions(r, set(cyc))
            if span is None:
                c.add("Crossing", f"rail {j + 1} crosses cycle {i + 1} twice")
            # rails are arranged cyclically, so only the innermost and
            # outermost cycles must cross each rail in a single vertex
            if i in (0, len(cm.cycles) - 1) and len(shared) != 1:
                c.add("BoundaryCross",
                      f"boundary crossing cycle {i + 1}/rail {j + 1} not a single vertex")
    for j, r in enumerate(cm.rails):
        order = []
        for i, cyc in enumerate(cm.cycles):
            span = _contiguous_positions(r, set(cyc))
            if span is not None:
                order.append((span[0], i))
        order.sort()
        idxs = [i for _, i in order]
        if idxs != sorted(idxs) and idxs != sorted(idxs, reverse=True):
            c.add("CrossOrder", f"rail {j + 1} meets cycles out of order")
    for i, cyc in enumerate(cm.cycles):
        firsts = []
        for j, r in enumerate(cm.rails):
            pos = [k for k, v in enumerate(cyc) if v in set(r)]
            if pos:
                firsts.append((min(pos), j))
        firsts.sort()
        idxs = [j for _, j in firsts]
        n = len(idxs)
        ok = any(idxs == [(s + d) % n for d in range(n)] or
                 idxs == [(s - d) % n for d in range(n)] for s in range(n))
        if idxs and not ok:
            c.add("CrossOrder", f"cycle {i + 1} meets rails out of cyclic order")
    if host is not None:
        g = cm.graph
        if not g.edges <= host.edges:
            c.add("HostEdge", "cylindrical mesh uses edges outside the host")
    return c.report()


def validate_annulus_wall(w: AnnulusWall,
                          host: Optional[AnnotatedGraph] = None) -> ValidityReport:
    return validate_cylindrical_mesh(CylindricalMesh(w.base_cycles, w.verticals), host)


# ---------------------------------------------------------------------------
# Wall segments and surface walls


@dataclass(frozen=True)
class WallSegment:
    kind: str                                   # wall | handle | crosscap | vortex
    rows: tuple[tuple[int, ...], ...]           # base W0 id matrix, n x 8n
    special_edges: frozenset[Edge] = frozenset()
    inner_rows: tuple[tuple[int, ...], ...] = ()   # W1 matrix for vortex segments

    @property
    def order(self) -> int:
        return len(self.rows)

    def left_boundary(self) -> tuple[int, ...]:
        return tuple(r[0] for r in self.rows)

    def right_boundary(self) -> tuple[int, ...]:
        return tuple(r[-1] for r in self.rows)

    def top_boundary(self) -> tuple[int, ...]:
        return tuple(self.rows[0][2 * j - 1] for j in range(1, 4 * self.order + 1))

    def base_edges(self) -> set[Edge]:
        n, cols = self.order, 8 * self.order
        es: set[Edge] = set()
        for i in range(1, n + 1):
            for j in range(1, cols + 1):
                if j < cols:
                    es.add(norm_edge(self.rows[i - 1][j - 1], self.rows[i - 1][j]))
                if i < n and i % 2 == j % 2:
                    es.add(norm_edge(self.rows[i - 1][j - 1], self.rows[i][j - 1]))
        return es

    def inner_edges(self) -> set[Edge]:
        if not self.inner_rows:
            return set()
        n, cols = self.order, 8 * self.order
        es: set[Edge] = set()
        for i in range(1, n + 1):
            for j in range(1, cols + 1):
                if j < cols:
                    es.add(norm_edge(self.inner_rows[i - 1][j - 1], self.inner_rows[i - 1][j]))
                if i < n and i % 2 == j % 2:
                    es.add(norm_edge(self.inner_rows[i - 1][j - 1], self.inner_rows[i][j - 1]))
        # close each inner row into a cycle
        for i in range(1, n + 1):
            es.add(norm_edge(self.inner_rows[i - 1][0], self.inner_rows[i - 1][-1]))
        # attach inner top boundary to base top boundary
        for j in range(1, 4 * self.order + 1):
            es.add(norm_edge(self.rows[0][2 * j - 1],
                             self.inner_rows[0][2 * j - 1]))
        return es

    def edges(self) -> frozenset[Edge]:
        return frozenset(self.base_edges() | self.special_edges | self.inner_edges())

    def vertices(self) -> frozenset[int]:
        vs = {v for r in self.rows for v in r}
        vs |= {v for r in self.inner_rows for v in r}
        return frozenset(vs)

    def nest_cycles(self) -> tuple[Path, ...]:
        """Vortex-segment nest, innermost (away from the base) first."""
        if self.kind != "vortex":
            return ()
        return tuple(self.inner_rows[i] for i in range(self.order - 1, -1, -1))

    def rails(self) -> tuple[Path, ...]:
        if self.kind != "vortex":
            return ()
        n, cols = self.order, 8 * self.order

        def vid(i, j):
            return self.inner_rows[i - 1][j - 1]

        return _wall_verticals(n, cols, vid)


def _segment(kind: str, n: int, start: int) -> tuple[WallSegment, int]:
    cols = 8 * n
    rows = tuple(tuple(start + (i - 1) * cols + j for j in range(1, cols + 1))
                 for i in range(1, n + 1))
    nxt = start + n * cols
    special: set[Edge] = set()
    inner: tuple[tuple[int, ...], ...] = ()
    if kind == "handle":
        top = rows[0]
        for i in range(1, n + 1):
            special.add(norm_edge(top[2 * i - 1], top[6 * n + 1 - 2 * i]))
        for i in range(n + 1, 2 * n + 1):
            special.add(norm_edge(top[2 * i - 1], top[8 * n + 1 - 2 * i]))
    elif kind == "crosscap":
        top = rows[0]
        for i in range(1, 2 * n + 1):
            special.add(norm_edge(top[2 * i - 1], top[4 * n + 2 * i - 1]))
    elif kind == "vortex":
        inner = tuple(tuple(nxt + (i - 1) * cols + j for j in range(1, cols + 1))
                      for i in range(1, n + 1))
        nxt += n * cols
    elif kind != "wall":
        raise ValueError(f"unknown segment kind {kind!r}")
    return WallSegment(kind, rows, frozenset(special), inner), nxt


def make_wall_segment(n: int) -> WallSegment:
    if n < 2:
        raise ParameterRange("segment order must be >= 2")
    return _segment("wall", n, 0)[0]


def make_vortex_segment(n: int) -> WallSegment:
    if n < 2:
        raise ParameterRange("segment order must be >= 2")
    return _segment("vortex", n, 0)[0]


@dataclass(frozen=True)
class SurfaceWall:
    order: int
    segments: tuple[WallSegment, ...]
    closure_edges: frozenset[Edge]

    @property
    def signature(self) -> tuple[int, int, int]:
        kinds = [s.kind for s in self.segments]
        return (kinds.count("handle"), kinds.count("crosscap"), kinds.count("vortex"))

    @cached_property
    def graph(self) -> AnnotatedGraph:
        vs: set[int] = set()
        es: set[Edge] = set(self.closure_edges)
        for s in self.segments:
            vs |= s.vertices()
            es |= s.edges()
        return AnnotatedGraph.build(vs, es)

    def base_cycles(self) -> tuple[Path, ...]:
        """Base-wall cycles; index 0 carries the top boundaries, last is the
        simple (outermost) cycle."""
        out = []
        for i in range(self.order):
            cyc: list[int] = []
            for s in self.segments:
                cyc.extend(s.rows[i])
            out.append(tuple(cyc))
        return tuple(out)

    def simple_cycle(self) -> Path:
        return self.base_cycles()[-1]

    def base_wall(self) -> AnnulusWall:
        verticals: list[Path] = []
        for s in self.segments:
            n, cols = s.order, 8 * s.order

            def vid(i, j, rows=s.rows):
                return rows[i - 1][j - 1]

            verticals.extend(_wall_verticals(n, cols, vid))
        return AnnulusWall(self.base_cycles(), tuple(verticals))

    def vortex_segments(self) -> tuple[WallSegment, ...]:
        return tuple(s for s in self.segments if s.kind == "vortex")


def make_surface_wall(n: int, h: int, c: int, b: int) -> SurfaceWall:
    """Elementary extended n-surface wall with h handles, c crosscaps, and
    b vortices: the cylindrical closure of h+c+b+1 elementary n-segments."""
    if n < 2:
        raise ParameterRange("surface wall order must be >= 2")
    if min(h, c, b) < 0:
        raise ParameterRange("signature parts must be non-negative")
    kinds = ["wall"] + ["handle"] * h + ["crosscap"] * c + ["vortex"] * b
    segments: list[WallSegment] = []
    nxt = 0
    for kind in kinds:
        seg, nxt = _segment(kind, n, nxt)
        segments.append(seg)
    closure: set[Edge] = set()
    for idx, seg in enumerate(segments):
        right = seg.right_boundary()
        left = segments[(idx + 1) % len(segments)].left_boundary()
        if len(segments) == 1:
            # single segment closes on itself
            pass
        for j in range(n):
            closure.add(norm_edge(right[j], left[j]))
    if len(segments) == 1:
        seg = segments[0]
        for j in range(n):
            closure.add(norm_edge(seg.right_boundary()[j], seg.left_boundary()[j]))
    return SurfaceWall(n, tuple(segments), frozenset(closure))


def validate_surface_wall(sw: SurfaceWall) -> ValidityReport:
    c = _Collector()
    kinds = [s.kind for s in sw.segments]
    if kinds.count("wall") != 1:
        c.add("WallSegmentCount", f"expected exactly one wall segment, got {kinds.count('wall')}")
    h, cc, b = sw.signature
    if len(sw.segments) != h + cc + b + 1:
        c.add("SegmentCount", "segment count does not match signature")
    for idx, seg in enumerate(sw.segments):
        if seg.order != sw.order:
            c.add("SegmentOrder", f"segment {idx} has order {seg.order}")
        nxt = sw.segments[(idx + 1) % len(sw.segments)]
        right, left = seg.right_boundary(), nxt.left_boundary()
        for j in range(sw.order):
            if norm_edge(right[j], left[j]) not in sw.closure_edges:
                c.add("Closure", f"missing closure edge between segments {idx} and "
                                 f"{(idx + 1) % len(sw.segments)} at row {j + 1}")
    bw = sw.base_wall()
    rep = validate_annulus_wall(bw, sw.graph)
    for v in rep.violations:
        c.add("BaseWall:" + v.kind, v.detail)
    c.stats["h"], c.stats["c"], c.stats["b"] = sw.signature
    return c.report()


# ---------------------------------------------------------------------------
# Bricks, submeshes, subdivisions


def _unique_cycle(paths: Sequence[Path]) -> tuple[int, ...]:
    g = paths_graph(paths)
    deg = {v: len(g.adj[v]) for v in g.vertices}
    alive = set(g.vertices)
    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            d = sum(1 for w in g.adj[v] if w in alive)
            if d <= 1:
                alive.remove(v)
                changed = True
    if not alive:
        raise OutOfRange("no cycle in the given path union")
    start = min(alive)
    cyc = [start]
    prev = None
    while True:
        nxts = [w for w in g.adj[cyc[-1]] if w in alive and w != prev]
        if not nxts:
            raise OutOfRange("path union does not close into a cycle")
        prev = cyc[-1]
        nxt = min(nxts)
        if nxt == start:
            break
        cyc.append(nxt)
    if set(cyc) != alive:
        raise OutOfRange("path union contains more than one cycle")
    return tuple(cyc)


def brick(m: Mesh, i: int, j: int) -> Brick:
    """The (i, j)-brick: the unique cycle in P_i ∪ P_{i+1} ∪ Q_j ∪ Q_{j+1}."""
    if not (1 <= i <= m.n - 1) or not (1 <= j <= m.m - 1):
        raise OutOfRange(f"brick ({i}, {j}) outside [{1},{m.n - 1}] x [{1},{m.m - 1}]")
    pi, pi1 = m.horizontal[i - 1], m.horizontal[i]
    qj, qj1 = m.vertical[j - 1], m.vertical[j]

    def clip(path, a, b):
        lo = _contiguous_positions(path, set(a))
        hi = _contiguous_positions(path, set(b))
        if lo is None or hi is None:
            raise OutOfRange("mesh paths do not cross as required")
        lo_i = min(lo[0], hi[0])
        hi_i = max(lo[1], hi[1])
        return path[lo_i:hi_i + 1]

    cyc = _unique_cycle([clip(pi, qj, qj1), clip(pi1, qj, qj1),
                         clip(qj, pi, pi1), clip(qj1, pi, pi1)])
    return Brick(cyc, (i, j))


def submesh(m: Mesh, rows: Sequence[int], cols: Sequence[int]) -> Mesh:
    """Submesh on the given strictly increasing row/column indices."""
    if list(rows) != sorted(set(rows)) or list(cols) != sorted(set(cols)):
        raise OutOfRange("indices must be strictly increasing")
    if not rows or not cols:
        raise OutOfRange("need at least one row and column")
    if rows[-1] > m.n or cols[-1] > m.m or rows[0] < 1 or cols[0] < 1:
        raise OutOfRange("index outside mesh")
    first_q, last_q = m.vertical[cols[0] - 1], m.vertical[cols[-1] - 1]
    first_p, last_p = m.horizontal[rows[0] - 1], m.horizontal[rows[-1] - 1]

    def clip(path, a, b):
        sa = _contiguous_positions(path, set(a))
        sb = _contiguous_positions(path, set(b))
        if sa is None or sb is None:
            raise OutOfRange("selected paths do not cross")
        lo = min(sa[0], sb[0])
        hi = max(sa[1], sb[1])
        return path[lo:hi + 1]

    horizontal = tuple(clip(m.horizontal[i - 1], first_q, last_q) for i in rows)
    vertical = tuple(clip(m.vertical[j - 1], first_p, last_p) for j in cols)
    return Mesh(horizontal, vertical)


def subdivide_mesh(m: Mesh, times: int = 1) -> Mesh:
    """Insert ``times`` degree-2 vertices on every mesh edge."""
    if times < 0:
        raise ParameterRange("times must be >= 0")
    if times == 0:
        return m
    nxt = max(m.vertices) + 1
    mapping: dict[Edge, list[int]] = {}
    for p in m.horizontal + m.vertical:
        for e in path_edges(p):
            if e not in mapping:
                mapping[e] = list(range(nxt, nxt + times))
                nxt += times

    def expand(path: Path) -> Path:
        out = [path[0]]
        for a, b in zip(path, path[1:]):
            mids = mapping[norm_edge(a, b)]
            out.extend(mids if a < b else list(reversed(mids)))
            out.append(b)
        return tuple(out)

    return Mesh(tuple(expand(p) for p in m.horizontal),
                tuple(expand(p) for p in m.vertical))
