"""Red/blank dichotomy lemmas: homogenizing meshes and transactions, and
routing red meshes out of red structures.

The serpentine constructions are explicit index arithmetic over the stored
path orderings; every returned object is re-checked by its verifier before
it leaves this module.
"""

from __future__ import annotations

from math import isqrt
from typing import Callable, Optional, Sequence

from .core import (AnnotatedGraph, MinorModel, RedMinorModel, Separation,
                   ValidityReport, _Collector, all_red_model, grid_pattern,
                   norm_edge, red_clique_or_separation, verify_minor_model,
                   verify_red_minor_model)
from .errors import (MissingRedWitness, NotFlat, NotRed, OracleFailure,
                     OrderMismatch, OrderTooSmall, ParameterRange,
                     PreconditionRedMiss)
from .grids import (Brick, Mesh, Path, SurfaceWall, brick, path_edges,
                    submesh, validate_mesh)
from .rendition import (Cell, Nest, Region, Rendition, Society, Transaction,
                        build_rendition, cycle_disk, is_blank,
                        is_exposed, is_grounded_subgraph,
                        is_orthogonal_transaction, is_rho_flat, natural_paths,
                        path_side, region_crop, rendition_from_planar, strip,
                        strip_society, trace_of, society_is_disk_realizable)

# ---------------------------------------------------------------------------
# Bricks relative to a rendition


def brick_subgraph(g: AnnotatedGraph, rho: Rendition, m: Mesh, i: int, j: int
                   ) -> tuple[AnnotatedGraph, frozenset[int]]:
    """H_B: cells carrying an edge of the (i,j)-brick plus cells inside the
    brick disk (the side avoiding the mesh perimeter)."""
    b = brick(m, i, j)
    per = m.perimeter()
    per_cells = [rho.edge_cell[e] for e in _cyc_edges(per)
                 if e in rho.edge_cell and e not in b.edges()]
    if rho.surface == "sphere":
        # a flat mesh keeps every vortex outside its perimeter; anchor there
        per_cells = list(per_cells) + [ci for ci in rho.vortex_cells
                                       if ci not in per_cells]
    disk = cycle_disk(rho, b.cycle, avoid_cells=per_cells,
                      avoid_vertices=set(per) - set(b.cycle))
    cells = set(disk.cells)
    for e in b.edges():
        ci = rho.edge_cell.get(e)
        if ci is not None:
            cells.add(ci)
    vs: set[int] = set(b.cycle)
    es: set = set()
    for ci in cells:
        vs |= rho.cells[ci].vertices
        es |= rho.cells[ci].edges
    sub = AnnotatedGraph(frozenset(vs), frozenset(es), g.red & frozenset(vs))
    return sub, frozenset(cells)


def _cyc_edges(cyc: Sequence[int]):
    return [norm_edge(cyc[k], cyc[(k + 1) % len(cyc)]) for k in range(len(cyc))]


def brick_is_red(g: AnnotatedGraph, rho: Rendition, m: Mesh, i: int, j: int) -> bool:
    sub, _ = brick_subgraph(g, rho, m, i, j)
    return bool(sub.vertices & g.red)


def mesh_homogeneity(g: AnnotatedGraph, rho: Rendition, m: Mesh) -> str:
    """"red", "blank", or "mixed" over all bricks in ascending (i, j)."""
    reds = 0
    total = 0
    for i in range(1, m.n):
        for j in range(1, m.m):
            total += 1
            if brick_is_red(g, rho, m, i, j):
                reds += 1
    if reds == total:
        return "red"
    if reds == 0:
        return "blank"
    return "mixed"


def verify_red_mesh(g: AnnotatedGraph, rho: Rendition, m: Mesh) -> ValidityReport:
    """Valid mesh, grounded in rho, every brick red."""
    c = _Collector()
    base = validate_mesh(m, host=g)
    c.items.extend(base.violations)
    edges = {e for p in m.horizontal + m.vertical for e in path_edges(p)}
    if not is_grounded_subgraph(rho, edges, m.vertices):
        c.add("NotGrounded", "mesh is not grounded in the rendition")
    for i in range(1, m.n):
        for j in range(1, m.m):
            if not brick_is_red(g, rho, m, i, j):
                c.add("BrickBlank", f"brick ({i},{j}) contains no red vertex")
    return c.report()


def is_flat_mesh(g: AnnotatedGraph, rho: Rendition, m: Mesh) -> bool:
    """Flat mesh witness check: rho has one vortex and the perimeter trace
    separates the mesh interior from it."""
    if len(rho.vortex_cells) != 1:
        return False
    c0 = rho.vortex_cells[0]
    per = m.perimeter()
    try:
        disk = cycle_disk(rho, per, avoid_cells=[c0])
    except Exception:
        return False
    if c0 in disk.cells:
        return False
    per_edges = set(_cyc_edges(per))
    for p in m.horizontal + m.vertical:
        for e in path_edges(p):
            if e in per_edges:
                continue
            ci = rho.edge_cell.get(e)
            if ci is None:
                return False
            if ci not in disk.cells:
                return False
    return True


# ---------------------------------------------------------------------------
# Lemma: flat mesh to homogeneous submesh


def homogenize_flat_mesh(g: AnnotatedGraph, rho: Rendition, m: Mesh,
                         r: Optional[int] = None
                         ) -> tuple[Mesh, Rendition, str]:
    """From a flat (r+2)^2-mesh extract a homogeneous r-submesh; in the
    blank case the rendition is rebuilt with one vortex swallowing
    everything outside the chosen brick."""
    n = m.n
    if r is None:
        r = isqrt(n) - 2
    if r < 1 or (r + 2) ** 2 != n or m.m != n:
        raise OrderTooSmall(f"mesh order {m.n}x{m.m} is not (r+2)^2 for r >= 1")
    if not is_flat_mesh(g, rho, m):
        raise NotFlat("mesh is not flat in the rendition")
    alpha = [i + (i - 1) * (r + 2) for i in range(1, r + 3)]
    m_alpha = submesh(m, alpha, alpha)
    blank_at: Optional[tuple[int, int]] = None
    for i in range(1, r + 2):
        for j in range(1, r + 2):
            if not brick_is_red(g, rho, m_alpha, i, j):
                blank_at = (i, j)
                break
        if blank_at:
            break
    if blank_at is None:
        rows = list(range(2, r + 2))
        sub = submesh(m_alpha, rows, rows)
        assert mesh_homogeneity(g, rho, sub) == "red"
        return sub, rho, "red"
    i, j = blank_at
    rows = [alpha[i - 1] + 1 + d for d in range(1, r + 1)]
    cols = [alpha[j - 1] + 1 + d for d in range(1, r + 1)]
    sub = submesh(m, rows, cols)
    b = brick(m_alpha, i, j)
    c0 = rho.vortex_cells[0]
    inner = cycle_disk(rho, b.cycle, avoid_cells=[c0])
    tr = trace_of(rho, b.cycle, closed=True)
    outside = [k for k in range(len(rho.cells)) if k not in inner.cells]
    vs: set[int] = set()
    es: set = set()
    for k in outside:
        vs |= rho.cells[k].vertices
        es |= rho.cells[k].edges
    vs |= {rho.node_vertex[nd] for nd in tr.nodes}
    new_cells = [rho.cells[k] for k in sorted(inner.cells)]
    new_cells.append(Cell(tr.nodes, frozenset(es), frozenset(vs), True, 0))
    pi = {nd: v for nd, v in rho.pi
          if any(nd in c.nodes for c in new_cells)}
    rho2 = Rendition(tuple(new_cells), tuple(sorted(pi.items())), "sphere", ())
    assert mesh_homogeneity(g, rho2, sub) == "blank"
    assert is_blank(rho2, g)
    return sub, rho2, "blank"


# ---------------------------------------------------------------------------
# Lemma: red middle row to fully red mesh (accordion construction)


def _span(path: Path, other: frozenset[int]) -> tuple[int, int]:
    pos = [k for k, v in enumerate(path) if v in other]
    if not pos:
        raise OrderMismatch("paths do not cross")
    return min(pos), max(pos)


def _seg(path: Path, a: frozenset[int], b: frozenset[int]) -> Path:
    """Subpath from the crossing with a to the crossing with b, inclusive,
    oriented a -> b."""
    a_lo, a_hi = _span(path, a)
    b_lo, b_hi = _span(path, b)
    if a_lo <= b_lo:
        return path[a_lo:b_hi + 1]
    return tuple(reversed(path[b_lo:a_hi + 1]))


def _join(*segs: Path) -> Path:
    """Concatenate path segments into one simple path.

    Consecutive segments may share a multi-vertex crossing; whichever end of
    the next segment overlaps is absorbed.  When the next segment enters the
    shared crossing from the far side (a U-turn through a 2-vertex
    crossing), the doubled-back part is trimmed instead.
    """
    out: list[int] = []
    for s0 in segs:
        if not s0:
            continue
        if not out:
            out.extend(s0)
            continue
        candidates: list[list[int]] = []
        for s in (list(s0), list(reversed(s0))):
            kmax = min(len(out), len(s))
            for k in range(kmax, 0, -1):
                if out[-k:] == s[:k]:
                    candidates.append(out + s[k:])
            for k in range(kmax, 1, -1):
                if out[-k:] == s[:k][::-1]:
                    candidates.append(out[:len(out) - k + 1] + s[k:])
        chosen = next((c for c in candidates if len(set(c)) == len(c)), None)
        if chosen is None:
            raise OrderMismatch(f"segments do not join: {out[-3:]} vs {s0[:3]}")
        out = chosen
    return tuple(out)


def fully_red_mesh(g: AnnotatedGraph, rho: Rendition, m: Mesh,
                   middle_row: Optional[int] = None) -> Mesh:
    """Fold a (2(r+1) x r(r-1))-mesh whose middle brick row is red into a
    fully red r-mesh.

    The bands along the middle rows become the first r-1 horizontal paths;
    the vertical paths snake over/under the bands through the free rows,
    reversing orientation at every hop, so that each new brick swallows one
    red middle brick.  ``middle_row`` is r by default; r+1 selects the
    mirrored fold used by the transaction and surface-wall pipelines.
    """
    N, M = m.n, m.m
    if N < 4 or N % 2 != 0:
        raise OrderMismatch(f"mesh has {N} horizontal paths, need 2(r+1)")
    r = N // 2 - 1
    if r < 2 or M != r * (r - 1):
        raise OrderMismatch(f"mesh is {N}x{M}, need 2(r+1) x r(r-1)")
    m0 = middle_row if middle_row is not None else r
    if m0 not in (r, r + 1):
        raise ParameterRange("middle_row must be r or r+1")
    for j in range(1, M):
        if not brick_is_red(g, rho, m, m0, j):
            raise PreconditionRedMiss(f"middle brick ({m0},{j}) has no red vertex")

    P = m.horizontal
    Q = m.vertical

    def col(band: int, k: int) -> int:
        return (band - 1) * r + k

    down_first = (m0 == r)
    # spine side per band: bands with i ≡ r-1 (mod 2) carry the spine on the
    # rail nearer the free rows used for the final extension
    def spine_top(band: int) -> bool:
        if down_first:
            return band % 2 == (r - 1) % 2
        return band % 2 != (r - 1) % 2

    top_row, bot_row = m0, m0 + 1

    def qset(c: int) -> frozenset[int]:
        return frozenset(Q[c - 1])

    def pset(i: int) -> frozenset[int]:
        return frozenset(P[i - 1])

    horizontals: list[Path] = []
    for band in range(1, r):
        row = top_row if spine_top(band) else bot_row
        horizontals.append(_seg(P[row - 1], qset(col(band, 1)), qset(col(band, r))))
    if down_first:
        final_row = N
        horizontals.append(_seg(P[final_row - 1],
                                qset(col(r - 1, 1)), qset(col(r - 1, r))))
    else:
        final_row = 1
        horizontals.append(_seg(P[final_row - 1],
                                qset(col(r - 1, 1)), qset(col(r - 1, r))))

    verticals: list[Path] = []
    for j in range(1, r + 1):
        segs: list[Path] = []
        o = j
        for band in range(1, r):
            c = col(band, o)
            if spine_top(band):
                # arrive/start at the top rail, rung down to the bottom tip
                segs.append(_seg(Q[c - 1], pset(top_row), pset(bot_row)))
            else:
                segs.append(_seg(Q[c - 1], pset(bot_row), pset(top_row)))
            if band == r - 1:
                break
            c2 = col(band + 1, r + 1 - o)
            if spine_top(band):
                # tips at the bottom: link below
                urow = bot_row + (r + 1 - o)
                segs.append(_seg(Q[c - 1], pset(bot_row), pset(urow)))
                segs.append(_seg(P[urow - 1], qset(c), qset(c2)))
                segs.append(_seg(Q[c2 - 1], pset(urow), pset(bot_row)))
            else:
                # tips at the top: link above, the widest hop runs along the
                # top rail between the blocks
                if o == r:
                    segs.append(_seg(P[top_row - 1], qset(c), qset(c2)))
                else:
                    urow = top_row - (r - o)
                    segs.append(_seg(Q[c - 1], pset(top_row), pset(urow)))
                    segs.append(_seg(P[urow - 1], qset(c), qset(c2)))
                    segs.append(_seg(Q[c2 - 1], pset(urow), pset(top_row)))
            o = r + 1 - o
        last_c = col(r - 1, o)
        if down_first:
            segs.append(_seg(Q[last_c - 1], pset(bot_row), pset(final_row)))
        else:
            segs.append(_seg(Q[last_c - 1], pset(top_row), pset(final_row)))
        verticals.append(_join(*segs))

    out = Mesh(tuple(horizontals), tuple(verticals))
    rep = verify_red_mesh(g, rho, out)
    assert rep.ok, rep.describe()
    return out


# ---------------------------------------------------------------------------
# Lemma: red mesh to red grid minor


def red_grid_from_red_mesh(g: AnnotatedGraph, rho: Rendition, m: Mesh
                           ) -> RedMinorModel:
    """All-red (k x k)-grid minor from a red (3k-1)-mesh; every branch set
    contains exactly one brick-induced subgraph from the skip-every-third
    family."""
    n = m.n
    if m.m != n or (n + 1) % 3 != 0:
        raise OrderMismatch(f"mesh is {m.n}x{m.m}, need (3k-1)-mesh")
    k = (n + 1) // 3
    if k < 1:
        raise OrderMismatch("mesh too small")
    rep = verify_red_mesh(g, rho, m)
    if not rep.ok:
        raise NotRed(rep.describe())
    P, Q = m.horizontal, m.vertical
    branch: dict[int, frozenset[int]] = {}
    for a in range(k):
        for b in range(k):
            sub, _ = brick_subgraph(g, rho, m, 3 * a + 1, 3 * b + 1)
            vs = set(sub.vertices)
            if b < k - 1:
                row = P[3 * a]
                lo, _ = _span(row, frozenset(Q[3 * b + 1]))
                nxt_lo, _ = _span(row, frozenset(Q[3 * b + 3]))
                _, hi = _span(row, frozenset(Q[3 * b + 1]))
                vs |= set(row[hi:nxt_lo])
            if a < k - 1:
                colp = Q[3 * b]
                _, hi = _span(colp, frozenset(P[3 * a + 1]))
                nxt_lo, _ = _span(colp, frozenset(P[3 * a + 3]))
                vs |= set(colp[hi:nxt_lo])
            branch[a * k + b + 1] = frozenset(vs)
    model = all_red_model(grid_pattern(k), branch)
    rep = verify_red_minor_model(g, model)
    assert rep.ok, rep.describe()
    return model


# ---------------------------------------------------------------------------
# Lemma: homogenize a flat transaction


def strip_red_flags(s: Society, t: Transaction) -> list[bool]:
    return [bool(strip(s, t, i).red) for i in range(1, t.order)]


def transaction_tag(s: Society, t: Transaction) -> str:
    """"red" (all non-boundary strips red), "blank" (no strip red), else
    "mixed"."""
    flags = strip_red_flags(s, t)
    if not any(flags):
        return "blank"
    inner = flags[1:-1] if len(flags) > 2 else flags
    if all(inner):
        return "red"
    return "mixed"


def homogenize_transaction(s: Society, rho: Optional[Rendition],
                           t: Transaction, q: int, p: int
                           ) -> tuple[str, Transaction]:
    """Blank sub-transaction of order p or red sub-transaction of order q
    from a flat transaction of order q*p."""
    if t.order != q * p:
        raise OrderMismatch(f"order {t.order} != q*p = {q * p}")
    paths, X, Y = natural_paths(s, t)
    nat = Transaction(paths)
    if not society_is_disk_realizable(strip_society(s, nat)):
        raise NotFlat("strip society admits no vortex-free disk rendition")
    flags = strip_red_flags(s, nat)
    for i in range(1, q + 1):
        lo = (i - 1) * p + 1
        hi = i * p - 1
        if not any(flags[l - 1] for l in range(lo, hi + 1)):
            sub = Transaction(paths[(i - 1) * p: i * p])
            assert transaction_tag(s, sub) == "blank"
            return "blank", sub
    sub = Transaction(tuple(paths[(i - 1) * p] for i in range(1, q + 1)))
    assert transaction_tag(s, sub) in ("red",)
    return "red", sub


# ---------------------------------------------------------------------------
# Lemma: red exposed transaction to red mesh


def _cycle_arcs(cyc: Path, paths: Sequence[Path]) -> tuple[Path, Path]:
    """Split a cycle crossed twice by each path into its two crossing-free
    arcs (each meeting every path once)."""
    L = len(cyc)
    on_path: list[Optional[int]] = [None] * L
    for idx, p in enumerate(paths):
        sp = set(p)
        for k, v in enumerate(cyc):
            if v in sp:
                on_path[k] = idx
    # maximal crossing runs in cyclic order (cyclic predecessor handles wrap)
    runs: list[tuple[int, int]] = []
    for k in range(L):
        cur = on_path[k]
        if cur is not None and cur != on_path[(k - 1) % L]:
            runs.append((k, cur))
    npaths = len(paths)
    if len(runs) != 2 * npaths:
        raise OrderMismatch(
            f"cycle is crossed in {len(runs)} runs, expected {2 * npaths}")
    for s0 in range(2 * npaths):
        window = [runs[(s0 + d) % (2 * npaths)][1] for d in range(npaths)]
        if len(set(window)) == npaths:
            break
    else:
        raise OrderMismatch("cycle crossings do not split into two arcs")
    end_a = runs[(s0 + npaths - 1) % (2 * npaths)]
    arc_a = _arc_between(cyc, runs[s0][0], end_a[0], on_path)
    s1 = (s0 + npaths) % (2 * npaths)
    end_b = runs[(s1 + npaths - 1) % (2 * npaths)]
    arc_b = _arc_between(cyc, runs[s1][0], end_b[0], on_path)
    return arc_a, arc_b


def _arc_between(cyc: Path, pos_a: int, pos_b: int, on_path) -> Path:
    L = len(cyc)
    # extend pos_a backwards over its own crossing run, pos_b forwards
    pa = pos_a
    while on_path[(pa - 1) % L] == on_path[pos_a]:
        pa = (pa - 1) % L
    pb = pos_b
    while on_path[(pb + 1) % L] == on_path[pos_b]:
        pb = (pb + 1) % L
    out = []
    k = pa
    while True:
        out.append(cyc[k])
        if k == pb:
            break
        k = (k + 1) % L
    return tuple(out)


def mesh_from_nest_and_paths(nest_cycles: Sequence[Path],
                             paths: Sequence[Path]) -> Mesh:
    """(2s x n)-mesh from s nest cycles each crossed twice by each of n
    disjoint paths: rows are the cycle arcs (outermost first, then mirrored),
    columns are the path segments between their outer-cycle crossings."""
    outer = nest_cycles[-1]
    cols = [_seg(p, frozenset(outer), frozenset(outer)) for p in paths]
    outer_a, outer_b = _cycle_arcs(outer, cols)
    # orient columns so each starts on the same outer arc
    oriented = []
    for c in cols:
        lo_a, _ = _span(c, frozenset(outer_a))
        lo_b, _ = _span(c, frozenset(outer_b))
        oriented.append(c if lo_a < lo_b else tuple(reversed(c)))
    # per cycle: the "top" arc is the one the first column meets earlier
    tops: list[Path] = []
    bottoms: list[Path] = []
    ref = oriented[0]
    for cyc in nest_cycles:
        a, b = _cycle_arcs(cyc, oriented)
        pa, _ = _span(ref, frozenset(a))
        pb, _ = _span(ref, frozenset(b))
        if pa > pb:
            a, b = b, a
        tops.append(a)
        bottoms.append(b)
    rows = list(reversed(tops)) + bottoms     # outermost top ... outermost bottom
    fixed_rows = []
    for rw in rows:
        lo1, _ = _span(rw, frozenset(oriented[0]))
        lon, _ = _span(rw, frozenset(oriented[-1]))
        fixed_rows.append(rw if lo1 < lon else tuple(reversed(rw)))
    return Mesh(tuple(fixed_rows), tuple(oriented))


def red_mesh_from_red_transaction(g: AnnotatedGraph, s: Society,
                                  rho: Rendition, nest: Nest, t: Transaction,
                                  strip_rho: Optional[Rendition] = None
                                  ) -> tuple[Mesh, Rendition]:
    """Red r-mesh from a red exposed transaction orthogonal to a nest of
    order r+2 in a blank cylindrical rendition."""
    order = t.order
    # order = 3r(r-1) - 2
    v = (order + 2) // 3
    r = (1 + isqrt(1 + 4 * v)) // 2
    if 3 * r * (r - 1) - 2 != order:
        raise OrderMismatch(f"order {order} is not 3r(r-1)-2")
    if nest.order < r + 2:
        raise OrderTooSmall(f"nest order {nest.order} < r+2 = {r + 2}")
    if not is_blank(rho, g):
        raise NotRed("rendition is not blank")
    if not rho.vortex_cells:
        raise NotFlat("cylindrical rendition needs its vortex")
    c0 = rho.vortex_cells[0]
    vortex_edges = rho.cells[c0].edges
    paths, X, Y = natural_paths(s, t)
    for p in paths:
        if not any(e in vortex_edges for e in path_edges(p)):
            raise NotRed("transaction is not exposed through the vortex")
    if not is_orthogonal_transaction(Nest(nest.cycles[:r + 2]), t):
        raise NotRed("transaction is not orthogonal to the nest")
    nat = Transaction(paths)
    if transaction_tag(s, nat) != "red":
        raise NotRed("transaction is not red")
    if strip_rho is None:
        soc1 = strip_society(s, nat)
        strip_rho = rendition_from_planar(soc1.graph, outer=soc1.omega)
    pick = [paths[3 * mm] for mm in range(r * (r - 1))]
    mesh = mesh_from_nest_and_paths([nest.cycles[i] for i in range(1, r + 2)],
                                    pick)
    rep = validate_mesh(mesh, host=g)
    assert rep.ok, rep.describe()
    out = fully_red_mesh(g, strip_rho, mesh, middle_row=r + 1)
    return out, strip_rho


# ---------------------------------------------------------------------------
# Lemma: flat sub-transaction in a bounded rendition


def select_flat_transaction(s: Society, rho: Rendition, t: Transaction,
                            p: int, unchecked: bool = False) -> Transaction:
    """rho-flat sub-transaction of order p via the (b+1)-block pigeonhole."""
    from .rendition import breadth, rendition_depth
    b = breadth(rho)
    d = max(rendition_depth(rho), 2)
    need = (b + 1) * (2 * b * d + p)
    if t.order < p:
        raise OrderTooSmall(f"order {t.order} < p = {p}")
    if not unchecked and t.order < need:
        raise OrderTooSmall(f"order {t.order} < (b+1)(2bd+p) = {need}")
    paths, X, Y = natural_paths(s, t)
    n = len(paths)
    block = max(n // (b + 1), p)
    candidates = []
    for i in range(b + 1):
        lo = i * block
        if lo + p <= n:
            mid = lo + max((min(block, n - lo) - p) // 2, 0)
            candidates.append(mid)
    for start in candidates:
        sub = Transaction(paths[start:start + p])
        if is_rho_flat(rho, s, sub):
            return sub
    for start in range(0, n - p + 1):
        sub = Transaction(paths[start:start + p])
        if is_rho_flat(rho, s, sub):
            return sub
    raise OrderTooSmall("no rho-flat sub-transaction of the requested order")


# ---------------------------------------------------------------------------
# Lemma: R-blank transaction or red mesh (orthogonal version)


def nest_r_consistent(g: AnnotatedGraph, rho: Rendition, nest: Nest) -> bool:
    disk = cycle_disk(rho, nest.inner())
    soc = region_crop(g, rho, disk)
    return g.red <= soc.graph.vertices


def transaction_r_blank(g: AnnotatedGraph, rho: Rendition, s: Society,
                        t: Transaction) -> bool:
    """R-blank: no red in cells of the container or cells carrying boundary
    path edges."""
    from .rendition import container
    reg = container(rho, s, t)
    cells = set(reg.cells)
    paths, _, _ = natural_paths(s, t)
    for p in (paths[0], paths[-1]):
        for e in path_edges(p):
            ci = rho.edge_cell.get(e)
            if ci is not None:
                cells.add(ci)
    for ci in cells:
        if rho.cells[ci].vertices & g.red:
            return False
    return True


def _between_region(g: AnnotatedGraph, rho: Rendition, inner: Path,
                    pa: Path, pb: Path, avoid: set[int]) -> frozenset[int]:
    """Vertices drawn between the inner subpaths of two paths: the disk of
    the closed cycle [sub_a, exit arc, reversed sub_b, entry arc] plus the
    boundary subpaths themselves."""
    from .rendition import cycle_arc, inner_subpath
    sub_a = inner_subpath(inner, pa)
    sub_b = inner_subpath(inner, pb)
    block_av = (avoid | set(sub_a) | set(sub_b)) - {sub_a[0], sub_a[-1],
                                                    sub_b[0], sub_b[-1]}
    arc_out = cycle_arc(inner, sub_a[-1], sub_b[-1], block_av)
    arc_in = cycle_arc(inner, sub_b[0], sub_a[0], block_av)
    cyc = tuple(sub_a) + tuple(arc_out[1:]) + tuple(reversed(sub_b))[1:] + \
        tuple(arc_in[1:-1])
    reg = cycle_disk(rho, cyc)
    cells = set(reg.cells)
    for q in (sub_a, sub_b):
        for e in path_edges(q):
            ci = rho.edge_cell.get(e)
            if ci is not None:
                cells.add(ci)
    verts: set[int] = set(sub_a) | set(sub_b)
    for ci in cells:
        verts |= rho.cells[ci].vertices
    return frozenset(verts)


def blank_or_red_orthogonal(g: AnnotatedGraph, rho: Rendition, s: Society,
                            nest: Nest, t: Transaction, p: int,
                            unchecked: bool = False
                            ) -> tuple[str, object]:
    """Either a red r-mesh or an R-blank sub-transaction of order p, for a
    flat exposed transaction of order r(r-1)p orthogonal to an R-consistent
    nest of order r+1."""
    r = nest.order - 1
    if r < 2:
        raise OrderTooSmall("nest order must be r+1 >= 3")
    if not unchecked and t.order != r * (r - 1) * p:
        raise OrderMismatch(f"order {t.order} != r(r-1)p = {r * (r - 1) * p}")
    if not nest_r_consistent(g, rho, nest):
        raise PreconditionRedMiss("nest is not R-consistent")
    if not is_rho_flat(rho, s, t):
        raise NotFlat("transaction is not rho-flat")
    if not is_exposed(rho, nest, t):
        from .errors import NotExposed
        raise NotExposed("transaction is not rho-exposed")
    if not is_orthogonal_transaction(nest, t):
        from .errors import NotOrthogonal
        raise NotOrthogonal("transaction is not orthogonal to the nest")
    paths, X, Y = natural_paths(s, t)
    inner = nest.inner()
    blocks = t.order // p
    from .rendition import inner_subpath
    all_inner: list[set[int]] = [set(inner_subpath(inner, q)) for q in paths]

    def region_red(lo: int, hi: int) -> bool:
        """Red in the area between inner subpaths of paths lo..hi (1-based)."""
        avoid: set[int] = set()
        for k, vs in enumerate(all_inner, start=1):
            if k < lo or k > hi:
                avoid |= vs
        verts = _between_region(g, rho, inner, paths[lo - 1], paths[hi - 1],
                                avoid)
        return bool(verts & g.red)

    for i in range(1, blocks + 1):
        lo, hi = (i - 1) * p + 1, i * p
        if not region_red(lo, hi):
            sub = Transaction(paths[lo - 1:hi])
            assert transaction_r_blank(g, rho, s, sub)
            return "blank", sub
    pick = [paths[(i - 1) * p] for i in range(1, r * (r - 1) + 1)]
    mesh = mesh_from_nest_and_paths([nest.cycles[i] for i in range(0, r + 1)],
                                    pick)
    rep = validate_mesh(mesh, host=g)
    assert rep.ok, rep.describe()
    out = fully_red_mesh(g, rho, mesh, middle_row=r + 1)
    return "red", out


# ---------------------------------------------------------------------------
# Lemma: surface wall with red vortex segments to red mesh


def red_mesh_from_surface_wall(g: AnnotatedGraph, rho: Rendition,
                               sw: SurfaceWall) -> Mesh:
    """Red r-mesh from an extended r(r-1)-surface-wall with signature
    (0, 0, r(r-1)-1) whose vortex-segment disks all contain red vertices.

    Loop i runs along base cycle i and climbs over vortex segments i..b via
    their rails and i-th nest cycle; the radial stubs at the two ends of the
    wall segment are the horizontal paths.
    """
    n = sw.order
    r = (1 + isqrt(1 + 4 * n)) // 2
    if r * (r - 1) != n or r < 2:
        raise OrderMismatch(f"wall order {n} is not r(r-1)")
    h, c, b = sw.signature
    if (h, c, b) != (0, 0, n - 1):
        raise OrderMismatch(f"signature {(h, c, b)} is not (0,0,r(r-1)-1)")
    vsegs = sw.vortex_segments()
    for idx, seg in enumerate(vsegs):
        inner_cycle = seg.nest_cycles()[0]
        verts = {v for row in seg.inner_rows for v in row}
        if not (frozenset(verts) - set(inner_cycle)) & g.red and \
                not (set(inner_cycle) & g.red):
            raise MissingRedWitness(f"vortex segment {idx} has no red witness")

    wallseg = next(s2 for s2 in sw.segments if s2.kind == "wall")
    from .grids import _wall_verticals

    def wvid(i, j, rows=wallseg.rows):
        return rows[i - 1][j - 1]

    wall_verts = _wall_verticals(n, 8 * n, wvid)
    left = [wall_verts[r - 1 - d] for d in range(r)]        # T_1..T_r
    right = [wall_verts[-1 - d] for d in range(r + 2)]      # T_{r+1}..T_{2r+2}
    horizontals = tuple(left + right)

    seg_order = list(sw.segments)
    w_idx = seg_order.index(wallseg)
    after = seg_order[w_idx + 1:] + seg_order[:w_idx]       # rightward around

    trav = list(reversed(after))       # encounter order when heading left
    verticals: list[Path] = []
    for i in range(1, n + 1):
        segs: list[Path] = []
        # start inside the wall segment at vertical r (= T_1), heading left
        row = wallseg.rows[i - 1]
        segs.append(tuple(reversed(row[:2 * r - 1])))
        prev_edge = wallseg.left_boundary()[i - 1]
        for enc, seg in enumerate(trav, start=1):
            entry = seg.right_boundary()[i - 1]
            segs.append((prev_edge, entry))
            if seg.kind == "vortex" and enc >= i:
                segs.append(_vortex_detour_rightward(seg, i, n, reverse=True))
            else:
                segs.append(tuple(reversed(seg.rows[i - 1])))
            prev_edge = seg.left_boundary()[i - 1]
        # close the loop back into the wall segment from its right side
        segs.append((prev_edge, wallseg.right_boundary()[i - 1]))
        segs.append(tuple(reversed(row[8 * n - 2 * (r + 2):])))
        verticals.append(_join(*segs))
    mesh = Mesh(horizontals, tuple(verticals))
    rep = validate_mesh(mesh, host=g)
    assert rep.ok, rep.describe()
    return fully_red_mesh(g, rho, mesh, middle_row=r)


def _vortex_detour_rightward(seg, i: int, n: int, reverse: bool = False) -> Path:
    """Walk row i of a vortex segment left-to-right, climbing over the inner
    annulus via zigzags i and 4n-i+1 and inner row i (nest cycle i counted
    from the outside), sweeping the seam side."""
    from .grids import _wall_verticals
    rows = seg.rows
    irows = seg.inner_rows
    cols = 8 * n

    def wv(k):   # zigzag vertical k of the base
        def vid(a, b):
            return rows[a - 1][b - 1]
        return _wall_verticals(n, cols, vid)[k - 1]

    def iv(k):
        def vid(a, b):
            return irows[a - 1][b - 1]
        return _wall_verticals(n, cols, vid)[k - 1]

    def first_visit(zz: Path, row_vs: set[int]) -> int:
        return next(k for k, v in enumerate(zz) if v in row_vs)

    x, xb = i, 4 * n - i + 1
    row = rows[i - 1]
    irow = irows[i - 1]
    walk: list[int] = []

    def extend(vs):
        for v in vs:
            if not walk or walk[-1] != v:
                walk.append(v)

    # base row i from the left edge to the first row visit of zigzag x
    zz = wv(x)
    kx = first_visit(zz, set(row))
    start_col = row.index(zz[kx])
    extend(row[:start_col + 1])
    # climb zigzag x to (1, 2x-1)
    extend(reversed(zz[:kx + 1]))
    # step to the even column, cross inward, step back to the odd column
    extend((rows[0][2 * x - 2], rows[0][2 * x - 1],
            irows[0][2 * x - 1], irows[0][2 * x - 2]))
    # dive inner zigzag x to inner row i
    izz = iv(x)
    kxi = first_visit(izz, set(irow))
    extend(izz[:kxi + 1])
    ca = irow.index(izz[kxi])
    if i == 1:
        # the seam arc already runs on the crossing row: stop on the even
        # seam column and cross outward there
        extend(irow[k] for k in range(ca, -1, -1))
        extend(irow[k] for k in range(len(irow) - 1, 2 * xb - 2, -1))
        extend((rows[0][2 * xb - 1],))
        end_col = 2 * xb - 1
        extend(row[end_col:])
        assert len(set(walk)) == len(walk), "detour repeats a vertex"
        return tuple(reversed(walk)) if reverse else tuple(walk)
    # seam arc of inner row i: through the closure to zigzag xb's first visit
    izz2 = iv(xb)
    kxbi = first_visit(izz2, set(irow))
    cb = irow.index(izz2[kxbi])
    extend(irow[k] for k in range(ca, -1, -1))
    extend(irow[k] for k in range(len(irow) - 1, cb - 1, -1))
    # climb inner zigzag xb back to inner row 1, cross outward
    extend(reversed(izz2[:kxbi + 1]))
    extend((irows[0][2 * xb - 2], irows[0][2 * xb - 1],
            rows[0][2 * xb - 1], rows[0][2 * xb - 2]))
    # descend base zigzag xb to row i, continue to the right edge
    zz2 = wv(xb)
    kxb = first_visit(zz2, set(row))
    extend(zz2[:kxb + 1])
    end_col = row.index(zz2[kxb])
    extend(row[end_col:])
    assert len(set(walk)) == len(walk), "detour repeats a vertex"
    return tuple(reversed(walk)) if reverse else tuple(walk)


# ---------------------------------------------------------------------------
# Theorem driver: red flat wall


def red_flat_wall(g: AnnotatedGraph, t: int, r: int,
                  oracle: Callable, mesh: Optional[Mesh] = None):
    """Either a separation with red-free big side, a red K_t model, or an
    r-mesh with an apex set, homogeneity tag, and witnessing rendition."""
    try:
        outcome = oracle(g, mesh, 3 * t, (r + 2) ** 2)
    except OracleFailure:
        raise
    except Exception as e:                                   # noqa: BLE001
        raise OracleFailure(f"oracle crashed: {e}") from e
    if outcome is None:
        raise OracleFailure("oracle returned nothing")
    kind = outcome[0]
    if kind == "clique":
        model = outcome[1]
        if not isinstance(model, MinorModel):
            raise OracleFailure("oracle clique outcome is not a minor model")
        k = len(model.pattern.vertices)
        if k < (3 * t) // 2 + t:
            raise OracleFailure(f"oracle clique too small: {k}")
        if not verify_minor_model(g, model).ok:
            raise OracleFailure("oracle clique model invalid")
        res = red_clique_or_separation(g, model, t)
        if isinstance(res, Separation):
            return ("separation", res)
        return ("clique", res)
    if kind == "flat":
        _, sub, Z, rho = outcome
        Z = frozenset(Z)
        if len(Z) >= 9 * t * t:
            raise OracleFailure(f"apex set too large: {len(Z)}")
        g2 = g.without(Z)
        from .rendition import validate_rendition
        if not validate_rendition(g2, rho).ok:
            raise OracleFailure("oracle rendition invalid")
        m2, rho2, tag = homogenize_flat_mesh(g2, rho, sub, r)
        return ("mesh", m2, Z, tag, rho2)
    raise OracleFailure(f"unknown oracle outcome {kind!r}")


def brute_flat_mesh_oracle(g: AnnotatedGraph, mesh: Optional[Mesh], k: int,
                           n_target: int):
    """Desk-scale stand-in for the imported flat-mesh machinery.

    Planar hosts with a supplied mesh yield the flat arm (central submesh
    plus an edge-cell sphere rendition with one boundary vortex); otherwise
    a brute-force clique minor is attempted.
    """
    import networkx as nx
    from .oracle import has_clique_minor
    nxg = nx.Graph()
    nxg.add_nodes_from(g.vertices)
    nxg.add_edges_from(g.edges)
    planar, _ = nx.check_planarity(nxg)
    if planar and mesh is not None:
        side = n_target
        if mesh.n >= side + 2 and mesh.m >= side + 2:
            lo_r = (mesh.n - side) // 2 + 1
            lo_c = (mesh.m - side) // 2 + 1
            sub = submesh(mesh, list(range(lo_r, lo_r + side)),
                          list(range(lo_c, lo_c + side)))
            rho = _planar_rendition_with_boundary_vortex(g, mesh)
            return ("flat", sub, frozenset(), rho)
    for size in range(k, 1, -1):
        model = has_clique_minor(g, size, cap=len(g.vertices))
        if model is not None:
            return ("clique", model)
    raise OracleFailure("no clique minor and host not planar with a mesh")


def _planar_rendition_with_boundary_vortex(g: AnnotatedGraph, mesh: Mesh
                                           ) -> Rendition:
    base = rendition_from_planar(g)
    per = mesh.perimeter()
    a, b = per[0], per[1]
    cells = list(base.cells)
    cells.append(Cell((a, b), frozenset(), frozenset([a, b]), True, 0))
    return Rendition(tuple(cells), base.pi, "sphere", ())
