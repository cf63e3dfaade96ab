"""Nest trees: the hierarchical nest/linkage structure, tightening, leaf
splitting, the refinement driver, and the Menger link-back that assembles
surface walls.

Trees are persistent: every operation returns a new tree sharing untouched
parts.  Tightening steps carry explicit shrink witnesses so termination is
checkable, and the refinement driver logs one record per tighten/split
event.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from ._flow import max_vertex_disjoint
from .core import (AnnotatedGraph, ValidityReport, _Collector, norm_edge)
from .errors import (NotExposed, NotFlat, NotOrthogonal, OrderMismatch,
                     OrderTooSmall, PreconditionRedMiss)
from .grids import AnnulusWall, Mesh, Path, path_edges, cycle_edges
from .homogenize import (blank_or_red_orthogonal, select_flat_transaction,
                         transaction_r_blank)
from .rendition import (Nest, RadialLinkage, Region, Rendition, Society,
                        Transaction, cycle_arc, cycle_disk, frame_components,
                        inner_subpath, is_exposed, is_grounded_cycle,
                        is_grounded_path, is_orthogonal_radial,
                        is_orthogonal_transaction, is_rho_flat,
                        max_transaction, natural_paths, path_side,
                        region_crop, region_interior_vertices, restrict,
                        trace_of, validate_nest)

# ---------------------------------------------------------------------------
# The nest tree


@dataclass(frozen=True)
class NestTree:
    root_radial: RadialLinkage
    parent: dict[int, Optional[int]]
    children: dict[int, tuple[int, ...]]
    nests: dict[int, Nest]                        # full cycle lists per node
    linkages: dict[tuple[int, int], tuple[Path, ...]]
    cycle_order: int                              # s
    linkage_order: int                            # t
    reserve: int                                  # s0
    root: int = 0

    def nodes(self) -> list[int]:
        return sorted(self.parent)

    def leaves(self) -> list[int]:
        return [v for v in self.nodes() if not self.children.get(v)]

    def is_leaf(self, v: int) -> bool:
        return not self.children.get(v)

    def leaf_parts(self, v: int) -> tuple[tuple[Path, ...], Path, tuple[Path, ...]]:
        """(leaf nest cycles, boundary cycle, reserve cycles)."""
        cycles = self.nests[v].cycles
        s0 = self.reserve
        if len(cycles) < s0 + 2:
            raise OrderTooSmall(f"leaf {v} nest has only {len(cycles)} cycles")
        inner = cycles[:len(cycles) - s0 - 1]
        return inner, cycles[len(cycles) - s0 - 1], cycles[len(cycles) - s0:]

    def radial_for(self, v: int) -> tuple[Path, ...]:
        p = self.parent[v]
        if p is None:
            return self.root_radial.paths
        return self.linkages[(p, v)]

    @property
    def root_nest(self) -> Nest:
        return self.nests[self.root]


def single_leaf_tree(nest: Nest, radial: RadialLinkage, *, cycle_order: int,
                     reserve: int, linkage_order: int) -> NestTree:
    if nest.order < cycle_order + reserve + 1:
        raise OrderTooSmall(
            f"nest order {nest.order} < s + s0 + 1 = {cycle_order + reserve + 1}")
    return NestTree(
        root_radial=radial,
        parent={0: None},
        children={0: ()},
        nests={0: nest},
        linkages={},
        cycle_order=cycle_order,
        linkage_order=linkage_order,
        reserve=reserve,
    )


# ---------------------------------------------------------------------------
# Regions and societies of tree nodes


def node_regions(rho: Rendition, nt: NestTree, v: int
                 ) -> tuple[Region, Region, Optional[Region]]:
    """(outer disk, inner disk, society disk) of a node; the society disk is
    the boundary-cycle disk and exists for leaves only."""
    cycles = nt.nests[v].cycles
    outer = cycle_disk(rho, cycles[-1])
    inner = cycle_disk(rho, cycles[0])
    soc = None
    if nt.is_leaf(v):
        _, boundary, _ = nt.leaf_parts(v)
        soc = cycle_disk(rho, boundary)
    return outer, inner, soc


def leaf_society(g: AnnotatedGraph, rho: Rendition, nt: NestTree, leaf: int
                 ) -> tuple[Society, Rendition, Region]:
    _, boundary, _ = nt.leaf_parts(leaf)
    region = cycle_disk(rho, boundary)
    soc, sub = restrict(g, rho, region)
    return soc, sub, region


def truncate_to_inner(path: Path, inner: Sequence[int]) -> Path:
    """Crop a radial path at its first meeting with the given cycle."""
    sp = set(inner)
    for k, v in enumerate(path):
        if v in sp:
            return path[:k + 1]
    raise OrderMismatch("path misses the target cycle")


def truncate_into_region(rho: Rendition, region: Region, path: Path) -> Path:
    """Minimal subpath from the region boundary to the path's inner end."""
    border = {rho.node_vertex[n] for n in region.boundary_nodes}
    inside: set[int] = set()
    for i in region.cells:
        inside |= rho.cells[i].vertices
    for k in range(len(path)):
        if path[k] in border:
            tail = path[k:]
            if all(v in inside or v in border for v in tail):
                return tail
    raise OrderMismatch("path does not enter the region")


# ---------------------------------------------------------------------------
# Validation (T1-T6 plus consistency)


def validate_nest_tree(g: AnnotatedGraph, rho: Rendition, nt: NestTree,
                       z: Iterable[int] = (), *,
                       strict_orders: bool = False) -> ValidityReport:
    c = _Collector()
    zset = frozenset(z)
    regions: dict[int, tuple[Region, Region, Optional[Region]]] = {}
    for v in nt.nodes():
        nest = nt.nests[v]
        # vortex containment is the tree-level condition T6, not per nest
        rep = _validate_nest_no_vortex(g, rho, nest)
        for viol in rep.violations:
            c.add(f"Nest[{v}]:{viol.kind}", viol.detail)
        try:
            regions[v] = node_regions(rho, nt, v)
        except Exception as e:                                # noqa: BLE001
            c.add("Disk", f"node {v}: {e}")
            continue
        if strict_orders:
            want = nt.reserve if not nt.is_leaf(v) else \
                nt.cycle_order + nt.reserve + 1
            if nest.order != want:
                c.add("Order", f"node {v} has {nest.order} cycles, wants {want}")
        elif not nt.is_leaf(v) and nest.order < 1:
            c.add("Order", f"internal node {v} has an empty nest")
        elif nt.is_leaf(v) and nest.order < nt.reserve + 2:
            c.add("Order", f"leaf {v} nest below s0 + 2")
    if set(regions) != set(nt.nodes()):
        return c.report()

    # T1: the truncated root radial linkage is orthogonal for the root nest
    root_outer = regions[nt.root][0]
    try:
        trunc = tuple(truncate_to_inner(
            truncate_into_region(rho, root_outer, p), nt.root_nest.cycles[0])
            for p in nt.root_radial.paths)
        if not is_orthogonal_radial(nt.root_nest, RadialLinkage(trunc)):
            c.add("T1", "root radial truncation is not orthogonal")
    except OrderMismatch as e:
        c.add("T1", str(e))
    if len(nt.root_radial.paths) != nt.linkage_order:
        c.add("T1", f"root radial order {len(nt.root_radial.paths)} != t")

    for v in nt.nodes():
        for w in nt.children.get(v, ()):
            # T2
            if not regions[w][0].cells <= regions[v][1].cells:
                c.add("T2", f"child {w} outer disk escapes parent {v} inner disk")
        kids = nt.children.get(v, ())
        for a_i in range(len(kids)):
            for b_i in range(a_i + 1, len(kids)):
                a, b = kids[a_i], kids[b_i]
                # T3
                if regions[a][0].cells & regions[b][0].cells:
                    c.add("T3", f"sibling outer disks {a}, {b} intersect")
                # T5
                va = {x for p in nt.linkages[(v, a)] for x in p}
                vb = {x for p in nt.linkages[(v, b)] for x in p}
                if va & vb:
                    c.add("T5", f"sibling linkages {a}, {b} share vertices")
                crop_b = region_crop(g, rho, regions[b][0]).graph.vertices
                crop_a = region_crop(g, rho, regions[a][0]).graph.vertices
                border_a = {rho.node_vertex[n] for n in regions[a][0].boundary_nodes}
                border_b = {rho.node_vertex[n] for n in regions[b][0].boundary_nodes}
                if va & (crop_b - border_b) or vb & (crop_a - border_a):
                    c.add("T5", f"sibling linkage enters the other crop ({a},{b})")

    # T4: edge linkages are orthogonal radial linkages for both nests, drawn
    # inside the parent's outer disk
    for (v, w), paths in sorted(nt.linkages.items()):
        if len(paths) != nt.linkage_order:
            c.add("T4", f"edge ({v},{w}) linkage order {len(paths)} != t")
        combined = Nest(nt.nests[w].cycles + nt.nests[v].cycles)
        lk = RadialLinkage(paths)
        if not is_orthogonal_radial(combined, lk):
            c.add("T4", f"edge ({v},{w}) linkage not orthogonal to both nests")
        if v in regions:
            outer_crop = region_crop(g, rho, regions[v][0]).graph.vertices
            for p in paths:
                if not set(p) <= outer_crop:
                    c.add("T4", f"edge ({v},{w}) path leaves the parent disk")
        seen: set[int] = set()
        for p in paths:
            if seen & set(p):
                c.add("T4", f"edge ({v},{w}) linkage paths overlap")
            seen |= set(p)
            if not is_grounded_path(rho, p):
                c.add("T4", f"edge ({v},{w}) has a non-grounded path")

    # T6 and consistency
    leaf_inner = {v: regions[v][1] for v in nt.leaves()}
    for vi in rho.vortex_cells:
        if not any(vi in reg.cells for reg in leaf_inner.values()):
            c.add("T6", f"vortex cell {vi} outside every leaf inner disk")
    if zset:
        for v_id in sorted(zset):
            ok = False
            for leaf, reg in leaf_inner.items():
                if v_id in region_interior_vertices(g, rho, reg):
                    ok = True
                    break
            if not ok:
                c.add("ZConsistency", f"vertex {v_id} outside every leaf inner disk")
        for leaf, reg in leaf_inner.items():
            if not any(vi in reg.cells for vi in rho.vortex_cells):
                if not (region_interior_vertices(g, rho, reg) & zset):
                    c.add("ZConsistency",
                          f"leaf {leaf} has neither a vortex nor a marked vertex")
    c.stats["leaves"] = len(nt.leaves())
    c.stats["nodes"] = len(nt.nodes())
    return c.report()


def _validate_nest_no_vortex(g: AnnotatedGraph, rho: Rendition, nest: Nest
                             ) -> ValidityReport:
    c = _Collector()
    seen: set[int] = set()
    for i, cyc in enumerate(nest.cycles):
        if set(cyc) & seen:
            c.add("NestOverlap", f"cycle {i + 1} shares vertices")
        seen |= set(cyc)
        if not is_grounded_cycle(rho, cyc):
            c.add("NotGrounded", f"cycle {i + 1} not grounded")
    disks = []
    for cyc in nest.cycles:
        disks.append(cycle_disk(rho, cyc).cells)
    for i in range(len(disks) - 1):
        if not disks[i] <= disks[i + 1]:
            c.add("Nesting", f"disk {i + 1} not inside disk {i + 2}")
    return c.report()


def tighten_measure(g: AnnotatedGraph, rho: Rendition, nt: NestTree) -> int:
    """Sum of crop sizes over all leaf-nest cycles (plus boundary): the
    strictly decreasing termination measure of tightening."""
    total = 0
    for leaf in nt.leaves():
        inner, boundary, _ = nt.leaf_parts(leaf)
        for cyc in tuple(inner) + (boundary,):
            vs, es = _crop_minus_cycle(g, rho, cyc)
            total += len(vs) + len(es)
    return total


def r_consistent(g: AnnotatedGraph, rho: Rendition, nt: NestTree) -> bool:
    rep = validate_nest_tree(g, rho, nt, g.red)
    return not any(v.kind == "ZConsistency" for v in rep.violations)


# ---------------------------------------------------------------------------
# Menger linkage


def menger_linkage(g: AnnotatedGraph, X: Iterable[int], Y: Iterable[int],
                   k: int):
    """("linkage", paths) with exactly k disjoint X-Y paths, or
    ("cut", vertices) of size < k."""
    paths, cut = max_vertex_disjoint(g, X, Y)
    if len(paths) >= k:
        return ("linkage", paths[:k])
    return ("cut", cut)


# ---------------------------------------------------------------------------
# Orthogonalizing a radial linkage (reroute cycles inward, then remove
# regressions innermost-first)


def _max_subpaths_on_cycle(path: Path, cyc: Path, others: set[int]
                           ) -> list[tuple[int, int]]:
    """Index ranges [a, b] of maximal subpaths of ``path`` with both
    endpoints on ``cyc`` and interior avoiding every nest cycle."""
    on = set(cyc)
    hits = [k for k, v in enumerate(path) if v in on]
    out = []
    for i in range(len(hits) - 1):
        a, b = hits[i], hits[i + 1]
        if b == a + 1:
            continue
        interior = path[a + 1:b]
        if any(v in on or v in others for v in interior):
            continue
        out.append((a, b))
    return out


def _detour_cells(rho: Rendition, sub: Path) -> set[int]:
    cells = set()
    for e in path_edges(sub):
        ci = rho.edge_cell.get(e)
        if ci is not None:
            cells.add(ci)
    return cells


def _crop_minus_cycle(g: AnnotatedGraph, rho: Rendition, cyc: Path
                      ) -> tuple[frozenset[int], frozenset]:
    """(vertices, edges) of the crop of the cycle disk without the cycle
    itself; the quantity that strictly shrinks under tightening."""
    reg = cycle_disk(rho, cyc)
    soc = region_crop(g, rho, reg)
    vs = soc.graph.vertices - set(cyc)
    es = soc.graph.edges - set(cycle_edges(cyc))
    return frozenset(vs), frozenset(es)


def _replace_cycle_through(g: AnnotatedGraph, rho: Rendition, cyc: Path,
                           sub: Path, inner_region: Region) -> Optional[Path]:
    """Cycle in cyc ∪ sub whose disk still contains the inner region and
    whose crop (minus the cycle) properly shrinks; None if sub cannot help."""
    a, b = sub[0], sub[-1]
    if a == b:
        return None
    old_v, _ = _crop_minus_cycle(g, rho, cyc)
    old_soc = region_crop(g, rho, cycle_disk(rho, cyc))
    for direction in (1, -1):
        arc = _walk_arc(cyc, a, b, direction)
        cand = _cycle_from(sub, arc)
        if cand is None:
            continue
        if not is_grounded_cycle(rho, cand):
            continue
        disk = cycle_disk(rho, cand)
        if not inner_region.cells <= disk.cells:
            continue
        new_v, _ = _crop_minus_cycle(g, rho, cand)
        new_soc = region_crop(g, rho, disk)
        if new_v < old_v or (new_v <= old_v and
                             new_soc.graph.edges < old_soc.graph.edges):
            return cand
    return None


def _walk_arc(cyc: Path, a: int, b: int, direction: int) -> Path:
    L = len(cyc)
    ia = cyc.index(a)
    out = [a]
    k = ia
    while cyc[k] != b:
        k = (k + direction) % L
        out.append(cyc[k])
    return tuple(out)


def _cycle_from(sub: Path, arc: Path) -> Optional[Path]:
    if set(sub[1:-1]) & set(arc):
        return None
    if arc[0] == sub[0] and arc[-1] == sub[-1]:
        return tuple(sub) + tuple(reversed(arc[1:-1]))
    if arc[0] == sub[-1] and arc[-1] == sub[0]:
        return tuple(sub) + tuple(arc[1:-1])
    return None


def orthogonalize_radial(g: AnnotatedGraph, rho: Rendition, nest: Nest,
                         radial: RadialLinkage
                         ) -> tuple[Nest, RadialLinkage, list[dict]]:
    """Nest of the same order plus an orthogonal radial linkage that is
    end-identical on the society boundary; the regression count strictly
    decreases at every internal step."""
    cycles = list(nest.cycles)
    paths = [tuple(p) for p in radial.paths]
    events: list[dict] = []
    inner_region = cycle_disk(rho, cycles[0])

    changed = True
    while changed:
        changed = False
        all_cycle_vs = set().union(*(set(cc) for cc in cycles))
        for i in range(1, len(cycles)):
            others = all_cycle_vs - set(cycles[i])
            for p in paths:
                for a, b in _max_subpaths_on_cycle(p, cycles[i], others):
                    sub = p[a:b + 1]
                    det = _detour_cells(rho, sub)
                    disk_i = cycle_disk(rho, cycles[i])
                    if not det <= disk_i.cells:
                        continue
                    cand = _replace_cycle_through(g, rho, cycles[i], sub,
                                                  inner_region)
                    if cand is not None:
                        cycles[i] = cand
                        events.append({"event": "cycle-rerouted", "index": i})
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break

    def regressions() -> list[tuple[int, int, int, int]]:
        out = []
        all_cycle_vs = set().union(*(set(cc) for cc in cycles))
        for pi, p in enumerate(paths):
            for ci in range(len(cycles)):
                others = all_cycle_vs - set(cycles[ci])
                for a, b in _max_subpaths_on_cycle(p, cycles[ci], others):
                    out.append((pi, ci, a, b))
        return out

    guard = 0
    while True:
        regs = regressions()
        if not regs:
            break
        guard += 1
        if guard > sum(len(p) for p in paths) + 10:
            raise NotOrthogonal("regression removal does not terminate")
        done = False
        for pi, ci, a, b in regs:
            p = paths[pi]
            sub = p[a:b + 1]
            # the replacement arc shares endpoints and is internally disjoint
            # from the path and the other radial paths
            block = set(p) - {sub[0], sub[-1]}
            for qi, q in enumerate(paths):
                if qi != pi:
                    block |= set(q)
            try:
                arc = cycle_arc(cycles[ci], sub[0], sub[-1], block)
            except Exception:                                  # noqa: BLE001
                continue
            newp = p[:a] + tuple(arc) + p[b + 1:]
            if len(set(newp)) != len(newp):
                continue
            paths[pi] = newp
            events.append({"event": "regression-removed", "path": pi,
                           "cycle": ci, "remaining": len(regs) - 1})
            done = True
            break
        if not done:
            raise NotOrthogonal("no regression can be removed cleanly")

    new_nest = Nest(tuple(cycles), nest.around)
    new_radial = RadialLinkage(tuple(paths))
    if not is_orthogonal_radial(new_nest, new_radial):
        raise NotOrthogonal("orthogonalization failed verification")
    return new_nest, new_radial, events


# ---------------------------------------------------------------------------
# Lemma: exposed transaction or tighter nest tree


def _crop_size(g: AnnotatedGraph, rho: Rendition, cyc: Path) -> tuple[int, int]:
    vs, es = _crop_minus_cycle(g, rho, cyc)
    return len(vs), len(es)


def expose_or_tighten(g: AnnotatedGraph, rho: Rendition, nt: NestTree,
                      leaf: int, t: Transaction, p: int, *,
                      unchecked: bool = False):
    """("exposed", sub-transaction of order p) or
    ("tighter", tree, witness dict)."""
    soc, sub_rho, region = leaf_society(g, rho, nt, leaf)
    inner_cycles, boundary, _ = nt.leaf_parts(leaf)
    s = len(inner_cycles)
    if not unchecked and t.order < 2 * s + p + 2:
        raise OrderTooSmall(f"order {t.order} < 2s+p+2 = {2 * s + p + 2}")
    nest = Nest(tuple(inner_cycles))
    exposed = [q for q in t.paths if _path_exposed(rho, nest, q)]
    if len(exposed) >= p:
        out = Transaction(tuple(exposed[:p]))
        if not is_rho_flat(sub_rho, soc, out):
            raise NotFlat("exposed sub-transaction lost flatness")
        return ("exposed", out)

    hidden = [q for q in t.paths if not _path_exposed(rho, nest, q)]
    cycles = tuple(inner_cycles) + (boundary,)
    all_cycle_vs = set().union(*(set(cc) for cc in cycles))
    measure_before = tighten_measure(g, rho, nt)
    for q in hidden:
        for ci in range(1, len(cycles)):
            others = all_cycle_vs - set(cycles[ci])
            for a, b in _max_subpaths_on_cycle(q, cycles[ci], others):
                sub = q[a:b + 1]
                det = _detour_cells(rho, sub)
                disk_i = cycle_disk(rho, cycles[ci])
                if not det <= disk_i.cells:
                    continue
                inner_region = cycle_disk(rho, cycles[0])
                cand = _replace_cycle_through(g, rho, cycles[ci], sub, inner_region)
                if cand is None:
                    continue
                new_tree = _retighten_leaf(g, rho, nt, leaf, ci, cand)
                if new_tree is None:
                    continue
                measure_after = tighten_measure(g, rho, new_tree)
                assert measure_after < measure_before, "tightening did not shrink"
                before = _crop_size(g, rho, cycles[ci])
                after = _crop_size(g, rho, cand)
                witness = {"leaf": leaf, "cycle_index": ci,
                           "crop_before": before, "crop_after": after,
                           "measure_before": measure_before,
                           "measure_after": measure_after}
                return ("tighter", new_tree, witness)
    raise OrderTooSmall("neither an exposed sub-transaction nor a tightening "
                        "step is available")


def _path_exposed(rho: Rendition, nest: Nest, q: Path) -> bool:
    inner = nest.inner()
    disk = cycle_disk(rho, inner)
    inner_edges = set(cycle_edges(inner))
    inside: set = set()
    for i in disk.cells:
        inside |= rho.cells[i].edges
    inside -= inner_edges
    return any(e in inside for e in path_edges(q))


def _retighten_leaf(g: AnnotatedGraph, rho: Rendition, nt: NestTree,
                    leaf: int, ci: int, cand: Path) -> Optional[NestTree]:
    """Replace cycle ci of the leaf nest with cand, repairing the leaf's
    radial linkage orthogonality; None when the repair fails."""
    inner_cycles, boundary, res = nt.leaf_parts(leaf)
    cycles = list(inner_cycles) + [boundary] + list(res)
    cycles[ci] = cand
    radial_paths = nt.radial_for(leaf)
    try:
        new_nest, new_radial, _ = orthogonalize_radial(
            g, rho, Nest(tuple(cycles)), RadialLinkage(radial_paths))
    except NotOrthogonal:
        return None
    nests = dict(nt.nests)
    nests[leaf] = new_nest
    linkages = dict(nt.linkages)
    root_radial = nt.root_radial
    par = nt.parent[leaf]
    if par is None:
        root_radial = new_radial
    else:
        linkages[(par, leaf)] = new_radial.paths
    return replace(nt, nests=nests, linkages=linkages, root_radial=root_radial)


# ---------------------------------------------------------------------------
# Lemma: splitting a leaf


def transaction_into_society(soc: Society, t: Transaction) -> Transaction:
    """Crop every path to its minimal society-boundary-to-boundary subpath."""
    border = set(soc.omega)
    out = []
    for p in t.paths:
        hits = [k for k, v in enumerate(p) if v in border]
        if not hits:
            raise OrderMismatch("transaction path misses the society boundary")
        q = p[min(hits):max(hits) + 1]
        if not set(q) <= soc.graph.vertices:
            raise OrderMismatch("transaction path leaves the society")
        out.append(q)
    return Transaction(tuple(out))


def split_leaf(g: AnnotatedGraph, rho: Rendition, nt: NestTree, leaf: int,
               t: Transaction, *, unchecked: bool = False):
    """("split", tree with one more leaf) when both residual vortices are
    promising, else ("tighter", tree, witness)."""
    soc, sub_rho, region = leaf_society(g, rho, nt, leaf)
    t = transaction_into_society(soc, t)
    inner_cycles, boundary, res = nt.leaf_parts(leaf)
    lam = len(inner_cycles)
    s0 = nt.reserve
    t_ord = nt.linkage_order
    s_next = lam - 2 * s0 - 2
    p_need = 2 * t_ord + 2 * s0 + 2 * s_next + 6
    if s_next < 1:
        raise OrderTooSmall(f"leaf nest of order {lam} cannot split "
                            f"(needs 2s0+s+2 cycles)")
    if not unchecked and t.order != p_need:
        raise OrderMismatch(f"transaction order {t.order} != 2t+2s0+2s+6 = {p_need}")
    if unchecked and t.order < 2 * t_ord + 2 * (s0 + s_next + 1) + 2:
        raise OrderTooSmall("transaction too small to split even unchecked")
    nest = Nest(tuple(inner_cycles))
    if not is_rho_flat(sub_rho, soc, t):
        raise NotFlat("transaction is not flat in the leaf society")
    if not is_exposed(sub_rho, nest, t):
        raise NotExposed("transaction is not exposed in the leaf society")
    if not is_orthogonal_transaction(nest, t):
        raise NotOrthogonal("transaction is not orthogonal to the leaf nest")
    if not transaction_r_blank(g, sub_rho, soc, t):
        raise PreconditionRedMiss("transaction is not R-blank")
    from .rendition import residual_vortices
    d1, d2 = residual_vortices(sub_rho, soc, nest, t)
    has_vortex = any(sub_rho.cells[i].vortex for i in range(len(sub_rho.cells)))
    if not has_vortex and not (soc.graph.vertices & g.red):
        raise PreconditionRedMiss("leaf society holds neither a vortex nor red")

    def promising(reg: Region) -> bool:
        if any(sub_rho.cells[i].vortex for i in reg.cells):
            return True
        verts: set[int] = set()
        for i in reg.cells:
            verts |= sub_rho.cells[i].vertices
        return bool(verts & g.red)

    p1, p2 = promising(d1), promising(d2)
    paths, X, Y = natural_paths(soc, t)

    # the four zones: spare path, T1, S1, S2, T2 in natural order
    cursor = 1
    zone_sizes = (t_ord, s0 + s_next + 1, s0 + s_next + 1, t_ord)
    zones = []
    for size in zone_sizes:
        zones.append(list(paths[cursor:cursor + size]))
        cursor += size
    t1, s1, s2, t2 = zones
    if len(t2) < t_ord:
        raise OrderTooSmall("not enough paths for the outer zones")

    if p1 and p2:
        return _do_split(g, rho, sub_rho, nt, leaf, nest, boundary, res,
                         (d1, d2), t1, s1, s2, t2, s_next)
    # one-sided: strictly tighter tree hugging the promising side; cycles
    # pair with consecutive paths counted from the promising end
    keep = d1 if p1 else d2
    inner_cycles2, boundary2, _ = nt.leaf_parts(leaf)
    count = len(inner_cycles2) + 1
    if p1:
        side_paths = [paths[t_ord + i] for i in range(1, count + 1)]
        avoidz = t2
    else:
        side_paths = [paths[len(paths) - 1 - t_ord - i]
                      for i in range(1, count + 1)]
        avoidz = t1
    return _do_tighten_side(g, rho, sub_rho, nt, leaf, keep, side_paths, avoidz)


def _pick_cycle(rho: Rendition, cyc: Path, path: Path, must_contain: Region,
                must_avoid: Iterable[Path] = ()) -> Path:
    """The cycle in cyc ∪ path whose disk contains the given region and
    avoids the given paths."""
    sub = _crossing_mid(cyc, path)
    avoid_vs = {v for q in must_avoid for v in q}
    cands = []
    for direction in (1, -1):
        arc = _walk_arc(cyc, sub[-1], sub[0], direction)
        cand = _cycle_from(sub, tuple(reversed(arc)))
        if cand is None:
            continue
        if not is_grounded_cycle(rho, cand):
            continue
        disk = cycle_disk(rho, cand)
        verts: set[int] = set(cand)
        for i in disk.cells:
            verts |= rho.cells[i].vertices
        if must_contain.cells <= disk.cells and not (avoid_vs & verts):
            cands.append(cand)
    if not cands:
        raise OrderMismatch("no side cycle fits the residual region")
    return min(cands, key=lambda cc: (len(cc), cc))


def _crossing_mid(cyc: Path, path: Path) -> Path:
    """Subpath of ``path`` between its two crossings of ``cyc``."""
    sp = set(cyc)
    pos = [k for k, v in enumerate(path) if v in sp]
    if len(pos) < 2:
        raise OrderMismatch("path does not cross the cycle twice")
    return path[min(pos):max(pos) + 1]


def _do_split(g, rho, sub_rho, nt: NestTree, leaf: int, nest: Nest,
              boundary: Path, res: tuple[Path, ...],
              residuals, t1, s1, s2, t2, s_next: int):
    d1, d2 = residuals
    s0 = nt.reserve
    lam = nest.order
    new_nests = []
    # cycle j pairs with the j-th zone path counted from the residual side
    for zone, keep in ((s1, d1), (list(reversed(s2)), d2)):
        cyclist = []
        for j in range(1, s0 + s_next + 2):
            cyclist.append(_pick_cycle(sub_rho, nest.cycles[j - 1],
                                       zone[j - 1], keep))
        new_nests.append(Nest(tuple(cyclist)))
    # internal node keeps the outermost s0 cycles of its old nest
    internal_cycles = nest.cycles[lam - s0:] if s0 else ()
    internal = Nest(tuple(internal_cycles) or (boundary,))
    # edge linkages from the outer transactions, cropped into the parent's
    # new outer region and down to the child's inner cycle
    region = cycle_disk(sub_rho, internal.cycles[-1])
    links = []
    for zone, child_nest in zip((t1, t2), new_nests):
        paths = []
        for q in zone:
            tail = truncate_to_inner(q, child_nest.cycles[0])
            tail = truncate_into_region(sub_rho, region, tail)
            paths.append(tail)
        links.append(tuple(paths))
    # assemble the new tree
    new_ids = [max(nt.nodes()) + 1, max(nt.nodes()) + 2]
    parent = dict(nt.parent)
    children = dict(nt.children)
    nests = dict(nt.nests)
    linkages = dict(nt.linkages)
    nests[leaf] = internal
    for nid, child_nest, lk in zip(new_ids, new_nests, links):
        parent[nid] = leaf
        children[nid] = ()
        nests[nid] = child_nest
        linkages[(leaf, nid)] = lk
    children[leaf] = tuple(new_ids)
    # crop the incoming linkage of the now-internal node to its new inner cycle
    root_radial = nt.root_radial
    par = nt.parent[leaf]
    new_inner = internal.cycles[0]
    if par is None:
        root_radial = RadialLinkage(tuple(
            truncate_to_inner(p, new_inner) for p in nt.root_radial.paths))
    else:
        linkages[(par, leaf)] = tuple(
            truncate_to_inner(p, new_inner) for p in linkages[(par, leaf)])
    out = replace(nt, parent=parent, children=children, nests=nests,
                  linkages=linkages, root_radial=root_radial,
                  cycle_order=s_next)
    return ("split", out)


def _do_tighten_side(g, rho, sub_rho, nt: NestTree, leaf: int, keep: Region,
                     side_paths, avoid_zone):
    inner_cycles, boundary, res = nt.leaf_parts(leaf)
    cycles = list(inner_cycles) + [boundary]
    measure_before = tighten_measure(g, rho, nt)
    new_cycles = []
    for i, cyc in enumerate(cycles):
        q = side_paths[i] if i < len(side_paths) else side_paths[-1]
        try:
            new_cycles.append(_pick_cycle(sub_rho, cyc, q, keep,
                                          must_avoid=avoid_zone))
        except OrderMismatch:
            new_cycles.append(cyc)
    nests = dict(nt.nests)
    nests[leaf] = Nest(tuple(new_cycles) + tuple(res))
    cand_tree = replace(nt, nests=nests)
    # repair the leaf's radial linkage
    radial_paths = nt.radial_for(leaf)
    try:
        fixed_nest, fixed_radial, _ = orthogonalize_radial(
            g, rho, nests[leaf], RadialLinkage(radial_paths))
    except NotOrthogonal:
        raise OrderMismatch("tightened nest cannot carry the radial linkage")
    nests[leaf] = fixed_nest
    linkages = dict(nt.linkages)
    root_radial = nt.root_radial
    par = nt.parent[leaf]
    if par is None:
        root_radial = fixed_radial
    else:
        linkages[(par, leaf)] = fixed_radial.paths
    out = replace(nt, nests=nests, linkages=linkages, root_radial=root_radial)
    measure_after = tighten_measure(g, rho, out)
    assert measure_after < measure_before, "one-sided split did not shrink"
    witness = {"leaf": leaf, "cycle_index": len(cycles) - 1,
               "measure_before": measure_before,
               "measure_after": measure_after, "strict": True}
    return ("tighter", out, witness)


# ---------------------------------------------------------------------------
# Driver: refine a nest tree


def nestrec(s0: int, zeta: int) -> int:
    return 2 + 2 * zeta * (s0 + 1)


def nest_size(s: int, leaves: int) -> int:
    return s + 1 + nestrec(s, leaves)


def refine_nest_tree(g: AnnotatedGraph, rho: Rendition, nest: Nest,
                     radial: RadialLinkage, *, s: int, t: int, r: int,
                     target_leaves: int, depth_target: Optional[int] = None,
                     unchecked: bool = False,
                     log: Optional[list] = None):
    """("red", mesh) or ("tree", nest tree with target_leaves + 1 leaves or
    with every leaf society of depth at most the target)."""
    if not unchecked and not (s >= t >= r + 1 >= 4):
        raise OrderTooSmall("need s >= t >= r + 1 >= 4")
    if not unchecked and nest.order < nest_size(s, target_leaves):
        raise OrderTooSmall(
            f"nest order {nest.order} < {nest_size(s, target_leaves)}")
    events = log if log is not None else []
    cycle_order = nest.order - s - 1
    use_radial = RadialLinkage(radial.paths[:t]) if len(radial.paths) > t \
        else radial
    nt = single_leaf_tree(nest, use_radial, cycle_order=cycle_order, reserve=s,
                          linkage_order=len(use_radial.paths))
    edge_count = len(g.edges)
    tighten_cap = max(1, nest.order) * max(1, edge_count)
    tightens = 0
    stuck: set[int] = set()
    while True:
        if len(nt.leaves()) >= target_leaves + 1:
            return ("tree", nt)
        busy = None
        for leaf in nt.leaves():
            if leaf in stuck:
                continue
            soc, sub_rho, _ = leaf_society(g, rho, nt, leaf)
            inner_c, _, _ = nt.leaf_parts(leaf)
            depth, witness = _best_witness(soc, rho, Nest(tuple(inner_c)))
            limit = depth_target if depth_target is not None else \
                _default_depth_target(rho, nt, leaf, t)
            if depth > limit and witness is not None:
                busy = (leaf, soc, sub_rho, depth, witness)
                break
        if busy is None:
            return ("tree", nt)
        leaf, soc, sub_rho, depth, witness = busy
        inner_cycles, _, _ = nt.leaf_parts(leaf)
        lam = len(inner_cycles)
        s_next = lam - 2 * nt.reserve - 2
        p_split = 2 * nt.linkage_order + 2 * nt.reserve + 2 * max(s_next, 0) + 6
        if s_next < 1:
            return ("tree", nt)
        try:
            flat = select_flat_transaction(soc, sub_rho, witness,
                                           min(p_split + 2 * lam + 2, depth),
                                           unchecked=unchecked)
            out = expose_or_tighten(g, rho, nt, leaf, flat,
                                    min(p_split, flat.order),
                                    unchecked=unchecked)
        except OrderTooSmall as e:
            if not unchecked:
                raise
            # the witness cannot drive a split or a tightening step; leave
            # the leaf as it stands
            stuck.add(leaf)
            events.append({"event": "stuck", "leaf": leaf, "reason": str(e)})
            continue
        if out[0] == "tighter":
            nt = out[1]
            tightens += 1
            events.append({"event": "tighten", **out[2]})
            if tightens > tighten_cap:
                raise OrderTooSmall("tightening exceeded the s*|E| cap")
            continue
        exposed = out[1]
        if not is_orthogonal_transaction(Nest(tuple(inner_cycles)), exposed):
            raise NotOrthogonal("exposed transaction is not orthogonal; "
                                "fixture outside the supported class")
        rr = min(r, _max_r_for(lam))
        p_blank = max(exposed.order // max(rr * (rr - 1), 1), 1)
        nest_small = Nest(tuple(inner_cycles[:rr + 1]))
        if exposed.order >= rr * (rr - 1) * p_blank and rr >= 2:
            arm = blank_or_red_orthogonal(soc.graph, sub_rho, soc, nest_small,
                                          exposed, p_blank, unchecked=True)
        else:
            arm = ("blank", exposed)
        if arm[0] == "red":
            events.append({"event": "red-mesh"})
            return ("red", arm[1])
        blank = arm[1]
        take = Transaction(blank.paths[:p_split]) if blank.order > p_split \
            else blank
        out = split_leaf(g, rho, nt, leaf, take, unchecked=unchecked)
        if out[0] == "split":
            nt = out[1]
            events.append({"event": "split", "leaf": leaf,
                           "leaves": len(nt.leaves())})
            continue
        nt = out[1]
        tightens += 1
        events.append({"event": "tighten", **out[2]})
        if tightens > tighten_cap:
            raise OrderTooSmall("tightening exceeded the s*|E| cap")


def _inside_edges(rho: Rendition, nest: Nest) -> set:
    inner = nest.inner()
    disk = cycle_disk(rho, inner)
    inside: set = set()
    for i in disk.cells:
        inside |= rho.cells[i].edges
    inside -= set(cycle_edges(inner))
    return inside


def _exposed_reroute(soc: Society, inside: set, x: int, y: int,
                     blocked: set[int]) -> Optional[Path]:
    """x-y path through at least one inside edge, avoiding blocked vertices
    and the rest of omega; BFS on (vertex, crossed-inside) states."""
    om = set(soc.omega) - {x, y}
    start = (x, False)
    prev: dict[tuple[int, bool], tuple[int, bool]] = {start: None}
    from collections import deque
    dq = deque([start])
    goal = None
    while dq:
        v, flag = dq.popleft()
        if v == y and flag:
            goal = (v, flag)
            break
        if v == y:
            continue
        for w in soc.graph.adj[v]:
            if w in blocked or (w in om):
                continue
            nflag = flag or (norm_edge(v, w) in inside)
            state = (w, nflag)
            if state not in prev:
                prev[state] = (v, flag)
                dq.append(state)
    if goal is None:
        return None
    out = []
    cur = goal
    while cur is not None:
        out.append(cur[0])
        cur = prev[cur]
    out.reverse()
    # states may repeat a vertex across flags; keep simple paths only
    if len(set(out)) != len(out):
        return None
    return tuple(out)


def _best_witness(soc: Society, rho: Rendition, nest: Nest,
                  boundary: Optional[Path] = None
                  ) -> tuple[int, Optional[Transaction]]:
    """True society depth plus an exposed witness transaction.

    The witness flow runs on the graph with every nest-cycle, boundary, and
    omega edge removed, so its paths are forced through the strict interior
    of the inner disk and cross the nest cycles at isolated vertices.
    """
    from ._flow import max_vertex_disjoint
    from .rendition import omega_segment
    n = len(soc.omega)
    if n < 2:
        return 0, None
    banned: set = set()
    for cyc in nest.cycles:
        banned |= set(cycle_edges(cyc))
    if boundary is not None:
        banned |= set(cycle_edges(boundary))
    banned |= {norm_edge(soc.omega[i], soc.omega[(i + 1) % n])
               for i in range(n)}
    pruned = AnnotatedGraph(soc.graph.vertices,
                            soc.graph.edges - frozenset(banned),
                            soc.graph.red)
    depth = 0
    best = 0
    witness: Optional[Transaction] = None
    for start in range(n):
        for length in range(1, n // 2 + 1):
            A = omega_segment(soc.omega, start, length)
            B = tuple(v for v in soc.omega if v not in set(A))
            if not B:
                continue
            full, _ = max_vertex_disjoint(soc.graph, A, B)
            depth = max(depth, len(full))
            paths, _ = max_vertex_disjoint(pruned, A, B)
            if len(paths) > best:
                best = len(paths)
                witness = Transaction(tuple(paths))
    return depth, witness


def _default_depth_target(rho: Rendition, nt: NestTree, leaf: int, t: int) -> int:
    from .rendition import breadth, rendition_depth
    b = breadth(rho)
    d = max(rendition_depth(rho), 2)
    inner_cycles, _, _ = nt.leaf_parts(leaf)
    lam = len(inner_cycles)
    s_next = max(lam - 2 * nt.reserve - 2, 0)
    p_split = 2 * nt.linkage_order + 2 * nt.reserve + 2 * s_next + 6
    return (b + 1) * (2 * b * d + 2 * lam + p_split + 2) - 1


def _max_r_for(lam: int) -> int:
    return max(lam - 1, 2)


# ---------------------------------------------------------------------------
# Lemma: nest tree to surface wall (Menger link-back)


@dataclass(frozen=True)
class HostedWall:
    """Extended surface wall found inside a host graph: base cycles plus one
    wall segment of radial stubs and one vortex segment per leaf."""
    order: int
    base_cycles: tuple[Path, ...]
    wall_verticals: tuple[Path, ...]
    vortex_nests: tuple[tuple[Path, ...], ...]
    vortex_rails: tuple[tuple[Path, ...], ...]
    witness_regions: tuple[Region, ...]

    @property
    def signature(self) -> tuple[int, int, int]:
        return (0, 0, len(self.vortex_nests))


def wall_size(r: int, k: int, leaves: int) -> int:
    return 4 * k + nest_size(r + 4 * k * (leaves + 2) ** 2, leaves)


def validate_hosted_wall(g: AnnotatedGraph, rho: Rendition, hw: HostedWall
                         ) -> ValidityReport:
    c = _Collector()
    if len(hw.base_cycles) != hw.order:
        c.add("Order", f"{len(hw.base_cycles)} base cycles for order {hw.order}")
    for i, cyc in enumerate(hw.base_cycles):
        if not is_grounded_cycle(rho, cyc):
            c.add("NotGrounded", f"base cycle {i + 1}")
    disks = [cycle_disk(rho, cyc).cells for cyc in hw.base_cycles]
    for i in range(len(disks) - 1):
        if not disks[i] <= disks[i + 1]:
            c.add("Nesting", f"base cycle {i + 1} not inside {i + 2}")
    if len(hw.vortex_nests) != len(hw.vortex_rails) or \
            len(hw.vortex_nests) != len(hw.witness_regions):
        c.add("Segments", "vortex segment parts out of sync")
    for si, (nest_c, rails, reg) in enumerate(zip(hw.vortex_nests,
                                                  hw.vortex_rails,
                                                  hw.witness_regions)):
        seen: set[int] = set()
        for p in rails:
            if seen & set(p):
                c.add("Rails", f"segment {si}: rails overlap")
            seen |= set(p)
        inner = set(nest_c[0])
        for p in rails:
            if not (set((p[0], p[-1])) & inner):
                c.add("Rails", f"segment {si}: rail misses the inner... outer cycle")
    return c.report()


def nest_tree_to_surface_wall(g: AnnotatedGraph, rho: Rendition,
                              w: AnnulusWall, *, r: int, k: int,
                              target_leaves: int,
                              depth_target: Optional[int] = None,
                              unchecked: bool = False,
                              log: Optional[list] = None):
    """("red", mesh) or ("wall", HostedWall, per-segment depths)."""
    n = w.n
    if not unchecked and n < wall_size(r, k, target_leaves):
        raise OrderTooSmall(f"wall order {n} < {wall_size(r, k, target_leaves)}")
    if n < k + 3:
        raise OrderTooSmall("annulus wall too small to reserve base cycles")
    base = w.base_cycles                      # innermost first
    reserved_cycles = base[n - k:]
    nest_cycles = base[:n - k]
    m = len(w.verticals)
    if m <= 4 * k:
        raise OrderTooSmall("not enough verticals to reserve a wall segment")
    reserved_verts = w.verticals[:4 * k]
    radial_pool = w.verticals[4 * k:]
    radial_paths = []
    for p in radial_pool:
        q = truncate_to_inner(_orient_inward(p, nest_cycles[0]), nest_cycles[0])
        radial_paths.append(q)
    nest = Nest(tuple(nest_cycles))
    radial = RadialLinkage(tuple(radial_paths))
    out = refine_nest_tree(g, rho, nest, radial,
                           s=nt_reserve_for(nest.order, target_leaves),
                           t=len(radial_paths), r=r,
                           target_leaves=target_leaves,
                           depth_target=depth_target,
                           unchecked=unchecked, log=log)
    if out[0] == "red":
        return out
    nt: NestTree = out[1]
    zeta = len(nt.leaves())
    want = 4 * k * zeta * (zeta + 1) if not unchecked else \
        min(4 * k, nt.linkage_order)
    union = _tree_union_graph(g, nt)
    X = sorted({p[0] for p in nt.root_radial.paths})
    Y: set[int] = set()
    for leaf in nt.leaves():
        inner_cycles, _, _ = nt.leaf_parts(leaf)
        Y |= set(inner_cycles[0])
    res = menger_linkage(union, X, Y, want)
    if res[0] != "linkage":
        raise OrderTooSmall(f"Menger link-back found only a cut of size "
                            f"{len(res[1])} < {want}")
    paths = res[1]
    per_leaf: dict[int, list[Path]] = {leaf: [] for leaf in nt.leaves()}
    for p in paths:
        for leaf in nt.leaves():
            inner_cycles, _, _ = nt.leaf_parts(leaf)
            if p[-1] in set(inner_cycles[0]):
                per_leaf[leaf].append(p)
                break
    nests_out = []
    rails_out = []
    witnesses = []
    depths = []
    for leaf in nt.leaves():
        inner_cycles, _, _ = nt.leaf_parts(leaf)
        nests_out.append(tuple(inner_cycles))
        rails_out.append(tuple(per_leaf[leaf]))
        reg = cycle_disk(rho, inner_cycles[0])
        witnesses.append(reg)
        soc = region_crop(g, rho, reg)
        from .rendition import society_depth
        depths.append(society_depth(soc))
    hw = HostedWall(order=k, base_cycles=tuple(reserved_cycles),
                    wall_verticals=tuple(reserved_verts),
                    vortex_nests=tuple(nests_out),
                    vortex_rails=tuple(rails_out),
                    witness_regions=tuple(witnesses))
    return ("wall", hw, tuple(depths))


def nt_reserve_for(order: int, leaves: int) -> int:
    # largest s with nest_size(s, leaves) <= order, at least 1
    s = 1
    while nest_size(s + 1, leaves) <= order:
        s += 1
    return s


def _orient_inward(p: Path, inner: Path) -> Path:
    sp = set(inner)
    first = next((k for k, v in enumerate(p) if v in sp), None)
    last = next((k for k, v in enumerate(reversed(p)) if v in sp), None)
    if first is None:
        raise OrderMismatch("vertical misses the inner cycle")
    return p if first >= len(p) - 1 - last else tuple(reversed(p))


def _tree_union_graph(g: AnnotatedGraph, nt: NestTree) -> AnnotatedGraph:
    vs: set[int] = set()
    es: set = set()
    for v in nt.nodes():
        for cyc in nt.nests[v].cycles:
            vs |= set(cyc)
            es |= set(cycle_edges(cyc))
    for paths in nt.linkages.values():
        for p in paths:
            vs |= set(p)
            es |= set(path_edges(p))
    for p in nt.root_radial.paths:
        vs |= set(p)
        es |= set(path_edges(p))
    return AnnotatedGraph(frozenset(vs), frozenset(es), g.red & frozenset(vs))
