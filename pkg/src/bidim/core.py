"""Annotated graphs, separations, minor models, and the red-clique extraction.

An annotated graph is a graph together with a distinguished set of "red"
vertices.  Minor models are explicit branch-set assignments; everything here
is verified by reports that list every violated condition rather than only
the first one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Union

from .errors import (
    InvalidModel,
    NoMajority,
    OrderTooLarge,
    ParameterRange,
    UnknownVertex,
)

Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class AnnotatedGraph:
    """Undirected graph plus the red vertex set."""

    vertices: frozenset[int]
    edges: frozenset[Edge]
    red: frozenset[int] = frozenset()

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if u > v:
                raise ValueError(f"edge {(u, v)} not normalized")
            if u not in self.vertices or v not in self.vertices:
                raise UnknownVertex(f"edge {(u, v)} has endpoint outside vertex set")
        if not self.red <= self.vertices:
            raise UnknownVertex(f"red vertices {sorted(self.red - self.vertices)} not in graph")

    @staticmethod
    def build(vertices: Iterable[int], edges: Iterable[tuple[int, int]],
              red: Iterable[int] = ()) -> "AnnotatedGraph":
        es = frozenset(norm_edge(u, v) for u, v in edges)
        vs = frozenset(vertices) | frozenset(v for e in es for v in e)
        return AnnotatedGraph(vs, es, frozenset(red))

    @cached_property
    def adj(self) -> dict[int, tuple[int, ...]]:
        nbr: dict[int, set[int]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            nbr[u].add(v)
            nbr[v].add(u)
        return {v: tuple(sorted(ns)) for v, ns in nbr.items()}

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return norm_edge(u, v) in self.edges

    def with_red(self, red: Iterable[int]) -> "AnnotatedGraph":
        return AnnotatedGraph(self.vertices, self.edges, frozenset(red) & self.vertices
                              if not frozenset(red) <= self.vertices else frozenset(red))

    def induced(self, vs: Iterable[int]) -> "AnnotatedGraph":
        keep = frozenset(vs)
        if not keep <= self.vertices:
            raise UnknownVertex(f"{sorted(keep - self.vertices)} not in graph")
        es = frozenset(e for e in self.edges if e[0] in keep and e[1] in keep)
        return AnnotatedGraph(keep, es, self.red & keep)

    def without(self, vs: Iterable[int]) -> "AnnotatedGraph":
        drop = frozenset(vs)
        return self.induced(self.vertices - drop)

    def add_edges(self, edges: Iterable[tuple[int, int]]) -> "AnnotatedGraph":
        es = self.edges | frozenset(norm_edge(u, v) for u, v in edges if u != v)
        return AnnotatedGraph(self.vertices, es, self.red)

    def union(self, other: "AnnotatedGraph") -> "AnnotatedGraph":
        return AnnotatedGraph(self.vertices | other.vertices,
                              self.edges | other.edges,
                              self.red | other.red)

    def is_connected_set(self, vs: Iterable[int]) -> bool:
        vs = set(vs)
        if not vs:
            return False
        start = min(vs)
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in self.adj.get(u, ()):
                if w in vs and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == vs

    def components(self) -> list[frozenset[int]]:
        seen: set[int] = set()
        out = []
        for v in sorted(self.vertices):
            if v in seen:
                continue
            comp = {v}
            stack = [v]
            while stack:
                u = stack.pop()
                for w in self.adj[u]:
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def component_of(self, v: int) -> frozenset[int]:
        comp = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for w in self.adj[u]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        return frozenset(comp)


def complete_graph(n: int, red: Iterable[int] = ()) -> AnnotatedGraph:
    vs = range(1, n + 1)
    return AnnotatedGraph.build(vs, [(i, j) for i in vs for j in vs if i < j], red)


def grid_graph(n: int, m: int, red: Iterable[int] = ()) -> AnnotatedGraph:
    """(n x m)-grid with vertex ids (i-1)*m + j, 1-based rows/columns."""
    def vid(i, j):
        return (i - 1) * m + j
    edges = []
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if j < m:
                edges.append((vid(i, j), vid(i, j + 1)))
            if i < n:
                edges.append((vid(i, j), vid(i + 1, j)))
    return AnnotatedGraph.build(range(1, n * m + 1), edges, red)


def grid_pattern(k: int, all_red: bool = False) -> AnnotatedGraph:
    g = grid_graph(k, k)
    return g.with_red(g.vertices) if all_red else g


# ---------------------------------------------------------------------------
# Validity reports


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


@dataclass(frozen=True)
class ValidityReport:
    violations: tuple[Violation, ...] = ()
    stats: Mapping[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def describe(self) -> str:
        if self.ok:
            return "valid" + (f" {dict(self.stats)}" if self.stats else "")
        return "; ".join(f"{v.kind}: {v.detail}" for v in self.violations)


class _Collector:
    def __init__(self):
        self.items: list[Violation] = []
        self.stats: dict[str, int] = {}

    def add(self, kind: str, detail: str):
        self.items.append(Violation(kind, detail))

    def report(self) -> ValidityReport:
        return ValidityReport(tuple(self.items), dict(self.stats))


# ---------------------------------------------------------------------------
# Separations


@dataclass(frozen=True)
class Separation:
    side_a: frozenset[int]
    side_b: frozenset[int]

    @property
    def cut(self) -> frozenset[int]:
        return self.side_a & self.side_b

    @property
    def order(self) -> int:
        return len(self.cut)

    def flipped(self) -> "Separation":
        return Separation(self.side_b, self.side_a)


def verify_separation(g: AnnotatedGraph, sep: Separation) -> ValidityReport:
    c = _Collector()
    if sep.side_a | sep.side_b != g.vertices:
        c.add("Cover", f"sides miss vertices {sorted(g.vertices - (sep.side_a | sep.side_b))}")
    if not sep.side_a <= g.vertices or not sep.side_b <= g.vertices:
        c.add("UnknownVertex", "side contains vertices outside the graph")
    ao = sep.side_a - sep.side_b
    bo = sep.side_b - sep.side_a
    for u, v in sorted(g.edges):
        if (u in ao and v in bo) or (u in bo and v in ao):
            c.add("CrossEdge", f"edge {(u, v)} joins the two open sides")
    c.stats["order"] = sep.order
    return c.report()


def all_separations(g: AnnotatedGraph, max_order: int) -> list[Separation]:
    """Every separation (A,B) with |A∩B| <= max_order, via separator subsets.

    A\\B is always a union of components of G - (A∩B), so enumerating
    separators and component splits is exhaustive.
    """
    from itertools import combinations
    vs = sorted(g.vertices)
    out = []
    seen = set()
    for size in range(0, max_order + 1):
        for cut in combinations(vs, size):
            cutset = frozenset(cut)
            rest = g.without(cutset)
            comps = rest.components()
            n = len(comps)
            for mask in range(2 ** n):
                a_open = frozenset().union(*(comps[i] for i in range(n) if mask >> i & 1)) \
                    if mask else frozenset()
                a = a_open | cutset
                b = (g.vertices - a) | cutset
                key = (a, b)
                if key in seen:
                    continue
                seen.add(key)
                out.append(Separation(a, b))
    return out


# ---------------------------------------------------------------------------
# Minor models


@dataclass(frozen=True)
class MinorModel:
    pattern: AnnotatedGraph
    branch: Mapping[int, frozenset[int]]

    def __post_init__(self):
        object.__setattr__(self, "branch",
                           {k: frozenset(v) for k, v in sorted(self.branch.items())})

    def branch_union(self) -> frozenset[int]:
        out: set[int] = set()
        for s in self.branch.values():
            out |= s
        return frozenset(out)


@dataclass(frozen=True)
class RedMinorModel:
    base: MinorModel
    red_pattern: frozenset[int]

    @property
    def pattern(self) -> AnnotatedGraph:
        return self.base.pattern

    @property
    def branch(self) -> Mapping[int, frozenset[int]]:
        return self.base.branch


def all_red_model(pattern: AnnotatedGraph, branch: Mapping[int, frozenset[int]]) -> RedMinorModel:
    return RedMinorModel(MinorModel(pattern, branch), frozenset(pattern.vertices))


def verify_minor_model(g: AnnotatedGraph, m: MinorModel) -> ValidityReport:
    """Check disjointness, connectivity, and pattern-edge realization."""
    for pv, bs in m.branch.items():
        missing = bs - g.vertices
        if missing:
            raise UnknownVertex(f"branch({pv}) names absent vertices {sorted(missing)}")
    c = _Collector()
    for pv in sorted(m.pattern.vertices):
        if pv not in m.branch:
            c.add("MissingBranch", f"pattern vertex {pv} has no branch set")
        elif not m.branch[pv]:
            c.add("EmptyBranch", f"branch({pv}) is empty")
    items = sorted(m.branch.items())
    for i, (pu, bu) in enumerate(items):
        for pv, bv in items[i + 1:]:
            shared = bu & bv
            if shared:
                c.add("Overlap", f"branch({pu}) and branch({pv}) share {sorted(shared)}")
    for pv, bs in items:
        if bs and not g.is_connected_set(bs):
            c.add("Disconnected", f"branch({pv}) = {sorted(bs)} is not connected")
    for pu, pv in sorted(m.pattern.edges):
        bu = m.branch.get(pu, frozenset())
        bv = m.branch.get(pv, frozenset())
        if bu and bv and not any(g.has_edge(x, y) for x in bu for y in bv):
            c.add("MissingPatternEdge", f"no edge between branch({pu}) and branch({pv})")
    return c.report()


def verify_red_minor_model(g: AnnotatedGraph, m: RedMinorModel) -> ValidityReport:
    base = verify_minor_model(g, m.base)
    c = _Collector()
    c.items.extend(base.violations)
    for pv in sorted(m.red_pattern):
        if pv not in m.base.branch:
            c.add("MissingBranch", f"red pattern vertex {pv} has no branch set")
        elif not (m.base.branch[pv] & g.red):
            c.add("RedMiss", f"branch({pv}) contains no red vertex")
    return c.report()


# ---------------------------------------------------------------------------
# Majority sides


def separation_majority(sep: Separation, m: MinorModel) -> str:
    """The side ("A" or "B") containing a full branch set of m.

    Determines membership of (A,B) in the tangle induced by the model; for
    clique models the side is unique whenever order < |V(pattern)|.
    """
    if sep.order >= len(m.pattern.vertices):
        raise OrderTooLarge(
            f"order {sep.order} >= pattern size {len(m.pattern.vertices)}")
    ao = sep.side_a - sep.side_b
    bo = sep.side_b - sep.side_a
    in_a = any(bs and bs <= ao for bs in m.branch.values())
    in_b = any(bs and bs <= bo for bs in m.branch.values())
    if in_a == in_b:
        raise NoMajority(f"majority side undefined (A:{in_a}, B:{in_b})")
    return "B" if in_b else "A"


def mesh_majority(sep: Separation, horizontal, vertical) -> Optional[str]:
    """Side whose open part contains a full horizontal and vertical path."""
    ao = sep.side_a - sep.side_b
    bo = sep.side_b - sep.side_a

    def holds(side):
        return any(set(p) <= side for p in horizontal) and \
            any(set(q) <= side for q in vertical)

    in_a, in_b = holds(ao), holds(bo)
    if in_a == in_b:
        return None
    return "B" if in_b else "A"


def majority_refines(sep: Separation, fine_side: Optional[str],
                     coarse_side: Optional[str]) -> bool:
    """Refinement at one separation: if the finer object orients it, the
    coarser object orients it the same way."""
    if fine_side is None:
        return True
    return coarse_side == fine_side


# ---------------------------------------------------------------------------
# Red clique or separation (the k >= floor(3t/2) + t dichotomy)


def _route_red_cliques(g: AnnotatedGraph, m: MinorModel, t: int
                       ) -> Optional[RedMinorModel]:
    """Greedy reassignment: absorb red vertices into branch sets.

    Whole branch sets act as capacity-one super nodes; a red-to-branch path
    consumes every branch set it crosses.  Each result keeps one original
    branch set whole, so clique adjacency and tangle refinement survive.
    """
    items = sorted(m.branch.items())
    red_sets = [(pv, bs) for pv, bs in items if bs & g.red]
    if len(red_sets) >= t:
        chosen = red_sets[:t]
        pattern = complete_graph(t)
        branch = {i + 1: bs for i, (_, bs) in enumerate(chosen)}
        return all_red_model(pattern, branch)

    result: list[frozenset[int]] = [bs for _, bs in red_sets]
    blocked: set[int] = set().union(*result) if result else set()
    available: dict[int, frozenset[int]] = {
        pv: bs for pv, bs in items if not (bs & g.red)}
    vertex_owner = {v: pv for pv, bs in available.items() for v in bs}
    while len(result) < t:
        # BFS from all outside red vertices, avoiding already-used material.
        frontier = sorted(v for v in g.red if v not in blocked)
        parent: dict[int, Optional[int]] = {v: None for v in frontier}
        hit = None
        while frontier and hit is None:
            nxt = []
            for u in frontier:
                if u in vertex_owner:
                    hit = u
                    break
                for w in g.adj[u]:
                    if w in blocked or w in parent:
                        continue
                    parent[w] = u
                    nxt.append(w)
            frontier = sorted(nxt)
        if hit is None:
            return None
        path = [hit]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        crossed = {vertex_owner[v] for v in path if v in vertex_owner}
        anchor = vertex_owner[hit]
        new_set = set(path) | set(available[anchor])
        for pv in crossed - {anchor}:
            # keep only the path vertices of crossed sets; discard the rest
            del available[pv]
        del available[anchor]
        vertex_owner = {v: pv for pv, bs in available.items() for v in bs}
        result.append(frozenset(new_set))
        blocked |= new_set
    pattern = complete_graph(t)
    model = all_red_model(pattern, {i + 1: bs for i, bs in enumerate(result)})
    if verify_red_minor_model(g, model).ok:
        return model
    return None


def _red_free_majority_separation(g: AnnotatedGraph, m: MinorModel, t: int
                                  ) -> Optional[Separation]:
    """Separation of order <= t-1 whose majority side misses R, by cutting
    all red vertices away from the branch sets."""
    from ._flow import max_vertex_disjoint
    core = m.branch_union()
    reds = sorted(g.red)
    if not reds:
        comps = g.components()
        b_open = frozenset().union(*(c for c in comps if c & core)) if core else g.vertices
        a = (g.vertices - b_open)
        return Separation(a, b_open | frozenset())
    paths, cut = max_vertex_disjoint(g, frozenset(reds), core)
    if len(paths) > t - 1:
        return None
    rest = g.without(cut)
    b_open = set()
    for comp in rest.components():
        if comp & core:
            b_open |= comp
    if b_open & g.red:
        return None
    b = frozenset(b_open) | cut
    a = (g.vertices - frozenset(b_open))
    sep = Separation(a, b)
    if sep.order > t - 1:
        return None
    return sep


def _brute_separation(g: AnnotatedGraph, m: MinorModel, t: int) -> Optional[Separation]:
    from itertools import combinations
    vs = sorted(g.vertices)
    branch_sets = list(m.branch.values())
    for size in range(0, t):
        for cut in combinations(vs, size):
            cutset = frozenset(cut)
            rest = g.without(cutset)
            b_open: set[int] = set()
            ok = True
            for comp in rest.components():
                if comp & g.red:
                    if any(bs <= comp for bs in branch_sets):
                        ok = False
                        break
                    continue
                b_open |= comp
            if not ok:
                continue
            if not any(bs <= b_open for bs in branch_sets):
                continue
            b = frozenset(b_open) | cutset
            a = (g.vertices - frozenset(b_open))
            return Separation(a, b)
    return None


def red_clique_or_separation(g: AnnotatedGraph, m: MinorModel, t: int
                             ) -> Union[RedMinorModel, Separation]:
    """Either an all-red K_t red minor refining the model tangle, or a
    separation of order <= t-1 whose majority side avoids R.

    Requires a valid K_k model with k >= floor(3t/2) + t.
    """
    k = len(m.pattern.vertices)
    if k < (3 * t) // 2 + t:
        raise ParameterRange(f"need k >= {(3 * t) // 2 + t} = floor(3t/2)+t, got {k}")
    rep = verify_minor_model(g, m)
    if not rep.ok:
        raise InvalidModel(rep.describe())
    if m.pattern.edges != complete_graph(k).edges or \
            m.pattern.vertices != complete_graph(k).vertices:
        # accept any clique pattern on arbitrary labels
        n = len(m.pattern.vertices)
        if len(m.pattern.edges) != n * (n - 1) // 2:
            raise InvalidModel("pattern is not a complete graph")

    model = _route_red_cliques(g, m, t)
    if model is not None and verify_red_minor_model(g, model).ok:
        return model
    sep = _red_free_majority_separation(g, m, t)
    if sep is not None and verify_separation(g, sep).ok and \
            separation_majority(sep, m) == "B" and not ((sep.side_b - sep.side_a) & g.red):
        return sep
    # desk-scale fallbacks; the postcondition, not the construction, is the
    # contract here
    from .oracle import has_red_clique_minor
    model = has_red_clique_minor(g, t, cap=len(g.vertices))
    if model is not None:
        return model
    sep = _brute_separation(g, m, t)
    if sep is not None:
        return sep
    raise InvalidModel("no outcome found; inputs violate the dichotomy")
