"""Independent brute-force ground truth.

Exhaustive red-grid / red-clique minor search, exact treewidth by a
subset dynamic program, and disjoint-path enumeration.  Everything here is
cap-guarded; these routines exist to verify the constructive modules, so
they must stay independent of them.
"""

from __future__ import annotations

import os
from math import isqrt
from typing import Iterable, Iterator, Optional

from .core import (
    AnnotatedGraph,
    MinorModel,
    RedMinorModel,
    all_red_model,
    complete_graph,
    grid_pattern,
    verify_red_minor_model,
    verify_minor_model,
)
from .errors import CapExceeded


def default_cap() -> int:
    try:
        return int(os.environ.get("BIDIM_CAP", "12"))
    except ValueError:
        return 12


def _connected_subsets(g: AnnotatedGraph, allowed: frozenset[int],
                       max_size: int) -> Iterator[frozenset[int]]:
    """All connected subsets of ``allowed`` with size <= max_size, each once,
    in a deterministic order."""
    vs = sorted(allowed)

    def grow(S: set[int], frontier: list[int], forbidden: set[int],
             scope: set[int]) -> Iterator[frozenset[int]]:
        yield frozenset(S)
        if len(S) >= max_size:
            return
        cands = [u for u in frontier if u not in forbidden]
        for i, u in enumerate(cands):
            new_forb = forbidden | set(cands[:i])
            new_frontier = sorted(
                ((set(frontier) | (set(g.adj[u]) & scope)) - S - {u}) - new_forb)
            S.add(u)
            yield from grow(S, new_frontier, new_forb, scope)
            S.remove(u)

    for i, v in enumerate(vs):
        later = set(vs[i + 1:])
        frontier = sorted(set(g.adj[v]) & later)
        yield from grow({v}, frontier, set(), later)


def _find_model(g: AnnotatedGraph, cells: list[int],
                pattern_adj: dict[int, frozenset[int]],
                need_red: frozenset[int], max_branch: int,
                corner_cells: Optional[tuple[int, int, int, int]] = None
                ) -> Optional[dict[int, frozenset[int]]]:
    """Backtracking branch-set assignment in the given cell order."""
    assigned: dict[int, frozenset[int]] = {}
    used: set[int] = set()
    reds = g.red

    def reds_left_ok(depth: int) -> bool:
        needed = sum(1 for c in cells[depth:] if c in need_red)
        return len(reds - used) >= needed

    def candidates(cell: int) -> Iterator[frozenset[int]]:
        free = frozenset(g.vertices - used)
        req = [assigned[q] for q in pattern_adj[cell] if q in assigned]
        for S in _connected_subsets(g, free, max_branch):
            if cell in need_red and not (S & reds):
                continue
            ok = True
            for bs in req:
                if not any(g.has_edge(x, y) for x in S for y in bs):
                    ok = False
                    break
            if ok:
                yield S

    def corner_prune(cell: int, S: frozenset[int]) -> bool:
        # canonical under the dihedral grid symmetries: the (1,1)-branch has
        # the smallest corner minimum, and (1,k) beats (k,1)
        if corner_cells is None:
            return True
        c11, c1k, ck1, ckk = corner_cells
        if cell in (c1k, ck1, ckk):
            if c11 in assigned and min(S) < min(assigned[c11]):
                return False
        if cell == ck1 and c1k in assigned and min(S) < min(assigned[c1k]):
            return False
        return True

    def rec(depth: int) -> bool:
        if depth == len(cells):
            return True
        if not reds_left_ok(depth):
            return False
        cell = cells[depth]
        for S in candidates(cell):
            if not corner_prune(cell, S):
                continue
            assigned[cell] = S
            used.update(S)
            if rec(depth + 1):
                return True
            used.difference_update(S)
            del assigned[cell]
        return False

    if rec(0):
        return dict(assigned)
    return None


def _search_model(g: AnnotatedGraph, pattern: AnnotatedGraph,
                  need_red: frozenset[int], cap: int,
                  corner_cells=None) -> Optional[dict[int, frozenset[int]]]:
    n = len(g.vertices)
    cells = sorted(pattern.vertices)
    padj = {p: frozenset(pattern.adj[p]) for p in cells}
    if n <= cap:
        return _find_model(g, cells, padj, need_red, max_branch=n,
                           corner_cells=corner_cells)
    # beyond the cap only a positive answer can be certified: iterative
    # deepening on the branch-set size, bounded heuristically
    depth_cap = max(2, n // max(1, len(cells)) + 3)
    for max_branch in range(1, depth_cap + 1):
        found = _find_model(g, cells, padj, need_red, max_branch=max_branch,
                            corner_cells=corner_cells)
        if found is not None:
            return found
    raise CapExceeded(f"|V| = {n} exceeds cap {cap} and no model found "
                      f"with branch sets of size <= {depth_cap}")


def has_red_grid_minor(g: AnnotatedGraph, k: int, cap: Optional[int] = None
                       ) -> Optional[RedMinorModel]:
    """Exhaustive search for an all-red (k x k)-grid minor model."""
    if k < 1:
        raise ValueError("k must be >= 1")
    cap = default_cap() if cap is None else cap
    if len(g.red) < k * k:
        return None
    if k == 1:
        v = min(g.red)
        return all_red_model(grid_pattern(1), {1: frozenset([v])})
    pattern = grid_pattern(k)
    corner_cells = (1, k, (k - 1) * k + 1, k * k)
    branch = _search_model(g, pattern, frozenset(pattern.vertices), cap,
                           corner_cells=corner_cells)
    if branch is None:
        return None
    model = all_red_model(pattern, branch)
    assert verify_red_minor_model(g, model).ok
    return model


def has_red_clique_minor(g: AnnotatedGraph, t: int, cap: Optional[int] = None
                         ) -> Optional[RedMinorModel]:
    cap = default_cap() if cap is None else cap
    if len(g.red) < t:
        return None
    pattern = complete_graph(t)
    branch = _search_model(g, pattern, frozenset(pattern.vertices), cap)
    if branch is None:
        return None
    model = all_red_model(pattern, branch)
    assert verify_red_minor_model(g, model).ok
    return model


def has_clique_minor(g: AnnotatedGraph, t: int, cap: Optional[int] = None
                     ) -> Optional[MinorModel]:
    cap = default_cap() if cap is None else cap
    pattern = complete_graph(t)
    branch = _search_model(g, pattern, frozenset(), cap)
    if branch is None:
        return None
    model = MinorModel(pattern, branch)
    assert verify_minor_model(g, model).ok
    return model


def has_minor(g: AnnotatedGraph, pattern: AnnotatedGraph,
              cap: Optional[int] = None) -> Optional[MinorModel]:
    cap = default_cap() if cap is None else cap
    branch = _search_model(g, pattern, frozenset(), cap)
    if branch is None:
        return None
    return MinorModel(pattern, branch)


def exact_bidimensionality(g: AnnotatedGraph, k_max: Optional[int] = None,
                           cap: Optional[int] = None) -> int:
    """Largest k such that (G,R) has an all-red (k x k)-grid minor."""
    if not g.red:
        return 0
    bound = isqrt(len(g.vertices))
    k_max = bound if k_max is None else min(k_max, bound)
    best = 0
    for k in range(1, k_max + 1):
        if has_red_grid_minor(g, k, cap=cap) is None:
            break
        best = k
    return best


def exact_treewidth(g: AnnotatedGraph, cap: Optional[int] = None) -> int:
    """Exact treewidth via the elimination-ordering subset dynamic program."""
    cap = max(default_cap(), 16) if cap is None else cap
    n = len(g.vertices)
    if n > cap:
        raise CapExceeded(f"|V| = {n} exceeds treewidth cap {cap}")
    if n == 0:
        return -1
    vs = sorted(g.vertices)
    idx = {v: i for i, v in enumerate(vs)}
    adj = [0] * n
    for u, v in g.edges:
        adj[idx[u]] |= 1 << idx[v]
        adj[idx[v]] |= 1 << idx[u]

    def q(vbit: int, vpos: int, rest: int) -> int:
        # vertices outside rest|vbit seen from the component of v in rest|vbit
        allowed = rest | vbit
        comp = vbit
        nb_all = adj[vpos]
        frontier = nb_all & rest & ~comp
        comp |= frontier
        while frontier:
            nb = 0
            f = frontier
            while f:
                b = f & -f
                nb |= adj[b.bit_length() - 1]
                f ^= b
            nb_all |= nb
            frontier = nb & rest & ~comp
            comp |= frontier
        return (nb_all & ~allowed).bit_count()

    size = 1 << n
    f = [0] * size
    for S in range(1, size):
        best = n
        s = S
        while s:
            b = s & -s
            s ^= b
            pos = b.bit_length() - 1
            rest = S ^ b
            val = max(f[rest], q(b, pos, rest))
            if val < best:
                best = val
        f[S] = best
    return f[size - 1]


def _simple_paths(g: AnnotatedGraph, x: int, Y: frozenset[int],
                  banned: frozenset[int]) -> Iterator[tuple[int, ...]]:
    """All simple x-Y paths internally avoiding ``banned`` (and X∪Y)."""
    def rec(path: list[int], seen: set[int]) -> Iterator[tuple[int, ...]]:
        u = path[-1]
        for w in g.adj[u]:
            if w in Y:
                yield tuple(path + [w])
        for w in g.adj[u]:
            if w in seen or w in banned or w in Y:
                continue
            path.append(w)
            seen.add(w)
            yield from rec(path, seen)
            seen.remove(w)
            path.pop()

    if x in Y:
        yield (x,)
        return
    yield from rec([x], {x})


def all_disjoint_path_systems(g: AnnotatedGraph, X: Iterable[int],
                              Y: Iterable[int], k: int,
                              cap: Optional[int] = None
                              ) -> list[tuple[tuple[int, ...], ...]]:
    """Every family of exactly k pairwise vertex-disjoint X-Y paths.

    Test-only oracle for the flow engine; exponential.
    """
    cap = default_cap() if cap is None else cap
    if len(g.vertices) > cap:
        raise CapExceeded(f"|V| = {len(g.vertices)} exceeds cap {cap}")
    Xs = sorted(frozenset(X) & g.vertices)
    Yf = frozenset(Y) & g.vertices
    terminals = frozenset(Xs) | Yf
    out: list[tuple[tuple[int, ...], ...]] = []

    def rec(i: int, chosen: list[tuple[int, ...]], used: set[int]):
        if len(chosen) == k:
            out.append(tuple(chosen))
            return
        if i >= len(Xs):
            return
        # either skip source Xs[i] or route from it
        rec(i + 1, chosen, used)
        x = Xs[i]
        if x in used:
            return
        for p in _simple_paths(g, x, Yf - used, (terminals | used) - Yf):
            if any(v in used for v in p):
                continue
            chosen.append(p)
            used.update(p)
            rec(i + 1, chosen, used)
            used.difference_update(p)
            chosen.pop()

    rec(0, [], set())
    return out


def max_disjoint_paths_brute(g: AnnotatedGraph, X: Iterable[int],
                             Y: Iterable[int], cap: Optional[int] = None) -> int:
    for k in range(min(len(frozenset(X)), len(frozenset(Y))), 0, -1):
        if all_disjoint_path_systems(g, X, Y, k, cap=cap):
            return k
    return 0
