"""Circular improvements: cycles of anchor edges {n(u), n2(u)} over the current solution.

The search builds an auxiliary multigraph H whose vertices pair an anchor
v ∈ A with a small Y-set of vertices anchored at v, and whose edges are the
vertices u with two A-neighbours whose local inequality holds. A cycle in H
with pairwise disjoint, independent supports is an improvement. Cycles are
found by color coding on set systems, or by a complete DFS otherwise.
"""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional

import networkx as nx
import numpy as np

from errors import ContractError, InputError, SearchIncomplete
from instance import Circular, ConflictGraph, make_improvement, neighborhood
from utils import log_cap

logger = logging.getLogger(__name__)

DEFAULT_Y_CAP = 3
DEFAULT_MAX_CYCLE_LEN = 12
DEFAULT_MAX_AUX_VERTICES = 20_000
DEFAULT_MAX_STATES = 2_000_000
DEFAULT_FAILURE_PROBABILITY = 1e-3
CC_MODES = ("randomized", "exhaustive")


@dataclass(frozen=True)
class ColorCodingParams:
    mode: str = "randomized"
    t: Optional[int] = None
    repetitions: Optional[int] = None
    failure_probability: float = DEFAULT_FAILURE_PROBABILITY
    target_elements: int = 8
    max_cycle_len: int = DEFAULT_MAX_CYCLE_LEN
    y_cap: int = DEFAULT_Y_CAP
    max_aux_vertices: int = DEFAULT_MAX_AUX_VERTICES
    max_states: int = DEFAULT_MAX_STATES
    node_budget: int = 10**7

    def __post_init__(self):
        if self.mode not in CC_MODES:
            raise InputError(f"color-coding mode must be one of {CC_MODES}, got {self.mode!r}")
        if self.t is not None and self.t < 1:
            raise InputError("t must be >= 1")
        if self.repetitions is not None and self.repetitions < 1:
            raise InputError("repetitions must be >= 1")
        if not 0 < self.failure_probability < 1:
            raise InputError("failure probability must lie in (0, 1)")
        if self.max_cycle_len < 2:
            raise InputError("max cycle length must be >= 2")
        if self.y_cap < 0:
            raise InputError("y_cap must be >= 0")


# Anchor maps
@dataclass(frozen=True)
class AnchorMaps:
    """n(u) and n2(u): heaviest and second heaviest A-neighbour (ties: lowest id)."""

    n: dict
    n2: dict


def build_anchor_maps(g: ConflictGraph, A) -> AnchorMaps:
    A = frozenset(A)
    g.check_ids(A)
    n, n2 = {}, {}
    for u in range(g.n):
        if u in A:
            continue
        ranked = sorted(g.neighbors(u) & A, key=lambda v: (-g.w(v), v))
        if not ranked:
            raise ContractError(f"A is not maximal: vertex {u} has no neighbour in A")
        n[u] = ranked[0]
        if len(ranked) > 1:
            n2[u] = ranked[1]
    return AnchorMaps(n, n2)


# Auxiliary multigraph
@dataclass(frozen=True)
class AuxVertex:
    anchor: int
    Y: frozenset


@dataclass(frozen=True)
class AuxEdge:
    """Edge induced by u between the vertex anchored at n(u) (``a``) and at n2(u) (``b``)."""

    u: int
    a: int
    b: int

    def other(self, i):
        return self.b if i == self.a else self.a


class AuxGraph:
    def __init__(self, vertices, edges, element_sets=None):
        self.vertices = list(vertices)
        self.edges = list(edges)
        self.element_sets = element_sets
        self.incident = [[] for _ in self.vertices]
        for i, e in enumerate(self.edges):
            self.incident[e.a].append(i)
            self.incident[e.b].append(i)

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"AuxGraph(|V|={len(self.vertices)}, |E|={len(self.edges)})"


def aux_edge_check(u, Y1, Y2, g: ConflictGraph, A, maps: AnchorMaps) -> bool:
    """Local inequality of the edge induced by u, both sides doubled."""
    A = frozenset(A)
    v1, v2 = maps.n[u], maps.n2[u]
    lhs = 2 * g.w2(u) + g.weight2(set(Y1) | set(Y2))
    rhs = g.w2(v1) + g.w2(v2) + 2 * g.weight2((g.neighbors(u) & A) - {v1, v2})
    for x in Y1:
        rhs += g.weight2((g.neighbors(x) & A) - {v1})
    for x in Y2:
        rhs += g.weight2((g.neighbors(x) & A) - {v2})
    return lhs > rhs


def _independent_subsets(g, candidates, cap):
    yield frozenset()
    chosen = []

    def extend(start):
        for i in range(start, len(candidates)):
            x = candidates[i]
            if any(g.adjacent(x, c) for c in chosen):
                continue
            chosen.append(x)
            yield frozenset(chosen)
            if len(chosen) < cap:
                yield from extend(i + 1)
            chosen.pop()

    if cap > 0:
        yield from extend(0)


def build_aux_graph(g: ConflictGraph, A, maps: AnchorMaps, params: ColorCodingParams, d=None) -> AuxGraph:
    A = frozenset(A)
    d = g.claw_bound() if d is None else d
    y_cap = max(0, min(d - 1, params.y_cap))
    # only x that pay for themselves can help an inequality
    candidates = defaultdict(list)
    for x in sorted(maps.n):
        v = maps.n[x]
        if g.w2(x) > g.weight2((g.neighbors(x) & A) - {v}):
            candidates[v].append(x)
    inducers = sorted(maps.n2)
    anchors = sorted({maps.n[u] for u in inducers} | {maps.n2[u] for u in inducers})
    vertices, by_anchor = [], defaultdict(list)
    for v in anchors:
        for Y in _independent_subsets(g, candidates[v], y_cap):
            by_anchor[v].append(len(vertices))
            vertices.append(AuxVertex(v, Y))
            if len(vertices) > params.max_aux_vertices:
                raise SearchIncomplete(f"aux graph exceeds {params.max_aux_vertices} vertices", nodes=len(vertices))
    edges = []
    for u in inducers:
        nbrs_u = g.neighbors(u)
        for a in by_anchor[maps.n[u]]:
            Y1 = vertices[a].Y
            if u in Y1 or nbrs_u & Y1:
                continue
            for b in by_anchor[maps.n2[u]]:
                Y2 = vertices[b].Y
                if u in Y2 or nbrs_u & Y2 or not g.is_independent(Y1 | Y2):
                    continue
                if aux_edge_check(u, Y1, Y2, g, A, maps):
                    edges.append(AuxEdge(u, a, b))
    H = AuxGraph(vertices, edges, g.sets)
    logger.debug("aux graph: %r (y_cap=%d)", H, y_cap)
    return H


# Cycle search
@dataclass(frozen=True)
class ColorfulCycle:
    """Edge ids in cycle order; ``vertices[i]`` and ``vertices[i+1]`` meet ``edges[i]``."""

    edges: tuple
    vertices: tuple


def effective_cycle_cap(g: ConflictGraph, params: ColorCodingParams) -> int:
    return min(params.max_cycle_len, log_cap(4, g.n))


def _parallel_pair(g, H):
    groups = defaultdict(list)
    for i, e in enumerate(H.edges):
        groups[(min(e.a, e.b), max(e.a, e.b))].append(i)
    for key in sorted(groups):
        for i, j in combinations(groups[key], 2):
            u1, u2 = H.edges[i].u, H.edges[j].u
            if u1 != u2 and not g.adjacent(u1, u2):
                return ColorfulCycle((i, j), key)
    return None


def _support_mask(H, members, coloring):
    mask = 0
    for x in members:
        for el in H.element_sets[x]:
            mask |= 1 << int(coloring[el])
    return mask


def colorful_cycle_dp(H: AuxGraph, coloring, L, max_states=DEFAULT_MAX_STATES) -> Optional[ColorfulCycle]:
    """Colorful cycle of 3..L edges in H, or None.

    An edge is colored by its inducing set, a vertex by its Y-sets plus one
    private color per anchor; a cycle is colorful when all these color sets
    are pairwise disjoint. Path(s, t, C, i) is grown one edge at a time from
    every end vertex t, keeping only reachable color sets.
    """
    if H.element_sets is None:
        raise InputError("color coding needs element sets")
    edge_col = [_support_mask(H, (e.u,), coloring) for e in H.edges]
    vert_col = [_support_mask(H, v.Y, coloring) for v in H.vertices]
    base = max([m.bit_length() for m in edge_col + vert_col] + [0])
    anchor_bit = {a: base + j for j, a in enumerate(sorted({v.anchor for v in H.vertices}))}
    vert_col = [m | (1 << anchor_bit[v.anchor]) for m, v in zip(vert_col, H.vertices)]

    incident = [[] for _ in H.vertices]
    for i, e in enumerate(H.edges):
        ec, ca, cb = edge_col[i], vert_col[e.a], vert_col[e.b]
        if ec & ca or ec & cb or ca & cb:
            continue
        incident[e.a].append(i)
        incident[e.b].append(i)

    for t in range(len(H.vertices)):
        if not incident[t]:
            continue
        layer = {(t, vert_col[t]): None}
        history = [layer]
        states = 1
        for i in range(1, L):
            grown = {}
            for v, C in layer:
                for eid in incident[v]:
                    s = H.edges[eid].other(v)
                    added = edge_col[eid] | vert_col[s]
                    if added & C:
                        continue
                    key = (s, C | added)
                    if key not in grown:
                        grown[key] = ((v, C), eid)
            if not grown:
                break
            states += len(grown)
            if states > max_states:
                raise SearchIncomplete(f"color-coding DP exceeded {max_states} states", nodes=states)
            history.append(grown)
            if i >= 2:
                for s, C in grown:
                    for eid in incident[s]:
                        if H.edges[eid].other(s) == t and not edge_col[eid] & C:
                            return _unwind(history, i, (s, C), eid)
            layer = grown
    return None


def _unwind(history, i, state, closing):
    vertices, edges = [state[0]], []
    while i > 0:
        prev, eid = history[i][state]
        edges.append(eid)
        vertices.append(prev[0])
        state = prev
        i -= 1
    edges.append(closing)
    return ColorfulCycle(tuple(edges), tuple(vertices))


def exhaustive_cycle_search(g: ConflictGraph, H: AuxGraph, L, budget=10**7) -> Optional[ColorfulCycle]:
    """Complete DFS for a cycle of 3..L edges with distinct anchors and independent, disjoint supports."""
    nodes = 0

    for s in range(len(H.vertices)):
        start = H.vertices[s]
        support = set(start.Y)
        anchors = {start.anchor}
        path_v, path_e = [s], []

        def dfs(cur):
            nonlocal nodes
            for eid in H.incident[cur]:
                e = H.edges[eid]
                nxt = e.other(cur)
                if nxt < s:
                    continue
                nodes += 1
                if nodes > budget:
                    raise SearchIncomplete(f"cycle search exceeded {budget} nodes", nodes=nodes)
                u = e.u
                if u in support or g.neighbors(u) & support:
                    continue
                if nxt == s:
                    if len(path_e) >= 2:
                        return ColorfulCycle(tuple(path_e + [eid]), tuple(path_v))
                    continue
                if len(path_e) + 2 > L:
                    continue
                vertex = H.vertices[nxt]
                if vertex.anchor in anchors:
                    continue
                grown = support | {u}
                if vertex.Y & grown or not g.is_independent(grown | vertex.Y):
                    continue
                support.update(vertex.Y | {u})
                anchors.add(vertex.anchor)
                path_v.append(nxt)
                path_e.append(eid)
                found = dfs(nxt)
                if found is not None:
                    return found
                path_e.pop()
                path_v.pop()
                anchors.discard(vertex.anchor)
                support.difference_update(vertex.Y | {u})
            return None

        found = dfs(s)
        if found is not None:
            return found
    return None


def _to_improvement(g, A, H, cycle):
    U = tuple(H.edges[e].u for e in cycle.edges)
    ys = tuple((H.vertices[i].anchor, H.vertices[i].Y) for i in cycle.vertices)
    X = set(U)
    for _, Y in ys:
        X |= Y
    if len(X) != len(U) + sum(len(Y) for _, Y in ys) or not g.is_independent(X):
        return None
    kind = Circular(U, tuple(a for a, _ in ys), ys)
    return make_improvement(g, A, X, kind)


# Color coding
def default_colors(g: ConflictGraph) -> int:
    """ceil(4(k+1)k log2|S|), clamped to the number of used elements."""
    used = set().union(*g.sets) if g.sets else set()
    k = max((len(s) for s in g.sets), default=1)
    t = math.ceil(4 * (k + 1) * k * math.log2(max(g.n, 2)))
    return max(1, min(t, len(used)))


def default_repetitions(t, params: ColorCodingParams) -> int:
    m = min(t, params.target_elements)
    q = 1.0
    for i in range(m):
        q *= (t - i) / t
    return max(1, math.ceil(math.log(1 / params.failure_probability) / q))


def run_color_coding(g: ConflictGraph, A, maps: AnchorMaps, params: ColorCodingParams, rng=None, d=None, H=None):
    """Randomized search for a circular improvement on a set system."""
    if g.sets is None:
        raise InputError("color coding needs a graph built from a set system")
    A = frozenset(A)
    L = effective_cycle_cap(g, params)
    if L < 2:
        return None
    if H is None:
        H = build_aux_graph(g, A, maps, params, d)
    if not H.edges:
        return None
    pair = _parallel_pair(g, H)
    if pair is not None:
        return _to_improvement(g, A, H, pair)
    if L < 3:
        return None
    rng = np.random.default_rng(0) if rng is None else rng
    used = sorted(set().union(*g.sets))
    t = params.t if params.t is not None else default_colors(g)
    size = used[-1] + 1
    if t >= len(used):
        # the identity map is already injective
        colorings = [np.arange(size)]
        reps = 1
    else:
        colorings = None
        reps = params.repetitions or default_repetitions(t, params)
    for rep in range(reps):
        coloring = colorings[0] if colorings else rng.integers(0, t, size=size)
        cycle = colorful_cycle_dp(H, coloring, L, params.max_states)
        logger.debug("color coding repetition %d/%d: %s", rep + 1, reps, "hit" if cycle else "miss")
        if cycle is not None:
            imp = _to_improvement(g, A, H, cycle)
            if imp is not None:
                return imp
    return None


def find_circular_improvement(g: ConflictGraph, A, maps: AnchorMaps, params=ColorCodingParams(), rng=None, d=None):
    """Circular improvement w.r.t. A, or None.

    Randomized mode runs color coding and may miss an improvement; the
    exhaustive mode is complete for cycles of up to ``effective_cycle_cap``
    edges and Y-sets of up to ``y_cap`` vertices. Raises SearchIncomplete when
    a guard stops the search.
    """
    A = frozenset(A)
    if params.mode == "randomized":
        if g.sets is not None:
            return run_color_coding(g, A, maps, params, rng, d)
        logger.warning("randomized color coding needs element sets; using the exhaustive search")
    L = effective_cycle_cap(g, params)
    if L < 2:
        return None
    H = build_aux_graph(g, A, maps, params, d)
    pair = _parallel_pair(g, H)
    if pair is not None:
        return _to_improvement(g, A, H, pair)
    if L < 3:
        return None
    cycle = exhaustive_cycle_search(g, H, L, params.node_budget)
    return None if cycle is None else _to_improvement(g, A, H, cycle)


# Certificates
def _is_anchor_cycle(pairs):
    if len(pairs) == 2:
        return len({frozenset(p) for p in pairs}) == 1
    if len(pairs) < 3:
        return False
    multi = nx.MultiGraph()
    multi.add_edges_from(pairs)
    return (
        multi.number_of_nodes() == len(pairs)
        and all(deg == 2 for _, deg in multi.degree())
        and nx.is_connected(multi)
    )


def validate_circular(g: ConflictGraph, A, maps: AnchorMaps, imp, d=None):
    """Field-by-field check of a circular improvement; returns the list of violations."""
    A = frozenset(A)
    d = g.claw_bound() if d is None else d
    if not isinstance(imp.kind, Circular):
        return ["not a circular improvement"]
    problems = []
    X = set(imp.X)
    U = list(imp.kind.U)
    if X & A:
        problems.append("X meets A")
    if not g.is_independent(X):
        problems.append("X is not independent")
    if len(set(U)) != len(U) or not set(U) <= X:
        problems.append("U is not a set of members of X")
    if len(U) > log_cap(4, g.n):
        problems.append(f"|U|={len(U)} exceeds 4 log2 |V|")
    if any(u not in maps.n2 for u in U):
        problems.append("some u has fewer than two neighbours in A")
        return problems
    pairs = [(maps.n[u], maps.n2[u]) for u in U]
    if not _is_anchor_cycle(pairs):
        problems.append("anchor edges do not form a cycle")
    cycle = {v for p in pairs for v in p}
    rest = X - set(U)
    Y = {v: frozenset(x for x in rest if maps.n.get(x) == v) for v in cycle}
    for v, Yv in Y.items():
        if len(Yv) > d - 1:
            problems.append(f"|Y_{v}|={len(Yv)} exceeds d-1")
    if set().union(set(U), *Y.values()) != X:
        problems.append("X is not U plus the Y-sets of the cycle")
    for u in U:
        if not aux_edge_check(u, Y[maps.n[u]], Y[maps.n2[u]], g, A, maps):
            problems.append(f"local inequality fails for u={u}")
    if not g.weight2(X) > g.weight2(neighborhood(X, A, g)):
        problems.append("w²(X) does not exceed w²(N(X, A))")
    return problems


@dataclass(frozen=True)
class ChainTerms:
    """Terms of the inequality chain that turns the local inequalities into w²(X) > w²(N(X, A))."""

    weight_X: Fraction
    lhs_sum: Fraction
    rhs_sum: Fraction
    regrouped: Fraction
    weight_removed: Fraction

    def holds(self):
        return (
            self.lhs_sum == self.weight_X
            and self.rhs_sum == self.regrouped
            and self.lhs_sum > self.rhs_sum
            and self.regrouped >= self.weight_removed
            and self.weight_X > self.weight_removed
        )


def circular_chain(g: ConflictGraph, A, maps: AnchorMaps, imp) -> ChainTerms:
    A = frozenset(A)
    U = list(imp.kind.U)
    rest = set(imp.X) - set(U)
    cycle = {v for u in U for v in (maps.n[u], maps.n2[u])}
    Y = {v: frozenset(x for x in rest if maps.n[x] == v) for v in cycle}
    half = Fraction(1, 2)
    lhs = rhs = Fraction(0)
    for u in U:
        v1, v2 = maps.n[u], maps.n2[u]
        lhs += g.w2(u) + half * g.weight2(Y[v1] | Y[v2])
        rhs += half * (g.w2(v1) + g.w2(v2)) + g.weight2((g.neighbors(u) & A) - {v1, v2})
        rhs += half * sum((g.weight2((g.neighbors(x) & A) - {v1}) for x in Y[v1]), Fraction(0))
        rhs += half * sum((g.weight2((g.neighbors(x) & A) - {v2}) for x in Y[v2]), Fraction(0))
    regrouped = g.weight2(cycle)
    regrouped += sum((g.weight2((g.neighbors(u) & A) - {maps.n[u], maps.n2[u]}) for u in U), Fraction(0))
    for v, Yv in Y.items():
        regrouped += sum((g.weight2((g.neighbors(x) & A) - {v}) for x in Yv), Fraction(0))
    return ChainTerms(
        g.weight2(imp.X), lhs, rhs, regrouped, g.weight2(neighborhood(imp.X, A, g))
    )
