"""Instance families: tight examples for the squared-weight search, lower-bound
constructions for w^α search, high-girth regular graphs and random set systems."""
import logging
import math
from collections import deque
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from itertools import combinations
from typing import Optional

import networkx as nx
import numpy as np

from errors import BudgetExceeded, InputError
from instance import ConflictGraph, PackingInstance
from utils import parse_rational

logger = logging.getLogger(__name__)

WEIGHT_DISTRIBUTIONS = ("uniform", "near-unit")
ROOT_GRID_BITS = 60


def gen_berman_tight(d):
    """Unit-weight tight example for the squared-weight claw search.

    A = {1..d-1} (vertex ids 0..d-2), B = all non-empty subsets of size <= 2
    (singletons first, then pairs in lexicographic order); a ∈ A and b ∈ B are
    adjacent iff a ∈ b. Returns (graph, A ids, B ids) with w(B)/w(A) = d/2.
    """
    if d < 3:
        raise InputError(f"d must be >= 3, got {d}")
    base = list(range(1, d))
    subsets = [(a,) for a in base] + list(combinations(base, 2))
    A = list(range(d - 1))
    B = list(range(d - 1, d - 1 + len(subsets)))
    edges = [(a - 1, B[i]) for i, s in enumerate(subsets) for a in s]
    g = ConflictGraph.from_edges(len(A) + len(B), edges, [1] * (len(A) + len(B)), d=d)
    return g, A, B


def graph_to_packing(g: ConflictGraph) -> PackingInstance:
    """Each vertex becomes the set of its incident edges; isolated vertices get a private element.

    The conflict graph of the result is ``g`` (same ids, same weights).
    """
    edges = g.edges()
    index = {e: i for i, e in enumerate(edges)}
    sets, extra = [], len(edges)
    for v in range(g.n):
        s = [index[(min(u, v), max(u, v))] for u in g.adjacency[v]]
        if not s:
            s, extra = [extra], extra + 1
        sets.append(tuple(s))
    k = max(len(s) for s in sets)
    return PackingInstance(max(extra, 1), tuple(sets), g.weights, k)


def berman_tight_packing(d):
    g, A, B = gen_berman_tight(d)
    return graph_to_packing(g), A, B


def gen_alternating_cycle(n_pairs, d, eps):
    """Cycle of 2·n_pairs vertices alternating 2/(d-1-eps) (even ids, A) and 1 (odd ids, A*)."""
    eps = parse_rational(eps)
    if n_pairs < 2:
        raise InputError("need at least two pairs")
    if not 0 < eps < d - 1:
        raise InputError(f"eps must lie in (0, d-1), got {eps}")
    n = 2 * n_pairs
    light = Fraction(2) / (d - 1 - eps)
    weights = [light if v % 2 == 0 else Fraction(1) for v in range(n)]
    edges = [(v, (v + 1) % n) for v in range(n)]
    g = ConflictGraph.from_edges(n, edges, weights, d=max(d, 3))
    return g, list(range(0, n, 2)), list(range(1, n, 2))


# High-girth regular graphs
def girth(graph) -> float:
    """Length of a shortest cycle by breadth-first search from every vertex; inf for forests."""
    if isinstance(graph, ConflictGraph):
        graph = graph.to_networkx()
    best = math.inf
    for s in graph.nodes:
        dist, parent = {s: 0}, {s: None}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y in graph.neighbors(x):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return best


def _catalog():
    return {
        (3, 3): nx.complete_graph(4),
        (3, 4): nx.complete_bipartite_graph(3, 3),
        (3, 5): nx.petersen_graph(),
        (3, 6): nx.heawood_graph(),
        (3, 7): nx.LCF_graph(24, [12, 7, -7], 8),
        (3, 8): nx.LCF_graph(30, [-13, -9, 7, -7, 9, 13], 5),
        (4, 3): nx.complete_graph(5),
        (4, 4): nx.complete_bipartite_graph(4, 4),
    }


def moore_bound(k, l):
    """Minimum vertex count of a k-regular graph with girth l."""
    if l % 2:
        r = (l - 1) // 2
        return 1 + k * sum((k - 1) ** i for i in range(r))
    r = l // 2
    return 2 * sum((k - 1) ** i for i in range(r))


def _pairing(n, k, rng):
    stubs = rng.permutation(np.repeat(np.arange(n), k))
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for a, b in zip(stubs[::2], stubs[1::2]):
        a, b = int(a), int(b)
        if a == b or g.has_edge(a, b):
            return None
        g.add_edge(a, b)
    return g


def _short_edge(g, l):
    """An edge on a cycle shorter than l, or None."""
    for u, v in sorted(g.edges()):
        g.remove_edge(u, v)
        try:
            reach = nx.single_source_shortest_path_length(g, u, cutoff=l - 2)
        finally:
            g.add_edge(u, v)
        if v in reach:
            return u, v
    return None


def _far(g, a, c, l):
    return c not in nx.single_source_shortest_path_length(g, a, cutoff=l - 2)


def _raise_girth(g, l, rng, budget):
    """Edge switches ab, cd -> ac, bd that never close a cycle shorter than l."""
    spent = 0
    while True:
        short = _short_edge(g, l)
        if short is None:
            return g, spent
        a, b = short
        edges = sorted(g.edges())
        for idx in rng.permutation(len(edges)):
            spent += 1
            if spent > budget:
                return None, spent
            c, d = edges[int(idx)]
            if len({a, b, c, d}) < 4 or g.has_edge(a, c) or g.has_edge(b, d):
                continue
            g.remove_edges_from([(a, b), (c, d)])
            if _far(g, a, c, l):
                g.add_edge(a, c)
                if _far(g, b, d, l):
                    g.add_edge(b, d)
                    break
                g.remove_edge(a, c)
            g.add_edges_from([(a, b), (c, d)])
        else:
            return None, spent


def gen_high_girth_regular(k, l, seed=0, budget=10**5) -> nx.Graph:
    """k-regular graph with girth >= l: a known cage when one fits, else a repaired pairing-model sample."""
    if k < 2 or l < 3:
        raise InputError(f"need k >= 2 and l >= 3, got k={k}, l={l}")
    if k == 2:
        return nx.cycle_graph(l)
    fits = sorted((key for key in _catalog() if key[0] == k and key[1] >= l), key=lambda key: key[1])
    if fits:
        graph = nx.convert_node_labels_to_integers(_catalog()[fits[0]])
        logger.debug("catalog graph for k=%d l=%d: %d vertices", k, l, graph.number_of_nodes())
        return graph
    rng = np.random.default_rng(seed)
    limit = 4 * (k - 1) ** (l - 1)
    # balls of radius l-2 must leave room for switch partners
    n = min(max(k + 1, l, 2 * moore_bound(k, l), 4 * k * (k - 1) ** (l - 3)), limit)
    if n * k % 2:
        n += 1
    spent = 0
    while spent < budget:
        spent += 1
        graph = _pairing(n, k, rng)
        if graph is None:
            continue
        graph, used = _raise_girth(graph, l, rng, budget - spent)
        spent += used
        if graph is not None and girth(graph) >= l and all(deg == k for _, deg in graph.degree()):
            return graph
    raise BudgetExceeded(f"no {k}-regular graph of girth >= {l} on {n} <= {limit} vertices within {budget} attempts", nodes=spent)


# Lower-bound family for w^α search
@dataclass(frozen=True)
class LowerBoundParams:
    d: int
    alpha: Fraction
    eps: Fraction
    l: int
    eps_d: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", parse_rational(self.alpha))
        object.__setattr__(self, "eps", parse_rational(self.eps))
        if self.d < 3:
            raise InputError("d must be >= 3")
        if self.alpha <= 0:
            raise InputError("alpha must be positive")
        if not 0 < self.eps < self.d - 1:
            raise InputError("eps must lie in (0, d-1)")
        if self.l < 3:
            raise InputError("girth bound l must be >= 3")


def _decimal(q):
    return Decimal(q.numerator) / Decimal(q.denominator)


def eps_schedule(params: LowerBoundParams):
    """(eps'_d, eps_d): eps'_d = 1 - (1 - eps/(d-1))^α and eps_d = 1/ceil(1/eps'_d) <= eps'_d."""
    base = 1 - params.eps / (params.d - 1)
    with localcontext() as ctx:
        ctx.prec = 80
        if params.alpha.denominator == 1:
            eps_prime = 1 - base ** params.alpha.numerator
            reciprocal = 1 / eps_prime
        else:
            eps_prime = 1 - _decimal(base) ** _decimal(params.alpha)
            reciprocal = 1 / eps_prime
        eps_d = Fraction(1, math.ceil(reciprocal))
    return eps_prime, eps_d


def _int_root(x, p):
    r = round(x ** (1 / p))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c**p == x:
            return c
    return None


def _root_floor(q, alpha):
    """Largest rational not above q^(1/α): exact when the root is rational, else on a 2^-60 grid."""
    p, target = alpha.numerator, q**alpha.denominator
    num, den = _int_root(target.numerator, p), _int_root(target.denominator, p)
    if num is not None and den is not None:
        return Fraction(num, den)
    scale = 1 << ROOT_GRID_BITS
    with localcontext() as ctx:
        ctx.prec = 80
        root = _decimal(q) ** (1 / _decimal(alpha))
    candidate = Fraction(math.floor(root * scale), scale)
    while candidate**p > target:
        candidate -= Fraction(1, scale)
    return candidate


def gen_incidence_lowerbound(params: LowerBoundParams, H: nx.Graph):
    """Vertex-edge incidence graph of a (d-1)-regular graph H of girth >= l.

    V(H) vertices have weight 1 and form A; E(H) vertices have weight
    (1 - eps_d)^(1/α) and form A*. Returns (graph, A ids, A* ids).
    """
    degrees = {deg for _, deg in H.degree()}
    if degrees != {params.d - 1}:
        raise InputError(f"H must be {params.d - 1}-regular, degrees are {sorted(degrees)}")
    if girth(H) < params.l:
        raise InputError(f"H has girth {girth(H)} < {params.l}")
    eps_prime, eps_d = eps_schedule(params)
    if params.eps_d is not None:
        eps_d = params.eps_d
    if not 0 < eps_d <= eps_prime:
        raise InputError(f"eps_d={eps_d} must lie in (0, eps'_d]")
    edge_weight = _root_floor(1 - eps_d, params.alpha)
    nodes = sorted(H.nodes)
    index = {v: i for i, v in enumerate(nodes)}
    h_edges = sorted(tuple(sorted((index[u], index[v]))) for u, v in H.edges())
    n = len(nodes) + len(h_edges)
    edges = []
    for j, (u, v) in enumerate(h_edges):
        edges += [(u, len(nodes) + j), (v, len(nodes) + j)]
    weights = [Fraction(1)] * len(nodes) + [edge_weight] * len(h_edges)
    g = ConflictGraph.from_edges(n, edges, weights, d=params.d)
    return g, list(range(len(nodes))), list(range(len(nodes), n))


# Random set systems
def gen_random_packing(n_sets, k, universe, weight_dist="uniform", seed=0, max_weight=10, eta=Fraction(1, 10)):
    """Seeded random k-set packing: set sizes uniform in 1..k, distinct elements.

    ``uniform`` draws integer weights in 1..max_weight; ``near-unit`` draws
    1 + eta·r with r a multiple of 1/1000 in [-1, 1].
    """
    if weight_dist not in WEIGHT_DISTRIBUTIONS:
        raise InputError(f"weight distribution must be one of {WEIGHT_DISTRIBUTIONS}")
    if k > universe:
        raise InputError("k cannot exceed the universe size")
    eta = parse_rational(eta)
    if weight_dist == "near-unit" and not 0 <= eta < 1:
        raise InputError("eta must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    sets, weights = [], []
    for _ in range(n_sets):
        size = int(rng.integers(1, k + 1))
        sets.append(tuple(sorted(int(e) for e in rng.choice(universe, size=size, replace=False))))
        if weight_dist == "uniform":
            weights.append(Fraction(int(rng.integers(1, max_weight + 1))))
        else:
            weights.append(1 + eta * Fraction(int(rng.integers(-1000, 1001)), 1000))
    return PackingInstance(universe, tuple(sets), tuple(weights), k)
