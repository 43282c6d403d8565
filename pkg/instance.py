"""Instances, conflict graphs, solutions and improvements.

Vertex ids are dense integers ``0..n-1``; for graphs built from a set system,
vertex ``i`` is set ``i`` of the instance. Weights are exact ``Fraction``s.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Union

import networkx as nx

from errors import BudgetExceeded, ContractError, InputError
from utils import power_sum, strictly_greater

logger = logging.getLogger(__name__)

DEFAULT_CLAW_BUDGET = 10**7


@dataclass(frozen=True)
class PackingInstance:
    """Weighted k-set packing instance over the universe ``0..universe_size-1``."""

    universe_size: int
    sets: tuple
    weights: tuple
    k: int

    def __post_init__(self):
        for i, s in enumerate(self.sets):
            if len(set(s)) != len(s):
                raise InputError(f"set {i} lists an element more than once")
        sets = tuple(tuple(sorted(s)) for s in self.sets)
        weights = tuple(Fraction(w) for w in self.weights)
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "weights", weights)
        if self.k < 1:
            raise InputError(f"k must be >= 1, got {self.k}")
        if self.universe_size < 1:
            raise InputError("universe must be non-empty")
        if len(sets) != len(weights):
            raise InputError(f"{len(sets)} sets but {len(weights)} weights")
        for i, (s, w) in enumerate(zip(sets, weights)):
            if not 1 <= len(s) <= self.k:
                raise InputError(f"set {i} has size {len(s)}, allowed 1..{self.k}")
            if s[0] < 0 or s[-1] >= self.universe_size:
                raise InputError(f"set {i} has an element outside 0..{self.universe_size - 1}")
            if w <= 0:
                raise InputError(f"set {i} has non-positive weight {w}")

    @property
    def n(self):
        return len(self.sets)


class ConflictGraph:
    """Simple undirected vertex-weighted graph.

    ``d`` is an optional claimed claw bound (no vertex has d independent
    neighbours). ``sets`` keeps the element sets when the graph came from a
    set system; color coding needs them.
    """

    def __init__(self, adjacency, weights, d=None, sets=None):
        self.weights = tuple(Fraction(w) for w in weights)
        self.adjacency = tuple(tuple(sorted(set(nbrs))) for nbrs in adjacency)
        self._adj = tuple(frozenset(nbrs) for nbrs in self.adjacency)
        self.d = d
        self.sets = None if sets is None else tuple(frozenset(s) for s in sets)
        self._validate()

    @classmethod
    def from_edges(cls, n, edges, weights, d=None, sets=None):
        adjacency = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) references a vertex outside 0..{n - 1}")
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            adjacency[u].add(v)
            adjacency[v].add(u)
        return cls(adjacency, weights, d=d, sets=sets)

    def _validate(self):
        n = len(self.weights)
        if len(self.adjacency) != n:
            raise InputError(f"{len(self.adjacency)} adjacency rows for {n} weights")
        for v, w in enumerate(self.weights):
            if w <= 0:
                raise InputError(f"vertex {v} has non-positive weight {w}")
        for v, nbrs in enumerate(self._adj):
            if v in nbrs:
                raise InputError(f"self-loop at vertex {v}")
            for u in nbrs:
                if not 0 <= u < n:
                    raise InputError(f"vertex {v} lists unknown neighbour {u}")
                if v not in self._adj[u]:
                    raise InputError(f"adjacency not symmetric between {u} and {v}")
        if self.sets is not None and len(self.sets) != n:
            raise InputError("element sets do not match the vertex count")
        if self.d is not None and self.d < 1:
            raise InputError(f"claw bound must be >= 1, got {self.d}")

    @property
    def n(self):
        return len(self.weights)

    def neighbors(self, v):
        return self._adj[v]

    def adjacent(self, u, v):
        return v in self._adj[u]

    def degree(self, v):
        return len(self._adj[v])

    def max_degree(self):
        return max((len(a) for a in self._adj), default=0)

    def edges(self):
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def w(self, v):
        return self.weights[v]

    def w2(self, v):
        return self.weights[v] * self.weights[v]

    def weight(self, vertices):
        return sum((self.weights[v] for v in vertices), Fraction(0))

    def weight2(self, vertices):
        return sum((self.weights[v] * self.weights[v] for v in vertices), Fraction(0))

    def claw_bound(self):
        """The claimed bound d, or Δ+1 which no graph can exceed."""
        if self.d is not None:
            return self.d
        return self.max_degree() + 1

    def is_independent(self, vertices):
        vs = set(vertices)
        return all(not (self._adj[v] & vs) for v in vs)

    def check_ids(self, vertices):
        for v in vertices:
            if not (isinstance(v, int) and 0 <= v < self.n):
                raise InputError(f"vertex id {v!r} outside 0..{self.n - 1}")

    def with_weights(self, weights):
        return ConflictGraph(self.adjacency, weights, d=self.d, sets=self.sets)

    def induced(self, keep):
        """Induced subgraph on ``keep`` (sorted); returns (graph, old ids by new id)."""
        keep = sorted(keep)
        index = {v: i for i, v in enumerate(keep)}
        adjacency = [[index[u] for u in self.adjacency[v] if u in index] for v in keep]
        sets = None if self.sets is None else [self.sets[v] for v in keep]
        sub = ConflictGraph(adjacency, [self.weights[v] for v in keep], d=self.d, sets=sets)
        return sub, keep

    def to_networkx(self):
        g = nx.Graph()
        for v, w in enumerate(self.weights):
            g.add_node(v, weight=w)
        g.add_edges_from(self.edges())
        return g

    def __repr__(self):
        return f"ConflictGraph(n={self.n}, m={len(self.edges())}, d={self.d})"


def build_conflict_graph(inst: PackingInstance) -> ConflictGraph:
    """Sets become vertices; two sets are adjacent when they share an element."""
    by_element = {}
    for i, s in enumerate(inst.sets):
        for e in s:
            by_element.setdefault(e, []).append(i)
    adjacency = [set() for _ in range(inst.n)]
    for members in by_element.values():
        for a, b in combinations(members, 2):
            adjacency[a].add(b)
            adjacency[b].add(a)
    return ConflictGraph(adjacency, inst.weights, d=inst.k + 1, sets=inst.sets)


def as_graph(obj) -> ConflictGraph:
    if isinstance(obj, PackingInstance):
        return build_conflict_graph(obj)
    if isinstance(obj, ConflictGraph):
        return obj
    raise InputError(f"expected an instance or a graph, got {type(obj).__name__}")


def neighborhood(U, W, g: ConflictGraph) -> frozenset:
    """Closed neighbourhood N(U, W): vertices of W that are in U or adjacent to U."""
    U = set(U)
    W = set(W)
    g.check_ids(U)
    g.check_ids(W)
    return frozenset(w for w in W if w in U or g.neighbors(w) & U)


# Solutions
class Solution:
    """Independent set with cached w and w² totals."""

    def __init__(self, members=(), total_w=Fraction(0), total_w2=Fraction(0)):
        self.members = set(members)
        self.total_w = Fraction(total_w)
        self.total_w2 = Fraction(total_w2)

    @classmethod
    def from_members(cls, g: ConflictGraph, members):
        members = set(members)
        g.check_ids(members)
        if not g.is_independent(members):
            raise InputError("start solution is not independent")
        return cls(members, g.weight(members), g.weight2(members))

    def add(self, g, v):
        self.members.add(v)
        self.total_w += g.w(v)
        self.total_w2 += g.w2(v)

    def remove(self, g, v):
        self.members.discard(v)
        self.total_w -= g.w(v)
        self.total_w2 -= g.w2(v)

    def apply(self, g, improvement):
        """A := (A \\ N(X, A)) ∪ X."""
        for v in improvement.removed:
            self.remove(g, v)
        for v in improvement.X:
            self.add(g, v)

    def sorted_members(self):
        return sorted(self.members)

    def __contains__(self, v):
        return v in self.members

    def __len__(self):
        return len(self.members)

    def __eq__(self, other):
        return isinstance(other, Solution) and self.members == other.members

    def __repr__(self):
        return f"Solution(members={self.sorted_members()}, w={self.total_w})"


def verify_solution(g: ConflictGraph, s: Solution) -> bool:
    g.check_ids(s.members)
    return (
        g.is_independent(s.members)
        and s.total_w == g.weight(s.members)
        and s.total_w2 == g.weight2(s.members)
    )


def is_maximal(g: ConflictGraph, members) -> bool:
    members = set(members)
    return all(v in members or g.neighbors(v) & members for v in range(g.n))


# Improvements
@dataclass(frozen=True)
class ClawShaped:
    """Talons adjacent to one centre in A; ``center`` is None for a free vertex."""

    center: Optional[int]
    name = "claw"


@dataclass(frozen=True)
class Circular:
    """Cycle of anchor edges {n(u), n2(u)} over A plus the attached Y-sets."""

    U: tuple
    cycle: tuple
    Y: tuple  # ((anchor, frozenset), ...) in cycle order
    name = "circular"


@dataclass(frozen=True)
class Generic:
    name = "generic"


ImprovementKind = Union[ClawShaped, Circular, Generic]


@dataclass(frozen=True)
class Improvement:
    X: frozenset
    removed: frozenset
    kind: ImprovementKind
    gain: object  # Fraction, or Decimal for non-integer exponents
    exponent: Fraction = field(default=Fraction(2))

    @property
    def size(self):
        return len(self.X)


def make_improvement(g: ConflictGraph, A, X, kind, exponent=Fraction(2)) -> Improvement:
    """Builds and checks an improvement; ``removed`` is N(X, A)."""
    X = frozenset(X)
    A = frozenset(A)
    if not X:
        raise ContractError("an improvement needs a non-empty X")
    if X & A:
        raise ContractError(f"X intersects A in {sorted(X & A)}")
    if not g.is_independent(X):
        raise ContractError("X is not independent")
    removed = neighborhood(X, A, g)
    gained = power_sum((g.w(v) for v in X), exponent)
    lost = power_sum((g.w(v) for v in removed), exponent)
    if not strictly_greater(gained, lost):
        raise ContractError(f"X does not improve: {gained} vs {lost}")
    return Improvement(X, removed, kind, gained - lost, Fraction(exponent))


# Claw-freeness
@dataclass(frozen=True)
class ClawWitness:
    center: int
    talons: tuple


def verify_claw_free(g: ConflictGraph, d: int, budget: int = DEFAULT_CLAW_BUDGET):
    """Checks that no vertex has d pairwise non-adjacent neighbours.

    Returns ``(True, None)`` or ``(False, ClawWitness)``. Raises BudgetExceeded
    when Δ^d exceeds the budget.
    """
    if d < 1:
        raise InputError(f"d must be >= 1, got {d}")
    delta = g.max_degree()
    if delta**d > budget:
        raise BudgetExceeded(f"claw check needs up to {delta}^{d} subsets, budget {budget}")
    for c in range(g.n):
        nbrs = g.adjacency[c]
        if len(nbrs) < d:
            continue
        talons = _independent_subset(g, nbrs, d)
        if talons is not None:
            logger.debug("claw of size %d at %d: %s", d, c, talons)
            return False, ClawWitness(c, talons)
    return True, None


def _independent_subset(g, candidates, size):
    chosen = []

    def extend(start):
        if len(chosen) == size:
            return True
        for i in range(start, len(candidates)):
            v = candidates[i]
            if len(chosen) + len(candidates) - i < size:
                return False
            if any(g.adjacent(v, c) for c in chosen):
                continue
            chosen.append(v)
            if extend(i + 1):
                return True
            chosen.pop()
        return False

    return tuple(chosen) if extend(0) else None
