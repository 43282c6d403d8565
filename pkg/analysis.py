"""Executable certificates for local optima.

Charges, contributions, the vertex classes, the local-optimum certificate,
the sparse-subgraph utilities behind logarithmic improvements, and the
parameter conditions of the analysis. Square roots are bracketed by exact
rational intervals whose precision doubles until a comparison is decided.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import networkx as nx

from errors import BudgetExceeded, ContractError, InputError, PrecisionError
from instance import ConflictGraph, neighborhood, verify_claw_free
from search import find_claw_improvement
from utils import fmt_fraction, log_value, parse_rational

logger = logging.getLogger(__name__)

START_BITS = 64
MAX_BITS = 1 << 14
CLASS_NAMES = ("single", "double", "payback", "good", "contributive")


# Interval arithmetic
class _Undecided(Exception):
    pass


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    @classmethod
    def of(cls, x):
        if isinstance(x, Interval):
            return x
        x = Fraction(x)
        return cls(x, x)

    def __add__(self, other):
        other = Interval.of(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-Interval.of(other))

    def __rsub__(self, other):
        return Interval.of(other) - self

    def __mul__(self, other):
        other = Interval.of(other)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Interval.of(other)
        if other.lo <= 0 <= other.hi:
            raise _Undecided()
        return self * Interval(1 / other.hi, 1 / other.lo)

    def __rtruediv__(self, other):
        return Interval.of(other) / self

    def __pow__(self, k):
        result = Interval.of(1)
        for _ in range(k):
            result = result * self
        return result


def _perfect_root(n):
    r = math.isqrt(n)
    return r if r * r == n else None


def sqrt_interval(q, bits) -> Interval:
    """Bracket of √q with width at most 2^-bits; exact when q is a rational square."""
    q = Fraction(q)
    if q < 0:
        raise InputError(f"square root of negative value {q}")
    num, den = _perfect_root(q.numerator), _perfect_root(q.denominator)
    if num is not None and den is not None:
        return Interval.of(Fraction(num, den))
    scale = 1 << bits
    scaled = q * scale * scale
    lo = Fraction(math.isqrt(math.floor(scaled)), scale)
    hi = Fraction(math.isqrt(math.ceil(scaled)) + 1, scale)
    return Interval(lo, hi)


def lt(a, b):
    a, b = Interval.of(a), Interval.of(b)
    if a.hi < b.lo:
        return True
    if a.lo >= b.hi:
        return False
    return None


def le(a, b):
    a, b = Interval.of(a), Interval.of(b)
    if a.hi <= b.lo:
        return True
    if a.lo > b.hi:
        return False
    return None


def all_of(*values):
    if any(v is False for v in values):
        return False
    if all(v is True for v in values):
        return True
    return None


def decide(build, start_bits=START_BITS, max_bits=MAX_BITS):
    """Evaluates ``build(bits)`` with doubling precision until it returns True or False."""
    bits = start_bits
    while bits <= max_bits:
        try:
            verdict = build(bits)
        except _Undecided:
            verdict = None
        if verdict is not None:
            return verdict
        bits *= 2
    raise PrecisionError(f"comparison undecided at {max_bits} bits")


# Parameters
@dataclass(frozen=True)
class AnalysisParams:
    delta: Fraction
    eps_tilde: Fraction
    eps_prime: Fraction
    d_delta: int
    custom: bool = False

    def __post_init__(self):
        for name in ("delta", "eps_tilde", "eps_prime"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if not 0 < self.delta < 1:
            raise InputError(f"delta must lie in (0, 1), got {self.delta}")
        if self.custom:
            return
        if self.eps_tilde != self.delta / 2 or self.eps_prime != self.delta**2 / 2500:
            raise InputError("non-default eps values need custom=True")
        if self.d_delta != default_d_delta(self.delta):
            raise InputError("non-default d_delta needs custom=True")

    @classmethod
    def from_delta(cls, delta, eps_tilde=None, eps_prime=None, d_delta=None):
        delta = parse_rational(delta)
        custom = any(x is not None for x in (eps_tilde, eps_prime, d_delta))
        return cls(
            delta,
            delta / 2 if eps_tilde is None else parse_rational(eps_tilde),
            delta**2 / 2500 if eps_prime is None else parse_rational(eps_prime),
            default_d_delta(delta) if d_delta is None else int(d_delta),
            custom,
        )

    def to_dict(self):
        return {
            "delta": fmt_fraction(self.delta),
            "eps_tilde": fmt_fraction(self.eps_tilde),
            "eps_prime": fmt_fraction(self.eps_prime),
            "d_delta": self.d_delta,
            "custom": self.custom,
        }


def default_d_delta(delta):
    return math.ceil(200000 / Fraction(delta) ** 3 + 1)


# Charges and contributions
def _anchors(g, A, u, maps=None):
    """(n(u), n2(u) or None, N(u, A)); a vertex of A is its own anchor."""
    if u in A:
        return u, None, frozenset({u})
    nbrs = g.neighbors(u) & A
    if not nbrs:
        raise ContractError(f"A is not maximal: vertex {u} has no neighbour in A")
    if maps is not None:
        return maps.n[u], maps.n2.get(u), frozenset(nbrs)
    ranked = sorted(nbrs, key=lambda v: (-g.w(v), v))
    return ranked[0], (ranked[1] if len(ranked) > 1 else None), frozenset(nbrs)


def _check_pair(g, A, Astar):
    g.check_ids(A)
    g.check_ids(Astar)
    if not g.is_independent(Astar):
        raise ContractError("A* is not independent")


@dataclass
class ChargeTable:
    per_vertex: dict  # u -> (n(u), charge)
    positive: dict  # v -> sum of positive charges
    T: dict  # v -> frozenset of u with positive charge to v


def compute_charges(g: ConflictGraph, A, Astar, maps=None) -> ChargeTable:
    """charge(u, n(u)) = w(u) - w(N(u, A))/2 for every u in A*."""
    A, Astar = frozenset(A), frozenset(Astar)
    _check_pair(g, A, Astar)
    per_vertex = {}
    positive = {v: Fraction(0) for v in A}
    T = {v: set() for v in A}
    for u in sorted(Astar):
        v, _, nbrs = _anchors(g, A, u, maps)
        charge = g.w(u) - g.weight(nbrs) / 2
        per_vertex[u] = (v, charge)
        if charge > 0:
            positive[v] += charge
            T[v].add(u)
    return ChargeTable(per_vertex, positive, {v: frozenset(s) for v, s in T.items()})


def contribution(g, A, u, v):
    """contr(u, v) = max{0, (w²(u) - w²(N(u, A) \\ {v})) / w(v)} for v ∈ N(u, A)."""
    nbrs = neighborhood({u}, A, g)
    if v not in nbrs:
        return Fraction(0)
    return max(Fraction(0), (g.w2(u) - g.weight2(nbrs - {v})) / g.w(v))


@dataclass
class ContributionTable:
    per_pair: dict  # (u, v) -> contr
    totals: dict  # v -> sum over u
    violations: list = field(default_factory=list)


def compute_contributions(g: ConflictGraph, A, Astar) -> ContributionTable:
    A, Astar = frozenset(A), frozenset(Astar)
    _check_pair(g, A, Astar)
    per_pair = {}
    totals = {v: Fraction(0) for v in A}
    for u in sorted(Astar):
        for v in sorted(neighborhood({u}, A, g)):
            c = contribution(g, A, u, v)
            per_pair[(u, v)] = c
            totals[v] += c
    violations = [v for v in sorted(A) if totals[v] > g.w(v)]
    if violations:
        logger.info("contribution sums exceed w(v) at %s", violations)
    return ContributionTable(per_pair, totals, violations)


# Classes
def classify_vertices(g: ConflictGraph, A, Astar, params: AnalysisParams, maps=None) -> dict:
    """Class tags of every u in A*: single, double, payback, good, contributive, or unclassified."""
    A, Astar = frozenset(A), frozenset(Astar)
    _check_pair(g, A, Astar)
    eps = params.eps_prime
    tags = {}
    for u in sorted(Astar):
        v1, v2, nbrs = _anchors(g, A, u, maps)
        wu, wv1, wn = g.w(u), g.w(v1), g.weight(nbrs)
        charge = wu - wn / 2
        in_T = charge > 0
        r = wu / wv1
        found = set()

        if in_T and decide(lambda bits: _single(r, wn, wv1, sqrt_interval(eps, bits))):
            found.add("single")
        if in_T and v2 is not None:
            r2 = g.w(v2) / wv1
            if decide(lambda bits: _double(r, r2, wn, wu, wv1, sqrt_interval(eps, bits))):
                found.add("double")
        if wn >= (2 + eps) * wu:
            found.add("payback")
        if v2 is not None:
            wv2 = g.w(v2)
            if decide(lambda bits: _good(r, wn, wu, wv1, wv2, sqrt_interval(2 * eps, bits))):
                found.add("good")
        if contribution(g, A, u, v1) >= eps / 2 * wu + 2 * max(Fraction(0), charge):
            found.add("contributive")
        tags[u] = frozenset(found) if found else frozenset({"unclassified"})
    return tags


def _single(r, wn, wv1, beta):
    return all_of(le(1 - beta, r), le(r, 1 + beta), le(wn, (1 + beta) * wv1))


def _double(r, r2, wn, wu, wv1, beta):
    return all_of(
        le(1 - beta, r), le(r, 1 + beta), le(1 - beta, r2), r2 <= 1, le((2 - beta) * wv1, wn), wn < 2 * wu
    )


def _good(r, wn, wu, wv1, wv2, beta):
    return all_of(
        2 * wu <= wn, le(wn, (2 + beta) * wu), le((1 - beta) * wv1, wv2), le(1 - beta, r), le(r * (1 - beta), 1)
    )


# Local-optimum certificate
@dataclass(frozen=True)
class BoundCheck:
    name: str
    holds: bool
    applicable: bool = True
    informational: bool = False
    detail: str = ""

    def to_dict(self):
        return {
            "name": self.name,
            "holds": self.holds,
            "applicable": self.applicable,
            "informational": self.informational,
            "detail": self.detail,
        }


@dataclass
class CertReport:
    d: int
    weight_A: Fraction
    weight_Astar: Fraction
    charges: ChargeTable
    contributions: ContributionTable
    classes: dict
    checks: list

    @property
    def passed(self):
        return all(c.holds for c in self.checks if c.applicable and not c.informational)

    def check(self, name):
        return next(c for c in self.checks if c.name == name)

    def to_dict(self):
        return {
            "passed": self.passed,
            "d": self.d,
            "weight_A": fmt_fraction(self.weight_A),
            "weight_Astar": fmt_fraction(self.weight_Astar),
            "checks": [c.to_dict() for c in self.checks],
            "charge_sum": {str(v): fmt_fraction(s) for v, s in sorted(self.charges.positive.items())},
            "contr_sum": {str(v): fmt_fraction(s) for v, s in sorted(self.contributions.totals.items())},
            "T": {str(v): sorted(s) for v, s in sorted(self.charges.T.items())},
            "classes": {str(u): sorted(t) for u, t in sorted(self.classes.items())},
        }


def certify_local_optimum(g: ConflictGraph, A, Astar, params: AnalysisParams, d=None, maps=None) -> CertReport:
    """Evaluates every bound of the local-optimum analysis for the pair (A, A*).

    Rows whose hypothesis fails (A not a claw fixed point, or the graph not
    d-claw free) are marked not applicable instead of failed.
    """
    A, Astar = frozenset(A), frozenset(Astar)
    _check_pair(g, A, Astar)
    if not g.is_independent(A):
        raise ContractError("A is not independent")
    d = g.claw_bound() if d is None else d
    charges = compute_charges(g, A, Astar, maps)
    contributions = compute_contributions(g, A, Astar)
    classes = classify_vertices(g, A, Astar, params, maps)
    fixed_point = find_claw_improvement(g, A, d) is None
    try:
        claw_free, _ = verify_claw_free(g, d)
    except BudgetExceeded:
        claw_free = True  # trust the claimed bound
    wA, wStar = g.weight(A), g.weight(Astar)
    checks = []

    over = [v for v in sorted(A) if charges.positive[v] > g.w(v) / 2]
    checks.append(BoundCheck("charges", not over, fixed_point, detail=f"over w(v)/2 at {over}" if over else ""))
    over = contributions.violations
    checks.append(BoundCheck("contributions", not over, fixed_point, detail=f"over w(v) at {over}" if over else ""))
    checks.append(
        BoundCheck("ratio", wStar * 2 <= d * wA, fixed_point, detail=f"w(A*)={wStar}, (d/2)w(A)={Fraction(d, 2) * wA}")
    )
    unclassified = [u for u, t in classes.items() if "unclassified" in t]
    checks.append(
        BoundCheck(
            "classification",
            not unclassified,
            fixed_point,
            informational=d < params.d_delta,
            detail=f"unclassified {unclassified}" if unclassified else "",
        )
    )
    half_nbhd = sum((g.weight(_anchors(g, A, u, maps)[2]) / 2 for u in Astar), Fraction(0))
    identity = half_nbhd + sum((c for _, c in charges.per_vertex.values()), Fraction(0))
    checks.append(BoundCheck("charge_identity", identity == wStar))
    checks.append(BoundCheck("neighbourhoods", half_nbhd <= Fraction(d - 1, 2) * wA, claw_free))
    bad_pointwise = []
    bad_contr = []
    for u, (v, c) in charges.per_vertex.items():
        nbrs = _anchors(g, A, u, maps)[2]
        if c > 0 and g.w2(u) - g.weight2(nbrs - {v}) < 2 * c * g.w(v):
            bad_pointwise.append(u)
        if contribution(g, A, u, v) < 2 * c:
            bad_contr.append(u)
    checks.append(BoundCheck("charge_pointwise", not bad_pointwise, detail=str(bad_pointwise) if bad_pointwise else ""))
    checks.append(BoundCheck("contribution_vs_charge", not bad_contr, detail=str(bad_contr) if bad_contr else ""))
    report = CertReport(d, wA, wStar, charges, contributions, classes, checks)
    logger.info("certificate: %s", "pass" if report.passed else "FAIL")
    return report


# Sparse subgraphs
def bad_vertex_deletion(graph: nx.MultiGraph, X, Y=()):
    """Repeatedly drops vertices of X with degree <= 2 among the survivors; returns the survivors."""
    remaining = set(X) - set(Y)
    while True:
        induced = graph.subgraph(remaining)
        bad = {x for x in remaining if induced.degree(x) <= 2}
        if not bad:
            return remaining
        remaining -= bad


def _two_core(graph):
    core = nx.MultiGraph(graph)
    while True:
        low = [v for v in core if core.degree(v) <= 1]
        if not low:
            return core
        core.remove_nodes_from(low)


def shortest_cycle(graph: nx.MultiGraph):
    """Edge list (u, v, key) of a shortest cycle; loops have length 1, parallel edges length 2."""
    for u, v, key in graph.edges(keys=True):
        if u == v:
            return [(u, v, key)]
    for u, v in graph.edges():
        keys = list(graph[u][v])
        if len(keys) > 1:
            return [(u, v, keys[0]), (v, u, keys[1])]
    best = None
    for s in sorted(graph.nodes, key=str):
        dist, parent = {s: 0}, {s: None}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            if best is not None and 2 * dist[x] + 1 >= len(best):
                break
            for y in graph.neighbors(x):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y and dist[y] >= dist[x]:
                    cycle = _close(graph, parent, x, y)
                    if cycle is not None and (best is None or len(cycle) < len(best)):
                        best = cycle
    return best


def _root_path(parent, x):
    path = [x]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path


def _close(graph, parent, x, y):
    px, py = _root_path(parent, x), _root_path(parent, y)
    common = set(px) & set(py)
    px = px[: next(i for i, z in enumerate(px) if z in common) + 1]
    py = py[: next(i for i, z in enumerate(py) if z in common) + 1]
    if px[-1] != py[-1]:
        return None
    walk = px + py[-2::-1]
    edges = [(a, b, next(iter(graph[a][b]))) for a, b in zip(walk, walk[1:])]
    return edges + [(y, x, next(iter(graph[y][x])))]


def find_improving_subgraph(graph: nx.MultiGraph, budget=10**6) -> Optional[nx.MultiGraph]:
    """Connected subgraph with minimum degree >= 2 and exactly one more edge than vertices.

    A shortest cycle of a component of the 2-core is grown by breadth-first
    search; the first edge outside the cycle and the search tree closes a
    second cycle, and the two tree paths back to the cycle are kept.
    """
    core = _two_core(graph)
    best = None
    work = 0
    for component in sorted(nx.connected_components(core), key=lambda c: sorted(map(str, c))):
        sub = core.subgraph(component)
        if sub.number_of_edges() <= sub.number_of_nodes():
            continue
        work += sub.number_of_nodes() ** 2
        if work > budget:
            raise BudgetExceeded(f"improving subgraph search exceeded {budget}", best=best, nodes=work)
        found = _binocular(sub, shortest_cycle(sub))
        if best is None or found.number_of_nodes() < best.number_of_nodes():
            best = found
    if best is not None and graph.number_of_nodes() > 1:
        if min(d for _, d in graph.degree()) >= 3 and best.number_of_nodes() > 32 * log_value(graph.number_of_nodes()):
            raise ContractError(f"improving subgraph of size {best.number_of_nodes()} exceeds 32 log2 |V|")
    return best


def _binocular(sub, cycle):
    cycle_edges = {(min(u, v, key=str), max(u, v, key=str), k) for u, v, k in cycle}
    cycle_nodes = {u for u, _, _ in cycle} | {v for _, v, _ in cycle}
    parent = {v: None for v in cycle_nodes}
    via = {}
    tree = set()
    queue = deque(sorted(cycle_nodes, key=str))
    while queue:
        x = queue.popleft()
        for _, y, k in sub.edges(x, keys=True):
            e = (min(x, y, key=str), max(x, y, key=str), k)
            if e in cycle_edges or e in tree:
                continue
            if y in parent:
                return _assemble_binocular(cycle, parent, via, x, y, k)
            parent[y] = x
            via[y] = k
            tree.add(e)
            queue.append(y)
    raise ContractError("component with more edges than vertices has no second cycle")


def _assemble_binocular(cycle, parent, via, x, y, key):
    result = nx.MultiGraph()
    result.add_edges_from(cycle)
    for end in (x, y):
        path = _root_path(parent, end)
        for a, b in zip(path, path[1:]):
            result.add_edge(a, b, key=via[a])
    result.add_edge(x, y, key=key)
    return result


# Parameter conditions
@dataclass(frozen=True)
class ConstantCheck:
    name: str
    holds: bool
    statement: str

    def to_dict(self):
        return {"name": self.name, "holds": self.holds, "statement": self.statement}


def _conditions(p: AnalysisParams):
    delta, et, ep = p.delta, p.eps_tilde, p.eps_prime
    # the conditions quantified over d >= d_delta only get easier as d grows
    d = Fraction(p.d_delta)
    half = Fraction(1, 2)

    def roots(bits):
        return sqrt_interval(ep, bits), sqrt_interval(2 * ep, bits)

    def c2(bits):
        s, s2 = roots(bits)
        return le(ep / 10, half * (1 - ep - Fraction(15, 4) * s2) * (1 - s2))

    def c3(bits):
        s, _ = roots(bits)
        return le(ep / 10, (1 - s) / 2)

    def c4(bits):
        _, s2 = roots(bits)
        return le(s2, 2 + ep - 1 / (1 - s2))

    def c5(bits):
        s, s2 = roots(bits)
        lhs = 4 * s + (4 * s2 + 8 * ep) / (1 - s2) ** 2 + 18 * ep / (1 - s2) ** 4
        return lt(lhs, et / 2)

    def c7(bits):
        _, s2 = roots(bits)
        return lt(half, 1 - s2)

    def c9(bits):
        _, s2 = roots(bits)
        return lt(4 / (1 - s2) ** 2 / (d - 5), half)

    def c10(bits):
        _, s2 = roots(bits)
        return le(ep, (1 - s2) ** 2)

    def c13(bits):
        s, _ = roots(bits)
        return le(8 * s, et)

    exact = lambda value: (lambda bits: value)  # noqa: E731
    return [
        ("const0", "0 < eps~ < min(2 delta, 1/2)", exact(0 < et < min(2 * delta, half))),
        ("const1", "0 < eps' <= 1/20", exact(0 < ep <= Fraction(1, 20))),
        ("const2", "(1 - eps' - 15/4 sqrt(2eps'))(1 - sqrt(2eps'))/2 >= eps'/10", c2),
        ("const3", "(1 - sqrt(eps'))/2 >= eps'/10", c3),
        ("const4", "2 + eps' - 1/(1 - sqrt(2eps')) >= sqrt(2eps')", c4),
        ("const5", "4 sqrt(eps') + (4 sqrt(2eps') + 8eps')/(1 - sqrt(2eps'))^2 + 18eps'/(1 - sqrt(2eps'))^4 < eps~/2", c5),
        ("const6", "20/((d-1) eps') + eps~/2 <= delta/2 for d >= d_delta", exact(20 / ((d - 1) * ep) + et / 2 <= delta / 2)),
        ("const7", "1/2 < 1 - sqrt(2eps')", c7),
        ("const8", "1 < (d-1) eps~/4 for d >= d_delta", exact(1 < (d - 1) / 4 * et)),
        ("const9", "4 (1 - sqrt(2eps'))^-2 / (d-5) < 1/2 for d >= d_delta", c9),
        ("const10", "eps' <= (1 - sqrt(2eps'))^2", c10),
        ("const11", "(d-1)/(d-5) < 2 for d >= d_delta", exact(d > 5 and (d - 1) / (d - 5) < 2)),
        ("const12", "9 < d for d >= d_delta", exact(9 < d)),
        ("const13", "8 sqrt(eps') <= eps~", c13),
    ]


def check_constants(delta, eps_tilde=None, eps_prime=None, d_delta=None):
    """Truth value of each parameter condition; ``delta`` may also be an AnalysisParams."""
    params = delta if isinstance(delta, AnalysisParams) else AnalysisParams.from_delta(delta, eps_tilde, eps_prime, d_delta)
    results = []
    for name, statement, build in _conditions(params):
        if params.eps_prime <= 0 and name not in ("const0", "const1", "const8", "const11", "const12"):
            results.append(ConstantCheck(name, False, statement))
            continue
        try:
            holds = bool(decide(build))
        except ZeroDivisionError:
            holds = False
        results.append(ConstantCheck(name, holds, statement))
    return results
