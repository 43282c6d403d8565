"""Exact reference solvers for small instances."""
import logging
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from errors import BudgetExceeded, InputError
from instance import ConflictGraph, Generic, Solution, make_improvement
from utils import power, strictly_greater

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_LIMIT = 40
DEFAULT_NODE_BUDGET = 10**8


@dataclass
class OracleResult:
    best: Solution
    optimum_w: Fraction
    nodes_explored: int
    optimal: bool = True


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def exact_mwis(g: ConflictGraph, budget=DEFAULT_NODE_BUDGET, limit=DEFAULT_ORACLE_LIMIT, override=False):
    """Maximum-weight independent set by branch and bound.

    Branches on the vertex of largest degree inside the candidate set (ties:
    lowest id), include-branch first, and prunes when the incumbent is at least
    the current weight plus all remaining candidate weight.
    """
    if g.n > limit and not override:
        raise InputError(f"graph has {g.n} vertices, oracle limit is {limit} (pass override=True)")
    adj = [sum(1 << u for u in g.adjacency[v]) for v in range(g.n)]
    weights = g.weights
    best_w = Fraction(-1)
    best_set = 0
    nodes = 0

    def bound(cand):
        return sum((weights[v] for v in _bits(cand)), Fraction(0))

    def search(cand, chosen, current):
        nonlocal best_w, best_set, nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"oracle exceeded {budget} nodes", nodes=nodes)
        # vertices without candidate neighbours are always taken
        free = 0
        for v in _bits(cand):
            if not adj[v] & cand:
                free |= 1 << v
        if free:
            cand &= ~free
            chosen |= free
            current += sum((weights[v] for v in _bits(free)), Fraction(0))
        if not cand:
            if current > best_w:
                best_w, best_set = current, chosen
            return
        if current + bound(cand) <= best_w:
            return
        pivot = max(_bits(cand), key=lambda v: ((adj[v] & cand).bit_count(), -v))
        search(cand & ~adj[pivot] & ~(1 << pivot), chosen | (1 << pivot), current + weights[pivot])
        search(cand & ~(1 << pivot), chosen, current)

    try:
        search((1 << g.n) - 1, 0, Fraction(0))
    except BudgetExceeded as e:
        members = list(_bits(best_set))
        partial = OracleResult(Solution.from_members(g, members), max(best_w, Fraction(0)), nodes, optimal=False)
        raise BudgetExceeded(str(e), best=partial, nodes=nodes) from None
    members = list(_bits(best_set))
    logger.debug("oracle: n=%d optimum=%s nodes=%d", g.n, best_w, nodes)
    return OracleResult(Solution.from_members(g, members), max(best_w, Fraction(0)), nodes)


def exhaustive_improvement_search(g: ConflictGraph, A, exponent=Fraction(2), size_cap=None, budget=DEFAULT_NODE_BUDGET):
    """Complete search for an independent X ⊆ V\\A, |X| <= size_cap, with w^α(X) > w^α(N(X, A)).

    Returns the improvement of largest gain (ties: smaller |X|, then the
    lexicographically smallest X), or None.
    """
    exponent = Fraction(exponent)
    if exponent == 0:
        raise InputError("alpha = 0 is not supported")
    A = frozenset(A)
    g.check_ids(A)
    if size_cap is None:
        size_cap = g.n
    if size_cap < 1:
        return None
    outside = [v for v in range(g.n) if v not in A]
    wa = {v: power(g.w(v), exponent) for v in range(g.n)}
    a_nbrs = {v: g.neighbors(v) & A for v in outside}
    zero = Fraction(0) if exponent.denominator == 1 else Decimal(0)
    best = None  # (gain, X as tuple)
    nodes = 0
    chosen = []

    def consider(removed):
        nonlocal best
        gained = sum((wa[v] for v in chosen), zero)
        lost = sum((wa[v] for v in removed), zero)
        if not strictly_greater(gained, lost):
            return
        gain = gained - lost
        key = tuple(chosen)
        if best is None or strictly_greater(gain, best[0]) or (
            not strictly_greater(best[0], gain) and (len(key), key) < (len(best[1]), best[1])
        ):
            best = (gain, key)

    def extend(start, removed):
        nonlocal nodes
        for i in range(start, len(outside)):
            v = outside[i]
            if any(g.adjacent(v, c) for c in chosen):
                continue
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"improvement search exceeded {budget} nodes", nodes=nodes)
            chosen.append(v)
            grown = removed | a_nbrs[v]
            consider(grown)
            if len(chosen) < size_cap:
                extend(i + 1, grown)
            chosen.pop()

    extend(0, frozenset())
    if best is None:
        return None
    return make_improvement(g, A, best[1], Generic(), exponent)
