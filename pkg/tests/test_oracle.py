from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from errors import BudgetExceeded, InputError
from generators import gen_alternating_cycle, gen_berman_tight, gen_random_packing
from instance import ConflictGraph, as_graph, neighborhood
from oracle import exact_mwis, exhaustive_improvement_search
from search import SolverConfig, greedy, logimp, squareimp


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    edges = [(u, v) for u, v in combinations(range(n), 2) if rng.random() < p]
    weights = [Fraction(int(rng.integers(1, 6))) for _ in range(n)]
    return ConflictGraph.from_edges(n, edges, weights)


def brute_force_optimum(g):
    best = Fraction(0)
    for r in range(1, g.n + 1):
        for X in combinations(range(g.n), r):
            if g.is_independent(X):
                best = max(best, g.weight(X))
    return best


def test_single_vertex():
    result = exact_mwis(ConflictGraph.from_edges(1, [], [7]))
    assert result.optimum_w == 7
    assert result.optimal


def test_single_edge():
    result = exact_mwis(ConflictGraph.from_edges(2, [(0, 1)], [3, 5]))
    assert result.optimum_w == 5
    assert result.best.members == {1}


def test_berman_optimum_is_b_side():
    g, _, B = gen_berman_tight(4)
    result = exact_mwis(g)
    assert result.optimum_w == 6
    assert result.best.members == set(B)


@pytest.mark.parametrize("seed", range(10))
def test_oracle_matches_brute_force(seed):
    g = random_graph(10, 0.3, seed)
    assert exact_mwis(g).optimum_w == brute_force_optimum(g)


def test_vertex_limit():
    g = ConflictGraph.from_edges(45, [], [1] * 45)
    with pytest.raises(InputError):
        exact_mwis(g)
    assert exact_mwis(g, override=True).optimum_w == 45


def test_budget_carries_partial_result():
    g = random_graph(30, 0.2, 0)
    with pytest.raises(BudgetExceeded) as info:
        exact_mwis(g, budget=5)
    partial = info.value.best
    assert not partial.optimal
    assert g.is_independent(partial.best.members)


@pytest.mark.parametrize("seed", range(20))
def test_oracle_dominates_every_solver(seed):
    g = as_graph(gen_random_packing(12, 3, 9, seed=seed))
    opt = exact_mwis(g).optimum_w
    for solution in (greedy(g), squareimp(g).final, logimp(g, SolverConfig(mode="logimp")).final):
        assert g.weight(solution.members) <= opt


def test_optimum_admits_no_linear_improvement():
    g = random_graph(12, 0.3, 3)
    A = exact_mwis(g).best.members
    assert exhaustive_improvement_search(g, A, exponent=1, size_cap=12) is None


def test_berman_a_side_improves_by_b_side():
    g, A, B = gen_berman_tight(4)
    imp = exhaustive_improvement_search(g, A, exponent=2, size_cap=6)
    assert imp.X == set(B)
    assert imp.removed == set(A)
    assert imp.gain == 3


def test_size_cap_limits_the_search():
    g, A, _ = gen_berman_tight(4)
    imp = exhaustive_improvement_search(g, A, exponent=2, size_cap=2)
    assert imp is None or imp.size <= 2


@pytest.mark.parametrize("n_pairs", [3, 4, 5])
def test_alternating_cycle_light_side_is_optimal_for_negative_alpha(n_pairs):
    g, A, _ = gen_alternating_cycle(n_pairs, 4, "1/2")
    assert exhaustive_improvement_search(g, A, exponent=-1, size_cap=4) is None


def test_zero_exponent_is_rejected():
    g, A, _ = gen_berman_tight(4)
    with pytest.raises(InputError):
        exhaustive_improvement_search(g, A, exponent=0, size_cap=2)


def recursive_improvement_exists(g, A, cap):
    outside = [v for v in range(g.n) if v not in A]
    for r in range(1, cap + 1):
        for X in combinations(outside, r):
            if g.is_independent(X) and g.weight2(X) > g.weight2(neighborhood(X, A, g)):
                return True
    return False


@pytest.mark.parametrize("seed", range(15))
def test_squared_search_agrees_with_plain_enumeration(seed):
    g = random_graph(12, 0.35, 100 + seed)
    A = greedy(g).members
    for cap in (1, 2, 3):
        found = exhaustive_improvement_search(g, A, exponent=2, size_cap=cap)
        assert (found is not None) == recursive_improvement_exists(g, A, cap)
