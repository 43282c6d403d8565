from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from analysis import (
    AnalysisParams,
    Interval,
    bad_vertex_deletion,
    certify_local_optimum,
    check_constants,
    classify_vertices,
    compute_charges,
    compute_contributions,
    contribution,
    decide,
    find_improving_subgraph,
    shortest_cycle,
    sqrt_interval,
)
from errors import ContractError, InputError, PrecisionError
from generators import gen_berman_tight, gen_random_packing
from instance import ConflictGraph, as_graph
from oracle import exact_mwis
from search import SolverConfig, solve

PARAMS = AnalysisParams.from_delta("1/2")


def star(center_w, leaf_ws):
    n = 1 + len(leaf_ws)
    return ConflictGraph.from_edges(n, [(0, i) for i in range(1, n)], [center_w] + list(leaf_ws))


# charges and contributions
def test_charge_of_a_private_neighbour():
    g = ConflictGraph.from_edges(2, [(0, 1)], [2, 3])
    table = compute_charges(g, {0}, {1})
    assert table.per_vertex[1] == (0, 2)
    assert table.positive[0] == 2
    assert table.T[0] == {1}


def test_charge_of_a_shared_vertex():
    g = ConflictGraph.from_edges(2, [(0, 1)], [4, 1])
    table = compute_charges(g, {0}, {0})
    assert table.per_vertex[0] == (0, 2)


def test_zero_charge_between_two_anchors():
    g = star(1, [1, 1])
    table = compute_charges(g, {1, 2}, {0})
    assert table.per_vertex[0] == (1, 0)
    assert table.T[1] == frozenset()


def test_charges_need_a_maximal_solution():
    g = ConflictGraph.from_edges(3, [(0, 1)], [1, 1, 1])
    with pytest.raises(ContractError):
        compute_charges(g, {0}, {2})


def test_contribution_examples():
    g = ConflictGraph.from_edges(2, [(0, 1)], [2, 3])
    assert contribution(g, {0}, 1, 0) == Fraction(9, 2)
    g = star(1, [1, 1])
    assert contribution(g, {1, 2}, 0, 1) == 0


def test_berman_contributions_meet_the_bound_exactly():
    g, A, B = gen_berman_tight(4)
    table = compute_contributions(g, A, B)
    assert table.per_pair[(3, 0)] == 1
    assert table.per_pair[(6, 0)] == 0
    assert table.totals[0] == 1 == g.w(0)
    assert table.violations == []


# classes
def test_equal_private_neighbour_is_single():
    g = ConflictGraph.from_edges(2, [(0, 1)], [1, 1])
    assert "single" in classify_vertices(g, {0}, {1}, PARAMS)[1]


def test_two_equal_anchors_make_a_good_vertex():
    g = star(1, [1, 1])
    tags = classify_vertices(g, {1, 2}, {0}, PARAMS)[0]
    assert "good" in tags
    assert "double" not in tags


def test_heavy_neighbourhood_pays_back():
    g = star(1, [1, 1, 1])
    assert "payback" in classify_vertices(g, {1, 2, 3}, {0}, PARAMS)[0]


def test_much_heavier_vertex_is_contributive_only():
    g = ConflictGraph.from_edges(2, [(0, 1)], [1, 5])
    assert classify_vertices(g, {0}, {1}, PARAMS)[1] == {"contributive"}


# certificate
@pytest.mark.parametrize("d", [4, 5, 6])
def test_berman_certificate_is_tight(d):
    g, A, B = gen_berman_tight(d)
    report = certify_local_optimum(g, A, exact_mwis(g).best.members, PARAMS)
    assert report.passed
    for name in ("charges", "contributions", "ratio", "charge_identity", "neighbourhoods"):
        assert report.check(name).holds and report.check(name).applicable
    assert 2 * report.weight_Astar == d * report.weight_A
    assert report.check("classification").informational


def test_optimum_as_incumbent():
    g = as_graph(gen_random_packing(12, 3, 9, seed=8))
    opt = exact_mwis(g).best.members
    report = certify_local_optimum(g, opt, opt, PARAMS)
    assert report.passed
    assert all(report.charges.positive[v] == g.w(v) / 2 for v in opt)


def test_rows_are_not_applicable_away_from_a_fixed_point():
    g = ConflictGraph.from_edges(3, [(0, 1), (0, 2)], [2, Fraction(3, 2), Fraction(3, 2)])
    report = certify_local_optimum(g, {0}, {1, 2}, PARAMS)
    assert not report.check("charges").applicable
    assert report.check("charge_identity").holds


def test_certificate_on_every_fixed_point():
    for seed in range(100):
        for dist in ("uniform", "near-unit"):
            inst = gen_random_packing(12, 3, 9, dist, seed=seed)
            g = as_graph(inst)
            astar = exact_mwis(g).best.members
            for mode in ("squareimp", "logimp"):
                A = solve(inst, SolverConfig(mode=mode)).final.members
                report = certify_local_optimum(g, A, astar, PARAMS)
                for name in ("charges", "contributions", "charge_pointwise", "charge_identity", "ratio"):
                    assert report.check(name).holds, (seed, dist, mode, name)
                assert report.passed


def test_report_json_shape():
    g, A, B = gen_berman_tight(4)
    payload = certify_local_optimum(g, A, B, PARAMS).to_dict()
    assert payload["passed"]
    assert payload["charge_sum"]["0"] == "1/2"
    assert payload["T"]["0"] == [3]
    assert payload["classes"]["6"]


# interval arithmetic
def test_sqrt_interval_brackets_the_root():
    root = sqrt_interval(2, 64)
    assert root.lo**2 <= 2 <= root.hi**2
    assert root.hi - root.lo <= Fraction(1, 2**63)
    assert sqrt_interval(Fraction(9, 4), 8) == Interval.of(Fraction(3, 2))


def test_decide_raises_when_undecided():
    with pytest.raises(PrecisionError):
        decide(lambda bits: None, max_bits=256)


def test_interval_arithmetic():
    x = Interval(Fraction(1), Fraction(2))
    assert (x * -1) == Interval(Fraction(-2), Fraction(-1))
    assert (1 - x) == Interval(Fraction(-1), Fraction(0))
    assert (x**2) == Interval(Fraction(1), Fraction(4))


# parameters
def test_default_parameters():
    assert PARAMS.eps_tilde == Fraction(1, 4)
    assert PARAMS.eps_prime == Fraction(1, 10000)
    assert PARAMS.d_delta == 1_600_001
    with pytest.raises(InputError):
        AnalysisParams(Fraction(1, 2), Fraction(1, 3), Fraction(1, 10000), 1_600_001)
    with pytest.raises(InputError):
        AnalysisParams.from_delta("3/2")


@pytest.mark.parametrize("i", range(1, 20))
def test_constants_hold_on_the_grid(i):
    checks = check_constants(Fraction(i, 20))
    assert len(checks) == 14
    assert all(c.holds for c in checks), [c.name for c in checks if not c.holds]


def test_large_eps_prime_breaks_its_bound():
    checks = {c.name: c.holds for c in check_constants("0.999", eps_prime="0.2")}
    assert not checks["const1"]


# sparse subgraphs
def multi(graph):
    return nx.MultiGraph(graph)


def test_bad_vertex_deletion_examples():
    assert bad_vertex_deletion(multi(nx.path_graph(5)), range(5)) == set()
    assert bad_vertex_deletion(multi(nx.complete_graph(4)), range(4)) == {0, 1, 2, 3}
    g = multi(nx.complete_graph(4))
    g.add_edge(0, "p")
    assert bad_vertex_deletion(g, list(g.nodes)) == {0, 1, 2, 3}


@pytest.mark.parametrize("seed", range(5))
def test_bad_vertex_deletion_ignores_order(seed):
    g = multi(nx.random_regular_graph(3, 16, seed=seed))
    g.add_edges_from([(0, 100), (100, 101), (5, 102)])
    nodes = list(g.nodes)
    expected = bad_vertex_deletion(g, nodes)
    shuffled = list(np.random.default_rng(seed).permutation(nodes))
    assert bad_vertex_deletion(g, [int(v) for v in shuffled]) == expected


def test_shortest_cycle_lengths():
    loop = nx.MultiGraph([(0, 0), (0, 1)])
    assert len(shortest_cycle(loop)) == 1
    parallel = nx.MultiGraph([(0, 1), (0, 1), (1, 2)])
    assert len(shortest_cycle(parallel)) == 2
    assert len(shortest_cycle(multi(nx.cycle_graph(5)))) == 5
    assert shortest_cycle(multi(nx.path_graph(4))) is None


def assert_improving(sub):
    assert nx.is_connected(sub)
    assert min(d for _, d in sub.degree()) >= 2
    assert sub.number_of_edges() == sub.number_of_nodes() + 1


def test_two_triangles_sharing_a_vertex():
    g = nx.MultiGraph([(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)])
    sub = find_improving_subgraph(g)
    assert_improving(sub)
    assert sub.number_of_nodes() == 5


def test_single_cycle_is_too_sparse():
    assert find_improving_subgraph(multi(nx.cycle_graph(6))) is None


def test_k4_is_trimmed_by_one_edge():
    sub = find_improving_subgraph(multi(nx.complete_graph(4)))
    assert_improving(sub)
    assert sub.number_of_nodes() == 4


@pytest.mark.parametrize("seed", range(5))
def test_cubic_graphs_contain_small_improving_subgraphs(seed):
    g = multi(nx.random_regular_graph(3, 40, seed=seed))
    sub = find_improving_subgraph(g)
    assert_improving(sub)
    assert sub.number_of_nodes() <= 32 * np.log2(40)
