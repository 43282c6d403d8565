from fractions import Fraction

import pytest

from circular import ColorCodingParams
from data import parse_instance
from errors import InputError, SearchIncomplete
from generators import berman_tight_packing, gen_alternating_cycle, gen_berman_tight, gen_random_packing
from instance import ConflictGraph, as_graph, is_maximal, verify_solution
from oracle import exact_mwis
from search import (
    SolverConfig,
    find_claw_improvement,
    greedy,
    logimp,
    parametrized_local_search,
    scale_truncate_run,
    scaled_weights,
    solve,
    squareimp,
)


def path(weights):
    n = len(weights)
    return ConflictGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)], weights)


def sweep():
    for seed in range(100):
        for dist in ("uniform", "near-unit"):
            yield gen_random_packing(12, 3, 9, dist, seed=seed)


# greedy
def test_greedy_takes_the_heavy_middle():
    s = greedy(path([1, 3, 1]))
    assert s.members == {1}
    assert s.total_w == 3


def test_greedy_on_edgeless_graph():
    g = ConflictGraph.from_edges(4, [], [1, 2, 3, 4])
    assert greedy(g).members == {0, 1, 2, 3}


def test_greedy_on_berman_is_maximal():
    g, _, _ = gen_berman_tight(4)
    s = greedy(g)
    assert is_maximal(g, s.members)
    assert s.total_w >= 3


@pytest.mark.parametrize("factor", [Fraction(1, 3), 2, Fraction(17, 5)])
def test_greedy_is_scale_invariant(factor):
    g = as_graph(gen_random_packing(14, 3, 10, "near-unit", seed=5))
    scaled = g.with_weights([w * factor for w in g.weights])
    assert greedy(scaled).members == greedy(g).members


# claw search
def test_free_vertex_is_a_zero_claw():
    g = path([1, 1, 1, 1])
    imp = find_claw_improvement(g, {0})
    assert imp.X == {2}
    assert imp.removed == frozenset()
    assert imp.kind.center is None


@pytest.mark.parametrize("d", [4, 5, 6])
def test_berman_a_side_is_a_claw_fixed_point(d):
    g, A, _ = gen_berman_tight(d)
    assert find_claw_improvement(g, A) is None


def test_two_talons_beat_their_centre():
    g = ConflictGraph.from_edges(3, [(0, 1), (0, 2)], [2, Fraction(3, 2), Fraction(3, 2)])
    imp = find_claw_improvement(g, {0})
    assert imp.X == {1, 2}
    assert imp.kind.center == 0
    assert imp.gain == Fraction(1, 2)


# squareimp
def test_squareimp_on_edgeless_graph():
    g = ConflictGraph.from_edges(3, [], [1, 2, 3])
    assert squareimp(g).final.members == {0, 1, 2}


@pytest.mark.parametrize("d", [4, 5, 6])
def test_squareimp_is_tight_on_berman(d):
    g, A, B = gen_berman_tight(d)
    trace = squareimp(g, SolverConfig(start=A))
    assert trace.iterations == 0
    oracle = exact_mwis(g)
    assert oracle.best.members == set(B)
    assert oracle.optimum_w / trace.final.total_w == Fraction(d, 2)


@pytest.mark.parametrize("mode", ["squareimp", "logimp"])
def test_fixed_points_respect_half_d_bound(mode):
    for inst in sweep():
        g = as_graph(inst)
        trace = solve(inst, SolverConfig(mode=mode))
        A = trace.final
        assert verify_solution(g, A)
        assert is_maximal(g, A.members)
        assert find_claw_improvement(g, A.members) is None
        assert all(r.delta_w2 > 0 for r in trace.improvements)
        assert trace.iterations == len(trace.improvements)
        assert 2 * exact_mwis(g).optimum_w <= 4 * A.total_w


# logimp
def test_logimp_equals_squareimp_on_a_path():
    g = path([1, 3, 2, 2, 5, 1, 4])
    assert logimp(g).final == squareimp(g).final


@pytest.mark.parametrize("d", [4, 5, 6])
def test_logimp_beats_the_tight_example(d):
    g, A, _ = gen_berman_tight(d)
    trace = logimp(g, SolverConfig(mode="logimp", start=A))
    assert trace.improvements[0].kind == "circular"
    opt = exact_mwis(g).optimum_w
    assert opt / trace.final.total_w < Fraction(d, 2)
    if d == 4:
        assert trace.final.total_w == 6


def test_logimp_on_berman_packing_uses_color_coding():
    inst, A, _ = berman_tight_packing(4)
    trace = solve(inst, SolverConfig(mode="logimp", start=A, rng_seed=3))
    assert trace.final.total_w == 6
    assert "circular" in [r.kind for r in trace.improvements]


def test_logimp_notes_a_small_y_cap(caplog):
    g, A, _ = gen_berman_tight(6)
    with caplog.at_level("WARNING", logger="search"):
        trace = logimp(g, SolverConfig(mode="logimp", start=A, circular=ColorCodingParams(y_cap=1)))
    assert any("y_cap" in note for note in trace.notes)
    assert any("y_cap" in r.getMessage() and r.levelname == "WARNING" for r in caplog.records)


def test_dp_state_cap_marks_the_run_incomplete():
    inst, A, _ = berman_tight_packing(4)
    cfg = SolverConfig(mode="logimp", start=A, circular=ColorCodingParams(max_states=1))
    with pytest.raises(SearchIncomplete) as info:
        logimp(as_graph(inst), cfg)
    assert info.value.best.status == "incomplete"
    assert info.value.best.iterations == 0


# parametrized search
def test_param_linear_weights_on_an_edge():
    g = ConflictGraph.from_edges(2, [(0, 1)], [3, 5])
    trace = parametrized_local_search(g, SolverConfig(mode="param", alpha=1))
    assert trace.final.members == {1}


def test_param_squared_weights_meets_the_guarantee():
    g = as_graph(gen_random_packing(10, 3, 9, seed=2))
    trace = parametrized_local_search(g, SolverConfig(mode="param", alpha=2, size_cap_factor=3))
    assert 2 * exact_mwis(g).optimum_w <= 4 * trace.final.total_w


def test_param_accepts_set_systems():
    inst = gen_random_packing(10, 3, 9, seed=4)
    trace = solve(inst, SolverConfig(mode="param", alpha="3/2"))
    assert verify_solution(as_graph(inst), trace.final)


def test_param_keeps_the_light_side_for_negative_alpha():
    g, A, _ = gen_alternating_cycle(4, 5, "1/2")
    trace = parametrized_local_search(g, SolverConfig(mode="param", alpha=-1, size_cap_factor=2, start=A))
    assert trace.iterations == 0
    assert trace.final.members == set(A)


# scaling
def test_scaled_weights_follow_the_recipe():
    g = ConflictGraph.from_edges(4, [(u, v) for u in range(4) for v in range(u + 1, 4)], [5, 3, 2, 1])
    factor, floors = scaled_weights(g, 2)
    assert factor == Fraction(8, 5)
    assert floors == [8, 4, 3, 1]


def test_equal_weights_scale_to_equal_integers():
    g = path([Fraction(7, 3)] * 5)
    _, floors = scaled_weights(g, 2)
    assert len(set(floors)) == 1


@pytest.mark.parametrize("seed", range(100))
def test_scaled_runs_stay_within_bounds(seed):
    inst = gen_random_packing(12, 3, 9, "near-unit" if seed % 2 else "uniform", seed=seed)
    g = as_graph(inst)
    trace = scale_truncate_run(g, SolverConfig(scaling_N=2))
    assert trace.scaled
    assert trace.iterations <= trace.iteration_bound == 9 * 4 * g.n**2
    opt = exact_mwis(g).optimum_w
    # factor N/(N-1) = 2 on top of d/2
    assert opt <= 2 * Fraction(4, 2) * trace.final.total_w
    unscaled = squareimp(g).final.total_w
    assert opt / trace.final.total_w <= 2 * (opt / unscaled)


@pytest.mark.parametrize("mode", ["squareimp", "logimp"])
def test_scaling_an_empty_instance(mode):
    trace = solve(parse_instance("p ksp 0 3 5\n"), SolverConfig(mode=mode, scaling_N=2))
    assert trace.scaled
    assert trace.final.members == frozenset()
    assert trace.iterations == 0
    assert trace.to_dict()["final_weight"] == "0/1"


def test_config_validation():
    with pytest.raises(InputError):
        SolverConfig(mode="param", alpha=0)
    with pytest.raises(InputError):
        SolverConfig(scaling_N=1)
    with pytest.raises(InputError):
        SolverConfig(size_cap_factor=0)
    with pytest.raises(InputError):
        SolverConfig(mode="bestimp")


def test_trace_json_is_stable():
    inst = gen_random_packing(12, 3, 9, seed=11)
    a = solve(inst, SolverConfig(mode="logimp", rng_seed=1)).to_dict()
    b = solve(inst, SolverConfig(mode="logimp", rng_seed=1)).to_dict()
    assert a == b
    assert "wall_time_ms" not in a
