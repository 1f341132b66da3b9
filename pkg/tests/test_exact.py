import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardcore_si.exact import (
    EigenError,
    SizeLimitError,
    all_valid_pinnings,
    enumerate_independent_sets,
    gibbs_distribution,
    influence_matrix,
    marginal,
    partition_function,
    si_constants,
    worst_pinning_si,
)
from hardcore_si.graph import (
    EMPTY_PINNING,
    Graph,
    Pinning,
    complete_graph,
    cycle_graph,
    enumerate_graphs,
    path_graph,
    star_graph,
)
from hardcore_si.uniqueness import critical_fugacity, fixed_point

import oracles
from test_graph import graphs


def test_enumeration_counts():
    assert len(list(enumerate_independent_sets(path_graph(1)))) == 2
    assert len(list(enumerate_independent_sets(complete_graph(2)))) == 3
    sets = [c.vertices() for c in enumerate_independent_sets(path_graph(3))]
    assert sorted(sets) == sorted([[], [0], [1], [2], [0, 2]])


def test_enumeration_deterministic_order_starts_with_empty():
    first = list(enumerate_independent_sets(cycle_graph(5)))
    again = list(enumerate_independent_sets(cycle_graph(5)))
    assert first == again and first[0].bits == 0


@given(graphs(max_n=9))
def test_enumeration_matches_filter(g):
    ours = sorted(c.bits for c in enumerate_independent_sets(g))
    brute = sorted(sum(s << v for v, s in enumerate(spins)) for spins in oracles.all_independent_sets(g))
    assert ours == brute


def test_size_guard():
    with pytest.raises(SizeLimitError):
        list(enumerate_independent_sets(Graph.from_edges(31, [])))


@pytest.mark.parametrize("g, lam, expected", [
    (path_graph(1), 2.0, 3.0),
    (complete_graph(2), 1.0, 3.0),
    (path_graph(3), 1.0, 5.0),
])
def test_partition_examples(g, lam, expected):
    z = partition_function(g, lam)
    assert z.exact_value == pytest.approx(expected, rel=1e-15)
    assert z.log_value == pytest.approx(math.log(expected), rel=1e-14)


@settings(max_examples=60)
@given(graphs(max_n=9), st.floats(0.05, 20.0))
def test_partition_matches_deletion_recursion(g, lam):
    z = partition_function(g, lam)
    ref = oracles.partition_by_deletion(g, lam)
    assert z.log_value >= 0.0
    assert z.log_value == pytest.approx(math.log(ref), rel=1e-12, abs=1e-12)


def test_partition_log_domain_large_lambda():
    z = partition_function(Graph.from_edges(16, []), 1e200)
    assert z.log_value == pytest.approx(16 * math.log1p(1e200), rel=1e-12)


def test_nonpositive_lambda_rejected():
    with pytest.raises(ValueError):
        partition_function(path_graph(2), 0.0)


@given(graphs(max_n=8), st.floats(0.1, 10.0))
def test_gibbs_normalized(g, lam):
    _, p = gibbs_distribution(g, lam)
    assert abs(p.sum() - 1.0) <= 1e-12


@pytest.mark.parametrize("g, v, pin, expected", [
    (path_graph(1), 0, EMPTY_PINNING, 0.5),
    (star_graph(2), 0, EMPTY_PINNING, 0.2),
    (path_graph(3), 0, Pinning({1: 0}), 0.5),
])
def test_marginal_examples(g, v, pin, expected):
    assert marginal(g, 1.0, v, pin) == pytest.approx(expected, abs=1e-15)


def test_marginal_pinned_vertex_rejected():
    with pytest.raises(ValueError):
        marginal(path_graph(3), 1.0, 1, Pinning({1: 0}))


def test_influence_k2():
    psi = influence_matrix(complete_graph(2), 1.0)
    np.testing.assert_allclose(psi.entries, [[1, -0.5], [-0.5, 1]], atol=1e-15)


def test_influence_isolated_identity():
    psi = influence_matrix(Graph.from_edges(2, []), 3.7)
    np.testing.assert_allclose(psi.entries, np.eye(2), atol=1e-15)


def test_influence_triangle():
    psi = influence_matrix(complete_graph(3), 1.0)
    off = psi.entries[~np.eye(3, dtype=bool)]
    np.testing.assert_allclose(off, -1 / 3, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=6), st.floats(0.2, 5.0), st.data())
def test_influence_matches_definition(g, lam, data):
    pins = {}
    if g.n:
        for v in data.draw(st.sets(st.integers(0, g.n - 1), max_size=2)):
            pins[v] = data.draw(st.integers(0, 1))
    pin = Pinning(pins)
    if not pin.is_valid(g):
        return
    psi = influence_matrix(g, lam, pin)
    free, ref = oracles.influence_by_definition(g, lam, pins)
    assert list(psi.free) == free
    np.testing.assert_allclose(psi.entries, ref, atol=1e-12)
    assert np.all(np.diag(psi.entries) == 1.0)


def test_si_constants_examples():
    k2 = si_constants(influence_matrix(complete_graph(2), 1.0))
    assert k2.inf_norm == pytest.approx(1.5) and k2.max_eigenvalue == pytest.approx(1.5)
    ident = si_constants(np.eye(4))
    assert (ident.inf_norm, ident.max_eigenvalue) == (1.0, 1.0)
    assert si_constants(influence_matrix(complete_graph(3), 1.0)).inf_norm == pytest.approx(5 / 3)


def test_si_constants_complex_spectrum_reported():
    rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
    with pytest.raises(EigenError):
        si_constants(rotation)


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=7), st.floats(0.2, 6.0))
def test_eigenvalue_below_inf_norm(g, lam):
    if g.n == 0:
        return
    rep = si_constants(influence_matrix(g, lam))
    assert rep.max_eigenvalue <= rep.inf_norm + 1e-9


def test_worst_pinning_examples():
    k2 = worst_pinning_si(complete_graph(2), 1.0)
    assert k2.inf_norm.inf_norm == pytest.approx(1.5)
    assert k2.witness == EMPTY_PINNING
    assert worst_pinning_si(path_graph(1), 1.0).inf_norm.inf_norm == pytest.approx(1.0)
    star = worst_pinning_si(star_graph(3), 1.0)
    # exhaustive oracle over all 27 pinnings gives 2.5 (the empty pinning, center row)
    assert star.inf_norm.inf_norm == pytest.approx(2.5, abs=1e-12)
    assert star.inf_norm.inf_norm <= 3.6134


def _worst_by_brute_force(g, lam):
    best_norm = best_eig = 0.0
    for pin in all_valid_pinnings(g):
        free, psi = oracles.influence_by_definition(g, lam, pin.values)
        if not free:
            continue
        best_norm = max(best_norm, np.abs(psi).sum(axis=1).max())
        best_eig = max(best_eig, np.linalg.eigvals(psi).real.max())
    return best_norm, best_eig


@pytest.mark.parametrize("g", [
    cycle_graph(4), star_graph(3), Graph.from_edges(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]),
    path_graph(5),
])
def test_worst_pinning_matches_direct_pinning_scan(g):
    ours = worst_pinning_si(g, 2.0)
    norm, eig = _worst_by_brute_force(g, 2.0)
    assert ours.inf_norm.inf_norm == pytest.approx(norm, abs=1e-12)
    assert ours.eigen.max_eigenvalue == pytest.approx(eig, abs=1e-9)
    witness = influence_matrix(g, 2.0, ours.witness)
    assert si_constants(witness).inf_norm == pytest.approx(norm, abs=1e-12)


def test_worst_pinning_size_guard():
    with pytest.raises(SizeLimitError):
        worst_pinning_si(path_graph(17), 1.0)


@pytest.mark.slow
def test_optimal_constant_bounds_every_small_degree3_graph():
    graphs_le_8 = [g for n in range(1, 9) for g in enumerate_graphs(n, 3, connected=False)]
    for delta in (0.1, 0.25, 0.5, 0.75):
        lam = (1 - delta) * critical_fugacity(3)
        x = fixed_point(2, lam).x_hat
        bound = (1 + x) / (1 - 2 * x)
        worst = max(worst_pinning_si(g, lam).inf_norm.inf_norm for g in graphs_le_8)
        assert worst <= bound + 1e-9, (delta, worst, bound)
