"""Smoke tests for the pytreelab bindings."""

import math

import pytest

import pytreelab as tl


@pytest.fixture(scope="module")
def unit_graph():
    return tl.load_graph(tl.theta_unit_config())


def test_graph_shape(unit_graph):
    assert unit_graph.num_vertices == 2
    assert unit_graph.num_oriented_edges == 6
    assert unit_graph.degree(unit_graph.base_vertex) == 3


def test_validation_error():
    with pytest.raises(tl.ValidationError):
        tl.load_graph('{"vertices": ["a"], "edges": [], "base_vertex": "a"}')


def test_lambda0_analytic(unit_graph):
    # vertex reduction on the unit theta graph: cos(sqrt(lambda0)) = 2*sqrt(2)/3
    lam0 = tl.lambda0(unit_graph)
    assert abs(math.cos(math.sqrt(lam0)) - 2.0 * math.sqrt(2.0) / 3.0) < 1e-8


def test_green_symmetry_and_hitting(unit_graph):
    w = tl.solve_weyl(unit_graph, 0.05)
    assert w.converged
    x = tl.vertex_point([])
    y = tl.vertex_point([0, 3])
    assert tl.distance(unit_graph, x, y) == pytest.approx(2.0)
    assert tl.green(unit_graph, w, x, y) == pytest.approx(
        tl.green(unit_graph, w, y, x), rel=1e-12
    )
    # hitting transform multiplicative through the midpoint vertex
    mid = tl.vertex_point([0])
    phi = tl.hitting_transform(unit_graph, w, x, y)
    assert phi == pytest.approx(
        tl.hitting_transform(unit_graph, w, x, mid)
        * tl.hitting_transform(unit_graph, w, mid, y),
        rel=1e-12,
    )


def test_pressure_vanishes_at_lambda0(unit_graph):
    lam0 = tl.lambda0(unit_graph)
    w = tl.solve_weyl(unit_graph, lam0 - 1e-7)
    delta = tl.delta_lambda(unit_graph, w)
    s_star, band = tl.pressure_root(unit_graph, w, k=5)
    assert abs(s_star - delta) <= max(1e-3, band)
    assert delta <= 5e-3
