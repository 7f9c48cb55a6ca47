"""Instance families."""

# Standard Libraries Imports
from fractions import Fraction

# Third Party Libraries Imports
import pytest

# Local Imports
from conftest import K4_EDGES
from envy import EnvyNotion, revenue, social_welfare, verify_envy_free
from errors import MarketParseError
from instances import (
    check_cubic_graph,
    gen_cyclic_triple,
    gen_harmonic,
    gen_random,
    gen_vertex_cover_market,
    vertex_cover_trace,
)
from matching import opt_weight


def test_harmonic_values():
    market = gen_harmonic(3)
    assert market.agents == ("a1", "a2", "a3")
    assert market.value("a1", "i1") == 1
    assert market.value("a2", "i1") == 0
    assert market.value("a2", "i3") == Fraction(1, 2)
    assert market.value("a3", "i3") == Fraction(1, 3)


@pytest.mark.parametrize("n, opt", [(1, 1), (3, Fraction(11, 6)), (4, Fraction(25, 12))])
def test_harmonic_optimum(n, opt):
    assert opt_weight(gen_harmonic(n)) == opt


def test_harmonic_needs_agents():
    with pytest.raises(ValueError):
        gen_harmonic(0)


def test_cyclic_triple():
    market = gen_cyclic_triple()
    assert market.value("a1", "i2") == 1
    assert market.value("a3", "i1") == 1
    assert market.value("a1", "i3") == 0
    assert opt_weight(market) == 3


def test_random_is_deterministic():
    first = gen_random(3, 4, 5, seed=7)
    second = gen_random(3, 4, 5, seed=7)
    assert first == second
    assert first.export() == second.export()
    assert all(0 <= first.value(a, i) <= 5 for a, i in first.edges())


def test_random_zero_max_value():
    market = gen_random(2, 2, 0, seed=1)
    assert all(market.value(a, i) == 0 for a, i in market.edges())
    assert opt_weight(market) == 0


def test_random_rejects_negative_sizes():
    with pytest.raises(ValueError):
        gen_random(-1, 2, 3, seed=0)


def test_vertex_cover_market_k4():
    market, edge_first, vertex_first = gen_vertex_cover_market(range(4), K4_EDGES)
    assert len(market.items) == 16
    assert len(market.agents) == 10
    assert len(K4_EDGES) == 3 * 4 // 2
    assert list(edge_first)[:6] == ["e0_1", "e0_2", "e0_3", "e1_2", "e1_3", "e2_3"]
    assert list(vertex_first)[:4] == ["v0", "v1", "v2", "v3"]
    assert market.order == tuple(edge_first)
    assert market.value("v2", "z2_4") == 2
    assert market.value("e1_3", "z3_1") == 1
    assert market.value("e1_3", "z0_1") == 0


def test_vertex_cover_canonical_trace():
    market, edge_first, _ = gen_vertex_cover_market(range(4), K4_EDGES)
    trace = vertex_cover_trace(market, range(4), {0, 1, 2}, edge_first)
    assert revenue(trace) == 11
    assert social_welfare(trace) == 14
    assert trace.allocation()["v3"] == "z3_1"
    assert verify_envy_free(trace, EnvyNotion.STRONG) is None


@pytest.mark.parametrize(
    "edges",
    [
        [(0, 1), (1, 2), (2, 3), (3, 0)],
        K4_EDGES + [(0, 1)],
        K4_EDGES[:-1] + [(3, 3)],
        K4_EDGES[:-1] + [(2, 7)],
    ],
)
def test_rejects_non_cubic_graphs(edges):
    with pytest.raises(MarketParseError):
        check_cubic_graph(range(4), edges)
    with pytest.raises(MarketParseError):
        gen_vertex_cover_market(range(4), edges)
