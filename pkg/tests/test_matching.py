"""Maximum-weight matching, legal edges, coverage and pruning."""

# Standard Libraries Imports
import itertools
from fractions import Fraction

# Third Party Libraries Imports
import pytest

# Local Imports
from conftest import build_market
from errors import InstanceTooLargeError
from instances import gen_harmonic, gen_random
from matching import (
    Matching,
    always_covered_vertices,
    analyze_market,
    enumerate_max_matchings,
    hungarian,
    legal_edges,
    max_weight_matching,
    opt_weight,
    prune_uncovered_items,
)


def brute_force_opt(market):
    """Best matching weight over all injective partial assignments."""

    best = Fraction(0)
    items = list(market.items) + [None] * len(market.agents)
    for choice in itertools.permutations(items, len(market.agents)):
        weight = sum((market.value(a, i) for a, i in zip(market.agents, choice)), Fraction(0))
        best = max(best, weight)
    return best


def test_hungarian_square():
    weights = [[Fraction(3), Fraction(1)], [Fraction(2), Fraction(2)]]
    assert hungarian(weights) == [0, 1]
    assert hungarian([]) == []


def test_max_weight_matching_m1(m1):
    matching = max_weight_matching(m1)
    assert matching == {("a1", "i1"), ("a2", "i2")}
    assert matching.weight(m1) == 5
    assert opt_weight(m1) == 5


def test_max_weight_matching_rectangular():
    market = build_market({"a1": {"i1": 4, "i2": 0, "i3": 0}, "a2": {"i1": 5, "i2": 0, "i3": 2}})
    assert opt_weight(market) == 6
    assert max_weight_matching(market) == {("a1", "i1"), ("a2", "i3")}

    wide = build_market({"a1": {"i1": 1}, "a2": {"i1": 3}, "a3": {"i1": 2}})
    assert max_weight_matching(wide) == {("a2", "i1")}


def test_zero_pairs_are_dropped():
    market = build_market({"a1": {"i1": 0, "i2": 0}, "a2": {"i1": 1, "i2": 0}})
    assert max_weight_matching(market) == {("a2", "i1")}


def test_matching_rejects_shared_vertex():
    with pytest.raises(ValueError):
        Matching([("a1", "i1"), ("a2", "i1")])


def test_harmonic_opt():
    assert opt_weight(gen_harmonic(3)) == Fraction(11, 6)
    assert opt_weight(gen_harmonic(5)) == Fraction(137, 60)
    assert opt_weight(gen_harmonic(1)) == 1


def test_cyclic_matchings(cyclic3):
    matchings = enumerate_max_matchings(cyclic3)
    assert opt_weight(cyclic3) == 3
    assert set(matchings) == {
        Matching([("a1", "i1"), ("a2", "i2"), ("a3", "i3")]),
        Matching([("a1", "i2"), ("a2", "i3"), ("a3", "i1")]),
    }


def test_cyclic_legal_edges(cyclic3):
    legal = legal_edges(cyclic3)
    assert len(legal) == 6
    assert all(cyclic3.value(a, i) == 1 for a, i in legal)


def test_m1_analysis(m1):
    analysis = analyze_market(m1)
    assert analysis.opt_weight == 5
    assert analysis.legal_edges == {("a1", "i1"), ("a2", "i2")}
    assert analysis.always_covered_agents == {"a1", "a2"}
    assert analysis.always_covered_items == {"i1", "i2"}


def test_sometimes_exposed_vertices():
    # a1 and a2 compete for i1, either may be left out
    market = build_market({"a1": {"i1": 1}, "a2": {"i1": 1}})
    agents, items = always_covered_vertices(market)
    assert agents == set()
    assert items == {"i1"}
    assert legal_edges(market) == {("a1", "i1"), ("a2", "i1")}


def test_enumeration_too_large():
    market = gen_random(3, 3, 1, seed=0)
    with pytest.raises(InstanceTooLargeError):
        enumerate_max_matchings(market, max_side=2)


def test_prune_uncovered_items():
    market = build_market({"a1": {"i1": 2, "i2": 1, "i3": 2}})
    pruned, removed = prune_uncovered_items(market)
    assert pruned.items == ("i1",)
    assert removed == ["i3", "i2"]
    assert opt_weight(pruned) == opt_weight(market)


def test_prune_keeps_needed_items(m1):
    pruned, removed = prune_uncovered_items(m1)
    assert removed == []
    assert pruned == m1


@pytest.mark.parametrize("seed", range(12))
def test_random_cross_check(seed):
    """Hungarian, enumeration, legality and coverage agree on random markets."""

    market = gen_random(3, 3, 4, seed)
    opt = opt_weight(market)
    assert opt == brute_force_opt(market)

    matchings = enumerate_max_matchings(market)
    assert matchings
    assert all(m.weight(market) == opt for m in matchings)

    union = set().union(*(m.pairs for m in matchings))
    assert legal_edges(market) == union

    agents, items = always_covered_vertices(market)
    assert agents == {a for a in market.agents if all(m.item_of(a) for m in matchings)}
    assert items == {i for i in market.items if all(m.agent_of(i) for m in matchings)}
