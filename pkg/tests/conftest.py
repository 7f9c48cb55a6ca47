"""Shared markets for the test suite."""

# Standard Libraries Imports
import itertools
import json
from fractions import Fraction

# Third Party Libraries Imports
import pytest

# Local Imports
from instances import gen_cyclic_triple, gen_harmonic
from market import Market
from policy import ReplayPolicy

M1_JSON = {
    "agents": ["a1", "a2"],
    "items": ["i1", "i2"],
    "valuations": {"a1": {"i1": "3", "i2": "1"}, "a2": {"i1": "2", "i2": "2"}},
}

K4_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
K33_EDGES = [(u, w) for u in (0, 1, 2) for w in (3, 4, 5)]


def build_market(rows: dict) -> Market:
    """Market from {agent: {item: value}} with agents and items in first-seen order."""

    agents = list(rows)
    items = []
    for row in rows.values():
        for item in row:
            if item not in items:
                items.append(item)
    valuations = {(a, i): Fraction(v) for a, row in rows.items() for i, v in row.items()}
    return Market(agents, items, valuations)


@pytest.fixture
def m1() -> Market:
    return Market.load(M1_JSON)


@pytest.fixture
def cyclic3() -> Market:
    return gen_cyclic_triple()


@pytest.fixture
def harmonic3() -> Market:
    return gen_harmonic(3)


@pytest.fixture
def m1_file(tmp_path):
    path = tmp_path / "m1.json"
    path.write_text(json.dumps(M1_JSON), encoding="utf-8")
    return path


def explore_traces(scheme, market, orders=None, histories=None):
    """Every trace of a prepared scheme over the given orders (default: all) and decision paths.

    When histories is a list it receives the step records of every run.
    """

    if orders is None:
        orders = itertools.permutations(market.agents)
    traces = []
    for order in orders:
        stack = [()]
        while stack:
            prefix = stack.pop()
            policy = ReplayPolicy(prefix, scheme.decline_at_zero)
            if histories is None:
                traces.append(scheme.run(order, policy))
            else:
                history = []
                traces.append(scheme.run(order, policy, history))
                histories.append(history)
            for depth in range(len(prefix), len(policy.branching)):
                for alternative in range(1, policy.branching[depth]):
                    stack.append(tuple(policy.taken[:depth]) + (alternative,))
    return traces
