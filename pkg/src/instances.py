#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: instances.py
Description: Instance generators: the harmonic revenue gap family, markets built from 3-regular
graphs for the vertex cover reduction, the cyclic three-agent market and seeded random markets.
"""

# Standard Libraries Imports
import logging
import random
from collections import Counter
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

# Local Imports
from envy import Trace
from errors import MarketParseError
from market import ArrivalOrder, Market
from revenue import run_static_prices

logger = logging.getLogger("Instances")


def gen_harmonic(n: int) -> Market:
    """Agent a_j values items i_j .. i_n at 1/j and the rest at 0."""

    if n < 1:
        raise ValueError("EFDP:: harmonic family needs n >= 1")
    agents = [f"a{j}" for j in range(1, n + 1)]
    items = [f"i{k}" for k in range(1, n + 1)]
    valuations = {
        (f"a{j}", f"i{k}"): Fraction(1, j) for j in range(1, n + 1) for k in range(j, n + 1)
    }
    return Market(agents, items, valuations)


def gen_cyclic_triple() -> Market:
    """Three agents, three items; a_j values i_j and i_(j+1) (cyclically) at 1."""

    agents = ["a1", "a2", "a3"]
    items = ["i1", "i2", "i3"]
    valuations = {}
    for j in range(3):
        valuations[(agents[j], items[j])] = Fraction(1)
        valuations[(agents[j], items[(j + 1) % 3])] = Fraction(1)
    return Market(agents, items, valuations)


def gen_random(n_agents: int, n_items: int, max_value: int, seed: int) -> Market:
    """Uniform integer valuations in [0, max_value], drawn agent by agent from random.Random(seed)."""

    if n_agents < 0 or n_items < 0 or max_value < 0:
        raise ValueError("EFDP:: random family needs non-negative sizes and max value")
    rng = random.Random(seed)
    agents = [f"a{j}" for j in range(1, n_agents + 1)]
    items = [f"i{k}" for k in range(1, n_items + 1)]
    valuations = {
        (agent, item): Fraction(rng.randint(0, max_value)) for agent in agents for item in items
    }
    return Market(agents, items, valuations)


def check_cubic_graph(vertices: Sequence, edges: Iterable[Tuple]) -> List[Tuple]:
    """Validate a simple 3-regular graph and return its edges as tuples.

    Raises
    ------
    MarketParseError
        On loops, repeated edges, unknown endpoints or a vertex of degree other than 3.
    """

    vertex_set = set(vertices)
    edges = [tuple(edge) for edge in edges]
    seen = set()
    for edge in edges:
        if len(edge) != 2:
            raise MarketParseError(f"EFDP:: edge {list(edge)} does not have two endpoints")
        u, w = edge
        if u not in vertex_set or w not in vertex_set:
            raise MarketParseError(f"EFDP:: edge {list(edge)} has an unknown endpoint")
        if u == w:
            raise MarketParseError(f"EFDP:: loop at vertex {u}")
        if frozenset(edge) in seen:
            raise MarketParseError(f"EFDP:: repeated edge {list(edge)}")
        seen.add(frozenset(edge))

    degree = Counter(v for edge in edges for v in edge)
    irregular = [v for v in vertices if degree[v] != 3]
    if irregular:
        logger.error(f"Graph is not 3-regular, offending vertices: {irregular}")
        raise MarketParseError(f"EFDP:: graph is not 3-regular (vertices {irregular})")
    return edges


def gen_vertex_cover_market(
    vertices: Sequence, edges: Iterable[Tuple]
) -> Tuple[Market, ArrivalOrder, ArrivalOrder]:
    """Pricing instance of a 3-regular graph.

    Every vertex z gets four items z_1..z_4 and a vertex-agent valuing them at 2; every edge zw
    gets an edge-agent valuing the copies of z and w at 1.

    Parameters
    ----------
    vertices : sequence
        Vertex labels.
    edges : iterable of pairs
        Edges of a simple 3-regular graph.

    Returns
    -------
    tuple
        (market, edge-first order, vertex-first order)
    """

    edges = check_cubic_graph(vertices, edges)

    items = [f"z{v}_{k}" for v in vertices for k in range(1, 5)]
    vertex_agents = [f"v{v}" for v in vertices]
    edge_agents = [f"e{u}_{w}" for u, w in edges]

    valuations = {}
    for v in vertices:
        for k in range(1, 5):
            valuations[(f"v{v}", f"z{v}_{k}")] = Fraction(2)
    for u, w in edges:
        for k in range(1, 5):
            valuations[(f"e{u}_{w}", f"z{u}_{k}")] = Fraction(1)
            valuations[(f"e{u}_{w}", f"z{w}_{k}")] = Fraction(1)

    edge_first = ArrivalOrder(edge_agents + vertex_agents)
    vertex_first = ArrivalOrder(vertex_agents + edge_agents)
    market = Market(vertex_agents + edge_agents, items, valuations, edge_first.sequence)
    logger.debug(f"  -- vertex cover market: {len(items)} items, {len(market.agents)} agents")
    return market, edge_first, vertex_first


def vertex_cover_trace(
    market: Market, vertices: Sequence, cover: Iterable, order: Iterable[str]
) -> Trace:
    """Constant prices 1 on copies of cover vertices and 2 elsewhere, buyers taking at zero."""

    cover = set(cover)
    prices = {}
    for v in vertices:
        for k in range(1, 5):
            prices[f"z{v}_{k}"] = Fraction(1) if v in cover else Fraction(2)
    return run_static_prices(market, order, prices)
