#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: covering.py
Description: Weighted coverings of the valuation graph. Difference-constraint solver on top of
networkx Bellman-Ford, optimal (Egervary) coverings, the refined covering whose tight edges are
exactly the legal edges, and the price shift constants derived from it.
"""

# Standard Libraries Imports
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Set, Tuple, TypeVar

# Third Party Libraries Imports
import networkx as nx

# Local Imports
from errors import CoveringError
from market import Market, PricingParameters, format_rational
from matching import MarketAnalysis, analyze_market, max_weight_matching

TCovering = TypeVar("TCovering", bound="Covering")

ZERO = ("zero", None)

logger = logging.getLogger("Covering")


@dataclass
class DifferenceConstraintSystem:
    """Constraints of the form x - y >= c over named variables and the zero-variable ZERO."""

    variables: List[Hashable] = field(default_factory=list)
    constraints: List[Tuple[Hashable, Hashable, Fraction]] = field(default_factory=list)

    def add(self, x: Hashable, y: Hashable, c) -> None:
        """Add x - y >= c."""

        for var in (x, y):
            if var != ZERO and var not in self.variables:
                self.variables.append(var)
        self.constraints.append((x, y, Fraction(c)))

    def add_equal(self, x: Hashable, y: Hashable, c) -> None:
        """Add x - y = c."""

        self.add(x, y, c)
        self.add(y, x, -Fraction(c))

    def satisfied_by(self, assignment: Dict[Hashable, Fraction]) -> bool:
        value = lambda var: Fraction(0) if var == ZERO else assignment[var]
        return all(value(x) - value(y) >= c for x, y, c in self.constraints)


@dataclass
class DifferenceSolution:
    feasible: bool
    assignment: Optional[Dict[Hashable, Fraction]] = None
    cycle: Optional[List[Hashable]] = None


def _negative_cycle(graph: nx.DiGraph) -> Optional[List[Hashable]]:
    """Negative cycle of graph from the Bellman-Ford predecessor map, first node repeated."""

    distance = {node: Fraction(0) for node in graph}
    predecessor = {}
    relaxed = None
    for _ in range(len(graph)):
        relaxed = None
        for u, v, weight in graph.edges(data="weight"):
            if distance[u] + weight < distance[v]:
                distance[v] = distance[u] + weight
                predecessor[v] = u
                relaxed = v
        if relaxed is None:
            return None

    # n steps back from a node still relaxing always land on the cycle
    node = relaxed
    for _ in range(len(graph)):
        node = predecessor[node]
    cycle = [node]
    current = predecessor[node]
    while current != node:
        cycle.append(current)
        current = predecessor[current]
    cycle.append(node)
    cycle.reverse()
    return cycle


def solve_difference_constraints(
    system: DifferenceConstraintSystem, largest: bool = True
) -> DifferenceSolution:
    """Solve a difference constraint system by shortest paths.

    Constraint x - y >= c becomes the arc x -> y of weight -c. Distances from ZERO give the
    pointwise largest solution with ZERO = 0. With largest=False the same is done for the
    negated variables, which gives the pointwise smallest solution. Variables that nothing
    bounds relative to ZERO are capped by an arc from ZERO whose weight exceeds any simple
    path length, so the cap never binds for bounded variables and never closes a negative cycle.

    Parameters
    ----------
    system : DifferenceConstraintSystem
        The constraints.
    largest : bool
        Pointwise largest (True) or smallest (False) solution.

    Returns
    -------
    DifferenceSolution
        feasible with an assignment of every variable, or infeasible with a negative cycle
        (first node repeated at the end).
    """

    graph = nx.DiGraph()
    graph.add_node(ZERO)
    graph.add_nodes_from(system.variables)

    for x, y, c in system.constraints:
        if x == y:
            if c > 0:
                return DifferenceSolution(False, cycle=[x, x])
            continue
        if not largest:
            # -x is at most -y - c
            x, y = y, x
        weight = -c
        if graph.has_edge(x, y):
            weight = min(weight, graph[x][y]["weight"])
        graph.add_edge(x, y, weight=weight)

    cap = sum((abs(c) for _, _, c in system.constraints), Fraction(0)) + 1
    for var in system.variables:
        if not graph.has_edge(ZERO, var):
            graph.add_edge(ZERO, var, weight=cap)

    try:
        distances = nx.single_source_bellman_ford_path_length(graph, ZERO, weight="weight")
    except nx.NetworkXUnbounded:
        cycle = _negative_cycle(graph)
        logger.debug(f"  -- difference constraints infeasible, cycle: {cycle}")
        return DifferenceSolution(False, cycle=cycle)

    sign = 1 if largest else -1
    return DifferenceSolution(
        True, assignment={var: sign * Fraction(distances[var]) for var in system.variables}
    )


class Covering:
    """Non-negative weighted covering pi of the valuation graph.

    Agent and item duals are stored separately because agent and item ids may coincide.
    """

    def __init__(
        self: TCovering, agents: Dict[str, Fraction], items: Dict[str, Fraction], margin=None
    ) -> None:
        self.agents = dict(agents)
        self.items = dict(items)
        self.margin = margin

    def __repr__(self: TCovering) -> str:
        return f"Covering(agents={self.agents}, items={self.items})"

    def agent(self: TCovering, agent: str) -> Fraction:
        return self.agents[agent]

    def item(self: TCovering, item: str) -> Fraction:
        return self.items[item]

    def total(self: TCovering) -> Fraction:
        return sum(self.agents.values(), Fraction(0)) + sum(self.items.values(), Fraction(0))

    def slack(self: TCovering, market: Market, agent: str, item: str) -> Fraction:
        return self.agents[agent] + self.items[item] - market.value(agent, item)

    def is_tight(self: TCovering, market: Market, agent: str, item: str) -> bool:
        return self.slack(market, agent, item) == 0

    def tight_edges(self: TCovering, market: Market) -> Set[Tuple[str, str]]:
        return {(a, i) for a, i in market.edges() if self.is_tight(market, a, i)}

    def zero_vertices(self: TCovering) -> Tuple[Set[str], Set[str]]:
        return (
            {a for a, value in self.agents.items() if value == 0},
            {i for i, value in self.items.items() if value == 0},
        )

    def violations(self: TCovering, market: Market, opt: Fraction) -> List[str]:
        """Feasibility, non-negativity and optimality problems of this covering."""

        problems = []
        for agent, item in market.edges():
            if self.slack(market, agent, item) < 0:
                problems.append(f"edge ({agent}, {item}) not covered")
        for kind, duals in (("agent", self.agents), ("item", self.items)):
            for vertex, value in duals.items():
                if value < 0:
                    problems.append(f"{kind} {vertex} has negative dual")
        if self.total() != opt:
            problems.append(f"total {self.total()} differs from optimum {opt}")
        return problems

    def export(self: TCovering) -> dict:
        return {
            "agents": {a: format_rational(v) for a, v in self.agents.items()},
            "items": {i: format_rational(v) for i, v in self.items.items()},
        }


def _agent_var(agent: str) -> tuple:
    return ("agent", agent)


def _item_var(item: str) -> tuple:
    # items enter as y(i) = -pi(i)
    return ("item", item)


def _covering_from(market: Market, assignment: Dict, margin=None) -> Covering:
    return Covering(
        {a: assignment.get(_agent_var(a), Fraction(0)) for a in market.agents},
        {i: -assignment.get(_item_var(i), Fraction(0)) for i in market.items},
        margin,
    )


def _cover_edge(system: DifferenceConstraintSystem, agent: str, item: str, bound) -> None:
    # pi(a) + pi(i) >= bound
    system.add(_agent_var(agent), _item_var(item), bound)


def _pin(system: DifferenceConstraintSystem, var: tuple, is_item: bool, low=None, exact=None):
    # bounds on pi(var); items are stored negated
    if exact is not None:
        system.add_equal(var, ZERO, -exact if is_item else exact)
    elif is_item:
        system.add(ZERO, var, low)
    else:
        system.add(var, ZERO, low)


def egervary_covering(market: Market) -> Covering:
    """Optimal non-negative covering (sum of duals equals the maximum matching weight).

    Complementary slackness against a maximum-weight matching M: every edge covered, M-edges
    tight, vertices exposed by M valued 0, all values non-negative. Any solution of this system
    is an optimal covering.

    Parameters
    ----------
    market : Market
        The market.

    Returns
    -------
    Covering
        An optimal covering.

    Raises
    ------
    CoveringError
        If the system is infeasible, which would mean the matching was not maximum.
    """

    matching = max_weight_matching(market)
    system = DifferenceConstraintSystem()

    for agent in market.agents:
        var = _agent_var(agent)
        if matching.item_of(agent) is None:
            _pin(system, var, False, exact=0)
        else:
            _pin(system, var, False, low=0)
    for item in market.items:
        var = _item_var(item)
        if matching.agent_of(item) is None:
            _pin(system, var, True, exact=0)
        else:
            _pin(system, var, True, low=0)

    for agent, item in market.edges():
        value = market.value(agent, item)
        if matching.item_of(agent) == item:
            system.add_equal(_agent_var(agent), _item_var(item), value)
        else:
            _cover_edge(system, agent, item, value)

    solution = solve_difference_constraints(system)
    if not solution.feasible:
        logger.error(f"Optimal covering system infeasible, cycle: {solution.cycle}")
        raise CoveringError("EFDP:: no optimal covering matches the maximum matching")

    return _covering_from(market, solution.assignment)


def refined_covering(
    market: Market, analysis: MarketAnalysis = None, halvings: int = 64
) -> Covering:
    """Covering whose tight edges are exactly the legal edges.

    Values are 0 exactly on vertices exposed by some maximum-weight matching. Every non-legal
    edge keeps slack at least gamma and every always-covered vertex has value at least gamma,
    for the largest gamma in 1, 1/2, 1/4, ... that admits a solution. Among those coverings the
    pointwise smallest agent duals are taken, so item duals are as large as possible.

    Parameters
    ----------
    market : Market
        Pruned market (every item covered by every maximum-weight matching).
    analysis : MarketAnalysis, optional
        Precomputed analysis of market.
    halvings : int
        Number of margin halvings tried before giving up.

    Returns
    -------
    Covering
        The refined covering; its margin attribute holds gamma.

    Raises
    ------
    CoveringError
        If no margin works within the halving budget or the result breaks an invariant.
    """

    if analysis is None:
        analysis = analyze_market(market)

    gamma = Fraction(1)
    for _ in range(halvings + 1):
        system = DifferenceConstraintSystem()

        for agent in market.agents:
            if agent in analysis.always_covered_agents:
                _pin(system, _agent_var(agent), False, low=gamma)
            else:
                _pin(system, _agent_var(agent), False, exact=0)
        for item in market.items:
            if item in analysis.always_covered_items:
                _pin(system, _item_var(item), True, low=gamma)
            else:
                _pin(system, _item_var(item), True, exact=0)

        for agent, item in market.edges():
            value = market.value(agent, item)
            if (agent, item) in analysis.legal_edges:
                system.add_equal(_agent_var(agent), _item_var(item), value)
            else:
                _cover_edge(system, agent, item, value + gamma)

        solution = solve_difference_constraints(system, largest=False)
        if solution.feasible:
            break
        gamma /= 2
    else:
        logger.error(f"No refined covering found after {halvings} margin halvings")
        raise CoveringError("EFDP:: refined covering not found within the halving budget")

    covering = _covering_from(market, solution.assignment, gamma)
    logger.debug(f"  -- refined covering with margin {format_rational(gamma)}")

    problems = covering.violations(market, analysis.opt_weight)
    if covering.tight_edges(market) != set(analysis.legal_edges):
        problems.append("tight edges differ from legal edges")
    zero_agents, zero_items = covering.zero_vertices()
    if zero_agents != set(market.agents) - analysis.always_covered_agents:
        problems.append("zero agents differ from sometimes-exposed agents")
    if zero_items != set(market.items) - analysis.always_covered_items:
        problems.append("zero items differ from sometimes-exposed items")
    if problems:
        for problem in problems:
            logger.error(f"Refined covering: {problem}")
        raise CoveringError(f"EFDP:: refined covering broken: {problems}")

    return covering


def compute_parameters(market: Market, cov: Covering) -> PricingParameters:
    """Price shift constants for the welfare schemes.

    delta is a quarter of the smallest of: slacks of non-tight edges, positive item duals,
    positive agent duals (1 if there is none). epsilon = delta / (2 * n * 2^n).

    Parameters
    ----------
    market : Market
        Pruned market.
    cov : Covering
        Refined covering of market.

    Returns
    -------
    PricingParameters
        delta and epsilon.
    """

    bounds = [cov.slack(market, a, i) for a, i in market.edges() if not cov.is_tight(market, a, i)]
    bounds += [value for value in cov.items.values() if value > 0]
    bounds += [value for value in cov.agents.values() if value > 0]

    delta = min(bounds) / 4 if bounds else Fraction(1)
    n = max(len(market.agents), 1)
    epsilon = delta / (2 * n * 2**n)
    return PricingParameters(delta=delta, epsilon=epsilon)
