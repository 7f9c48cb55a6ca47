#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: welfare.py
Description: Welfare maximizing dynamic pricing with ex-post (prices never rise) and ex-ante
(prices never fall) envy-freeness. Maintains a maximum matching on the tight subgraph of the
remaining market, its exchange digraph and strongly connected components, and posts prices
shifted around the refined covering.
"""

# Standard Libraries Imports
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Set, Tuple, TypeVar

# Third Party Libraries Imports
import networkx as nx

# Local Imports
from covering import Covering, compute_parameters, refined_covering
from envy import NOT_OFFERED, EnvyNotion, Trace
from errors import SchemeFailure
from market import ArrivalOrder, Market, PricingParameters
from matching import Matching, max_weight_matching, prune_uncovered_items
from policy import TieBreakPolicy, agent_choice

TScheme = TypeVar("TScheme", bound="WelfareScheme")

AGENT = "agent"
ITEM = "item"

logger = logging.getLogger("Welfare")


def agent_node(agent: str) -> Tuple[str, str]:
    return (AGENT, agent)


def item_node(item: str) -> Tuple[str, str]:
    return (ITEM, item)


@dataclass(frozen=True)
class DynamicState:
    """Remaining agents and items at step t with the maintained matching."""

    step: int
    remaining_agents: FrozenSet[str]
    remaining_items: FrozenSet[str]
    matching: Matching

    @property
    def unmatched(self) -> FrozenSet[str]:
        return frozenset(a for a in self.remaining_agents if self.matching.item_of(a) is None)


@dataclass
class SccView:
    """Exchange digraph with its components in topological order (1-based indices)."""

    graph: nx.MultiDiGraph
    components: List[FrozenSet[Hashable]]
    component_index: Dict[Hashable, int]


@dataclass
class StepRecord:
    state: DynamicState
    scc: SccView
    reach: FrozenSet[Hashable]
    prices: Dict[str, Fraction]
    agent: str
    purchase: Optional[str]


def build_exchange_digraph(market: Market, state: DynamicState, cov: Covering) -> SccView:
    """Exchange digraph of the remaining tight subgraph and its strongly connected components.

    Tight matching edges are oriented item -> agent and doubled by a dummy agent -> item arc;
    every other tight edge is oriented agent -> item. Components are ordered topologically,
    ties broken by the smallest vertex they contain (agents before items, then id order).

    Parameters
    ----------
    market : Market
        Pruned market.
    state : DynamicState
        Current state.
    cov : Covering
        Refined covering.

    Returns
    -------
    SccView
        Digraph, components and the component index of every vertex.
    """

    def node_key(node: Tuple[str, str]) -> Tuple[int, int]:
        if node[0] == AGENT:
            return (0, market.agent_rank[node[1]])
        return (1, market.item_rank[node[1]])

    agents = sorted(state.remaining_agents, key=market.agent_rank.get)
    items = sorted(state.remaining_items, key=market.item_rank.get)

    graph = nx.MultiDiGraph()
    graph.add_nodes_from(agent_node(a) for a in agents)
    graph.add_nodes_from(item_node(i) for i in items)

    for agent in agents:
        for item in items:
            if not cov.is_tight(market, agent, item):
                continue
            graph.add_edge(agent_node(agent), item_node(item))
            if state.matching.item_of(agent) == item:
                graph.add_edge(item_node(item), agent_node(agent))

    condensed = nx.condensation(graph)
    smallest = {c: min(condensed.nodes[c]["members"], key=node_key) for c in condensed.nodes}
    ordered = nx.lexicographical_topological_sort(condensed, key=lambda c: node_key(smallest[c]))

    components = []
    component_index = {}
    for j, c in enumerate(ordered, start=1):
        members = frozenset(condensed.nodes[c]["members"])
        components.append(members)
        for node in members:
            component_index[node] = j
    return SccView(graph, components, component_index)


def reach_set_ex_post(state: DynamicState, scc: SccView) -> FrozenSet[Hashable]:
    """Vertices reachable from an unmatched agent."""

    reach: Set[Hashable] = set()
    for agent in state.unmatched:
        source = agent_node(agent)
        reach.add(source)
        reach |= nx.descendants(scc.graph, source)
    return frozenset(reach)


def reach_set_ex_ante(state: DynamicState, scc: SccView, cov: Covering) -> FrozenSet[Hashable]:
    """Vertices from which a matched agent with zero dual is reachable."""

    reach: Set[Hashable] = set()
    for agent in state.remaining_agents:
        if state.matching.item_of(agent) is None or cov.agent(agent) != 0:
            continue
        target = agent_node(agent)
        reach.add(target)
        reach |= nx.ancestors(scc.graph, target)
    return frozenset(reach)


def post_prices_ex_post(
    state: DynamicState,
    scc: SccView,
    reach: FrozenSet[Hashable],
    cov: Covering,
    params: PricingParameters,
) -> Dict[str, Fraction]:
    """Prices pi(i) + delta/2^t + j*eps inside the reach set, pi(i) - delta(1 - 1/2^t) + j*eps outside."""

    t = state.step
    shift = params.delta / 2**t
    prices = {}
    for item in state.remaining_items:
        node = item_node(item)
        j = scc.component_index[node]
        if node in reach:
            prices[item] = cov.item(item) + shift + j * params.epsilon
        else:
            prices[item] = cov.item(item) - (params.delta - shift) + j * params.epsilon
    return prices


def post_prices_ex_ante(
    state: DynamicState,
    scc: SccView,
    reach: FrozenSet[Hashable],
    cov: Covering,
    params: PricingParameters,
) -> Dict[str, Fraction]:
    """Prices pi(i) - delta/2^t + j*eps inside the reach set, pi(i) + delta(1 - 1/2^t) + j*eps outside."""

    t = state.step
    shift = params.delta / 2**t
    prices = {}
    for item in state.remaining_items:
        node = item_node(item)
        j = scc.component_index[node]
        if node in reach:
            prices[item] = cov.item(item) - shift + j * params.epsilon
        else:
            prices[item] = cov.item(item) + (params.delta - shift) + j * params.epsilon
    return prices


def _swap(matching: Dict[str, str], path: List[Tuple[str, str]]) -> Dict[str, str]:
    """Symmetric difference of a matching with an alternating path or cycle of the digraph.

    agent -> item arcs enter the matching, item -> agent arcs leave it.
    """

    result = dict(matching)
    added = []
    for u, v in zip(path, path[1:]):
        if u[0] == ITEM and v[0] == AGENT:
            if result.get(v[1]) != u[1]:
                raise SchemeFailure(f"EFDP:: arc {u} -> {v} is not a matching edge")
            del result[v[1]]
        else:
            added.append((u[1], v[1]))
    for agent, item in added:
        if agent in result or item in result.values():
            raise SchemeFailure(f"EFDP:: exchange along {path} does not give a matching")
        result[agent] = item
    return result


def _exchange(
    market: Market,
    cov: Covering,
    scc: SccView,
    matching: Dict[str, str],
    agent: str,
    item: Optional[str],
) -> Dict[str, str]:
    """Matched agent buys a tight item of her own component."""

    if item is None:
        raise SchemeFailure(f"EFDP:: matched agent {agent} declined a positive utility offer")
    if not cov.is_tight(market, agent, item):
        raise SchemeFailure(f"EFDP:: agent {agent} bought non-tight item {item}")
    a_node, i_node = agent_node(agent), item_node(item)
    if scc.component_index[a_node] != scc.component_index[i_node]:
        raise SchemeFailure(f"EFDP:: agent {agent} bought {item} outside her component")

    if matching[agent] != item:
        cycle = [a_node] + nx.shortest_path(scc.graph, i_node, a_node)
        matching = _swap(matching, cycle)
    del matching[agent]
    return matching


def update_after_purchase(
    market: Market,
    state: DynamicState,
    cov: Covering,
    scc: SccView,
    reach: FrozenSet[Hashable],
    notion: EnvyNotion,
    agent: str,
    item: Optional[str],
) -> DynamicState:
    """
    State after agent bought item (None: nothing).

    Matched buyers rotate the matching along a cycle through the bought item. In the ex-post
    scheme a matched zero-dual agent in the reach set takes nothing and hands her item over
    along a path from an unmatched agent. In the ex-ante scheme an unmatched agent in the reach
    set buys an item whose matched chain ends at a zero-dual agent, who becomes unmatched.

    :raises SchemeFailure: If the purchase contradicts the scheme's guarantees.
    """

    matching = dict(state.matching.by_agent)
    current = matching.get(agent)
    a_node = agent_node(agent)

    if notion is EnvyNotion.EX_POST:
        if current is None:
            if item is not None:
                raise SchemeFailure(f"EFDP:: unmatched agent {agent} bought {item}")
        elif a_node in reach and cov.agent(agent) == 0:
            if item is not None:
                raise SchemeFailure(f"EFDP:: zero-dual agent {agent} bought {item}")
            sources = sorted(state.unmatched, key=market.agent_rank.get)
            source = next(
                (s for s in sources if nx.has_path(scc.graph, agent_node(s), a_node)), None
            )
            if source is None:
                raise SchemeFailure(f"EFDP:: no unmatched agent reaches {agent}")
            path = nx.shortest_path(scc.graph, agent_node(source), a_node)
            matching = _swap(matching, path)
        else:
            matching = _exchange(market, cov, scc, matching, agent, item)

    elif notion is EnvyNotion.EX_ANTE:
        if current is not None:
            matching = _exchange(market, cov, scc, matching, agent, item)
        elif item is not None:
            i_node = item_node(item)
            if a_node not in reach or i_node not in reach:
                raise SchemeFailure(f"EFDP:: unmatched agent {agent} bought {item} outside reach")
            if not cov.is_tight(market, agent, item):
                raise SchemeFailure(f"EFDP:: agent {agent} bought non-tight item {item}")
            targets = sorted(
                (
                    a
                    for a in state.remaining_agents
                    if matching.get(a) is not None and cov.agent(a) == 0
                ),
                key=market.agent_rank.get,
            )
            target = next(
                (a for a in targets if nx.has_path(scc.graph, i_node, agent_node(a))), None
            )
            if target is None:
                raise SchemeFailure(f"EFDP:: item {item} reaches no zero-dual agent")
            path = [a_node] + nx.shortest_path(scc.graph, i_node, agent_node(target))
            matching = _swap(matching, path)
            del matching[agent]
    else:
        raise ValueError(f"EFDP:: welfare schemes support ex-post and ex-ante, not {notion}")

    return DynamicState(
        step=state.step + 1,
        remaining_agents=state.remaining_agents - {agent},
        remaining_items=state.remaining_items - ({item} if item is not None else set()),
        matching=Matching(matching.items()),
    )


def check_state(market: Market, state: DynamicState, cov: Covering) -> List[str]:
    """Invariant problems of a state: tight in-range matching, zero duals on unmatched agents."""

    problems = []
    for agent, item in state.matching.pairs:
        if agent not in state.remaining_agents or item not in state.remaining_items:
            problems.append(f"pair ({agent}, {item}) uses a removed vertex")
        elif not cov.is_tight(market, agent, item):
            problems.append(f"pair ({agent}, {item}) is not tight")
    for agent in state.unmatched:
        if cov.agent(agent) != 0:
            problems.append(f"unmatched agent {agent} has positive dual")
    return problems


def check_preference(
    market: Market,
    state: DynamicState,
    cov: Covering,
    params: PricingParameters,
    prices: Dict[str, Fraction],
) -> List[str]:
    """Pairs where a remaining agent does not strictly prefer a tight item to a non-tight one.

    Only prices within delta of the covering value are considered, as the separation argument
    requires.
    """

    problems = []
    for agent in state.remaining_agents:
        tight = []
        loose = []
        for item, price in prices.items():
            if cov.is_tight(market, agent, item):
                if price <= cov.item(item) + params.delta:
                    tight.append(market.value(agent, item) - price)
            elif price >= cov.item(item) - params.delta:
                loose.append((item, market.value(agent, item) - price))
        if tight and loose:
            worst_tight = min(tight)
            for item, gain in loose:
                if gain >= worst_tight:
                    problems.append(f"agent {agent} does not strictly prefer tight items to {item}")
    return problems


class WelfareScheme:
    """Welfare maximizing dynamic pricing scheme for one market and notion.

    Preparation (pruning, refined covering, constants, initial matching) happens once; run()
    can then be called for any arrival order and tie-break policy.

    Attributes
    ----------
    market : Market
        The original market; traces cover all of its items.
    notion : EnvyNotion
        EX_POST or EX_ANTE.
    pruned : Market
        Market after removing items some maximum matching leaves unsold.
    removed : list
        Items never offered.
    covering : Covering
        Refined covering of the pruned market.
    parameters : PricingParameters
        delta and epsilon.
    initial_matching : Matching
        Maximum-weight matching of the pruned market used at step 1.
    """

    decline_at_zero = True
    fixed_order = None

    def __init__(
        self: TScheme,
        market: Market,
        notion: EnvyNotion,
        strict: bool = True,
        halvings: int = 64,
    ) -> None:
        if notion not in (EnvyNotion.EX_POST, EnvyNotion.EX_ANTE):
            raise ValueError(f"EFDP:: welfare schemes support ex-post and ex-ante, not {notion}")

        self.market = market
        self.notion = notion
        self.strict = strict
        self.pruned, self.removed = prune_uncovered_items(market)
        self.covering = refined_covering(self.pruned, halvings=halvings)
        self.parameters = compute_parameters(self.pruned, self.covering)
        self.initial_matching = max_weight_matching(self.pruned)

        logger.debug(
            f"  -- welfare scheme {notion.value}: delta={self.parameters.delta}, "
            f"epsilon={self.parameters.epsilon}, pruned items={self.removed}"
        )

    def initial_state(self: TScheme) -> DynamicState:
        return DynamicState(
            step=1,
            remaining_agents=frozenset(self.pruned.agents),
            remaining_items=frozenset(self.pruned.items),
            matching=self.initial_matching,
        )

    def post_prices(self: TScheme, state: DynamicState) -> Tuple[SccView, FrozenSet, Dict]:
        """Digraph, reach set and prices for state."""

        scc = build_exchange_digraph(self.pruned, state, self.covering)
        if self.notion is EnvyNotion.EX_POST:
            reach = reach_set_ex_post(state, scc)
            prices = post_prices_ex_post(state, scc, reach, self.covering, self.parameters)
        else:
            reach = reach_set_ex_ante(state, scc, self.covering)
            prices = post_prices_ex_ante(state, scc, reach, self.covering, self.parameters)
        return scc, reach, prices

    def run(
        self: TScheme,
        order: Iterable[str],
        policy: TieBreakPolicy,
        history: Optional[List[StepRecord]] = None,
    ) -> Trace:
        """Run the scheme for one arrival order.

        Parameters
        ----------
        order : iterable of str
            Arrival order (all agents).
        policy : TieBreakPolicy
            Resolves ties and zero-utility decisions.
        history : list, optional
            Receives one StepRecord per step.

        Returns
        -------
        Trace
            The trace over the original market.

        Raises
        ------
        SchemeFailure
            With the partial trace attached, if an agent's behaviour or a state breaks the
            scheme's invariants.
        """

        order = ArrivalOrder.of(self.market, order)
        trace = Trace(self.market)
        state = self.initial_state()
        available = list(self.market.items)

        for agent in order:
            scc, reach, prices = self.post_prices(state)
            problems = []
            if self.strict:
                problems = check_preference(
                    self.pruned, state, self.covering, self.parameters, prices
                )

            offers = {item: prices.get(item, NOT_OFFERED) for item in available}
            choice = agent_choice(self.market, offers, agent, policy)
            trace.add_step(agent, available, offers, choice)
            if history is not None:
                history.append(StepRecord(state, scc, reach, prices, agent, choice))

            try:
                if problems:
                    raise SchemeFailure(f"EFDP:: step {state.step}: {problems[0]}")
                state = update_after_purchase(
                    self.pruned, state, self.covering, scc, reach, self.notion, agent, choice
                )
                if self.strict:
                    problems = check_state(self.pruned, state, self.covering)
                    if problems:
                        raise SchemeFailure(f"EFDP:: step {state.step - 1}: {problems[0]}")
            except SchemeFailure as e:
                logger.error(f"Welfare scheme failed at step {len(trace)}: {e}")
                e.trace = trace
                raise

            if choice is not None:
                available.remove(choice)

        return trace


def run_welfare_scheme(
    market: Market, notion: EnvyNotion, order: Iterable[str], policy: TieBreakPolicy
) -> Trace:
    """Prepare and run a welfare scheme once."""

    return WelfareScheme(market, notion).run(order, policy)
