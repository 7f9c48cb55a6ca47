#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: matching.py
Description: Maximum-weight bipartite matching with exact rationals, legal edge and coverage
analysis, removal of items that some maximum matching leaves unsold, and exhaustive enumeration
of all maximum-weight matchings.
"""

# Standard Libraries Imports
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, FrozenSet, Iterable, List, Optional, Set, Tuple, TypeVar

# Local Imports
from errors import InstanceTooLargeError
from market import Market, format_rational

TMatching = TypeVar("TMatching", bound="Matching")

logger = logging.getLogger("Matching")


class Matching:
    """Set of (agent, item) pairs where no agent and no item appears twice.

    Attributes
    ----------
    pairs : frozenset
        The matched (agent, item) pairs.
    by_agent : dict
        agent -> item, the x_a map.
    by_item : dict
        item -> agent.
    """

    def __init__(self: TMatching, pairs: Iterable[Tuple[str, str]] = ()) -> None:
        self.pairs = frozenset(pairs)
        self.by_agent = {agent: item for agent, item in self.pairs}
        self.by_item = {item: agent for agent, item in self.pairs}
        if len(self.by_agent) != len(self.pairs) or len(self.by_item) != len(self.pairs):
            raise ValueError(f"EFDP:: not a matching: {sorted(self.pairs)}")

    def __eq__(self: TMatching, other: Any) -> bool:
        if isinstance(other, Matching):
            return self.pairs == other.pairs
        return self.pairs == frozenset(other)

    def __hash__(self: TMatching) -> int:
        return hash(self.pairs)

    def __len__(self: TMatching) -> int:
        return len(self.pairs)

    def __iter__(self: TMatching):
        return iter(sorted(self.pairs))

    def __repr__(self: TMatching) -> str:
        return f"Matching({sorted(self.pairs)})"

    def item_of(self: TMatching, agent: str) -> Optional[str]:
        return self.by_agent.get(agent)

    def agent_of(self: TMatching, item: str) -> Optional[str]:
        return self.by_item.get(item)

    def weight(self: TMatching, market: Market) -> Fraction:
        return sum((market.value(agent, item) for agent, item in self.pairs), Fraction(0))

    def export(self: TMatching) -> list:
        return [[agent, item] for agent, item in sorted(self.pairs)]


@dataclass(frozen=True)
class MarketAnalysis:
    opt_weight: Fraction
    legal_edges: FrozenSet[Tuple[str, str]]
    always_covered_agents: FrozenSet[str]
    always_covered_items: FrozenSet[str]

    def export(self) -> dict:
        return {
            "opt_weight": format_rational(self.opt_weight),
            "legal_edges": [list(edge) for edge in sorted(self.legal_edges)],
            "always_covered_agents": sorted(self.always_covered_agents),
            "always_covered_items": sorted(self.always_covered_items),
        }


def hungarian(weights: List[List[Fraction]]) -> List[int]:
    """Maximum-weight perfect assignment of a square matrix.

    Shortest augmenting path method with row/column potentials, run on the costs -w.
    Rows are inserted in index order and columns are scanned in index order, so equal
    inputs always give equal assignments.

    Parameters
    ----------
    weights : list of list of Fraction
        Square weight matrix.

    Returns
    -------
    list of int
        assignment[row] = column.
    """

    n = len(weights)
    if n == 0:
        return []

    # 1-indexed, index 0 is the virtual column of the row being inserted
    u = [Fraction(0)] * (n + 1)
    v = [Fraction(0)] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)

    for row in range(1, n + 1):
        p[0] = row
        j0 = 0
        minv: List[Optional[Fraction]] = [None] * (n + 1)
        used = [False] * (n + 1)

        while True:
            used[j0] = True
            i0 = p[j0]
            delta = None
            j1 = 0

            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = -weights[i0 - 1][j - 1] - u[i0] - v[j]
                if minv[j] is None or cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if delta is None or minv[j] < delta:
                    delta = minv[j]
                    j1 = j

            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta

            j0 = j1
            if p[j0] == 0:
                break

        # Flip the augmenting path
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break

    assignment = [-1] * n
    for j in range(1, n + 1):
        assignment[p[j] - 1] = j - 1
    return assignment


def max_weight_matching(market: Market) -> Matching:
    """
    Maximum-weight matching of the market's bipartite graph.

    The valuation table is padded to a square matrix with zero rows or columns; pairs that land
    on padding or carry zero value are dropped, so every returned pair has positive value.

    :param market: The market.
    :return: A maximum-weight matching, identical across runs for the same market.
    """

    size = max(len(market.agents), len(market.items))
    weights = [
        [
            market.value(market.agents[r], market.items[c])
            if r < len(market.agents) and c < len(market.items)
            else Fraction(0)
            for c in range(size)
        ]
        for r in range(size)
    ]

    pairs = []
    for r, c in enumerate(hungarian(weights)):
        if r >= len(market.agents) or c >= len(market.items):
            continue
        if weights[r][c] > 0:
            pairs.append((market.agents[r], market.items[c]))
    return Matching(pairs)


def opt_weight(market: Market) -> Fraction:
    """Weight of a maximum-weight matching."""

    return max_weight_matching(market).weight(market)


def legal_edges(market: Market, opt: Fraction = None) -> Set[Tuple[str, str]]:
    """
    Edges contained in at least one maximum-weight matching.

    Edge (a, i) is legal iff v_a(i) plus the optimum of the market without a and i
    equals the optimum of the whole market.

    :param market: The market.
    :param opt: Optimum weight if already known.
    :return: Set of legal (agent, item) pairs.
    """

    if opt is None:
        opt = opt_weight(market)

    legal = set()
    for agent, item in market.edges():
        forced = market.value(agent, item) + opt_weight(market.without([agent], [item]))
        if forced == opt:
            legal.add((agent, item))
    return legal


def always_covered_vertices(
    market: Market, opt: Fraction = None
) -> Tuple[Set[str], Set[str]]:
    """Agents and items covered by every maximum-weight matching.

    A vertex is always covered iff deleting it lowers the optimum.

    Returns
    -------
    tuple
        (agent set, item set)
    """

    if opt is None:
        opt = opt_weight(market)

    agents = {a for a in market.agents if opt_weight(market.without(agents=[a])) < opt}
    items = {i for i in market.items if opt_weight(market.without(items=[i])) < opt}
    return agents, items


def prune_uncovered_items(market: Market) -> Tuple[Market, List[str]]:
    """Remove items that some maximum-weight matching leaves uncovered.

    Items are examined in descending id order and removed while the optimum is unchanged,
    until every remaining item is covered by every maximum-weight matching.

    Parameters
    ----------
    market : Market
        The market.

    Returns
    -------
    tuple
        (pruned market, removed item ids in removal order)
    """

    opt = opt_weight(market)
    current = market
    removed = []

    changed = True
    while changed:
        changed = False
        for item in reversed(current.items):
            candidate = current.without(items=[item])
            if opt_weight(candidate) == opt:
                current = candidate
                removed.append(item)
                changed = True

    if removed:
        logger.debug(f"  -- pruned items never needed by a maximum matching: {removed}")

    pruned = Market(current.agents, current.items, current.valuations, market.order)
    return pruned, removed


def enumerate_max_matchings(market: Market, max_side: int = 20) -> List[Matching]:
    """All maximum-weight matchings, zero-weight pairs included.

    Depth-first over agents (unmatched first, then items in id order) with an optimistic
    bound on the remaining agents.

    Parameters
    ----------
    market : Market
        The market.
    max_side : int
        Largest accepted number of agents and of items.

    Returns
    -------
    list of Matching
        Every maximum-weight matching, in discovery order.

    Raises
    ------
    InstanceTooLargeError
        If either side exceeds max_side.
    """

    side = max(len(market.agents), len(market.items))
    if side > max_side:
        logger.error(f"Enumeration refused: {side} vertices on one side, limit is {max_side}")
        raise InstanceTooLargeError(
            f"EFDP:: instance too large for enumeration ({side} > {max_side})", side, max_side
        )

    opt = opt_weight(market)
    agents = market.agents

    # optimistic[k] bounds the weight the agents k.. can still add
    optimistic = [Fraction(0)] * (len(agents) + 1)
    for k in range(len(agents) - 1, -1, -1):
        best = max((market.value(agents[k], item) for item in market.items), default=Fraction(0))
        optimistic[k] = optimistic[k + 1] + best

    found = []

    def extend(k: int, used: FrozenSet[str], pairs: Tuple, weight: Fraction) -> None:
        if weight + optimistic[k] < opt:
            return
        if k == len(agents):
            if weight == opt:
                found.append(Matching(pairs))
            return
        agent = agents[k]
        extend(k + 1, used, pairs, weight)
        for item in market.items:
            if item in used:
                continue
            extend(
                k + 1,
                used | {item},
                pairs + ((agent, item),),
                weight + market.value(agent, item),
            )

    extend(0, frozenset(), (), Fraction(0))
    return found


def analyze_market(market: Market) -> MarketAnalysis:
    """Optimum, legal edges and always-covered vertices of a market."""

    opt = opt_weight(market)
    agents, items = always_covered_vertices(market, opt)
    return MarketAnalysis(
        opt_weight=opt,
        legal_edges=frozenset(legal_edges(market, opt)),
        always_covered_agents=frozenset(agents),
        always_covered_items=frozenset(items),
    )
