#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: oracles.py
Description: Brute-force oracles for small instances: optimal static envy-free revenue, the
exhaustive adversary over arrival orders and tie-break decisions, optimal grid-priced revenue
under a fixed order, exhaustive strongly envy-free dynamic revenue and minimum vertex cover.
"""

# Standard Libraries Imports
import itertools
import logging
import traceback
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, partial
from threading import Thread
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

# Local Imports
from covering import ZERO, DifferenceConstraintSystem, solve_difference_constraints
from envy import (
    NOT_OFFERED,
    EnvyNotion,
    Offer,
    revenue,
    social_welfare,
    summarize_verification,
)
from errors import InstanceTooLargeError, SchemeFailure
from market import Market, format_rational
from matching import opt_weight
from policy import ReplayPolicy, policy_from_name

logger = logging.getLogger("Oracles")

THREAD_CHUNKS = 4


def _guard(size: int, limit: int, what: str) -> None:
    if size > limit:
        logger.error(f"{what} refused: size {size} exceeds limit {limit}")
        raise InstanceTooLargeError(
            f"EFDP:: instance too large for {what} ({size} > {limit})", size, limit
        )


def brute_force_vertex_cover(vertices: Sequence, edges: Iterable[Tuple]) -> Tuple[int, Tuple]:
    """Minimum vertex cover by trying subsets of increasing size.

    Returns
    -------
    tuple
        (size, first cover found in combination order)
    """

    edges = [tuple(edge) for edge in edges]
    for k in range(len(vertices) + 1):
        for subset in itertools.combinations(vertices, k):
            chosen = set(subset)
            if all(u in chosen or w in chosen for u, w in edges):
                return k, subset
    return len(vertices), tuple(vertices)


@dataclass
class StaticRevenueResult:
    revenue: Fraction
    prices: Dict[str, Offer]
    allocation: Dict[str, Optional[str]]

    def export(self) -> dict:
        return {
            "revenue": format_rational(self.revenue),
            "prices": {
                item: "NOT_OFFERED" if price is NOT_OFFERED else format_rational(price)
                for item, price in self.prices.items()
            },
            "allocation": dict(self.allocation),
        }


def _static_prices_for(market: Market, allocation: Dict[str, Optional[str]]):
    """Revenue-maximal envy-free prices of the sold items for a fixed allocation, or None."""

    sold = {item: agent for agent, item in allocation.items() if item is not None}
    system = DifferenceConstraintSystem()

    for item, agent in sold.items():
        var = ("price", item)
        system.add(ZERO, var, -market.value(agent, item))
        system.add(var, ZERO, 0)

    for agent in market.agents:
        own = allocation.get(agent)
        for item in sold:
            if item == own:
                continue
            if own is None:
                # p(j) >= v_a(j)
                system.add(("price", item), ZERO, market.value(agent, item))
            else:
                system.add(
                    ("price", item),
                    ("price", own),
                    market.value(agent, item) - market.value(agent, own),
                )

    solution = solve_difference_constraints(system)
    if not solution.feasible:
        return None
    return {item: solution.assignment[("price", item)] for item in sold}


def oracle_static_ef_revenue(market: Market, max_side: int = 7) -> StaticRevenueResult:
    """
    Optimal revenue of a static envy-free pricing.

    Enumerates every allocation (each agent gets a distinct item or nothing) whose welfare can
    still beat the best revenue found, and prices it optimally by difference constraints.
    Unsold items are not offered.

    :param market: The market.
    :param max_side: Largest accepted number of agents and of items.
    :raises InstanceTooLargeError: Above max_side.
    """

    _guard(max(len(market.agents), len(market.items)), max_side, "static envy-free revenue")

    agents = market.agents
    optimistic = [Fraction(0)] * (len(agents) + 1)
    for k in range(len(agents) - 1, -1, -1):
        top = max((market.value(agents[k], i) for i in market.items), default=Fraction(0))
        optimistic[k] = optimistic[k + 1] + top

    best = StaticRevenueResult(
        Fraction(0), {i: NOT_OFFERED for i in market.items}, {a: None for a in agents}
    )

    def extend(k: int, allocation: Dict[str, Optional[str]], welfare: Fraction) -> None:
        nonlocal best
        if welfare + optimistic[k] <= best.revenue:
            return
        if k == len(agents):
            prices = _static_prices_for(market, allocation)
            if prices is None:
                return
            total = sum(prices.values(), Fraction(0))
            if total > best.revenue:
                offers = {i: prices.get(i, NOT_OFFERED) for i in market.items}
                best = StaticRevenueResult(total, offers, dict(allocation))
            return

        agent = agents[k]
        used = set(allocation.values())
        for item in market.items:
            if item in used or market.value(agent, item) == 0:
                continue
            allocation[agent] = item
            extend(k + 1, allocation, welfare + market.value(agent, item))
        allocation[agent] = None
        extend(k + 1, allocation, welfare)
        del allocation[agent]

    extend(0, {}, Fraction(0))
    logger.debug(f"  -- static envy-free revenue: {format_rational(best.revenue)}")
    return best


@dataclass
class AdversaryReport:
    """Outcome spread of a scheme over all arrival orders and decision paths."""

    scheme: str
    opt_weight: Fraction
    records: List[dict] = field(default_factory=list)
    failures: List[dict] = field(default_factory=list)

    @property
    def branches(self) -> int:
        return len(self.records) + len(self.failures)

    @property
    def welfare_values(self) -> List[Fraction]:
        return sorted({r["welfare"] for r in self.records})

    @property
    def revenue_values(self) -> List[Fraction]:
        return sorted({r["revenue"] for r in self.records})

    @property
    def min_welfare(self) -> Optional[Fraction]:
        return min(self.welfare_values, default=None)

    @property
    def max_welfare(self) -> Optional[Fraction]:
        return max(self.welfare_values, default=None)

    @property
    def min_revenue(self) -> Optional[Fraction]:
        return min(self.revenue_values, default=None)

    @property
    def max_revenue(self) -> Optional[Fraction]:
        return max(self.revenue_values, default=None)

    @property
    def all_pass(self) -> Dict[str, bool]:
        return {
            notion.value: all(r["envy_free"][notion.value] for r in self.records)
            for notion in EnvyNotion
        }

    def export(self) -> dict:
        fmt = lambda x: None if x is None else format_rational(x)
        return {
            "scheme": self.scheme,
            "opt_weight": fmt(self.opt_weight),
            "branches": self.branches,
            "orders": len({tuple(r["order"]) for r in self.records + self.failures}),
            "welfare": {
                "min": fmt(self.min_welfare),
                "max": fmt(self.max_welfare),
                "values": [fmt(x) for x in self.welfare_values],
            },
            "revenue": {
                "min": fmt(self.min_revenue),
                "max": fmt(self.max_revenue),
                "values": [fmt(x) for x in self.revenue_values],
            },
            "all_pass": self.all_pass,
            "failures": self.failures,
        }


def explore_decisions(
    runner, order: Sequence[str], tie: Optional[str] = None
) -> Tuple[List[dict], List[dict]]:
    """Run a scheme along order for every tie-break decision path.

    Depth-first over decision prefixes: a run replays its prefix, then takes option 0, and
    every untaken option beyond the prefix is queued. A named tie policy ("lex", "seed:<k>")
    gives a single run instead.
    """

    records = []
    failures = []
    stack = [()]
    while stack:
        prefix = stack.pop()
        if tie is None:
            policy = ReplayPolicy(prefix, runner.decline_at_zero)
        else:
            policy = policy_from_name(tie, runner.decline_at_zero)
        try:
            trace = runner.run(order, policy)
            records.append(
                {
                    "order": list(trace.order),
                    "decisions": list(getattr(policy, "taken", [])),
                    "welfare": social_welfare(trace),
                    "revenue": revenue(trace),
                    "envy_free": summarize_verification(trace),
                }
            )
        except SchemeFailure as e:
            failures.append(
                {
                    "order": list(order),
                    "decisions": list(getattr(policy, "taken", [])),
                    "message": str(e),
                }
            )
        if tie is not None:
            continue
        for depth in range(len(prefix), len(policy.branching)):
            for alternative in range(1, policy.branching[depth]):
                stack.append(tuple(policy.taken[:depth]) + (alternative,))
    return records, failures


def oracle_exhaustive_adversary(
    market: Market,
    runner,
    max_agents: int = 6,
    threads: bool = False,
    name: str = None,
    orders: Optional[List[Sequence[str]]] = None,
    tie: Optional[str] = None,
) -> AdversaryReport:
    """Run a prepared scheme under every arrival order and every tie-break decision path.

    Schemes that fix their own order are run along it only.

    Parameters
    ----------
    market : Market
        The market.
    runner : scheme
        Prepared scheme exposing run(order, policy), fixed_order and decline_at_zero.
    max_agents : int
        Largest accepted number of agents.
    threads : bool
        Spread the arrival orders over worker threads.
    name : str, optional
        Scheme name for the report.
    orders : list, optional
        Arrival orders to explore instead of all permutations.
    tie : str, optional
        Named tie policy replacing the decision tree exploration.

    Returns
    -------
    AdversaryReport
        Objectives and verifier outcomes of every branch, sorted by order and decisions.

    Raises
    ------
    InstanceTooLargeError
        Above max_agents.
    RuntimeError
        If a worker thread crashed.
    """

    def start_thread(chunk: List[Tuple[str, ...]]) -> None:
        """Worker body. Necessary for catching errors raised inside threads."""

        try:
            for order in chunk:
                found, failed = explore_decisions(runner, order, tie)
                results.append((found, failed))
        except Exception:
            thread_errors.append(traceback.format_exc())

    _guard(len(market.agents), max_agents, "exhaustive adversary")

    if runner.fixed_order is not None:
        orders = [tuple(runner.fixed_order)]
    elif orders is None:
        orders = list(itertools.permutations(market.agents))
    else:
        orders = [tuple(order) for order in orders]

    results: List[Tuple[List[dict], List[dict]]] = []
    thread_errors: List[str] = []

    logger.info(f"  -- adversary over {len(orders)} arrival orders")
    if threads:
        workers = [
            Thread(target=partial(start_thread, orders[k::THREAD_CHUNKS]))
            for k in range(THREAD_CHUNKS)
        ]
        for worker in workers:
            worker.start()
        for worker in workers:
            worker.join()
    else:
        start_thread(orders)

    if thread_errors:
        for message in thread_errors:
            logger.error(f"Adversary worker failed:\n{message}")
        raise RuntimeError("Adversary workers failed. Exiting exploration.")

    report = AdversaryReport(name or type(runner).__name__, opt_weight(market))
    for found, failed in results:
        report.records.extend(found)
        report.failures.extend(failed)

    canonical = lambda r: ([market.agent_rank[a] for a in r["order"]], r["decisions"])
    report.records.sort(key=canonical)
    report.failures.sort(key=canonical)
    return report


def oracle_expost_revenue_opt(
    market: Market,
    order: Iterable[str],
    grid: Iterable[Fraction],
    notion: EnvyNotion = EnvyNotion.EX_POST,
    max_agents: int = 16,
) -> Fraction:
    """Best revenue of a grid-priced dynamic schedule with seller tie-breaking.

    Only schedules offering the item sold at a step (or nothing) are searched: any further
    offer only adds envy constraints. Items with identical valuation columns are merged, so a
    state is the step plus, per group, the number sold and the lowest sale price so far.
    EX_POST compares with offers already seen; EX_ANTE is the same search on the reversed
    order.

    Parameters
    ----------
    market : Market
        The market.
    order : iterable of str
        Arrival order.
    grid : iterable of Fraction
        Candidate prices (NOT_OFFERED is implicit).
    notion : EnvyNotion
        EX_POST or EX_ANTE.
    max_agents : int
        Largest accepted number of agents.

    Returns
    -------
    Fraction
        Optimal revenue over the grid.
    """

    _guard(len(market.agents), max_agents, "grid revenue search")
    if notion not in (EnvyNotion.EX_POST, EnvyNotion.EX_ANTE):
        raise ValueError(f"EFDP:: grid revenue search supports ex-post and ex-ante, not {notion}")

    sequence = list(order)
    if notion is EnvyNotion.EX_ANTE:
        sequence.reverse()
    prices = sorted({Fraction(p) for p in grid if p is not NOT_OFFERED and p >= 0})

    columns: Dict[tuple, List[str]] = {}
    for item in market.items:
        columns.setdefault(tuple(market.value(a, item) for a in market.agents), []).append(item)
    groups = list(columns.values())
    sizes = [len(g) for g in groups]
    values = {a: [market.value(a, g[0]) for g in groups] for a in market.agents}

    @lru_cache(maxsize=None)
    def best(t: int, state: tuple) -> Optional[Fraction]:
        if t == len(sequence):
            return Fraction(0)
        agent = sequence[t]
        exposure = max(
            (values[agent][g] - low for g, (sold, low) in enumerate(state) if sold), default=None
        )

        result = None
        if exposure is None or exposure <= 0:
            result = best(t + 1, state)

        for g, (sold, low) in enumerate(state):
            if sold == sizes[g]:
                continue
            value = values[agent][g]
            for price in prices:
                if price > value:
                    break
                if exposure is not None and value - price < exposure:
                    continue
                after = list(state)
                after[g] = (sold + 1, price if low is None else min(low, price))
                rest = best(t + 1, tuple(after))
                if rest is not None and (result is None or price + rest > result):
                    result = price + rest
        return result

    value = best(0, tuple((0, None) for _ in groups))
    best.cache_clear()
    return value if value is not None else Fraction(0)


def oracle_strong_revenue_grid(
    market: Market, grid: Iterable[Fraction], max_side: int = 3
) -> Fraction:
    """
    Best revenue of a strongly envy-free dynamic pricing over a price grid.

    Exhaustive over arrival orders, full offer vectors per step (every grid price or
    NOT_OFFERED per available item) and seller choices among maximizers, with incremental
    envy checks and a welfare bound.

    :param market: The market.
    :param grid: Candidate prices.
    :param max_side: Largest accepted number of agents and of items.
    :raises InstanceTooLargeError: Above max_side.
    """

    _guard(max(len(market.agents), len(market.items)), max_side, "strong grid search")

    prices = sorted({Fraction(p) for p in grid if p is not NOT_OFFERED})
    options: List[Offer] = [NOT_OFFERED] + prices
    top = {
        a: max((market.value(a, i) for i in market.items), default=Fraction(0))
        for a in market.agents
    }
    best = Fraction(0)

    def search(order, t, available, seen, outcomes, total) -> None:
        nonlocal best
        if t == len(order):
            best = max(best, total)
            return
        if total + sum(top[a] for a in order[t:]) <= best:
            return

        agent = order[t]
        exposure = max(
            (market.value(agent, i) - p for offers in seen for i, p in offers), default=None
        )

        for vector in itertools.product(options, repeat=len(available)):
            offers = [(i, p) for i, p in zip(available, vector) if p is not NOT_OFFERED]
            if any(market.value(b, i) - p > u for b, u in outcomes.items() for i, p in offers):
                continue

            gains = [(market.value(agent, i) - p, i, p) for i, p in offers]
            top_gain = max((g for g, _, _ in gains), default=None)
            choices = []
            if top_gain is None or top_gain <= 0:
                choices.append((Fraction(0), None, Fraction(0)))
            if top_gain is not None and top_gain >= 0:
                choices.extend(c for c in gains if c[0] == top_gain)

            for gain, item, price in choices:
                if exposure is not None and exposure > gain:
                    continue
                search(
                    order,
                    t + 1,
                    tuple(i for i in available if i != item),
                    seen + [offers],
                    {**outcomes, agent: gain},
                    total + price,
                )

    for order in itertools.permutations(market.agents):
        search(order, 0, tuple(market.items), [], {}, Fraction(0))
    return best
