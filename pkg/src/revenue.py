#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: revenue.py
Description: Revenue maximizing pricing. Seller-chosen orders for ex-post and ex-ante
envy-freeness, single-offer pricing for a predetermined order, static posted prices and the
conversion of strongly envy-free traces into static solutions.
"""

# Standard Libraries Imports
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, TypeVar

# Local Imports
from covering import Covering, compute_parameters, refined_covering
from envy import (
    NOT_OFFERED,
    EnvyNotion,
    Offer,
    Trace,
    revenue,
    verify_envy_free,
    verify_static_envy_free,
)
from errors import PricingError, TraceError
from market import ArrivalOrder, Market, format_rational
from matching import Matching, max_weight_matching, prune_uncovered_items
from policy import LexicographicPolicy, TieBreakPolicy, agent_choice

TRevenue = TypeVar("TRevenue", bound="RevenueScheme")

logger = logging.getLogger("Revenue")


def order_for_revenue(
    market: Market, cov: Covering, notion: EnvyNotion, matching: Matching = None
) -> ArrivalOrder:
    """
    Seller's arrival order.

    EX_POST: agents left uncovered by the matching first (id order), then covered agents by
    decreasing dual. EX_ANTE: covered agents by increasing dual, then uncovered agents.
    Ties follow id order.

    :param market: Pruned market.
    :param cov: Refined covering of market.
    :param notion: EX_POST or EX_ANTE.
    :param matching: Maximum-weight matching; computed if omitted.
    """

    if matching is None:
        matching = max_weight_matching(market)

    uncovered = [a for a in market.agents if matching.item_of(a) is None]
    covered = [a for a in market.agents if matching.item_of(a) is not None]

    if notion is EnvyNotion.EX_POST:
        covered.sort(key=lambda a: (-cov.agent(a), market.agent_rank[a]))
        return ArrivalOrder(uncovered + covered)
    if notion is EnvyNotion.EX_ANTE:
        covered.sort(key=lambda a: (cov.agent(a), market.agent_rank[a]))
        return ArrivalOrder(covered + uncovered)
    raise ValueError(f"EFDP:: no seller order for {notion}")


def _check_discount(market: Market, matching: Matching, discount: Fraction) -> None:
    if discount < 0:
        raise PricingError("EFDP:: discount must be non-negative")
    for agent, item in matching.pairs:
        if discount > market.value(agent, item):
            raise PricingError(
                f"EFDP:: discount {format_rational(discount)} exceeds v({agent}, {item})"
            )


class RevenueScheme:
    """Common part of the revenue schemes: one run per arrival order and policy."""

    notion = EnvyNotion.WEAK
    decline_at_zero = False
    fixed_order: Optional[ArrivalOrder] = None

    def __init__(self: TRevenue, market: Market, discount: Fraction = Fraction(0)) -> None:
        self.market = market
        self.discount = Fraction(discount)

    def offers_for(self: TRevenue, agent: str, position: int, available: List[str]) -> Dict:
        raise NotImplementedError

    def default_policy(self: TRevenue) -> TieBreakPolicy:
        # sellers rely on buyers taking at zero utility
        return LexicographicPolicy(decline_at_zero=self.decline_at_zero)

    def run(
        self: TRevenue,
        order: Optional[Iterable[str]] = None,
        policy: Optional[TieBreakPolicy] = None,
    ) -> Trace:
        """Run along order, or along the scheme's own order when it chooses one."""

        if self.fixed_order is not None:
            order = self.fixed_order
        elif order is None:
            logger.error("Scheme needs a predetermined arrival order")
            raise PricingError("EFDP:: this scheme requires an arrival order")
        order = ArrivalOrder.of(self.market, order)
        policy = policy or self.default_policy()

        trace = Trace(self.market)
        available = list(self.market.items)
        for position, agent in enumerate(order, start=1):
            offers = self.offers_for(agent, position, available)
            choice = agent_choice(self.market, offers, agent, policy)
            trace.add_step(agent, available, offers, choice)
            if choice is not None:
                available.remove(choice)
        return trace


class ExPostRevenueScheme(RevenueScheme):
    """Seller-chosen order; each covered agent is offered only her matched item at full value."""

    notion = EnvyNotion.EX_POST

    def __init__(self, market: Market, discount: Fraction = Fraction(0)) -> None:
        super().__init__(market, discount)
        self.pruned, self.removed = prune_uncovered_items(market)
        self.covering = refined_covering(self.pruned)
        self.matching = max_weight_matching(self.pruned)
        _check_discount(self.pruned, self.matching, self.discount)
        self.fixed_order = order_for_revenue(
            self.pruned, self.covering, EnvyNotion.EX_POST, self.matching
        )

    def offers_for(self, agent: str, position: int, available: List[str]) -> Dict[str, Offer]:
        offers = {item: NOT_OFFERED for item in available}
        item = self.matching.item_of(agent)
        if item is not None and item in offers:
            offers[item] = self.market.value(agent, item) - self.discount
        return offers


class ExAnteRevenueScheme(RevenueScheme):
    """Seller-chosen order, increasing duals; prices just below pi(a) + pi(i).

    Agent a at position s sees x_a at pi(a) + pi(x_a) - delta/2^s and every other remaining
    item epsilon higher, so x_a is her unique maximizer. Revenue stays within n * delta of
    the optimum.
    """

    notion = EnvyNotion.EX_ANTE

    def __init__(
        self, market: Market, delta: Optional[Fraction] = None, discount: Fraction = Fraction(0)
    ) -> None:
        super().__init__(market, discount)
        self.pruned, self.removed = prune_uncovered_items(market)
        self.covering = refined_covering(self.pruned)
        self.matching = max_weight_matching(self.pruned)

        bounds = [
            self.covering.slack(self.pruned, a, i)
            for a, i in self.pruned.edges()
            if not self.covering.is_tight(self.pruned, a, i)
        ]
        bounds += list(self.covering.items.values())

        if delta is None:
            delta = compute_parameters(self.pruned, self.covering).delta
        else:
            delta = Fraction(delta)
            if delta <= 0 or (bounds and delta >= min(bounds)):
                limit = format_rational(min(bounds)) if bounds else "none"
                logger.error(f"delta {format_rational(delta)} outside (0, {limit})")
                raise PricingError(
                    f"EFDP:: delta must satisfy 0 < delta < {limit} "
                    "(smallest non-tight slack or item dual)"
                )

        self.delta = delta
        self.epsilon = delta / 2 ** (len(market.agents) + 1)
        _check_discount(self.pruned, self.matching, self.discount)
        self.fixed_order = order_for_revenue(
            self.pruned, self.covering, EnvyNotion.EX_ANTE, self.matching
        )

    def offers_for(self, agent: str, position: int, available: List[str]) -> Dict[str, Offer]:
        offers = {item: NOT_OFFERED for item in available}
        own = self.matching.item_of(agent)
        if own is None:
            return offers

        base = self.covering.agent(agent) - self.delta / 2**position - self.discount
        for item in available:
            if item not in self.covering.items:
                continue
            price = base + self.covering.item(item)
            offers[item] = price if item == own else price + self.epsilon
            if offers[item] < 0:
                raise PricingError(f"EFDP:: discount drives the price of {item} below 0")
        return offers


class WeakRevenueScheme(RevenueScheme):
    """Predetermined order; each agent is offered only her matched item at full value."""

    notion = EnvyNotion.WEAK

    def __init__(self, market: Market, discount: Fraction = Fraction(0)) -> None:
        super().__init__(market, discount)
        self.matching = max_weight_matching(market)
        _check_discount(market, self.matching, self.discount)

    def offers_for(self, agent: str, position: int, available: List[str]) -> Dict[str, Offer]:
        offers = {item: NOT_OFFERED for item in available}
        item = self.matching.item_of(agent)
        if item is not None:
            offers[item] = self.market.value(agent, item) - self.discount
        return offers


class StaticPriceScheme(RevenueScheme):
    """The same posted prices at every step."""

    notion = EnvyNotion.STRONG

    def __init__(self, market: Market, prices: Dict[str, Offer]) -> None:
        super().__init__(market)
        self.prices = {item: prices.get(item, NOT_OFFERED) for item in market.items}

    def offers_for(self, agent: str, position: int, available: List[str]) -> Dict[str, Offer]:
        return {item: self.prices[item] for item in available}


def run_revenue_ex_post(
    market: Market, policy: TieBreakPolicy = None, discount: Fraction = Fraction(0)
) -> Trace:
    return ExPostRevenueScheme(market, discount).run(policy=policy)


def run_revenue_ex_ante(
    market: Market,
    delta_override: Optional[Fraction] = None,
    policy: TieBreakPolicy = None,
    discount: Fraction = Fraction(0),
) -> Trace:
    return ExAnteRevenueScheme(market, delta_override, discount).run(policy=policy)


def run_revenue_weak(
    market: Market,
    order: Iterable[str],
    policy: TieBreakPolicy = None,
    discount: Fraction = Fraction(0),
) -> Trace:
    return WeakRevenueScheme(market, discount).run(order, policy)


def run_static_prices(
    market: Market, order: Iterable[str], prices: Dict[str, Offer], policy: TieBreakPolicy = None
) -> Trace:
    return StaticPriceScheme(market, prices).run(order, policy)


@dataclass
class StaticSolution:
    prices: Dict[str, Offer]
    allocation: Dict[str, Optional[str]]
    revenue: Fraction

    def export(self) -> dict:
        return {
            "prices": {
                item: "NOT_OFFERED" if price is NOT_OFFERED else format_rational(price)
                for item, price in self.prices.items()
            },
            "allocation": dict(self.allocation),
            "revenue": format_rational(self.revenue),
        }


def static_from_strong(trace: Trace) -> StaticSolution:
    """Static solution with the same allocation and revenue as a strongly envy-free trace.

    Sold items keep their sale price, unsold items are not offered.

    Parameters
    ----------
    trace : Trace
        A strongly envy-free trace.

    Returns
    -------
    StaticSolution
        Prices, allocation and revenue.

    Raises
    ------
    TraceError
        If the trace is not strongly envy-free.
    """

    witness = verify_envy_free(trace, EnvyNotion.STRONG)
    if witness is not None:
        logger.error(f"Trace is not strongly envy-free: {witness}")
        raise TraceError(f"EFDP:: trace fails strong envy-freeness: {witness.export()}")

    prices: Dict[str, Offer] = {item: NOT_OFFERED for item in trace.market.items}
    for step in trace.steps:
        if step.purchase is not None:
            prices[step.purchase] = step.price
    allocation = {agent: None for agent in trace.market.agents}
    allocation.update(trace.allocation())

    solution = StaticSolution(prices, allocation, revenue(trace))
    if verify_static_envy_free(trace.market, prices, allocation) is not None:
        raise TraceError("EFDP:: static conversion is not envy-free")
    return solution
