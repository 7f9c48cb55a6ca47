#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: envy.py
Description: Defines the Trace class recording a dynamic pricing run (arrivals, offers and purchases),
the four envy-freeness notions with their comparison windows, the envy verifiers, objectives
and export/import of traces.
"""

# Standard Libraries Imports
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple, TypeVar, Union

# Local Imports
from errors import MarketParseError, TraceError
from market import Market, format_rational, parse_rational

TTrace = TypeVar("TTrace", bound="Trace")

logger = logging.getLogger("Trace")


class _NotOffered:
    """Offer sentinel: the item cannot be bought at this step and causes no envy."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NOT_OFFERED"

    def __reduce__(self):
        return (_NotOffered, ())


NOT_OFFERED = _NotOffered()

Offer = Union[Fraction, _NotOffered]


class EnvyNotion(Enum):
    STRONG = "strong"
    EX_POST = "expost"
    EX_ANTE = "exante"
    WEAK = "weak"


def time_window(notion: EnvyNotion, position: int, n: int) -> range:
    """Steps an agent arriving at position compares her purchase against.

    STRONG: every step. EX_POST: steps up to and including her own (offers she has already
    seen; prices of the ex-post schemes only fall). EX_ANTE: her step and every later one.
    WEAK: her own step only.

    Parameters
    ----------
    notion : EnvyNotion
        Envy-freeness notion.
    position : int
        Arrival position, 1 <= position <= n.
    n : int
        Number of steps.

    Returns
    -------
    range
        The window as a range of 1-based steps.
    """

    if not 1 <= position <= n:
        raise ValueError(f"EFDP:: position {position} outside 1..{n}")
    if notion is EnvyNotion.STRONG:
        return range(1, n + 1)
    if notion is EnvyNotion.EX_POST:
        return range(1, position + 1)
    if notion is EnvyNotion.EX_ANTE:
        return range(position, n + 1)
    return range(position, position + 1)


@dataclass
class Step:
    agent: str
    available: Tuple[str, ...]
    offers: Dict[str, Offer]
    purchase: Optional[str] = None

    @property
    def price(self) -> Optional[Fraction]:
        """Sale price, None when nothing was bought."""

        if self.purchase is None:
            return None
        return self.offers[self.purchase]

    def rational_offers(self) -> List[Tuple[str, Fraction]]:
        return [(i, self.offers[i]) for i in self.available if self.offers[i] is not NOT_OFFERED]


@dataclass(frozen=True)
class EnvyWitness:
    """First envy violation: agent prefers item at step by gap over her own outcome.

    item None means her own purchase left her with negative utility.
    """

    agent: str
    step: Optional[int]
    item: Optional[str]
    gap: Fraction

    def export(self) -> dict:
        return {
            "agent": self.agent,
            "step": self.step,
            "item": self.item,
            "gap": format_rational(self.gap),
        }


class Trace:
    """Sequence of steps of a dynamic pricing run over a market.

    Attributes
    ----------
    market : Market
        The market the run was made on.
    steps : list of Step
        One step per arriving agent, in arrival order.
    """

    def __init__(self: TTrace, market: Market, steps: Iterable[Step] = ()) -> None:
        self.market = market
        self.steps = list(steps)

    def __len__(self: TTrace) -> int:
        return len(self.steps)

    def __repr__(self: TTrace) -> str:
        return f"Trace(steps={len(self.steps)}, market={self.market})"

    def add_step(
        self: TTrace,
        agent: str,
        available: Iterable[str],
        offers: Dict[str, Offer],
        purchase: Optional[str],
    ) -> Step:
        step = Step(agent, tuple(available), dict(offers), purchase)
        self.steps.append(step)
        return step

    @property
    def order(self: TTrace) -> List[str]:
        return [step.agent for step in self.steps]

    def allocation(self: TTrace) -> Dict[str, Optional[str]]:
        return {step.agent: step.purchase for step in self.steps}

    def check(self: TTrace) -> None:
        """Raise TraceError unless the trace invariants hold.

        Agents are known and appear once, offers cover exactly the available items, purchases
        are available and priced, and each step removes exactly the purchased item.
        """

        seen = set()
        previous = None
        for t, step in enumerate(self.steps, start=1):
            if step.agent not in self.market.agent_rank:
                raise TraceError(f"EFDP:: step {t}: unknown agent '{step.agent}'")
            if step.agent in seen:
                raise TraceError(f"EFDP:: step {t}: agent '{step.agent}' arrives twice")
            seen.add(step.agent)

            available = set(step.available)
            if len(available) != len(step.available):
                raise TraceError(f"EFDP:: step {t}: repeated available item")
            if not available <= set(self.market.items):
                raise TraceError(f"EFDP:: step {t}: unknown available item")
            if set(step.offers) != available:
                raise TraceError(f"EFDP:: step {t}: offers do not match available items")
            for item, offer in step.offers.items():
                if offer is not NOT_OFFERED and offer < 0:
                    raise TraceError(f"EFDP:: step {t}: negative price for '{item}'")

            if step.purchase is not None:
                if step.purchase not in available:
                    raise TraceError(f"EFDP:: step {t}: purchase '{step.purchase}' not available")
                if step.offers[step.purchase] is NOT_OFFERED:
                    raise TraceError(f"EFDP:: step {t}: purchase '{step.purchase}' not offered")

            if previous is not None:
                expected = set(previous.available) - {previous.purchase}
                if available != expected:
                    raise TraceError(f"EFDP:: step {t}: available items do not follow step {t - 1}")
            previous = step

    def export(self: TTrace) -> dict:
        """Export the trace to the trace JSON layout."""

        return {
            "market": self.market.export(),
            "steps": [
                {
                    "agent": step.agent,
                    "available": list(step.available),
                    "offers": {
                        item: "NOT_OFFERED" if offer is NOT_OFFERED else format_rational(offer)
                        for item, offer in step.offers.items()
                    },
                    "purchase": step.purchase,
                }
                for step in self.steps
            ],
        }

    @classmethod
    def load(cls, data: dict) -> "Trace":
        """Create a trace from the trace JSON layout and check its invariants.

        Raises
        ------
        TraceError
            If the layout is malformed or an invariant fails.
        """

        if not isinstance(data, dict) or "market" not in data or "steps" not in data:
            raise TraceError("EFDP:: trace must be an object with 'market' and 'steps'")
        try:
            market = Market.load(data["market"])
        except MarketParseError as e:
            raise TraceError(f"EFDP:: trace market: {e}") from e

        if not isinstance(data["steps"], list):
            raise TraceError("EFDP:: steps: expected a list")

        trace = cls(market)
        for t, raw in enumerate(data["steps"], start=1):
            try:
                if not isinstance(raw["agent"], str):
                    raise TypeError("agent must be a string")
                available = raw["available"]
                if not isinstance(available, list) or not all(
                    isinstance(item, str) for item in available
                ):
                    raise TypeError("available must be a list of item ids")
                if not isinstance(raw["offers"], dict):
                    raise TypeError("offers must be an object")
                if raw.get("purchase") is not None and not isinstance(raw["purchase"], str):
                    raise TypeError("purchase must be an item id or null")
                offers = {
                    item: NOT_OFFERED
                    if value == "NOT_OFFERED"
                    else parse_rational(value, f"steps[{t}].offers.{item}")
                    for item, value in raw["offers"].items()
                }
                trace.add_step(raw["agent"], available, offers, raw.get("purchase"))
            except (KeyError, TypeError, AttributeError, MarketParseError) as e:
                raise TraceError(f"EFDP:: step {t} malformed: {e}") from e

        trace.check()
        return trace


def social_welfare(trace: Trace) -> Fraction:
    """Sum of the buyers' valuations of their purchases."""

    return sum(
        (trace.market.value(step.agent, step.purchase) for step in trace.steps), Fraction(0)
    )


def revenue(trace: Trace) -> Fraction:
    """Sum of sale prices."""

    return sum((step.price for step in trace.steps if step.purchase is not None), Fraction(0))


def verify_envy_free(trace: Trace, notion: EnvyNotion) -> Optional[EnvyWitness]:
    """Check a trace against an envy-freeness notion.

    A buyer's own utility is taken at her step and sale price. Every rational offer of an
    available item at a step of her window must give her no more. Buyers need non-negative
    utility, agents who bought nothing must see no offer with positive utility.

    Parameters
    ----------
    trace : Trace
        The trace to verify.
    notion : EnvyNotion
        The notion whose window is used.

    Returns
    -------
    EnvyWitness or None
        The first violation in step, window and item order; None if envy-free.

    Raises
    ------
    TraceError
        If the trace is malformed.
    """

    trace.check()
    market = trace.market
    n = len(trace.steps)

    for position, step in enumerate(trace.steps, start=1):
        agent = step.agent
        if step.purchase is None:
            own = Fraction(0)
        else:
            own = market.value(agent, step.purchase) - step.price
            if own < 0:
                return EnvyWitness(agent, position, None, -own)

        for t in time_window(notion, position, n):
            for item, price in trace.steps[t - 1].rational_offers():
                if t == position and item == step.purchase:
                    continue
                gap = market.value(agent, item) - price - own
                if gap > 0:
                    return EnvyWitness(agent, t, item, gap)
    return None


def verify_static_envy_free(
    market: Market, prices: Dict[str, Offer], allocation: Dict[str, Optional[str]]
) -> Optional[EnvyWitness]:
    """Static envy check: every agent's item maximizes her utility over all priced items."""

    for agent in market.agents:
        item = allocation.get(agent)
        if item is None:
            own = Fraction(0)
        else:
            if prices.get(item, NOT_OFFERED) is NOT_OFFERED:
                raise TraceError(f"EFDP:: allocated item '{item}' has no price")
            own = market.value(agent, item) - prices[item]
            if own < 0:
                return EnvyWitness(agent, None, None, -own)

        for other in market.items:
            price = prices.get(other, NOT_OFFERED)
            if price is NOT_OFFERED or other == item:
                continue
            gap = market.value(agent, other) - price - own
            if gap > 0:
                return EnvyWitness(agent, None, other, gap)
    return None


def price_monotonicity(trace: Trace, direction: str) -> Optional[Tuple[str, int]]:
    """First (item, step) where an offer moves against direction.

    direction is "non-increasing" or "non-decreasing"; NOT_OFFERED ranks above every price.
    Only items available at both consecutive steps are compared.
    """

    if direction not in ("non-increasing", "non-decreasing"):
        raise ValueError(f"EFDP:: unknown direction '{direction}'")

    def rank(offer: Offer) -> Tuple[int, Fraction]:
        if offer is NOT_OFFERED:
            return (1, Fraction(0))
        return (0, offer)

    for t in range(1, len(trace.steps)):
        before, after = trace.steps[t - 1], trace.steps[t]
        for item in after.available:
            if item not in before.offers:
                continue
            old, new = rank(before.offers[item]), rank(after.offers[item])
            if direction == "non-increasing" and new > old:
                return item, t + 1
            if direction == "non-decreasing" and new < old:
                return item, t + 1
    return None


def notion_from_name(name: str) -> EnvyNotion:
    try:
        return EnvyNotion(name)
    except ValueError:
        raise ValueError(f"EFDP:: unknown envy notion '{name}'") from None


def summarize_verification(trace: Trace) -> Dict[str, bool]:
    """Verifier outcome for every notion."""

    return {notion.value: verify_envy_free(trace, notion) is None for notion in EnvyNotion}


def describe(value: Any) -> str:
    if value is NOT_OFFERED:
        return "NOT_OFFERED"
    if isinstance(value, Fraction):
        return format_rational(value)
    return str(value)
