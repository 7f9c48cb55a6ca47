#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: market.py
Description: Unit-demand market model. Defines exact rational parsing and formatting,
the Market and ArrivalOrder classes, utilities and market diagnostics.
"""

# Standard Libraries Imports
import json
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar, Union

# Local Imports
from errors import MarketParseError

Rational = Fraction

TMarket = TypeVar("TMarket", bound="Market")
TOrder = TypeVar("TOrder", bound="ArrivalOrder")

RATIONAL_PATTERN = re.compile(r"^-?\d+(/\d+)?$")

logger = logging.getLogger("Market")


def parse_rational(value: Union[str, int, Fraction], field: str = "value") -> Fraction:
    """Parse an exact rational from an integer or a "p/q" string.

    Decimal notation and floats are refused so that no binary rounding can enter the core.

    Parameters
    ----------
    value : str, int or Fraction
        Serialized value.
    field : str
        Name of the field, used in error messages.

    Returns
    -------
    Fraction
        The value in lowest terms.

    Raises
    ------
    MarketParseError
        If the value is not an integer or a "p/q" string with a non-zero denominator.
    """

    if isinstance(value, bool):
        raise MarketParseError(f"EFDP:: {field}: boolean is not a rational value")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str) or not RATIONAL_PATTERN.match(value.strip()):
        raise MarketParseError(f"EFDP:: {field}: '{value}' is not an integer or p/q rational")

    numerator, _, denominator = value.strip().partition("/")
    if denominator and int(denominator) == 0:
        raise MarketParseError(f"EFDP:: {field}: zero denominator in '{value}'")
    return Fraction(int(numerator), int(denominator) if denominator else 1)


def format_rational(value: Fraction) -> str:
    """Serialize a rational as "p" or "p/q"."""

    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class Market:
    """Unit-demand market: agents, items and a complete valuation table.

    Attributes
    ----------
    agents : tuple
        Agent ids in declaration order. The position doubles as the id order used for tie-breaking.
    items : tuple
        Item ids in declaration order.
    valuations : dict
        Map (agent, item) -> Fraction, populated for every pair (missing entries are 0).
    order : tuple or None
        Arrival order stored with the instance, if any.
    """

    def __init__(
        self: TMarket,
        agents: Sequence[str],
        items: Sequence[str],
        valuations: Dict[Tuple[str, str], Fraction] = None,
        order: Optional[Sequence[str]] = None,
    ) -> None:
        self.agents = tuple(agents)
        self.items = tuple(items)

        for kind, ids in (("agent", self.agents), ("item", self.items)):
            if len(set(ids)) != len(ids):
                duplicates = sorted({x for x in ids if ids.count(x) > 1})
                raise MarketParseError(f"EFDP:: duplicate {kind} ids: {duplicates}")

        self.agent_rank = {agent: rank for rank, agent in enumerate(self.agents)}
        self.item_rank = {item: rank for rank, item in enumerate(self.items)}

        valuations = valuations or {}
        for (agent, item), value in valuations.items():
            if agent not in self.agent_rank or item not in self.item_rank:
                raise MarketParseError(f"EFDP:: valuation for unknown pair ({agent}, {item})")
            if value < 0:
                raise MarketParseError(
                    f"EFDP:: valuations.{agent}.{item}: negative valuation {format_rational(value)}"
                )

        self.valuations = {
            (agent, item): Fraction(valuations.get((agent, item), 0))
            for agent in self.agents
            for item in self.items
        }
        self.order = tuple(order) if order is not None else None

    def __repr__(self: TMarket) -> str:
        return f"Market(agents={len(self.agents)}, items={len(self.items)})"

    def __eq__(self: TMarket, other: Any) -> bool:
        if not isinstance(other, Market):
            return NotImplemented
        return (
            self.agents == other.agents
            and self.items == other.items
            and self.valuations == other.valuations
        )

    def value(self: TMarket, agent: str, item: Optional[str]) -> Fraction:
        """Valuation v_a(i); the empty allocation (None) is worth 0."""

        if item is None:
            return Fraction(0)
        return self.valuations[(agent, item)]

    def edges(self: TMarket) -> List[Tuple[str, str]]:
        """All (agent, item) pairs in id order."""

        return [(agent, item) for agent in self.agents for item in self.items]

    def without(self: TMarket, agents: Iterable[str] = (), items: Iterable[str] = ()) -> TMarket:
        """Sub-market induced by deleting the given agents and items.

        Parameters
        ----------
        agents : iterable
            Agents to delete.
        items : iterable
            Items to delete.

        Returns
        -------
        Market
            A new market; declaration order of the surviving ids is kept.
        """

        agents = set(agents)
        items = set(items)
        return self.restrict(
            [a for a in self.agents if a not in agents], [i for i in self.items if i not in items]
        )

    def restrict(self: TMarket, agents: Iterable[str], items: Iterable[str]) -> TMarket:
        """Sub-market induced by the given agents and items (declaration order kept)."""

        keep_agents = set(agents)
        keep_items = set(items)
        agents = [a for a in self.agents if a in keep_agents]
        items = [i for i in self.items if i in keep_items]
        return Market(
            agents,
            items,
            {(a, i): self.valuations[(a, i)] for a in agents for i in items},
        )

    def export(self: TMarket) -> dict:
        """Export the market to the instance JSON layout."""

        data = {
            "agents": list(self.agents),
            "items": list(self.items),
            "valuations": {
                agent: {
                    item: format_rational(self.valuations[(agent, item)]) for item in self.items
                }
                for agent in self.agents
            },
        }
        if self.order is not None:
            data["order"] = list(self.order)
        return data

    @classmethod
    def load(cls, data: dict) -> "Market":
        """Create a market from the instance JSON layout.

        Parameters
        ----------
        data : dict
            Decoded instance JSON.

        Returns
        -------
        Market
            The parsed market.

        Raises
        ------
        MarketParseError
            If a field is missing or malformed.
        """

        if not isinstance(data, dict):
            raise MarketParseError("EFDP:: instance must be a JSON object")

        for field in ("agents", "items"):
            if field not in data:
                raise MarketParseError(f"EFDP:: {field}: missing field")
            if not isinstance(data[field], list) or not all(
                isinstance(x, str) for x in data[field]
            ):
                raise MarketParseError(f"EFDP:: {field}: expected a list of string ids")

        raw = data.get("valuations", {})
        if not isinstance(raw, dict):
            raise MarketParseError("EFDP:: valuations: expected an object keyed by agent id")

        agents = set(data["agents"])
        items = set(data["items"])
        valuations = {}
        for agent, row in raw.items():
            if agent not in agents:
                raise MarketParseError(f"EFDP:: valuations.{agent}: unknown agent")
            if not isinstance(row, dict):
                raise MarketParseError(f"EFDP:: valuations.{agent}: expected an object")
            for item, value in row.items():
                if item not in items:
                    raise MarketParseError(f"EFDP:: valuations.{agent}.{item}: unknown item")
                field = f"valuations.{agent}.{item}"
                valuations[(agent, item)] = parse_rational(value, field)
                if valuations[(agent, item)] < 0:
                    raise MarketParseError(f"EFDP:: {field}: negative valuation '{value}'")

        order = data.get("order")
        if order is not None:
            ArrivalOrder.check(data["agents"], order)

        return cls(data["agents"], data["items"], valuations, order)


class ArrivalOrder:
    """Arrival order of the agents, the bijection sigma: agents -> 1..n."""

    def __init__(self: TOrder, sequence: Sequence[str]) -> None:
        self.sequence = tuple(sequence)
        self.positions = {agent: t for t, agent in enumerate(self.sequence, start=1)}
        if len(self.positions) != len(self.sequence):
            raise MarketParseError("EFDP:: order: repeated agent")

    def __iter__(self: TOrder):
        return iter(self.sequence)

    def __len__(self: TOrder) -> int:
        return len(self.sequence)

    def __eq__(self: TOrder, other: Any) -> bool:
        if isinstance(other, ArrivalOrder):
            return self.sequence == other.sequence
        return self.sequence == tuple(other)

    def __repr__(self: TOrder) -> str:
        return f"ArrivalOrder({list(self.sequence)})"

    def position(self: TOrder, agent: str) -> int:
        return self.positions[agent]

    @staticmethod
    def check(agents: Iterable[str], sequence: Iterable[str]) -> None:
        """Raise MarketParseError unless sequence is a permutation of agents."""

        sequence = list(sequence)
        if len(sequence) != len(set(sequence)) or set(sequence) != set(agents):
            raise MarketParseError("EFDP:: order: not a permutation of the agents")

    @classmethod
    def of(cls, market: Market, sequence: Iterable[str]) -> "ArrivalOrder":
        """Arrival order validated against the agents of market."""

        sequence = list(sequence)
        cls.check(market.agents, sequence)
        return cls(sequence)


@dataclass(frozen=True)
class PricingParameters:
    """Price shift constants: delta separates tight from non-tight edges, epsilon orders components."""

    delta: Fraction
    epsilon: Fraction


@dataclass(frozen=True)
class Diagnostic:
    level: str
    message: str
    subject: Optional[str] = None


def load_market(text: str) -> Market:
    """Parse serialized instance JSON into a Market."""

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MarketParseError(f"EFDP:: malformed JSON: {e}") from e
    return Market.load(data)


def utility(market: Market, agent: str, item: str, price: Fraction) -> Fraction:
    """
    Utility u_a(i) = v_a(i) - p of agent for item at price.

    :param market: The market holding the valuations.
    :param agent: Agent id.
    :param item: Item id.
    :param price: Offered price.
    :raises ValueError: If the agent or the item is unknown.
    """

    if agent not in market.agent_rank:
        raise ValueError(f"EFDP:: unknown agent '{agent}'")
    if item not in market.item_rank:
        raise ValueError(f"EFDP:: unknown item '{item}'")
    return market.valuations[(agent, item)] - price


def validate_market(market: Market) -> List[Diagnostic]:
    """
    Diagnose a market without modifying it.

    Empty agent or item sets are errors, agents valuing every item at 0 are warnings.
    Size statistics are logged.

    :param market: The market to inspect.
    :return: List of diagnostics, empty for a well-formed market.
    """

    diagnostics = []

    if not market.agents:
        diagnostics.append(Diagnostic("error", "market has no agents"))
    if not market.items:
        diagnostics.append(Diagnostic("error", "market has no items"))

    for agent in market.agents:
        if market.items and all(market.value(agent, item) == 0 for item in market.items):
            diagnostics.append(
                Diagnostic("warning", f"agent {agent} values every item at 0", agent)
            )

    positive = sum(1 for value in market.valuations.values() if value > 0)
    logger.info(f"  -- agents: {len(market.agents)}, items: {len(market.items)}")
    logger.info(f"  -- positive valuations: {positive} of {len(market.valuations)}")

    for diagnostic in diagnostics:
        if diagnostic.level == "error":
            logger.error(diagnostic.message)
        else:
            logger.warning(diagnostic.message)

    return diagnostics
