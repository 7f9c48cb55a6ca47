#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: schemes.py
Description: Registry of the pricing schemes selectable by name.
"""

# Standard Libraries Imports
import logging
from fractions import Fraction
from typing import Dict, Optional

# Local Imports
from envy import EnvyNotion, Offer
from market import Market
from revenue import (
    ExAnteRevenueScheme,
    ExPostRevenueScheme,
    StaticPriceScheme,
    WeakRevenueScheme,
)
from welfare import WelfareScheme

logger = logging.getLogger("Schemes")

SCHEMES = (
    "welfare-expost",
    "welfare-exante",
    "revenue-expost",
    "revenue-exante",
    "revenue-weak",
    "static",
)

# schemes that price along an order chosen by the caller
ORDER_DRIVEN = ("welfare-expost", "welfare-exante", "revenue-weak", "static")


def prepare_scheme(
    market: Market,
    name: str,
    delta: Optional[Fraction] = None,
    discount: Fraction = Fraction(0),
    prices: Optional[Dict[str, Offer]] = None,
    strict: bool = True,
    halvings: int = 64,
):
    """
    Build a scheme object ready to run.

    Every scheme exposes run(order, policy), decline_at_zero and fixed_order.

    :param market: The market.
    :param name: One of SCHEMES.
    :param delta: Overrides delta of revenue-exante.
    :param discount: Price reduction of the revenue schemes.
    :param prices: Posted prices of the static scheme.
    :param strict: Check welfare invariants after every step.
    :param halvings: Margin halving attempts for the refined covering.
    :raises ValueError: Unknown name or missing prices.
    """

    logger.debug(f"  -- preparing scheme {name}")
    if name == "welfare-expost":
        return WelfareScheme(market, EnvyNotion.EX_POST, strict, halvings)
    if name == "welfare-exante":
        return WelfareScheme(market, EnvyNotion.EX_ANTE, strict, halvings)
    if name == "revenue-expost":
        return ExPostRevenueScheme(market, discount)
    if name == "revenue-exante":
        return ExAnteRevenueScheme(market, delta, discount)
    if name == "revenue-weak":
        return WeakRevenueScheme(market, discount)
    if name == "static":
        if prices is None:
            raise ValueError("EFDP:: static scheme needs posted prices")
        return StaticPriceScheme(market, prices)
    raise ValueError(f"EFDP:: unknown scheme '{name}' (expected one of {', '.join(SCHEMES)})")
