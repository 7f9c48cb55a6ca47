#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: policy.py
Description: Agent behaviour. The arriving agent buys a utility maximizing offer; tie-break
policies resolve ties between maximizers and the take-or-decline choice at zero utility.
"""

# Standard Libraries Imports
import logging
import random
from typing import Dict, List, Optional, Sequence

# Local Imports
from envy import NOT_OFFERED, Offer
from market import Market

logger = logging.getLogger("Policy")


class TieBreakPolicy:
    """Base policy.

    Attributes
    ----------
    decline_at_zero : bool
        Whether declining is an option when the best utility is exactly 0.
    """

    def __init__(self, decline_at_zero: bool = True) -> None:
        self.decline_at_zero = decline_at_zero

    def choose(self, agent: str, options: List[Optional[str]]) -> Optional[str]:
        raise NotImplementedError


class LexicographicPolicy(TieBreakPolicy):
    """Pick the first option: the maximizer listed first, taking rather than declining at zero."""

    def choose(self, agent: str, options: List[Optional[str]]) -> Optional[str]:
        return options[0]


class SeededRandomPolicy(TieBreakPolicy):
    def __init__(self, seed: int, decline_at_zero: bool = True) -> None:
        super().__init__(decline_at_zero)
        self.seed = seed
        self.rng = random.Random(seed)

    def choose(self, agent: str, options: List[Optional[str]]) -> Optional[str]:
        return self.rng.choice(options)


class ReplayPolicy(TieBreakPolicy):
    """Replays a prefix of decision indices, then takes option 0.

    Records how many options every decision had, which lets an enumerator expand the
    decision tree branch by branch.
    """

    def __init__(self, prefix: Sequence[int] = (), decline_at_zero: bool = True) -> None:
        super().__init__(decline_at_zero)
        self.prefix = list(prefix)
        self.taken: List[int] = []
        self.branching: List[int] = []

    def choose(self, agent: str, options: List[Optional[str]]) -> Optional[str]:
        depth = len(self.taken)
        index = self.prefix[depth] if depth < len(self.prefix) else 0
        if index >= len(options):
            raise ValueError(f"EFDP:: replayed decision {index} out of range at depth {depth}")
        self.taken.append(index)
        self.branching.append(len(options))
        return options[index]


def agent_choice(
    market: Market, offers: Dict[str, Offer], agent: str, policy: TieBreakPolicy
) -> Optional[str]:
    """
    Item the arriving agent buys, or None.

    With a positive best utility she buys a maximizer; with best utility 0 she buys a maximizer
    or, if the policy allows it, declines; with only negative utilities or no rational offer
    she declines. The policy is consulted only when there is more than one option.

    :param market: The market.
    :param offers: Offer per available item, in availability order.
    :param agent: The arriving agent.
    :param policy: Tie-break policy.
    :return: The bought item or None.
    """

    best = None
    maximizers = []
    for item, price in offers.items():
        if price is NOT_OFFERED:
            continue
        gain = market.value(agent, item) - price
        if best is None or gain > best:
            best = gain
            maximizers = [item]
        elif gain == best:
            maximizers.append(item)

    if best is None or best < 0:
        return None

    options: List[Optional[str]] = list(maximizers)
    if best == 0 and policy.decline_at_zero:
        options.append(None)
    if len(options) == 1:
        return options[0]
    return policy.choose(agent, options)


def policy_from_name(name: str, decline_at_zero: bool = True) -> TieBreakPolicy:
    """Policy from the CLI notation: "lex" or "seed:<k>"."""

    if name == "lex":
        return LexicographicPolicy(decline_at_zero)
    if name.startswith("seed:"):
        try:
            seed = int(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"EFDP:: invalid tie policy '{name}'") from None
        return SeededRandomPolicy(seed, decline_at_zero)
    raise ValueError(f"EFDP:: unknown tie policy '{name}'")
