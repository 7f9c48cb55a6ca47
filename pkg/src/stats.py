#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: stats.py
Description: Logged summaries of single runs and of adversary explorations.
"""

# Standard Libraries Imports
import logging
from fractions import Fraction

# Local Imports
from envy import Trace, revenue, social_welfare, summarize_verification
from market import format_rational
from output import records_frame, trace_frame

logger = logging.getLogger("Stats")


def print_run_stats(trace: Trace, opt: Fraction) -> dict:
    """
    Log welfare, revenue and verifier outcomes of one trace.

    :param trace: Finished trace.
    :param opt: Maximum matching weight of the market.
    :return: The logged figures.
    """

    table = trace_frame(trace)
    stats = {
        "steps": len(trace),
        "sold": int(table["purchased"].sum()) if not table.empty else 0,
        "offers": int((table["offer"] != "NOT_OFFERED").sum()) if not table.empty else 0,
        "welfare": social_welfare(trace),
        "revenue": revenue(trace),
        "opt_weight": opt,
        "envy_free": summarize_verification(trace),
    }

    logger.info("Run statistics:")
    logger.info(f"  -- steps: {stats['steps']}, items sold: {stats['sold']}")
    logger.info(f"  -- rational offers posted: {stats['offers']}")
    logger.info(
        f"  -- welfare: {format_rational(stats['welfare'])} (optimum {format_rational(opt)})"
    )
    logger.info(f"  -- revenue: {format_rational(stats['revenue'])}")
    for notion, passed in stats["envy_free"].items():
        logger.info(f"    -- {notion}: {'OK' if passed else 'envy'}")
    return stats


def print_adversary_stats(report) -> None:
    """Log the spread of an adversary report, per arrival order and overall."""

    logger.info(f"Adversary statistics ({report.scheme}):")
    logger.info(f"  -- branches: {report.branches}, failures: {len(report.failures)}")
    if not report.records:
        return

    table = records_frame(report.records)
    per_order = table.groupby("order").size()
    logger.info(f"  -- arrival orders: {len(per_order)}")
    logger.info(
        f"  -- welfare: min {format_rational(report.min_welfare)}, "
        f"max {format_rational(report.max_welfare)}, optimum {format_rational(report.opt_weight)}"
    )
    logger.info(
        f"  -- revenue: min {format_rational(report.min_revenue)}, "
        f"max {format_rational(report.max_revenue)}"
    )
    logger.info(f"  -- most branching order: {per_order.idxmax()}")
    for notion, passed in report.all_pass.items():
        logger.info(f"    -- {notion}: {'all pass' if passed else 'violations found'}")
