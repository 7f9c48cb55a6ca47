#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: output.py
Description: Writing of JSON reports and traces, and the tabular (CSV) export of traces and
adversary records.
"""

# Standard Libraries Imports
import json
import logging
from typing import List

# Third Party Libraries Imports
import pandas as pd

# Local Imports
from envy import NOT_OFFERED, Trace, describe

logger = logging.getLogger("Output")


def dumps(data) -> str:
    """Deterministic JSON text: the same data always gives the same bytes."""

    return json.dumps(data, indent=4, ensure_ascii=False, default=describe) + "\n"


def write_json(path: str, data) -> None:
    with open(path, "w", encoding="utf-8") as file:
        file.write(dumps(data))
    logger.info(f"  -- written to file: {path}")


def trace_frame(trace: Trace) -> pd.DataFrame:
    """One row per (step, available item) with the offer, the agent's utility and the purchase.

    Parameters
    ----------
    trace : Trace
        The trace.

    Returns
    -------
    pd.DataFrame
        Columns step, agent, item, offer, value, utility, purchased.
    """

    rows = []
    for t, step in enumerate(trace.steps, start=1):
        for item in step.available:
            offer = step.offers[item]
            value = trace.market.value(step.agent, item)
            rows.append(
                {
                    "step": t,
                    "agent": step.agent,
                    "item": item,
                    "offer": describe(offer),
                    "value": describe(value),
                    "utility": None if offer is NOT_OFFERED else describe(value - offer),
                    "purchased": step.purchase == item,
                }
            )
    return pd.DataFrame(
        rows, columns=["step", "agent", "item", "offer", "value", "utility", "purchased"]
    )


def export_trace_table(trace: Trace, path: str) -> None:
    trace_frame(trace).to_csv(path, index=False)
    logger.info(f"  -- trace table saved to file: {path}")


def records_frame(records: List[dict]) -> pd.DataFrame:
    """Adversary branch records as a table, one column per envy notion."""

    rows = []
    for record in records:
        row = {
            "order": " ".join(record["order"]),
            "decisions": " ".join(str(d) for d in record["decisions"]),
            "welfare": record["welfare"],
            "revenue": record["revenue"],
        }
        row.update(record["envy_free"])
        rows.append(row)
    return pd.DataFrame(rows)
