#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: load.py
Description: Loading of the EFDP configuration and of the JSON input files (markets, traces,
graphs and arrival orders).
"""

# Standard Libraries Imports
import copy
import json
import logging
from pathlib import Path
from typing import List, Optional, Tuple

# Third Party Libraries Imports
import yaml

# Local Imports
from envy import Trace
from errors import MarketParseError, TraceError
from market import Market, load_market

logger = logging.getLogger("Load")

DEFAULT_CONFIG = {
    "efdp": {
        "enumeration_side_limit": 20,
        "static_oracle_side_limit": 7,
        "adversary_agent_limit": 6,
        "strong_search_side_limit": 3,
        "grid_oracle_agent_limit": 16,
        "margin_halvings": 64,
        "strict_checks": True,
        "threads": False,
    }
}

REQUIRED_KEYS = tuple(DEFAULT_CONFIG["efdp"])


def load_config(path: Optional[str] = None) -> dict:
    """Load and validate the YAML configuration, or return the defaults when path is None.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    ValueError
        If the file is not YAML or the efdp section misses a required key.
    """

    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)

    conf_path = Path(path)
    if not conf_path.exists():
        logger.error("Config file not found")
        raise FileNotFoundError(f"EFDP:: config file not found: {path}")

    with conf_path.open("r", encoding="utf-8") as file:
        try:
            config = yaml.safe_load(file)
        except yaml.YAMLError:
            logger.error("Config file is not valid YAML")
            raise ValueError("EFDP:: config file is not valid YAML") from None

    if not isinstance(config, dict) or not isinstance(config.get("efdp"), dict):
        logger.error("Config file does not contain the efdp section")
        raise ValueError("EFDP:: configuration of EFDP is missing in config file")

    missing = [key for key in REQUIRED_KEYS if key not in config["efdp"]]
    if missing:
        logger.error(f"Config file misses required fields: {', '.join(missing)}")
        raise ValueError("EFDP:: configuration of EFDP is incomplete")

    return config


def _read_json(path: str, error: type):
    try:
        with open(path, "r", encoding="utf-8") as file:
            return json.load(file)
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise error(f"EFDP:: cannot read {path}") from None
    except json.JSONDecodeError as e:
        logger.error(f"Malformed JSON in {path}: {e}")
        raise error(f"EFDP:: malformed JSON in {path}: {e.msg}") from None


def load_market_file(path: str) -> Market:
    try:
        with open(path, "r", encoding="utf-8") as file:
            text = file.read()
    except OSError:
        logger.error(f"Cannot read market file {path}")
        raise MarketParseError(f"EFDP:: cannot read {path}") from None
    return load_market(text)


def load_trace_file(path: str) -> Trace:
    data = _read_json(path, TraceError)
    if not isinstance(data, dict):
        raise TraceError("EFDP:: trace: expected an object")
    return Trace.load(data)


def load_graph_file(path: str) -> Tuple[list, List[tuple]]:
    """
    Read an edge-list graph: {"vertices": n or [labels], "edges": [[u, w], ...]}.

    An integer vertex count means labels 0..n-1.

    :param path: JSON file.
    :return: (vertices, edges)
    """

    data = _read_json(path, MarketParseError)
    if not isinstance(data, dict) or "vertices" not in data or "edges" not in data:
        raise MarketParseError("EFDP:: graph: expected fields 'vertices' and 'edges'")

    vertices = data["vertices"]
    if isinstance(vertices, int) and not isinstance(vertices, bool):
        vertices = list(range(vertices))
    if not isinstance(vertices, list):
        raise MarketParseError("EFDP:: graph.vertices: expected a count or a list")
    if not isinstance(data["edges"], list) or not all(
        isinstance(edge, list) and len(edge) == 2 for edge in data["edges"]
    ):
        raise MarketParseError("EFDP:: graph.edges: expected a list of pairs")
    return vertices, [tuple(edge) for edge in data["edges"]]


def load_order_file(path: str) -> List[str]:
    """Arrival order file: a JSON list of agent ids, or an object with an "order" list."""

    data = _read_json(path, MarketParseError)
    if isinstance(data, dict):
        data = data.get("order")
    if not isinstance(data, list) or not all(isinstance(a, str) for a in data):
        raise MarketParseError("EFDP:: order: expected a list of agent ids")
    return data
