#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: efdp.py
Description: Main entry point of EFDP (Envy-Free Dynamic Pricing). Handles argument parsing,
configuration loading, logging and the run, verify, gen and oracle commands.
"""

# Standard Libraries Imports
import argparse
import itertools
import json
import logging
import random
import sys
import time
from argparse import RawTextHelpFormatter
from datetime import timedelta
from typing import List, Optional

# Local Imports
from covering import refined_covering
from envy import NOT_OFFERED, EnvyNotion, notion_from_name, verify_envy_free
from errors import CoveringError, InstanceTooLargeError, MarketParseError, SchemeFailure
from instances import gen_cyclic_triple, gen_harmonic, gen_random, gen_vertex_cover_market
from load import load_config, load_graph_file, load_market_file, load_order_file, load_trace_file
from market import Market, format_rational, parse_rational, validate_market
from matching import analyze_market, enumerate_max_matchings, opt_weight, prune_uncovered_items
from oracles import (
    oracle_exhaustive_adversary,
    oracle_expost_revenue_opt,
    oracle_static_ef_revenue,
    oracle_strong_revenue_grid,
)
from output import dumps, export_trace_table, write_json
from policy import policy_from_name
from schemes import ORDER_DRIVEN, SCHEMES, prepare_scheme
from stats import print_adversary_stats, print_run_stats

logger = logging.getLogger("EFDP")

EXIT_OK = 0
EXIT_WITNESS = 1
EXIT_BAD_INPUT = 2
EXIT_SCHEME_FAILURE = 3
EXIT_TOO_LARGE = 4


def setup_logging(logfile) -> None:
    """
    Set up logging configuration based on logfile parameter.

    Parameters
    ----------
    logfile : bool or str
        Determines the logging configuration:
        - If `True`, logs are printed to the console.
        - If a `str`, logs are written to the specified file.
        - If `False`, logging is disabled.
    """

    if logfile is True:
        logging.disable(logging.NOTSET)
        logging.basicConfig(
            level=logging.DEBUG,
            format="{asctime} - {levelname} - {name} : {message}",
            style="{",
            datefmt="%d-%m-%Y %H:%M",
        )
    elif isinstance(logfile, str):
        logging.disable(logging.NOTSET)
        logging.basicConfig(
            filename=logfile,
            filemode="a",
            level=logging.DEBUG,
            format="{asctime} - {levelname} - {name} : {message}",
            style="{",
            datefmt="%d-%m-%Y %H:%M",
        )
    else:
        logging.disable(logging.CRITICAL)


def _logfile(value: str):
    if value == "True":
        return True
    if value == "False":
        return False
    return value


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command-line arguments.

    Returns
    -------
    argparse.Namespace
        Parsed command-line arguments.
    """

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        help="Path to EFDP configuration file. Default: built-in limits",
        type=str,
        default=None,
    )
    common.add_argument(
        "--logfile",
        help="Define logging output. If True, logs are printed to console. If file, logs are "
        "saved to file. If False, logging is disabled. Default: True",
        type=_logfile,
        default=True,
    )
    common.add_argument(
        "--output",
        help="Output JSON file. Default: standard output",
        type=str,
        metavar="FILE.json",
        default=None,
    )

    parser = argparse.ArgumentParser(
        description="""Envy-free dynamic pricing for unit-demand markets.

    Usage:
        efdp run --input market.json --scheme welfare-expost --order seed:1 --output trace.json
        efdp verify --trace trace.json --notion expost
        efdp gen --family harmonic --n 4 --output harmonic4.json
        efdp oracle --input market.json --oracle static-ef-revenue""",
        formatter_class=RawTextHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", parents=[common], help="Run a pricing scheme.")
    run_parser.add_argument("--input", type=str, required=True, metavar="FILE.json")
    run_parser.add_argument("--scheme", choices=SCHEMES, required=True)
    run_parser.add_argument(
        "--order",
        help="Arrival order: 'given' (instance order), 'seed:<k>' or 'all'. Default: given",
        type=str,
        default="given",
    )
    run_parser.add_argument(
        "--tie",
        help="Tie-break policy: 'lex', 'seed:<k>' or 'all'. Default: lex",
        type=str,
        default="lex",
    )
    run_parser.add_argument("--delta", help="delta override (p/q) for revenue-exante", default=None)
    run_parser.add_argument(
        "--discount", help="Uniform price reduction (p/q) for revenue schemes", default="0"
    )
    run_parser.add_argument(
        "--prices", help="Posted prices JSON file for the static scheme", default=None
    )
    run_parser.add_argument("--table", help="Also export the trace as CSV", default=None)

    verify_parser = commands.add_parser("verify", parents=[common], help="Verify a trace.")
    verify_parser.add_argument("--trace", type=str, required=True, metavar="FILE.json")
    verify_parser.add_argument("--notion", choices=[n.value for n in EnvyNotion], required=True)

    gen_parser = commands.add_parser("gen", parents=[common], help="Generate an instance.")
    gen_parser.add_argument(
        "--family", choices=["harmonic", "vertex-cover", "cyclic3", "random"], required=True
    )
    gen_parser.add_argument("--n", type=int, default=None)
    gen_parser.add_argument("--graph", type=str, default=None, metavar="GRAPH.json")
    gen_parser.add_argument("--seed", type=int, default=0)
    gen_parser.add_argument("--agents", type=int, default=3)
    gen_parser.add_argument("--items", type=int, default=3)
    gen_parser.add_argument("--max-value", type=int, default=5)

    oracle_parser = commands.add_parser("oracle", parents=[common], help="Run an oracle.")
    oracle_parser.add_argument("--input", type=str, required=True, metavar="FILE.json")
    oracle_parser.add_argument(
        "--oracle",
        choices=[
            "static-ef-revenue",
            "max-matchings",
            "expost-revenue-grid",
            "strong-revenue-grid",
            "adversary",
            "analysis",
        ],
        required=True,
    )
    oracle_parser.add_argument("--order-file", type=str, default=None)
    oracle_parser.add_argument("--scheme", choices=SCHEMES, default="welfare-expost")
    oracle_parser.add_argument(
        "--notion", choices=["expost", "exante"], default="expost", help="Grid oracle notion"
    )
    oracle_parser.add_argument(
        "--grid", help="Comma separated price grid. Default: positive valuations", default=None
    )

    return parser.parse_args(argv)


def _emit(args: argparse.Namespace, data) -> None:
    if args.output is None:
        sys.stdout.write(dumps(data))
    else:
        write_json(args.output, data)


def _parse_grid(text: Optional[str], market: Market) -> List:
    if text is None:
        return sorted({v for v in market.valuations.values() if v > 0})
    return [parse_rational(x.strip(), "--grid") for x in text.split(",") if x.strip()]


def _load_prices(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as file:
            data = json.load(file)
    except (OSError, json.JSONDecodeError) as e:
        raise MarketParseError(f"EFDP:: prices: cannot read {path}: {e}") from None
    if not isinstance(data, dict):
        raise MarketParseError("EFDP:: prices: expected an object keyed by item id")
    return {
        item: NOT_OFFERED if value == "NOT_OFFERED" else parse_rational(value, f"prices.{item}")
        for item, value in data.items()
    }


def _resolve_orders(args: argparse.Namespace, market: Market, scheme) -> Optional[List[list]]:
    """Arrival orders requested by --order; None means the scheme decides or has none."""

    if args.order == "all":
        return [list(p) for p in itertools.permutations(market.agents)]
    if args.order.startswith("seed:"):
        try:
            seed = int(args.order.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"EFDP:: invalid order '{args.order}'") from None
        sequence = list(market.agents)
        random.Random(seed).shuffle(sequence)
        return [sequence]
    if args.order != "given":
        raise ValueError(f"EFDP:: unknown order '{args.order}'")

    if market.order is not None:
        return [list(market.order)]
    if scheme.fixed_order is None and args.scheme in ("welfare-expost", "welfare-exante"):
        logger.warning("Instance has no order, agents arrive in declaration order")
        return [list(market.agents)]
    return None


def cmd_run(args: argparse.Namespace, config: dict) -> int:
    market = load_market_file(args.input)
    for diagnostic in validate_market(market):
        if diagnostic.level == "error":
            raise MarketParseError(f"EFDP:: {diagnostic.message}")

    delta = parse_rational(args.delta, "--delta") if args.delta is not None else None
    discount = parse_rational(args.discount, "--discount")
    prices = _load_prices(args.prices) if args.prices is not None else None

    scheme = prepare_scheme(
        market,
        args.scheme,
        delta=delta,
        discount=discount,
        prices=prices,
        strict=config["efdp"]["strict_checks"],
        halvings=config["efdp"]["margin_halvings"],
    )
    orders = _resolve_orders(args, market, scheme)

    if args.order == "all" or args.tie == "all":
        if args.order == "all" and scheme.fixed_order is not None:
            logger.info(f"  -- {args.scheme} chooses its own order, --order all has no effect")
        if orders is None and args.scheme in ORDER_DRIVEN and scheme.fixed_order is None:
            raise ValueError(f"EFDP:: {args.scheme} requires an arrival order")
        report = oracle_exhaustive_adversary(
            market,
            scheme,
            max_agents=config["efdp"]["adversary_agent_limit"],
            threads=config["efdp"]["threads"],
            name=args.scheme,
            orders=orders,
            tie=None if args.tie == "all" else args.tie,
        )
        print_adversary_stats(report)
        _emit(args, report.export())
        return EXIT_SCHEME_FAILURE if report.failures else EXIT_OK

    policy = policy_from_name(args.tie, scheme.decline_at_zero)
    order = orders[0] if orders else None
    try:
        trace = scheme.run(order, policy)
    except SchemeFailure as e:
        logger.error(f"Scheme failed: {e}")
        partial_trace = e.trace.export() if e.trace is not None else None
        _emit(args, {"error": str(e), "trace": partial_trace})
        return EXIT_SCHEME_FAILURE

    print_run_stats(trace, opt_weight(market))
    _emit(args, trace.export())
    if args.table is not None:
        export_trace_table(trace, args.table)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: dict) -> int:
    trace = load_trace_file(args.trace)
    notion = notion_from_name(args.notion)
    witness = verify_envy_free(trace, notion)
    if witness is None:
        logger.info(f"  -- trace is {notion.value} envy-free")
        return EXIT_OK

    logger.info(f"  -- envy witness found: {witness}")
    sys.stdout.write(dumps(witness.export()))
    return EXIT_WITNESS


def cmd_gen(args: argparse.Namespace, config: dict) -> int:
    if args.family == "harmonic":
        if args.n is None or args.n < 1:
            raise ValueError("EFDP:: harmonic family needs --n >= 1")
        data = gen_harmonic(args.n).export()
    elif args.family == "cyclic3":
        data = gen_cyclic_triple().export()
    elif args.family == "random":
        data = gen_random(args.agents, args.items, args.max_value, args.seed).export()
    else:
        if args.graph is None:
            raise ValueError("EFDP:: vertex-cover family needs --graph")
        vertices, edges = load_graph_file(args.graph)
        market, edge_first, vertex_first = gen_vertex_cover_market(vertices, edges)
        data = market.export()
        data["orders"] = {
            "edge_first": list(edge_first.sequence),
            "vertex_first": list(vertex_first.sequence),
        }

    _emit(args, data)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, config: dict) -> int:
    market = load_market_file(args.input)
    limits = config["efdp"]

    if args.oracle == "static-ef-revenue":
        data = oracle_static_ef_revenue(market, limits["static_oracle_side_limit"]).export()
    elif args.oracle == "max-matchings":
        matchings = enumerate_max_matchings(market, limits["enumeration_side_limit"])
        data = {
            "opt_weight": format_rational(opt_weight(market)),
            "count": len(matchings),
            "matchings": [m.export() for m in sorted(matchings, key=lambda m: m.export())],
        }
    elif args.oracle == "analysis":
        pruned, removed = prune_uncovered_items(market)
        data = analyze_market(market).export()
        data["pruned_items"] = removed
        data["covering"] = refined_covering(pruned, halvings=limits["margin_halvings"]).export()
    elif args.oracle in ("expost-revenue-grid", "strong-revenue-grid"):
        grid = _parse_grid(args.grid, market)
        if args.oracle == "strong-revenue-grid":
            value = oracle_strong_revenue_grid(market, grid, limits["strong_search_side_limit"])
            data = {"revenue": format_rational(value)}
        else:
            order = load_order_file(args.order_file) if args.order_file else market.order
            if order is None:
                raise ValueError(
                    "EFDP:: expost-revenue-grid needs --order-file or an instance order"
                )
            value = oracle_expost_revenue_opt(
                market,
                order,
                grid,
                notion_from_name(args.notion),
                limits["grid_oracle_agent_limit"],
            )
            data = {"revenue": format_rational(value), "order": list(order)}
        data["grid"] = [format_rational(g) for g in grid]
    else:
        scheme = prepare_scheme(
            market,
            args.scheme,
            strict=limits["strict_checks"],
            halvings=limits["margin_halvings"],
        )
        orders = None
        if args.scheme in ("revenue-weak", "static"):
            order = load_order_file(args.order_file) if args.order_file else market.order
            if order is None:
                raise ValueError(f"EFDP:: {args.scheme} requires an arrival order")
            orders = [list(order)]
        report = oracle_exhaustive_adversary(
            market,
            scheme,
            max_agents=limits["adversary_agent_limit"],
            threads=limits["threads"],
            name=args.scheme,
            orders=orders,
        )
        print_adversary_stats(report)
        data = report.export()

    _emit(args, data)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "gen": cmd_gen, "oracle": cmd_oracle}


def run(argv: Optional[List[str]] = None) -> int:
    """Execute one command and return its exit code."""

    try:
        args = parse_arguments(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_BAD_INPUT

    setup_logging(args.logfile)
    logger.info("\n" + "=" * 30 + " Envy-Free Dynamic Pricing (EFDP) " + "=" * 30 + "\n")

    start = time.time()
    try:
        config = load_config(args.config)
        code = COMMANDS[args.command](args, config)
    except InstanceTooLargeError as e:
        logger.error(f"Instance too large: {e}")
        sys.stderr.write(f"{e}\n")
        return EXIT_TOO_LARGE
    except (SchemeFailure, CoveringError) as e:
        logger.error(f"Scheme failed: {e}")
        sys.stderr.write(f"{e}\n")
        return EXIT_SCHEME_FAILURE
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Bad input: {e}")
        sys.stderr.write(f"{e}\n")
        return EXIT_BAD_INPUT

    logger.info(f"Command {args.command} finished in {timedelta(seconds=time.time() - start)}")
    return code


def main() -> None:
    """Console script entry point."""

    raise SystemExit(run())


if __name__ == "__main__":
    main()
