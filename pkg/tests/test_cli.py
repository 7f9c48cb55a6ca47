"""Command line interface: outputs and exit codes."""

# Standard Libraries Imports
import json

# Third Party Libraries Imports
import pandas as pd
import pytest
import yaml

# Local Imports
from conftest import K4_EDGES, M1_JSON
from efdp import (
    EXIT_BAD_INPUT,
    EXIT_OK,
    EXIT_SCHEME_FAILURE,
    EXIT_TOO_LARGE,
    EXIT_WITNESS,
    parse_arguments,
    run,
)
from load import DEFAULT_CONFIG
from market import Market

QUIET = ["--logfile", "False"]


def write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def read(path):
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture
def cyclic_file(tmp_path):
    out = tmp_path / "cyclic3.json"
    assert run(["gen", "--family", "cyclic3", "--output", str(out)] + QUIET) == EXIT_OK
    return out


def test_parse_defaults():
    args = parse_arguments(["run", "--input", "m.json", "--scheme", "welfare-expost"])
    assert args.order == "given"
    assert args.tie == "lex"
    assert args.discount == "0"
    assert args.logfile is True
    assert parse_arguments(["gen", "--family", "cyclic3", "--logfile", "x.log"]).logfile == "x.log"


def test_gen_harmonic(tmp_path):
    out = tmp_path / "h3.json"
    assert run(["gen", "--family", "harmonic", "--n", "3", "--output", str(out)] + QUIET) == 0
    data = read(out)
    assert data["agents"] == ["a1", "a2", "a3"]
    assert data["valuations"]["a2"]["i3"] == "1/2"


def test_gen_random_is_byte_identical(tmp_path):
    outputs = []
    for name in ("r1.json", "r2.json"):
        out = tmp_path / name
        argv = ["gen", "--family", "random", "--seed", "5", "--agents", "4", "--output", str(out)]
        assert run(argv + QUIET) == EXIT_OK
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_gen_vertex_cover(tmp_path):
    graph = write(tmp_path / "k4.json", {"vertices": 4, "edges": [list(e) for e in K4_EDGES]})
    out = tmp_path / "vc.json"
    argv = ["gen", "--family", "vertex-cover", "--graph", graph, "--output", str(out)]
    assert run(argv + QUIET) == EXIT_OK
    data = read(out)
    assert len(data["items"]) == 16
    assert data["orders"]["vertex_first"][:4] == ["v0", "v1", "v2", "v3"]
    assert Market.load(data).order == tuple(data["orders"]["edge_first"])


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", "--family", "harmonic"],
        ["gen", "--family", "vertex-cover"],
        ["gen", "--family", "unknown"],
        ["run", "--input", "missing.json", "--scheme", "welfare-expost"],
        ["verify", "--trace", "missing.json", "--notion", "strong"],
    ],
)
def test_bad_input(argv):
    assert run(argv + QUIET) == EXIT_BAD_INPUT


def test_gen_non_cubic_graph(tmp_path):
    graph = write(tmp_path / "c4.json", {"vertices": 4, "edges": [[0, 1], [1, 2], [2, 3], [3, 0]]})
    assert run(["gen", "--family", "vertex-cover", "--graph", graph] + QUIET) == EXIT_BAD_INPUT


def test_run_and_verify(tmp_path, m1_file):
    trace_file = tmp_path / "trace.json"
    table = tmp_path / "trace.csv"
    argv = ["run", "--input", str(m1_file), "--scheme", "revenue-expost"]
    argv += ["--output", str(trace_file), "--table", str(table)]
    assert run(argv + QUIET) == EXIT_OK

    trace = read(trace_file)
    assert [step["purchase"] for step in trace["steps"]] == ["i1", "i2"]
    assert len(pd.read_csv(table)) == 3

    for notion in ("expost", "weak"):
        assert run(["verify", "--trace", str(trace_file), "--notion", notion] + QUIET) == EXIT_OK


def test_run_seeded_order(tmp_path, cyclic_file):
    trace_file = tmp_path / "trace.json"
    argv = ["run", "--input", str(cyclic_file), "--scheme", "welfare-exante", "--order", "seed:3"]
    assert run(argv + ["--tie", "seed:1", "--output", str(trace_file)] + QUIET) == EXIT_OK
    assert run(["verify", "--trace", str(trace_file), "--notion", "exante"] + QUIET) == EXIT_OK


def test_verify_witness(tmp_path, capsys):
    data = {
        "market": M1_JSON,
        "steps": [
            {
                "agent": "a1",
                "available": ["i1", "i2"],
                "offers": {"i1": "3", "i2": "2"},
                "purchase": "i1",
            },
            {"agent": "a2", "available": ["i2"], "offers": {"i2": "1/2"}, "purchase": "i2"},
        ],
    }
    path = write(tmp_path / "envy.json", data)
    assert run(["verify", "--trace", path, "--notion", "weak"] + QUIET) == EXIT_OK
    capsys.readouterr()
    assert run(["verify", "--trace", path, "--notion", "exante"] + QUIET) == EXIT_WITNESS
    witness = json.loads(capsys.readouterr().out)
    assert witness["agent"] == "a1"
    assert witness["gap"] == "1/2"


def test_verify_malformed_trace(tmp_path):
    path = write(tmp_path / "bad.json", {"market": M1_JSON, "steps": [{"agent": "a1"}]})
    assert run(["verify", "--trace", path, "--notion", "strong"] + QUIET) == EXIT_BAD_INPUT


def test_verify_list_purchase(tmp_path):
    step = {"agent": "a1", "available": ["i1", "i2"], "offers": {"i1": "3", "i2": "1"}}
    step["purchase"] = ["i1"]
    path = write(tmp_path / "bad.json", {"market": M1_JSON, "steps": [step]})
    assert run(["verify", "--trace", path, "--notion", "expost"] + QUIET) == EXIT_BAD_INPUT


@pytest.mark.parametrize("scheme", ["revenue-expost", "revenue-exante", "welfare-expost"])
def test_run_harmonic_four(tmp_path, scheme):
    market = tmp_path / "h4.json"
    assert run(["gen", "--family", "harmonic", "--n", "4", "--output", str(market)] + QUIET) == 0
    trace_file = tmp_path / "trace.json"
    argv = ["run", "--input", str(market), "--scheme", scheme, "--output", str(trace_file)]
    assert run(argv + QUIET) == EXIT_OK
    assert len(read(trace_file)["steps"]) == 4


def test_covering_failure_exit_code(tmp_path, cyclic_file):
    """The cyclic market needs margin 1/2, so no halving at all leaves no covering."""

    config = {"efdp": dict(DEFAULT_CONFIG["efdp"], margin_halvings=0)}
    path = tmp_path / "config.yml"
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    argv = ["run", "--input", str(cyclic_file), "--scheme", "welfare-expost"]
    assert run(argv + ["--config", str(path)] + QUIET) == EXIT_SCHEME_FAILURE


def test_weak_needs_order(m1_file):
    argv = ["run", "--input", str(m1_file), "--scheme", "revenue-weak"]
    assert run(argv + QUIET) == EXIT_BAD_INPUT


def test_delta_override_bound(m1_file):
    argv = ["run", "--input", str(m1_file), "--scheme", "revenue-exante", "--delta"]
    assert run(argv + ["2"] + QUIET) == EXIT_BAD_INPUT
    assert run(argv + ["1/8"] + QUIET) == EXIT_OK


def test_run_all_orders_report(tmp_path, m1_file):
    out = tmp_path / "report.json"
    argv = ["run", "--input", str(m1_file), "--scheme", "welfare-expost", "--order", "all"]
    assert run(argv + ["--tie", "all", "--output", str(out)] + QUIET) == EXIT_OK
    report = read(out)
    assert report["orders"] == 2
    assert report["welfare"]["values"] == ["5"]
    assert report["all_pass"]["expost"] is True
    assert report["failures"] == []


def test_run_weak_all_orders(tmp_path, m1_file):
    out = tmp_path / "report.json"
    argv = ["run", "--input", str(m1_file), "--scheme", "revenue-weak", "--order", "all"]
    assert run(argv + ["--output", str(out)] + QUIET) == EXIT_OK
    report = read(out)
    assert report["branches"] == 2
    assert report["revenue"]["values"] == ["5"]


def test_oracle_max_matchings(cyclic_file, capsys):
    assert run(["oracle", "--input", str(cyclic_file), "--oracle", "max-matchings"] + QUIET) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["count"] == 2
    assert data["opt_weight"] == "3"


def test_oracle_static_revenue(tmp_path, capsys):
    market = tmp_path / "h4.json"
    run(["gen", "--family", "harmonic", "--n", "4", "--output", str(market)] + QUIET)
    assert run(["oracle", "--input", str(market), "--oracle", "static-ef-revenue"] + QUIET) == 0
    assert json.loads(capsys.readouterr().out)["revenue"] == "1"


def test_oracle_too_large(tmp_path):
    market = tmp_path / "h8.json"
    run(["gen", "--family", "harmonic", "--n", "8", "--output", str(market)] + QUIET)
    argv = ["oracle", "--input", str(market), "--oracle", "static-ef-revenue"]
    assert run(argv + QUIET) == EXIT_TOO_LARGE


def test_config_limits(tmp_path, m1_file):
    config = {"efdp": dict(DEFAULT_CONFIG["efdp"], static_oracle_side_limit=1)}
    path = tmp_path / "config.yml"
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    argv = ["oracle", "--input", str(m1_file), "--oracle", "static-ef-revenue"]
    argv += ["--config", str(path)]
    assert run(argv + QUIET) == EXIT_TOO_LARGE

    path.write_text(yaml.safe_dump({"efdp": {"threads": True}}), encoding="utf-8")
    assert run(argv + QUIET) == EXIT_BAD_INPUT


def test_oracle_grid(tmp_path, m1_file, capsys):
    order = write(tmp_path / "order.json", {"order": ["a1", "a2"]})
    argv = ["oracle", "--input", str(m1_file), "--oracle", "expost-revenue-grid"]
    assert run(argv + ["--order-file", order] + QUIET) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["revenue"] == "5"
    assert data["grid"] == ["1", "2", "3"]
    assert run(argv + QUIET) == EXIT_BAD_INPUT


def test_oracle_adversary_and_analysis(m1_file, capsys):
    argv = ["oracle", "--input", str(m1_file), "--oracle", "adversary"]
    argv += ["--scheme", "welfare-exante"]
    assert run(argv + QUIET) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["all_pass"]["exante"] is True

    assert run(["oracle", "--input", str(m1_file), "--oracle", "analysis"] + QUIET) == EXIT_OK
    analysis = json.loads(capsys.readouterr().out)
    assert analysis["opt_weight"] == "5"
    assert analysis["pruned_items"] == []
