"""Configuration, input files and trace tables."""

# Standard Libraries Imports
import json
from fractions import Fraction
from pathlib import Path

# Third Party Libraries Imports
import pytest
import yaml

# Local Imports
from envy import NOT_OFFERED, Trace
from errors import MarketParseError, TraceError
from load import (
    DEFAULT_CONFIG,
    load_config,
    load_graph_file,
    load_market_file,
    load_order_file,
    load_trace_file,
)
from output import dumps, records_frame, trace_frame
from stats import print_run_stats


def test_default_config_is_a_copy():
    config = load_config()
    config["efdp"]["threads"] = True
    assert DEFAULT_CONFIG["efdp"]["threads"] is False


def test_shipped_config_matches_defaults():
    path = Path(__file__).resolve().parent.parent / "efdp_config.yml"
    assert load_config(str(path)) == DEFAULT_CONFIG


def test_config_file(tmp_path):
    path = tmp_path / "config.yml"
    path.write_text(yaml.safe_dump(DEFAULT_CONFIG), encoding="utf-8")
    assert load_config(str(path)) == DEFAULT_CONFIG

    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "missing.yml"))

    path.write_text("efdp: [unclosed", encoding="utf-8")
    with pytest.raises(ValueError, match="YAML"):
        load_config(str(path))

    path.write_text("other: 1\n", encoding="utf-8")
    with pytest.raises(ValueError, match="missing"):
        load_config(str(path))


def test_market_file(m1_file, tmp_path):
    market = load_market_file(str(m1_file))
    assert market.value("a1", "i1") == 3
    with pytest.raises(MarketParseError):
        load_market_file(str(tmp_path / "missing.json"))


def test_graph_file(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"vertices": 2, "edges": [[0, 1]]}), encoding="utf-8")
    assert load_graph_file(str(path)) == ([0, 1], [(0, 1)])

    path.write_text(json.dumps({"vertices": ["x", "y"], "edges": [["x"]]}), encoding="utf-8")
    with pytest.raises(MarketParseError):
        load_graph_file(str(path))


@pytest.mark.parametrize("content", [["a2", "a1"], {"order": ["a2", "a1"]}])
def test_order_file(tmp_path, content):
    path = tmp_path / "order.json"
    path.write_text(json.dumps(content), encoding="utf-8")
    assert load_order_file(str(path)) == ["a2", "a1"]


def test_order_file_rejects_numbers(tmp_path):
    path = tmp_path / "order.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(MarketParseError):
        load_order_file(str(path))


def test_trace_file(tmp_path, m1):
    trace = Trace(m1)
    trace.add_step("a1", ["i1", "i2"], {"i1": Fraction(3), "i2": NOT_OFFERED}, "i1")
    trace.add_step("a2", ["i2"], {"i2": Fraction(2)}, "i2")
    path = tmp_path / "trace.json"
    path.write_text(dumps(trace.export()), encoding="utf-8")

    loaded = load_trace_file(str(path))
    assert loaded.order == ["a1", "a2"]
    assert loaded.steps[0].offers["i2"] is NOT_OFFERED

    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(TraceError, match="malformed JSON"):
        load_trace_file(str(path))


def test_trace_table_and_stats(m1):
    trace = Trace(m1)
    trace.add_step("a1", ["i1", "i2"], {"i1": Fraction(5, 2), "i2": NOT_OFFERED}, "i1")
    trace.add_step("a2", ["i2"], {"i2": Fraction(2)}, None)

    table = trace_frame(trace)
    assert list(table["item"]) == ["i1", "i2", "i2"]
    assert list(table["offer"]) == ["5/2", "NOT_OFFERED", "2"]
    assert table["utility"].iloc[0] == "1/2"
    assert table["utility"].iloc[1] is None
    assert list(table["purchased"]) == [True, False, False]

    stats = print_run_stats(trace, Fraction(5))
    assert stats["sold"] == 1
    assert stats["offers"] == 2
    assert stats["revenue"] == Fraction(5, 2)
    assert stats["envy_free"]["strong"] is True


def test_records_frame():
    records = [
        {
            "order": ["a1", "a2"],
            "decisions": [0, 1],
            "welfare": Fraction(3),
            "revenue": Fraction(2),
            "envy_free": {"strong": True, "expost": True, "exante": False, "weak": True},
        }
    ]
    frame = records_frame(records)
    assert frame.loc[0, "order"] == "a1 a2"
    assert frame.loc[0, "decisions"] == "0 1"
    assert not frame.loc[0, "exante"]
