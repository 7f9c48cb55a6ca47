"""Revenue schemes, static prices and the strong-to-static conversion."""

# Standard Libraries Imports
import random
from fractions import Fraction

# Third Party Libraries Imports
import pytest

# Local Imports
from conftest import build_market, explore_traces
from covering import refined_covering
from envy import NOT_OFFERED, EnvyNotion, Trace, revenue, social_welfare, verify_envy_free
from errors import PricingError, TraceError
from instances import gen_harmonic, gen_random
from matching import opt_weight
from revenue import (
    ExAnteRevenueScheme,
    ExPostRevenueScheme,
    StaticPriceScheme,
    order_for_revenue,
    run_revenue_ex_ante,
    run_revenue_ex_post,
    run_revenue_weak,
    run_static_prices,
    static_from_strong,
)

F = Fraction


def fixed_markets():
    return [
        build_market({"a1": {"i1": 3, "i2": 1}, "a2": {"i1": 2, "i2": 2}}),
        build_market(
            {"a1": {"i1": 1, "i2": 1}, "a2": {"i2": 1, "i3": 1}, "a3": {"i3": 1, "i1": 1}}
        ),
    ] + [gen_harmonic(n) for n in (2, 3, 4)] + [gen_random(3, 3, 5, seed) for seed in range(10)]


def test_revenue_ex_post_m1(m1):
    trace = run_revenue_ex_post(m1)
    assert trace.order == ["a1", "a2"]
    assert revenue(trace) == 5
    assert verify_envy_free(trace, EnvyNotion.EX_POST) is None


def test_revenue_ex_ante_m1(m1):
    trace = run_revenue_ex_ante(m1, F(1, 4))
    assert revenue(trace) == 5 - F(3, 16)
    assert trace.steps[0].offers == {"i1": F(23, 8), "i2": F(61, 32)}
    assert trace.steps[1].offers == {"i2": F(31, 16)}
    assert verify_envy_free(trace, EnvyNotion.EX_ANTE) is None


def test_ex_ante_delta_bound(m1):
    with pytest.raises(PricingError, match="delta"):
        run_revenue_ex_ante(m1, F(1))
    with pytest.raises(PricingError):
        run_revenue_ex_ante(m1, F(0))


def test_ex_ante_default_delta(m1):
    scheme = ExAnteRevenueScheme(m1)
    assert scheme.delta == F(1, 4)
    assert scheme.epsilon == F(1, 32)


def test_revenue_orders(m1):
    cov = refined_covering(m1)
    assert order_for_revenue(m1, cov, EnvyNotion.EX_POST) == ["a1", "a2"]
    assert order_for_revenue(m1, cov, EnvyNotion.EX_ANTE) == ["a1", "a2"]
    with pytest.raises(ValueError):
        order_for_revenue(m1, cov, EnvyNotion.WEAK)


def test_uncovered_agents_order():
    market = build_market({"a1": {"i1": 1}, "a2": {"i1": 3}})
    scheme = ExPostRevenueScheme(market)
    assert scheme.fixed_order == ["a1", "a2"]
    trace = scheme.run()
    assert trace.allocation() == {"a1": None, "a2": "i1"}
    assert revenue(trace) == 3
    assert verify_envy_free(trace, EnvyNotion.EX_POST) is None


@pytest.mark.parametrize("index", range(15))
def test_ex_post_revenue_battery(index):
    market = fixed_markets()[index]
    trace = run_revenue_ex_post(market)
    assert revenue(trace) == opt_weight(market)
    assert verify_envy_free(trace, EnvyNotion.EX_POST) is None


@pytest.mark.parametrize("index", range(15))
def test_ex_ante_revenue_battery(index):
    """The loss stays below n * delta and halves with delta."""

    market = fixed_markets()[index]
    opt = opt_weight(market)
    delta = ExAnteRevenueScheme(market).delta
    gaps = []
    for k in range(6):
        trace = run_revenue_ex_ante(market, delta / 2**k)
        assert verify_envy_free(trace, EnvyNotion.EX_ANTE) is None
        gap = opt - revenue(trace)
        assert 0 <= gap <= len(market.agents) * delta / 2**k
        gaps.append(gap)
    for before, after in zip(gaps, gaps[1:]):
        assert before == 2 * after


@pytest.mark.parametrize("index", range(15))
def test_weak_revenue_battery(index):
    market = fixed_markets()[index]
    rng = random.Random(index)
    for _ in range(20):
        order = list(market.agents)
        rng.shuffle(order)
        trace = run_revenue_weak(market, order)
        assert revenue(trace) == opt_weight(market)
        assert social_welfare(trace) == opt_weight(market)
        assert verify_envy_free(trace, EnvyNotion.WEAK) is None


@pytest.mark.parametrize("n,expected", [(5, F(137, 60)), (6, F(49, 20))])
def test_harmonic_dynamic_revenue(n, expected):
    assert revenue(run_revenue_ex_post(gen_harmonic(n))) == expected


def test_weak_needs_order(m1):
    with pytest.raises(PricingError):
        run_revenue_weak(m1, None)


def test_discount(m1):
    trace = run_revenue_ex_post(m1, discount=F(1, 10))
    assert revenue(trace) == 5 - F(2, 10)
    assert verify_envy_free(trace, EnvyNotion.EX_POST) is None
    with pytest.raises(PricingError):
        run_revenue_ex_post(m1, discount=F(3))
    with pytest.raises(PricingError):
        run_revenue_ex_post(m1, discount=F(-1))


def test_discount_makes_purchases_strict(m1):
    trace = run_revenue_weak(m1, ["a2", "a1"], discount=F(1, 100))
    for step in trace.steps:
        assert m1.value(step.agent, step.purchase) - step.price == F(1, 100)


def test_static_baseline_cyclic(cyclic3):
    prices = {"i1": F(1), "i2": F(1), "i3": F(1)}
    trace = run_static_prices(cyclic3, ["a1", "a2", "a3"], prices)
    assert trace.allocation() == {"a1": "i1", "a2": "i2", "a3": "i3"}
    assert verify_envy_free(trace, EnvyNotion.STRONG) is None


def test_static_from_strong(m1):
    trace = run_static_prices(m1, ["a2", "a1"], {"i1": F(3), "i2": F(2)})
    solution = static_from_strong(trace)
    assert solution.prices == {"i1": F(3), "i2": F(2)}
    assert solution.allocation == {"a1": "i1", "a2": "i2"}
    assert solution.revenue == revenue(trace) == 5
    assert solution.export()["revenue"] == "5"


def test_static_from_strong_unsold_not_offered():
    market = build_market({"a1": {"i1": 2, "i2": 1}})
    trace = run_static_prices(market, ["a1"], {"i1": F(1), "i2": F(1)})
    solution = static_from_strong(trace)
    assert solution.prices == {"i1": F(1), "i2": NOT_OFFERED}


def test_static_from_strong_rejects_envy(m1):
    trace = Trace(m1)
    trace.add_step("a1", ["i1", "i2"], {"i1": F(3), "i2": F(2)}, "i1")
    trace.add_step("a2", ["i2"], {"i2": F(1, 2)}, "i2")
    with pytest.raises(TraceError):
        static_from_strong(trace)


def test_static_baseline_loses_welfare(cyclic3):
    """Take-at-zero buyers facing uniform prices reach welfare 2 or 3 depending on ties."""

    scheme = StaticPriceScheme(cyclic3, {"i1": F(1), "i2": F(1), "i3": F(1)})
    traces = explore_traces(scheme, cyclic3)
    assert {social_welfare(trace) for trace in traces} == {2, 3}
    assert all(verify_envy_free(trace, EnvyNotion.STRONG) is None for trace in traces)


def test_ex_ante_single_buyer_pays_item_dual():
    market = build_market({"a1": {"i1": 4}})
    assert ExAnteRevenueScheme(market).delta == F(1, 4)
    trace = run_revenue_ex_ante(market, F(1))
    assert trace.steps[0].offers == {"i1": F(7, 2)}
    assert revenue(trace) == F(7, 2)


@pytest.mark.parametrize("n", [4, 6])
def test_harmonic_revenue_schemes_run(n):
    market = gen_harmonic(n)
    assert revenue(run_revenue_ex_post(market)) == opt_weight(market)
    trace = run_revenue_ex_ante(market)
    assert verify_envy_free(trace, EnvyNotion.EX_ANTE) is None
