import math

import numpy as np
import pytest

from altbd.errors import ConfigError, NegativeRate, NonFinite, OutOfSupport, ZeroRate
from altbd.expr import Affine, Constant, Table, parse_rate_expr
from altbd.model import (
    ChainState,
    Phase,
    RateSet,
    Topology,
    aggregates,
    constant_rate_set,
    exit_rate,
    transitions,
)

B, D = Phase.B, Phase.D


def dam_rates():
    return RateSet(1, 2, 1, 1, 0, 0, allow_zeros=True)


def test_phase_order():
    assert B < D
    assert not D < B
    assert sorted([ChainState(1, D), ChainState(1, B), ChainState(0, D)]) == [
        ChainState(0, D),
        ChainState(1, B),
        ChainState(1, D),
    ]
    assert B.flip() is D and D.flip() is B


@pytest.mark.parametrize(
    "topology, n, inside",
    [
        (Topology.one_sided(), 0, True),
        (Topology.one_sided(), -1, False),
        (Topology.two_sided(), -50, True),
        (Topology.finite(3), 3, True),
        (Topology.finite(3), 4, False),
    ],
)
def test_topology_contains(topology, n, inside):
    assert topology.contains(n) is inside


@pytest.mark.parametrize("n", [0, -1, None, 2.5, True])
def test_finite_topology_needs_positive_n(n):
    with pytest.raises(ConfigError):
        Topology.finite(n)


def test_aggregates_of_ones():
    agg = aggregates(constant_rate_set(1.0), 3)
    assert (agg.Lambda, agg.M, agg.LambdaPlus, agg.MPlus) == (2, 2, 4, 4)


def test_aggregates_force_zero_downrate_at_level_zero():
    agg = aggregates(constant_rate_set(1.0), 0)
    assert agg.M == 0
    assert agg.MPlus == 2


def test_aggregates_of_dam():
    agg = aggregates(dam_rates(), 5)
    assert (agg.Lambda, agg.M, agg.LambdaPlus, agg.MPlus) == (1, 2, 3, 4)


def test_aggregates_out_of_support():
    with pytest.raises(OutOfSupport):
        aggregates(constant_rate_set(1.0), -1)


def test_transitions_from_bottom_death_state():
    assert transitions(constant_rate_set(1.0), ChainState(0, D)) == [(ChainState(0, B), 1.0)]


def test_transitions_from_birth_state():
    assert transitions(constant_rate_set(1.0), ChainState(2, B)) == [
        (ChainState(3, B), 1.0),
        (ChainState(2, D), 1.0),
        (ChainState(3, D), 1.0),
    ]


def test_transitions_from_death_state():
    assert transitions(constant_rate_set(1.0), ChainState(2, D)) == [
        (ChainState(1, D), 1.0),
        (ChainState(2, B), 1.0),
        (ChainState(1, B), 1.0),
    ]


def test_transitions_at_finite_top():
    rates = constant_rate_set(1.0, Topology.finite(2))
    assert transitions(rates, ChainState(2, B)) == [(ChainState(2, D), 1.0)]


def test_transitions_two_sided_go_below_zero():
    rates = constant_rate_set(1.0, Topology.two_sided())
    targets = [t for t, _ in transitions(rates, ChainState(0, D))]
    assert ChainState(-1, D) in targets and ChainState(-1, B) in targets


def test_transitions_out_of_support():
    with pytest.raises(OutOfSupport):
        transitions(constant_rate_set(1.0, Topology.finite(2)), ChainState(3, B))


def random_rate_set(rng, topology):
    def spec():
        kind = rng.integers(3)
        if kind == 0:
            return Constant(float(np.exp(rng.uniform(np.log(0.1), np.log(10)))))
        if kind == 1:
            return Affine(float(rng.uniform(0.1, 3)), float(rng.uniform(0, 1)))
        return Table({1: float(rng.uniform(0.1, 10))}, Constant(float(rng.uniform(0.1, 10))))

    return RateSet(spec(), spec(), spec(), spec(), spec(), spec(), topology=topology)


def test_transitions_stay_in_topology_and_sum_to_exit_rate():
    rng = np.random.default_rng(2024)
    for i in range(1000):
        topo = [Topology.one_sided(), Topology.finite(int(rng.integers(1, 6)))][i % 2]
        rates = random_rate_set(rng, topo)
        top = topo.upper if topo.upper is not None else 3
        for n in {0, 1, top}:
            for phase in (B, D):
                rows = transitions(rates, ChainState(n, phase))
                assert all(topo.contains(t.level) for t, _ in rows)
                assert all(q > 0 for _, q in rows)
                assert exit_rate(rates, ChainState(n, phase)) == pytest.approx(
                    sum(q for _, q in rows)
                )


def test_aggregates_identities_at_probed_levels():
    rng = np.random.default_rng(5)
    for _ in range(50):
        rates = random_rate_set(rng, Topology.one_sided())
        for n in range(0, 12):
            agg = aggregates(rates, n)
            assert agg.LambdaPlus == pytest.approx(1 + agg.Lambda + rates.rate("delta", n))
            assert agg.MPlus == pytest.approx(1 + agg.M + rates.rate("beta", n))


def test_zero_rates_need_the_flag():
    rates = RateSet(1, 0, 1, 1, 1, 1)
    with pytest.raises(ZeroRate, match="allow_zeros"):
        rates.rate("mu", 2)
    assert RateSet(1, 0, 1, 1, 1, 1, allow_zeros=True).rate("mu", 2) == 0.0


def test_rate_errors_name_the_rate():
    rates = RateSet(Affine(1, -1), 1, 1, 1, 1, 1)
    with pytest.raises(NegativeRate, match="'lambda'"):
        rates.rate("lambda", 3)

    rates = RateSet(parse_rate_expr("1/(n-2)"), 1, 1, 1, 1, 1)
    with pytest.raises(NonFinite, match="'lambda'.*n=2"):
        rates.rate("lambda", 2)


def test_evaluate_matches_rate_and_applies_forcings():
    rates = RateSet(
        Affine(1, 1), parse_rate_expr("2 + n"), 1, 1, 1, 3, topology=Topology.finite(4)
    )
    levels = np.arange(0, 5)
    for name in ("lambda", "mu", "nu", "kappa"):
        vec = rates.evaluate(name, levels)
        assert list(vec) == [rates.rate(name, int(n)) for n in levels]
    assert rates.evaluate("mu", levels)[0] == 0.0
    assert rates.evaluate("lambda", levels)[-1] == 0.0


def test_evaluate_non_strict_keeps_overflow():
    rates = RateSet(parse_rate_expr("2^n"), 1, 1, 1, 1, 1)
    levels = np.array([1, 2000])
    with pytest.raises(NonFinite):
        rates.evaluate("lambda", levels)
    vec = rates.evaluate("lambda", levels, strict=False)
    assert vec[0] == 2.0 and not math.isfinite(vec[1])


def test_scaled_rate_set():
    rates = RateSet(Affine(1, 2), parse_rate_expr("1 + n^2"), 1, 2, 3, 4)
    doubled = rates.scaled(2.0)
    for name in ("lambda", "mu", "delta", "beta", "kappa", "nu"):
        assert doubled.rate(name, 3) == pytest.approx(2 * rates.rate(name, 3))
    with pytest.raises(ValueError):
        rates.scaled(0)


def test_config_round_trip():
    rates = RateSet(
        Affine(1, 0.5),
        parse_rate_expr("min(1, 1/(1+n))"),
        Table({1: 2, 2: 5}, Constant(7)),
        2,
        0,
        1,
        topology=Topology.finite(5),
        allow_zeros=True,
    )
    config = rates.to_config()
    assert config["topology"] == {"kind": "finite", "n": 5}
    assert config["rates"]["delta"] == {"table": {"1": 2.0, "2": 5.0}, "tail": 7.0}
    assert RateSet.from_config(config) == rates
    assert RateSet.from_config(config).to_config() == config


@pytest.mark.parametrize(
    "config",
    [
        {"rates": {"lambda": 1}},
        {"topology": {"kind": "sideways"}, "rates": {k: 1 for k in ("lambda", "mu", "delta", "beta", "kappa", "nu")}},
        {"rates": {k: 1 for k in ("lambda", "mu", "delta", "beta", "kappa", "nu", "rho")}},
        {"rates": {k: 1 for k in ("lambda", "mu", "delta", "beta", "kappa", "nu")}, "allow_zeros": "yes"},
        {"rates": {k: 1 for k in ("lambda", "mu", "delta", "beta", "kappa", "nu")}, "colour": 1},
        [1, 2],
    ],
)
def test_bad_configs(config):
    with pytest.raises(ConfigError):
        RateSet.from_config(config)


def test_states_order():
    rates = constant_rate_set(1.0)
    assert list(rates.states(0, 1)) == [
        ChainState(0, B),
        ChainState(0, D),
        ChainState(1, B),
        ChainState(1, D),
    ]
