import numpy as np
import pytest

from altbd.errors import ConfigError, ParseError
from altbd.expr import Expression
from altbd.model import Topology
from altbd.presets import build_preset, get_preset, list_presets
from altbd.stationary import balance_residual, weights

NAMES = ["retrial", "falin", "dam", "fluid", "telegraph", "telegraph-stabilized", "ones"]


def test_list_presets():
    listed = list_presets()
    assert [name for name, _ in listed] == NAMES
    assert all(summary for _, summary in listed)


def test_every_parameter_is_documented():
    for name in NAMES:
        for key, param in get_preset(name).params.items():
            assert param.help, (name, key)
            assert param.kind in ("number", "int", "rate", "text")


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown preset 'dams'"):
        get_preset("dams")


def test_unknown_parameter():
    with pytest.raises(ConfigError, match="no parameter 'gamma'"):
        build_preset("dam", {"gamma": "1"})


def test_bad_parameter_value():
    with pytest.raises(ConfigError, match="expects a number"):
        build_preset("dam", {"lambda": "lots"})


def test_bad_rate_expression():
    with pytest.raises(ParseError):
        build_preset("telegraph", {"beta": "1 +"})


def test_dam_defaults_and_string_values():
    model = build_preset("dam", {})
    (cert,) = model.certificates
    assert cert.n0 == 1 and cert.rho_bar == pytest.approx(0.75)
    assert model.params == {"lambda": 1.0, "theta": 3.0, "beta": 1.0, "delta": 1.0}

    same = build_preset("dam", {"lambda": "1", "theta": "3", "beta": "1", "delta": "1"})
    assert same.rates == model.rates


def test_rate_parameters_accept_expressions():
    model = build_preset("telegraph", {"beta": "1 + 0.5*abs(n)"})
    assert isinstance(model.params["beta"], Expression)
    assert model.rates.rate("beta", -4) == 3.0


def test_retrial_general_policy():
    model = build_preset("retrial", {"policy": "general", "retrial": "2*n"})
    assert model.rates.rate("nu", 3) == 6.0
    with pytest.raises(ConfigError):
        build_preset("retrial", {"policy": "general"})


@pytest.mark.parametrize(
    "params, topology",
    [
        ({}, Topology.one_sided()),
        ({"topology": "two-sided"}, Topology.two_sided()),
        ({"topology": "finite", "n": "3"}, Topology.finite(3)),
    ],
)
def test_ones(params, topology):
    model = build_preset("ones", params)
    assert model.rates.topology == topology
    assert model.closed_form is None


def test_ones_bad_topology():
    with pytest.raises(ConfigError, match="unknown topology"):
        build_preset("ones", {"topology": "circle"})
    with pytest.raises(ConfigError, match="expects an integer"):
        build_preset("ones", {"topology": "finite", "n": "2.5"})


@pytest.mark.parametrize(
    "name, lo, hi",
    [
        ("retrial", 0, 30),
        ("falin", 0, 30),
        ("dam", 0, 30),
        ("fluid", 0, 30),
        ("telegraph", -30, 30),
        ("telegraph-stabilized", -30, 30),
    ],
)
def test_closed_forms_agree_with_generic_weights(name, lo, hi):
    model = build_preset(name, {})
    closed = model.closed_form(lo, hi)
    generic = weights(model.rates, lo, hi)
    np.testing.assert_allclose(closed.log_b, generic.log_b, rtol=0, atol=1e-10)
    np.testing.assert_allclose(closed.log_d, generic.log_d, rtol=0, atol=1e-10)
    assert balance_residual(closed, model.rates) < 1e-10


def test_one_sided_closed_forms_start_at_zero():
    with pytest.raises(ValueError, match="n_min=-1"):
        build_preset("dam", {}).closed_form(-1, 5)
