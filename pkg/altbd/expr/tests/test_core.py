import numpy as np
import pytest

from altbd.errors import NegativeRate, NonFinite
from altbd.expr import (
    Affine,
    Constant,
    Split,
    Table,
    as_spec,
    eval_rate,
    parse_rate_expr,
    spec_from_config,
    substitute,
)


def test_affine():
    assert eval_rate(Affine(1, 0.5), 4) == 3.0


def test_constant_ignores_level():
    assert eval_rate(Constant(2), -7) == 2.0


def test_table_falls_back_to_tail():
    spec = Table({1: 2, 2: 5}, Constant(7))
    assert [eval_rate(spec, n) for n in (1, 2, 9, 0)] == [2.0, 5.0, 7.0, 7.0]
    assert list(spec.evaluate(np.array([0, 1, 2, 3]))) == [7.0, 2.0, 5.0, 7.0]


def test_table_equality_ignores_entry_order():
    assert Table({2: 5, 1: 2}, Constant(7)) == Table({1: 2.0, 2: 5.0}, Constant(7))
    assert hash(Table({2: 5, 1: 2}, Constant(7))) == hash(Table({1: 2, 2: 5}, Constant(7)))


def test_negative_rate():
    with pytest.raises(NegativeRate, match="-1.0"):
        eval_rate(Affine(1, -1), 2)


def test_zero_is_not_negative():
    assert eval_rate(Affine(1, -1), 1) == 0.0


def test_non_finite_constant():
    with pytest.raises(NonFinite):
        eval_rate(Constant(float("inf")), 0)


def test_call_is_eval_rate():
    assert Affine(0, 2)(3) == 6.0


def test_as_spec():
    assert as_spec(3) == Constant(3.0)
    spec = Affine(1, 1)
    assert as_spec(spec) is spec
    with pytest.raises(TypeError):
        as_spec("1 + n")
    with pytest.raises(TypeError):
        as_spec(True)


@pytest.mark.parametrize(
    "spec",
    [
        Constant(1.5),
        Affine(0.1, 2.0),
        Table({0: 1.0, 3: 2.5}, Affine(1, 1)),
        Split(Constant(2.0), 1, Table({1: 1.0}, Affine(0, 1))),
    ],
)
def test_config_form_round_trips(spec):
    assert spec_from_config(spec.to_config()) == spec


def test_split_switches_at_cut():
    spec = Split(Constant(5), 0, Affine(1, 1))
    assert [eval_rate(spec, n) for n in (-2, -1, 0, 3)] == [5.0, 5.0, 1.0, 4.0]
    assert list(spec.evaluate(np.array([-2, -1, 0, 3]))) == [5.0, 5.0, 1.0, 4.0]
    assert eval_rate(spec.scaled(2), -1) == 10.0


def test_split_only_evaluates_the_active_side():
    # ln(n - 1) is undefined at n <= 1, which the cut keeps out of reach
    spec = Split(Constant(1), 2, parse_rate_expr("ln(n - 1)"))
    assert eval_rate(spec, 0) == 1.0
    assert eval_rate(spec, 3) == pytest.approx(np.log(2))


def test_substitute_shifts_the_level():
    spec = parse_rate_expr("1 + n^2")
    shifted = substitute(spec.root, parse_rate_expr("n - 1").root)
    assert shifted.scalar(3) == 5.0
    assert shifted.render() == "1 + (n - 1)^2"
