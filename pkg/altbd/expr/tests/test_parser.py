import math

import numpy as np
import pytest

from altbd.errors import NonFinite, ParseError, ConfigError
from altbd.expr import (
    Affine,
    Constant,
    Split,
    Table,
    eval_rate,
    parse_rate_expr,
    spec_from_config,
)


@pytest.mark.parametrize(
    "text, n, expected",
    [
        ("1 + 0.5*n", 2, 2.0),
        ("2^n", 3, 8.0),
        ("1/(1+abs(n))", -3, 0.25),
        ("2^3^2", 0, 512.0),
        ("-2^2 + 5", 0, 1.0),
        ("2^-1", 0, 0.5),
        ("10 - 4 - 3", 0, 3.0),
        ("12 / 3 / 2", 0, 2.0),
        ("max(1, n) * min(2, 3)", 4, 8.0),
        ("exp(ln(3))", 0, 3.0),
        ("  ( n )*( n ) ", 5, 25.0),
        ("1.5e1", 0, 15.0),
        (".5", 0, 0.5),
    ],
)
def test_grammar_evaluates(text, n, expected):
    spec = parse_rate_expr(text)
    assert eval_rate(spec, n) == pytest.approx(expected, rel=1e-15)


def test_division_by_zero_is_deferred_to_evaluation():
    spec = parse_rate_expr("min(1, 1/n)")
    assert eval_rate(spec, 2) == 0.5
    with pytest.raises(NonFinite, match="n=0"):
        eval_rate(spec, 0)


def test_overflow_is_non_finite():
    spec = parse_rate_expr("2^n")
    with pytest.raises(NonFinite):
        eval_rate(spec, 5000)


def test_ln_of_zero_is_non_finite():
    with pytest.raises(NonFinite):
        eval_rate(parse_rate_expr("ln(n)"), 0)


@pytest.mark.parametrize(
    "text, offset, expected_token",
    [
        ("", 0, "n"),
        ("1 +", 3, "("),
        ("1 + * 2", 4, "number"),
        ("(1 + n", 6, ")"),
        ("sin(n)", 0, "abs"),
        ("min(1)", 5, ","),
        ("2 n", 2, "end of input"),
        ("1 $ 2", 2, "+"),
    ],
)
def test_parse_errors_report_offset_and_expected(text, offset, expected_token):
    with pytest.raises(ParseError) as info:
        parse_rate_expr(text)

    assert info.value.offset == offset
    assert expected_token in info.value.expected


def test_parse_error_offset_counts_bytes():
    with pytest.raises(ParseError) as info:
        parse_rate_expr("n + é")
    assert info.value.offset == 4

    with pytest.raises(ParseError) as info:
        parse_rate_expr("é")
    assert info.value.offset == 0


def test_parse_rejects_non_strings():
    with pytest.raises(TypeError):
        parse_rate_expr(3)


@pytest.mark.parametrize(
    "text",
    [
        "1 + 0.5 * n",
        "(1 + n) * 2",
        "1 - (2 - n)",
        "2^3^n",
        "(2^3)^n",
        "(-2)^n",
        "-(1 + n)",
        "min(1, 1 / (1 + abs(n)))",
        "n / (n * 2)",
        "exp(-n) + 0.1",
    ],
)
def test_canonical_text_reparses_to_same_tree(text):
    spec = parse_rate_expr(text)
    again = parse_rate_expr(str(spec))

    assert again == spec
    assert str(again) == str(spec)


def test_canonical_text(snapshot):
    spec = parse_rate_expr("min(1,1/(1+abs(n)))+ 2^-n*(3-n)")
    assert str(spec) == snapshot


def test_scalar_and_array_evaluations_agree():
    rng = np.random.default_rng(11)
    texts = [
        "1 + 0.5*n",
        "1/(1+abs(n))",
        "exp(-n/10) + max(n, 0.5)",
        "ln(2 + n^2) * 3",
        "min(4, 2^abs(n))",
    ]
    levels = np.arange(-30, 31)
    for text in texts:
        spec = parse_rate_expr(text)
        vec = spec.evaluate(levels)
        for n in rng.choice(levels, size=15):
            assert vec[levels == n][0] == pytest.approx(eval_rate(spec, int(n)), rel=1e-13)


def test_array_evaluation_marks_min_hidden_division_as_nan():
    spec = parse_rate_expr("min(1, 1/n)")
    vec = spec.evaluate(np.array([0, 1, 2]))

    assert math.isnan(vec[0])
    assert list(vec[1:]) == [1.0, 0.5]


@pytest.mark.parametrize(
    "value, spec",
    [
        (2, Constant(2.0)),
        (0.25, Constant(0.25)),
        ({"a": 1, "b": 0.5}, Affine(1.0, 0.5)),
        ({"table": {"1": 2, "2": 5}, "tail": 7}, Table({1: 2.0, 2: 5.0}, Constant(7.0))),
        ({"below": 3, "at": 0, "above": "n"}, Split(Constant(3.0), 0, parse_rate_expr("n"))),
        ("1 + n", parse_rate_expr("1+n")),
    ],
)
def test_spec_from_config(value, spec):
    assert spec_from_config(value) == spec


@pytest.mark.parametrize(
    "value",
    [
        True,
        None,
        [1, 2],
        {"a": 1},
        {"table": {"x": 1}, "tail": 1},
        {"a": "1", "b": 2},
        {"below": 1, "at": 0.5, "above": 2},
    ],
)
def test_spec_from_config_rejects(value):
    with pytest.raises(ConfigError):
        spec_from_config(value)


def test_spec_from_config_propagates_parse_errors():
    with pytest.raises(ParseError):
        spec_from_config("1 +")
