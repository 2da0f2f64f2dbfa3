from ._core import (
    Affine,
    Constant,
    Expression,
    RateSpec,
    Split,
    Table,
    as_spec,
    eval_rate,
    substitute,
)
from .parser import parse_rate_expr, spec_from_config

__all__ = [
    "RateSpec",
    "Constant",
    "Affine",
    "Table",
    "Split",
    "Expression",
    "eval_rate",
    "as_spec",
    "substitute",
    "parse_rate_expr",
    "spec_from_config",
]
