# Rate specifications: level-indexed, nonnegative rate functions
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
import json
import math
from typing import Callable, Mapping, Union

import numpy as np

from ..errors import NegativeRate, NonFinite

__all__ = [
    "RateSpec",
    "Constant",
    "Affine",
    "Table",
    "Expression",
    "Split",
    "Node",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "FUNCTIONS",
    "eval_rate",
    "as_spec",
    "substitute",
]

ConfigValue = Union[float, int, str, dict]


def _fmt(x: float) -> str:
    # shortest repr that round-trips, without a trailing ".0"
    text = repr(float(x))
    if text.endswith(".0"):
        text = text[:-2]
    return text


#### Expression syntax tree ####

# binding strength used when printing with minimal parentheses
_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


class Node(ABC):
    """A node of a parsed rate expression over the level variable `n`."""

    prec: int = _PREC_ATOM

    @abstractmethod
    def scalar(self, n: float) -> float:
        """Evaluate with Python floats. May raise ArithmeticError/ValueError."""

    @abstractmethod
    def array(self, n: np.ndarray) -> np.ndarray:
        """Evaluate elementwise with numpy. Invalid entries come back as nan."""

    @abstractmethod
    def render(self) -> str: ...

    def _wrap(self, child: Node, min_prec: int) -> str:
        text = child.render()
        return f"({text})" if child.prec < min_prec else text


@dataclass(frozen=True)
class Num(Node):
    value: float

    def scalar(self, n: float) -> float:
        return self.value

    def array(self, n: np.ndarray) -> np.ndarray:
        return np.full(n.shape, self.value, dtype=float)

    def render(self) -> str:
        return _fmt(self.value)


@dataclass(frozen=True)
class Var(Node):
    def scalar(self, n: float) -> float:
        return float(n)

    def array(self, n: np.ndarray) -> np.ndarray:
        return n.astype(float)

    def render(self) -> str:
        return "n"


@dataclass(frozen=True)
class Neg(Node):
    operand: Node
    prec = _PREC_NEG

    def scalar(self, n: float) -> float:
        return -self.operand.scalar(n)

    def array(self, n: np.ndarray) -> np.ndarray:
        return -self.operand.array(n)

    def render(self) -> str:
        return "-" + self._wrap(self.operand, _PREC_NEG)


def _py_pow(a: float, b: float) -> float:
    out = a**b
    if isinstance(out, complex):
        raise ValueError("complex power")
    return float(out)


def _py_div(a: float, b: float) -> float:
    return a / b


_SCALAR_OPS: dict[str, Callable[[float, float], float]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _py_div,
    "^": _py_pow,
}

_ARRAY_OPS: dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}

_OP_PREC = {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}


def _finite_or_nan(values: np.ndarray) -> np.ndarray:
    # an infinite intermediate is an error, and min/max must not hide it
    values = np.asarray(values, dtype=float)
    return np.where(np.isfinite(values), values, np.nan)


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    @property
    def prec(self) -> int:  # type: ignore[override]
        return _OP_PREC[self.op]

    def scalar(self, n: float) -> float:
        return _SCALAR_OPS[self.op](self.left.scalar(n), self.right.scalar(n))

    def array(self, n: np.ndarray) -> np.ndarray:
        return _finite_or_nan(_ARRAY_OPS[self.op](self.left.array(n), self.right.array(n)))

    def render(self) -> str:
        own = self.prec
        if self.op == "^":
            # right-associative; the exponent may be a unary minus
            left = self._wrap(self.left, _PREC_ATOM)
            right = self._wrap(self.right, _PREC_NEG)
            return f"{left}^{right}"
        left = self._wrap(self.left, own)
        right = self._wrap(self.right, own + 1)
        return f"{left} {self.op} {right}"


def _py_ln(x: float) -> float:
    return math.log(x)


FUNCTIONS: dict[str, tuple[int, Callable[..., float], Callable[..., np.ndarray]]] = {
    # name: (arity, scalar implementation, array implementation)
    "abs": (1, abs, np.abs),
    "ln": (1, _py_ln, np.log),
    "exp": (1, math.exp, np.exp),
    "min": (2, min, np.minimum),
    "max": (2, max, np.maximum),
}


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple[Node, ...]

    def scalar(self, n: float) -> float:
        fn = FUNCTIONS[self.name][1]
        return float(fn(*(a.scalar(n) for a in self.args)))

    def array(self, n: np.ndarray) -> np.ndarray:
        fn = FUNCTIONS[self.name][2]
        return _finite_or_nan(fn(*(a.array(n) for a in self.args)))

    def render(self) -> str:
        inner = ", ".join(a.render() for a in self.args)
        return f"{self.name}({inner})"


#### Rate specifications ####


class RateSpec(ABC):
    """
    A nonnegative rate as a function of the level `n`.

    The variants are `Constant`, `Affine`, `Table`, `Split` and `Expression`. Rate specs are
    immutable and can be shared freely between rate sets and threads.
    """

    def __call__(self, n: int) -> float:
        return eval_rate(self, n)

    @abstractmethod
    def _raw(self, n: int) -> float:
        """Unchecked scalar evaluation."""

    @abstractmethod
    def evaluate(self, levels: np.ndarray) -> np.ndarray:
        """
        Evaluate at every entry of `levels`.

        No validity checks are made: overflow, division by zero and negative values are
        returned as they come out of numpy.
        """

    @abstractmethod
    def to_config(self) -> ConfigValue:
        """The JSON-compatible config form of this spec."""

    def __str__(self) -> str:
        return self.render()

    @abstractmethod
    def render(self) -> str:
        """Canonical expression text (parses back to an equivalent spec)."""

    @abstractmethod
    def scaled(self, c: float) -> RateSpec:
        """This rate multiplied by the constant `c`."""


@dataclass(frozen=True)
class Constant(RateSpec):
    value: float

    def scaled(self, c: float) -> RateSpec:
        return Constant(c * self.value)

    def _raw(self, n: int) -> float:
        return float(self.value)

    def evaluate(self, levels: np.ndarray) -> np.ndarray:
        return np.full(np.shape(levels), float(self.value))

    def to_config(self) -> ConfigValue:
        return float(self.value)

    def render(self) -> str:
        return _fmt(self.value)


@dataclass(frozen=True)
class Affine(RateSpec):
    """The rate `a + b*n`."""

    a: float
    b: float

    def scaled(self, c: float) -> RateSpec:
        return Affine(c * self.a, c * self.b)

    def _raw(self, n: int) -> float:
        return self.a + self.b * n

    def evaluate(self, levels: np.ndarray) -> np.ndarray:
        return self.a + self.b * np.asarray(levels, dtype=float)

    def to_config(self) -> ConfigValue:
        return {"a": float(self.a), "b": float(self.b)}

    def render(self) -> str:
        return json.dumps(self.to_config())


@dataclass(frozen=True)
class Table(RateSpec):
    """
    Explicit values at listed levels, and the `tail` spec everywhere else.

    Parameters
    ----------
    entries
        Mapping from level to rate value.
    tail
        Spec used at every level not in `entries`.
    """

    entries: Mapping[int, float]
    tail: RateSpec

    def __post_init__(self):
        # freeze into a sorted tuple-backed dict so equal tables compare and hash equal
        object.__setattr__(
            self, "entries", dict(sorted((int(k), float(v)) for k, v in self.entries.items()))
        )

    def __hash__(self) -> int:
        return hash((tuple(self.entries.items()), self.tail))

    def scaled(self, c: float) -> RateSpec:
        return Table({k: c * v for k, v in self.entries.items()}, self.tail.scaled(c))

    def _raw(self, n: int) -> float:
        if n in self.entries:
            return self.entries[n]
        return self.tail._raw(n)

    def evaluate(self, levels: np.ndarray) -> np.ndarray:
        levels = np.asarray(levels)
        out = np.array(self.tail.evaluate(levels), dtype=float)
        for k, v in self.entries.items():
            out[levels == k] = v
        return out

    def to_config(self) -> ConfigValue:
        return {
            "table": {str(k): v for k, v in self.entries.items()},
            "tail": self.tail.to_config(),
        }

    def render(self) -> str:
        return json.dumps(self.to_config())


@dataclass(frozen=True)
class Expression(RateSpec):
    """A parsed rate expression. Build these with `parse_rate_expr()`."""

    root: Node
    source: str = field(default="", compare=False)

    def scaled(self, c: float) -> RateSpec:
        return Expression(BinOp("*", Num(float(c)), self.root))

    def _raw(self, n: int) -> float:
        return self.root.scalar(n)

    def evaluate(self, levels: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            return np.asarray(self.root.array(np.asarray(levels)), dtype=float)

    def to_config(self) -> ConfigValue:
        return self.render()

    def render(self) -> str:
        return self.root.render()


@dataclass(frozen=True)
class Split(RateSpec):
    """
    One spec below a cut level and another from it upwards.

    `Split(below, at, above)(n)` is `below(n)` for `n < at` and `above(n)` otherwise. Two
    sided models whose rates follow different laws on each side of the origin use this.
    """

    below: RateSpec
    at: int
    above: RateSpec

    def scaled(self, c: float) -> RateSpec:
        return Split(self.below.scaled(c), self.at, self.above.scaled(c))

    def _raw(self, n: int) -> float:
        return self.below._raw(n) if n < self.at else self.above._raw(n)

    def evaluate(self, levels: np.ndarray) -> np.ndarray:
        levels = np.asarray(levels)
        return np.where(levels < self.at, self.below.evaluate(levels), self.above.evaluate(levels))

    def to_config(self) -> ConfigValue:
        return {"below": self.below.to_config(), "at": self.at, "above": self.above.to_config()}

    def render(self) -> str:
        return json.dumps(self.to_config())


def eval_rate(spec: RateSpec, n: int) -> float:
    """
    Evaluate a rate spec at level `n`.

    Parameters
    ----------
    spec
        The rate spec.
    n
        The level.

    Returns
    -------
    float
        The (finite, nonnegative) rate.

    Raises
    ------
    NonFinite
        If the value overflows or is undefined (e.g. a division by zero).
    NegativeRate
        If the value is negative.

    Examples
    --------
    ```{python}
    from altbd.expr import Affine, eval_rate

    eval_rate(Affine(1, 0.5), 4)
    ```
    """
    try:
        value = spec._raw(n)
    except (ArithmeticError, ValueError) as e:
        raise NonFinite(n, detail=str(e)) from e
    if not math.isfinite(value):
        raise NonFinite(n)
    if value < 0:
        raise NegativeRate(value, n)
    # -0.0 reads badly in output
    return value + 0.0


def as_spec(value: RateSpec | float | int) -> RateSpec:
    """Wrap plain numbers as `Constant` specs; pass specs through."""
    if isinstance(value, RateSpec):
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"expected a RateSpec or a number, got {type(value).__name__}")
    return Constant(float(value))


def substitute(node: Node, replacement: Node) -> Node:
    """The tree `node` with every occurrence of `n` replaced by `replacement`."""
    if isinstance(node, Var):
        return replacement
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, replacement))
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.left, replacement), substitute(node.right, replacement))
    if isinstance(node, Call):
        return Call(node.name, tuple(substitute(a, replacement) for a in node.args))
    return node
