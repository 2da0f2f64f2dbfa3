from __future__ import annotations

import logging

from ..errors import ConfigError, ParseError
from ._core import (
    FUNCTIONS,
    Affine,
    BinOp,
    Call,
    Constant,
    Expression,
    Neg,
    Node,
    Num,
    RateSpec,
    Split,
    Table,
    Var,
)

__all__ = ["parse_rate_expr", "spec_from_config"]

logger = logging.getLogger(__name__)

_DIGITS = set("0123456789")
_IDENT = set("abcdefghijklmnopqrstuvwxyz")
_OPERAND_START = frozenset({"number", "n", "(", "-", *FUNCTIONS})


class _Parser:
    """
    Recursive-descent parser for rate expressions.

    Grammar, loosest binding first::

        expr   := term (("+" | "-") term)*
        term   := unary (("*" | "/") unary)*
        unary  := "-" unary | power
        power  := atom ("^" unary)?
        atom   := number | "n" | func "(" expr ("," expr)* ")" | "(" expr ")"
    """

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    # -- low level --

    def fail(self, expected) -> ParseError:
        offset = len(self.text[: self.pos].encode("utf-8"))
        return ParseError(self.text, offset, frozenset(expected))

    def skip_whitespace(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str | None:
        self.skip_whitespace()
        if self.pos >= len(self.text):
            return None
        return self.text[self.pos]

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.fail({ch})
        self.pos += 1

    # -- grammar --

    def parse(self) -> Node:
        node = self.expr()
        if self.peek() is not None:
            raise self.fail({"+", "-", "*", "/", "^", "end of input"})
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek() == "-":
            self.pos += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        ch = self.peek()
        if ch is None:
            raise self.fail(_OPERAND_START)
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if ch in _DIGITS or ch == ".":
            return self.number()
        if ch in _IDENT:
            return self.name()
        raise self.fail(_OPERAND_START)

    def number(self) -> Num:
        start = self.pos
        text = self.text
        while self.pos < len(text) and text[self.pos] in _DIGITS:
            self.pos += 1
        if self.pos < len(text) and text[self.pos] == ".":
            self.pos += 1
            while self.pos < len(text) and text[self.pos] in _DIGITS:
                self.pos += 1
        mantissa = text[start : self.pos]
        if mantissa == ".":
            self.pos = start
            raise self.fail({"number"})
        if self.pos < len(text) and text[self.pos] in "eE":
            exp_start = self.pos
            self.pos += 1
            if self.pos < len(text) and text[self.pos] in "+-":
                self.pos += 1
            digits_start = self.pos
            while self.pos < len(text) and text[self.pos] in _DIGITS:
                self.pos += 1
            if self.pos == digits_start:
                # "2e" is not an exponent; let the caller complain about the "e"
                self.pos = exp_start
        return Num(float(text[start : self.pos]))

    def name(self) -> Node:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in _IDENT:
            self.pos += 1
        ident = self.text[start : self.pos]
        if ident == "n":
            return Var()
        if ident not in FUNCTIONS:
            self.pos = start
            raise self.fail(_OPERAND_START)
        arity = FUNCTIONS[ident][0]
        self.expect("(")
        args = [self.expr()]
        while len(args) < arity:
            self.expect(",")
            args.append(self.expr())
        self.expect(")")
        return Call(ident, tuple(args))


def parse_rate_expr(text: str) -> Expression:
    """
    Parse a rate expression over the level variable `n`.

    The grammar has decimal literals, the variable `n`, unary minus, the binary operators
    `+ - * / ^`, the functions `abs`, `ln`, `exp`, `min` and `max`, and parentheses. `^`
    binds tightest and associates to the right; unary minus comes next, then `* /`, then
    `+ -`. Whitespace is insignificant.

    Parameters
    ----------
    text
        The expression source.

    Returns
    -------
    Expression
        A rate spec wrapping the syntax tree. Evaluation errors (such as a division by zero
        at some level) surface only when the spec is evaluated.

    Raises
    ------
    ParseError
        With the byte offset of the failure and the set of tokens expected there.

    Examples
    --------
    ```{python}
    from altbd.expr import parse_rate_expr

    spec = parse_rate_expr("1 + 0.5*n")
    spec(2)
    ```
    """
    if not isinstance(text, str):
        raise TypeError(f"expected str, got {type(text).__name__}")
    root = _Parser(text).parse()
    logger.debug("parsed rate expression %r as %s", text, root.render())
    return Expression(root, source=text)


def spec_from_config(value) -> RateSpec:
    """
    Build a rate spec from its config form.

    A number is a constant, `{"a": .., "b": ..}` is affine, `{"table": {...}, "tail": ...}`
    is a table, `{"below": .., "at": k, "above": ..}` switches specs at level `k` and a
    string is an expression.
    """
    if isinstance(value, bool):
        raise ConfigError(f"a rate cannot be a boolean, got {value!r}")
    if isinstance(value, (int, float)):
        return Constant(float(value))
    if isinstance(value, str):
        return parse_rate_expr(value)
    if isinstance(value, dict):
        keys = set(value)
        if keys == {"a", "b"}:
            return Affine(_number(value["a"], "a"), _number(value["b"], "b"))
        if keys == {"table", "tail"}:
            table = value["table"]
            if not isinstance(table, dict):
                raise ConfigError(f"'table' must be an object, got {table!r}")
            try:
                entries = {int(k): _number(v, f"table[{k}]") for k, v in table.items()}
            except ValueError as e:
                raise ConfigError(f"table levels must be integers: {e}") from e
            return Table(entries, spec_from_config(value["tail"]))
        if keys == {"below", "at", "above"}:
            at = value["at"]
            if isinstance(at, bool) or not isinstance(at, int):
                raise ConfigError(f"'at' must be an integer level, got {at!r}")
            return Split(spec_from_config(value["below"]), at, spec_from_config(value["above"]))
        raise ConfigError(
            f"cannot interpret rate object with keys {sorted(keys)}; "
            "expected {a, b}, {table, tail} or {below, at, above}"
        )
    raise ConfigError(f"cannot interpret rate {value!r}")


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{what}' must be a number, got {value!r}")
    return float(value)
