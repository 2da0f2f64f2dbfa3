from __future__ import annotations

__all__ = [
    "AltbdError",
    "ModelError",
    "ConfigError",
    "NegativeRate",
    "NonFinite",
    "ZeroRate",
    "OutOfSupport",
    "ParseError",
    "Unstable",
    "ControlInvalid",
    "NumericalError",
    "DegenerateDenominator",
    "NumericalBreakdown",
    "SingularSystem",
    "MissingCertificate",
    "CertificateViolated",
]


class AltbdError(Exception):
    """Base class for every error raised by altbd."""


#### Model errors ####


class ModelError(AltbdError, ValueError):
    """A rate set, rate spec or model file is invalid."""


class ConfigError(ModelError):
    """A model config document or preset parameter cannot be interpreted."""


class NegativeRate(ModelError):
    def __init__(self, value: float, n: int, name: str | None = None):
        self.value = value
        self.n = n
        self.name = name
        where = f"rate '{name}'" if name else "rate"
        super().__init__(f"{where} evaluates to {value!r} < 0 at level n={n}")


class NonFinite(ModelError):
    def __init__(self, n: int, name: str | None = None, detail: str = ""):
        self.n = n
        self.name = name
        where = f"rate '{name}'" if name else "rate"
        msg = f"{where} is not finite at level n={n}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ZeroRate(ModelError):
    def __init__(self, n: int, name: str):
        self.n = n
        self.name = name
        super().__init__(
            f"rate '{name}' is 0 at level n={n}; rate sets are strictly positive "
            "unless built with allow_zeros=True"
        )


class OutOfSupport(ModelError, LookupError):
    def __init__(self, n: int, topology: object):
        self.n = n
        self.topology = topology
        super().__init__(f"level n={n} is outside the support of {topology}")


class ParseError(ModelError):
    """
    A rate expression is malformed.

    Parameters
    ----------
    text
        The full input text.
    offset
        Byte offset (0-based) where parsing failed.
    expected
        The tokens that would have been accepted at `offset`.
    """

    def __init__(self, text: str, offset: int, expected: frozenset[str] | set[str]):
        self.text = text
        self.offset = offset
        self.expected = frozenset(expected)
        got = text[offset : offset + 1] or "end of input"
        exp = ", ".join(sorted(self.expected))
        super().__init__(
            f"cannot parse rate expression {text!r} at offset {offset}: "
            f"got {got!r}, expected one of: {exp}"
        )


class Unstable(ModelError):
    """A preset's closed form was requested outside its stability region."""


class ControlInvalid(ModelError):
    """A control sequence does not stay above 1 on the probe window."""


#### Numerical errors ####


class NumericalError(AltbdError, ArithmeticError):
    """A computation could not be carried out reliably."""


class DegenerateDenominator(NumericalError):
    def __init__(self, what: str, n: int):
        self.what = what
        self.n = n
        super().__init__(f"{what} vanishes at level n={n}")


class NumericalBreakdown(NumericalError):
    """An iterate lost positivity even in exact arithmetic."""


class SingularSystem(NumericalError):
    """The truncated generator is not irreducible, so its balance system is singular."""


#### Normalization errors ####


class MissingCertificate(AltbdError, ValueError):
    """An unbounded side of a weight table has no tail certificate."""


class CertificateViolated(AltbdError, ValueError):
    """The computed weights contradict a tail certificate."""
