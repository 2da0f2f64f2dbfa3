from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
import logging
import math
from typing import Iterator, NamedTuple

import numpy as np

from .errors import (
    ConfigError,
    NegativeRate,
    NonFinite,
    OutOfSupport,
    ZeroRate,
)
from .expr import Constant, RateSpec, as_spec, spec_from_config
from .expr._core import eval_rate

__all__ = [
    "Phase",
    "ChainState",
    "Topology",
    "ONE_SIDED",
    "TWO_SIDED",
    "RateSet",
    "Aggregates",
    "RATE_NAMES",
    "constant_rate_set",
    "aggregates",
    "transitions",
    "exit_rate",
]

logger = logging.getLogger(__name__)

# config key -> RateSet attribute
RATE_NAMES = {
    "lambda": "lambda_",
    "mu": "mu",
    "delta": "delta",
    "beta": "beta",
    "kappa": "kappa",
    "nu": "nu",
}


class Phase(Enum):
    """Environment phase. The level only rises in `B` and only falls in `D`."""

    B = "B"
    D = "D"

    def __lt__(self, other: Phase) -> bool:
        if not isinstance(other, Phase):
            return NotImplemented
        return self is Phase.B and other is Phase.D

    def flip(self) -> Phase:
        return Phase.D if self is Phase.B else Phase.B


class ChainState(NamedTuple):
    level: int
    phase: Phase

    def __str__(self) -> str:
        return f"({self.level},{self.phase.value.lower()})"


@dataclass(frozen=True)
class Topology:
    """
    The level set of the process.

    Use `Topology.one_sided()` for the levels 0, 1, 2, ..., `Topology.two_sided()` for all
    integers and `Topology.finite(N)` for 0, 1, ..., N.
    """

    kind: str
    n: int | None = None

    def __post_init__(self):
        if self.kind not in ("one-sided", "two-sided", "finite"):
            raise ConfigError(f"unknown topology kind {self.kind!r}")
        if self.kind == "finite":
            if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
                raise ConfigError(f"finite topology needs an integer N >= 1, got {self.n!r}")
        elif self.n is not None:
            raise ConfigError(f"{self.kind} topology takes no N, got {self.n!r}")

    @classmethod
    def one_sided(cls) -> Topology:
        return cls("one-sided")

    @classmethod
    def two_sided(cls) -> Topology:
        return cls("two-sided")

    @classmethod
    def finite(cls, n: int) -> Topology:
        return cls("finite", n)

    @property
    def lower(self) -> int | None:
        return None if self.kind == "two-sided" else 0

    @property
    def upper(self) -> int | None:
        return self.n if self.kind == "finite" else None

    @property
    def is_bounded(self) -> bool:
        return self.kind == "finite"

    def contains(self, n: int) -> bool:
        lo, hi = self.lower, self.upper
        return (lo is None or n >= lo) and (hi is None or n <= hi)

    def to_config(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.n is not None:
            out["n"] = self.n
        return out

    @classmethod
    def from_config(cls, obj) -> Topology:
        if isinstance(obj, str):
            return cls(obj)
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ConfigError(f"topology must be an object with a 'kind', got {obj!r}")
        extra = set(obj) - {"kind", "n"}
        if extra:
            raise ConfigError(f"unknown topology keys {sorted(extra)}")
        return cls(obj["kind"], obj.get("n"))

    def __str__(self) -> str:
        if self.kind == "finite":
            return f"Finite(N={self.n})"
        return "OneSided" if self.kind == "one-sided" else "TwoSided"


ONE_SIDED = Topology.one_sided()
TWO_SIDED = Topology.two_sided()


@dataclass(frozen=True)
class Aggregates:
    """Total up/down rates and the Reuter-shifted totals at one level."""

    Lambda: float
    M: float
    LambdaPlus: float
    MPlus: float


@dataclass(frozen=True)
class RateSet:
    """
    The six level-indexed rate families of an alternating birth-death process.

    From `(n, B)` the process moves to `(n+1, B)` at rate `lambda_`, to `(n, D)` at rate
    `delta` and to `(n+1, D)` at rate `kappa`. From `(n, D)` it moves to `(n-1, D)` at rate
    `mu`, to `(n, B)` at rate `beta` and to `(n-1, B)` at rate `nu`.

    Parameters
    ----------
    lambda_, mu, delta, beta, kappa, nu
        Rate specs (plain numbers are wrapped as constants).
    topology
        The level set.
    allow_zeros
        Permit rates that evaluate to exactly 0. Without it every rate must be strictly
        positive wherever the boundary rules do not force it to 0.

    Notes
    -----
    On one-sided and finite topologies `mu` and `nu` are 0 at level 0 whatever their specs
    say. On `Finite(N)`, `lambda_` and `kappa` are 0 at level N.

    Examples
    --------
    ```{python}
    from altbd import RateSet, Topology

    ones = RateSet(1, 1, 1, 1, 1, 1, topology=Topology.one_sided())
    ones.rate("mu", 0), ones.rate("mu", 1)
    ```
    """

    lambda_: RateSpec
    mu: RateSpec
    delta: RateSpec
    beta: RateSpec
    kappa: RateSpec
    nu: RateSpec
    topology: Topology = field(default=ONE_SIDED)
    allow_zeros: bool = False

    def __post_init__(self):
        for attr in RATE_NAMES.values():
            object.__setattr__(self, attr, as_spec(getattr(self, attr)))
        if not isinstance(self.topology, Topology):
            raise TypeError(f"topology must be a Topology, got {type(self.topology).__name__}")

    #### Evaluation ####

    def spec(self, name: str) -> RateSpec:
        try:
            return getattr(self, RATE_NAMES[name])
        except KeyError:
            raise ValueError(
                f"unknown rate {name!r}; expected one of {', '.join(RATE_NAMES)}"
            ) from None

    def forced_zero(self, name: str, n: int) -> bool:
        """Whether a boundary rule pins rate `name` to 0 at level `n`."""
        topo = self.topology
        if name in ("mu", "nu") and topo.lower is not None and n == topo.lower:
            return True
        if name in ("lambda", "kappa") and topo.upper is not None and n == topo.upper:
            return True
        return False

    def rate(self, name: str, n: int) -> float:
        """
        Evaluate rate `name` at level `n`, with the boundary rules applied.

        Raises
        ------
        OutOfSupport, NegativeRate, NonFinite, ZeroRate
        """
        if not self.topology.contains(n):
            raise OutOfSupport(n, self.topology)
        spec = self.spec(name)
        if self.forced_zero(name, n):
            return 0.0
        try:
            value = eval_rate(spec, n)
        except NegativeRate as e:
            raise NegativeRate(e.value, n, name) from None
        except NonFinite as e:
            raise NonFinite(n, name) from e
        if value == 0.0 and not self.allow_zeros:
            raise ZeroRate(n, name)
        return value

    def evaluate(self, name: str, levels, strict: bool = True) -> np.ndarray:
        """
        Evaluate rate `name` at every level of an integer array.

        Parameters
        ----------
        name
            One of "lambda", "mu", "delta", "beta", "kappa", "nu".
        levels
            Integer levels, all inside the topology's support.
        strict
            If True (the default) raise on the first invalid value, exactly as `rate()`
            would. If False, non-finite and negative values are returned as they are.
        """
        levels = np.asarray(levels, dtype=np.int64)
        topo = self.topology
        if levels.size:
            lo, hi = topo.lower, topo.upper
            if lo is not None and levels.min() < lo:
                raise OutOfSupport(int(levels.min()), topo)
            if hi is not None and levels.max() > hi:
                raise OutOfSupport(int(levels.max()), topo)

        with np.errstate(all="ignore"):
            values = np.array(self.spec(name).evaluate(levels), dtype=float)

        forced = np.zeros(levels.shape, dtype=bool)
        if name in ("mu", "nu") and topo.lower is not None:
            forced |= levels == topo.lower
        if name in ("lambda", "kappa") and topo.upper is not None:
            forced |= levels == topo.upper
        values[forced] = 0.0

        if strict:
            bad = ~np.isfinite(values)
            if bad.any():
                raise NonFinite(int(levels[bad][0]), name)
            neg = values < 0
            if neg.any():
                i = np.flatnonzero(neg)[0]
                raise NegativeRate(float(values[i]), int(levels[i]), name)
            if not self.allow_zeros:
                zero = (values == 0) & ~forced
                if zero.any():
                    raise ZeroRate(int(levels[zero][0]), name)
        return values + 0.0

    #### Derived rate sets ####

    def scaled(self, c: float) -> RateSet:
        """All six rates multiplied by `c > 0` (a change of time unit)."""
        if not c > 0 or not math.isfinite(c):
            raise ValueError(f"scale factor must be positive and finite, got {c!r}")
        return replace(
            self, **{attr: getattr(self, attr).scaled(c) for attr in RATE_NAMES.values()}
        )

    def with_rates(self, **specs) -> RateSet:
        """Copy with some rates replaced, keyed by config name ("lambda", "mu", ...)."""
        return replace(self, **{RATE_NAMES[k]: as_spec(v) for k, v in specs.items()})

    #### Config ####

    def to_config(self) -> dict:
        out = {
            "topology": self.topology.to_config(),
            "rates": {name: self.spec(name).to_config() for name in RATE_NAMES},
        }
        if self.allow_zeros:
            out["allow_zeros"] = True
        return out

    @classmethod
    def from_config(cls, obj: dict) -> RateSet:
        """
        Build a rate set from a model config document.

        The document has a `topology` object (`{"kind": "one-sided" | "two-sided" |
        "finite", "n": N}`), a `rates` object with the six rates and an optional
        `allow_zeros` flag.
        """
        if not isinstance(obj, dict):
            raise ConfigError(f"model config must be an object, got {type(obj).__name__}")
        extra = set(obj) - {"topology", "rates", "allow_zeros"}
        if extra:
            raise ConfigError(f"unknown model config keys {sorted(extra)}")
        if "rates" not in obj:
            raise ConfigError("model config has no 'rates'")
        rates = obj["rates"]
        if not isinstance(rates, dict):
            raise ConfigError("'rates' must be an object")
        missing = [k for k in RATE_NAMES if k not in rates]
        unknown = [k for k in rates if k not in RATE_NAMES]
        if missing or unknown:
            raise ConfigError(f"rates: missing {missing}, unknown {unknown}")
        allow_zeros = obj.get("allow_zeros", False)
        if not isinstance(allow_zeros, bool):
            raise ConfigError(f"'allow_zeros' must be true or false, got {allow_zeros!r}")

        specs = {RATE_NAMES[k]: spec_from_config(v) for k, v in rates.items()}
        topology = Topology.from_config(obj.get("topology", "one-sided"))
        return cls(**specs, topology=topology, allow_zeros=allow_zeros)

    def support(self) -> tuple[int | None, int | None]:
        """`(lowest, highest)` level, None on an unbounded side."""
        return self.topology.lower, self.topology.upper

    def states(self, n_min: int, n_max: int) -> Iterator[ChainState]:
        """States of the level range in serialization order (level, then B before D)."""
        for n in range(n_min, n_max + 1):
            yield ChainState(n, Phase.B)
            yield ChainState(n, Phase.D)


def constant_rate_set(value: float = 1.0, topology: Topology = ONE_SIDED) -> RateSet:
    """A rate set with all six rates equal to `value`."""
    c = Constant(float(value))
    return RateSet(c, c, c, c, c, c, topology=topology)


def aggregates(rates: RateSet, n: int) -> Aggregates:
    """
    Total uprate, total downrate and their Reuter-shifted versions at level `n`.

    Returns
    -------
    Aggregates
        `Lambda = lambda + kappa`, `M = mu + nu`, `LambdaPlus = 1 + Lambda + delta` and
        `MPlus = 1 + M + beta`, with the boundary rules applied.

    Examples
    --------
    ```{python}
    from altbd import aggregates
    from altbd.model import constant_rate_set

    aggregates(constant_rate_set(1.0), 3)
    ```
    """
    lam = rates.rate("lambda", n)
    kappa = rates.rate("kappa", n)
    mu = rates.rate("mu", n)
    nu = rates.rate("nu", n)
    Lambda = lam + kappa
    M = mu + nu
    return Aggregates(
        Lambda=Lambda,
        M=M,
        LambdaPlus=1.0 + Lambda + rates.rate("delta", n),
        MPlus=1.0 + M + rates.rate("beta", n),
    )


def transitions(rates: RateSet, s: ChainState) -> list[tuple[ChainState, float]]:
    """
    The off-diagonal generator row at state `s`.

    Zero-rate entries are left out. Boundary rules guarantee that no target leaves the
    topology.

    Examples
    --------
    ```{python}
    from altbd import ChainState, Phase, transitions
    from altbd.model import constant_rate_set

    transitions(constant_rate_set(1.0), ChainState(0, Phase.D))
    ```
    """
    n, phase = s
    if not rates.topology.contains(n):
        raise OutOfSupport(n, rates.topology)
    if phase is Phase.B:
        rows = [
            (ChainState(n + 1, Phase.B), rates.rate("lambda", n)),
            (ChainState(n, Phase.D), rates.rate("delta", n)),
            (ChainState(n + 1, Phase.D), rates.rate("kappa", n)),
        ]
    else:
        rows = [
            (ChainState(n - 1, Phase.D), rates.rate("mu", n)),
            (ChainState(n, Phase.B), rates.rate("beta", n)),
            (ChainState(n - 1, Phase.B), rates.rate("nu", n)),
        ]
    return [(t, q) for t, q in rows if q > 0.0]


def exit_rate(rates: RateSet, s: ChainState) -> float:
    """Total rate of leaving `s`."""
    return math.fsum(q for _, q in transitions(rates, s))
