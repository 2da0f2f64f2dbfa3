"""
Random telegraph processes on the integers.

A particle moves right in phase `RIGHT` (B) at speed `lambda_n` and left in phase `LEFT`
(D) at speed `mu_n`. It turns left at rate `delta_n` and right at rate `beta_n`.
`stabilized_telegraph` chooses the turning rates so that the particle keeps coming back.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import Union

import numpy as np

from ..errors import ConfigError, ControlInvalid, DegenerateDenominator
from ..expr import Affine, Constant, Expression, RateSpec, Split, Table, as_spec, substitute
from ..expr._core import BinOp, Call, Neg, Node, Num, Var
from ..model import TWO_SIDED, ChainState, Phase, RateSet
from ..stationary import WeightTable

__all__ = [
    "RIGHT",
    "LEFT",
    "TelegraphParams",
    "ControlSpec",
    "telegraph_rate_set",
    "telegraph_ell",
    "telegraph_m",
    "telegraph_closed_form",
    "stabilized_telegraph",
]

logger = logging.getLogger(__name__)

RIGHT = Phase.B
LEFT = Phase.D

SpecLike = Union[RateSpec, float, int]


@dataclass(frozen=True)
class TelegraphParams:
    """
    Speeds and turning rates of a telegraph process.

    Parameters
    ----------
    up_speed
        `lambda_n`, the speed moving right.
    down_speed
        `mu_n`, the speed moving left.
    to_right
        `beta_n`, the rate of turning right.
    to_left
        `delta_n`, the rate of turning left.
    """

    up_speed: SpecLike
    down_speed: SpecLike
    to_right: SpecLike
    to_left: SpecLike

    def __post_init__(self):
        for name in ("up_speed", "down_speed", "to_right", "to_left"):
            object.__setattr__(self, name, as_spec(getattr(self, name)))

    @classmethod
    def constant_speed(cls, eta: float, to_right: SpecLike, to_left: SpecLike) -> TelegraphParams:
        return cls(eta, eta, to_right, to_left)


def telegraph_rate_set(p: TelegraphParams) -> RateSet:
    """The two-sided rate set; the process never jumps and turns at once."""
    return RateSet(
        p.up_speed,
        p.down_speed,
        p.to_left,
        p.to_right,
        0,
        0,
        topology=TWO_SIDED,
        allow_zeros=True,
    )


def telegraph_ell(p: TelegraphParams, k: int) -> float:
    """`lambda_k / (lambda_{k+1} + delta_{k+1})`."""
    rates = telegraph_rate_set(p)
    den = rates.rate("lambda", k + 1) + rates.rate("delta", k + 1)
    if den == 0:
        raise DegenerateDenominator("lambda + delta", k + 1)
    return rates.rate("lambda", k) / den


def telegraph_m(p: TelegraphParams, k: int) -> float:
    """`mu_k / (mu_k + beta_k)`."""
    rates = telegraph_rate_set(p)
    den = rates.rate("mu", k) + rates.rate("beta", k)
    if den == 0:
        raise DegenerateDenominator("mu + beta", k)
    return rates.rate("mu", k) / den


def _nonzero(values: np.ndarray, levels: np.ndarray, what: str) -> None:
    bad = np.flatnonzero(values == 0)
    if bad.size:
        raise DegenerateDenominator(what, int(levels[bad[0]]))


def telegraph_closed_form(p: TelegraphParams, n_min: int, n_max: int) -> WeightTable:
    """
    Stationary weights of a telegraph process with `x(0, RIGHT) = 1`.

    Writing `ell_k = lambda_k/(lambda_{k+1} + delta_{k+1})` and `m_k = mu_k/(mu_k + beta_k)`,

        x(n, RIGHT) = prod_{k=1..n} ell_{k-1}/m_k          for n > 0
        x(-n, RIGHT) = prod_{k=-n+1..0} m_k/ell_{k-1}      for n > 0
        x(n, LEFT) = x(n, RIGHT) * (lambda_n + delta_n)/(mu_n + beta_n)

    The last identity says the flow out of `(n, RIGHT)` and `(n, LEFT)` is the same.

    Examples
    --------
    ```{python}
    from altbd.presets import TelegraphParams, telegraph_closed_form

    w = telegraph_closed_form(TelegraphParams(1, 1, 1, 3), -3, 3)
    w.log_b
    ```
    """
    if not n_min <= 0 <= n_max:
        raise ValueError(f"the range [{n_min}, {n_max}] must contain level 0")
    rates = telegraph_rate_set(p)
    # one extra level on each side for the ell and m factors
    levels = np.arange(n_min - 1, n_max + 2)
    lam = rates.evaluate("lambda", levels)
    mu = rates.evaluate("mu", levels)
    beta = rates.evaluate("beta", levels)
    delta = rates.evaluate("delta", levels)

    out_r = lam + delta
    out_l = mu + beta
    _nonzero(out_r, levels, "lambda + delta")
    _nonzero(out_l, levels, "mu + beta")
    with np.errstate(divide="ignore"):
        log_ell = np.log(lam[:-1]) - np.log(out_r[1:])  # ell_k for k = n_min-1 .. n_max
        log_m = np.log(mu) - np.log(out_l)

    # step[k] = log(ell_{k-1}/m_k), the change of log x(., RIGHT) from level k-1 to k
    ks = np.arange(n_min, n_max + 1)
    step = log_ell[ks - n_min] - log_m[ks - n_min + 1]
    # step[0] is never used
    if not np.all(np.isfinite(step[1:])):
        bad = int(ks[1 + np.flatnonzero(~np.isfinite(step[1:]))[0]])
        raise DegenerateDenominator("ell_{k-1}/m_k", bad)

    zero = -n_min
    log_b = np.zeros(ks.size)
    log_b[zero + 1 :] = np.cumsum(step[zero + 1 :])
    if zero > 0:
        # walking down: log x(k-1) = log x(k) - step[k]
        log_b[:zero] = -np.cumsum(step[1 : zero + 1][::-1])[::-1]
    inner = slice(1, -1)
    log_d = log_b + np.log(out_r[inner]) - np.log(out_l[inner])
    return WeightTable(n_min, n_max, log_b, log_d, ChainState(0, RIGHT), TWO_SIDED)


#### Stabilizing control ####


@dataclass(frozen=True)
class ControlSpec:
    """
    Control intensities that make a constant-speed telegraph process return.

    Parameters
    ----------
    r, t
        Intensities on the positive and negative side. Both must stay above 1; constants,
        affine specs and expressions are accepted.
    beta
        Base turning-right rate, used as `beta_n` for `n >= -2`.
    delta
        Base turning-left rate, used as `delta_n` for `n <= 2`.
    fill
        Turning rate at the levels `1, 2` (left) and `-1, -2` (right), where the control
        formula is undefined.
    probe
        Index window `(lo, hi)` on which `r` and `t` are checked.
    """

    r: SpecLike = 2.0
    t: SpecLike = 2.0
    beta: SpecLike = 1.0
    delta: SpecLike = 1.0
    fill: float = 1.0
    probe: tuple[int, int] = (2, 4096)

    def __post_init__(self):
        for name in ("r", "t", "beta", "delta"):
            object.__setattr__(self, name, as_spec(getattr(self, name)))
        if not self.fill > 0:
            raise ConfigError(f"fill must be > 0, got {self.fill}")
        lo, hi = self.probe
        if not 2 <= lo <= hi:
            raise ConfigError(f"probe window must satisfy 2 <= lo <= hi, got {self.probe}")


def _node(spec: RateSpec, what: str) -> Node:
    if isinstance(spec, Constant):
        return Num(spec.value)
    if isinstance(spec, Affine):
        return BinOp("+", Num(spec.a), BinOp("*", Num(spec.b), Var()))
    if isinstance(spec, Expression):
        return spec.root
    raise ConfigError(f"{what} must be a constant, affine or expression rate, got {spec}")


def _check_control(spec: RateSpec, name: str, probe: tuple[int, int]) -> None:
    lo, hi = probe
    idx = np.arange(lo, hi + 1)
    with np.errstate(all="ignore"):
        values = np.asarray(spec.evaluate(idx), dtype=float)
    bad = np.flatnonzero(~(values > 1))
    if bad.size:
        i = bad[0]
        raise ControlInvalid(f"control {name}_n = {values[i]} is not above 1 at n={idx[i]}")


def _controlled(base: Node, control: Node, index: Node, eta: float) -> Expression:
    # base + (1/i + c_i/(i ln i)) * (eta + base)
    c = substitute(control, index)
    rate = BinOp(
        "+",
        BinOp("/", Num(1.0), index),
        BinOp("/", c, BinOp("*", index, Call("ln", (index,)))),
    )
    return Expression(BinOp("+", base, BinOp("*", rate, BinOp("+", Num(float(eta)), base))))


def stabilized_telegraph(eta: float, c: ControlSpec = ControlSpec()) -> RateSet:
    """
    A constant-speed telegraph process whose turning rates pull it back to the origin.

    Both speeds are `eta`. For `n >= 2`,

        delta_{n+1} = beta_{n+1} + (1/n + r_n/(n ln n)) * (eta + beta_{n+1})
        beta_{-n-1} = delta_{-n-1} + (1/n + t_n/(n ln n)) * (eta + delta_{-n-1})

    and the remaining turning rates are the base rates of `c`, or `c.fill` at levels
    `1, 2` and `-1, -2`. The criterion series then behave like `sum 1/(n ln(n)^s)` with
    `s > 1` on both sides.

    Raises
    ------
    ControlInvalid
        If `r_n` or `t_n` is not above 1 somewhere on the probe window.

    Examples
    --------
    ```{python}
    from altbd.presets import stabilized_telegraph

    stabilized_telegraph(1.0).rate("delta", 3)
    ```
    """
    if not (isinstance(eta, (int, float)) and math.isfinite(eta) and eta > 0):
        raise ConfigError(f"eta must be a finite number > 0, got {eta!r}")
    _check_control(c.r, "r", c.probe)
    _check_control(c.t, "t", c.probe)

    level = Var()
    shifted_up = BinOp("-", level, Num(1.0))  # n - 1 at level n
    mirrored = BinOp("-", Neg(level), Num(1.0))  # -n - 1 at level n
    up = _controlled(_node(c.beta, "beta"), _node(c.r, "r"), shifted_up, eta)
    down = _controlled(_node(c.delta, "delta"), _node(c.t, "t"), mirrored, eta)

    delta = Table({1: c.fill, 2: c.fill}, Split(c.delta, 1, up))
    beta = Table({-1: c.fill, -2: c.fill}, Split(down, -2, c.beta))
    logger.debug("stabilized telegraph: delta=%s, beta=%s", delta, beta)
    return RateSet(eta, eta, delta, beta, 0, 0, topology=TWO_SIDED, allow_zeros=True)
