"""
A dam with a gate, and the symmetric fluid buffer built the same way.

The level is the content of the dam in units. Water flows in at rate `lambda`. With the
gate open (phase D) water leaves at the controlled rate `theta - lambda`; with the gate
closed (phase B) the dam only fills. The gate closes at rate `delta` and opens at rate
`beta`.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math

import numpy as np

from ..errors import ConfigError, Unstable
from ..model import ONE_SIDED, ChainState, Phase, RateSet
from ..stationary import StationaryDistribution, TailCertificate, WeightTable

__all__ = [
    "DamParams",
    "dam_rate_set",
    "dam_certificates",
    "dam_pi0",
    "dam_closed_form",
    "dam_weights",
    "fluid_queue_rate_set",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DamParams:
    """
    Parameters of the dam.

    Parameters
    ----------
    inflow
        `lambda`, the inflow rate.
    max_outflow
        `theta`, the outflow capacity; must exceed the inflow.
    open_gate
        `beta`, the rate at which the gate opens.
    closed_gate
        `delta`, the rate at which the gate closes.
    """

    inflow: float
    max_outflow: float
    open_gate: float
    closed_gate: float

    def __post_init__(self):
        for name in ("inflow", "max_outflow", "open_gate", "closed_gate"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"dam parameter {name!r} must be a finite number > 0, got {value!r}")
        if not self.max_outflow > self.inflow:
            raise ConfigError(
                f"max_outflow={self.max_outflow} must exceed inflow={self.inflow} "
                "so that the open gate drains the dam"
            )

    @property
    def drain(self) -> float:
        """Net rate of decrease with the gate open."""
        return self.max_outflow - self.inflow

    @property
    def stable(self) -> bool:
        return self.inflow * self.open_gate < self.drain * self.closed_gate

    @property
    def ratio(self) -> float:
        """Geometric ratio of consecutive level masses."""
        lam, beta, delta = self.inflow, self.open_gate, self.closed_gate
        return lam * (beta + self.drain) / (self.drain * (lam + delta))


def dam_rate_set(p: DamParams) -> RateSet:
    """The one-sided rate set of the dam. Built whether or not the dam is stable."""
    return RateSet(
        p.inflow, p.drain, p.closed_gate, p.open_gate, 0, 0, topology=ONE_SIDED, allow_zeros=True
    )


def dam_certificates(p: DamParams) -> list[TailCertificate]:
    """Level masses shrink by exactly `p.ratio` from level 1 on; no certificate if unstable."""
    if not p.stable:
        return []
    return [TailCertificate(1, p.ratio)]


def _check_stable(p: DamParams) -> None:
    if not p.stable:
        raise Unstable(
            f"the dam is unstable: inflow*open_gate = {p.inflow * p.open_gate} is not below "
            f"drain*closed_gate = {p.drain * p.closed_gate}"
        )


def dam_pi0(p: DamParams) -> float:
    """
    Stationary probability of an empty dam with an open gate.

    `pi(0, D) = (delta (theta - lambda) - lambda beta) / ((theta - lambda) (beta + delta))`

    Examples
    --------
    ```{python}
    from altbd.presets import DamParams, dam_pi0

    dam_pi0(DamParams(1, 3, 1, 1))
    ```
    """
    _check_stable(p)
    m = p.drain
    return (p.closed_gate * m - p.inflow * p.open_gate) / (m * (p.open_gate + p.closed_gate))


def _head_and_level(p: DamParams) -> tuple[float, float]:
    # x(n,B) = head * r^n and x(n,D) = level * r^(n-1) for n >= 1, with x(0,D) = 1
    lam, beta, delta, m = p.inflow, p.open_gate, p.closed_gate, p.drain
    return beta / (lam + delta), beta * lam / (m * (lam + delta))


def dam_weights(p: DamParams, n_max: int) -> WeightTable:
    """Unnormalised weights with `x(0, D) = 1`; defined for unstable dams too."""
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    head, level = _head_and_level(p)
    n = np.arange(0, n_max + 1)
    log_r = math.log(p.ratio)
    log_b = math.log(head) + n * log_r
    log_d = math.log(level) + (n - 1) * log_r
    log_d[0] = 0.0
    return WeightTable(0, n_max, log_b, log_d, ChainState(0, Phase.D), ONE_SIDED)


def dam_closed_form(p: DamParams, n_max: int) -> StationaryDistribution:
    """
    The stationary distribution of a stable dam on levels `0..n_max`.

    The probability mass beyond `n_max` is summed exactly and reported as `tail_error`.

    Raises
    ------
    Unstable
        If `inflow * open_gate >= (max_outflow - inflow) * closed_gate`.
    """
    pi0 = dam_pi0(p)
    w = dam_weights(p, n_max)
    r = p.ratio
    head, level = _head_and_level(p)
    # level mass beyond n_max: (head*r + level) * r^(n-1) summed over n > n_max
    tail = pi0 * (head * r + level) * r**n_max / (1 - r)
    logger.debug("dam closed form: pi0=%.12g, r=%.12g, tail beyond %d = %.3g", pi0, r, n_max, tail)
    return StationaryDistribution(
        0,
        n_max,
        pi0 * np.exp(w.log_b),
        pi0 * np.exp(w.log_d),
        -math.log(pi0),
        tail,
        ONE_SIDED,
        tuple(dam_certificates(p)),
    )


def fluid_queue_rate_set(beta: float, delta: float, unit_rate: float) -> RateSet:
    """
    A fluid buffer discretized in units of fluid.

    During phase B the buffer fills at `unit_rate`, during phase D it drains at
    `unit_rate`. This is the dam with `inflow = unit_rate` and `max_outflow = 2 * unit_rate`.
    """
    return dam_rate_set(DamParams(unit_rate, 2 * unit_rate, beta, delta))
