"""
Single-server retrial queues with a two-state server.

Phase B is a busy server, phase D an idle one, and the level counts the customers in the
orbit. A busy server takes arrivals into the orbit (`lambda`) and finishes service
(`delta`). An idle server either receives a fresh arrival (`beta`) or a retrial from the
orbit (`nu`), and both make it busy.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Optional, Union

import numpy as np

from ..errors import ConfigError, DegenerateDenominator
from ..expr import Affine, Constant, RateSpec, as_spec
from ..model import ONE_SIDED, ChainState, Phase, RateSet
from ..stationary import WeightTable
from ..utils import safe_log

__all__ = [
    "RETRIAL_POLICIES",
    "RetrialParams",
    "retrial_rate_set",
    "retrial_closed_form",
    "falin_closed_form",
]

logger = logging.getLogger(__name__)

RETRIAL_POLICIES = ("constant", "classical", "linear", "general")

SpecLike = Union[RateSpec, float, int]


@dataclass(frozen=True)
class RetrialParams:
    """
    Parameters of a retrial queue.

    Parameters
    ----------
    arrival_busy
        Arrival rate while the server is busy; these arrivals join the orbit.
    service
        Service completion rate.
    arrival_idle
        Arrival rate while the server is idle. Defaults to `arrival_busy`.
    policy
        How the orbit retries: "constant" (`nu_n = alpha`), "classical" (`nu_n = nu * n`),
        "linear" (`nu_n = alpha + nu * n`) or "general" (the `retrial` spec as given).
    alpha, nu
        Coefficients of the shorthand policies.
    retrial
        The retrial rate spec of the "general" policy.

    An empty orbit never retries: `nu_0 = 0` whatever the policy says.
    """

    arrival_busy: SpecLike
    service: SpecLike
    arrival_idle: Optional[SpecLike] = None
    policy: str = "constant"
    alpha: float = 1.0
    nu: float = 1.0
    retrial: Optional[SpecLike] = None

    def __post_init__(self):
        if self.policy not in RETRIAL_POLICIES:
            raise ConfigError(
                f"unknown retrial policy {self.policy!r}; expected one of {', '.join(RETRIAL_POLICIES)}"
            )
        if self.policy == "general" and self.retrial is None:
            raise ConfigError("the 'general' retrial policy needs a retrial rate spec")
        object.__setattr__(self, "arrival_busy", as_spec(self.arrival_busy))
        object.__setattr__(self, "service", as_spec(self.service))
        idle = self.arrival_busy if self.arrival_idle is None else as_spec(self.arrival_idle)
        object.__setattr__(self, "arrival_idle", idle)
        if self.retrial is not None:
            object.__setattr__(self, "retrial", as_spec(self.retrial))

    def retrial_spec(self) -> RateSpec:
        """The retrial rate `nu_n` the policy expands to."""
        if self.policy == "constant":
            return Constant(float(self.alpha))
        if self.policy == "classical":
            return Affine(0.0, float(self.nu))
        if self.policy == "linear":
            return Affine(float(self.alpha), float(self.nu))
        return self.retrial


def retrial_rate_set(p: RetrialParams) -> RateSet:
    """
    The one-sided rate set of a retrial queue.

    Examples
    --------
    ```{python}
    from altbd.presets import RetrialParams, retrial_rate_set

    rates = retrial_rate_set(RetrialParams(1.0, 3.0, policy="classical", nu=0.5))
    rates.rate("nu", 3)
    ```
    """
    return RateSet(
        p.arrival_busy,
        0,
        p.service,
        p.arrival_idle,
        0,
        p.retrial_spec(),
        topology=ONE_SIDED,
        allow_zeros=True,
    )


def _require_positive(values: np.ndarray, levels: np.ndarray, what: str) -> None:
    bad = np.flatnonzero(values <= 0)
    if bad.size:
        raise DegenerateDenominator(what, int(levels[bad[0]]))


def retrial_closed_form(p: RetrialParams, n_max: int) -> WeightTable:
    """
    Stationary weights of a retrial queue from its product formulas.

    With `x(0, D) = 1`,

        x(n, B) = (beta_0/delta_0) * prod_{k=1..n} (lambda_{k-1}/delta_k) * (beta_k + nu_k)/nu_k
        x(n, D) = (beta_0/delta_0) * prod_{k=1..n-1} (...) * lambda_{n-1}/nu_n

    Raises
    ------
    DegenerateDenominator
        If a retrial or service rate vanishes inside the range.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    rates = retrial_rate_set(p)
    levels = np.arange(0, n_max + 1)
    lam = rates.evaluate("lambda", levels)
    beta = rates.evaluate("beta", levels)
    delta = rates.evaluate("delta", levels)
    nu = rates.evaluate("nu", levels)
    _require_positive(delta, levels, "service rate delta")
    _require_positive(nu[1:], levels[1:], "retrial rate nu")

    head = safe_log(beta[0]) - np.log(delta[0])
    steps = safe_log(lam[:-1]) - np.log(delta[1:]) + np.log(beta[1:] + nu[1:]) - np.log(nu[1:])
    cum = np.concatenate([[0.0], np.cumsum(steps)])

    log_b = head + cum
    log_d = np.zeros(n_max + 1)
    log_d[1:] = head + cum[:-1] + safe_log(lam[:-1]) - np.log(nu[1:])
    logger.debug("retrial closed form on [0, %d] (%s policy)", n_max, p.policy)
    return WeightTable(0, n_max, log_b, log_d, ChainState(0, Phase.D), ONE_SIDED)


def falin_closed_form(
    arrival: float, service: float, nu: SpecLike, n_max: int
) -> WeightTable:
    """
    Stationary weights of the retrial queue with constant arrival and service rates.

    Arrivals come at rate `arrival` whatever the server does, so with `x(0, D) = 1` and
    `nu_0 = 0`,

        x(n, B) = (arrival/service)^(n+1) * prod_{i=1..n} (arrival + nu_i)/nu_i
        x(n, D) = (arrival/service)^n * prod_{i=0..n-1} (arrival + nu_i) / prod_{i=1..n} nu_i

    Examples
    --------
    ```{python}
    from altbd.model import Phase
    from altbd.presets import falin_closed_form

    falin_closed_form(1.0, 3.0, 1.0, 3).weight(2, Phase.B)
    ```
    """
    if not (arrival > 0 and service > 0):
        raise ConfigError(f"arrival and service rates must be > 0, got {arrival}, {service}")
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    rates = retrial_rate_set(RetrialParams(arrival, service, policy="general", retrial=nu))
    levels = np.arange(0, n_max + 1)
    nus = rates.evaluate("nu", levels)
    _require_positive(nus[1:], levels[1:], "retrial rate nu")

    log_rho = np.log(arrival / service)
    log_up = np.log(arrival + nus)
    log_nu = np.concatenate([[0.0], np.log(nus[1:])])
    cum_up = np.concatenate([[0.0], np.cumsum(log_up)])
    cum_nu = np.cumsum(log_nu)

    log_b = (levels + 1) * log_rho + (cum_up[1:] - log_up[0]) - cum_nu
    log_d = levels * log_rho + cum_up[:-1] - cum_nu
    return WeightTable(0, n_max, log_b, log_d, ChainState(0, Phase.D), ONE_SIDED)
