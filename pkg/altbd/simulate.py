"""
Event-driven path simulation of alternating birth-death processes.

Each replication owns a `numpy.random.Generator` on the PCG64 bit generator. Replication
`r` of master seed `s` is seeded with `SeedSequence(s, spawn_key=(r,))`, the same stream
`SeedSequence(s).spawn(...)` would hand out as its `r`-th child, so results do not depend
on how replications are scheduled.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math
from typing import Mapping, Sequence
import warnings

import numpy as np

from .errors import ConfigError
from .model import ChainState, Phase, RateSet, transitions
from .stationary import StationaryDistribution

__all__ = [
    "SimConfig",
    "OccupancyReport",
    "simulate_path",
    "occupancy_distribution",
    "compare_tv",
    "replicate",
    "merge_reports",
]

logger = logging.getLogger(__name__)

RNG_NAME = "PCG64"
TERMINATIONS = ("MaxEvents", "MaxTime", "ExplosionSuspected", "DeadState")

# random numbers are drawn this many at a time
_BLOCK = 4096


@dataclass(frozen=True)
class SimConfig:
    """
    Settings of one simulated path.

    Parameters
    ----------
    seed
        Master seed, an unsigned 64-bit integer.
    max_events
        Stop after this many jumps.
    max_time
        Stop at this time (infinite by default).
    level_guard
        Stop with "ExplosionSuspected" once `|level|` reaches this value.
    initial
        Starting state.
    record_trace
        Keep `(t, level, phase)` for the initial state and after every jump.
    """

    seed: int = 0
    max_events: int = 100_000
    max_time: float = math.inf
    level_guard: int = 10_000
    initial: ChainState = ChainState(0, Phase.D)
    record_trace: bool = False

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.max_events < 1:
            raise ConfigError(f"max_events must be >= 1, got {self.max_events}")
        if not self.max_time > 0:
            raise ConfigError(f"max_time must be > 0, got {self.max_time}")
        if not self.level_guard > abs(self.initial.level):
            raise ConfigError(
                f"level_guard={self.level_guard} must exceed the initial level {self.initial.level}"
            )


@dataclass
class OccupancyReport:
    """
    Time spent in each visited state along one path (or several, after merging).

    Attributes
    ----------
    occupancy
        Sojourn time per state.
    termination
        "MaxEvents", "MaxTime", "ExplosionSuspected" or "DeadState"; merged reports of
        differing terminations say "Mixed".
    trace
        `(t, level, phase)` rows: the initial state and one row per jump. Empty unless the
        config asked for it.
    """

    occupancy: dict[ChainState, float]
    total_time: float
    events: int
    termination: str
    seed: int
    rng: str = RNG_NAME
    replication: int | None = None
    final: ChainState | None = None
    trace: list[tuple[float, int, Phase]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "rng": self.rng,
            "replication": self.replication,
            "termination": self.termination,
            "events": self.events,
            "total_time": self.total_time,
            "final": None if self.final is None else [self.final.level, self.final.phase.value],
            "occupancy": [
                {"n": s.level, "phase": s.phase.value, "time": t}
                for s, t in sorted(self.occupancy.items())
            ],
        }


class _Jumps:
    """
    Cached transition rows per state: targets, cumulative rates and total rate.

    The cache holds one row per visited state, so it is bounded by the level guard.
    """

    def __init__(self, rates: RateSet):
        self.rates = rates
        self.cache: dict[ChainState, tuple[list[ChainState], list[float], float]] = {}

    def __getitem__(self, s: ChainState):
        row = self.cache.get(s)
        if row is None:
            rows = transitions(self.rates, s)
            targets = [t for t, _ in rows]
            cumulative = list(np.cumsum([q for _, q in rows]))
            total = cumulative[-1] if cumulative else 0.0
            row = self.cache[s] = (targets, cumulative, total)
        return row


class _Stream:
    """Unit exponentials and uniforms drawn from a generator in blocks."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self._refill()

    def _refill(self):
        self.expo = self.rng.standard_exponential(_BLOCK)
        self.unif = self.rng.random(_BLOCK)
        self.i = 0

    def draw(self) -> tuple[float, float]:
        if self.i == _BLOCK:
            self._refill()
        i = self.i
        self.i += 1
        return float(self.expo[i]), float(self.unif[i])


def _generator(seed: int, replication: int | None) -> np.random.Generator:
    key = () if replication is None else (replication,)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def simulate_path(
    rates: RateSet, cfg: SimConfig, replication: int | None = None
) -> OccupancyReport:
    """
    Simulate one path and record how long it stays in each state.

    At each state the holding time is exponential with the total exit rate, and the next
    state is chosen with probability proportional to its transition rate.

    Parameters
    ----------
    rates
        Any rate set.
    cfg
        Stopping rules, seed and starting state.
    replication
        Stream index; replication `r` draws from `SeedSequence(cfg.seed, spawn_key=(r,))`.
        None uses `SeedSequence(cfg.seed)` itself.

    Returns
    -------
    OccupancyReport
        A state with no way out ends the run with termination "DeadState" and a
        `UserWarning`.

    Examples
    --------
    ```{python}
    from altbd import SimConfig, simulate_path
    from altbd.model import constant_rate_set

    report = simulate_path(constant_rate_set(1.0), SimConfig(seed=42, max_events=1000))
    report.termination, report.events
    ```
    """
    if not rates.topology.contains(cfg.initial.level):
        raise ConfigError(f"initial state {cfg.initial} is outside {rates.topology}")

    jumps = _Jumps(rates)
    stream = _Stream(_generator(cfg.seed, replication))
    occupancy: dict[ChainState, float] = {}
    trace: list[tuple[float, int, Phase]] = []

    s = cfg.initial
    t = 0.0
    events = 0
    termination = "MaxEvents"
    if cfg.record_trace:
        trace.append((t, s.level, s.phase))

    while events < cfg.max_events:
        targets, cumulative, total = jumps[s]
        if total == 0.0:
            warnings.warn(f"state {s} has no outgoing transitions", UserWarning, stacklevel=2)
            termination = "DeadState"
            break
        e, u = stream.draw()
        hold = e / total
        if t + hold >= cfg.max_time:
            occupancy[s] = occupancy.get(s, 0.0) + (cfg.max_time - t)
            t = cfg.max_time
            termination = "MaxTime"
            break
        occupancy[s] = occupancy.get(s, 0.0) + hold
        t += hold

        x = u * total
        nxt = targets[-1]
        for target, c in zip(targets, cumulative):
            if x < c:
                nxt = target
                break
        s = nxt
        events += 1
        if cfg.record_trace:
            trace.append((t, s.level, s.phase))
        if abs(s.level) >= cfg.level_guard:
            termination = "ExplosionSuspected"
            break

    logger.debug(
        "path seed=%d replication=%s: %d events, t=%.6g, %s",
        cfg.seed,
        replication,
        events,
        t,
        termination,
    )
    return OccupancyReport(
        occupancy=occupancy,
        total_time=t,
        events=events,
        termination=termination,
        seed=cfg.seed,
        replication=replication,
        final=s,
        trace=trace,
    )


def occupancy_distribution(report: OccupancyReport) -> dict[ChainState, float]:
    """Fraction of the total time spent in each visited state."""
    if not report.total_time > 0:
        raise ValueError("the report covers no time; nothing to normalise")
    total = math.fsum(report.occupancy.values())
    return {s: t / total for s, t in sorted(report.occupancy.items())}


def compare_tv(
    analytic: StationaryDistribution | Mapping[ChainState, float],
    empirical: Mapping[ChainState, float],
) -> float:
    """
    Total variation distance plus the analytic tail error, capped at 1.

    `1/2 sum |pi(z) - pi_hat(z)|` over the union of both supports. States outside the
    analytic range count with probability 0.
    """
    if isinstance(analytic, StationaryDistribution):
        tail = analytic.tail_error
        analytic = analytic.as_dict()
    else:
        tail = 0.0
    states = set(analytic) | set(empirical)
    tv = 0.5 * math.fsum(abs(analytic.get(z, 0.0) - empirical.get(z, 0.0)) for z in states)
    return min(1.0, tv + tail)


def replicate(
    rates: RateSet,
    cfg: SimConfig,
    replications: int,
    workers: int | None = None,
) -> list[OccupancyReport]:
    """
    Run independent replications, concurrently when `workers` allows.

    Replication `r` uses stream `r` of `cfg.seed`; the reports come back in replication
    order whatever the number of workers.
    """
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications}")
    if workers is not None and workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if workers == 1 or replications == 1:
        return [simulate_path(rates, cfg, r) for r in range(replications)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: simulate_path(rates, cfg, r), range(replications)))


def merge_reports(reports: Sequence[OccupancyReport]) -> OccupancyReport:
    """Pool occupancy times, total times and event counts of several reports."""
    if not reports:
        raise ValueError("nothing to merge")
    occupancy: dict[ChainState, float] = {}
    for rep in reports:
        for s, t in rep.occupancy.items():
            occupancy[s] = occupancy.get(s, 0.0) + t
    kinds = {rep.termination for rep in reports}
    return OccupancyReport(
        occupancy=occupancy,
        total_time=math.fsum(rep.total_time for rep in reports),
        events=sum(rep.events for rep in reports),
        termination=kinds.pop() if len(kinds) == 1 else "Mixed",
        seed=reports[0].seed,
        rng=reports[0].rng,
    )
