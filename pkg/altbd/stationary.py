from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
from typing import Iterator, Literal, Sequence

import numpy as np
from scipy import linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import logsumexp

from .errors import (
    CertificateViolated,
    DegenerateDenominator,
    MissingCertificate,
    SingularSystem,
)
from .model import ChainState, Phase, RATE_NAMES, RateSet, Topology, transitions
from .series import DEFAULT_WINDOW, SeriesEvidence, classify_series
from .utils import safe_log

__all__ = [
    "WeightTable",
    "TailCertificate",
    "StationaryDistribution",
    "ErgodicityVerdict",
    "one_sided_weights",
    "two_sided_weights",
    "finite_weights",
    "weights",
    "normalize",
    "ergodicity",
    "dense_balance_solve",
    "balance_residual",
    "cut_defect",
    "criterion_summands",
]

logger = logging.getLogger(__name__)

Side = Literal["positive", "negative"]

# relative slack when checking a certificate against computed ratios
_CERT_RTOL = 1e-12


#### Result types ####


@dataclass(frozen=True, eq=False)
class WeightTable:
    """
    Unnormalised stationary weights `x(n, phase)` stored as natural logs.

    Parameters
    ----------
    n_min, n_max
        The level range covered.
    log_b, log_d
        `log x(n, B)` and `log x(n, D)` for `n = n_min, ..., n_max`.
    reference
        The state whose weight is pinned to 1: `(0, D)` on one-sided and finite
        topologies, `(0, B)` on the two-sided one.
    topology
        The topology of the rate set the weights came from.
    """

    n_min: int
    n_max: int
    log_b: np.ndarray
    log_d: np.ndarray
    reference: ChainState
    topology: Topology

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def log_weight(self, n: int, phase: Phase) -> float:
        if not self.n_min <= n <= self.n_max:
            raise IndexError(f"level {n} outside the table range [{self.n_min}, {self.n_max}]")
        arr = self.log_b if phase is Phase.B else self.log_d
        return float(arr[n - self.n_min])

    def weight(self, n: int, phase: Phase) -> float:
        return math.exp(self.log_weight(n, phase))

    def log_level_mass(self) -> np.ndarray:
        """`log(x(n,B) + x(n,D))` per level."""
        return np.logaddexp(self.log_b, self.log_d)

    def rows(self) -> Iterator[tuple[int, Phase, float]]:
        """`(n, phase, log_weight)` in serialization order."""
        for i, n in enumerate(range(self.n_min, self.n_max + 1)):
            yield n, Phase.B, float(self.log_b[i])
            yield n, Phase.D, float(self.log_d[i])

    def restricted(self, lo: int, hi: int) -> WeightTable:
        if not self.n_min <= lo <= hi <= self.n_max:
            raise IndexError(f"[{lo}, {hi}] is not inside [{self.n_min}, {self.n_max}]")
        sl = slice(lo - self.n_min, hi - self.n_min + 1)
        return WeightTable(lo, hi, self.log_b[sl], self.log_d[sl], self.reference, self.topology)


@dataclass(frozen=True)
class TailCertificate:
    """
    A claim that level masses decay at least geometrically beyond `n0`.

    With `m(n) = x(n,B) + x(n,D)` the claim is `m(n) <= rho_bar * m(n-1)` for every
    `n > n0` on the positive side, and `m(-n) <= rho_bar * m(-n+1)` for every `n > n0` on
    the negative side.
    """

    n0: int
    rho_bar: float
    side: Side = "positive"

    def __post_init__(self):
        if not 0.0 < self.rho_bar < 1.0:
            raise ValueError(f"rho_bar must lie in (0, 1), got {self.rho_bar!r}")
        if self.side not in ("positive", "negative"):
            raise ValueError(f"side must be 'positive' or 'negative', got {self.side!r}")
        if self.n0 < 0:
            raise ValueError(f"n0 counts levels away from 0 and must be >= 0, got {self.n0}")

    def to_dict(self) -> dict:
        return {"n0": self.n0, "rho_bar": self.rho_bar, "side": self.side}


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    """
    Normalised stationary probabilities over a level range.

    Attributes
    ----------
    prob_b, prob_d
        `pi(n, B)` and `pi(n, D)` for `n = n_min, ..., n_max`.
    log_C
        Log of the normalization constant, relative to the table's reference weight. It
        includes the certified tail bound.
    tail_error
        Upper bound on the probability mass outside the range.
    """

    n_min: int
    n_max: int
    prob_b: np.ndarray
    prob_d: np.ndarray
    log_C: float
    tail_error: float
    topology: Topology
    certificates: tuple[TailCertificate, ...] = field(default=())

    @property
    def C(self) -> float:
        return math.exp(self.log_C)

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def probability(self, n: int, phase: Phase) -> float:
        if not self.n_min <= n <= self.n_max:
            return 0.0
        arr = self.prob_b if phase is Phase.B else self.prob_d
        return float(arr[n - self.n_min])

    def total(self) -> float:
        return float(self.prob_b.sum() + self.prob_d.sum())

    def as_dict(self) -> dict[ChainState, float]:
        out = {}
        for i, n in enumerate(range(self.n_min, self.n_max + 1)):
            out[ChainState(n, Phase.B)] = float(self.prob_b[i])
            out[ChainState(n, Phase.D)] = float(self.prob_d[i])
        return out

    def rows(self) -> Iterator[tuple[int, Phase, float]]:
        for state, p in self.as_dict().items():
            yield state.level, state.phase, p

    def restricted(self, lo: int, hi: int) -> StationaryDistribution:
        """Condition on the levels `lo..hi` (renormalised; tail_error becomes 0)."""
        if not self.n_min <= lo <= hi <= self.n_max:
            raise IndexError(f"[{lo}, {hi}] is not inside [{self.n_min}, {self.n_max}]")
        sl = slice(lo - self.n_min, hi - self.n_min + 1)
        b, d = self.prob_b[sl], self.prob_d[sl]
        mass = float(b.sum() + d.sum())
        return StationaryDistribution(
            lo, hi, b / mass, d / mass, self.log_C + math.log(mass), 0.0, self.topology
        )


@dataclass
class ErgodicityVerdict:
    """
    Outcome of the ergodicity decision ladder.

    Attributes
    ----------
    verdict
        "Ergodic", "NotErgodic" or "Inconclusive".
    evidence
        Series evidence per side ("positive", and "negative" for two-sided rate sets).
        Empty for finite topologies, which are always ergodic.
    certificates
        Geometric tail certificates for the level masses, emitted when the ratio rung
        decided a side and the level-mass ratios stay below 1 on the window.
    """

    verdict: Literal["Ergodic", "NotErgodic", "Inconclusive"]
    evidence: dict[str, SeriesEvidence]
    window: tuple[int, int]
    certificates: list[TailCertificate] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "window": list(self.window),
            "evidence": {side: ev.to_dict() for side, ev in self.evidence.items()},
            "certificates": [c.to_dict() for c in self.certificates],
        }


#### Closed-form weights ####


class _Rates:
    """The six rate arrays over a level range, indexable by level."""

    def __init__(self, rates: RateSet, lo: int, hi: int, strict: bool):
        self.lo = lo
        levels = np.arange(lo, hi + 1)
        with np.errstate(all="ignore"):
            self.arr = {name: rates.evaluate(name, levels, strict) for name in RATE_NAMES}
            self.arr["Lambda"] = self.arr["lambda"] + self.arr["kappa"]
            self.arr["M"] = self.arr["mu"] + self.arr["nu"]

    def __call__(self, name: str, k) -> np.ndarray:
        return self.arr[name][np.asarray(k) - self.lo]

    def num(self, k) -> np.ndarray:
        # Lambda_(k-1) beta_k + M_k lambda_(k-1)
        k = np.asarray(k)
        with np.errstate(all="ignore"):
            return self("Lambda", k - 1) * self("beta", k) + self("M", k) * self("lambda", k - 1)

    def den(self, k) -> np.ndarray:
        # Lambda_k mu_(k+1) + M_(k+1) delta_k
        k = np.asarray(k)
        with np.errstate(all="ignore"):
            return self("Lambda", k) * self("mu", k + 1) + self("M", k + 1) * self("delta", k)


def _check_nonzero(values: np.ndarray, levels: np.ndarray, what: str) -> None:
    zero = values == 0
    if zero.any():
        raise DegenerateDenominator(what, int(levels[zero][0]))


def _one_sided_logs(rates: RateSet, n_max: int, strict: bool):
    """
    Log weights for levels 0..n_max from the product formulas, on a topology starting at 0.

    Returns `(log_b, log_d, r, S_num, S_den)` so the finite boundary can reuse the sums.
    """
    r = _Rates(rates, 0, n_max + 1, strict)
    ks_num = np.arange(1, n_max + 1)
    ks_den = np.arange(0, n_max + 1)
    den = r.den(ks_den)
    if strict:
        _check_nonzero(den, ks_den, "weight denominator Lambda_k mu_(k+1) + M_(k+1) delta_k")

    with np.errstate(all="ignore"):
        S_num = np.concatenate([[0.0], np.cumsum(safe_log(r.num(ks_num)))])
        S_den = np.cumsum(safe_log(den))
        log_beta0 = safe_log(r("beta", 0))
        levels = np.arange(0, n_max + 1)
        log_b = log_beta0 + safe_log(r("M", levels + 1)) + S_num - S_den
        log_d = np.empty(n_max + 1)
        log_d[0] = 0.0
        if n_max >= 1:
            tail = levels[1:]
            log_d[1:] = log_beta0 + safe_log(r("Lambda", tail - 1)) + S_num[:-1] - S_den[:-1]
    return log_b, log_d, r, S_num, S_den


def _two_sided_logs(rates: RateSet, n_min: int, n_max: int, strict: bool):
    """Log weights for levels n_min..n_max with x(0,B) = 1."""
    r = _Rates(rates, n_min - 1, n_max + 1, strict)
    ks = np.arange(n_min, n_max + 1)
    num, den = r.num(ks), r.den(ks)
    if strict:
        pos, neg = ks >= 1, ks <= 0
        _check_nonzero(den[pos], ks[pos], "weight denominator Lambda_k mu_(k+1) + M_(k+1) delta_k")
        _check_nonzero(num[neg], ks[neg], "weight numerator Lambda_(k-1) beta_k + M_k lambda_(k-1)")
        b_levels = np.arange(n_min - 1, n_max + 1)
        _check_nonzero(r("M", b_levels + 1), b_levels + 1, "total downrate M")

    with np.errstate(all="ignore"):
        f = safe_log(num) - safe_log(den)
        # F(n) = sum_{k=1..n} f(k) for n >= 0 and -sum_{k=n+1..0} f(k) for n < 0,
        # tabulated for n = n_min-1 .. n_max
        zero = -n_min  # index of k = 0 in f
        pos_part = np.concatenate([[0.0], np.cumsum(f[zero + 1 :])])
        neg_part = -np.cumsum(f[: zero + 1][::-1])[::-1]
        F = np.concatenate([neg_part, pos_part])
        b_levels = np.arange(n_min - 1, n_max + 1)
        log_b_ext = safe_log(r("M", b_levels + 1)) - safe_log(r("M", 1)) + F
        d_levels = np.arange(n_min, n_max + 1)
        log_d = log_b_ext[:-1] + safe_log(r("Lambda", d_levels - 1)) - safe_log(r("M", d_levels))
    return log_b_ext[1:], log_d


def one_sided_weights(rates: RateSet, n_max: int) -> WeightTable:
    """
    Closed-form stationary weights of a one-sided process, normalised to `x(0, D) = 1`.

    With `num_k = Lambda_(k-1) beta_k + M_k lambda_(k-1)` and
    `den_k = Lambda_k mu_(k+1) + M_(k+1) delta_k`,

    - `x(n, B) = beta_0 M_(n+1) prod_(k=1..n) num_k / prod_(k=0..n) den_k`,
    - `x(n, D) = beta_0 Lambda_(n-1) prod_(k=1..n-1) num_k / prod_(k=0..n-1) den_k`.

    Products are accumulated as sums of logs.

    Parameters
    ----------
    rates
        A one-sided rate set.
    n_max
        The highest level to compute.

    Returns
    -------
    WeightTable

    Raises
    ------
    DegenerateDenominator
        If some `den_k` vanishes (only possible with `allow_zeros`).

    Examples
    --------
    ```{python}
    from altbd import one_sided_weights
    from altbd.model import constant_rate_set

    w = one_sided_weights(constant_rate_set(1.0), 5)
    list(w.rows())[:4]
    ```
    """
    if rates.topology.kind != "one-sided":
        raise ValueError(f"one_sided_weights needs a one-sided rate set, got {rates.topology}")
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    log_b, log_d, *_ = _one_sided_logs(rates, n_max, strict=True)
    logger.debug("one-sided weights on [0, %d]", n_max)
    return WeightTable(0, n_max, log_b, log_d, ChainState(0, Phase.D), rates.topology)


def two_sided_weights(rates: RateSet, n_min: int, n_max: int) -> WeightTable:
    """
    Closed-form stationary weights of a two-sided process, normalised to `x(0, B) = 1`.

    For `n >= 1`, `x(n, B) = (M_(n+1) / M_1) prod_(k=1..n) num_k / den_k` and for the
    negative side `x(-n, B) = (M_(-n+1) / M_1) prod_(k=-n+1..0) den_k / num_k`. Death-phase
    weights follow from the cut identity `x(n, B) Lambda_n = x(n+1, D) M_(n+1)`.
    """
    if rates.topology.kind != "two-sided":
        raise ValueError(f"two_sided_weights needs a two-sided rate set, got {rates.topology}")
    if not n_min <= 0 <= n_max:
        raise ValueError(f"need n_min <= 0 <= n_max, got [{n_min}, {n_max}]")
    log_b, log_d = _two_sided_logs(rates, n_min, n_max, strict=True)
    logger.debug("two-sided weights on [%d, %d]", n_min, n_max)
    return WeightTable(n_min, n_max, log_b, log_d, ChainState(0, Phase.B), rates.topology)


def finite_weights(rates: RateSet) -> WeightTable:
    """
    Stationary weights on `Finite(N)`, normalised to `x(0, D) = 1`.

    Levels below N carry the one-sided weights. At the top,
    `x(N, D) = beta_0 Q Lambda_(N-1)` and
    `x(N, B) = beta_0 Q (Lambda_(N-1) beta_N + lambda_(N-1) M_N) / delta_N` with
    `Q = prod_(k=1..N-1) num_k / prod_(k=0..N-1) den_k`.
    """
    topo = rates.topology
    if topo.kind != "finite":
        raise ValueError(f"finite_weights needs a finite rate set, got {topo}")
    N = topo.n
    log_b, log_d, r, S_num, S_den = _one_sided_logs(rates, N - 1, strict=True)

    delta_N = r("delta", N)
    if delta_N == 0:
        raise DegenerateDenominator("delta_N", N)
    with np.errstate(all="ignore"):
        log_Q = safe_log(r("beta", 0)) + S_num[N - 1] - S_den[N - 1]
        top_b = (
            log_Q
            + safe_log(r("Lambda", N - 1) * r("beta", N) + r("lambda", N - 1) * r("M", N))
            - safe_log(delta_N)
        )
        top_d = log_Q + safe_log(r("Lambda", N - 1))
    log_b = np.append(log_b, top_b)
    log_d = np.append(log_d, top_d)
    return WeightTable(0, N, log_b, log_d, ChainState(0, Phase.D), topo)


def weights(rates: RateSet, n_min: int = 0, n_max: int | None = None) -> WeightTable:
    """Dispatch to the weight formula of the rate set's topology."""
    kind = rates.topology.kind
    if kind == "finite":
        return finite_weights(rates)
    if n_max is None:
        raise ValueError(f"n_max is required for a {rates.topology} rate set")
    if kind == "one-sided":
        if n_min != 0:
            raise ValueError(f"one-sided weights start at level 0, got n_min={n_min}")
        return one_sided_weights(rates, n_max)
    return two_sided_weights(rates, n_min, n_max)


def cut_defect(w: WeightTable, rates: RateSet) -> float:
    """
    Largest violation of `log x(n,B) + log Lambda_n = log x(n+1,D) + log M_(n+1)` over
    the table.
    """
    if w.n_max == w.n_min:
        return 0.0
    r = _Rates(rates, w.n_min, w.n_max, strict=True)
    ks = np.arange(w.n_min, w.n_max)
    with np.errstate(all="ignore"):
        lhs = w.log_b[:-1] + safe_log(r("Lambda", ks))
        rhs = w.log_d[1:] + safe_log(r("M", ks + 1))
        both_zero = np.isneginf(lhs) & np.isneginf(rhs)
        diff = np.where(both_zero, 0.0, np.abs(lhs - rhs))
    return float(np.max(diff))


#### Normalization ####


def _check_certificate(w: WeightTable, cert: TailCertificate) -> None:
    log_m = w.log_level_mass()
    log_rho = math.log(cert.rho_bar) + math.log1p(_CERT_RTOL)
    if cert.side == "positive":
        if w.n_max < cert.n0:
            raise ValueError(
                f"the range must reach the certificate's n0={cert.n0}, it ends at {w.n_max}"
            )
        start = max(cert.n0 + 1, w.n_min + 1)
        steps = np.arange(start, w.n_max + 1)
        log_ratio = log_m[steps - w.n_min] - log_m[steps - 1 - w.n_min]
    else:
        if w.n_min > -cert.n0:
            raise ValueError(
                f"the range must reach the certificate's level -{cert.n0}, it starts at {w.n_min}"
            )
        end = min(-cert.n0 - 1, w.n_max - 1)
        steps = np.arange(w.n_min, end + 1)
        log_ratio = log_m[steps - w.n_min] - log_m[steps + 1 - w.n_min]
    over = log_ratio > log_rho
    if over.any():
        n = int(steps[over][0])
        ratio = math.exp(float(log_ratio[over][0]))
        raise CertificateViolated(
            f"level-mass ratio {ratio:.6g} at n={n} exceeds rho_bar={cert.rho_bar} "
            f"({cert.side} side, n0={cert.n0})"
        )


def normalize(
    w: WeightTable, certs: Sequence[TailCertificate] = ()
) -> StationaryDistribution:
    """
    Turn a weight table into probabilities, bounding the mass outside its range.

    Every side on which the topology is unbounded needs a `TailCertificate`. The tail
    beyond the last level `L` of that side is bounded by `m(L) rho_bar / (1 - rho_bar)`.

    Parameters
    ----------
    w
        The weights.
    certs
        Tail certificates, at most one per side.

    Returns
    -------
    StationaryDistribution
        With `tail_error` = certified tail bound / C. Finite tables have `tail_error = 0`.

    Raises
    ------
    MissingCertificate
        An unbounded side has no certificate.
    CertificateViolated
        Computed level-mass ratios already exceed `rho_bar` inside the range.

    Examples
    --------
    ```{python}
    from altbd import TailCertificate, normalize, one_sided_weights
    from altbd.presets import build_preset

    dam = build_preset("dam", {})
    pi = normalize(one_sided_weights(dam.rates, 60), [TailCertificate(0, 0.75)])
    pi.prob_d[0], pi.tail_error
    ```
    """
    topo = w.topology
    by_side: dict[str, TailCertificate] = {}
    for cert in certs:
        if cert.side in by_side:
            raise ValueError(f"more than one certificate for the {cert.side} side")
        by_side[cert.side] = cert

    needed = []
    if topo.upper is None:
        needed.append("positive")
    if topo.lower is None:
        needed.append("negative")
    for side in needed:
        if side not in by_side:
            raise MissingCertificate(
                f"the {side} side of a {topo} table is unbounded; "
                "normalization needs a TailCertificate for it"
            )

    log_m = w.log_level_mass()
    log_tails = []
    for side in needed:
        cert = by_side[side]
        _check_certificate(w, cert)
        boundary = log_m[-1] if side == "positive" else log_m[0]
        log_tails.append(boundary + math.log(cert.rho_bar) - math.log1p(-cert.rho_bar))

    log_range = float(logsumexp(np.concatenate([w.log_b, w.log_d])))
    log_tail = float(logsumexp(log_tails)) if log_tails else -math.inf
    log_C = float(np.logaddexp(log_range, log_tail))
    tail_error = math.exp(log_tail - log_C) if log_tails else 0.0
    logger.info("normalised [%d, %d]: log C = %.12g, tail_error = %.3g", w.n_min, w.n_max, log_C, tail_error)

    return StationaryDistribution(
        w.n_min,
        w.n_max,
        np.exp(w.log_b - log_C),
        np.exp(w.log_d - log_C),
        log_C,
        tail_error,
        topo,
        tuple(by_side[s] for s in needed),
    )


#### Ergodicity ####


def _side_series(log_b: np.ndarray, log_d: np.ndarray, side: Side):
    """
    Log criterion summands and log level masses along one side.

    Positive side: pairs `(n,B), (n+1,D)` for n >= 0. Negative side: pairs
    `(-n,B), (-n+1,D)` for n >= 1. The arrays start at level 0 and run outwards.
    """
    with np.errstate(invalid="ignore"):
        if side == "positive":
            log_a = np.logaddexp(log_b[:-1], log_d[1:])
            log_m = np.logaddexp(log_b, log_d)
        else:
            # arrays run from level 0 downwards
            b, d = log_b[::-1], log_d[::-1]
            log_a = np.logaddexp(b[1:], d[:-1])
            log_m = np.logaddexp(b, d)
    return log_a, log_m


def _outward_logs(rates: RateSet, reach: int) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Non-strict log weights per side on levels 0..reach (0..-reach on the negative side)."""
    if rates.topology.kind == "one-sided":
        log_b, log_d, *_ = _one_sided_logs(rates, reach, strict=False)
        return {"positive": (log_b, log_d)}
    log_b, log_d = _two_sided_logs(rates, -reach, reach, strict=False)
    return {
        "positive": (log_b[reach:], log_d[reach:]),
        "negative": (log_b[: reach + 1], log_d[: reach + 1]),
    }


def criterion_summands(rates: RateSet, side: Side = "positive", n_max: int = 64) -> np.ndarray:
    """
    Natural logs of the ergodicity criterion summands up to index `n_max`.

    On the positive side `a_n = x(n,B) + x(n+1,D)` for `n = 0..n_max`; on the negative side
    `a_n = x(-n,B) + x(-n+1,D)` for `n = 1..n_max`. Weights are scaled as in
    `one_sided_weights` / `two_sided_weights`. Values that cannot be computed (overflow,
    undefined rates) come back as nan or inf rather than raising.
    """
    if rates.topology.kind == "finite":
        raise ValueError("the criterion series is only defined on infinite topologies")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    arrays = _outward_logs(rates, n_max + 1)
    if side not in arrays:
        raise ValueError(f"{rates.topology} has no {side!r} side")
    log_a, _ = _side_series(*arrays[side], side)
    return log_a[:n_max] if side == "negative" else log_a[: n_max + 1]


def _certificate_from(log_m: np.ndarray, ev: SeriesEvidence, side: Side) -> TailCertificate | None:
    w0, hi = ev.window_used
    # level-mass ratios m(n)/m(n-1) for w0 < n <= hi, measured outwards from level 0
    seg = log_m[w0 : hi + 1]
    if seg.size < 2 or not np.all(np.isfinite(seg)):
        return None
    rho = float(np.exp(np.diff(seg).max()))
    if not rho < 1.0:
        return None
    return TailCertificate(n0=w0, rho_bar=rho, side=side)


def ergodicity(
    rates: RateSet, window: tuple[int, int] = DEFAULT_WINDOW
) -> ErgodicityVerdict:
    """
    Classify ergodicity from the series of weight pairs.

    Summands are `a_n = x(n,B) + x(n+1,D)` (up to a constant factor). The series is
    classified with `classify_series`; a two-sided rate set is ergodic only if both sides
    converge, and not ergodic as soon as one side diverges.

    Parameters
    ----------
    rates
        Any rate set. Finite ones are ergodic without further checks.
    window
        `(w0, w1)` with `w1 > w0 >= 2`.

    Returns
    -------
    ErgodicityVerdict

    Examples
    --------
    ```{python}
    from altbd import ergodicity
    from altbd.presets import build_preset

    ergodicity(build_preset("dam", {}).rates).verdict
    ```
    """
    w0, w1 = window
    if not (w1 > w0 >= 2):
        raise ValueError(f"window must satisfy w1 > w0 >= 2, got {window}")
    if rates.topology.kind == "finite":
        return ErgodicityVerdict("Ergodic", {}, (w0, w1))

    arrays = _outward_logs(rates, w1 + 1)
    sides: list[Side] = list(arrays)

    evidence: dict[str, SeriesEvidence] = {}
    certificates: list[TailCertificate] = []
    for side in sides:
        log_a, log_m = _side_series(*arrays[side], side)
        offset = 0 if side == "positive" else 1
        ev = classify_series(log_a, offset=offset, window=(w0, w1))
        evidence[side] = ev
        if ev.branch == "ratio":
            cert = _certificate_from(log_m, ev, side)
            if cert is not None:
                certificates.append(cert)

    outcomes = [evidence[s].verdict for s in sides]
    if "Divergent" in outcomes:
        verdict = "NotErgodic"
    elif all(o == "Convergent" for o in outcomes):
        verdict = "Ergodic"
    else:
        verdict = "Inconclusive"
    logger.info("ergodicity over window %s: %s (%s)", (w0, w1), verdict, ", ".join(outcomes))
    return ErgodicityVerdict(verdict, evidence, (w0, w1), certificates)


#### Dense oracle ####


def _generator(rates: RateSet, n_min: int, n_max: int):
    states = list(rates.states(n_min, n_max))
    index = {s: i for i, s in enumerate(states)}
    Q = np.zeros((len(states), len(states)))
    for i, s in enumerate(states):
        for t, q in transitions(rates, s):
            j = index.get(t)
            # reflecting truncation: rates leaving the range are dropped
            if j is not None:
                Q[i, j] += q
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return states, Q


def _gth(Q: np.ndarray) -> np.ndarray:
    P = Q.copy()
    np.fill_diagonal(P, 0.0)
    S = P.shape[0]
    for k in range(S - 1, 0, -1):
        s = P[k, :k].sum()
        if not s > 0:
            raise SingularSystem(f"state {k} has no path back to lower-indexed states")
        P[:k, k] /= s
        P[:k, :k] += np.outer(P[:k, k], P[k, :k])
    x = np.zeros(S)
    x[0] = 1.0
    for k in range(1, S):
        x[k] = x[:k] @ P[:k, k]
    return x / x.sum()


def _lu(Q: np.ndarray) -> np.ndarray:
    A = Q.T.copy()
    A[-1, :] = 1.0
    rhs = np.zeros(A.shape[0])
    rhs[-1] = 1.0
    try:
        x = linalg.solve(A, rhs)
    except linalg.LinAlgError as e:
        raise SingularSystem(str(e)) from e
    return x


def dense_balance_solve(
    rates: RateSet,
    truncation: tuple[int, int] | None = None,
    method: Literal["gth", "lu"] = "gth",
) -> StationaryDistribution:
    """
    Solve `x Q = 0, sum(x) = 1` on a truncated state space by dense linear algebra.

    Transitions leaving the level range are dropped (births at the top, deaths at the
    bottom), so the truncated chain is again conservative.

    Parameters
    ----------
    rates
        Any rate set.
    truncation
        `(n_min, n_max)`; defaults to the whole support of a finite rate set.
    method
        "gth" (Grassmann-Taksar-Heyman state reduction, no subtractions) or "lu"
        (`scipy.linalg.solve` on the bordered system).

    Raises
    ------
    SingularSystem
        If the truncated chain is not irreducible.
    """
    if truncation is None:
        if rates.topology.kind != "finite":
            raise ValueError(f"a truncation is required for a {rates.topology} rate set")
        truncation = (0, rates.topology.n)
    n_min, n_max = truncation
    if n_max <= n_min:
        raise ValueError(f"truncation must cover at least 2 levels, got {truncation}")
    for n in (n_min, n_max):
        if not rates.topology.contains(n):
            raise ValueError(f"truncation level {n} is outside {rates.topology}")

    states, Q = _generator(rates, n_min, n_max)
    graph = csr_matrix(Q > 0)
    n_comp, _ = connected_components(graph, directed=True, connection="strong")
    if n_comp != 1:
        raise SingularSystem(
            f"the chain truncated to [{n_min}, {n_max}] splits into {n_comp} "
            "communicating classes"
        )

    if method == "gth":
        x = _gth(Q)
    elif method == "lu":
        x = _lu(Q)
    else:
        raise ValueError(f"method must be 'gth' or 'lu', got {method!r}")
    logger.debug("dense %s solve on %d states", method, len(states))

    x = np.clip(x, 0.0, None)
    x /= x.sum()
    return StationaryDistribution(
        n_min, n_max, x[0::2].copy(), x[1::2].copy(), 0.0, 0.0, rates.topology
    )


def balance_residual(w: WeightTable, rates: RateSet) -> float:
    """
    Largest relative violation of the global balance equations by a weight table.

    Only equations whose every term lies inside the table range are evaluated. Each
    equation compares `x(z) * q(z)` with `sum_y x(y) q(y, z)` relative to the larger side.
    """
    worst = 0.0
    lo, hi = w.n_min, w.n_max
    for n in range(lo, hi + 1):
        for phase in (Phase.B, Phase.D):
            z = ChainState(n, phase)
            out_terms = [w.log_weight(n, phase) + math.log(q) for _, q in transitions(rates, z)]
            in_terms = []
            interior = True
            for m in (n - 1, n, n + 1):
                if not rates.topology.contains(m):
                    continue
                for y_phase in (Phase.B, Phase.D):
                    y = ChainState(m, y_phase)
                    for t, q in transitions(rates, y):
                        if t != z:
                            continue
                        if not lo <= m <= hi:
                            interior = False
                            break
                        in_terms.append(w.log_weight(m, y_phase) + math.log(q))
            if not interior:
                continue
            terms = out_terms + in_terms
            finite = [t for t in terms if t > -math.inf]
            if not finite:
                continue
            top = max(finite)
            out = math.fsum(math.exp(t - top) for t in out_terms)
            inflow = math.fsum(math.exp(t - top) for t in in_terms)
            scale = max(out, inflow)
            if scale > 0:
                worst = max(worst, abs(out - inflow) / scale)
    return worst
