"""
Non-explosion (regularity) of alternating birth-death processes.

A process is non-explosive exactly when the only bounded nonnegative solution `y` of
`(1 + q(z)) y(z) = sum_z' q(z, z') y(z')` is zero (Reuter's criterion). On the one-sided
level set the solution is pinned down by its value at level 0, which turns the criterion
into a two-term recursion. The verdict functions test the sufficient series that bound
that recursion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math
from typing import Callable, Literal, Sequence, Union
import warnings

import numpy as np

from .errors import AltbdError, DegenerateDenominator, NumericalBreakdown
from .model import RateSet
from .series import DEFAULT_WINDOW, SeriesEvidence, classify_series

__all__ = [
    "ReuterIterate",
    "RecursionCoeffs",
    "TwoSidedTrace",
    "RegularityVerdict",
    "reuter_coeffs",
    "reuter_initial",
    "reuter_recursion_one_sided",
    "reuter_bounds",
    "reuter_log_bounds",
    "reuter_residual",
    "two_sided_recursion",
    "regularity_one_sided",
    "regularity_two_sided",
    "regularity",
]

logger = logging.getLogger(__name__)

# iterates are rescaled once y_b grows past this
_RESCALE = 1e200
_LOG_RESCALE = math.log(_RESCALE)

Number = Union[float, Fraction]


#### Types ####


@dataclass(frozen=True)
class ReuterIterate:
    """
    One level of a solution of the Reuter equations.

    The solution values are `y_b * exp(log_scale)` and `y_d * exp(log_scale)`; the scale
    keeps long runs from overflowing.
    """

    n: int
    y_b: float
    y_d: float
    log_scale: float = 0.0

    @property
    def log_y_b(self) -> float:
        return math.log(self.y_b) + self.log_scale

    @property
    def log_y_d(self) -> float:
        return math.log(self.y_d) + self.log_scale

    def to_dict(self) -> dict:
        return {"n": self.n, "y_b": self.y_b, "y_d": self.y_d, "log_scale": self.log_scale}


@dataclass(frozen=True)
class RecursionCoeffs:
    """
    Coefficients of the Reuter recursions at level `n`.

    Upward, `y(n+1,B) = y(n,B) (D_n + E_n) - y(n,D) D_n`. Downward, at level `-n`,
    `y(-n-1,D) = y(-n,D) (B_minus_n + C_minus_n) - y(-n,B) B_minus_n`. The downward pair is
    None when level `-n-1` does not exist.
    """

    n: int
    D: float
    E: float
    B_minus_n: float | None = None
    C_minus_n: float | None = None


@dataclass
class TwoSidedTrace:
    """
    Iterates of the two-sided recursions started from an anchor.

    `positive` runs from the anchor level upwards and `negative` from the anchor level
    downwards; both start with the anchor itself. `monotone_from` gives, per side, the
    first level from which growth away from the anchor is observed to be monotone, or
    None.
    """

    anchor_level: int
    positive: list[ReuterIterate]
    negative: list[ReuterIterate]
    monotone_from: dict[str, int | None]


@dataclass
class RegularityVerdict:
    """
    Outcome of a non-explosion test.

    Attributes
    ----------
    verdict
        "NonExplosive", "Explosive" or "Inconclusive".
    series
        Evidence per sufficient series: "nonexplosion" and "explosion" on the positive
        side, "nonexplosion-negative" on the negative side of two-sided rate sets.
    log_bounds
        `(n, log lower, log upper)` product bounds on `y(n+1, B)` at the last recursion
        step, one-sided only.
    trace_length
        Number of recursion iterates computed.
    monotone_from
        Two-sided only: the monotone regime observed per side from the default anchor.
    notes
        Anything that went wrong while collecting secondary evidence.
    """

    verdict: Literal["NonExplosive", "Explosive", "Inconclusive"]
    series: dict[str, SeriesEvidence] = field(default_factory=dict)
    log_bounds: tuple[int, float, float] | None = None
    trace_length: int = 0
    monotone_from: dict[str, int | None] | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "series": {k: ev.to_dict() for k, ev in self.series.items()},
            "trace_length": self.trace_length,
            "notes": list(self.notes),
        }
        if self.log_bounds is not None:
            n, lo, hi = self.log_bounds
            out["log_bounds"] = {"n": n, "log_lower": lo, "log_upper": hi}
        if self.monotone_from is not None:
            out["monotone_from"] = dict(self.monotone_from)
        return out


#### Coefficients ####


def _rates_at(rates: RateSet, n: int, num: Callable[[float], Number]) -> dict[str, Number]:
    r = {name: num(rates.rate(name, n)) for name in ("lambda", "mu", "delta", "beta", "kappa", "nu")}
    r["LambdaPlus"] = 1 + r["lambda"] + r["kappa"] + r["delta"]
    r["MPlus"] = 1 + r["mu"] + r["nu"] + r["beta"]
    return r


def _up_coeffs(rates: RateSet, n: int, num=float):
    """`(D_n, E_n, D_n + E_n)` together with the rates at level n+1."""
    lo, hi = _rates_at(rates, n, num), _rates_at(rates, n + 1, num)
    den = lo["lambda"] * hi["MPlus"] + hi["beta"] * lo["kappa"]
    if den == 0:
        raise DegenerateDenominator("lambda_n MPlus_(n+1) + beta_(n+1) kappa_n", n)
    D = (lo["delta"] * hi["MPlus"] + hi["mu"] * lo["kappa"]) / den
    E = ((1 + lo["lambda"]) * hi["MPlus"] + (1 + hi["beta"]) * lo["kappa"]) / den
    both = (lo["LambdaPlus"] * hi["MPlus"] - hi["nu"] * lo["kappa"]) / den
    return D, E, both, hi


def _down_coeffs(rates: RateSet, k: int, num=float):
    """`(B, C, B + C)` at level k together with the rates at level k-1."""
    hi, lo = _rates_at(rates, k, num), _rates_at(rates, k - 1, num)
    den = hi["mu"] * lo["LambdaPlus"] + lo["delta"] * hi["nu"]
    if den == 0:
        raise DegenerateDenominator("mu_k LambdaPlus_(k-1) + delta_(k-1) nu_k", k)
    B = (hi["beta"] * lo["LambdaPlus"] + lo["lambda"] * hi["nu"]) / den
    C = ((1 + hi["mu"]) * lo["LambdaPlus"] + (1 + lo["delta"]) * hi["nu"]) / den
    both = (hi["MPlus"] * lo["LambdaPlus"] - lo["kappa"] * hi["nu"]) / den
    return B, C, both, lo


def _check_sum(what: str, n: int, parts: float, whole: float) -> None:
    if not math.isclose(parts, whole, rel_tol=1e-12):
        warnings.warn(
            f"{what} at n={n}: the separately computed coefficients sum to {parts!r} "
            f"but the combined fraction gives {whole!r}",
            UserWarning,
            stacklevel=3,
        )


def reuter_coeffs(rates: RateSet, n: int) -> RecursionCoeffs:
    """
    Recursion coefficients at level `n`.

    Parameters
    ----------
    rates
        Any rate set; level `n + 1` must exist.
    n
        The level. The downward coefficients are taken at level `-n` and need level
        `-n-1`, so they are only available on two-sided rate sets.

    Returns
    -------
    RecursionCoeffs

    Raises
    ------
    DegenerateDenominator
        A recursion denominator vanishes (only possible with `allow_zeros`).

    Examples
    --------
    ```{python}
    from altbd import reuter_coeffs
    from altbd.model import Topology, constant_rate_set

    reuter_coeffs(constant_rate_set(1.0, Topology.two_sided()), 0)
    ```
    """
    D, E, both, _ = _up_coeffs(rates, n)
    _check_sum("D + E", n, D + E, both)
    B = C = None
    if rates.topology.contains(-n - 1) and rates.topology.contains(-n):
        B, C, both, _ = _down_coeffs(rates, -n)
        _check_sum("B + C", -n, B + C, both)
    return RecursionCoeffs(n, D, E, B, C)


def reuter_initial(rates: RateSet) -> tuple[float, float]:
    """The canonical one-sided starting value `(1, beta_0 / (1 + beta_0))`."""
    beta0 = rates.rate("beta", 0)
    return 1.0, beta0 / (1.0 + beta0)


#### Recursions ####


def _log_of(x: Number) -> float:
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def _iterate(n: int, y_b: Number, y_d: Number, log_scale: float) -> ReuterIterate:
    if isinstance(y_b, Fraction):
        log_b, log_d = _log_of(y_b), _log_of(y_d)
        top = max(log_b, log_d)
        if top > _LOG_RESCALE:
            return ReuterIterate(n, math.exp(log_b - top), math.exp(log_d - top), top)
        return ReuterIterate(n, float(y_b), float(y_d), 0.0)
    return ReuterIterate(n, y_b, y_d, log_scale)


def _show(x: Number) -> str:
    try:
        return repr(float(x))
    except OverflowError:
        return "-inf" if x < 0 else "inf"


def _valid(*values: Number) -> bool:
    return all(v > 0 and (isinstance(v, Fraction) or math.isfinite(v)) for v in values)


def _run_up(rates: RateSet, n0: int, start, n_steps: int, num) -> list[ReuterIterate]:
    y_b, y_d = num(start[0]), num(start[1])
    scale = 0.0
    out = [_iterate(n0, y_b, y_d, scale)]
    for n in range(n0, n0 + n_steps):
        D, E, _, nxt = _up_coeffs(rates, n, num)
        new_b = y_b * E + D * (y_b - y_d)
        new_d = (new_b * nxt["beta"] + y_d * nxt["mu"] + y_b * nxt["nu"]) / nxt["MPlus"]
        if not _valid(new_b, new_d):
            raise NumericalBreakdown(
                f"iterate at level {n + 1} is not positive: y_b={_show(new_b)}, y_d={_show(new_d)}"
            )
        y_b, y_d = new_b, new_d
        if num is float and max(y_b, y_d) > _RESCALE:
            top = max(y_b, y_d)
            scale += math.log(top)
            y_b, y_d = y_b / top, y_d / top
        out.append(_iterate(n + 1, y_b, y_d, scale))
    return out


def _run_down(rates: RateSet, n0: int, start, n_steps: int, num) -> list[ReuterIterate]:
    y_b, y_d = num(start[0]), num(start[1])
    scale = 0.0
    out = [_iterate(n0, y_b, y_d, scale)]
    for k in range(n0, n0 - n_steps, -1):
        B, C, _, prv = _down_coeffs(rates, k, num)
        new_d = y_d * C + B * (y_d - y_b)
        new_b = (new_d * prv["delta"] + y_b * prv["lambda"] + y_d * prv["kappa"]) / prv["LambdaPlus"]
        if not _valid(new_b, new_d):
            raise NumericalBreakdown(
                f"iterate at level {k - 1} is not positive: y_b={_show(new_b)}, y_d={_show(new_d)}"
            )
        y_b, y_d = new_b, new_d
        if num is float and max(y_b, y_d) > _RESCALE:
            top = max(y_b, y_d)
            scale += math.log(top)
            y_b, y_d = y_b / top, y_d / top
        out.append(_iterate(k - 1, y_b, y_d, scale))
    return out


def _with_fallback(run, *args) -> list[ReuterIterate]:
    try:
        return run(*args, float)
    except NumericalBreakdown as e:
        warnings.warn(
            f"{e}; rerunning the recursion in exact rational arithmetic",
            UserWarning,
            stacklevel=3,
        )
    try:
        return run(*args, Fraction)
    except NumericalBreakdown as e:
        raise NumericalBreakdown(f"{e} (exact arithmetic)") from None


def reuter_recursion_one_sided(
    rates: RateSet, n_steps: int, exact: bool = False
) -> list[ReuterIterate]:
    """
    Iterate the one-sided Reuter recursion from `(1, beta_0 / (1 + beta_0))`.

    `y(n+1,B) = y(n,B) (D_n + E_n) - y(n,D) D_n` and
    `y(n+1,D) = (beta_(n+1) y(n+1,B) + mu_(n+1) y(n,D) + nu_(n+1) y(n,B)) / MPlus_(n+1)`.

    Parameters
    ----------
    rates
        A one-sided or finite rate set.
    n_steps
        Number of steps; the result has `n_steps + 1` iterates, levels `0..n_steps`.
    exact
        Run in `fractions.Fraction` arithmetic from the start. Otherwise the float run
        switches to exact arithmetic (with a `UserWarning`) if an iterate stops being
        positive.

    Raises
    ------
    NumericalBreakdown
        An iterate is not positive even in exact arithmetic.
    DegenerateDenominator
        `lambda_n MPlus_(n+1) + beta_(n+1) kappa_n` vanishes.

    Examples
    --------
    ```{python}
    from altbd import reuter_recursion_one_sided
    from altbd.model import constant_rate_set

    reuter_recursion_one_sided(constant_rate_set(1.0), 2)
    ```
    """
    if rates.topology.kind == "two-sided":
        raise ValueError("use two_sided_recursion for two-sided rate sets")
    if n_steps < 0:
        raise ValueError(f"n_steps must be >= 0, got {n_steps}")
    upper = rates.topology.upper
    if upper is not None and n_steps > upper:
        raise ValueError(f"{rates.topology} allows at most {upper} steps, got {n_steps}")
    start = reuter_initial(rates)
    if exact:
        return _run_up(rates, 0, start, n_steps, Fraction)
    return _with_fallback(_run_up, rates, 0, start, n_steps)


def reuter_log_bounds(rates: RateSet, n: int) -> tuple[float, float]:
    """Natural logs of the product bounds `prod E_k` and `prod (D_k + E_k)`, `k = 0..n`."""
    log_lo = log_hi = 0.0
    for k in range(n + 1):
        D, E, _, _ = _up_coeffs(rates, k)
        log_lo += math.log(E)
        log_hi += math.log(D + E)
    return log_lo, log_hi


def reuter_bounds(rates: RateSet, n: int) -> tuple[float, float]:
    """
    Bounds `lower < y(n+1, B) < upper` on the one-sided iterates.

    `lower = prod_(k=0..n) E_k` and `upper = prod_(k=0..n) (E_k + D_k)`, accumulated in log
    space. Values too large for a float come back as inf; use `reuter_log_bounds` then.
    """
    if rates.topology.kind == "two-sided":
        raise ValueError("the product bounds hold for the one-sided recursion only")
    log_lo, log_hi = reuter_log_bounds(rates, n)
    return _exp(log_lo), _exp(log_hi)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _monotone_from(its: Sequence[ReuterIterate], side: str) -> int | None:
    """First level from which the side grows monotonically until the end of the trace."""
    first = None
    for i in range(len(its) - 1, -1, -1):
        it = its[i]
        if side == "positive":
            gap = it.y_b > it.y_d
            grows = i == len(its) - 1 or its[i + 1].log_y_b > it.log_y_b
        else:
            gap = it.y_d >= it.y_b
            grows = i == len(its) - 1 or its[i + 1].log_y_d > it.log_y_d
        if not (gap and grows):
            break
        first = it.n
    return first


def two_sided_recursion(
    rates: RateSet,
    anchor_level: int = 0,
    n_steps: int = 200,
    anchor: tuple[float, float] = (1.0, 1.0),
) -> TwoSidedTrace:
    """
    Run the Reuter recursions up and down from a user-supplied anchor.

    The upward side uses the `D`/`E` recursion of the one-sided case; the downward side
    solves the same equations for level `k - 1`:
    `y(k-1,D) = y(k,D) (B_k + C_k) - y(k,B) B_k` and
    `y(k-1,B) = (delta_(k-1) y(k-1,D) + lambda_(k-1) y(k,B) + kappa_(k-1) y(k,D)) / LambdaPlus_(k-1)`.

    Parameters
    ----------
    rates
        A two-sided rate set.
    anchor_level
        The level of the anchor.
    n_steps
        Steps taken in each direction.
    anchor
        `(y_b, y_d)` at the anchor level, both positive.

    Raises
    ------
    NumericalBreakdown
        The anchor does not lead to a positive solution on the computed range.
    """
    if rates.topology.kind != "two-sided":
        raise ValueError(f"two_sided_recursion needs a two-sided rate set, got {rates.topology}")
    if not (anchor[0] > 0 and anchor[1] > 0):
        raise ValueError(f"anchor values must be positive, got {anchor!r}")
    up = _with_fallback(_run_up, rates, anchor_level, anchor, n_steps)
    down = _with_fallback(_run_down, rates, anchor_level, anchor, n_steps)
    monotone = {"positive": _monotone_from(up, "positive"), "negative": _monotone_from(down, "negative")}
    logger.debug("two-sided recursion from %d: monotone from %s", anchor_level, monotone)
    return TwoSidedTrace(anchor_level, up, down, monotone)


def reuter_residual(rates: RateSet, iterates: Sequence[ReuterIterate]) -> float:
    """
    Largest relative residual of the Reuter equations over a set of iterates.

    The B-equation `(1 + lambda_n + delta_n + kappa_n) y(n,B) = lambda_n y(n+1,B) +
    delta_n y(n,D) + kappa_n y(n+1,D)` is checked wherever level `n+1` is present, and the
    D-equation `(1 + mu_n + beta_n + nu_n) y(n,D) = mu_n y(n-1,D) + beta_n y(n,B) +
    nu_n y(n-1,B)` wherever level `n-1` is present or `n` is the lowest level of the
    topology.
    """
    by_level = {it.n: it for it in iterates}
    lowest = rates.topology.lower
    worst = 0.0

    def rel(lhs: list[float], rhs: list[float]) -> float:
        top = max(lhs + rhs)
        a = math.fsum(math.exp(t - top) for t in lhs)
        b = math.fsum(math.exp(t - top) for t in rhs)
        return abs(a - b) / max(a, b)

    def term(q: float, log_y: float) -> list[float]:
        return [math.log(q) + log_y] if q > 0 else []

    for n, it in sorted(by_level.items()):
        r = _rates_at(rates, n, float)
        nxt = by_level.get(n + 1)
        if nxt is not None:
            lhs = [math.log(r["LambdaPlus"]) + it.log_y_b]
            rhs = (
                term(r["lambda"], nxt.log_y_b)
                + term(r["delta"], it.log_y_d)
                + term(r["kappa"], nxt.log_y_d)
            )
            worst = max(worst, rel(lhs, rhs))
        prv = by_level.get(n - 1)
        if prv is not None or n == lowest:
            lhs = [math.log(r["MPlus"]) + it.log_y_d]
            rhs = term(r["beta"], it.log_y_b)
            if prv is not None:
                rhs += term(r["mu"], prv.log_y_d) + term(r["nu"], prv.log_y_b)
            worst = max(worst, rel(lhs, rhs))
    return worst


#### Verdicts ####


def _log_series(numer: np.ndarray, denom: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        return np.log(numer) - np.log(denom)


def _rate_arrays(rates: RateSet, lo: int, hi: int) -> dict[str, np.ndarray]:
    levels = np.arange(lo, hi + 1)
    with np.errstate(all="ignore"):
        r = {name: rates.evaluate(name, levels, strict=False) for name in ("lambda", "mu", "delta", "beta", "kappa", "nu")}
        r["LambdaPlus"] = 1 + r["lambda"] + r["kappa"] + r["delta"]
        r["MPlus"] = 1 + r["mu"] + r["nu"] + r["beta"]
    return r


def _positive_series(rates: RateSet, w1: int) -> tuple[np.ndarray, np.ndarray]:
    """Log summands of the non-explosion and explosion series for `n = 0..w1`."""
    r = _rate_arrays(rates, 0, w1 + 1)
    at = {k: v[:-1] for k, v in r.items()}
    nxt = {k: v[1:] for k, v in r.items()}
    with np.errstate(all="ignore"):
        den = at["lambda"] * nxt["MPlus"] + nxt["beta"] * at["kappa"]
        nonexpl = _log_series(nxt["MPlus"] + at["kappa"], den)
        expl = _log_series(
            (1 + at["delta"]) * nxt["MPlus"] + (1 + nxt["mu"]) * at["kappa"], den
        )
    return nonexpl, expl


def _negative_series(rates: RateSet, w1: int) -> np.ndarray:
    """Log summands `(LambdaPlus_(-n-1) + nu_(-n)) / (mu_(-n) LambdaPlus_(-n-1) + delta_(-n-1) nu_(-n))`."""
    r = _rate_arrays(rates, -w1 - 1, 0)
    # index 0 is level -w1-1; flip so index n is level -n
    at = {k: v[1:][::-1] for k, v in r.items()}
    below = {k: v[:-1][::-1] for k, v in r.items()}
    with np.errstate(all="ignore"):
        den = at["mu"] * below["LambdaPlus"] + below["delta"] * at["nu"]
        return _log_series(below["LambdaPlus"] + at["nu"], den)


def regularity_one_sided(
    rates: RateSet, window: tuple[int, int] = DEFAULT_WINDOW, steps: int = 200
) -> RegularityVerdict:
    """
    Decide non-explosion of a one-sided process from two sufficient series.

    - If `sum (MPlus_(n+1) + kappa_n) / (lambda_n MPlus_(n+1) + beta_(n+1) kappa_n)`
      diverges, the process is non-explosive.
    - If `sum ((1 + delta_n) MPlus_(n+1) + (1 + mu_(n+1)) kappa_n) / (lambda_n MPlus_(n+1)
      + beta_(n+1) kappa_n)` converges, a bounded nonzero Reuter solution exists and the
      process is explosive.

    Both series are classified with `classify_series`. The recursion is also run for
    `steps` steps and its length and product bounds are attached as evidence.

    Examples
    --------
    ```{python}
    from altbd import regularity_one_sided
    from altbd.model import constant_rate_set

    regularity_one_sided(constant_rate_set(1.0)).verdict
    ```
    """
    if rates.topology.kind != "one-sided":
        raise ValueError(f"regularity_one_sided needs a one-sided rate set, got {rates.topology}")
    w1 = window[1]
    log_u, log_v = _positive_series(rates, w1)
    div = classify_series(log_u, window=window)
    conv = classify_series(log_v, window=window)
    series = {"nonexplosion": div, "explosion": conv}

    nonexplosive = div.verdict == "Divergent"
    explosive = conv.verdict == "Convergent"
    if nonexplosive and explosive:
        warnings.warn(
            "the non-explosion and explosion series were both decided; "
            "the window is too short to tell them apart",
            UserWarning,
            stacklevel=2,
        )
        verdict = "Inconclusive"
    elif nonexplosive:
        verdict = "NonExplosive"
    elif explosive:
        verdict = "Explosive"
    else:
        verdict = "Inconclusive"

    out = RegularityVerdict(verdict, series)
    try:
        its = reuter_recursion_one_sided(rates, steps)
        out.trace_length = len(its)
        if steps > 0:
            out.log_bounds = (steps - 1, *reuter_log_bounds(rates, steps - 1))
    except AltbdError as e:
        out.notes.append(f"recursion stopped: {e}")
    logger.info("regularity over window %s: %s", window, verdict)
    return out


def regularity_two_sided(
    rates: RateSet,
    window: tuple[int, int] = DEFAULT_WINDOW,
    steps: int = 200,
    anchor: tuple[float, float] = (1.0, 1.0),
) -> RegularityVerdict:
    """
    Decide non-explosion of a two-sided process.

    Non-explosive if either the positive-side series
    `sum (MPlus_(n+1) + kappa_n) / (lambda_n MPlus_(n+1) + beta_(n+1) kappa_n)` or the
    negative-side series
    `sum (LambdaPlus_(-n-1) + nu_(-n)) / (mu_(-n) LambdaPlus_(-n-1) + delta_(-n-1) nu_(-n))`
    diverges. Otherwise inconclusive: there is no sufficient test for explosion on the
    integers, so "Explosive" is never returned.
    """
    if rates.topology.kind != "two-sided":
        raise ValueError(f"regularity_two_sided needs a two-sided rate set, got {rates.topology}")
    w1 = window[1]
    log_u, _ = _positive_series(rates, w1)
    series = {
        "nonexplosion": classify_series(log_u, window=window),
        "nonexplosion-negative": classify_series(_negative_series(rates, w1), window=window),
    }
    if any(ev.verdict == "Divergent" for ev in series.values()):
        verdict = "NonExplosive"
    else:
        verdict = "Inconclusive"

    out = RegularityVerdict(verdict, series)
    try:
        trace = two_sided_recursion(rates, 0, steps, anchor)
        out.trace_length = len(trace.positive) + len(trace.negative) - 1
        out.monotone_from = trace.monotone_from
    except AltbdError as e:
        out.notes.append(f"recursion from anchor {anchor} stopped: {e}")
    logger.info("two-sided regularity over window %s: %s", window, verdict)
    return out


def regularity(
    rates: RateSet, window: tuple[int, int] = DEFAULT_WINDOW, steps: int = 200
) -> RegularityVerdict:
    """Dispatch on topology. Processes on finitely many levels never explode."""
    kind = rates.topology.kind
    if kind == "finite":
        return RegularityVerdict("NonExplosive", notes=["finite state space"])
    if kind == "one-sided":
        return regularity_one_sided(rates, window, steps)
    return regularity_two_sided(rates, window, steps)
