"""
Numerical classification of positive series from their log-summands.

Both the ergodicity criterion and the non-explosion criteria reduce to deciding whether a
series of positive terms converges. No finite computation can settle that in general, so
the decision is a fixed ladder of tests over a window of indices, and "Inconclusive" is an
ordinary outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
from typing import Literal
import warnings

import numpy as np

__all__ = [
    "SeriesVerdict",
    "SeriesEvidence",
    "classify_series",
    "DEFAULT_WINDOW",
    "EPS",
    "FLOOR",
]

logger = logging.getLogger(__name__)

SeriesVerdict = Literal["Convergent", "Divergent", "Inconclusive"]

DEFAULT_WINDOW = (16, 4096)
EPS = 1e-6
FLOOR = 0.99

# the ratio gap over the second half of the window must keep this share of the first
# half's gap before the geometric test is trusted
GAP_STABILITY = 0.9


@dataclass
class SeriesEvidence:
    """
    Everything the ladder looked at when classifying one series.

    Attributes
    ----------
    verdict
        "Convergent", "Divergent" or "Inconclusive".
    branch
        Which rung decided: "ratio", "non-vanishing", "bertrand" or "none".
    window
        The requested index window `(w0, w1)`.
    window_used
        The window after truncation at the first non-finite summand, or None if nothing
        usable was left.
    log_terms
        Natural logs of the summands from index `offset` on.
    """

    verdict: SeriesVerdict
    branch: str
    window: tuple[int, int]
    window_used: tuple[int, int] | None
    offset: int
    log_terms: np.ndarray = field(repr=False)
    log_partial_sums: np.ndarray = field(repr=False)
    s_values: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    sup_ratio: float | None = None
    gap_first: float | None = None
    gap_second: float | None = None
    min_term_ratio: float | None = None
    s_min: float | None = None
    s_max: float | None = None
    rho: float | None = None
    truncated_at: int | None = None
    reason: str = ""

    @property
    def partial_sum(self) -> float:
        """The last partial sum over the usable terms (may be inf for huge sums)."""
        if self.log_partial_sums.size == 0:
            return 0.0
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_partial_sums[-1]))

    def to_dict(self) -> dict:
        def opt(x):
            return None if x is None or not math.isfinite(x) else float(x)

        return {
            "verdict": self.verdict,
            "branch": self.branch,
            "window": list(self.window),
            "window_used": list(self.window_used) if self.window_used else None,
            "offset": self.offset,
            "truncated_at": self.truncated_at,
            "sup_ratio": opt(self.sup_ratio),
            "gap_first": opt(self.gap_first),
            "gap_second": opt(self.gap_second),
            "min_term_ratio": opt(self.min_term_ratio),
            "s_min": opt(self.s_min),
            "s_max": opt(self.s_max),
            "rho": opt(self.rho),
            "reason": self.reason,
            "log_terms": [opt(x) for x in self.log_terms],
            "log_partial_sums": [opt(x) for x in self.log_partial_sums],
            "s_values": [opt(x) for x in self.s_values],
        }


def classify_series(
    log_terms,
    *,
    offset: int = 0,
    window: tuple[int, int] = DEFAULT_WINDOW,
    eps: float = EPS,
    floor: float = FLOOR,
) -> SeriesEvidence:
    """
    Decide convergence of `sum a_n` from `log a_n`, `n = offset, offset+1, ...`.

    The ladder, evaluated on the window `w0 <= n <= w1`:

    1. geometric: if `a_n / a_(n-1) <= 1 - eps` throughout and the ratio does not creep
       towards 1 (the gap over the window's second half keeps 90% of the first half's
       gap), the series converges;
    2. non-vanishing: if `a_n >= floor * a_w0` throughout, the series diverges;
    3. Bertrand-De Morgan: write `a_n / a_(n+1) = 1 + 1/n + s_n / (n ln n)`. If
       `min s_n > 1 + eps` the series converges, if `max s_n < 1 - eps` it diverges;
    4. otherwise the result is inconclusive.

    The window is cut at the first summand whose log is not finite (overflow, zero or an
    undefined rate). With fewer than 3 usable indices left the result is inconclusive.

    Parameters
    ----------
    log_terms
        Natural logs of the summands, the first one belonging to index `offset`.
    offset
        The index of `log_terms[0]`.
    window
        `(w0, w1)` with `w1 > w0 >= 2`.
    eps, floor
        Thresholds of the geometric / Bertrand-De Morgan and the non-vanishing rungs.

    Returns
    -------
    SeriesEvidence
    """
    w0, w1 = (int(w) for w in window)
    if not (w1 > w0 >= 2):
        raise ValueError(f"window must satisfy w1 > w0 >= 2, got ({w0}, {w1})")
    if offset > w0:
        raise ValueError(f"series starts at n={offset}, after the window start w0={w0}")

    log_terms = np.asarray(log_terms, dtype=float)
    bad = np.flatnonzero(~np.isfinite(log_terms))
    truncated_at = int(bad[0]) + offset if bad.size else None
    usable = log_terms[: bad[0]] if bad.size else log_terms
    log_partial = np.logaddexp.accumulate(usable) if usable.size else np.empty(0)

    last = offset + usable.size - 1
    hi = min(w1, last)

    def result(verdict: SeriesVerdict, branch: str, **kw) -> SeriesEvidence:
        logger.debug("series window (%d, %d): %s via %s", w0, hi, verdict, branch)
        return SeriesEvidence(
            verdict=verdict,
            branch=branch,
            window=(w0, w1),
            offset=offset,
            log_terms=log_terms,
            log_partial_sums=log_partial,
            truncated_at=truncated_at,
            **kw,
        )

    if truncated_at is not None and truncated_at <= w1:
        warnings.warn(
            f"series summands stop being finite at n={truncated_at}; "
            f"window ({w0}, {w1}) truncated",
            UserWarning,
            stacklevel=3,
        )
    if hi - w0 + 1 < 3:
        return result(
            "Inconclusive",
            "none",
            window_used=None,
            reason=f"fewer than 3 finite summands in the window ({w0}, {w1})",
        )

    la = usable[w0 - offset : hi - offset + 1]
    # log(a_n / a_(n-1)) for n = w0+1 .. hi
    log_ratio = np.diff(la)
    half = max(1, log_ratio.size // 2)
    sup_log = float(log_ratio.max())
    gap_first = float(-np.expm1(log_ratio[:half].max()))
    gap_second = float(-np.expm1(log_ratio[half:].max())) if log_ratio.size > 1 else gap_first
    sup_ratio = float(np.exp(sup_log))
    min_term_ratio = float(np.exp(la.min() - la[0]))

    ns = np.arange(w0, hi, dtype=float)
    # s_n from a_n / a_(n+1) = exp(-log_ratio)
    s_values = (np.expm1(-log_ratio) - 1.0 / ns) * ns * np.log(ns)
    s_min = float(s_values.min())
    s_max = float(s_values.max())

    common = dict(
        window_used=(w0, hi),
        s_values=s_values,
        sup_ratio=sup_ratio,
        gap_first=gap_first,
        gap_second=gap_second,
        min_term_ratio=min_term_ratio,
        s_min=s_min,
        s_max=s_max,
    )

    if sup_log <= math.log1p(-eps) and gap_second >= GAP_STABILITY * gap_first:
        return result("Convergent", "ratio", rho=sup_ratio, **common)
    if min_term_ratio >= floor:
        return result("Divergent", "non-vanishing", **common)
    if s_min > 1.0 + eps:
        return result("Convergent", "bertrand", **common)
    if s_max < 1.0 - eps:
        return result("Divergent", "bertrand", **common)
    return result(
        "Inconclusive",
        "none",
        reason=f"s_n ranges over [{s_min:.6g}, {s_max:.6g}] around 1",
        **common,
    )
