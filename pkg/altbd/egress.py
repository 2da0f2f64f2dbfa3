"""
CSV and JSON renderings of every result type.

All text is UTF-8 with "\\n" line endings and "." as the decimal separator. CSV rows
follow the state order `(0, B), (0, D), (1, B), ...`.
"""

from __future__ import annotations

import csv
from fractions import Fraction
import io
import json
import logging
from pathlib import Path
import sys
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np

from .regularity import ReuterIterate
from .simulate import OccupancyReport, occupancy_distribution
from .stationary import StationaryDistribution, WeightTable
from .utils import csv_float, json_float

__all__ = [
    "weights_csv",
    "distribution_csv",
    "occupancy_csv",
    "trace_csv",
    "iterates_csv",
    "weights_to_dict",
    "distribution_to_dict",
    "report_to_dict",
    "to_json",
    "write_text",
]

logger = logging.getLogger(__name__)


def _csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


#### CSV ####


def weights_csv(w: WeightTable) -> str:
    """`n,phase,log_weight` rows of an unnormalised weight table."""
    return _csv(
        ["n", "phase", "log_weight"],
        ([str(n), phase.value, csv_float(v)] for n, phase, v in w.rows()),
    )


def distribution_csv(dist: StationaryDistribution) -> str:
    """`n,phase,probability` rows of a normalised distribution."""
    return _csv(
        ["n", "phase", "probability"],
        ([str(n), phase.value, csv_float(p)] for n, phase, p in dist.rows()),
    )


def occupancy_csv(report: OccupancyReport) -> str:
    """`n,phase,time,fraction` per visited state."""
    fractions = occupancy_distribution(report) if report.total_time > 0 else {}
    return _csv(
        ["n", "phase", "time", "fraction"],
        (
            [str(s.level), s.phase.value, csv_float(t), csv_float(fractions.get(s, 0.0))]
            for s, t in sorted(report.occupancy.items())
        ),
    )


def trace_csv(report: OccupancyReport) -> str:
    """`t,n,phase` event trace of a report recorded with `record_trace=True`."""
    return _csv(
        ["t", "n", "phase"],
        ([csv_float(t), str(n), phase.value] for t, n, phase in report.trace),
    )


def iterates_csv(iterates: Sequence[ReuterIterate]) -> str:
    """`n,log_y_b,log_y_d` rows of a Reuter recursion run."""
    return _csv(
        ["n", "log_y_b", "log_y_d"],
        ([str(it.n), csv_float(it.log_y_b), csv_float(it.log_y_d)] for it in iterates),
    )


#### JSON ####


def weights_to_dict(w: WeightTable) -> dict:
    return {
        "kind": "weights",
        "topology": w.topology.to_config(),
        "n_min": w.n_min,
        "n_max": w.n_max,
        "reference": [w.reference.level, w.reference.phase.value],
        "rows": [{"n": n, "phase": phase.value, "log_weight": v} for n, phase, v in w.rows()],
    }


def distribution_to_dict(dist: StationaryDistribution) -> dict:
    return {
        "kind": "distribution",
        "topology": dist.topology.to_config(),
        "n_min": dist.n_min,
        "n_max": dist.n_max,
        "log_C": dist.log_C,
        "tail_error": dist.tail_error,
        "certificates": [c.to_dict() for c in dist.certificates],
        "rows": [{"n": n, "phase": phase.value, "probability": p} for n, phase, p in dist.rows()],
    }


def report_to_dict(reports: Sequence[OccupancyReport], merged: OccupancyReport) -> dict:
    out = merged.to_dict()
    out["kind"] = "occupancy"
    out["replications"] = [
        {k: v for k, v in rep.to_dict().items() if k != "occupancy"} for rep in reports
    ]
    return out


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating, Fraction)):
        return json_float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, WeightTable):
        return _jsonable(weights_to_dict(obj))
    if isinstance(obj, StationaryDistribution):
        return _jsonable(distribution_to_dict(obj))
    # rate sets, specs and topologies
    if hasattr(obj, "to_config"):
        return _jsonable(obj.to_config())
    # verdicts, certificates, iterates and reports
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    raise TypeError(f"cannot write {type(obj).__name__} as JSON")


def to_json(obj: Any) -> str:
    """
    Pretty-printed JSON text with a trailing newline.

    Result objects are converted through their dict forms. Infinite and undefined numbers
    are written as the strings "inf", "-inf" and "nan".
    """
    return json.dumps(_jsonable(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_text(text: str, out: Optional[Union[str, Path]] = None) -> None:
    """Write to a file (UTF-8, LF line endings), or to stdout when `out` is None or "-"."""
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info("wrote %d bytes to %s", len(text.encode("utf-8")), path)
